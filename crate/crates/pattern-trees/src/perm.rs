//! Permutations in one-line notation, the eight symmetries of the square
//! acting on them, and formal integer combinations of patterns.
//!
//! A permutation of size `n` maps positions `1..=n` to values `1..=n` and is
//! identified with its point set `{(i, values[i])}` in the `n x n` grid. All
//! counting code in this crate works against [`count_pattern_brute`] and
//! [`profile_brute`], the exhaustive oracles defined here.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};

/// A permutation of `{1..n}` in one-line notation, 1-indexed.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    values: Vec<u32>,
}

impl Permutation {
    /// Validates that `values` is a bijection on `{1..n}` with `n >= 1`.
    pub fn new(values: Vec<u32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parse("empty permutation".into()));
        }
        let n = values.len();
        let mut seen = vec![false; n + 1];
        for (pos, &v) in values.iter().enumerate() {
            if v < 1 || v as usize > n {
                return Err(Error::Parse(format!(
                    "value {} at position {} out of range 1..={}",
                    v,
                    pos + 1,
                    n
                )));
            }
            if seen[v as usize] {
                return Err(Error::Parse(format!(
                    "duplicate value {} at position {}",
                    v,
                    pos + 1
                )));
            }
            seen[v as usize] = true;
        }
        Ok(Permutation { values })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            values: (1..=n as u32).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Value at 1-based position `i`.
    pub fn at(&self, i: usize) -> u32 {
        self.values[i - 1]
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// The point set `{(i, pi(i))}`, 1-indexed.
    pub fn points(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as u32 + 1, v))
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.n()];
        for (i, &v) in self.values.iter().enumerate() {
            inv[v as usize - 1] = i as u32 + 1;
        }
        Permutation { values: inv }
    }

    /// The pattern order-isomorphic to a set of points with distinct
    /// x and distinct y coordinates.
    pub fn from_points(points: &[(u32, u32)]) -> Self {
        let mut pts: Vec<(u32, u32)> = points.to_vec();
        pts.sort_unstable();
        let mut by_y: Vec<(u32, usize)> =
            pts.iter().enumerate().map(|(i, &(_, y))| (y, i)).collect();
        by_y.sort_unstable();
        let mut values = vec![0u32; pts.len()];
        for (rank, &(_, idx)) in by_y.iter().enumerate() {
            values[idx] = rank as u32 + 1;
        }
        Permutation { values }
    }

    /// The pattern formed by the values at the given ascending 1-based positions.
    pub fn pattern_at(&self, positions: &[usize]) -> Self {
        let mut vals: Vec<(u32, usize)> = positions
            .iter()
            .enumerate()
            .map(|(j, &i)| (self.at(i), j))
            .collect();
        vals.sort_unstable();
        let mut values = vec![0u32; positions.len()];
        for (rank, &(_, j)) in vals.iter().enumerate() {
            values[j] = rank as u32 + 1;
        }
        Permutation { values }
    }

    /// All permutations of size `n` in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur = (1..=n as u32).collect::<Vec<_>>();
        loop {
            out.push(Permutation {
                values: cur.clone(),
            });
            if !next_perm(&mut cur) {
                break;
            }
        }
        out
    }
}

fn next_perm(v: &mut [u32]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

impl fmt::Display for Permutation {
    /// Compact digits for `n <= 9`, space separated otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n() <= 9 {
            for v in &self.values {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
            write!(f, "{}", parts.join(" "))
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_permutation(s)
    }
}

/// Parses one-line notation: integers separated by whitespace and/or commas.
/// A compact digit string like `2413` is also accepted.
pub fn parse_permutation(text: &str) -> Result<Permutation> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(Error::Parse("empty input".into()));
    }
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    for (idx, tok) in trimmed
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .enumerate()
    {
        tokens.push((idx + 1, tok));
    }
    if tokens.len() == 1 && tokens[0].1.len() > 1 && tokens[0].1.chars().all(|c| c.is_ascii_digit())
    {
        // compact digits, only unambiguous for n <= 9
        let digits = tokens[0].1;
        let values: Vec<u32> = digits.chars().map(|c| c.to_digit(10).unwrap()).collect();
        return Permutation::new(values);
    }
    let mut values = Vec::with_capacity(tokens.len());
    for (pos, tok) in tokens {
        let v: u32 = tok
            .parse()
            .map_err(|_| Error::Parse(format!("token {tok:?} at position {pos} is not an integer")))?;
        values.push(v);
    }
    Permutation::new(values)
}

/// The eight symmetries of the square, acting on permutations through
/// their point sets.
///
/// Rotations are counterclockwise. In one-line notation: reflect-vertical
/// reverses positions, reflect-horizontal complements values, and
/// reflect-main-diagonal is the functional inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum D4 {
    Identity,
    Rot90,
    Rot180,
    Rot270,
    ReflectVertical,
    ReflectHorizontal,
    ReflectMainDiagonal,
    ReflectAntiDiagonal,
}

impl D4 {
    pub const ALL: [D4; 8] = [
        D4::Identity,
        D4::Rot90,
        D4::Rot180,
        D4::Rot270,
        D4::ReflectVertical,
        D4::ReflectHorizontal,
        D4::ReflectMainDiagonal,
        D4::ReflectAntiDiagonal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            D4::Identity => "identity",
            D4::Rot90 => "rot90",
            D4::Rot180 => "rot180",
            D4::Rot270 => "rot270",
            D4::ReflectVertical => "reflect-vertical",
            D4::ReflectHorizontal => "reflect-horizontal",
            D4::ReflectMainDiagonal => "reflect-main-diagonal",
            D4::ReflectAntiDiagonal => "reflect-anti-diagonal",
        }
    }

    pub fn parse(s: &str) -> Result<D4> {
        D4::ALL
            .iter()
            .copied()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown symmetry {s:?}")))
    }

    /// Image of a 1-based grid point under this symmetry of `[1,n]^2`.
    pub fn act_point(self, n: u32, p: (u32, u32)) -> (u32, u32) {
        let (x, y) = p;
        let m = n + 1;
        match self {
            D4::Identity => (x, y),
            D4::Rot90 => (m - y, x),
            D4::Rot180 => (m - x, m - y),
            D4::Rot270 => (y, m - x),
            D4::ReflectVertical => (m - x, y),
            D4::ReflectHorizontal => (x, m - y),
            D4::ReflectMainDiagonal => (y, x),
            D4::ReflectAntiDiagonal => (m - y, m - x),
        }
    }

    /// `g.pi`: the permutation whose point set is the image of `pi`'s.
    pub fn act(self, pi: &Permutation) -> Permutation {
        let n = pi.n() as u32;
        let mut values = vec![0u32; pi.n()];
        for (x, y) in pi.points() {
            let (nx, ny) = self.act_point(n, (x, y));
            values[nx as usize - 1] = ny;
        }
        Permutation { values }
    }

    /// Signed 2x2 matrix of the action on coordinates centered at the
    /// square's midpoint.
    fn matrix(self) -> [[i8; 2]; 2] {
        match self {
            D4::Identity => [[1, 0], [0, 1]],
            D4::Rot90 => [[0, -1], [1, 0]],
            D4::Rot180 => [[-1, 0], [0, -1]],
            D4::Rot270 => [[0, 1], [-1, 0]],
            D4::ReflectVertical => [[-1, 0], [0, 1]],
            D4::ReflectHorizontal => [[1, 0], [0, -1]],
            D4::ReflectMainDiagonal => [[0, 1], [1, 0]],
            D4::ReflectAntiDiagonal => [[0, -1], [-1, 0]],
        }
    }

    /// `self . other`: apply `other` first, then `self`.
    pub fn compose(self, other: D4) -> D4 {
        let (a, b) = (self.matrix(), other.matrix());
        let mut m = [[0i8; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        D4::ALL
            .into_iter()
            .find(|g| g.matrix() == m)
            .expect("signed permutation matrices of order 2 form the dihedral group")
    }

    pub fn inverse(self) -> D4 {
        match self {
            D4::Rot90 => D4::Rot270,
            D4::Rot270 => D4::Rot90,
            g => g,
        }
    }
}

impl fmt::Display for D4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// A formal integer linear combination of patterns. Zero coefficients are
/// never stored.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PatternVector {
    coeffs: BTreeMap<Permutation, BigInt>,
}

impl PatternVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, pattern: Permutation, delta: impl Into<BigInt>) {
        use std::collections::btree_map::Entry;
        let delta = delta.into();
        if delta.is_zero() {
            return;
        }
        match self.coeffs.entry(pattern) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += delta;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(delta);
            }
        }
    }

    pub fn set(&mut self, pattern: Permutation, value: impl Into<BigInt>) {
        let value = value.into();
        if value.is_zero() {
            self.coeffs.remove(&pattern);
        } else {
            self.coeffs.insert(pattern, value);
        }
    }

    pub fn get(&self, pattern: &Permutation) -> BigInt {
        self.coeffs.get(pattern).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Permutation, &BigInt)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Restriction to patterns of size exactly `k`.
    pub fn layer(&self, k: usize) -> PatternVector {
        PatternVector {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(p, _)| p.n() == k)
                .map(|(p, c)| (p.clone(), c.clone()))
                .collect(),
        }
    }

    /// Largest pattern size present.
    pub fn max_size(&self) -> usize {
        self.coeffs.keys().map(|p| p.n()).max().unwrap_or(0)
    }

    /// The combination whose evaluation on `pi` equals evaluating `self`
    /// on `g.pi`; coefficient of `rho` becomes the coefficient of `g.rho`.
    pub fn conjugate(&self, g: D4) -> PatternVector {
        let mut out = PatternVector::new();
        for (p, c) in &self.coeffs {
            out.add(g.inverse().act(p), c.clone());
        }
        out
    }

    /// Text form: one `pattern<TAB>coefficient` line per entry, sorted
    /// lexicographically by pattern value sequence.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (p, c) in &self.coeffs {
            s.push_str(&format!("{p}\t{c}\n"));
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<PatternVector> {
        let mut out = PatternVector::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (pat, coeff) = line.split_once('\t').ok_or_else(|| {
                Error::Parse(format!("line {}: expected pattern<TAB>coefficient", lineno + 1))
            })?;
            let pattern = parse_permutation(pat)?;
            let c: BigInt = coeff
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad coefficient", lineno + 1)))?;
            out.add(pattern, c);
        }
        Ok(out)
    }
}

/// Visits all `k`-subsets of `{0..n-1}` in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact number of occurrences of `tau` in `pi` by enumeration of all
/// `C(n,k)` position subsets. The oracle for everything else.
pub fn count_pattern_brute(tau: &Permutation, pi: &Permutation) -> BigInt {
    let k = tau.n();
    let n = pi.n();
    if k > n {
        return BigInt::zero();
    }
    let mut count: u128 = 0;
    let tau_vals = tau.values();
    for_each_combination(n, k, |subset| {
        if is_occurrence(tau_vals, pi, subset) {
            count += 1;
        }
    });
    BigInt::from(count)
}

fn is_occurrence(tau_vals: &[u32], pi: &Permutation, subset: &[usize]) -> bool {
    // order-isomorphism check: value comparisons must match the pattern's
    let k = subset.len();
    for a in 0..k {
        for b in a + 1..k {
            let lt = pi.values()[subset[a]] < pi.values()[subset[b]];
            if lt != (tau_vals[a] < tau_vals[b]) {
                return false;
            }
        }
    }
    true
}

/// The `k`-profile of `pi` by one pass over all `C(n,k)` subsets.
pub fn profile_brute(pi: &Permutation, k: usize) -> PatternVector {
    let n = pi.n();
    let mut out = PatternVector::new();
    if k == 0 || k > n {
        return out;
    }
    let mut counts: BTreeMap<Permutation, u128> = BTreeMap::new();
    for_each_combination(n, k, |subset| {
        let pos: Vec<usize> = subset.iter().map(|&i| i + 1).collect();
        let pat = pi.pattern_at(&pos);
        *counts.entry(pat).or_insert(0) += 1;
    });
    for (p, c) in counts {
        out.set(p, BigInt::from(c));
    }
    out
}

/// `C(n, k)` as a big integer.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut num = BigInt::from(1);
    for i in 0..k {
        num = num * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    num
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_basics() {
        assert_eq!(parse_permutation("1 3 2").unwrap().values(), &[1, 3, 2]);
        assert_eq!(parse_permutation("2,4,1,3").unwrap().values(), &[2, 4, 1, 3]);
        assert_eq!(parse_permutation("2413").unwrap().values(), &[2, 4, 1, 3]);
        let err = parse_permutation("1 1 2").unwrap_err();
        assert!(err.to_string().contains("duplicate value 1"));
        assert!(parse_permutation("").is_err());
        assert!(parse_permutation("0 1").is_err());
        assert!(parse_permutation("1 5 2").is_err());
    }

    #[test]
    fn d4_one_line_transforms() {
        let p132 = parse_permutation("132").unwrap();
        assert_eq!(D4::ReflectVertical.act(&p132).to_string(), "231");
        assert_eq!(D4::ReflectHorizontal.act(&p132).to_string(), "312");
        let p2413 = parse_permutation("2413").unwrap();
        assert_eq!(D4::ReflectMainDiagonal.act(&p2413).to_string(), "3142");
        assert_eq!(D4::ReflectMainDiagonal.act(&p2413), p2413.inverse());
    }

    #[test]
    fn d4_composition_table_is_dihedral() {
        // closure + identity + inverses + the defining relations
        for g in D4::ALL {
            assert_eq!(g.compose(D4::Identity), g);
            assert_eq!(D4::Identity.compose(g), g);
            assert_eq!(g.compose(g.inverse()), D4::Identity);
        }
        assert_eq!(D4::Rot90.compose(D4::Rot90), D4::Rot180);
        assert_eq!(D4::Rot90.compose(D4::Rot180), D4::Rot270);
        assert_eq!(D4::ReflectVertical.compose(D4::ReflectVertical), D4::Identity);
        // defining relation: conjugating a rotation by a reflection inverts it
        for s in [
            D4::ReflectVertical,
            D4::ReflectHorizontal,
            D4::ReflectMainDiagonal,
            D4::ReflectAntiDiagonal,
        ] {
            assert_eq!(s.compose(D4::Rot90).compose(s), D4::Rot270);
        }
        // composition agrees with pointwise action on all pairs
        let probe = parse_permutation("25143").unwrap();
        for g in D4::ALL {
            for h in D4::ALL {
                assert_eq!(g.compose(h).act(&probe), g.act(&h.act(&probe)));
            }
        }
    }

    #[test]
    fn d4_action_identity_on_counts() {
        // #tau(g.pi) == #(g^{-1}.tau)(pi)
        let pi = parse_permutation("314265").unwrap();
        for g in D4::ALL {
            let gpi = g.act(&pi);
            for tau in Permutation::all(3) {
                let lhs = count_pattern_brute(&tau, &gpi);
                let rhs = count_pattern_brute(&g.inverse().act(&tau), &pi);
                assert_eq!(lhs, rhs, "g={g} tau={tau}");
            }
        }
    }

    #[test]
    fn brute_counts() {
        let c = |t: &str, p: &str| {
            count_pattern_brute(&parse_permutation(t).unwrap(), &parse_permutation(p).unwrap())
        };
        assert_eq!(c("21", "132"), BigInt::from(1));
        assert_eq!(c("12", "1234"), BigInt::from(6));
        assert_eq!(c("123", "1324"), BigInt::from(2));
        assert_eq!(c("123", "21"), BigInt::from(0)); // k > n
    }

    #[test]
    fn brute_profiles() {
        let p = profile_brute(&parse_permutation("12345").unwrap(), 3);
        assert_eq!(p.len(), 1);
        assert_eq!(p.get(&parse_permutation("123").unwrap()), BigInt::from(10));

        let p = profile_brute(&parse_permutation("2413").unwrap(), 3);
        for pat in ["231", "132", "213", "312"] {
            assert_eq!(p.get(&parse_permutation(pat).unwrap()), BigInt::from(1), "{pat}");
        }
        assert_eq!(p.len(), 4);

        assert!(profile_brute(&parse_permutation("21").unwrap(), 3).is_empty());
    }

    #[test]
    fn profile_layers_sum_to_binomials() {
        let pi = parse_permutation("6 2 5 1 4 3 7").unwrap();
        for k in 1..=4 {
            let total: BigInt = profile_brute(&pi, k).iter().map(|(_, c)| c.clone()).sum();
            assert_eq!(total, binomial(7, k));
        }
        let p1 = profile_brute(&pi, 1);
        assert_eq!(p1.get(&Permutation::identity(1)), BigInt::from(7));
    }

    #[test]
    fn catalan_sanity() {
        // permutations avoiding 123 are counted by the Catalan numbers
        let catalan = [1u64, 1, 2, 5, 14, 42, 132, 429, 1430];
        let t123 = parse_permutation("123").unwrap();
        for n in 1..=7 {
            let avoiders = Permutation::all(n)
                .iter()
                .filter(|p| count_pattern_brute(&t123, p).is_zero())
                .count() as u64;
            assert_eq!(avoiders, catalan[n], "n={n}");
        }
    }

    #[test]
    fn pattern_vector_text_roundtrip() {
        let mut v = PatternVector::new();
        v.add(parse_permutation("132").unwrap(), 2);
        v.add(parse_permutation("12").unwrap(), -1);
        let text = v.to_text();
        assert_eq!(PatternVector::parse_text(&text).unwrap(), v);
        assert!(text.starts_with("12\t-1\n"));
    }

    #[test]
    fn conjugate_matches_action() {
        // sum_rho c_rho #rho(g.pi) == sum_mu conj_mu #mu(pi)
        let pi = parse_permutation("231546").unwrap();
        let mut v = PatternVector::new();
        v.add(parse_permutation("21").unwrap(), 3);
        v.add(parse_permutation("132").unwrap(), 1);
        for g in D4::ALL {
            let gpi = g.act(&pi);
            let lhs: BigInt = v
                .iter()
                .map(|(p, c)| c * count_pattern_brute(p, &gpi))
                .sum();
            let rhs: BigInt = v
                .conjugate(g)
                .iter()
                .map(|(p, c)| c * count_pattern_brute(p, &pi))
                .sum();
            assert_eq!(lhs, rhs, "g={g}");
        }
    }
}
