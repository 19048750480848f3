//! Exact linear algebra over the rationals and fast prime-field engines.
//!
//! Rank decisions never touch floating point. Small matrices go through
//! fraction-free (Bareiss) elimination or rational reduced row echelon
//! form directly. Large matrices use word-size prime fields for speed,
//! with exactness recovered by certificates: a full-rank witness modulo a
//! prime proves full rational rank, a rank deficiency is certified by an
//! integer kernel basis lifted by CRT and rational reconstruction and then
//! verified against every row over the integers, and linear solves verify
//! `A x = v` exactly after CRT reconstruction.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// 62-bit primes used by the modular engines, largest first.
pub const PRIMES: [u64; 6] = [
    4611686018427387847,
    4611686018427387817,
    4611686018427387787,
    4611686018427387761,
    4611686018427387751,
    4611686018427387737,
];

#[inline]
pub fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b; // safe: both < 2^62
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn submod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

pub fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    acc
}

pub fn invmod(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

/// Reduces an integer into `[0, p)`.
pub fn to_residue(v: i64, p: u64) -> u64 {
    let m = v % p as i64;
    if m < 0 {
        (m + p as i64) as u64
    } else {
        m as u64
    }
}

pub fn bigint_residue(v: &BigInt, p: u64) -> u64 {
    let m = v.mod_floor(&BigInt::from(p));
    let (_, digits) = m.to_u64_digits();
    match digits.as_slice() {
        [] => 0,
        [d] => *d,
        _ => unreachable!("residue below 2^62"),
    }
}

// ---------------------------------------------------------------------------
// incremental echelon basis over a prime field
// ---------------------------------------------------------------------------

/// Row echelon basis mod `p`, grown one row at a time. Pivot rows are
/// normalized to a unit pivot; rows are not reduced above pivots.
pub struct FpEchelon {
    p: u64,
    cols: usize,
    /// (pivot column, normalized row), ordered by pivot column.
    rows: Vec<(usize, Vec<u64>)>,
}

impl FpEchelon {
    pub fn new(cols: usize, p: u64) -> Self {
        FpEchelon {
            p,
            cols,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.rows.iter().map(|(c, _)| *c).collect()
    }

    /// Reduces `row` against the current basis in place.
    pub fn reduce(&self, row: &mut [u64]) {
        debug_assert_eq!(row.len(), self.cols);
        for (col, basis_row) in &self.rows {
            let f = row[*col];
            if f != 0 {
                sub_scaled(row, basis_row, f, self.p);
            }
        }
    }

    /// Adds `row` if independent; returns its pivot column if added.
    pub fn insert(&mut self, mut row: Vec<u64>) -> Option<usize> {
        self.reduce(&mut row);
        let col = row.iter().position(|&v| v != 0)?;
        let inv = invmod(row[col], self.p);
        for v in row.iter_mut() {
            *v = mulmod(*v, inv, self.p);
        }
        let at = self.rows.partition_point(|(c, _)| *c < col);
        self.rows.insert(at, (col, row));
        Some(col)
    }

    /// Fully reduces the basis (entries above pivots cleared), giving the
    /// reduced row echelon form of the spanned row space.
    pub fn to_rref(&self) -> Vec<(usize, Vec<u64>)> {
        let mut rref = self.rows.clone();
        for i in (0..rref.len()).rev() {
            let (col, row) = rref[i].clone();
            for (_, other) in rref.iter_mut().take(i) {
                let f = other[col];
                if f != 0 {
                    sub_scaled(other, &row, f, self.p);
                }
            }
        }
        rref
    }

    /// Kernel basis of the spanned row space as residue vectors: one
    /// vector per non-pivot column, with a unit at that column.
    pub fn kernel_basis(&self) -> Vec<Vec<u64>> {
        let rref = self.to_rref();
        let pivot_cols: Vec<usize> = rref.iter().map(|(c, _)| *c).collect();
        let is_pivot = |c: usize| pivot_cols.binary_search(&c).is_ok();
        let mut out = Vec::new();
        for free in 0..self.cols {
            if is_pivot(free) {
                continue;
            }
            let mut w = vec![0u64; self.cols];
            w[free] = 1;
            for (col, row) in &rref {
                let v = row[free];
                if v != 0 {
                    w[*col] = self.p - v;
                }
            }
            out.push(w);
        }
        out
    }
}

fn sub_scaled(row: &mut [u64], basis: &[u64], factor: u64, p: u64) {
    for (r, &b) in row.iter_mut().zip(basis) {
        if b != 0 {
            *r = submod(*r, mulmod(factor, b, p), p);
        }
    }
}

// ---------------------------------------------------------------------------
// dense LU over a prime field
// ---------------------------------------------------------------------------

/// In-place LU factorization of a dense square matrix mod `p` with
/// row pivoting (first nonzero), for repeated exact solves.
pub struct FpLu {
    p: u64,
    n: usize,
    /// Combined L (below diagonal, unit diagonal implicit) and U.
    lu: Vec<u64>,
    /// Row permutation: `perm[i]` is the original row now at position `i`.
    perm: Vec<usize>,
}

impl FpLu {
    /// Factors the matrix given in row-major order. Fails if singular.
    pub fn factor(mut lu: Vec<u64>, n: usize, p: u64) -> Result<Self> {
        use rayon::prelude::*;
        assert_eq!(lu.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let pivot_row = (k..n)
                .find(|&r| lu[r * n + k] != 0)
                .ok_or_else(|| Error::Integrity("singular matrix in LU factorization".into()))?;
            if pivot_row != k {
                perm.swap(k, pivot_row);
                let (a, b) = lu.split_at_mut(pivot_row * n);
                a[k * n..k * n + n].swap_with_slice(&mut b[..n]);
            }
            let inv = invmod(lu[k * n + k], p);
            let (top, rest) = lu.split_at_mut((k + 1) * n);
            let urow = &top[k * n..(k + 1) * n];
            rest.par_chunks_mut(n).for_each(|row| {
                let f = mulmod(row[k], inv, p);
                row[k] = f;
                if f != 0 {
                    for j in k + 1..n {
                        let u = urow[j];
                        if u != 0 {
                            row[j] = submod(row[j], mulmod(f, u, p), p);
                        }
                    }
                }
            });
        }
        Ok(FpLu { p, n, lu, perm })
    }

    pub fn solve(&self, rhs: &[u64]) -> Vec<u64> {
        let n = self.n;
        let p = self.p;
        let mut y: Vec<u64> = self.perm.iter().map(|&i| rhs[i]).collect();
        // forward: L y = P rhs
        for i in 1..n {
            let row = &self.lu[i * n..i * n + i];
            let mut acc = y[i];
            for (j, &l) in row.iter().enumerate() {
                if l != 0 && y[j] != 0 {
                    acc = submod(acc, mulmod(l, y[j], p), p);
                }
            }
            y[i] = acc;
        }
        // backward: U x = y
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let mut acc = y[i];
            for j in i + 1..n {
                if row[j] != 0 && y[j] != 0 {
                    acc = submod(acc, mulmod(row[j], y[j], p), p);
                }
            }
            y[i] = mulmod(acc, invmod(row[i], p), p);
        }
        y
    }
}

// ---------------------------------------------------------------------------
// CRT and rational reconstruction
// ---------------------------------------------------------------------------

/// Combines residues into the symmetric representative modulo the product.
pub fn crt_symmetric(residues: &[(u64, u64)]) -> BigInt {
    let mut value = BigInt::zero();
    let mut modulus = BigInt::one();
    for &(r, p) in residues {
        let pb = BigInt::from(p);
        // solve value' = value (mod modulus), value' = r (mod p)
        let diff = (BigInt::from(r) - &value).mod_floor(&pb);
        let inv = modinv_big(&modulus, &pb);
        let t = (diff * inv).mod_floor(&pb);
        value += &modulus * t;
        modulus *= &pb;
    }
    let half = &modulus / 2;
    if value > half {
        value -= &modulus;
    }
    value
}

fn modinv_big(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

/// Rational reconstruction of `r mod m` with `|num|, den <= sqrt(m/2)`.
pub fn rational_reconstruct(r: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let bound = (m / 2u8).sqrt();
    let (mut r0, mut r1) = (m.clone(), r.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    let (num, den) = if t1.is_negative() {
        (-r1, -t1)
    } else {
        (r1, t1)
    };
    if den.is_zero() {
        None
    } else {
        Some((num, den))
    }
}

// ---------------------------------------------------------------------------
// fraction-free elimination over the integers
// ---------------------------------------------------------------------------

/// Rank by fraction-free (Bareiss) elimination; exact, for matrices small
/// enough that entry growth stays manageable.
pub fn bareiss_rank(mut rows: Vec<Vec<BigInt>>) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut rank = 0;
    let mut prev_pivot = BigInt::one();
    for col in 0..cols {
        if rank == rows.len() {
            break;
        }
        let Some(pr) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pr);
        let pivot = rows[rank][col].clone();
        for r in rank + 1..rows.len() {
            for c in col + 1..cols {
                let v = (&pivot * &rows[r][c] - &rows[r][col] * &rows[rank][c]) / &prev_pivot;
                rows[r][c] = v;
            }
            rows[r][col] = BigInt::zero();
        }
        prev_pivot = pivot;
        rank += 1;
    }
    rank
}

/// Reduced row echelon form over the rationals. Returns the rank, the
/// pivot columns, and the RREF rows. Exact; for small matrices.
pub fn rref_rational(rows: Vec<Vec<BigInt>>) -> (usize, Vec<usize>, Vec<Vec<BigRational>>) {
    let mut m: Vec<Vec<BigRational>> = rows
        .into_iter()
        .map(|r| r.into_iter().map(BigRational::from_integer).collect())
        .collect();
    if m.is_empty() {
        return (0, vec![], vec![]);
    }
    let cols = m[0].len();
    let mut pivot_cols = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pr) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = m[rank][col].recip();
        for c in col..cols {
            let v = &m[rank][c] * &inv;
            m[rank][c] = v;
        }
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..cols {
                    let v = &m[r][c] - &f * &m[rank][c];
                    m[r][c] = v;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    m.truncate(rank);
    (rank, pivot_cols, m)
}

/// Exact kernel basis (primitive integer vectors) of the row space of an
/// integer matrix, via rational RREF. For small matrices.
pub fn kernel_rational(rows: Vec<Vec<BigInt>>, cols: usize) -> Vec<Vec<BigInt>> {
    let (_, pivot_cols, rref) = rref_rational(rows);
    let mut out = Vec::new();
    for free in 0..cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut w = vec![BigRational::zero(); cols];
        w[free] = BigRational::one();
        for (row, &pc) in rref.iter().zip(&pivot_cols) {
            if !row[free].is_zero() {
                w[pc] = -row[free].clone();
            }
        }
        out.push(clear_denominators(&w));
    }
    out
}

/// Scales a rational vector to a primitive integer vector.
fn clear_denominators(v: &[BigRational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}

/// Lifts a kernel computed modulo several primes to exact integer vectors
/// by CRT and rational reconstruction. `kernels[i]` is the kernel basis
/// mod `primes[i]`; all must share the same pivot structure so entries
/// correspond. Returns one primitive integer vector per kernel vector, or
/// `None` if reconstruction fails (caller should add primes).
pub fn lift_kernel(kernels: &[Vec<Vec<u64>>], primes: &[u64]) -> Option<Vec<Vec<BigInt>>> {
    let dim = kernels[0].len();
    let cols = if dim == 0 { 0 } else { kernels[0][0].len() };
    let modulus: BigInt = primes.iter().map(|&p| BigInt::from(p)).product();
    let mut out = Vec::with_capacity(dim);
    for v in 0..dim {
        let mut rationals: Vec<BigRational> = Vec::with_capacity(cols);
        for c in 0..cols {
            let residues: Vec<(u64, u64)> = kernels
                .iter()
                .zip(primes)
                .map(|(kern, &p)| (kern[v][c], p))
                .collect();
            let lifted = crt_symmetric(&residues);
            let (num, den) = rational_reconstruct(&lifted.mod_floor(&modulus), &modulus)?;
            rationals.push(BigRational::new(num, den));
        }
        out.push(clear_denominators(&rationals));
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_prime_u64(n: u64) -> bool {
        // deterministic Miller-Rabin for 64-bit inputs
        if n < 2 {
            return false;
        }
        for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            if n % p == 0 {
                return n == p;
            }
        }
        let d = n - 1;
        let s = d.trailing_zeros();
        let d = d >> s;
        'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            let mut x = powmod(a, d, n);
            if x == 1 || x == n - 1 {
                continue;
            }
            for _ in 1..s {
                x = mulmod(x, x, n);
                if x == n - 1 {
                    continue 'witness;
                }
            }
            return false;
        }
        true
    }

    #[test]
    fn primes_are_prime() {
        for &p in &PRIMES {
            assert!(is_prime_u64(p), "{p}");
            assert!(p < 1 << 62);
        }
    }

    #[test]
    fn field_ops() {
        let p = PRIMES[0];
        assert_eq!(mulmod(invmod(7, p), 7, p), 1);
        assert_eq!(submod(3, 5, p), p - 2);
        assert_eq!(to_residue(-1, p), p - 1);
        assert_eq!(bigint_residue(&BigInt::from(-1), p), p - 1);
    }

    #[test]
    fn echelon_rank_and_kernel() {
        let p = PRIMES[0];
        let mut ech = FpEchelon::new(3, p);
        assert!(ech.insert(vec![1, 2, 3]).is_some());
        assert!(ech.insert(vec![2, 4, 6]).is_none()); // dependent
        assert!(ech.insert(vec![0, 1, 1]).is_some());
        assert_eq!(ech.rank(), 2);
        let kern = ech.kernel_basis();
        assert_eq!(kern.len(), 1);
        // [1,2,3] . w == 0 and [0,1,1] . w == 0 mod p
        let w = &kern[0];
        let dot1 = (1 * w[0] as u128 + 2 * w[1] as u128 + 3 * w[2] as u128) % p as u128;
        let dot2 = (w[1] as u128 + w[2] as u128) % p as u128;
        assert_eq!(dot1, 0);
        assert_eq!(dot2, 0);
    }

    #[test]
    fn lu_solves() {
        let p = PRIMES[1];
        // A = [[2,1],[1,3]], b = [5, 10] -> x = [1, 3]
        let lu = FpLu::factor(vec![2, 1, 1, 3], 2, p).unwrap();
        assert_eq!(lu.solve(&[5, 10]), vec![1, 3]);
        // singular
        assert!(FpLu::factor(vec![1, 2, 2, 4], 2, p).is_err());
    }

    #[test]
    fn crt_and_reconstruction() {
        let residues = [(3u64, 5u64), (4, 7)];
        let v = crt_symmetric(&residues);
        assert_eq!(v, BigInt::from(-17)); // -17 = 18 mod 35
        let m = BigInt::from(PRIMES[0]);
        // encode 22/7 mod p
        let r = (BigInt::from(22) * modinv_big(&BigInt::from(7), &m)).mod_floor(&m);
        let (num, den) = rational_reconstruct(&r, &m).unwrap();
        assert_eq!((num, den), (BigInt::from(22), BigInt::from(7)));
    }

    #[test]
    fn bareiss_examples() {
        let z = |v: i64| BigInt::from(v);
        assert_eq!(bareiss_rank(vec![vec![z(0); 4]; 3]), 0);
        let id6: Vec<Vec<BigInt>> = (0..6)
            .map(|i| (0..6).map(|j| z((i == j) as i64)).collect())
            .collect();
        assert_eq!(bareiss_rank(id6), 6);
        let m = vec![
            vec![z(1), z(2), z(3)],
            vec![z(2), z(4), z(6)],
            vec![z(1), z(0), z(1)],
        ];
        assert_eq!(bareiss_rank(m), 2);
    }

    #[test]
    fn rational_kernel_matches_bareiss() {
        let z = |v: i64| BigInt::from(v);
        let rows = vec![
            vec![z(1), z(2), z(3), z(4)],
            vec![z(0), z(1), z(1), z(1)],
            vec![z(1), z(3), z(4), z(5)],
        ];
        let rank = bareiss_rank(rows.clone());
        assert_eq!(rank, 2);
        let kern = kernel_rational(rows.clone(), 4);
        assert_eq!(kern.len(), 2);
        for w in &kern {
            for row in &rows {
                let dot: BigInt = row.iter().zip(w).map(|(a, b)| a * b).sum();
                assert!(dot.is_zero());
            }
        }
    }

    #[test]
    fn lifted_kernel_matches_rational() {
        let z = |v: i64| BigInt::from(v);
        let rows = vec![vec![z(2), z(4), z(-2)], vec![z(1), z(1), z(1)]];
        // mod-p kernels with identical pivot structure
        let mut kernels = Vec::new();
        for &p in &PRIMES[..2] {
            let mut ech = FpEchelon::new(3, p);
            for r in &rows {
                let row: Vec<u64> = r
                    .iter()
                    .map(|v| bigint_residue(v, p))
                    .collect();
                ech.insert(row);
            }
            kernels.push(ech.kernel_basis());
        }
        let lifted = lift_kernel(&kernels, &PRIMES[..2]).unwrap();
        assert_eq!(lifted.len(), 1);
        for row in &rows {
            let dot: BigInt = row.iter().zip(&lifted[0]).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
    }
}
