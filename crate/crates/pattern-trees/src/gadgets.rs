//! Sub-quadratic counting kernels: monotone marked counts, the weighted
//! marked `3214` count, the marked `43215` count, and the
//! pair-rectangle-tree for dominance pair queries.
//!
//! A *marked count* stores, at every permutation point `(i, pi(i))`, the
//! (possibly weighted) number of occurrences of a pattern whose marked
//! index lands at position `i`, inside a 2-dimensional rectangle-tree.
//!
//! The strip decompositions share one scheme: a point belongs to vertical
//! strip `ceil(i/m)` and horizontal strip `ceil(pi(i)/m)`, so every point
//! lies in exactly one strip per axis. Both the `3214` and `43215` kernels
//! split occurrences into four cases by whether the marked point shares a
//! horizontal strip with the pattern's first (highest descending) point
//! and/or a vertical strip with its last descending point. The
//! "horizontal only" case is answered by reflecting the input through the
//! main diagonal and rerunning the "vertical only" case on the inverse
//! permutation; both gadget patterns are self-inverse, so only the slot
//! order of the weight functions changes.

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::rect::{Rectangle, RectangleTree};

/// Positional weight function, evaluated in constant time per call.
pub type WeightFn<'a> = dyn Fn(usize) -> i128 + Sync + 'a;

/// Unit weights for unweighted counts.
pub fn unit_weight(_: usize) -> i128 {
    1
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Monotone {
    Ascending,
    Descending,
}

/// Per-position counts of a marked pattern, kept both as a dense weight
/// array and as a frozen 2-dimensional rectangle-tree over the
/// permutation's points.
pub struct MarkedCountTree {
    n: u32,
    weights: Vec<i128>,
    tree: RectangleTree,
}

impl MarkedCountTree {
    pub fn from_weights(pi: &Permutation, weights: Vec<i128>) -> Self {
        let n = pi.n() as u32;
        let mut tree = RectangleTree::new(2, n).unwrap();
        for (i, y) in pi.points() {
            tree.insert(&[i, y], weights[i as usize - 1]).unwrap();
        }
        tree.freeze();
        MarkedCountTree { n, weights, tree }
    }

    /// Weight carried by the point at 1-based position `i`.
    pub fn weight_at(&self, i: usize) -> i128 {
        self.weights[i - 1]
    }

    pub fn weights(&self) -> &[i128] {
        &self.weights
    }

    pub fn query(&self, r: &Rectangle) -> Result<i128> {
        self.tree.query(r)
    }

    /// Total weighted count, the full-rectangle query.
    pub fn total(&self) -> i128 {
        self.tree.total()
    }

    pub fn domain(&self) -> u32 {
        self.n
    }
}

/// Weighted counts of monotone `k`-tuples ending at each point via a chain
/// of 2-dimensional trees, restricted to `points`. The returned array is
/// dense over positions `1..=n`; positions outside `points` carry zero.
fn monotone_chain_weights(
    n: u32,
    points: &[(u32, u32)],
    k: usize,
    dir: Monotone,
    weights: &[&WeightFn],
) -> Vec<i128> {
    assert_eq!(weights.len(), k);
    let mut cur: Vec<i128> = points
        .iter()
        .map(|&(x, _)| weights[0](x as usize))
        .collect();
    for j in 1..k {
        let mut tree = RectangleTree::new(2, n).unwrap();
        for (p, &(x, y)) in points.iter().enumerate() {
            tree.insert(&[x, y], cur[p]).unwrap();
        }
        tree.freeze();
        let mut next = Vec::with_capacity(points.len());
        for &(x, y) in points {
            let quadrant = match dir {
                Monotone::Ascending => Rectangle::new(vec![(1, x as i64 - 1), (1, y as i64 - 1)]),
                Monotone::Descending => {
                    Rectangle::new(vec![(1, x as i64 - 1), (y as i64 + 1, n as i64)])
                }
            };
            let prev = tree.query(&quadrant).unwrap();
            next.push(prev * weights[j](x as usize));
        }
        cur = next;
    }
    let mut dense = vec![0i128; n as usize];
    for (p, &(x, _)) in points.iter().enumerate() {
        dense[x as usize - 1] = cur[p];
    }
    dense
}

/// The marked count of the length-`k` monotone pattern: point `(i, pi(i))`
/// carries the weighted number of `dir`-monotone `k`-tuples ending at
/// position `i`, a tuple's weight being the product of `weights[j]` at its
/// positions.
pub fn monotone_marked_count(
    k: usize,
    dir: Monotone,
    pi: &Permutation,
    weights: &[&WeightFn],
) -> Result<MarkedCountTree> {
    if k == 0 || weights.len() != k {
        return Err(Error::Data("need one weight function per tuple slot".into()));
    }
    let points: Vec<(u32, u32)> = pi.points().collect();
    let dense = monotone_chain_weights(pi.n() as u32, &points, k, dir, weights);
    Ok(MarkedCountTree::from_weights(pi, dense))
}

/// Totals of the four strip-sharing cases; they partition all occurrences.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StripCaseTotals {
    pub no_shared: i128,
    pub vertical_only: i128,
    pub horizontal_only: i128,
    pub both: i128,
}

impl StripCaseTotals {
    pub fn sum(&self) -> i128 {
        self.no_shared + self.vertical_only + self.horizontal_only + self.both
    }
}

fn strip_of(coord: u32, m: usize) -> usize {
    (coord as usize + m - 1) / m
}

#[derive(Clone, Copy)]
enum StripAccum {
    /// Accumulate "no shared" + "vertical only" together (their union is
    /// one query); report the split in the totals.
    NoSharedAndVertical,
    /// Accumulate only the "vertical only" contribution.
    VerticalOnly,
}

/// Per-horizontal-strip pass shared by both gadget kernels: for each point
/// in a strip, weighted descending `chain_len`-tuples entirely below the
/// strip and left of the point, split by whether the tuple's last point
/// shares the anchor's vertical strip. Returns `(no_shared, vertical_only)`
/// totals.
fn descending_strip_pass(
    pi: &Permutation,
    chain_len: usize,
    m: usize,
    chain_weights: &[&WeightFn],
    anchor_weight: &WeightFn,
    accum: StripAccum,
    out: &mut [i128],
) -> (i128, i128) {
    let n = pi.n() as u32;
    let num_strips = strip_of(n, m);
    let mut no_shared = 0i128;
    let mut vertical_only = 0i128;
    let mut strip_points: Vec<Vec<(u32, u32)>> = vec![Vec::new(); num_strips + 1];
    for (x, y) in pi.points() {
        strip_points[strip_of(y, m)].push((x, y));
    }
    for ys in 2..=num_strips {
        if strip_points[ys].is_empty() {
            continue;
        }
        let cutoff = ((ys - 1) * m) as i64;
        let below: Vec<(u32, u32)> = pi.points().filter(|&(_, y)| (y as i64) <= cutoff).collect();
        if below.len() < chain_len {
            continue;
        }
        let dense = monotone_chain_weights(n, &below, chain_len, Monotone::Descending, chain_weights);
        let mut tree = RectangleTree::new(2, n).unwrap();
        for &(x, y) in &below {
            tree.insert(&[x, y], dense[x as usize - 1]).unwrap();
        }
        tree.freeze();
        for &(i, _) in &strip_points[ys] {
            let xs = strip_of(i, m);
            let x_cut = ((xs - 1) * m) as i64;
            let q_left = tree
                .query(&Rectangle::new(vec![(1, x_cut), (1, cutoff)]))
                .unwrap();
            let q_all = tree
                .query(&Rectangle::new(vec![(1, i as i64 - 1), (1, cutoff)]))
                .unwrap();
            let w = anchor_weight(i as usize);
            no_shared += w * q_left;
            vertical_only += w * (q_all - q_left);
            out[i as usize - 1] += match accum {
                StripAccum::NoSharedAndVertical => w * q_all,
                StripAccum::VerticalOnly => w * (q_all - q_left),
            };
        }
    }
    (no_shared, vertical_only)
}

/// Runs the "horizontal only" case by reflection: the input is inverted,
/// the vertical-only pass is rerun with re-indexed weights, and the
/// resulting per-point contributions are reflected back. `slot_map[t]` is
/// the slot of the original pattern that lands in slot `t+1` after the
/// reflection.
fn horizontal_only_by_reflection(
    pi: &Permutation,
    chain_len: usize,
    m: usize,
    weights: &[&WeightFn],
    slot_map: &[usize],
    out: &mut [i128],
) -> i128 {
    let pinv = pi.inverse();
    let reflected: Vec<Box<WeightFn>> = slot_map
        .iter()
        .map(|&orig_slot| {
            let orig = weights[orig_slot - 1];
            let pv = pinv.clone();
            Box::new(move |v: usize| orig(pv.at(v) as usize)) as Box<WeightFn>
        })
        .collect();
    let chain_refs: Vec<&WeightFn> = reflected[..chain_len].iter().map(|b| &**b).collect();
    let mut reflected_out = vec![0i128; pi.n()];
    let (_, total) = descending_strip_pass(
        &pinv,
        chain_len,
        m,
        &chain_refs,
        &*reflected[chain_len],
        StripAccum::VerticalOnly,
        &mut reflected_out,
    );
    for (v, &w) in reflected_out.iter().enumerate() {
        if w != 0 {
            // the reflected point (v+1, pinv(v+1)) is pi's point at
            // position pinv(v+1)
            let target = pinv.at(v + 1) as usize;
            out[target - 1] += w;
        }
    }
    total
}

/// Weighted marked `3214` count: point `(i, pi(i))` carries the sum over
/// occurrences of `3214` ending at `i` of the product of the four slot
/// weights at the occurrence's positions. The result is independent of the
/// strip size `m`; the cost balance is `m = floor(n^(1/3))`.
pub fn weighted_marked_3214(
    pi: &Permutation,
    weights: [&WeightFn; 4],
    m: usize,
) -> Result<MarkedCountTree> {
    weighted_marked_3214_with_cases(pi, weights, m).map(|(t, _)| t)
}

/// Default strip size for [`weighted_marked_3214`].
pub fn default_strip_3214(n: usize) -> usize {
    ((n as f64).powf(1.0 / 3.0).floor() as usize).clamp(1, n.max(1))
}

/// Default strip and pair-tree parameters for [`marked_43215`].
pub fn default_params_43215(n: usize) -> (usize, usize) {
    let v = ((n as f64).powf(0.25).floor() as usize).clamp(1, n.max(1));
    (v, v)
}

pub fn weighted_marked_3214_with_cases(
    pi: &Permutation,
    weights: [&WeightFn; 4],
    m: usize,
) -> Result<(MarkedCountTree, StripCaseTotals)> {
    let n = pi.n();
    if m < 1 || m > n {
        return Err(Error::Data(format!("strip size {m} outside 1..={n}")));
    }
    let mut out = vec![0i128; n];
    let mut cases = StripCaseTotals::default();

    let (no_shared, vertical_only) = descending_strip_pass(
        pi,
        3,
        m,
        &[weights[0], weights[1], weights[2]],
        weights[3],
        StripAccum::NoSharedAndVertical,
        &mut out,
    );
    cases.no_shared = no_shared;
    cases.vertical_only = vertical_only;

    // 3214 reflects to itself with slots reversed on the descending part
    cases.horizontal_only =
        horizontal_only_by_reflection(pi, 3, m, &weights, &[3, 2, 1, 4], &mut out);

    cases.both = shared_both_3214(pi, weights, m, &mut out)?;

    Ok((MarkedCountTree::from_weights(pi, out), cases))
}

fn shared_both_3214(
    pi: &Permutation,
    weights: [&WeightFn; 4],
    m: usize,
    out: &mut [i128],
) -> Result<i128> {
    let n = pi.n() as u32;
    let num_strips = strip_of(n, m);
    let mut total = 0i128;
    // candidates for the middle slot, weighted
    let mut mid = RectangleTree::new(2, n)?;
    for (x, y) in pi.points() {
        mid.insert(&[x, y], weights[1](x as usize))?;
    }
    mid.freeze();
    let mut v_strip: Vec<Vec<(u32, u32)>> = vec![Vec::new(); num_strips + 1];
    let mut h_strip: Vec<Vec<(u32, u32)>> = vec![Vec::new(); num_strips + 1];
    for (x, y) in pi.points() {
        v_strip[strip_of(x, m)].push((x, y));
        h_strip[strip_of(y, m)].push((x, y));
    }
    for (i, vi) in pi.points() {
        let w4 = weights[3](i as usize);
        if w4 == 0 {
            continue;
        }
        let mut acc = 0i128;
        for &(a, va) in &h_strip[strip_of(vi, m)] {
            // candidate first slot: below-left of the anchor
            if a >= i || va >= vi {
                continue;
            }
            let w1 = weights[0](a as usize);
            if w1 == 0 {
                continue;
            }
            for &(b, vb) in &v_strip[strip_of(i, m)] {
                // candidate third slot: forms a descending pair with the first
                if b >= i || vb >= vi || b <= a || vb >= va {
                    continue;
                }
                let inner = mid.query(&Rectangle::new(vec![
                    (a as i64 + 1, b as i64 - 1),
                    (vb as i64 + 1, va as i64 - 1),
                ]))?;
                acc += w1 * inner * weights[2](b as usize);
            }
        }
        let contrib = w4 * acc;
        out[i as usize - 1] += contrib;
        total += contrib;
    }
    Ok(total)
}

/// Unweighted marked `43215` count: strip size `m` drives the
/// descending-quadruple cases, the pair-rectangle-tree parameter `q`
/// drives the shared-both case. Results are independent of both; the cost
/// balance is `m = q = floor(n^(1/4))`.
pub fn marked_43215(pi: &Permutation, m: usize, q: usize) -> Result<MarkedCountTree> {
    marked_43215_with_cases(pi, m, q).map(|(t, _)| t)
}

pub fn marked_43215_with_cases(
    pi: &Permutation,
    m: usize,
    q: usize,
) -> Result<(MarkedCountTree, StripCaseTotals)> {
    let n = pi.n();
    if m < 1 || m > n {
        return Err(Error::Data(format!("strip size {m} outside 1..={n}")));
    }
    if q < 1 || q > n {
        return Err(Error::Data(format!("pair-tree parameter {q} outside 1..={n}")));
    }
    let unit: &WeightFn = &unit_weight;
    let mut out = vec![0i128; n];
    let mut cases = StripCaseTotals::default();

    let (no_shared, vertical_only) = descending_strip_pass(
        pi,
        4,
        m,
        &[unit, unit, unit, unit],
        unit,
        StripAccum::NoSharedAndVertical,
        &mut out,
    );
    cases.no_shared = no_shared;
    cases.vertical_only = vertical_only;

    cases.horizontal_only =
        horizontal_only_by_reflection(pi, 4, m, &[unit; 5], &[4, 3, 2, 1, 5], &mut out);

    // shared both: select the first and fourth slots, count descending
    // pairs strictly between them
    let prt = PairRectangleTree::build(pi, q)?;
    let num_strips = strip_of(n as u32, m);
    let mut v_strip: Vec<Vec<(u32, u32)>> = vec![Vec::new(); num_strips + 1];
    let mut h_strip: Vec<Vec<(u32, u32)>> = vec![Vec::new(); num_strips + 1];
    for (x, y) in pi.points() {
        v_strip[strip_of(x, m)].push((x, y));
        h_strip[strip_of(y, m)].push((x, y));
    }
    for (i, vi) in pi.points() {
        let mut acc = 0i128;
        for &(a, va) in &h_strip[strip_of(vi, m)] {
            if a >= i || va >= vi {
                continue;
            }
            for &(b, vb) in &v_strip[strip_of(i, m)] {
                if b >= i || vb >= vi || b <= a || vb >= va {
                    continue;
                }
                acc += prt.query_bounds(
                    a as i64 + 1,
                    b as i64 - 1,
                    vb as i64 + 1,
                    va as i64 - 1,
                    Monotone::Descending,
                );
            }
        }
        out[i as usize - 1] += acc;
        cases.both += acc;
    }

    Ok((MarkedCountTree::from_weights(pi, out), cases))
}

/// Breakdown of an ascending-pair query into the three disjoint classes
/// used internally; they must sum to the answer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairQueryParts {
    pub end_in_margin: i128,
    pub margin_to_interior: i128,
    pub interior: i128,
}

impl PairQueryParts {
    pub fn sum(&self) -> i128 {
        self.end_in_margin + self.margin_to_interior + self.interior
    }
}

/// Counts ascending or descending pairs of permutation points inside any
/// rectangle. Preprocessing builds two global trees plus one clipped tree
/// per vertical and horizontal strip of width `q`; a query touches only
/// the up-to-`4q` margin points and a constant number of tree lookups.
pub struct PairRectangleTree {
    n: u32,
    q: usize,
    pi: Vec<u32>,
    pinv: Vec<u32>,
    points: RectangleTree,
    asc_ends: RectangleTree,
    v_clipped: Vec<RectangleTree>,
    h_clipped: Vec<RectangleTree>,
}

impl PairRectangleTree {
    pub fn build(pi: &Permutation, q: usize) -> Result<Self> {
        let n = pi.n() as u32;
        if q < 1 || q > pi.n() {
            return Err(Error::Data(format!("strip size {q} outside 1..={}", pi.n())));
        }
        let mut points = RectangleTree::new(2, n)?;
        for (x, y) in pi.points() {
            points.insert(&[x, y], 1)?;
        }
        points.freeze();
        let mut asc_ends = RectangleTree::new(2, n)?;
        for (x, y) in pi.points() {
            let w = points.query(&Rectangle::new(vec![(1, x as i64 - 1), (1, y as i64 - 1)]))?;
            asc_ends.insert(&[x, y], w)?;
        }
        asc_ends.freeze();
        let num_strips = (pi.n() + q - 1) / q;
        let mut v_clipped = Vec::with_capacity(num_strips);
        let mut h_clipped = Vec::with_capacity(num_strips);
        for s in 1..=num_strips {
            let clip = (s * q) as i64;
            // interior queries only ever look right of / above the clip,
            // so the clipped trees hold just those points
            let mut tv = RectangleTree::new(2, n)?;
            for (x, y) in pi.points() {
                if (x as i64) > clip {
                    let w = points.query(&Rectangle::new(vec![(1, clip), (1, y as i64 - 1)]))?;
                    tv.insert(&[x, y], w)?;
                }
            }
            tv.freeze();
            v_clipped.push(tv);
            let mut th = RectangleTree::new(2, n)?;
            for (x, y) in pi.points() {
                if (y as i64) > clip {
                    let w = points.query(&Rectangle::new(vec![(1, x as i64 - 1), (1, clip)]))?;
                    th.insert(&[x, y], w)?;
                }
            }
            th.freeze();
            h_clipped.push(th);
        }
        Ok(PairRectangleTree {
            n,
            q,
            pi: pi.values().to_vec(),
            pinv: pi.inverse().values().to_vec(),
            points,
            asc_ends,
            v_clipped,
            h_clipped,
        })
    }

    pub fn domain(&self) -> u32 {
        self.n
    }

    pub fn strip_size(&self) -> usize {
        self.q
    }

    /// Number of `dir` pairs of permutation points inside `r`.
    pub fn query(&self, r: &Rectangle, dir: Monotone) -> Result<i128> {
        if r.dim() != 2 {
            return Err(Error::Data("pair queries are 2-dimensional".into()));
        }
        let b = r.bounds();
        Ok(self.query_bounds(b[0].0, b[0].1, b[1].0, b[1].1, dir))
    }

    pub fn query_bounds(&self, x1: i64, x2: i64, y1: i64, y2: i64, dir: Monotone) -> i128 {
        let x1 = x1.max(1);
        let y1 = y1.max(1);
        let x2 = x2.min(self.n as i64);
        let y2 = y2.min(self.n as i64);
        if x1 > x2 || y1 > y2 {
            return 0;
        }
        let asc = self.ascending_parts(x1, x2, y1, y2).sum();
        match dir {
            Monotone::Ascending => asc,
            Monotone::Descending => {
                let pts = self
                    .points
                    .query(&Rectangle::new(vec![(x1, x2), (y1, y2)]))
                    .unwrap();
                pts * (pts - 1) / 2 - asc
            }
        }
    }

    /// The three-class breakdown of the ascending count.
    pub fn query_ascending_parts(&self, r: &Rectangle) -> Result<PairQueryParts> {
        if r.dim() != 2 {
            return Err(Error::Data("pair queries are 2-dimensional".into()));
        }
        let b = r.bounds();
        let (x1, x2) = (b[0].0.max(1), b[0].1.min(self.n as i64));
        let (y1, y2) = (b[1].0.max(1), b[1].1.min(self.n as i64));
        if x1 > x2 || y1 > y2 {
            return Ok(PairQueryParts::default());
        }
        Ok(self.ascending_parts(x1, x2, y1, y2))
    }

    fn ascending_parts(&self, x1: i64, x2: i64, y1: i64, y2: i64) -> PairQueryParts {
        let q = self.q as i64;
        let a = (x1 + q - 1) / q;
        let b = (x2 + q - 1) / q;
        let c = (y1 + q - 1) / q;
        let d = (y2 + q - 1) / q;
        // interior: strips strictly between the outermost ones
        let ix1 = a * q + 1;
        let ix2 = (b - 1) * q;
        let iy1 = c * q + 1;
        let iy2 = (d - 1) * q;
        let interior_empty = ix1 > ix2 || iy1 > iy2;

        // margin: points of R inside the outermost strips
        let mut margin: Vec<(i64, i64)> = Vec::new();
        let mut x_ranges = vec![((a - 1) * q + 1, a * q)];
        if b != a {
            x_ranges.push(((b - 1) * q + 1, b * q));
        }
        for &(lo, hi) in &x_ranges {
            for x in lo.max(x1)..=hi.min(x2) {
                let y = self.pi[x as usize - 1] as i64;
                if y >= y1 && y <= y2 {
                    margin.push((x, y));
                }
            }
        }
        let mut y_ranges = vec![((c - 1) * q + 1, c * q)];
        if d != c {
            y_ranges.push(((d - 1) * q + 1, d * q));
        }
        for &(lo, hi) in &y_ranges {
            for y in lo.max(y1)..=hi.min(y2) {
                let x = self.pinv[y as usize - 1] as i64;
                if x < x1 || x > x2 {
                    continue;
                }
                let xs = (x + q - 1) / q;
                if xs == a || xs == b {
                    continue; // already collected via the vertical strips
                }
                margin.push((x, y));
            }
        }

        let mut parts = PairQueryParts::default();
        for &(x, y) in &margin {
            parts.end_in_margin += self
                .points
                .query(&Rectangle::new(vec![(x1, x - 1), (y1, y - 1)]))
                .unwrap();
        }
        if !interior_empty {
            for &(x, y) in &margin {
                parts.margin_to_interior += self
                    .points
                    .query(&Rectangle::new(vec![
                        ((x + 1).max(ix1), x2.min(ix2)),
                        ((y + 1).max(iy1), y2.min(iy2)),
                    ]))
                    .unwrap();
            }
            let rin = Rectangle::new(vec![(ix1, ix2), (iy1, iy2)]);
            let ending = self.asc_ends.query(&rin).unwrap();
            let from_left = self.v_clipped[a as usize - 1].query(&rin).unwrap();
            let from_below = self.h_clipped[c as usize - 1].query(&rin).unwrap();
            let corner = self
                .points
                .query(&Rectangle::new(vec![(1, a * q), (1, c * q)]))
                .unwrap();
            let inside = self.points.query(&rin).unwrap();
            parts.interior = ending - from_left - from_below + inside * corner;
        }
        parts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{count_pattern_brute, for_each_combination, parse_permutation};
    use crate::rng::{random_permutation, seeded, uniform_below};

    fn p(s: &str) -> Permutation {
        parse_permutation(s).unwrap()
    }

    /// Weighted per-position totals of a marked pattern by full enumeration.
    fn brute_marked(
        pi: &Permutation,
        pattern: &Permutation,
        mark: usize,
        weights: &[&WeightFn],
    ) -> Vec<i128> {
        let n = pi.n();
        let k = pattern.n();
        let mut out = vec![0i128; n];
        for_each_combination(n, k, |subset| {
            let pos: Vec<usize> = subset.iter().map(|&i| i + 1).collect();
            if &pi.pattern_at(&pos) == pattern {
                let w: i128 = pos.iter().enumerate().map(|(j, &i)| weights[j](i)).product();
                out[pos[mark - 1] - 1] += w;
            }
        });
        out
    }

    #[test]
    fn monotone_examples() {
        let unit: &WeightFn = &unit_weight;
        let t =
            monotone_marked_count(3, Monotone::Ascending, &p("12345"), &[unit, unit, unit]).unwrap();
        assert_eq!(t.weights(), &[0, 0, 1, 3, 6]);
        assert_eq!(t.total(), 10);

        let t = monotone_marked_count(2, Monotone::Descending, &p("321"), &[unit, unit]).unwrap();
        assert_eq!(t.total(), 3);

        let wid: &WeightFn = &|a| a as i128;
        let t = monotone_marked_count(1, Monotone::Ascending, &p("2413"), &[wid]).unwrap();
        assert_eq!(t.weights(), &[1, 2, 3, 4]);
    }

    #[test]
    fn monotone_matches_brute() {
        let mut rng = seeded(11);
        let w1: &WeightFn = &|a| (a % 3) as i128 - 1;
        let w2: &WeightFn = &|a| (a % 2) as i128 + 1;
        let w3: &WeightFn = &|a| (a % 5) as i128;
        for _ in 0..10 {
            let pi = random_permutation(&mut rng, 12);
            for (dir, pat) in [(Monotone::Ascending, "123"), (Monotone::Descending, "321")] {
                let t = monotone_marked_count(3, dir, &pi, &[w1, w2, w3]).unwrap();
                let expect = brute_marked(&pi, &p(pat), 3, &[w1, w2, w3]);
                assert_eq!(t.weights(), &expect[..], "pi={pi} dir={dir:?}");
            }
        }
    }

    #[test]
    fn marked_3214_small_cases() {
        let unit: &WeightFn = &unit_weight;
        let w = [unit, unit, unit, unit];
        let t = weighted_marked_3214(&p("3214"), w, 1).unwrap();
        assert_eq!(t.weights(), &[0, 0, 0, 1]);
        let t = weighted_marked_3214(&p("123456"), w, 2).unwrap();
        assert_eq!(t.total(), 0);
        assert!(weighted_marked_3214(&p("3214"), w, 0).is_err());
        assert!(weighted_marked_3214(&p("3214"), w, 5).is_err());
    }

    #[test]
    fn marked_3214_matches_brute_all_params() {
        let mut rng = seeded(5);
        let w1: &WeightFn = &|a| (a % 3) as i128;
        let w2: &WeightFn = &|a| ((a * 7) % 5) as i128 - 2;
        let w3: &WeightFn = &|a| ((a * 3) % 4) as i128;
        let w4: &WeightFn = &|a| (a % 2) as i128 + 1;
        for trial in 0..6 {
            let n = 18 + trial;
            let pi = random_permutation(&mut rng, n);
            let expect = brute_marked(&pi, &p("3214"), 4, &[w1, w2, w3, w4]);
            let total: i128 = expect.iter().sum();
            for m in [1usize, 2, 3, n] {
                let (t, cases) = weighted_marked_3214_with_cases(&pi, [w1, w2, w3, w4], m).unwrap();
                assert_eq!(t.weights(), &expect[..], "pi={pi} m={m}");
                assert_eq!(cases.sum(), total, "case partition, pi={pi} m={m}");
            }
        }
    }

    #[test]
    fn marked_43215_small_cases() {
        let t = marked_43215(&p("43215"), 1, 1).unwrap();
        assert_eq!(t.weights(), &[0, 0, 0, 0, 1]);
        let t = marked_43215(&Permutation::identity(10), 2, 2).unwrap();
        assert_eq!(t.total(), 0);
    }

    #[test]
    fn marked_43215_matches_brute_all_params() {
        let unit: &WeightFn = &unit_weight;
        let mut rng = seeded(17);
        for trial in 0..4 {
            let n = 16 + 2 * trial;
            let pi = random_permutation(&mut rng, n);
            let expect = brute_marked(&pi, &p("43215"), 5, &[unit; 5]);
            let total: i128 = expect.iter().sum();
            for (m, q) in [(1, 1), (2, 3), (3, 2), (n, 1), (2, n)] {
                let (t, cases) = marked_43215_with_cases(&pi, m, q).unwrap();
                assert_eq!(t.weights(), &expect[..], "pi={pi} m={m} q={q}");
                assert_eq!(cases.sum(), total, "case partition, pi={pi} m={m} q={q}");
            }
        }
    }

    fn brute_pairs(pi: &Permutation, x1: i64, x2: i64, y1: i64, y2: i64, dir: Monotone) -> i128 {
        let pts: Vec<(u32, u32)> = pi
            .points()
            .filter(|&(x, y)| {
                (x as i64) >= x1 && (x as i64) <= x2 && (y as i64) >= y1 && (y as i64) <= y2
            })
            .collect();
        let mut c = 0i128;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let (lo, hi) = if pts[i].0 < pts[j].0 {
                    (pts[i], pts[j])
                } else {
                    (pts[j], pts[i])
                };
                let asc = lo.1 < hi.1;
                if asc == (dir == Monotone::Ascending) {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn pair_tree_examples() {
        let prt = PairRectangleTree::build(&p("2413"), 1).unwrap();
        assert_eq!(prt.query_bounds(1, 4, 1, 4, Monotone::Descending), 3);
        assert_eq!(prt.query_bounds(3, 2, 1, 4, Monotone::Ascending), 0);

        let prt = PairRectangleTree::build(&p("321"), 1).unwrap();
        assert_eq!(prt.query_bounds(1, 3, 1, 3, Monotone::Descending), 3);

        let prt = PairRectangleTree::build(&Permutation::identity(1), 1).unwrap();
        assert_eq!(prt.query_bounds(1, 1, 1, 1, Monotone::Ascending), 0);
    }

    #[test]
    fn pair_tree_matches_brute() {
        let mut rng = seeded(23);
        for n in [13usize, 29, 50] {
            let pi = random_permutation(&mut rng, n);
            for q in [1usize, 3, 7, n] {
                let prt = PairRectangleTree::build(&pi, q).unwrap();
                for _ in 0..120 {
                    let xa = uniform_below(&mut rng, n as u64) as i64 + 1;
                    let xb = uniform_below(&mut rng, n as u64) as i64 + 1;
                    let ya = uniform_below(&mut rng, n as u64) as i64 + 1;
                    let yb = uniform_below(&mut rng, n as u64) as i64 + 1;
                    let (x1, x2) = (xa.min(xb), xa.max(xb));
                    let (y1, y2) = (ya.min(yb), ya.max(yb));
                    for dir in [Monotone::Ascending, Monotone::Descending] {
                        assert_eq!(
                            prt.query_bounds(x1, x2, y1, y2, dir),
                            brute_pairs(&pi, x1, x2, y1, y2, dir),
                            "pi={pi} q={q} rect=({x1},{x2},{y1},{y2}) dir={dir:?}"
                        );
                    }
                    let parts = prt
                        .query_ascending_parts(&Rectangle::new(vec![(x1, x2), (y1, y2)]))
                        .unwrap();
                    assert_eq!(
                        parts.sum(),
                        prt.query_bounds(x1, x2, y1, y2, Monotone::Ascending)
                    );
                }
            }
        }
    }

    #[test]
    fn pair_tree_full_queries() {
        let mut rng = seeded(31);
        let pi = random_permutation(&mut rng, 100);
        let prt = PairRectangleTree::build(&pi, 10).unwrap();
        let asc = prt.query_bounds(1, 100, 1, 100, Monotone::Ascending);
        let desc = prt.query_bounds(1, 100, 1, 100, Monotone::Descending);
        assert_eq!(asc + desc, 100 * 99 / 2);
        let inv = count_pattern_brute(&p("21"), &pi);
        assert_eq!(num_bigint::BigInt::from(desc), inv);
    }
}
