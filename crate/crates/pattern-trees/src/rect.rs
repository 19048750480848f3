//! Multidimensional rectangle-trees: weighted points in `[n]^d` with
//! rectangle sum queries.
//!
//! The structure is two-phase: bulk-load points, `freeze`, then query.
//! Every algorithm in this crate builds a tree fully before querying it,
//! so a static layered layout suffices. Each level is a Fenwick-style
//! decomposition over the distinct coordinates of one dimension whose
//! nodes hold a structure over the remaining dimensions; the innermost
//! level is a sorted coordinate array with prefix sums. Memory is
//! `O(N log^{d-1} N)` for `N` inserted points, never `O(n^d)`.

use crate::error::{Error, Result};

/// An axis-parallel box: a product of inclusive integer segments.
/// A segment with `lo > hi` is empty, making the whole rectangle empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rectangle {
    bounds: Vec<(i64, i64)>,
}

impl Rectangle {
    pub fn new(bounds: Vec<(i64, i64)>) -> Self {
        Rectangle { bounds }
    }

    /// The full box `[1,n]^d`.
    pub fn full(d: usize, n: u32) -> Self {
        Rectangle {
            bounds: vec![(1, n as i64); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(i64, i64)] {
        &self.bounds
    }

    pub fn bounds_mut(&mut self) -> &mut [(i64, i64)] {
        &mut self.bounds
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.iter().any(|&(lo, hi)| lo > hi)
    }

    /// Componentwise intersection.
    pub fn intersect(&self, other: &Rectangle) -> Rectangle {
        assert_eq!(self.dim(), other.dim());
        Rectangle {
            bounds: self
                .bounds
                .iter()
                .zip(&other.bounds)
                .map(|(&(a, b), &(c, d))| (a.max(c), b.min(d)))
                .collect(),
        }
    }

    /// Shrinks the segment at `axis` to its intersection with `[lo, hi]`.
    pub fn clamp_axis(&mut self, axis: usize, lo: i64, hi: i64) {
        let b = &mut self.bounds[axis];
        b.0 = b.0.max(lo);
        b.1 = b.1.min(hi);
    }
}

enum Layer {
    /// Last dimension: coordinates sorted ascending, `prefix[i]` is the sum
    /// of the first `i` weights.
    Inner { coords: Vec<u32>, prefix: Vec<i128> },
    /// Fenwick decomposition over the distinct sorted coordinates of this
    /// dimension; `nodes[j]` covers coordinate ranks `[j & (j+1), j]`.
    Outer { coords: Vec<u32>, nodes: Vec<Layer> },
}

struct PointStore {
    dims: usize,
    coords: Vec<u32>,
    weights: Vec<i128>,
}

impl PointStore {
    fn coord(&self, point: u32, depth: usize) -> u32 {
        self.coords[point as usize * self.dims + depth]
    }
}

impl Layer {
    fn build(mut idx: Vec<u32>, depth: usize, store: &PointStore) -> Layer {
        idx.sort_unstable_by_key(|&i| store.coord(i, depth));
        if depth + 1 == store.dims {
            let coords: Vec<u32> = idx.iter().map(|&i| store.coord(i, depth)).collect();
            let mut prefix = Vec::with_capacity(idx.len() + 1);
            let mut acc: i128 = 0;
            prefix.push(0);
            for &i in &idx {
                acc = acc.checked_add(store.weights[i as usize]).expect("weight overflow");
                prefix.push(acc);
            }
            return Layer::Inner { coords, prefix };
        }
        let mut coords: Vec<u32> = idx.iter().map(|&i| store.coord(i, depth)).collect();
        coords.dedup();
        let m = coords.len();
        let mut buckets: Vec<Vec<u32>> = (0..m).map(|_| Vec::new()).collect();
        for &i in &idx {
            let rank = coords.partition_point(|&x| x < store.coord(i, depth));
            let mut j = rank;
            while j < m {
                buckets[j].push(i);
                j |= j + 1;
            }
        }
        let nodes = buckets
            .into_iter()
            .map(|pts| Layer::build(pts, depth + 1, store))
            .collect();
        Layer::Outer { coords, nodes }
    }

    fn query(&self, bounds: &[(i64, i64)]) -> i128 {
        let (lo, hi) = bounds[0];
        if lo > hi {
            return 0;
        }
        match self {
            Layer::Inner { coords, prefix } => {
                let a = coords.partition_point(|&c| (c as i64) < lo);
                let b = coords.partition_point(|&c| (c as i64) <= hi);
                prefix[b] - prefix[a]
            }
            Layer::Outer { coords, nodes } => {
                self.prefix_walk(coords, nodes, hi, &bounds[1..])
                    - self.prefix_walk(coords, nodes, lo - 1, &bounds[1..])
            }
        }
    }

    fn prefix_walk(&self, coords: &[u32], nodes: &[Layer], bound: i64, rest: &[(i64, i64)]) -> i128 {
        let cnt = coords.partition_point(|&c| (c as i64) <= bound);
        if cnt == 0 {
            return 0;
        }
        let mut j = cnt as isize - 1;
        let mut sum: i128 = 0;
        while j >= 0 {
            sum += nodes[j as usize].query(rest);
            j = (j & (j + 1)) - 1;
        }
        sum
    }
}

/// A `d`-dimensional weighted point multiset over `[n]^d` answering
/// rectangle sum queries after being frozen.
pub struct RectangleTree {
    dim: usize,
    n: u32,
    total: i128,
    count: usize,
    building: Option<PointStore>,
    frozen: Option<Layer>,
}

impl RectangleTree {
    pub fn new(dim: usize, n: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Data("rectangle-tree dimension must be >= 1".into()));
        }
        if n == 0 {
            return Err(Error::Data("rectangle-tree domain must be >= 1".into()));
        }
        Ok(RectangleTree {
            dim,
            n,
            total: 0,
            count: 0,
            building: Some(PointStore {
                dims: dim,
                coords: Vec::new(),
                weights: Vec::new(),
            }),
            frozen: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> u32 {
        self.n
    }

    /// Number of insertions performed (repeated points count separately).
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Adds weight `w` at point `x`. Repeated insertions accumulate.
    pub fn insert(&mut self, x: &[u32], w: i128) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Data(format!(
                "point dimension {} does not match tree dimension {}",
                x.len(),
                self.dim
            )));
        }
        for &c in x {
            if c < 1 || c > self.n {
                return Err(Error::Data(format!(
                    "coordinate {} outside domain [1,{}]",
                    c, self.n
                )));
            }
        }
        let building = self
            .building
            .as_mut()
            .ok_or_else(|| Error::Data("insert after freeze".into()))?;
        building.coords.extend_from_slice(x);
        building.weights.push(w);
        self.total = self
            .total
            .checked_add(w)
            .ok_or_else(|| Error::Guard("weight overflow".into()))?;
        self.count += 1;
        Ok(())
    }

    /// Ends the load phase. Idempotent.
    pub fn freeze(&mut self) {
        if let Some(store) = self.building.take() {
            let idx: Vec<u32> = (0..store.weights.len() as u32).collect();
            self.frozen = Some(Layer::build(idx, 0, &store));
        }
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen.is_some()
    }

    /// Sum of weights over all points inside `r`.
    pub fn query(&self, r: &Rectangle) -> Result<i128> {
        if r.dim() != self.dim {
            return Err(Error::Data(format!(
                "rectangle dimension {} does not match tree dimension {}",
                r.dim(),
                self.dim
            )));
        }
        let frozen = self
            .frozen
            .as_ref()
            .ok_or_else(|| Error::Data("query before freeze".into()))?;
        if r.is_empty() {
            return Ok(0);
        }
        Ok(frozen.query(r.bounds()))
    }

    /// Sum of all inserted weights; equals the full-rectangle query.
    pub fn total(&self) -> i128 {
        self.total
    }
}
