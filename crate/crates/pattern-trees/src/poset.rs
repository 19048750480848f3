//! Strict partial orders over small ground sets and their linear extensions.
//!
//! Extensions are enumerated by backtracking over minimal elements. An
//! inconsistent relation set (any cycle, including a self-relation) simply
//! has no extensions.

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Library bound on ground-set size; enough for trees of total size 8
/// plus slack.
pub const MAX_POSET_ELEMENTS: usize = 10;

/// A strict poset over elements `0..n`, stored as direct relations.
/// Transitivity is implicit; consistency is discovered during extension
/// enumeration.
#[derive(Clone, Debug)]
pub struct Poset {
    n: usize,
    preds: Vec<u16>,
}

impl Poset {
    pub fn new(n: usize) -> Self {
        assert!(n <= MAX_POSET_ELEMENTS, "poset too large");
        Poset {
            n,
            preds: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Records `a < b`. A self-relation makes the poset inconsistent.
    pub fn add_less(&mut self, a: usize, b: usize) {
        self.preds[b] |= 1 << a;
    }

    pub fn has_less(&self, a: usize, b: usize) -> bool {
        self.preds[b] & (1 << a) != 0
    }

    /// Calls `f` with the rank array of every linear extension:
    /// `ranks[e]` is the 1-based position of element `e` in the total order.
    pub fn for_each_extension(&self, mut f: impl FnMut(&[u8])) {
        let mut ranks = vec![0u8; self.n];
        let full: u16 = if self.n == 16 { u16::MAX } else { (1 << self.n) - 1 };
        self.extend_rec(0, 0, full, &mut ranks, &mut f);
    }

    fn extend_rec(
        &self,
        placed: u16,
        step: u8,
        full: u16,
        ranks: &mut [u8],
        f: &mut impl FnMut(&[u8]),
    ) {
        if placed == full {
            f(ranks);
            return;
        }
        for e in 0..self.n {
            let bit = 1u16 << e;
            if placed & bit != 0 {
                continue;
            }
            // minimal among unplaced: all predecessors already placed
            if self.preds[e] & !placed != 0 {
                continue;
            }
            ranks[e] = step + 1;
            self.extend_rec(placed | bit, step + 1, full, ranks, f);
        }
    }

    /// Number of linear extensions.
    pub fn count_extensions(&self) -> u64 {
        let mut count = 0u64;
        self.for_each_extension(|_| count += 1);
        count
    }
}

/// All linear extensions as permutations: extension `sigma` maps element
/// `i` (in the ground-set order) to its 1-based rank `sigma(i)`.
/// Returns an empty list iff the relations are inconsistent.
pub fn linear_extensions(p: &Poset) -> Result<Vec<Permutation>> {
    if p.len() > MAX_POSET_ELEMENTS {
        return Err(Error::Guard(format!(
            "poset has {} elements, bound is {}",
            p.len(),
            MAX_POSET_ELEMENTS
        )));
    }
    if p.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    p.for_each_extension(|ranks| {
        out.push(Permutation::new(ranks.iter().map(|&r| r as u32).collect()).unwrap());
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antichain_chain_cycle() {
        let p = Poset::new(3);
        assert_eq!(linear_extensions(&p).unwrap().len(), 6);

        let mut chain = Poset::new(3);
        chain.add_less(0, 1);
        chain.add_less(1, 2);
        let exts = linear_extensions(&chain).unwrap();
        assert_eq!(exts.len(), 1);
        assert_eq!(exts[0].values(), &[1, 2, 3]);

        let mut cyc = Poset::new(2);
        cyc.add_less(0, 1);
        cyc.add_less(1, 0);
        assert!(linear_extensions(&cyc).unwrap().is_empty());

        let mut selfloop = Poset::new(2);
        selfloop.add_less(0, 0);
        assert!(linear_extensions(&selfloop).unwrap().is_empty());
    }

    #[test]
    fn factorial_counts() {
        for n in 1..=6 {
            let p = Poset::new(n);
            let expected: u64 = (1..=n as u64).product();
            assert_eq!(p.count_extensions(), expected);
        }
    }

    #[test]
    fn v_shape() {
        // 0 < 1 and 0 < 2: extensions 123 and 132 as rank arrays
        let mut p = Poset::new(3);
        p.add_less(0, 1);
        p.add_less(0, 2);
        let exts = linear_extensions(&p).unwrap();
        assert_eq!(exts.len(), 2);
        let strs: Vec<String> = exts.iter().map(|e| e.to_string()).collect();
        assert!(strs.contains(&"123".to_string()));
        assert!(strs.contains(&"132".to_string()));
    }
}
