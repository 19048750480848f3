//! Bottom-up evaluation of a pattern-tree vector over an input
//! permutation, with optional gadget acceleration.
//!
//! The tree is traversed in post-order. At an ordinary vertex of size `r`,
//! every `r`-subset of permutation points matching the vertex label is
//! enumerated; its weight is the product of one rectangle query per child,
//! and the weighted point `(x_1..x_r, y_1..y_r)` is inserted into a
//! `2r`-dimensional rectangle-tree. The root is accumulated as a plain
//! total (its tree would only ever answer the full query). Cost is
//! `O(n^{s(T)})` subsets times polylogarithmic tree operations.
//!
//! A *gadget* vertex (`3214` marked at 4, or `43215` marked at 5 as a
//! leaf) is evaluated by its sub-quadratic kernel instead: children
//! attached by single equalities contribute positional weight functions,
//! and the parent's degenerate rectangle queries collapse to
//! 2-dimensional queries against the marked-count tree.

use crate::error::{Error, Result};
use crate::gadgets::{
    default_params_43215, default_strip_3214, marked_43215, weighted_marked_3214, MarkedCountTree,
    WeightFn,
};
use crate::perm::{for_each_combination, Permutation};
use crate::rect::{Rectangle, RectangleTree};
use crate::tree::{ConstraintAtom, EdgeData, PatternTree, VertexLabel};

/// Evaluation limits and gadget parameters.
#[derive(Clone, Debug)]
pub struct EvalOptions {
    /// Largest ordinary vertex size enumerated by subsets. The quadratic
    /// pipelines need 2; raise it explicitly for the generic algorithm.
    pub max_vertex_size: usize,
    /// Strip size for the weighted `3214` kernel; default `n^(1/3)`.
    pub strip_3214: Option<usize>,
    /// Strip and pair-tree parameters for the `43215` kernel; default
    /// `n^(1/4)` each.
    pub params_43215: Option<(usize, usize)>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            max_vertex_size: 2,
            strip_3214: None,
            params_43215: None,
        }
    }
}

/// Counters describing what an evaluation actually did.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalStats {
    /// Ordinary vertices of size >= 2 whose subsets were enumerated; the
    /// sub-quadratic profile path must keep this at zero.
    pub subset_scans_size2: u64,
    /// Gadget kernels invoked.
    pub gadget_kernels: u64,
}

/// Evaluates a gadget-free tree; the total occurrence count of `t` in `pi`.
pub fn evaluate(t: &PatternTree, pi: &Permutation) -> Result<i128> {
    if t.has_gadget() {
        return Err(Error::Data(
            "tree contains gadget vertices; use evaluate_augmented".into(),
        ));
    }
    evaluate_with(t, pi, &EvalOptions::default()).map(|(v, _)| v)
}

/// Evaluates a tree that may contain gadget vertices.
pub fn evaluate_augmented(t: &PatternTree, pi: &Permutation) -> Result<i128> {
    evaluate_with(t, pi, &EvalOptions::default()).map(|(v, _)| v)
}

enum Node {
    Tree(RectangleTree),
    Marked(MarkedCountTree),
    RootTotal(i128),
}

/// Full evaluation entry point with options and instrumentation.
pub fn evaluate_with(
    t: &PatternTree,
    pi: &Permutation,
    opts: &EvalOptions,
) -> Result<(i128, EvalStats)> {
    let mut stats = EvalStats::default();
    validate_gadget_shapes(t)?;
    let points: Vec<(u32, u32)> = pi.points().collect();
    let node = eval_vertex(t, t.root(), pi, &points, opts, &mut stats)?;
    let total = match node {
        Node::RootTotal(v) => v,
        Node::Marked(m) => m.total(),
        Node::Tree(tree) => tree.total(),
    };
    Ok((total, stats))
}

/// Checks the structural requirements on every gadget vertex: a supported
/// pattern and mark, an incoming edge conditioning only the marked point,
/// and outgoing edges that are single equalities to non-gadget children
/// (none at all for `43215`).
fn validate_gadget_shapes(t: &PatternTree) -> Result<()> {
    for (vi, v) in t.vertices().iter().enumerate() {
        let VertexLabel::Gadget { pattern, mark } = &v.label else {
            continue;
        };
        let name = pattern.to_string();
        let supported = (name == "3214" && *mark == 4) || (name == "43215" && *mark == 5);
        if !supported {
            return Err(Error::Data(format!(
                "unsupported gadget {pattern} marked {mark}; conjugate the input instead"
            )));
        }
        if name == "43215" && !t.child_edges(vi).is_empty() {
            return Err(Error::Data("43215 gadget must be a leaf".into()));
        }
        for &ei in t.child_edges(vi) {
            let e = &t.edges()[ei];
            if e.atoms.len() != 1 || !matches!(e.atoms[0], ConstraintAtom::PointEq(_, _)) {
                return Err(Error::Data(
                    "gadget child edges carry exactly one equality".into(),
                ));
            }
            if t.vertices()[e.child].label.is_gadget() {
                return Err(Error::Data("gadget children must be ordinary vertices".into()));
            }
        }
        // incoming edge, if any, conditions only the marked point
        for e in t.edges() {
            if e.child != vi {
                continue;
            }
            for atom in &e.atoms {
                let (a, b) = match atom {
                    ConstraintAtom::XLess(a, b)
                    | ConstraintAtom::YLess(a, b)
                    | ConstraintAtom::PointEq(a, b) => (a, b),
                };
                for r in [a, b] {
                    if r.vertex == vi && r.index != *mark {
                        return Err(Error::Data(format!(
                            "edge into gadget {:?} conditions point {} (only the mark {} is allowed)",
                            v.name, r.index, mark
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

fn eval_vertex(
    t: &PatternTree,
    u: usize,
    pi: &Permutation,
    points: &[(u32, u32)],
    opts: &EvalOptions,
    stats: &mut EvalStats,
) -> Result<Node> {
    let label = &t.vertices()[u].label;
    if label.is_gadget() {
        return eval_gadget(t, u, pi, opts, stats);
    }
    let r = label.size();
    if r > opts.max_vertex_size {
        return Err(Error::Guard(format!(
            "vertex of size {} exceeds the enumeration bound {}",
            r, opts.max_vertex_size
        )));
    }
    let mut children: Vec<(&EdgeData, Node)> = Vec::new();
    for &ei in t.child_edges(u) {
        let e = &t.edges()[ei];
        let node = eval_vertex(t, e.child, pi, points, opts, stats)?;
        children.push((e, node));
    }
    if r >= 2 {
        stats.subset_scans_size2 += 1;
    }
    let n = pi.n() as u32;
    let tau = label.pattern().clone();
    let is_root = u == t.root();
    let mut tree = if is_root {
        None
    } else {
        Some(RectangleTree::new(2 * r, n)?)
    };
    let mut root_total: i128 = 0;
    let mut coords = vec![0u32; 2 * r];
    let mut err: Option<Error> = None;
    let mut subset_points: Vec<(u32, u32)> = vec![(0, 0); r];
    for_each_combination(pi.n(), r, |subset| {
        if err.is_some() {
            return;
        }
        for (j, &idx) in subset.iter().enumerate() {
            subset_points[j] = points[idx];
        }
        if !matches_pattern(&subset_points, &tau) {
            return;
        }
        let mut weight: i128 = 1;
        for (e, node) in &children {
            let q = match node {
                Node::Tree(child_tree) => {
                    let rect = edge_rectangle_for(t, e, &subset_points, n);
                    match child_tree.query(&rect) {
                        Ok(v) => v,
                        Err(er) => {
                            err = Some(er);
                            return;
                        }
                    }
                }
                Node::Marked(marked) => {
                    let rect = marked_edge_rectangle(e, &subset_points, n);
                    match marked.query(&rect) {
                        Ok(v) => v,
                        Err(er) => {
                            err = Some(er);
                            return;
                        }
                    }
                }
                Node::RootTotal(_) => unreachable!("only the root accumulates a total"),
            };
            weight = match weight.checked_mul(q) {
                Some(w) => w,
                None => {
                    err = Some(Error::Guard("weight overflow in evaluation".into()));
                    return;
                }
            };
            if weight == 0 {
                break;
            }
        }
        if weight == 0 {
            return;
        }
        if let Some(tree) = tree.as_mut() {
            for (j, &(x, y)) in subset_points.iter().enumerate() {
                coords[j] = x;
                coords[r + j] = y;
            }
            if let Err(er) = tree.insert(&coords, weight) {
                err = Some(er);
            }
        } else {
            match root_total.checked_add(weight) {
                Some(v) => root_total = v,
                None => err = Some(Error::Guard("total overflow in evaluation".into())),
            }
        }
    });
    if let Some(er) = err {
        return Err(er);
    }
    Ok(match tree {
        Some(mut tree) => {
            tree.freeze();
            Node::Tree(tree)
        }
        None => Node::RootTotal(root_total),
    })
}

fn eval_gadget(
    t: &PatternTree,
    u: usize,
    pi: &Permutation,
    opts: &EvalOptions,
    stats: &mut EvalStats,
) -> Result<Node> {
    let VertexLabel::Gadget { pattern, .. } = &t.vertices()[u].label else {
        unreachable!()
    };
    let n = pi.n();
    stats.gadget_kernels += 1;
    if pattern.to_string() == "43215" {
        let (m, q) = opts.params_43215.unwrap_or_else(|| default_params_43215(n));
        return Ok(Node::Marked(marked_43215(pi, m, q)?));
    }
    // weighted 3214: equality children supply the positional weights
    let points: Vec<(u32, u32)> = pi.points().collect();
    let mut child_queries: Vec<(u8, RectangleTree, usize, usize)> = Vec::new();
    for &ei in t.child_edges(u) {
        let e = &t.edges()[ei];
        let node = eval_vertex(t, e.child, pi, &points, opts, stats)?;
        let ConstraintAtom::PointEq(pu, pv) = &e.atoms[0] else {
            unreachable!("gadget shapes validated")
        };
        let Node::Tree(tree) = node else {
            return Err(Error::Data("gadget children must be ordinary vertices".into()));
        };
        let child_size = t.vertices()[e.child].label.size();
        child_queries.push((pu.index, tree, pv.index as usize, child_size));
    }
    let make_weight = |slot: u8| -> Box<WeightFn<'_>> {
        let parts: Vec<&(u8, RectangleTree, usize, usize)> = child_queries
            .iter()
            .filter(|(s, _, _, _)| *s == slot)
            .collect();
        if parts.is_empty() {
            Box::new(|_| 1)
        } else {
            let n = pi.n() as u32;
            Box::new(move |a: usize| {
                let mut w: i128 = 1;
                for (_, tree, idx, size) in parts.iter().copied() {
                    let mut rect = Rectangle::full(2 * size, n);
                    rect.clamp_axis(idx - 1, a as i64, a as i64);
                    w *= tree.query(&rect).expect("frozen child tree");
                    if w == 0 {
                        break;
                    }
                }
                w
            })
        }
    };
    let w1 = make_weight(1);
    let w2 = make_weight(2);
    let w3 = make_weight(3);
    let w4 = make_weight(4);
    let m = opts.strip_3214.unwrap_or_else(|| default_strip_3214(n));
    Ok(Node::Marked(weighted_marked_3214(
        pi,
        [&*w1, &*w2, &*w3, &*w4],
        m,
    )?))
}

fn matches_pattern(pts: &[(u32, u32)], tau: &Permutation) -> bool {
    let r = pts.len();
    let tv = tau.values();
    for a in 0..r {
        for b in a + 1..r {
            if (pts[a].1 < pts[b].1) != (tv[a] < tv[b]) {
                return false;
            }
        }
    }
    true
}

/// The set of permissible locations for the child's points under the
/// constraints of edge `u -> v`, when the parent's points sit at the
/// x-sorted set `s`: a `2d`-dimensional rectangle (`d` = child size) whose
/// first `d` segments bound x coordinates and last `d` bound y.
pub fn edge_rectangle(
    t: &PatternTree,
    edge: &EdgeData,
    s: &[(u32, u32)],
    n: u32,
) -> Result<Rectangle> {
    let parent_size = t.vertices()[edge.parent].label.size();
    if s.len() != parent_size {
        return Err(Error::Data(format!(
            "expected {} parent points, got {}",
            parent_size,
            s.len()
        )));
    }
    for w in s.windows(2) {
        if w[0].0 >= w[1].0 {
            return Err(Error::Data("parent points must be sorted by x".into()));
        }
    }
    Ok(edge_rectangle_for(t, edge, s, n))
}

fn edge_rectangle_for(t: &PatternTree, edge: &EdgeData, s: &[(u32, u32)], n: u32) -> Rectangle {
    let d = t.vertices()[edge.child].label.size();
    let mut rect = Rectangle::full(2 * d, n);
    for atom in &edge.atoms {
        apply_atom(&mut rect, atom, edge, s, |i| i as usize - 1, d);
    }
    rect
}

/// The 2-dimensional projection of the edge rectangle onto the marked
/// point of a gadget child; valid because the edge conditions only that
/// point.
fn marked_edge_rectangle(edge: &EdgeData, s: &[(u32, u32)], n: u32) -> Rectangle {
    let mut rect = Rectangle::full(2, n);
    for atom in &edge.atoms {
        apply_atom(&mut rect, atom, edge, s, |_| 0, 1);
    }
    rect
}

/// Clamps `rect` by one atom. `axis_of` maps a child point index to its
/// x-axis slot; the matching y slot is `d` further.
fn apply_atom(
    rect: &mut Rectangle,
    atom: &ConstraintAtom,
    edge: &EdgeData,
    s: &[(u32, u32)],
    axis_of: impl Fn(u8) -> usize,
    d: usize,
) {
    match atom {
        ConstraintAtom::XLess(a, b) => {
            if a.vertex == edge.parent && b.vertex == edge.child {
                let bound = s[a.index as usize - 1].0 as i64;
                rect.clamp_axis(axis_of(b.index), bound + 1, i64::MAX);
            } else if a.vertex == edge.child && b.vertex == edge.parent {
                let bound = s[b.index as usize - 1].0 as i64;
                rect.clamp_axis(axis_of(a.index), i64::MIN, bound - 1);
            }
        }
        ConstraintAtom::YLess(a, b) => {
            if a.vertex == edge.parent && b.vertex == edge.child {
                let bound = s[a.index as usize - 1].1 as i64;
                rect.clamp_axis(d + axis_of(b.index), bound + 1, i64::MAX);
            } else if a.vertex == edge.child && b.vertex == edge.parent {
                let bound = s[b.index as usize - 1].1 as i64;
                rect.clamp_axis(d + axis_of(a.index), i64::MIN, bound - 1);
            }
        }
        ConstraintAtom::PointEq(a, b) => {
            // equalities are normalized parent-first at construction
            let (x, y) = s[a.index as usize - 1];
            rect.clamp_axis(axis_of(b.index), x as i64, x as i64);
            rect.clamp_axis(d + axis_of(b.index), y as i64, y as i64);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{count_pattern_brute, parse_permutation};
    use crate::rng::{random_permutation, seeded};
    use crate::tree::{corpus, CornerDir};
    use num_bigint::BigInt;

    fn p(s: &str) -> Permutation {
        parse_permutation(s).unwrap()
    }

    #[test]
    fn single_vertex_counts_points() {
        let t = PatternTree::single(p("1"));
        assert_eq!(evaluate(&t, &p("41352")).unwrap(), 5);
    }

    #[test]
    fn corner_path_on_small_input() {
        // vector is 213 + 312; each occurs once in 2413
        let t = PatternTree::corner(&[0, 1], &[CornerDir::SE, CornerDir::NE]).unwrap();
        assert_eq!(evaluate(&t, &p("2413")).unwrap(), 2);
    }

    #[test]
    fn example_tree_matches_brute() {
        // the example tree has a size-3 root, beyond the default guard
        let t = corpus::example_tree();
        let opts = EvalOptions {
            max_vertex_size: 3,
            ..Default::default()
        };
        for pi in ["2471635", "1234567", "7654321", "35142"] {
            let pi = p(pi);
            assert_eq!(
                evaluate_with(&t, &pi, &opts).unwrap().0 as u128,
                t.occurrences_brute(&pi).unwrap(),
                "pi={pi}"
            );
        }
    }

    #[test]
    fn edge_rectangle_examples() {
        let t =
            PatternTree::parse("vertex u 1\nvertex v 1\nroot u\nedge u v x u.1 < x v.1\n").unwrap();
        let r = edge_rectangle(&t, &t.edges()[0], &[(3, 7)], 10).unwrap();
        assert_eq!(r.bounds(), &[(4, 10), (1, 10)]);

        let t = PatternTree::parse("vertex u 1\nvertex v 1\nroot u\nedge u v p u.1 = p v.1\n")
            .unwrap();
        let r = edge_rectangle(&t, &t.edges()[0], &[(3, 7)], 10).unwrap();
        assert_eq!(r.bounds(), &[(3, 3), (7, 7)]);

        let t = PatternTree::parse(
            "vertex u 1\nvertex v 1\nroot u\nedge u v x v.1 < x u.1 ; x u.1 < x v.1\n",
        )
        .unwrap();
        let r = edge_rectangle(&t, &t.edges()[0], &[(3, 7)], 10).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn random_trees_match_brute_and_vector() {
        let mut rng = seeded(71);
        for _ in 0..40 {
            let t = corpus::random_tree(&mut rng, 6, 2, true);
            let pi = random_permutation(&mut rng, 8);
            let via_eval = evaluate(&t, &pi).unwrap();
            let direct = t.occurrences_brute(&pi).unwrap();
            assert_eq!(via_eval as u128, direct, "tree:\n{t}\npi={pi}");
            let via_vector: BigInt = t
                .vector()
                .unwrap()
                .iter()
                .map(|(rho, c)| c * count_pattern_brute(rho, &pi))
                .sum();
            assert_eq!(BigInt::from(via_eval), via_vector);
        }
    }

    #[test]
    fn size_three_vertices_need_raised_guard() {
        let t = PatternTree::single(p("231"));
        assert!(matches!(evaluate(&t, &p("53412")), Err(Error::Guard(_))));
        let opts = EvalOptions {
            max_vertex_size: 3,
            ..Default::default()
        };
        let (v, stats) = evaluate_with(&t, &p("53412"), &opts).unwrap();
        assert_eq!(BigInt::from(v), count_pattern_brute(&p("231"), &p("53412")));
        assert_eq!(stats.subset_scans_size2, 1);
    }

    #[test]
    fn gadget_leaf_totals() {
        let t = PatternTree::parse("vertex g gadget 3214 marked 4\nroot g\n").unwrap();
        assert_eq!(evaluate_augmented(&t, &p("3214")).unwrap(), 1);
        assert!(evaluate(&t, &p("3214")).is_err());

        let t = PatternTree::parse("vertex g gadget 43215 marked 5\nroot g\n").unwrap();
        assert_eq!(evaluate_augmented(&t, &p("12345678")).unwrap(), 0);
        assert_eq!(evaluate_augmented(&t, &p("43215")).unwrap(), 1);
    }

    #[test]
    fn gadget_with_parent_and_child_matches_expansion() {
        // corner parent above the mark, child glued to the second point
        let text = "vertex a 1\nvertex g gadget 3214 marked 4\nvertex c 1\nroot a\n\
                    edge a g x g.4 < x a.1 ; y g.4 < y a.1\n\
                    edge g c p g.2 = p c.1\n";
        let t = PatternTree::parse(text).unwrap();
        let expanded = t.with_gadgets_expanded();
        let mut rng = seeded(3);
        for _ in 0..6 {
            let pi = random_permutation(&mut rng, 10);
            let fast = evaluate_augmented(&t, &pi).unwrap();
            let slow = expanded.occurrences_brute(&pi).unwrap();
            assert_eq!(fast as u128, slow, "pi={pi}");
            let (_, stats) = evaluate_with(&t, &pi, &EvalOptions::default()).unwrap();
            assert_eq!(stats.subset_scans_size2, 0);
            assert_eq!(stats.gadget_kernels, 1);
        }
    }

    #[test]
    fn gadget_shape_violations_rejected() {
        // edge into the gadget touching a non-marked point
        let bad = "vertex a 1\nvertex g gadget 3214 marked 4\nroot a\n\
                   edge a g x g.2 < x a.1\n";
        let t = PatternTree::parse(bad).unwrap();
        assert!(evaluate_augmented(&t, &p("3214")).is_err());

        // 43215 with a child
        let bad = "vertex g gadget 43215 marked 5\nvertex c 1\nroot g\n\
                   edge g c p g.1 = p c.1\n";
        let t = PatternTree::parse(bad).unwrap();
        assert!(evaluate_augmented(&t, &p("43215")).is_err());

        // unsupported gadget pattern
        let bad = "vertex g gadget 1234 marked 4\nroot g\n";
        let t = PatternTree::parse(bad).unwrap();
        assert!(evaluate_augmented(&t, &p("1234")).is_err());
    }

    #[test]
    fn root_gadget_with_children_matches_expansion() {
        let text = "vertex g gadget 3214 marked 4\nvertex c 1\nvertex d 1\nroot g\n\
                    edge g c p g.1 = p c.1\n\
                    edge g d p g.4 = p d.1\n";
        let t = PatternTree::parse(text).unwrap();
        let expanded = t.with_gadgets_expanded();
        let mut rng = seeded(13);
        for _ in 0..5 {
            let pi = random_permutation(&mut rng, 9);
            assert_eq!(
                evaluate_augmented(&t, &pi).unwrap() as u128,
                expanded.occurrences_brute(&pi).unwrap(),
                "pi={pi}"
            );
        }
    }

    #[test]
    fn corner_trees_have_no_size2_scans() {
        let t = PatternTree::corner(&[0, 0, 1], &[CornerDir::NE, CornerDir::SW, CornerDir::NW])
            .unwrap();
        let (_, stats) = evaluate_with(&t, &p("41352"), &EvalOptions::default()).unwrap();
        assert_eq!(stats.subset_scans_size2, 0);
    }

    #[test]
    fn size2_internal_vertex_uses_4d_tree() {
        let text = "vertex u 21\nvertex v 12\nroot u\n\
                    edge u v x v.1 < x u.1 ; y v.2 < y u.2\n";
        let t = PatternTree::parse(text).unwrap();
        let mut rng = seeded(29);
        for _ in 0..5 {
            let pi = random_permutation(&mut rng, 9);
            assert_eq!(
                evaluate(&t, &pi).unwrap() as u128,
                t.occurrences_brute(&pi).unwrap(),
                "pi={pi}"
            );
        }
    }
}
