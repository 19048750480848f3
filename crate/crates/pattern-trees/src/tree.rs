//! Pattern trees: rooted trees whose vertices carry small permutations and
//! whose edges carry order constraints and equalities between point
//! variables.
//!
//! A tree with point set `p(T)` defines strict posets over the x and y
//! coordinates of its points plus an equivalence relation from edge
//! equalities. Its *vector* is the formal integer combination of patterns
//! whose counts sum to the tree's occurrence count on any permutation:
//! enumerate every equivalence relation coarsening the edge equalities,
//! quotient both posets, and compose each pair of linear extensions into a
//! pattern. [`PatternTree::occurrences_brute`] independently counts
//! occurrences by exhaustive assignment and is the oracle the vector is
//! validated against.
//!
//! # Text format
//!
//! Line based; `#` starts a comment. Vertex indices inside constraint
//! atoms are 1-based.
//!
//! ```text
//! vertex <name> <pattern>
//! vertex <name> gadget <pattern> marked <index>
//! edge <parent> <child> [<atom> (; <atom>)*]
//! root <name>
//! ```
//!
//! An atom is `x u.2 < x v.1`, `y v.1 < y u.3`, `p u.2 = p v.2`, or the
//! corner shorthand `corner NE|NW|SE|SW` (child relative to parent), which
//! expands to the two coordinate inequalities. `>` is accepted and
//! normalized on parse. Printing emits only normalized `<` and `=` atoms,
//! so parse/print round-trips exactly.

use std::fmt;

use crate::error::{Error, Result};
use crate::perm::{parse_permutation, PatternVector, Permutation};
use crate::poset::Poset;

/// A point variable: 1-based `index` within the labeled vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointRef {
    pub vertex: usize,
    pub index: u8,
}

/// One constraint written on an edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstraintAtom {
    /// x-coordinate of the first point is strictly left of the second.
    XLess(PointRef, PointRef),
    /// y-coordinate of the first point is strictly below the second.
    YLess(PointRef, PointRef),
    /// The two point variables map to the same permutation point.
    PointEq(PointRef, PointRef),
}

/// Corner-tree edge directions: position of the child relative to the parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CornerDir {
    NE,
    NW,
    SE,
    SW,
}

impl CornerDir {
    pub const ALL: [CornerDir; 4] = [CornerDir::NE, CornerDir::NW, CornerDir::SE, CornerDir::SW];

    pub fn name(self) -> &'static str {
        match self {
            CornerDir::NE => "NE",
            CornerDir::NW => "NW",
            CornerDir::SE => "SE",
            CornerDir::SW => "SW",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "NE" => Ok(CornerDir::NE),
            "NW" => Ok(CornerDir::NW),
            "SE" => Ok(CornerDir::SE),
            "SW" => Ok(CornerDir::SW),
            _ => Err(Error::Parse(format!("unknown corner label {s:?}"))),
        }
    }

    /// The two inequalities between parent point `u.i` and child point `v.j`.
    pub fn atoms(self, u: PointRef, v: PointRef) -> [ConstraintAtom; 2] {
        match self {
            CornerDir::NE => [ConstraintAtom::XLess(u, v), ConstraintAtom::YLess(u, v)],
            CornerDir::NW => [ConstraintAtom::XLess(v, u), ConstraintAtom::YLess(u, v)],
            CornerDir::SE => [ConstraintAtom::XLess(u, v), ConstraintAtom::YLess(v, u)],
            CornerDir::SW => [ConstraintAtom::XLess(v, u), ConstraintAtom::YLess(v, u)],
        }
    }
}

/// What a vertex is labeled with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexLabel {
    Pattern(Permutation),
    /// A vertex evaluated by a bespoke marked-count kernel instead of
    /// subset enumeration. For constraint purposes it behaves exactly like
    /// a vertex labeled by `pattern`.
    Gadget { pattern: Permutation, mark: u8 },
}

impl VertexLabel {
    pub fn pattern(&self) -> &Permutation {
        match self {
            VertexLabel::Pattern(p) => p,
            VertexLabel::Gadget { pattern, .. } => pattern,
        }
    }

    pub fn size(&self) -> usize {
        self.pattern().n()
    }

    pub fn is_gadget(&self) -> bool {
        matches!(self, VertexLabel::Gadget { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub name: String,
    pub label: VertexLabel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeData {
    pub parent: usize,
    pub child: usize,
    pub atoms: Vec<ConstraintAtom>,
}

/// A rooted edge- and vertex-labeled tree over permutation point variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternTree {
    vertices: Vec<Vertex>,
    edges: Vec<EdgeData>,
    root: usize,
    children: Vec<Vec<usize>>, // edge indices grouped by parent vertex
    point_base: Vec<usize>,    // global index of each vertex's first point
    total_points: usize,
}

impl PatternTree {
    pub fn new(vertices: Vec<Vertex>, edges: Vec<EdgeData>, root: usize) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Data("tree needs at least one vertex".into()));
        }
        if root >= vertices.len() {
            return Err(Error::Data("root out of range".into()));
        }
        {
            let mut names: Vec<&str> = vertices.iter().map(|v| v.name.as_str()).collect();
            names.sort_unstable();
            names.dedup();
            if names.len() != vertices.len() {
                return Err(Error::Data("duplicate vertex names".into()));
            }
        }
        if edges.len() + 1 != vertices.len() {
            return Err(Error::Data(format!(
                "{} vertices need exactly {} edges, got {}",
                vertices.len(),
                vertices.len() - 1,
                edges.len()
            )));
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
        let mut has_parent = vec![false; vertices.len()];
        for (ei, e) in edges.iter().enumerate() {
            if e.parent >= vertices.len() || e.child >= vertices.len() {
                return Err(Error::Data("edge endpoint out of range".into()));
            }
            if e.child == root || has_parent[e.child] {
                return Err(Error::Data("edges must form a tree oriented away from the root".into()));
            }
            has_parent[e.child] = true;
            children[e.parent].push(ei);
            for atom in &e.atoms {
                let (a, b, is_eq) = match atom {
                    ConstraintAtom::XLess(a, b) | ConstraintAtom::YLess(a, b) => (a, b, false),
                    ConstraintAtom::PointEq(a, b) => (a, b, true),
                };
                let touches_both = (a.vertex == e.parent && b.vertex == e.child)
                    || (a.vertex == e.child && b.vertex == e.parent);
                if !touches_both {
                    return Err(Error::Data(
                        "edge atom must relate one point of the parent and one of the child".into(),
                    ));
                }
                if is_eq && a.vertex != e.parent {
                    return Err(Error::Data(
                        "equality atoms are written parent point first".into(),
                    ));
                }
                for r in [a, b] {
                    let sz = vertices[r.vertex].label.size();
                    if r.index == 0 || r.index as usize > sz {
                        return Err(Error::Data(format!(
                            "point index {} out of range for vertex {:?} of size {}",
                            r.index, vertices[r.vertex].name, sz
                        )));
                    }
                }
            }
        }
        // reachability from root
        let mut seen = vec![false; vertices.len()];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(u) = stack.pop() {
            for &ei in &children[u] {
                let c = edges[ei].child;
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Data("tree is not connected".into()));
        }
        let mut point_base = Vec::with_capacity(vertices.len());
        let mut total = 0usize;
        for v in &vertices {
            point_base.push(total);
            total += v.label.size();
        }
        Ok(PatternTree {
            vertices,
            edges,
            root,
            children,
            point_base,
            total_points: total,
        })
    }

    /// A single vertex labeled by `pattern`.
    pub fn single(pattern: Permutation) -> Self {
        PatternTree::new(
            vec![Vertex {
                name: "u".into(),
                label: VertexLabel::Pattern(pattern),
            }],
            vec![],
            0,
        )
        .unwrap()
    }

    /// A corner-tree: all vertices labeled `1`, edges labeled by directions.
    /// `parents[i]` is the parent of vertex `i+1`; vertex 0 is the root.
    pub fn corner(parents: &[usize], dirs: &[CornerDir]) -> Result<Self> {
        if parents.len() != dirs.len() {
            return Err(Error::Data("corner tree needs one direction per edge".into()));
        }
        let n = parents.len() + 1;
        let vertices: Vec<Vertex> = (0..n)
            .map(|i| Vertex {
                name: format!("v{i}"),
                label: VertexLabel::Pattern(Permutation::identity(1)),
            })
            .collect();
        let edges: Vec<EdgeData> = parents
            .iter()
            .zip(dirs)
            .enumerate()
            .map(|(i, (&p, &d))| {
                let child = i + 1;
                let u = PointRef { vertex: p, index: 1 };
                let v = PointRef {
                    vertex: child,
                    index: 1,
                };
                EdgeData {
                    parent: p,
                    child,
                    atoms: d.atoms(u, v).to_vec(),
                }
            })
            .collect();
        PatternTree::new(vertices, edges, 0)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeData] {
        &self.edges
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Edge indices leaving `vertex`.
    pub fn child_edges(&self, vertex: usize) -> &[usize] {
        &self.children[vertex]
    }

    /// Largest vertex label size.
    pub fn max_size(&self) -> usize {
        self.vertices.iter().map(|v| v.label.size()).max().unwrap()
    }

    /// Sum of vertex label sizes, the number of point variables.
    pub fn total_size(&self) -> usize {
        self.total_points
    }

    pub fn has_gadget(&self) -> bool {
        self.vertices.iter().any(|v| v.label.is_gadget())
    }

    /// The same tree with every gadget label replaced by its plain pattern.
    pub fn with_gadgets_expanded(&self) -> PatternTree {
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vertex {
                name: v.name.clone(),
                label: VertexLabel::Pattern(v.label.pattern().clone()),
            })
            .collect();
        PatternTree::new(vertices, self.edges.clone(), self.root).unwrap()
    }

    /// Global index of point `r` in the concatenated point list.
    pub fn point_index(&self, r: PointRef) -> usize {
        self.point_base[r.vertex] + r.index as usize - 1
    }

    pub fn point_of_index(&self, idx: usize) -> PointRef {
        let vertex = match self.point_base.binary_search(&idx) {
            Ok(v) => {
                // first vertex starting exactly at idx; later empty bases impossible
                v
            }
            Err(v) => v - 1,
        };
        PointRef {
            vertex,
            index: (idx - self.point_base[vertex]) as u8 + 1,
        }
    }

    fn vertex_by_name(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.name == name)
    }

    /// Every generating inequality of the tree: vertex-internal chains plus
    /// all edge inequality atoms, as (`is_x`, smaller point, larger point).
    fn inequalities(&self) -> Vec<(bool, usize, usize)> {
        let mut out = Vec::new();
        for (vi, v) in self.vertices.iter().enumerate() {
            let r = v.label.size();
            for i in 1..r {
                out.push((
                    true,
                    self.point_base[vi] + i - 1,
                    self.point_base[vi] + i,
                ));
            }
            // consecutive in value order
            let pat = v.label.pattern();
            let mut by_value: Vec<usize> = (0..r).collect();
            by_value.sort_unstable_by_key(|&i| pat.values()[i]);
            for w in by_value.windows(2) {
                out.push((
                    false,
                    self.point_base[vi] + w[0],
                    self.point_base[vi] + w[1],
                ));
            }
        }
        for e in &self.edges {
            for atom in &e.atoms {
                match atom {
                    ConstraintAtom::XLess(a, b) => {
                        out.push((true, self.point_index(*a), self.point_index(*b)))
                    }
                    ConstraintAtom::YLess(a, b) => {
                        out.push((false, self.point_index(*a), self.point_index(*b)))
                    }
                    ConstraintAtom::PointEq(_, _) => {}
                }
            }
        }
        out
    }

    fn equalities(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for e in &self.edges {
            for atom in &e.atoms {
                if let ConstraintAtom::PointEq(a, b) = atom {
                    out.push((self.point_index(*a), self.point_index(*b)));
                }
            }
        }
        out
    }

    /// The constraint system: x- and y-posets over the points and the
    /// equivalence classes induced by edge equalities.
    pub fn constraints(&self) -> Constraints {
        let t = self.total_points;
        let mut x = Poset::new(t);
        let mut y = Poset::new(t);
        for (is_x, a, b) in self.inequalities() {
            if is_x {
                x.add_less(a, b);
            } else {
                y.add_less(a, b);
            }
        }
        let mut uf: Vec<usize> = (0..t).collect();
        fn find(uf: &mut Vec<usize>, mut a: usize) -> usize {
            while uf[a] != a {
                uf[a] = uf[uf[a]];
                a = uf[a];
            }
            a
        }
        for (a, b) in self.equalities() {
            let ra = find(&mut uf, a);
            let rb = find(&mut uf, b);
            if ra != rb {
                uf[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut class_of = vec![usize::MAX; t];
        let mut num_classes = 0;
        for p in 0..t {
            let r = find(&mut uf, p);
            if class_of[r] == usize::MAX {
                class_of[r] = num_classes;
                num_classes += 1;
            }
            class_of[p] = class_of[r];
        }
        Constraints {
            x,
            y,
            class_of,
            num_classes,
        }
    }

    /// The vector of the tree: coefficients `c` such that the occurrence
    /// count on any permutation equals `sum_rho c[rho] * #rho`.
    ///
    /// Enumerates every equivalence relation coarsening the edge
    /// equalities; merges that contradict strict orders contribute nothing
    /// because the quotient posets have no linear extensions.
    pub fn vector(&self) -> Result<PatternVector> {
        if self.total_points > 8 {
            return Err(Error::Guard(format!(
                "tree has {} points, vector computation is bounded at 8",
                self.total_points
            )));
        }
        let cons = self.constraints();
        let ineqs = self.inequalities();
        let t = cons.num_classes;
        let mut out = PatternVector::new();
        // enumerate partitions of the base classes as restricted growth strings
        let mut assign = vec![0usize; t];
        enumerate_partitions(&mut assign, 1, t, &mut |assign, parts| {
            let mut xq = Poset::new(parts);
            let mut yq = Poset::new(parts);
            for &(is_x, a, b) in &ineqs {
                let ca = assign[cons.class_of[a]];
                let cb = assign[cons.class_of[b]];
                // ca == cb yields a self-relation and hence no extensions
                if is_x {
                    xq.add_less(ca, cb);
                } else {
                    yq.add_less(ca, cb);
                }
            }
            let mut sigmas: Vec<Vec<u8>> = Vec::new();
            xq.for_each_extension(|r| sigmas.push(r.to_vec()));
            if sigmas.is_empty() {
                return;
            }
            let mut taus: Vec<Vec<u8>> = Vec::new();
            yq.for_each_extension(|r| taus.push(r.to_vec()));
            for sigma in &sigmas {
                for tau in &taus {
                    // pattern rho with rho(sigma(c)) = tau(c)
                    let mut vals = vec![0u32; parts];
                    for c in 0..parts {
                        vals[sigma[c] as usize - 1] = tau[c] as u32;
                    }
                    out.add(Permutation::new(vals).unwrap(), 1);
                }
            }
        });
        Ok(out)
    }

    /// Number of occurrence maps `p(T) -> p(pi)` satisfying all
    /// constraints, by exhaustive backtracking. Test oracle only.
    pub fn occurrences_brute(&self, pi: &Permutation) -> Result<u128> {
        if self.total_points > 8 {
            return Err(Error::Guard("brute occurrence count bounded at 8 points".into()));
        }
        if pi.n() > 16 {
            return Err(Error::Guard("brute occurrence count bounded at n <= 16".into()));
        }
        let t = self.total_points;
        // constraints indexed by the later point, checked during assignment
        let mut x_checks: Vec<Vec<(usize, bool)>> = vec![Vec::new(); t]; // (other, other_is_smaller)
        let mut y_checks: Vec<Vec<(usize, bool)>> = vec![Vec::new(); t];
        let mut eq_checks: Vec<Vec<usize>> = vec![Vec::new(); t];
        for (is_x, a, b) in self.inequalities() {
            let (late, other, other_smaller) = if a < b { (b, a, true) } else { (a, b, false) };
            if is_x {
                x_checks[late].push((other, other_smaller));
            } else {
                y_checks[late].push((other, other_smaller));
            }
            if a == b {
                // self-relation: no assignment can satisfy it
                return Ok(0);
            }
        }
        for (a, b) in self.equalities() {
            let (late, other) = if a < b { (b, a) } else { (a, b) };
            eq_checks[late].push(other);
        }
        let points: Vec<(u32, u32)> = pi.points().collect();
        let mut chosen = vec![0usize; t];
        fn rec(
            depth: usize,
            t: usize,
            points: &[(u32, u32)],
            chosen: &mut [usize],
            x_checks: &[Vec<(usize, bool)>],
            y_checks: &[Vec<(usize, bool)>],
            eq_checks: &[Vec<usize>],
        ) -> u128 {
            if depth == t {
                return 1;
            }
            let mut total = 0u128;
            'cand: for cand in 0..points.len() {
                let (cx, cy) = points[cand];
                for &(other, smaller) in &x_checks[depth] {
                    let (ox, _) = points[chosen[other]];
                    if smaller != (ox < cx) || ox == cx {
                        continue 'cand;
                    }
                }
                for &(other, smaller) in &y_checks[depth] {
                    let (_, oy) = points[chosen[other]];
                    if smaller != (oy < cy) || oy == cy {
                        continue 'cand;
                    }
                }
                for &other in &eq_checks[depth] {
                    if chosen[other] != cand {
                        continue 'cand;
                    }
                }
                chosen[depth] = cand;
                total += rec(depth + 1, t, points, chosen, x_checks, y_checks, eq_checks);
            }
            total
        }
        Ok(rec(0, t, &points, &mut chosen, &x_checks, &y_checks, &eq_checks))
    }
}

/// Constraint system of a tree: strict posets over the global point
/// indices plus the equality classes.
pub struct Constraints {
    pub x: Poset,
    pub y: Poset,
    /// Point index -> equivalence class id.
    pub class_of: Vec<usize>,
    pub num_classes: usize,
}

fn enumerate_partitions(
    assign: &mut Vec<usize>,
    pos: usize,
    t: usize,
    f: &mut impl FnMut(&[usize], usize),
) {
    if t == 0 {
        return;
    }
    if pos == t {
        let parts = assign.iter().copied().max().unwrap() + 1;
        f(assign, parts);
        return;
    }
    let max_used = assign[..pos].iter().copied().max().unwrap();
    for part in 0..=max_used + 1 {
        assign[pos] = part;
        enumerate_partitions(assign, pos + 1, t, f);
    }
    assign[pos] = 0;
}

// ---------------------------------------------------------------------------
// text format
// ---------------------------------------------------------------------------

impl fmt::Display for PatternTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.vertices {
            match &v.label {
                VertexLabel::Pattern(p) => writeln!(f, "vertex {} {}", v.name, p)?,
                VertexLabel::Gadget { pattern, mark } => {
                    writeln!(f, "vertex {} gadget {} marked {}", v.name, pattern, mark)?
                }
            }
        }
        writeln!(f, "root {}", self.vertices[self.root].name)?;
        for e in &self.edges {
            write!(
                f,
                "edge {} {}",
                self.vertices[e.parent].name, self.vertices[e.child].name
            )?;
            if !e.atoms.is_empty() {
                write!(f, " ")?;
                let parts: Vec<String> = e
                    .atoms
                    .iter()
                    .map(|a| self.atom_to_string(a))
                    .collect();
                write!(f, "{}", parts.join(" ; "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl PatternTree {
    fn atom_to_string(&self, a: &ConstraintAtom) -> String {
        let r = |p: &PointRef| format!("{}.{}", self.vertices[p.vertex].name, p.index);
        match a {
            ConstraintAtom::XLess(a, b) => format!("x {} < x {}", r(a), r(b)),
            ConstraintAtom::YLess(a, b) => format!("y {} < y {}", r(a), r(b)),
            ConstraintAtom::PointEq(a, b) => format!("p {} = p {}", r(a), r(b)),
        }
    }

    pub fn parse(text: &str) -> Result<PatternTree> {
        let mut vertices: Vec<Vertex> = Vec::new();
        let mut edge_specs: Vec<(String, String, String)> = Vec::new();
        let mut root_name: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse(format!("line {}: {}", lineno + 1, msg));
            let mut it = line.splitn(2, char::is_whitespace);
            let keyword = it.next().unwrap();
            let rest = it.next().unwrap_or("").trim();
            match keyword {
                "vertex" => {
                    let toks: Vec<&str> = rest.split_whitespace().collect();
                    match toks.as_slice() {
                        [name, pat] => vertices.push(Vertex {
                            name: name.to_string(),
                            label: VertexLabel::Pattern(parse_permutation(pat)?),
                        }),
                        [name, "gadget", pat, "marked", idx] => {
                            let pattern = parse_permutation(pat)?;
                            let mark: u8 = idx
                                .parse()
                                .map_err(|_| err(format!("bad mark index {idx:?}")))?;
                            if mark == 0 || mark as usize > pattern.n() {
                                return Err(err("mark index out of range".into()));
                            }
                            vertices.push(Vertex {
                                name: name.to_string(),
                                label: VertexLabel::Gadget { pattern, mark },
                            });
                        }
                        _ => return Err(err(format!("bad vertex line {line:?}"))),
                    }
                }
                "edge" => {
                    let mut toks = rest.splitn(3, char::is_whitespace);
                    let parent = toks
                        .next()
                        .ok_or_else(|| err("edge needs parent".into()))?
                        .to_string();
                    let child = toks
                        .next()
                        .ok_or_else(|| err("edge needs child".into()))?
                        .to_string();
                    let atoms = toks.next().unwrap_or("").trim().to_string();
                    edge_specs.push((parent, child, atoms));
                }
                "root" => root_name = Some(rest.to_string()),
                _ => return Err(err(format!("unknown keyword {keyword:?}"))),
            }
        }
        if vertices.is_empty() {
            return Err(Error::Parse("tree has no vertices".into()));
        }
        let name_index = |name: &str| -> Result<usize> {
            vertices
                .iter()
                .position(|v| v.name == name)
                .ok_or_else(|| Error::Parse(format!("unknown vertex {name:?}")))
        };
        let parse_ref = |tok: &str| -> Result<PointRef> {
            let (name, idx) = tok
                .rsplit_once('.')
                .ok_or_else(|| Error::Parse(format!("bad point reference {tok:?}")))?;
            Ok(PointRef {
                vertex: name_index(name)?,
                index: idx
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad point index in {tok:?}")))?,
            })
        };
        let mut edges = Vec::new();
        for (pname, cname, atom_text) in &edge_specs {
            let parent = name_index(pname)?;
            let child = name_index(cname)?;
            let mut atoms = Vec::new();
            for atom_str in atom_text.split(';') {
                let atom_str = atom_str.trim();
                if atom_str.is_empty() {
                    continue;
                }
                let toks: Vec<&str> = atom_str.split_whitespace().collect();
                match toks.as_slice() {
                    ["corner", d] => {
                        let dir = CornerDir::parse(d)?;
                        let u = PointRef { vertex: parent, index: 1 };
                        let v = PointRef { vertex: child, index: 1 };
                        atoms.extend(dir.atoms(u, v));
                    }
                    [axis @ ("x" | "y"), a, op @ ("<" | ">"), axis2, b] => {
                        if axis != axis2 {
                            return Err(Error::Parse(format!(
                                "mismatched axes in atom {atom_str:?}"
                            )));
                        }
                        let (mut pa, mut pb) = (parse_ref(a)?, parse_ref(b)?);
                        if *op == ">" {
                            std::mem::swap(&mut pa, &mut pb);
                        }
                        atoms.push(if *axis == "x" {
                            ConstraintAtom::XLess(pa, pb)
                        } else {
                            ConstraintAtom::YLess(pa, pb)
                        });
                    }
                    ["p", a, "=", "p", b] => {
                        let (mut pa, mut pb) = (parse_ref(a)?, parse_ref(b)?);
                        // normalize to parent point first
                        if pa.vertex == child && pb.vertex == parent {
                            std::mem::swap(&mut pa, &mut pb);
                        }
                        atoms.push(ConstraintAtom::PointEq(pa, pb));
                    }
                    _ => return Err(Error::Parse(format!("bad constraint atom {atom_str:?}"))),
                }
            }
            edges.push(EdgeData {
                parent,
                child,
                atoms,
            });
        }
        let root = match root_name {
            Some(name) => name_index(&name)?,
            None => {
                // default: the unique vertex with no incoming edge
                let mut has_parent = vec![false; vertices.len()];
                for e in &edges {
                    if e.child < vertices.len() {
                        has_parent[e.child] = true;
                    }
                }
                has_parent
                    .iter()
                    .position(|&b| !b)
                    .ok_or_else(|| Error::Parse("no root found".into()))?
            }
        };
        PatternTree::new(vertices, edges, root)
    }
}

// ---------------------------------------------------------------------------
// random corpus
// ---------------------------------------------------------------------------

/// Random and fixed pattern trees for cross-validation against the brute
/// oracle.
pub mod corpus {
    use super::*;
    use rand::Rng;

    /// A three-vertex tree exercising equalities and partially constrained
    /// edges: root `132`, a child `12` glued to the root's middle point,
    /// and a child `1` confined between the root's second and third points.
    /// Its vector has coefficient 2 on `12534` and 1 on `1423`, `2413`,
    /// `24513`.
    pub fn example_tree() -> PatternTree {
        let pu = |i: u8| PointRef { vertex: 0, index: i };
        let pv = |i: u8| PointRef { vertex: 1, index: i };
        let pw = |i: u8| PointRef { vertex: 2, index: i };
        let pat = |s: &str| parse_permutation(s).unwrap();
        PatternTree::new(
            vec![
                Vertex {
                    name: "u".into(),
                    label: VertexLabel::Pattern(pat("132")),
                },
                Vertex {
                    name: "v".into(),
                    label: VertexLabel::Pattern(pat("12")),
                },
                Vertex {
                    name: "w".into(),
                    label: VertexLabel::Pattern(pat("1")),
                },
            ],
            vec![
                EdgeData {
                    parent: 0,
                    child: 1,
                    atoms: vec![ConstraintAtom::PointEq(pu(2), pv(2))],
                },
                EdgeData {
                    parent: 0,
                    child: 2,
                    atoms: vec![
                        ConstraintAtom::XLess(pu(2), pw(1)),
                        ConstraintAtom::XLess(pw(1), pu(3)),
                        ConstraintAtom::YLess(pw(1), pu(3)),
                    ],
                },
            ],
            0,
        )
        .unwrap()
    }

    /// A random tree with total size at most `max_total`, vertex sizes at
    /// most `max_vertex`, partially constrained edges, and (optionally)
    /// equalities. Infeasible trees are legitimate outputs.
    pub fn random_tree(
        rng: &mut impl Rng,
        max_total: usize,
        max_vertex: usize,
        allow_equalities: bool,
    ) -> PatternTree {
        let mut sizes = Vec::new();
        let mut total = 0usize;
        loop {
            let remaining = max_total - total;
            if remaining == 0 || (!sizes.is_empty() && rng.gen_bool(0.3)) {
                break;
            }
            let s = rng.gen_range(1..=max_vertex.min(remaining));
            sizes.push(s);
            total += s;
        }
        let r = sizes.len();
        let vertices: Vec<Vertex> = sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let all = Permutation::all(s);
                let label = all[rng.gen_range(0..all.len())].clone();
                Vertex {
                    name: format!("v{i}"),
                    label: VertexLabel::Pattern(label),
                }
            })
            .collect();
        let mut edges = Vec::new();
        for child in 1..r {
            let parent = rng.gen_range(0..child);
            let (su, sv) = (sizes[parent], sizes[child]);
            let mut atoms = Vec::new();
            // sample a consistent interleaving of the two vertices' chains
            // per axis, then keep a random subset of the implied relations
            let x_u: Vec<u8> = (1..=su as u8).collect();
            let x_v: Vec<u8> = (1..=sv as u8).collect();
            let y_u = by_value_order(vertices[parent].label.pattern());
            let y_v = by_value_order(vertices[child].label.pattern());
            for (axis, ord_u, ord_v) in [(0, &x_u, &x_v), (1, &y_u, &y_v)] {
                for (i, j, u_first) in random_cross_relations(rng, ord_u, ord_v) {
                    if rng.gen_bool(0.5) {
                        continue;
                    }
                    let pu = PointRef { vertex: parent, index: i };
                    let pv = PointRef { vertex: child, index: j };
                    let (a, b) = if u_first { (pu, pv) } else { (pv, pu) };
                    atoms.push(if axis == 0 {
                        ConstraintAtom::XLess(a, b)
                    } else {
                        ConstraintAtom::YLess(a, b)
                    });
                }
            }
            if allow_equalities && rng.gen_bool(0.3) {
                atoms.push(ConstraintAtom::PointEq(
                    PointRef {
                        vertex: parent,
                        index: rng.gen_range(1..=su as u8),
                    },
                    PointRef {
                        vertex: child,
                        index: rng.gen_range(1..=sv as u8),
                    },
                ));
            }
            edges.push(EdgeData {
                parent,
                child,
                atoms,
            });
        }
        PatternTree::new(vertices, edges, 0).unwrap()
    }

    fn by_value_order(pat: &Permutation) -> Vec<u8> {
        let mut idx: Vec<u8> = (1..=pat.n() as u8).collect();
        idx.sort_unstable_by_key(|&i| pat.at(i as usize));
        idx
    }

    /// Merges the two ordered chains uniformly at random and reports every
    /// cross pair `(u index, v index, u comes first)`.
    fn random_cross_relations(
        rng: &mut impl Rng,
        ord_u: &[u8],
        ord_v: &[u8],
    ) -> Vec<(u8, u8, bool)> {
        let mut word: Vec<bool> = vec![true; ord_u.len()];
        word.extend(std::iter::repeat(false).take(ord_v.len()));
        for i in (1..word.len()).rev() {
            let j = rng.gen_range(0..=i);
            word.swap(i, j);
        }
        let mut u_pos = Vec::new();
        let mut v_pos = Vec::new();
        for (pos, &is_u) in word.iter().enumerate() {
            if is_u {
                u_pos.push(pos);
            } else {
                v_pos.push(pos);
            }
        }
        let mut out = Vec::new();
        for (ui, &up) in u_pos.iter().enumerate() {
            for (vj, &vp) in v_pos.iter().enumerate() {
                out.push((ord_u[ui], ord_v[vj], up < vp));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use crate::perm::count_pattern_brute;

    fn p(s: &str) -> Permutation {
        parse_permutation(s).unwrap()
    }

    #[test]
    fn corner_path_vector() {
        // root -SE-> child -NE-> grandchild
        let t = PatternTree::corner(&[0, 1], &[CornerDir::SE, CornerDir::NE]).unwrap();
        let v = t.vector().unwrap();
        assert_eq!(v.get(&p("213")), BigInt::from(1));
        assert_eq!(v.get(&p("312")), BigInt::from(1));
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn two_vertex_both_axes_is_12() {
        let t = PatternTree::corner(&[0], &[CornerDir::NE]).unwrap();
        let v = t.vector().unwrap();
        assert_eq!(v.get(&p("12")), BigInt::from(1));
        assert_eq!(v.len(), 1);
    }

    #[test]
    fn single_vertex_constraints() {
        let t = PatternTree::single(p("132"));
        let c = t.constraints();
        // x chain 1<2<3
        assert!(c.x.has_less(0, 1) && c.x.has_less(1, 2));
        // y order: y1 < y3 < y2
        assert!(c.y.has_less(0, 2) && c.y.has_less(2, 1));
        assert_eq!(c.num_classes, 3);
    }

    #[test]
    fn infeasible_equality_with_order() {
        // p_u = p_v together with x_u < x_v
        let u = PointRef { vertex: 0, index: 1 };
        let v = PointRef { vertex: 1, index: 1 };
        let t = PatternTree::new(
            vec![
                Vertex {
                    name: "u".into(),
                    label: VertexLabel::Pattern(p("1")),
                },
                Vertex {
                    name: "v".into(),
                    label: VertexLabel::Pattern(p("1")),
                },
            ],
            vec![EdgeData {
                parent: 0,
                child: 1,
                atoms: vec![
                    ConstraintAtom::PointEq(u, v),
                    ConstraintAtom::XLess(u, v),
                ],
            }],
            0,
        )
        .unwrap();
        assert!(t.vector().unwrap().is_empty());
        for pi in Permutation::all(4) {
            assert_eq!(t.occurrences_brute(&pi).unwrap(), 0);
        }
    }

    use super::corpus::example_tree;

    #[test]
    fn example_tree_vector_coefficients() {
        let v = example_tree().vector().unwrap();
        assert_eq!(v.get(&p("1423")), BigInt::from(1));
        assert_eq!(v.get(&p("2413")), BigInt::from(1));
        assert_eq!(v.get(&p("12534")), BigInt::from(2));
        assert_eq!(v.get(&p("24513")), BigInt::from(1));
    }

    #[test]
    fn example_tree_vector_matches_brute() {
        let t = example_tree();
        let v = t.vector().unwrap();
        for pi in [p("2471635"), p("1234567"), p("7654321"), p("2413"), p("164253")] {
            let direct = t.occurrences_brute(&pi).unwrap();
            let via_vector: BigInt = v
                .iter()
                .map(|(rho, c)| c * count_pattern_brute(rho, &pi))
                .sum();
            assert_eq!(BigInt::from(direct), via_vector, "pi={pi}");
        }
    }

    #[test]
    fn single_vertex_occurrences() {
        let t = PatternTree::single(p("1"));
        for n in 1..=5 {
            assert_eq!(
                t.occurrences_brute(&Permutation::identity(n)).unwrap(),
                n as u128
            );
        }
    }

    #[test]
    fn text_roundtrip() {
        let t = example_tree();
        let text = t.to_string();
        let parsed = PatternTree::parse(&text).unwrap();
        assert_eq!(parsed, t);
        assert_eq!(parsed.to_string(), text);
    }

    #[test]
    fn corner_sugar_parses() {
        let text = "vertex a 1\nvertex b 1\nroot a\nedge a b corner SE\n";
        let t = PatternTree::parse(text).unwrap();
        let direct = PatternTree::corner(&[0], &[CornerDir::SE]).unwrap();
        assert_eq!(t.vector().unwrap(), direct.vector().unwrap());
    }

    #[test]
    fn gadget_label_roundtrip() {
        let text = "vertex g gadget 3214 marked 4\nroot g\n";
        let t = PatternTree::parse(text).unwrap();
        assert!(t.has_gadget());
        assert_eq!(PatternTree::parse(&t.to_string()).unwrap(), t);
        // vector treats the gadget as an ordinary 3214 vertex
        assert_eq!(t.vector().unwrap().get(&p("3214")), BigInt::from(1));
    }

    #[test]
    fn random_corpus_vectors_match_brute() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let perms: Vec<Permutation> = Permutation::all(5);
        for trial in 0..60 {
            let t = corpus::random_tree(&mut rng, 5, 3, true);
            let v = t.vector().unwrap();
            for pi in perms.iter().step_by(7) {
                let direct = t.occurrences_brute(pi).unwrap();
                let via: BigInt = v
                    .iter()
                    .map(|(rho, c)| c * count_pattern_brute(rho, pi))
                    .sum();
                assert_eq!(BigInt::from(direct), via, "trial {trial} tree:\n{t}");
            }
        }
    }

    #[test]
    fn malformed_trees_rejected() {
        assert!(PatternTree::parse("").is_err());
        assert!(PatternTree::parse("vertex a 1\nvertex b 1\nroot a\n").is_err()); // missing edge
        assert!(PatternTree::parse("vertex a 1\nroot a\nedge a a\n").is_err()); // self edge
        let bad_ref = "vertex a 1\nvertex b 1\nroot a\nedge a b x a.2 < x b.1\n";
        assert!(PatternTree::parse(bad_ref).is_err()); // index out of range
    }
}
