//! Rooted unlabeled non-planar trees.
//!
//! A [`RootedShape`] is stored with its children sorted by canonical code, so
//! structural equality is isomorphism. The code is the AHU bracket string:
//! `()` for a single vertex, otherwise `(` followed by the sorted child codes
//! and `)`. Codes are also the serialization format and the keys of every
//! shape histogram and law table.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RootedShape {
    code: String,
    children: Vec<RootedShape>,
    size: usize,
    height: usize,
    /// Number of vertices at each depth, `levels[0] == 1`.
    levels: Vec<usize>,
    aut: BigUint,
}

impl RootedShape {
    pub fn singleton() -> Self {
        RootedShape::from_children(Vec::new())
    }

    /// A root whose child subtrees are `children`, in any order.
    pub fn from_children(mut children: Vec<RootedShape>) -> Self {
        children.sort_by(|a, b| a.code.cmp(&b.code));
        let mut code =
            String::with_capacity(2 + children.iter().map(|c| c.code.len()).sum::<usize>());
        code.push('(');
        let mut levels = vec![1];
        let mut size = 1;
        for c in &children {
            code.push_str(&c.code);
            size += c.size;
            if levels.len() < c.levels.len() + 1 {
                levels.resize(c.levels.len() + 1, 0);
            }
            for (d, &k) in c.levels.iter().enumerate() {
                levels[d + 1] += k;
            }
        }
        code.push(')');

        let mut aut = BigUint::one();
        for group in children.chunk_by(|a, b| a.code == b.code) {
            aut *= factorial_u(group.len()) * num_traits::pow(group[0].aut.clone(), group.len());
        }
        RootedShape {
            code,
            height: levels.len() - 1,
            children,
            size,
            levels,
            aut,
        }
    }

    /// A star: root with `k` leaf children.
    pub fn star(k: usize) -> Self {
        RootedShape::from_children(vec![RootedShape::singleton(); k])
    }

    /// A path with `len` vertices rooted at one end.
    pub fn path(len: usize) -> Self {
        assert!(len >= 1);
        (1..len).fold(RootedShape::singleton(), |acc, _| {
            RootedShape::from_children(vec![acc])
        })
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn children(&self) -> &[RootedShape] {
        &self.children
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_singleton(&self) -> bool {
        self.size == 1
    }

    /// Vertices at distance exactly `d` from the root.
    pub fn level_count(&self, d: usize) -> usize {
        self.levels.get(d).copied().unwrap_or(0)
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// `(|t_h|, |t_{<h}|)`: vertices at distance `h`, and at distance below `h`.
    pub fn boundary_interior(&self, h: usize) -> (usize, usize) {
        let interior = self.levels.iter().take(h).sum();
        (self.level_count(h), interior)
    }

    /// Order of the root-preserving automorphism group.
    pub fn aut_count(&self) -> &BigUint {
        &self.aut
    }

    pub fn aut_f64(&self) -> f64 {
        self.aut.to_f64().unwrap_or(f64::INFINITY)
    }

    /// The ball of radius `h` around the root.
    pub fn truncate(&self, h: usize) -> RootedShape {
        if h >= self.height {
            return self.clone();
        }
        if h == 0 {
            return RootedShape::singleton();
        }
        RootedShape::from_children(self.children.iter().map(|c| c.truncate(h - 1)).collect())
    }

    /// Child subtrees grouped into isomorphism classes: `(representative, multiplicity)`.
    pub fn child_classes(&self) -> Vec<(&RootedShape, usize)> {
        self.children
            .chunk_by(|a, b| a.code == b.code)
            .map(|g| (&g[0], g.len()))
            .collect()
    }

    /// Removes one child isomorphic to `self.children()[index]`.
    pub fn without_child(&self, index: usize) -> RootedShape {
        let mut rest = self.children.clone();
        rest.remove(index);
        RootedShape::from_children(rest)
    }

    /// A labeled copy: vertex 0 is the root, labels in breadth-first order.
    pub fn to_labeled(&self) -> LabeledRootedTree {
        let mut parents = vec![None];
        let mut queue = VecDeque::from([(self, 0usize)]);
        while let Some((node, id)) = queue.pop_front() {
            for c in &node.children {
                parents.push(Some(id));
                queue.push_back((c, parents.len() - 1));
            }
        }
        LabeledRootedTree { parents }
    }
}

fn factorial_u(k: usize) -> BigUint {
    (1..=k as u64).fold(BigUint::one(), |acc, i| acc * i)
}

impl fmt::Debug for RootedShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RootedShape({})", self.code)
    }
}

impl fmt::Display for RootedShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code)
    }
}

impl PartialOrd for RootedShape {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RootedShape {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.code.cmp(&other.code)
    }
}

impl FromStr for RootedShape {
    type Err = Error;

    /// Parses a bracket code. Children may appear in any order; the result is canonical.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidShapeCode {
            code: s.to_string(),
            reason: reason.to_string(),
        };
        let mut stack: Vec<Vec<RootedShape>> = Vec::new();
        let mut done: Option<RootedShape> = None;
        for ch in s.trim().chars() {
            if done.is_some() {
                return Err(bad("trailing characters after the root"));
            }
            match ch {
                '(' => stack.push(Vec::new()),
                ')' => {
                    let kids = stack.pop().ok_or_else(|| bad("unbalanced ')'"))?;
                    let node = RootedShape::from_children(kids);
                    match stack.last_mut() {
                        Some(parent) => parent.push(node),
                        None => done = Some(node),
                    }
                }
                c if c.is_whitespace() => {}
                _ => return Err(bad("only '(' and ')' are allowed")),
            }
        }
        done.ok_or_else(|| bad("unbalanced or empty code"))
    }
}

impl Serialize for RootedShape {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.code)
    }
}

impl<'de> Deserialize<'de> for RootedShape {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A rooted tree on vertices `0..k` given by parent pointers; the root has `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledRootedTree {
    parents: Vec<Option<usize>>,
}

impl LabeledRootedTree {
    pub fn new(parents: Vec<Option<usize>>) -> Result<Self> {
        let t = LabeledRootedTree { parents };
        t.validate()?;
        Ok(t)
    }

    /// Builds from undirected edges on `0..k`, rooted at `root`.
    pub fn from_edges(k: usize, edges: &[(usize, usize)], root: usize) -> Result<Self> {
        if root >= k {
            return Err(Error::InvalidTree(format!("root {root} out of range")));
        }
        if edges.len() + 1 != k {
            return Err(Error::InvalidTree(format!(
                "{} edges cannot span {k} vertices as a tree",
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); k];
        for &(a, b) in edges {
            if a >= k || b >= k || a == b {
                return Err(Error::InvalidTree(format!("bad edge ({a}, {b})")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut parents = vec![None; k];
        let mut seen = vec![false; k];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parents[w] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidTree(
                "edges do not connect all vertices".into(),
            ));
        }
        Ok(LabeledRootedTree { parents })
    }

    fn validate(&self) -> Result<()> {
        let k = self.parents.len();
        if k == 0 {
            return Err(Error::InvalidTree("no vertices".into()));
        }
        let roots = self.parents.iter().filter(|p| p.is_none()).count();
        if roots != 1 {
            return Err(Error::InvalidTree(format!(
                "expected one root, found {roots}"
            )));
        }
        for (v, p) in self.parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= k {
                    return Err(Error::InvalidTree(format!(
                        "parent {p} of {v} out of range"
                    )));
                }
            }
        }
        // Every vertex must reach the root within k steps.
        for start in 0..k {
            let mut v = start;
            let mut steps = 0;
            while let Some(p) = self.parents[v] {
                v = p;
                steps += 1;
                if steps > k {
                    return Err(Error::InvalidTree(format!("cycle through vertex {start}")));
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.parents.len()
    }

    pub fn root(&self) -> usize {
        self.parents
            .iter()
            .position(Option::is_none)
            .expect("validated")
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parents
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| (p, v)))
            .collect()
    }

    /// Renames vertex `v` to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let k = self.size();
        let mut check = vec![false; k];
        if perm.len() != k
            || perm
                .iter()
                .any(|&p| p >= k || std::mem::replace(&mut check[p], true))
        {
            return Err(Error::InvalidParameter("not a permutation".into()));
        }
        let mut parents = vec![None; k];
        for (v, p) in self.parents.iter().enumerate() {
            parents[perm[v]] = p.map(|p| perm[p]);
        }
        Ok(LabeledRootedTree { parents })
    }

    pub fn children_lists(&self) -> Vec<Vec<usize>> {
        let mut kids = vec![Vec::new(); self.size()];
        for (v, p) in self.parents.iter().enumerate() {
            if let Some(p) = *p {
                kids[p].push(v);
            }
        }
        kids
    }
}

/// Canonical shape of a labeled rooted tree.
pub fn shape_of(t: &LabeledRootedTree) -> RootedShape {
    let kids = t.children_lists();
    let order = bfs_order(&kids, t.root());
    let mut built: Vec<Option<RootedShape>> = vec![None; t.size()];
    for &v in order.iter().rev() {
        let children = kids[v]
            .iter()
            .map(|&c| built[c].take().expect("children built first"))
            .collect();
        built[v] = Some(RootedShape::from_children(children));
    }
    built[t.root()].take().expect("root built")
}

fn bfs_order(kids: &[Vec<usize>], root: usize) -> Vec<usize> {
    let mut order = vec![root];
    let mut i = 0;
    while i < order.len() {
        order.extend_from_slice(&kids[order[i]]);
        i += 1;
    }
    order
}

/// Canonical code of the ball of radius `h` around `root` in a forest given as
/// undirected adjacency lists. Only builds the code string.
pub fn component_code(adj: &[Vec<usize>], root: usize, h: usize) -> String {
    // BFS to depth h, recording parent order.
    let mut order = vec![root];
    let mut parent = vec![usize::MAX];
    let mut depth = vec![0usize];
    let mut index_of = BTreeMap::new();
    index_of.insert(root, 0usize);
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        if depth[i] < h {
            for &w in &adj[v] {
                if index_of.contains_key(&w) {
                    continue;
                }
                index_of.insert(w, order.len());
                order.push(w);
                parent.push(i);
                depth.push(depth[i] + 1);
            }
        }
        i += 1;
    }
    let mut child_codes: Vec<Vec<String>> = vec![Vec::new(); order.len()];
    let mut code = String::new();
    for idx in (0..order.len()).rev() {
        let mut kids = std::mem::take(&mut child_codes[idx]);
        kids.sort_unstable();
        let mut c = String::with_capacity(2 + kids.iter().map(String::len).sum::<usize>());
        c.push('(');
        for k in &kids {
            c.push_str(k);
        }
        c.push(')');
        if idx == 0 {
            code = c;
        } else {
            child_codes[parent[idx]].push(c);
        }
    }
    code
}

/// Number of root-fixing permutations of the vertices that map the edge set
/// onto itself, by exhaustive search. Limited to 9 vertices.
pub fn brute_force_aut(t: &LabeledRootedTree) -> Result<u64> {
    let k = t.size();
    if k > 9 {
        return Err(Error::InvalidParameter(format!(
            "brute-force automorphism count limited to 9 vertices, got {k}"
        )));
    }
    let root = t.root();
    let mut adjacent = vec![vec![false; k]; k];
    for (a, b) in t.edges() {
        adjacent[a][b] = true;
        adjacent[b][a] = true;
    }
    let edges = t.edges();
    let others: Vec<usize> = (0..k).filter(|&v| v != root).collect();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut count = 0u64;
    for_each_permutation(&mut others.clone(), &mut |images| {
        for (&v, &img) in others.iter().zip(images) {
            perm[v] = img;
        }
        perm[root] = root;
        if edges.iter().all(|&(a, b)| adjacent[perm[a]][perm[b]]) {
            count += 1;
        }
    });
    Ok(count)
}

/// Calls `f` on every permutation of `items` (Heap's algorithm).
fn for_each_permutation(items: &mut [usize], f: &mut impl FnMut(&[usize])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    f(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            f(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// One representative vertex of an `Aut(t)`-orbit, described by its
/// root-to-vertex path.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRep {
    /// Child indices (into the sorted child lists) from the root down to the vertex.
    pub path: Vec<usize>,
    /// Subtree hanging at each path vertex once the path continuation is removed;
    /// the last entry is the full subtree of the representative vertex.
    pub pieces: Vec<RootedShape>,
    /// `∏ 1/|Aut(piece)|` over the pieces.
    pub weight: BigRational,
}

impl OrbitRep {
    pub fn depth(&self) -> usize {
        self.path.len()
    }

    /// Orbit size, `|Aut(t)| · weight` (orbit–stabilizer).
    pub fn orbit_size(&self, t: &RootedShape) -> BigRational {
        BigRational::from_integer(BigInt::from(t.aut_count().clone())) * &self.weight
    }
}

/// One representative per `Aut(t)`-orbit of the vertices at depth `≤ h`.
///
/// Two vertices share an orbit exactly when their paths pass through
/// isomorphic child subtrees at every step, so one representative per child
/// class is taken at each level.
pub fn orbit_representatives(s: &RootedShape, h: usize) -> Vec<OrbitRep> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut pieces = Vec::new();
    collect_orbits(s, h, &mut path, &mut pieces, &mut out);
    out
}

fn collect_orbits(
    node: &RootedShape,
    remaining: usize,
    path: &mut Vec<usize>,
    pieces: &mut Vec<RootedShape>,
    out: &mut Vec<OrbitRep>,
) {
    pieces.push(node.clone());
    out.push(OrbitRep {
        path: path.clone(),
        pieces: pieces.clone(),
        weight: pieces
            .iter()
            .map(|p| BigRational::new(BigInt::one(), BigInt::from(p.aut_count().clone())))
            .product(),
    });
    pieces.pop();
    if remaining == 0 {
        return;
    }
    let mut start = 0;
    for group in node.children.chunk_by(|a, b| a.code == b.code) {
        pieces.push(node.without_child(start));
        path.push(start);
        collect_orbits(&group[0], remaining - 1, path, pieces, out);
        path.pop();
        pieces.pop();
        start += group.len();
    }
}

/// Every shape with at most `max_size` vertices, by repeated leaf additions
/// with de-duplication on the canonical code. Sorted by size, then code.
pub fn all_shapes_up_to(max_size: usize) -> Vec<RootedShape> {
    if max_size == 0 {
        return Vec::new();
    }
    let mut layers: Vec<Vec<RootedShape>> = vec![vec![RootedShape::singleton()]];
    for _ in 1..max_size {
        let next: BTreeSet<RootedShape> = layers
            .last()
            .expect("nonempty")
            .iter()
            .flat_map(add_leaf_everywhere)
            .collect();
        layers.push(next.into_iter().collect());
    }
    layers.into_iter().flatten().collect()
}

fn add_leaf_everywhere(s: &RootedShape) -> Vec<RootedShape> {
    let mut out = Vec::new();
    let mut kids = s.children.clone();
    kids.push(RootedShape::singleton());
    out.push(RootedShape::from_children(kids));
    let mut start = 0;
    for group in s.children.chunk_by(|a, b| a.code == b.code) {
        for grown in add_leaf_everywhere(&group[0]) {
            let mut kids = s.children.clone();
            kids[start] = grown;
            out.push(RootedShape::from_children(kids));
        }
        start += group.len();
    }
    out
}

/// Every shape of height `≤ h` with at most `max_size` vertices, sorted by
/// size then code.
pub fn shapes_with_height_at_most(h: usize, max_size: usize) -> Vec<RootedShape> {
    let mut out = shapes_height_rec(h, max_size);
    out.sort_by(|a, b| a.size.cmp(&b.size).then_with(|| a.code.cmp(&b.code)));
    out
}

fn shapes_height_rec(h: usize, max_size: usize) -> Vec<RootedShape> {
    if max_size == 0 {
        return Vec::new();
    }
    if h == 0 {
        return vec![RootedShape::singleton()];
    }
    let subs = shapes_height_rec(h - 1, max_size - 1);
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    multisets(&subs, 0, max_size - 1, &mut chosen, &mut out);
    out
}

/// Multisets of `items[from..]` (non-decreasing index order) with total size `≤ budget`.
fn multisets(
    items: &[RootedShape],
    from: usize,
    budget: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<RootedShape>,
) {
    out.push(RootedShape::from_children(
        chosen.iter().map(|&i| items[i].clone()).collect(),
    ));
    for i in from..items.len() {
        if items[i].size <= budget {
            chosen.push(i);
            multisets(items, i, budget - items[i].size, chosen, out);
            chosen.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shape(code: &str) -> RootedShape {
        code.parse().unwrap()
    }

    #[test]
    fn singleton_and_codes() {
        let s = RootedShape::singleton();
        assert_eq!(s.code(), "()");
        assert_eq!((s.size(), s.height()), (1, 0));
        assert_eq!(s.aut_count(), &BigUint::one());
        assert_eq!(shape("(()(()))").code(), "((())())");
        assert!("(()".parse::<RootedShape>().is_err());
        assert!("()()".parse::<RootedShape>().is_err());
        assert!("(x)".parse::<RootedShape>().is_err());
        assert!("".parse::<RootedShape>().is_err());
    }

    #[test]
    fn path_rooted_at_end_differs_from_center() {
        let end = LabeledRootedTree::from_edges(3, &[(0, 1), (1, 2)], 0).unwrap();
        let center = LabeledRootedTree::from_edges(3, &[(0, 1), (1, 2)], 1).unwrap();
        assert_ne!(shape_of(&end), shape_of(&center));
        assert_eq!(shape_of(&end), RootedShape::path(3));
        assert_eq!(shape_of(&center), RootedShape::star(2));
    }

    #[test]
    fn invalid_labeled_trees() {
        assert!(LabeledRootedTree::new(vec![None, None]).is_err());
        assert!(LabeledRootedTree::new(vec![Some(1), Some(0)]).is_err());
        assert!(LabeledRootedTree::new(vec![None, Some(2), Some(1)]).is_err());
        assert!(LabeledRootedTree::new(vec![]).is_err());
        assert!(LabeledRootedTree::from_edges(3, &[(0, 1)], 0).is_err());
        assert!(LabeledRootedTree::from_edges(4, &[(0, 1), (1, 0), (2, 3)], 0).is_err());
    }

    #[test]
    fn random_relabelings_keep_the_code() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = LabeledRootedTree::new(vec![
            None,
            Some(0),
            Some(0),
            Some(1),
            Some(1),
            Some(2),
            Some(5),
            Some(5),
            Some(0),
            Some(8),
        ])
        .unwrap();
        let base = shape_of(&t);
        for _ in 0..100 {
            let mut perm: Vec<usize> = (0..10).collect();
            perm.shuffle(&mut rng);
            assert_eq!(shape_of(&t.relabel(&perm).unwrap()), base);
        }
    }

    #[test]
    fn truncation() {
        let p3 = RootedShape::path(3);
        assert_eq!(p3.truncate(0), RootedShape::singleton());
        assert_eq!(p3.truncate(1), RootedShape::path(2));
        assert_eq!(p3.truncate(7), p3);
    }

    #[test]
    fn aut_examples() {
        assert_eq!(RootedShape::star(4).aut_count(), &BigUint::from(24u32));
        // root with children {leaf, path of 2}
        let mixed =
            RootedShape::from_children(vec![RootedShape::singleton(), RootedShape::path(2)]);
        assert_eq!(mixed.aut_count(), &BigUint::one());
        assert_eq!(brute_force_aut(&mixed.to_labeled()).unwrap(), 1);
        // two copies of a 3-vertex path rooted at its end
        let twin = RootedShape::from_children(vec![RootedShape::path(3), RootedShape::path(3)]);
        assert_eq!(twin.aut_count(), &BigUint::from(2u32));
        assert_eq!(brute_force_aut(&twin.to_labeled()).unwrap(), 2);
        assert_eq!(
            brute_force_aut(&RootedShape::singleton().to_labeled()).unwrap(),
            1
        );
        assert_eq!(
            brute_force_aut(&RootedShape::star(4).to_labeled()).unwrap(),
            24
        );
        assert!(brute_force_aut(&RootedShape::star(9).to_labeled()).is_err());
        // 25! overflows u64 but not the big integer
        assert_eq!(RootedShape::star(25).aut_count(), &factorial_u(25));
    }

    #[test]
    fn boundary_interior_examples() {
        assert_eq!(RootedShape::singleton().boundary_interior(1), (0, 1));
        assert_eq!(RootedShape::path(2).boundary_interior(1), (1, 1));
        assert_eq!(RootedShape::star(3).boundary_interior(1), (3, 1));
        assert_eq!(RootedShape::singleton().boundary_interior(0), (1, 0));
    }

    #[test]
    fn orbit_examples() {
        let star = RootedShape::star(3);
        let reps = orbit_representatives(&star, 1);
        let depth1: Vec<_> = reps.iter().filter(|r| r.depth() == 1).collect();
        assert_eq!(depth1.len(), 1);
        assert_eq!(
            depth1[0].orbit_size(&star),
            BigRational::from_integer(3.into())
        );

        let single = orbit_representatives(&RootedShape::singleton(), 1);
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].weight, BigRational::one());

        let p3 = RootedShape::path(3);
        let reps = orbit_representatives(&p3, 2);
        assert_eq!(reps.iter().filter(|r| r.depth() == 2).count(), 1);
        assert_eq!(reps.iter().filter(|r| r.depth() < 2).count(), 2);
    }

    #[test]
    fn shape_counts_match_oeis() {
        // A000081: rooted trees with n vertices.
        let all = all_shapes_up_to(8);
        let mut by_size = [0usize; 9];
        for s in &all {
            by_size[s.size()] += 1;
        }
        assert_eq!(&by_size[1..], &[1, 1, 2, 4, 9, 20, 48, 115]);
    }

    #[test]
    fn height_bounded_generation_agrees_with_filter() {
        let all = all_shapes_up_to(7);
        for h in 0..4 {
            let direct: Vec<String> = shapes_with_height_at_most(h, 7)
                .iter()
                .map(|s| s.code().to_string())
                .collect();
            let mut filtered: Vec<&RootedShape> = all.iter().filter(|s| s.height() <= h).collect();
            filtered.sort_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.code().cmp(b.code())));
            let filtered: Vec<String> = filtered.iter().map(|s| s.code().to_string()).collect();
            assert_eq!(direct, filtered, "h = {h}");
        }
    }

    #[test]
    fn component_code_matches_shape_of() {
        let t = LabeledRootedTree::new(vec![Some(2), Some(2), None, Some(0), Some(0), Some(1)])
            .unwrap();
        let mut adj = vec![Vec::new(); 6];
        for (a, b) in t.edges() {
            adj[a].push(b);
            adj[b].push(a);
        }
        let full = shape_of(&t);
        for h in 0..4 {
            assert_eq!(component_code(&adj, 2, h), full.truncate(h).code());
        }
        // a non-root start re-roots the tree
        let rerooted = LabeledRootedTree::from_edges(6, &t.edges(), 3).unwrap();
        assert_eq!(component_code(&adj, 3, 10), shape_of(&rerooted).code());
    }

    fn arb_shape() -> impl Strategy<Value = RootedShape> {
        let leaf = Just(RootedShape::singleton());
        leaf.prop_recursive(4, 24, 4, |inner| {
            prop::collection::vec(inner, 0..4).prop_map(RootedShape::from_children)
        })
    }

    proptest! {
        #[test]
        fn truncate_composes(s in arb_shape(), h1 in 0usize..5, h2 in 0usize..5) {
            prop_assert_eq!(s.truncate(h1).truncate(h2), s.truncate(h1.min(h2)));
        }

        #[test]
        fn code_roundtrip_and_size_bounds(s in arb_shape(), h in 0usize..5) {
            let parsed: RootedShape = s.code().parse().unwrap();
            prop_assert_eq!(&parsed, &s);
            prop_assert_eq!(shape_of(&s.to_labeled()), s.clone());
            let (boundary, interior) = s.boundary_interior(h);
            prop_assert!(boundary + interior <= s.size());
            if s.height() <= h {
                prop_assert_eq!(boundary + interior, s.size());
            }
        }
    }
}
