//! Exhaustive, exact-rational ground truth on small graphs.
//!
//! Every spanning forest is enumerated and weighted by
//! `λ^{#components} · ∏ |component|`. With `λ = p/q` the weights are kept as
//! integers scaled by `q^n`, so event probabilities are ratios of big-integer
//! sums.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::determinantal::EdgeEvent;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rational::Rational;
use crate::shape::component_code;
use crate::stats::ExactShapeLaw;

/// Largest edge count the enumerator accepts.
pub const ENUMERATION_BUDGET: usize = 25;

/// An acyclic set of edges covering all vertices (isolated vertices are
/// single-vertex components).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Forest {
    edges: Vec<usize>,
    /// Component label per vertex; labels are `0..component_count` in order of
    /// first appearance.
    component_of: Vec<usize>,
    component_sizes: Vec<usize>,
}

impl Forest {
    /// Builds a forest from edge indices of `g`, rejecting cycles.
    pub fn new(g: &Graph, mut edges: Vec<usize>) -> Result<Self> {
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0]));
        }
        let mut uf = UnionFind::new(g.vertex_count());
        for &i in &edges {
            let (a, b) = g.edge(i)?;
            if !uf.union(a, b) {
                return Err(Error::InvalidParameter(format!(
                    "edge set contains a cycle through edge {i}"
                )));
            }
        }
        Ok(Forest::from_union_find(edges, &mut uf))
    }

    fn from_union_find(edges: Vec<usize>, uf: &mut UnionFind) -> Self {
        let n = uf.parent.len();
        let mut label_of_root = vec![usize::MAX; n];
        let mut component_of = vec![0; n];
        let mut component_sizes = Vec::new();
        for (v, slot) in component_of.iter_mut().enumerate() {
            let r = uf.find(v);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = component_sizes.len();
                component_sizes.push(0);
            }
            *slot = label_of_root[r];
            component_sizes[label_of_root[r]] += 1;
        }
        Forest {
            edges,
            component_of,
            component_sizes,
        }
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn component_count(&self) -> usize {
        self.component_sizes.len()
    }

    pub fn component_sizes(&self) -> &[usize] {
        &self.component_sizes
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.component_of[v]
    }

    /// Vertices of the component containing `v`.
    pub fn component_vertices(&self, v: usize) -> Vec<usize> {
        let c = self.component_of[v];
        (0..self.component_of.len())
            .filter(|&u| self.component_of[u] == c)
            .collect()
    }

    /// Number of rooted versions of this forest, `∏ |t|`.
    pub fn rootings(&self) -> u64 {
        self.component_sizes.iter().map(|&s| s as u64).product()
    }

    /// Histogram key, e.g. `{0,3,5}`.
    pub fn key(&self) -> String {
        forest_key(&self.edges)
    }

    /// Undirected adjacency lists of the forest.
    pub fn adjacency(&self, g: &Graph) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); g.vertex_count()];
        for &i in &self.edges {
            let (a, b) = g.edges()[i];
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    fn mask(&self) -> u32 {
        self.edges.iter().fold(0, |m, &i| m | 1 << i)
    }
}

/// Histogram key of a sorted edge-index set.
pub fn forest_key(sorted_edges: &[usize]) -> String {
    let inner: Vec<String> = sorted_edges.iter().map(usize::to_string).collect();
    format!("{{{}}}", inner.join(","))
}

/// Union–find with union by size and an undo log, no path compression.
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    log: Vec<(usize, usize)>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
            log: Vec::new(),
        }
    }

    fn find(&self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    /// Joins the classes of `a` and `b`; false if they were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.log.push((ra, rb));
        true
    }

    fn undo(&mut self) {
        let (ra, rb) = self.log.pop().expect("undo without union");
        self.parent[rb] = rb;
        self.size[ra] -= self.size[rb];
    }
}

fn check_budget(g: &Graph) -> Result<()> {
    if g.edge_count() > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            edges: g.edge_count(),
            limit: ENUMERATION_BUDGET,
        });
    }
    Ok(())
}

/// All spanning forests of `g`, each exactly once.
pub fn enumerate_forests(g: &Graph) -> Result<Vec<Forest>> {
    check_budget(g)?;
    let mut out = Vec::new();
    let mut uf = UnionFind::new(g.vertex_count());
    let mut chosen = Vec::new();
    enumerate_rec(g, 0, &mut uf, &mut chosen, &mut out);
    Ok(out)
}

fn enumerate_rec(
    g: &Graph,
    next: usize,
    uf: &mut UnionFind,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Forest>,
) {
    if next == g.edge_count() {
        let mut snapshot = UnionFind {
            parent: uf.parent.clone(),
            size: uf.size.clone(),
            log: Vec::new(),
        };
        out.push(Forest::from_union_find(chosen.clone(), &mut snapshot));
        return;
    }
    let (a, b) = g.edges()[next];
    if uf.union(a, b) {
        chosen.push(next);
        enumerate_rec(g, next + 1, uf, chosen, out);
        chosen.pop();
        uf.undo();
    }
    enumerate_rec(g, next + 1, uf, chosen, out);
}

/// Number of rooted spanning forests with `k` trees, for `k = 0..=n`.
pub fn rooted_forest_counts(g: &Graph) -> Result<Vec<BigInt>> {
    let mut counts = vec![BigInt::zero(); g.vertex_count() + 1];
    for f in enumerate_forests(g)? {
        counts[f.component_count()] += f.rootings();
    }
    Ok(counts)
}

/// The exact law of the massive spanning forest on a small graph.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    graph: Graph,
    lambda: Rational,
    forests: Vec<Forest>,
    masks: Vec<u32>,
    /// Weights multiplied by `q^n` where `λ = p/q`; integers.
    scaled: Vec<BigInt>,
    scaled_total: BigInt,
    scale: BigInt,
}

pub fn exact_distribution(g: &Graph, lambda: &Rational) -> Result<ExactDistribution> {
    if !lambda.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let forests = enumerate_forests(g)?;
    let n = g.vertex_count();
    let p = lambda.numer();
    let q = lambda.denom();
    let p_pows: Vec<BigInt> = (0..=n).map(|k| num_traits::pow(p.clone(), k)).collect();
    let q_pows: Vec<BigInt> = (0..=n).map(|k| num_traits::pow(q.clone(), k)).collect();
    let scaled: Vec<BigInt> = forests
        .iter()
        .map(|f| {
            let k = f.component_count();
            &p_pows[k] * &q_pows[n - k] * f.rootings()
        })
        .collect();
    let scaled_total = scaled.iter().sum();
    let masks = forests.iter().map(Forest::mask).collect();
    Ok(ExactDistribution {
        graph: g.clone(),
        lambda: lambda.clone(),
        forests,
        masks,
        scaled,
        scaled_total,
        scale: q_pows[n].clone(),
    })
}

impl ExactDistribution {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn forests(&self) -> &[Forest] {
        &self.forests
    }

    pub fn len(&self) -> usize {
        self.forests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forests.is_empty()
    }

    /// Unnormalized weight `λ^{|C(f)|} ∏|t|` of forest `i`.
    pub fn weight(&self, i: usize) -> Rational {
        Rational::new(self.scaled[i].clone(), self.scale.clone())
    }

    /// Partition function `Z = Σ_f weight(f)`.
    pub fn partition_function(&self) -> Rational {
        Rational::new(self.scaled_total.clone(), self.scale.clone())
    }

    pub fn probability(&self, i: usize) -> Rational {
        Rational::new(self.scaled[i].clone(), self.scaled_total.clone())
    }

    /// Iterates `(forest, probability)`.
    pub fn iter(&self) -> impl Iterator<Item = (&Forest, Rational)> + '_ {
        (0..self.len()).map(move |i| (&self.forests[i], self.probability(i)))
    }

    /// Probability as a map from forest key to float, for histogram comparisons.
    pub fn law_by_key(&self) -> BTreeMap<String, f64> {
        self.iter()
            .map(|(f, p)| (f.key(), crate::rational::to_f64(&p)))
            .collect()
    }

    /// Exact mean number of components.
    pub fn mean_component_count(&self) -> Rational {
        let num: BigInt = self
            .forests
            .iter()
            .zip(&self.scaled)
            .map(|(f, w)| w * f.component_count())
            .sum();
        Rational::new(num, self.scaled_total.clone())
    }

    /// Index of a forest by its sorted edge set.
    pub fn index_of(&self, sorted_edges: &[usize]) -> Option<usize> {
        let mask = sorted_edges.iter().fold(0u32, |m, &i| m | 1 << i);
        self.masks.iter().position(|&m| m == mask)
    }
}

/// Exact probability that all `include` edges are present and all `exclude` edges absent.
pub fn exact_event_prob(d: &ExactDistribution, ev: &EdgeEvent) -> Result<Rational> {
    ev.validate(d.graph.edge_count())?;
    let inc = ev.include.iter().fold(0u32, |m, &i| m | 1 << i);
    let exc = ev.exclude.iter().fold(0u32, |m, &i| m | 1 << i);
    let hit: BigInt = d
        .masks
        .iter()
        .zip(&d.scaled)
        .filter(|(&m, _)| m & inc == inc && m & exc == 0)
        .map(|(_, w)| w)
        .sum();
    Ok(Rational::new(hit, d.scaled_total.clone()))
}

/// Exact law of the shape of vertex 0's component, cut at height `h`.
pub fn exact_root_component_shape_law(
    g: &Graph,
    lambda: &Rational,
    h: usize,
) -> Result<ExactShapeLaw> {
    let d = exact_distribution(g, lambda)?;
    Ok(root_component_shape_law_of(&d, h))
}

/// Same as [`exact_root_component_shape_law`] for an already computed distribution.
pub fn root_component_shape_law_of(d: &ExactDistribution, h: usize) -> ExactShapeLaw {
    let mut acc: BTreeMap<String, BigInt> = BTreeMap::new();
    for (f, w) in d.forests.iter().zip(&d.scaled) {
        let code = component_code(&f.adjacency(&d.graph), 0, h);
        *acc.entry(code).or_insert_with(BigInt::zero) += w;
    }
    acc.into_iter()
        .map(|(code, w)| (code, Rational::new(w, d.scaled_total.clone())))
        .collect()
}
