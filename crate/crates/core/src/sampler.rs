//! Exact sampling of massive spanning forests by Wilson's algorithm with killing.
//!
//! Each loop-erased walk step first dies with the killing probability, which
//! roots the current branch at the current vertex; otherwise it moves to a
//! uniform neighbour. On `K_n` the killing probability is `λ/(λ+n−1)` and a
//! step is uniform on the other `n−1` vertices, so no adjacency is stored.
//! On a general graph a vertex `v` kills with probability `λ/(λ+d(v))`.
//!
//! Vertices are processed in id order from 0. With `λ = 0` no walk dies, so
//! vertex 0 is made the root first and the output is a uniform spanning tree.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{complete_edge_index, Graph};
use crate::oracle::{forest_key, Forest};
use crate::shape::component_code;

/// Seed plus stream id. Sample `i` of a batch uses stream `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSeed { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// A rooted spanning forest as parent pointers; roots have no parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedForestSample {
    parents: Vec<Option<usize>>,
    /// Edge index used to reach the parent, aligned with `parents`.
    parent_edges: Vec<Option<usize>>,
}

/// JSON-lines record: `{"parents":[...], "roots":[...]}` with `null` parents at roots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub parents: Vec<Option<usize>>,
    pub roots: Vec<usize>,
}

impl RootedForestSample {
    pub fn parents(&self) -> &[Option<usize>] {
        &self.parents
    }

    pub fn parent_edges(&self) -> &[Option<usize>] {
        &self.parent_edges
    }

    pub fn vertex_count(&self) -> usize {
        self.parents.len()
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.parents.len())
            .filter(|&v| self.parents[v].is_none())
            .collect()
    }

    pub fn component_count(&self) -> usize {
        self.parents.iter().filter(|p| p.is_none()).count()
    }

    /// Sorted edge indices of the underlying forest.
    pub fn edge_indices(&self) -> Vec<usize> {
        let mut e: Vec<usize> = self.parent_edges.iter().flatten().copied().collect();
        e.sort_unstable();
        e
    }

    pub fn forest_key(&self) -> String {
        forest_key(&self.edge_indices())
    }

    /// Root of the tree containing `v`.
    pub fn root_of(&self, mut v: usize) -> usize {
        while let Some(p) = self.parents[v] {
            v = p;
        }
        v
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.parents.len()];
        for (v, p) in self.parents.iter().enumerate() {
            if let Some(p) = *p {
                adj[v].push(p);
                adj[p].push(v);
            }
        }
        adj
    }

    /// Canonical code of vertex 0's component, rooted at vertex 0 and cut at height `h`.
    pub fn root_component_code(&self, h: usize) -> String {
        component_code(&self.adjacency(), 0, h)
    }

    pub fn record(&self) -> SampleRecord {
        SampleRecord {
            parents: self.parents.clone(),
            roots: self.roots(),
        }
    }
}

/// Drops the root marks. `g` must be the graph the sample was drawn on.
pub fn forget_roots(s: &RootedForestSample, g: &Graph) -> Result<Forest> {
    if g.vertex_count() != s.vertex_count() {
        return Err(Error::InvalidParameter(format!(
            "sample has {} vertices, graph has {}",
            s.vertex_count(),
            g.vertex_count()
        )));
    }
    Forest::new(g, s.edge_indices())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative and finite, got {lambda}"
        )))
    }
}

/// Killing probability per step on `K_n`, `λ/(λ+n−1)`.
pub fn kn_killing_rate(n: usize, lambda: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else {
        lambda / (lambda + n as f64 - 1.0)
    }
}

const NONE: usize = usize::MAX;

/// Reusable buffers for repeated sampling on `K_n`.
#[derive(Debug, Clone)]
pub struct KnSampler {
    n: usize,
    lambda: f64,
    kill: f64,
    in_tree: Vec<bool>,
    next: Vec<usize>,
}

impl KnSampler {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        check_lambda(lambda)?;
        Ok(KnSampler {
            n,
            lambda,
            kill: kn_killing_rate(n, lambda),
            in_tree: vec![false; n],
            next: vec![NONE; n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Fills `next` with parent pointers (`NONE` at roots).
    fn run<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.n;
        self.in_tree.fill(false);
        self.next.fill(NONE);
        if self.kill == 0.0 {
            self.in_tree[0] = true;
        }
        for start in 0..n {
            let mut u = start;
            while !self.in_tree[u] {
                if n == 1 || rng.random::<f64>() < self.kill {
                    self.next[u] = NONE;
                    break;
                }
                let mut v = rng.random_range(0..n - 1);
                if v >= u {
                    v += 1;
                }
                self.next[u] = v;
                u = v;
            }
            let mut u = start;
            while !self.in_tree[u] {
                self.in_tree[u] = true;
                if self.next[u] == NONE {
                    break;
                }
                u = self.next[u];
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> RootedForestSample {
        self.run(rng);
        let n = self.n;
        let parents: Vec<Option<usize>> = self
            .next
            .iter()
            .map(|&p| (p != NONE).then_some(p))
            .collect();
        let parent_edges = parents
            .iter()
            .enumerate()
            .map(|(v, p)| p.map(|p| complete_edge_index(n, v, p)))
            .collect();
        RootedForestSample {
            parents,
            parent_edges,
        }
    }

    /// Number of trees only, without materializing the sample.
    pub fn sample_component_count<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        self.run(rng);
        self.next.iter().filter(|&&p| p == NONE).count()
    }
}

/// One sample on `K_n`.
pub fn sample_lsf_kn(n: usize, lambda: f64, seed: RngSeed) -> Result<RootedForestSample> {
    Ok(KnSampler::new(n, lambda)?.sample(&mut seed.rng()))
}

/// Reusable state for sampling on an arbitrary graph.
#[derive(Debug, Clone)]
pub struct GraphSampler {
    adjacency: Vec<Vec<(usize, usize)>>,
    kill: Vec<f64>,
    lambda: f64,
    in_tree: Vec<bool>,
    next: Vec<usize>,
    next_edge: Vec<usize>,
}

impl GraphSampler {
    pub fn new(g: &Graph, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if lambda == 0.0 && !g.is_connected() {
            return Err(Error::InvalidParameter(
                "lambda = 0 needs a connected graph".into(),
            ));
        }
        let adjacency = g.adjacency();
        let kill = adjacency
            .iter()
            .map(|a| {
                if lambda == 0.0 {
                    0.0
                } else {
                    lambda / (lambda + a.len() as f64)
                }
            })
            .collect();
        let n = g.vertex_count();
        Ok(GraphSampler {
            adjacency,
            kill,
            lambda,
            in_tree: vec![false; n],
            next: vec![NONE; n],
            next_edge: vec![NONE; n],
        })
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> RootedForestSample {
        let n = self.adjacency.len();
        self.in_tree.fill(false);
        self.next.fill(NONE);
        self.next_edge.fill(NONE);
        if self.lambda == 0.0 {
            self.in_tree[0] = true;
        }
        for start in 0..n {
            let mut u = start;
            while !self.in_tree[u] {
                if rng.random::<f64>() < self.kill[u] {
                    self.next[u] = NONE;
                    self.next_edge[u] = NONE;
                    break;
                }
                let adj = &self.adjacency[u];
                let (edge, v) = adj[rng.random_range(0..adj.len())];
                self.next[u] = v;
                self.next_edge[u] = edge;
                u = v;
            }
            let mut u = start;
            while !self.in_tree[u] {
                self.in_tree[u] = true;
                if self.next[u] == NONE {
                    break;
                }
                u = self.next[u];
            }
        }
        RootedForestSample {
            parents: self
                .next
                .iter()
                .map(|&p| (p != NONE).then_some(p))
                .collect(),
            parent_edges: self
                .next_edge
                .iter()
                .map(|&e| (e != NONE).then_some(e))
                .collect(),
        }
    }
}

/// One sample on a general graph.
pub fn sample_lsf_general(g: &Graph, lambda: f64, seed: RngSeed) -> Result<RootedForestSample> {
    Ok(GraphSampler::new(g, lambda)?.sample(&mut seed.rng()))
}

/// Either sampler behind one interface.
#[derive(Debug, Clone)]
pub enum ForestSampler {
    Complete(KnSampler),
    General(GraphSampler),
}

impl ForestSampler {
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> RootedForestSample {
        match self {
            ForestSampler::Complete(s) => s.sample(rng),
            ForestSampler::General(s) => s.sample(rng),
        }
    }
}

/// Runs `count` independent samples, sample `i` on stream `i` of `seed`,
/// mapping each through `f` and folding with `merge`. The result does not
/// depend on the number of worker threads as long as `merge` is associative
/// and commutative.
pub fn batch_fold<T, Init, F, M>(
    proto: &ForestSampler,
    count: u64,
    seed: u64,
    init: Init,
    f: F,
    merge: M,
) -> T
where
    T: Send,
    Init: Fn() -> T + Sync + Send,
    F: Fn(&mut T, RootedForestSample) + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    (0..count)
        .into_par_iter()
        .fold(
            || (init(), proto.clone()),
            |(mut acc, mut sampler), i| {
                let s = sampler.sample(&mut RngSeed::new(seed, i).rng());
                f(&mut acc, s);
                (acc, sampler)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(&init, &merge)
}

/// Collects `count` samples in stream order.
pub fn sample_batch(proto: &ForestSampler, count: u64, seed: u64) -> Vec<RootedForestSample> {
    (0..count)
        .into_par_iter()
        .map_init(
            || proto.clone(),
            |sampler, i| sampler.sample(&mut RngSeed::new(seed, i).rng()),
        )
        .collect()
}
