//! Finite multigraphs without self-loops, with a fixed edge orientation.
//!
//! Vertex `0` is the distinguished root vertex throughout the crate.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An oriented edge `(tail, head)`.
pub type Edge = (usize, usize);

/// Dense integer matrix in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        IntMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    fn add_to(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.add_to(i, j, a * other.get(k, j));
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl std::ops::Add for &IntMatrix {
    type Output = IntMatrix;

    fn add(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// Graph Laplacian: degree on the diagonal minus edge multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaplacianMatrix(pub IntMatrix);

impl LaplacianMatrix {
    pub fn matrix(&self) -> &IntMatrix {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.rows
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.0.get(i, j)
    }
}

/// Oriented incidence matrix: one row per selected edge, `-1` at the tail and
/// `+1` at the head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix(pub IntMatrix);

impl IncidenceMatrix {
    pub fn matrix(&self) -> &IntMatrix {
        &self.0
    }

    /// `Bᵀ B` in this row layout, i.e. `Σ b_i b_iᵀ` over the selected edges.
    pub fn gram(&self) -> IntMatrix {
        self.0.transpose().mul(&self.0)
    }
}

/// Finite multigraph without self-loops on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        for (index, &(tail, head)) in edges.iter().enumerate() {
            for v in [tail, head] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            if tail == head {
                return Err(Error::SelfLoop {
                    index,
                    vertex: tail,
                });
            }
        }
        Ok(Graph { n, edges })
    }

    /// The complete graph `K_n`, edges `(i, j)` with `i < j` in lexicographic order.
    pub fn complete(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let edges = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Ok(Graph { n, edges })
    }

    /// The cycle `0 - 1 - ... - (n-1) - 0`. Needs `n >= 3`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "cycle needs n >= 3, got {n}"
            )));
        }
        let mut edges: Vec<Edge> = (0..n - 1).map(|i| (i, i + 1)).collect();
        edges.push((0, n - 1));
        Graph::new(n, edges)
    }

    /// The path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        Graph::new(n, (1..n).map(|i| (i - 1, i)).collect())
    }

    /// A random multigraph with `n` vertices and `m` edges, each edge an
    /// independent uniform pair of distinct vertices with random orientation.
    pub fn random_multigraph<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self> {
        if n < 2 && m > 0 {
            return Err(Error::InvalidParameter(
                "edges need at least two vertices".into(),
            ));
        }
        let edges = (0..m)
            .map(|_| {
                let a = rng.random_range(0..n);
                let mut b = rng.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                (a, b)
            })
            .collect();
        Graph::new(n, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> Result<Edge> {
        self.edges.get(index).copied().ok_or(Error::EdgeOutOfRange {
            index,
            count: self.edges.len(),
        })
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    /// Incident `(edge index, other endpoint)` pairs per vertex, in edge order.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            adj[a].push((i, b));
            adj[b].push((i, a));
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(_, w) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    pub fn laplacian(&self) -> LaplacianMatrix {
        let mut m = IntMatrix::zeros(self.n, self.n);
        for &(a, b) in &self.edges {
            m.add_to(a, a, 1);
            m.add_to(b, b, 1);
            m.add_to(a, b, -1);
            m.add_to(b, a, -1);
        }
        LaplacianMatrix(m)
    }

    fn check_indices(&self, indices: &[usize], distinct: bool) -> Result<()> {
        let mut seen = vec![false; self.edges.len()];
        for &i in indices {
            if i >= self.edges.len() {
                return Err(Error::EdgeOutOfRange {
                    index: i,
                    count: self.edges.len(),
                });
            }
            if distinct && std::mem::replace(&mut seen[i], true) {
                return Err(Error::DuplicateEdge(i));
            }
        }
        Ok(())
    }

    /// Removes the listed edges; the survivors keep their relative order.
    pub fn delete_edges(&self, indices: &[usize]) -> Result<Graph> {
        self.check_indices(indices, true)?;
        let mut drop = vec![false; self.edges.len()];
        for &i in indices {
            drop[i] = true;
        }
        let edges = self
            .edges
            .iter()
            .zip(&drop)
            .filter(|(_, &d)| !d)
            .map(|(&e, _)| e)
            .collect();
        Ok(Graph { n: self.n, edges })
    }

    pub fn oriented_incidence(&self, indices: &[usize]) -> Result<IncidenceMatrix> {
        self.check_indices(indices, false)?;
        let mut m = IntMatrix::zeros(indices.len(), self.n);
        for (row, &i) in indices.iter().enumerate() {
            let (tail, head) = self.edges[i];
            m.add_to(row, tail, -1);
            m.add_to(row, head, 1);
        }
        Ok(IncidenceMatrix(m))
    }

    /// Same graph with the orientation of edge `index` reversed.
    pub fn flip_edge(&self, index: usize) -> Result<Graph> {
        let (a, b) = self.edge(index)?;
        let mut edges = self.edges.clone();
        edges[index] = (b, a);
        Ok(Graph { n: self.n, edges })
    }

    /// Serializes to the edge-list text format (`n`, then `tail head` lines).
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for &(a, b) in &self.edges {
            s.push_str(&format!("{a} {b}\n"));
        }
        s
    }
}

impl FromStr for Graph {
    type Err = Error;

    /// Parses the edge-list format. Blank lines and `#` comments are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .enumerate()
            .filter(|(_, l)| !l.is_empty());
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::Parse("missing vertex count".into()))?;
        let n: usize = first
            .parse()
            .map_err(|_| Error::Parse(format!("bad vertex count {first:?}")))?;
        let mut edges = Vec::new();
        for (lineno, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parse = |p: &str| {
                p.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {}: bad vertex {p:?}", lineno + 1)))
            };
            match parts.as_slice() {
                [a, b] => edges.push((parse(a)?, parse(b)?)),
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: expected `tail head`, got {line:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Graph::new(n, edges)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_edge_list())
    }
}

/// Index of edge `(a, b)` in [`Graph::complete`]`(n)`, for `a != b` in any order.
pub fn complete_edge_index(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}
