//! Determinantal formulas for massive spanning forests.
//!
//! Exact side: the characteristic polynomial `det(Δ + λI)` over big integers.
//! Floating side: the resolvent `R_λ = (Δ + λI)⁻¹`, the transfer current
//! kernel built from it, and edge-event probabilities as determinants of that
//! kernel. The `kn_*` functions are the closed forms on the complete graph
//! and never build a matrix.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, IntMatrix};
use crate::rational::{factorial, Rational};

/// Absolute tolerance for floating probabilities and matrix residuals.
pub const TOLERANCE: f64 = 1e-10;

/// Coefficients `c_0..c_n` of `det(Δ + λI)`; `c_k` counts rooted spanning
/// forests with `k` trees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharPoly {
    coeffs: Vec<BigInt>,
}

impl CharPoly {
    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| {
            acc * x + Rational::from_integer(c.clone())
        })
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        use num_traits::ToPrimitive;
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }
}

/// Fraction-free (Bareiss) determinant of a square integer matrix.
pub fn bareiss_det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

fn shifted(m: &IntMatrix, shift: i64) -> Vec<Vec<BigInt>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| BigInt::from(m.get(i, j) + if i == j { shift } else { 0 }))
                .collect()
        })
        .collect()
}

/// `det(Δ + λI)` as an exact polynomial, by interpolation through the integer
/// points `λ = 0..=n`.
pub fn char_poly(g: &Graph) -> CharPoly {
    let n = g.vertex_count();
    let lap = g.laplacian();
    let values: Vec<BigInt> = (0..=n as i64)
        .map(|k| bareiss_det(&shifted(lap.matrix(), k)))
        .collect();

    // Newton forward differences at 0: P(x) = Σ_j Δ^j P(0) · C(x, j).
    let mut diffs = values;
    let mut newton = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        newton.push(diffs[0].clone());
        diffs = diffs.windows(2).map(|w| &w[1] - &w[0]).collect();
    }

    let mut coeffs = vec![Rational::zero(); n + 1];
    // falling[i] = coefficient of x^i in x(x-1)...(x-j+1)
    let mut falling = vec![BigInt::one()];
    for (j, d) in newton.iter().enumerate() {
        if j > 0 {
            let shift = BigInt::from(j as i64 - 1);
            let mut next = vec![BigInt::zero(); falling.len() + 1];
            for (i, c) in falling.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * &shift;
            }
            falling = next;
        }
        let scale = Rational::new(d.clone(), factorial(j as u64));
        for (i, c) in falling.iter().enumerate() {
            coeffs[i] += &scale * Rational::from_integer(c.clone());
        }
    }
    let coeffs = coeffs
        .into_iter()
        .map(|c| {
            debug_assert!(
                c.is_integer(),
                "interpolated coefficient {c} is not integral"
            );
            c.to_integer()
        })
        .collect();
    CharPoly { coeffs }
}

/// `R_λ = (Δ + λI)⁻¹` for a specific graph and `λ > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventMatrix {
    lambda: f64,
    matrix: DMatrix<f64>,
}

impl ResolventMatrix {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

fn shifted_laplacian(g: &Graph, lambda: f64) -> DMatrix<f64> {
    let lap = g.laplacian();
    let n = g.vertex_count();
    DMatrix::from_fn(n, n, |i, j| {
        lap.get(i, j) as f64 + if i == j { lambda } else { 0.0 }
    })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lambda must be a positive finite number, got {lambda}"
        )))
    }
}

pub fn resolvent(g: &Graph, lambda: f64) -> Result<ResolventMatrix> {
    check_lambda(lambda)?;
    let shifted = shifted_laplacian(g, lambda);
    let inv = shifted
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("Δ + {lambda}·I is not invertible")))?;
    let n = g.vertex_count();
    let residual = (&shifted * &inv - DMatrix::<f64>::identity(n, n)).amax();
    // Scale-aware: the inverse has entries up to 1/λ.
    if residual > TOLERANCE * (1.0 + inv.amax()) {
        return Err(Error::Singular(format!(
            "resolvent residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(ResolventMatrix {
        lambda,
        matrix: inv,
    })
}

/// `K(e, f) = R(e₋,f₋) + R(e₊,f₊) − R(e₋,f₊) − R(e₊,f₋)`.
pub fn transfer_current(r: &ResolventMatrix, e: Edge, f: Edge) -> Result<f64> {
    let n = r.n();
    for v in [e.0, e.1, f.0, f.1] {
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
    }
    Ok(r.get(e.0, f.0) + r.get(e.1, f.1) - r.get(e.0, f.1) - r.get(e.1, f.0))
}

fn check_kn(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    Ok(())
}

/// Resolvent entry of `K_n` in closed form.
pub fn kn_resolvent_entry(n: usize, lambda: f64, diagonal: bool) -> Result<f64> {
    check_kn(n)?;
    check_lambda(lambda)?;
    let n = n as f64;
    let off = 1.0 / (lambda * (n + lambda));
    Ok(if diagonal { (1.0 + lambda) * off } else { off })
}

/// Transfer current of `K_n` in closed form. `λ = 0` gives the uniform
/// spanning tree kernel.
pub fn kn_transfer_current(n: usize, lambda: f64, e: Edge, f: Edge) -> Result<f64> {
    check_kn(n)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    let ind = |b: bool| if b { 1.0 } else { 0.0 };
    let s = ind(e.0 == f.0) + ind(e.1 == f.1) - ind(e.0 == f.1) - ind(e.1 == f.0);
    Ok(s / (n as f64 + lambda))
}

/// Green's function of the uniform walk on `K_n` killed with probability
/// `1 − μ` per step, `μ = (n−1)/(n−1+λ)`.
pub fn kn_killed_walk_green(n: usize, lambda: f64, same_vertex: bool) -> Result<f64> {
    check_kn(n)?;
    check_lambda(lambda)?;
    let nf = n as f64;
    let off = (nf - 1.0 + lambda) / (lambda * (nf + lambda));
    if same_vertex {
        Ok(1.0 + kn_killing_survival(n, lambda) * off)
    } else {
        Ok(off)
    }
}

/// Per-step survival probability `μ = (n−1)/(n−1+λ)` of the killed walk on `K_n`.
pub fn kn_killing_survival(n: usize, lambda: f64) -> f64 {
    let m = n as f64 - 1.0;
    m / (m + lambda)
}

/// Edges forced into (`include`) or out of (`exclude`) the forest.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeEvent {
    pub include: Vec<usize>,
    pub exclude: Vec<usize>,
}

impl EdgeEvent {
    pub fn new(include: Vec<usize>, exclude: Vec<usize>) -> Self {
        EdgeEvent { include, exclude }
    }

    pub fn validate(&self, edge_count: usize) -> Result<()> {
        let mut state = vec![0u8; edge_count];
        for (tag, list) in [(1u8, &self.include), (2u8, &self.exclude)] {
            for &i in list {
                if i >= edge_count {
                    return Err(Error::EdgeOutOfRange {
                        index: i,
                        count: edge_count,
                    });
                }
                match state[i] {
                    0 => state[i] = tag,
                    t if t == tag => return Err(Error::DuplicateEdge(i)),
                    _ => return Err(Error::ConflictingEvent(i)),
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.include.len() + self.exclude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Checks a floating probability against `[0, 1]` with [`TOLERANCE`] and clamps.
pub fn checked_probability(p: f64) -> Result<f64> {
    if !(-TOLERANCE..=1.0 + TOLERANCE).contains(&p) {
        return Err(Error::ProbabilityOutOfRange { value: p });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Probability of an include/exclude edge event, from a precomputed resolvent.
pub fn edge_event_prob_with(g: &Graph, r: &ResolventMatrix, ev: &EdgeEvent) -> Result<f64> {
    ev.validate(g.edge_count())?;
    let edges: Vec<usize> = ev.include.iter().chain(&ev.exclude).copied().collect();
    let p = edges.len();
    if p == 0 {
        return Ok(1.0);
    }
    let k = ev.include.len();
    let mut m = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        let ei = g.edge(edges[i])?;
        for j in 0..p {
            let kij = transfer_current(r, ei, g.edge(edges[j])?)?;
            m[(i, j)] = if i < k {
                kij
            } else {
                f64::from(u8::from(i == j)) - kij
            };
        }
    }
    checked_probability(m.determinant())
}

pub fn edge_event_prob(g: &Graph, lambda: f64, ev: &EdgeEvent) -> Result<f64> {
    ev.validate(g.edge_count())?;
    let r = resolvent(g, lambda)?;
    edge_event_prob_with(g, &r, ev)
}

/// Probability that a fixed labeled tree with `size` vertices is contained in
/// the forest on `K_n`: `size / (n+λ)^(size−1)`.
pub fn kn_tree_inclusion_prob(size: usize, n: usize, lambda: f64) -> Result<f64> {
    check_tree_size(size, n)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    Ok(size as f64 / (n as f64 + lambda).powi(size as i32 - 1))
}

/// Exact-rational counterpart of [`kn_tree_inclusion_prob`].
pub fn kn_tree_inclusion_prob_exact(size: usize, n: usize, lambda: &Rational) -> Result<Rational> {
    check_tree_size(size, n)?;
    if lambda.is_negative() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    let base = Rational::from_integer(BigInt::from(n)) + lambda;
    Ok(Rational::from_integer(BigInt::from(size)) / num_traits::pow(base, size - 1))
}

fn check_tree_size(size: usize, n: usize) -> Result<()> {
    if size == 0 {
        return Err(Error::InvalidParameter("tree must have a vertex".into()));
    }
    if size > n {
        return Err(Error::ShapeTooLarge { size, n });
    }
    Ok(())
}

/// Expected number of trees, `λ · tr R_λ`.
pub fn mean_component_count(g: &Graph, lambda: f64) -> Result<f64> {
    Ok(lambda * resolvent(g, lambda)?.trace())
}

/// `(λ+1)n/(λ+n)`, the mean component count on `K_n`.
pub fn kn_mean_component_count(n: usize, lambda: f64) -> f64 {
    let n = n as f64;
    (lambda + 1.0) * n / (lambda + n)
}

/// `det(I − Bᵀ R_λ B)` for the listed edges; equals the probability that all
/// of them are absent.
pub fn deletion_ratio_via_kernel(g: &Graph, lambda: f64, deleted: &[usize]) -> Result<f64> {
    let r = resolvent(g, lambda)?;
    let b = g.oriented_incidence(deleted)?;
    let n = g.vertex_count();
    let bm = DMatrix::from_fn(deleted.len(), n, |i, j| b.matrix().get(i, j) as f64);
    let k = &bm * r.matrix() * bm.transpose();
    Ok((DMatrix::<f64>::identity(deleted.len(), deleted.len()) - k).determinant())
}

/// `P_{H∖S}(λ) / P_H(λ)` computed exactly from the two characteristic polynomials.
pub fn deletion_ratio_exact(
    g: &Graph,
    lambda: &BigRational,
    deleted: &[usize],
) -> Result<Rational> {
    let sub = g.delete_edges(deleted)?;
    Ok(char_poly(&sub).eval(lambda) / char_poly(g).eval(lambda))
}
