//! Shape laws of the root component and of its local limits.
//!
//! Finite `n`: the law of the ball of radius `h` around vertex 0 in the
//! massive spanning forest of `K_n`. Limits: `T₀` (critical Poisson
//! Galton–Watson trees along an infinite spine) when `λ_n = o(n)`, `T_α`
//! (subcritical trees along a geometric spine) when `λ_n ~ αn`, and the
//! lone root when `λ_n ≫ n`.
//!
//! Spine convention for `T_α`: `P(L = m) = α/(1+α)^m` for `m ≥ 1`, the spine
//! occupies depths `0..L`, so the spine reaches depth `h` with probability
//! `(1+α)^{−h}`. Trees hanging off spine vertices are Poisson(`1/(1+α)`)
//! Galton–Watson trees; the spine edge is not one of their offspring.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{powi, to_f64, Rational};
use crate::sampler::RngSeed;
use crate::shape::{component_code, orbit_representatives, RootedShape};

/// Growth regime of `λ_n` relative to `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", content = "alpha", rename_all = "lowercase")]
pub enum LimitRegime {
    /// `λ_n = o(n)`.
    Sublinear,
    /// `λ_n ~ αn`, `α > 0`.
    Linear(f64),
    /// `λ_n ≫ n`.
    Superlinear,
}

impl LimitRegime {
    pub fn linear(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(LimitRegime::Linear(alpha))
    }

    /// Default schedule used in convergence tables: `√n`, `αn`, `n²`.
    pub fn lambda_for(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            LimitRegime::Sublinear => n.sqrt(),
            LimitRegime::Linear(alpha) => alpha * n,
            LimitRegime::Superlinear => n * n,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )))
    }
}

fn check_height(t: &RootedShape, h: usize) -> Result<()> {
    if t.height() > h {
        return Err(Error::HeightViolation {
            height: t.height(),
            h,
        });
    }
    Ok(())
}

/// Parameters of `T_α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpineTreeParams {
    alpha: f64,
}

impl SpineTreeParams {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(SpineTreeParams { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Offspring mean `1/(1+α)`.
    pub fn beta(&self) -> f64 {
        1.0 / (1.0 + self.alpha)
    }

    /// `P(L = m) = α/(1+α)^m`, `m ≥ 1`.
    pub fn spine_pmf(&self, m: usize) -> f64 {
        if m == 0 {
            0.0
        } else {
            self.alpha / (1.0 + self.alpha).powi(m as i32)
        }
    }

    /// `P(L > d)`: the spine reaches depth `d`.
    pub fn spine_reaches(&self, d: usize) -> f64 {
        (1.0 + self.alpha).powi(-(d as i32))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "beta must lie in (0, 1], got {beta}"
        )))
    }
}

/// `P(BGWP(β)_{≤h} = t) = β^{|t|−1} e^{−β|t_{<h}|} / |Aut(t)|`.
pub fn bgwp_pmf_truncated(beta: f64, t: &RootedShape, h: usize) -> Result<f64> {
    check_beta(beta)?;
    check_height(t, h)?;
    let (_, interior) = t.boundary_interior(h);
    Ok(beta.powi(t.size() as i32 - 1) * (-beta * interior as f64).exp() / t.aut_f64())
}

/// The same probability from the first-generation recursion: a Poisson(β)
/// number of children, grouped into isomorphism classes of sizes `n_i`, each
/// child subtree an independent copy truncated at `h − 1`.
pub fn bgwp_pmf_recursive(beta: f64, t: &RootedShape, h: usize) -> Result<f64> {
    check_beta(beta)?;
    check_height(t, h)?;
    Ok(bgwp_recursion(beta, t, h))
}

fn bgwp_recursion(beta: f64, t: &RootedShape, h: usize) -> f64 {
    if h == 0 {
        return 1.0;
    }
    let k = t.children().len();
    let mut p = beta.powi(k as i32) * (-beta).exp();
    for (child, mult) in t.child_classes() {
        let q = bgwp_recursion(beta, child, h - 1);
        p *= q.powi(mult as i32) / (1..=mult).map(|i| i as f64).product::<f64>();
    }
    p
}

fn poisson(mean: f64) -> Poisson<f64> {
    Poisson::new(mean).expect("positive finite mean")
}

/// Grows Galton–Watson offspring below `roots` (all at depth `depth0`) down to depth `h`.
fn grow_bgwp<R: Rng + ?Sized>(
    adj: &mut Vec<Vec<usize>>,
    roots: &[(usize, usize)],
    offspring: &Poisson<f64>,
    h: usize,
    rng: &mut R,
) {
    let mut frontier: Vec<(usize, usize)> = roots.to_vec();
    while let Some((v, d)) = frontier.pop() {
        if d >= h {
            continue;
        }
        let k = offspring.sample(rng) as usize;
        for _ in 0..k {
            let w = adj.len();
            adj.push(vec![v]);
            adj[v].push(w);
            frontier.push((w, d + 1));
        }
    }
}

/// Code of a Poisson(β) Galton–Watson tree cut at height `h`.
pub fn sample_bgwp_code<R: Rng + ?Sized>(beta: f64, h: usize, rng: &mut R) -> Result<String> {
    check_beta(beta)?;
    let mut adj = vec![Vec::new()];
    grow_bgwp(&mut adj, &[(0, 0)], &poisson(beta), h, rng);
    Ok(component_code(&adj, 0, h))
}

pub fn sample_bgwp_truncated(beta: f64, h: usize, seed: RngSeed) -> Result<RootedShape> {
    sample_bgwp_code(beta, h, &mut seed.rng())?.parse()
}

/// Spine of `spine_len` vertices (cut at depth `h`) with Poisson(β) trees attached.
fn spine_tree_code<R: Rng + ?Sized>(spine_len: usize, beta: f64, h: usize, rng: &mut R) -> String {
    let visible = spine_len.min(h + 1);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); visible];
    for d in 1..visible {
        adj[d].push(d - 1);
        adj[d - 1].push(d);
    }
    let spine: Vec<(usize, usize)> = (0..visible).map(|d| (d, d)).collect();
    grow_bgwp(&mut adj, &spine, &poisson(beta), h, rng);
    component_code(&adj, 0, h)
}

/// Code of `T_α` cut at height `h`.
pub fn sample_t_alpha_code<R: Rng + ?Sized>(alpha: f64, h: usize, rng: &mut R) -> Result<String> {
    let params = SpineTreeParams::new(alpha)?;
    let spine_len = sample_spine_length(&params, rng);
    Ok(spine_tree_code(spine_len, params.beta(), h, rng))
}

fn sample_spine_length<R: Rng + ?Sized>(params: &SpineTreeParams, rng: &mut R) -> usize {
    let p = params.alpha / (1.0 + params.alpha);
    let failures = Geometric::new(p).expect("probability in (0,1)").sample(rng);
    usize::try_from(failures).unwrap_or(usize::MAX - 1) + 1
}

pub fn sample_t_alpha_truncated(alpha: f64, h: usize, seed: RngSeed) -> Result<RootedShape> {
    sample_t_alpha_code(alpha, h, &mut seed.rng())?.parse()
}

/// Code of `T₀` cut at height `h`: the spine always reaches depth `h`.
pub fn sample_t0_code<R: Rng + ?Sized>(h: usize, rng: &mut R) -> String {
    spine_tree_code(h + 1, 1.0, h, rng)
}

pub fn sample_t0_truncated(h: usize, seed: RngSeed) -> RootedShape {
    sample_t0_code(h, &mut seed.rng())
        .parse()
        .expect("sampler emits valid codes")
}

struct ShapeCounts {
    size: i64,
    boundary: i64,
    interior: i64,
}

fn finite_preconditions(t: &RootedShape, h: usize, n: usize) -> Result<ShapeCounts> {
    check_height(t, h)?;
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if t.size() > n {
        return Err(Error::ShapeTooLarge { size: t.size(), n });
    }
    let (boundary, interior) = t.boundary_interior(h);
    Ok(ShapeCounts {
        size: t.size() as i64,
        boundary: boundary as i64,
        interior: interior as i64,
    })
}

fn check_finite_lambda(lambda: f64, interior: i64, n: usize) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    if interior as f64 >= n as f64 + lambda {
        return Err(Error::InvalidParameter(format!(
            "|t_<h| = {interior} must be below n + lambda = {}",
            n as f64 + lambda
        )));
    }
    Ok(())
}

/// Probability that the ball of radius `h` around vertex 0, with the vertices
/// labeled, equals one fixed labeled copy of `t`:
/// `(n|t_h| + λ|t|)/(n+λ)^{|t|} · (1 − |t_{<h}|/(n+λ))^{n−|t|−1}`.
pub fn labeled_tree_prob(t: &RootedShape, h: usize, n: usize, lambda: f64) -> Result<f64> {
    let c = finite_preconditions(t, h, n)?;
    check_finite_lambda(lambda, c.interior, n)?;
    let base = n as f64 + lambda;
    let front = n as f64 * c.boundary as f64 + lambda * c.size as f64;
    if front == 0.0 {
        return Ok(0.0);
    }
    let log = front.ln() - c.size as f64 * base.ln()
        + (n as f64 - c.size as f64 - 1.0) * (-(c.interior as f64) / base).ln_1p();
    Ok(log.exp())
}

fn exact_lambda_checks(lambda: &Rational, interior: i64, n: usize) -> Result<Rational> {
    if lambda < &Rational::zero() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    let base = Rational::from_integer(BigInt::from(n)) + lambda;
    if Rational::from_integer(BigInt::from(interior)) >= base {
        return Err(Error::InvalidParameter(format!(
            "|t_<h| = {interior} must be below n + lambda = {base}"
        )));
    }
    Ok(base)
}

/// Exact-rational [`labeled_tree_prob`].
pub fn labeled_tree_prob_exact(
    t: &RootedShape,
    h: usize,
    n: usize,
    lambda: &Rational,
) -> Result<Rational> {
    let c = finite_preconditions(t, h, n)?;
    let base = exact_lambda_checks(lambda, c.interior, n)?;
    let front = Rational::from_integer(BigInt::from(n as i64 * c.boundary))
        + lambda * Rational::from_integer(BigInt::from(c.size));
    let ratio = Rational::from_integer(BigInt::from(1))
        - Rational::from_integer(BigInt::from(c.interior)) / &base;
    Ok(front / powi(&base, c.size) * powi(&ratio, n as i64 - c.size - 1))
}

/// [`labeled_tree_prob_exact`] by the inclusion–exclusion sum over the
/// absent boundary edges, before it is summed in closed form.
pub fn labeled_tree_prob_alternating(
    t: &RootedShape,
    h: usize,
    n: usize,
    lambda: &Rational,
) -> Result<Rational> {
    let c = finite_preconditions(t, h, n)?;
    let base = exact_lambda_checks(lambda, c.interior, n)?;
    let outside = n as i64 - c.size;
    let mut total = Rational::zero();
    let mut binom = BigInt::from(1);
    for k in 0..=outside {
        if k > 0 {
            binom = binom * (outside - k + 1) / k;
        }
        let term =
            Rational::from_integer(&binom * num_traits::pow(BigInt::from(c.interior), k as usize))
                * Rational::from_integer(BigInt::from(c.size + k))
                / powi(&base, c.size - 1 + k);
        if k % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total)
}

/// Number of labelings of `t` inside `K_n` with root 0, up to automorphism:
/// `(n−1)!/((n−|t|)! |Aut(t)|)`.
fn labeling_count_exact(t: &RootedShape, n: usize) -> Rational {
    let falling: BigInt = ((n - t.size() + 1)..n).map(BigInt::from).product();
    Rational::new(falling, BigInt::from(t.aut_count().clone()))
}

/// `P(Shape(T_{n,λ}, 0)_{≤h} = t)` on `K_n`, in floating point (log-space).
pub fn shape_law_finite(t: &RootedShape, h: usize, n: usize, lambda: f64) -> Result<f64> {
    let labeled = labeled_tree_prob(t, h, n, lambda)?;
    if labeled == 0.0 {
        return Ok(0.0);
    }
    let log_labelings: f64 = (1..t.size()).map(|i| ((n - i) as f64).ln()).sum::<f64>()
        - t.aut_count().to_f64().map_or(f64::INFINITY, f64::ln);
    Ok((labeled.ln() + log_labelings).exp())
}

/// Exact-rational [`shape_law_finite`].
pub fn shape_law_finite_exact(
    t: &RootedShape,
    h: usize,
    n: usize,
    lambda: &Rational,
) -> Result<Rational> {
    Ok(labeled_tree_prob_exact(t, h, n, lambda)? * labeling_count_exact(t, n))
}

/// Limit of [`shape_law_finite`] as `n → ∞` in the given regime.
pub fn shape_law_limit(t: &RootedShape, h: usize, regime: LimitRegime) -> Result<f64> {
    check_height(t, h)?;
    let (boundary, interior) = t.boundary_interior(h);
    match regime {
        LimitRegime::Sublinear => Ok(boundary as f64 / t.aut_f64() * (-(interior as f64)).exp()),
        LimitRegime::Linear(alpha) => shape_law_t_alpha(t, h, alpha),
        LimitRegime::Superlinear => Ok(if t.is_singleton() { 1.0 } else { 0.0 }),
    }
}

/// `P(Shape(T_α)_{≤h} = t) = (|t_h| + α|t|)/|Aut(t)| · (1+α)^{−|t|} · e^{−|t_{<h}|/(1+α)}`.
pub fn shape_law_t_alpha(t: &RootedShape, h: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_height(t, h)?;
    let (boundary, interior) = t.boundary_interior(h);
    let size = t.size() as f64;
    let log = (boundary as f64 + alpha * size).ln()
        - t.aut_f64().ln()
        - size * alpha.ln_1p()
        - interior as f64 / (1.0 + alpha);
    Ok(log.exp())
}

/// `T_α` law from the spine decomposition: sum over `Aut(t)`-orbits of the
/// deepest spine vertex `v`, weighting by the spine-length probability and the
/// Galton–Watson probabilities of the subtrees hanging off the spine.
pub fn shape_law_t_alpha_spine(t: &RootedShape, h: usize, alpha: f64) -> Result<f64> {
    let params = SpineTreeParams::new(alpha)?;
    check_height(t, h)?;
    let beta = params.beta();
    let mut total = 0.0;
    for rep in orbit_representatives(t, h) {
        let d = rep.depth();
        let spine = if d == h {
            params.spine_reaches(h)
        } else {
            params.spine_pmf(d + 1)
        };
        let mut p = spine;
        for (i, piece) in rep.pieces.iter().enumerate() {
            p *= bgwp_pmf_truncated(beta, piece, h - i)?;
        }
        total += p;
    }
    Ok(total)
}

/// Monte Carlo estimate of `E[1/|T_α|]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseProgenyEstimate {
    pub alpha: f64,
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    /// Samples that hit the node cap; they enter the mean at the cap size.
    pub overflow: u64,
    /// Set when more than 0.01% of samples overflowed.
    pub flagged: bool,
}

/// Node cap for full `T_α` samples.
pub const PROGENY_CAP: u64 = 10_000_000;

/// Total number of vertices of one full `T_α` sample, capped at `cap`.
pub fn sample_t_alpha_size<R: Rng + ?Sized>(
    params: &SpineTreeParams,
    cap: u64,
    rng: &mut R,
) -> u64 {
    let offspring = poisson(params.beta());
    let mut pending = sample_spine_length(params, rng) as u64;
    let mut total = 0u64;
    while pending > 0 {
        if total >= cap {
            return cap;
        }
        pending -= 1;
        total += 1;
        pending += offspring.sample(rng) as u64;
    }
    total
}

pub fn inverse_progeny_mean(alpha: f64, samples: u64, seed: u64) -> Result<InverseProgenyEstimate> {
    let params = SpineTreeParams::new(alpha)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let (sum, sum_sq, overflow) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let size = sample_t_alpha_size(&params, PROGENY_CAP, &mut RngSeed::new(seed, i).rng());
            let x = 1.0 / size as f64;
            (x, x * x, u64::from(size >= PROGENY_CAP))
        })
        .reduce(|| (0.0, 0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let m = samples as f64;
    let mean = sum / m;
    let var = if samples > 1 {
        (sum_sq - m * mean * mean).max(0.0) / (m - 1.0)
    } else {
        0.0
    };
    Ok(InverseProgenyEstimate {
        alpha,
        mean,
        std_error: (var / m).sqrt(),
        samples,
        overflow,
        flagged: overflow as f64 > 1e-4 * m,
    })
}

/// Float view of an exact law value, for reporting.
pub fn exact_to_f64(r: &Rational) -> f64 {
    to_f64(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::shape::{all_shapes_up_to, shapes_with_height_at_most};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn shape(code: &str) -> RootedShape {
        code.parse().unwrap()
    }

    #[test]
    fn bgwp_examples() {
        let single = RootedShape::singleton();
        assert_eq!(bgwp_pmf_truncated(0.5, &single, 0).unwrap(), 1.0);
        assert!(close(
            bgwp_pmf_truncated(0.5, &single, 1).unwrap(),
            (-0.5f64).exp(),
            1e-15
        ));
        let cherry = RootedShape::star(2);
        assert!(close(
            bgwp_pmf_truncated(0.5, &cherry, 1).unwrap(),
            0.5 * 0.25 * (-0.5f64).exp(),
            1e-15
        ));
        assert!(bgwp_pmf_truncated(1.0, &cherry, 1).is_ok());
        assert!(matches!(
            bgwp_pmf_truncated(0.5, &RootedShape::path(3), 1),
            Err(Error::HeightViolation { .. })
        ));
        assert!(bgwp_pmf_truncated(1.5, &single, 1).is_err());
    }

    #[test]
    fn bgwp_recursion_agrees_with_closed_form() {
        for t in all_shapes_up_to(6) {
            for h in t.height()..t.height() + 2 {
                for beta in [0.3, 0.5, 1.0] {
                    let a = bgwp_pmf_truncated(beta, &t, h).unwrap();
                    let b = bgwp_pmf_recursive(beta, &t, h).unwrap();
                    assert!(close(a, b, 1e-12), "{t} h={h}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn finite_law_k4() {
        let expected = [
            ("()", (16, 125)),
            ("(())", (72, 125)),
            ("(()())", (33, 125)),
            ("(()()())", (4, 125)),
        ];
        let mut total = Rational::zero();
        for (code, (p, q)) in expected {
            let v = shape_law_finite_exact(&shape(code), 1, 4, &int(1)).unwrap();
            assert_eq!(v, ratio(p, q), "{code}");
            assert!(close(
                shape_law_finite(&shape(code), 1, 4, 1.0).unwrap(),
                p as f64 / q as f64,
                1e-14
            ));
            total += v;
        }
        assert_eq!(total, int(1));
    }

    #[test]
    fn finite_law_at_height_zero_is_one() {
        for n in 1..8 {
            for lam in [int(0), ratio(1, 3), int(7)] {
                assert_eq!(
                    shape_law_finite_exact(&RootedShape::singleton(), 0, n, &lam).unwrap(),
                    int(1)
                );
            }
        }
    }

    #[test]
    fn finite_law_preconditions() {
        assert!(matches!(
            shape_law_finite(&RootedShape::star(4), 1, 4, 1.0),
            Err(Error::ShapeTooLarge { .. })
        ));
        assert!(matches!(
            shape_law_finite(&RootedShape::path(3), 1, 5, 1.0),
            Err(Error::HeightViolation { .. })
        ));
        assert!(shape_law_finite(&RootedShape::star(1), 1, 3, -1.0).is_err());
    }

    #[test]
    fn labeled_probability_relations() {
        let edge = RootedShape::path(2);
        assert_eq!(
            labeled_tree_prob_exact(&edge, 1, 4, &int(1)).unwrap(),
            ratio(24, 125)
        );
        for t in shapes_with_height_at_most(2, 5) {
            for n in t.size()..=8 {
                for lam in [ratio(1, 2), int(2)] {
                    let closed = labeled_tree_prob_exact(&t, 2, n, &lam).unwrap();
                    let alt = labeled_tree_prob_alternating(&t, 2, n, &lam).unwrap();
                    assert_eq!(closed, alt, "{t} n={n} λ={lam}");
                    let shape_p = shape_law_finite_exact(&t, 2, n, &lam).unwrap();
                    let labelings = labeling_count_exact(&t, n);
                    assert_eq!(shape_p, closed * labelings);
                }
            }
        }
    }

    #[test]
    fn finite_law_normalizes() {
        for n in 1..=6 {
            for h in 0..=2 {
                for lam in [ratio(1, 2), int(1), int(3)] {
                    let total: Rational = shapes_with_height_at_most(h, n)
                        .iter()
                        .map(|t| shape_law_finite_exact(t, h, n, &lam).unwrap())
                        .sum();
                    assert_eq!(total, int(1), "n={n} h={h} λ={lam}");
                }
            }
        }
    }

    #[test]
    fn float_and_exact_finite_laws_agree() {
        for t in shapes_with_height_at_most(2, 5) {
            let exact = shape_law_finite_exact(&t, 2, 9, &ratio(5, 2)).unwrap();
            let float = shape_law_finite(&t, 2, 9, 2.5).unwrap();
            assert!(close(to_f64(&exact), float, 1e-13), "{t}");
        }
    }

    #[test]
    fn limit_examples() {
        let single = RootedShape::singleton();
        let e = (-0.5f64).exp();
        assert!(close(
            shape_law_t_alpha(&single, 1, 1.0).unwrap(),
            0.5 * e,
            1e-15
        ));
        assert!(close(
            shape_law_t_alpha(&RootedShape::path(2), 1, 1.0).unwrap(),
            0.75 * e,
            1e-15
        ));
        assert!(close(
            shape_law_limit(&single, 1, LimitRegime::Linear(1.0)).unwrap(),
            0.5 * e,
            1e-15
        ));
        assert_eq!(
            shape_law_limit(&single, 1, LimitRegime::Sublinear).unwrap(),
            0.0
        );
        assert_eq!(
            shape_law_limit(&single, 1, LimitRegime::Superlinear).unwrap(),
            1.0
        );
        assert_eq!(
            shape_law_limit(&RootedShape::star(2), 1, LimitRegime::Superlinear).unwrap(),
            0.0
        );
        let finite = shape_law_finite(&single, 1, 10_000, 10_000.0).unwrap();
        assert!(close(finite, 0.5 * e, 1e-4));
        assert!(shape_law_t_alpha(&single, 1, 0.0).is_err());
    }

    #[test]
    fn spine_decomposition_matches_closed_form() {
        for t in all_shapes_up_to(6) {
            for h in t.height()..=t.height() + 1 {
                for alpha in [0.25, 1.0, 4.0] {
                    let a = shape_law_t_alpha(&t, h, alpha).unwrap();
                    let b = shape_law_t_alpha_spine(&t, h, alpha).unwrap();
                    assert!(close(a, b, 1e-12), "{t} h={h} α={alpha}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn t_alpha_law_nearly_sums_to_one() {
        for h in 0..=2 {
            let total: f64 = shapes_with_height_at_most(h, 14)
                .iter()
                .map(|t| shape_law_t_alpha(t, h, 1.0).unwrap())
                .sum();
            assert!(total <= 1.0 + 1e-12 && total > 0.999, "h={h}: {total}");
        }
    }

    #[test]
    fn samplers_respect_height_and_spine() {
        let mut rng = RngSeed::new(4, 0).rng();
        for _ in 0..200 {
            assert_eq!(sample_bgwp_code(0.7, 0, &mut rng).unwrap(), "()");
            let t: RootedShape = sample_t0_code(3, &mut rng).parse().unwrap();
            assert_eq!(t.height(), 3);
            let s: RootedShape = sample_t_alpha_code(1.0, 2, &mut rng)
                .unwrap()
                .parse()
                .unwrap();
            assert!(s.height() <= 2);
        }
        assert_eq!(
            sample_t0_truncated(0, RngSeed::new(1, 1)),
            RootedShape::singleton()
        );
        let huge: u64 = (0..10_000)
            .map(|i| {
                u64::from(
                    sample_t_alpha_truncated(1e3, 1, RngSeed::new(9, i))
                        .unwrap()
                        .is_singleton(),
                )
            })
            .sum();
        assert!(huge >= 9_980, "{huge}");
    }

    #[test]
    fn spine_params() {
        let p = SpineTreeParams::new(1.0).unwrap();
        assert_eq!(p.beta(), 0.5);
        let total: f64 = (1..200).map(|m| p.spine_pmf(m)).sum();
        assert!(close(total, 1.0, 1e-12));
        assert!(close(
            p.spine_reaches(3),
            1.0 - (1..=3).map(|m| p.spine_pmf(m)).sum::<f64>(),
            1e-15
        ));
        assert!(SpineTreeParams::new(-1.0).is_err());
    }

    #[test]
    fn progeny_estimate_shape() {
        let est = inverse_progeny_mean(1e4, 1000, 1).unwrap();
        assert!(est.mean > 0.99);
        assert_eq!(est.overflow, 0);
        assert!(!est.flagged);
        assert!(inverse_progeny_mean(1.0, 0, 1).is_err());
    }
}
