//! Oracle-versus-formula suites. Each suite records how many checks ran, the
//! largest discrepancy seen and the first failing case.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::determinantal::{
    char_poly, deletion_ratio_exact, deletion_ratio_via_kernel, edge_event_prob_with,
    kn_mean_component_count, kn_resolvent_entry, kn_transfer_current, kn_tree_inclusion_prob_exact,
    resolvent, transfer_current, EdgeEvent, TOLERANCE,
};
use crate::error::Result;
use crate::graph::Graph;
use crate::limit::{
    bgwp_pmf_recursive, bgwp_pmf_truncated, shape_law_finite_exact, shape_law_t_alpha,
    shape_law_t_alpha_spine,
};
use crate::oracle::{
    enumerate_forests, exact_distribution, exact_event_prob, root_component_shape_law_of,
    rooted_forest_counts,
};
use crate::rational::{int, ratio, to_f64, Rational};
use crate::shape::{
    all_shapes_up_to, brute_force_aut, orbit_representatives, shapes_with_height_at_most,
};

/// Sizes of the generated test families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Complete graphs `K_n` for `n ≤ max_complete`.
    pub max_complete: usize,
    /// Cycles `C_n` for `3 ≤ n ≤ max_cycle`.
    pub max_cycle: usize,
    pub random_graphs: usize,
    pub random_max_edges: usize,
    pub seed: u64,
    /// Largest number of specified edges in an edge event.
    pub max_event_edges: usize,
    /// Largest labeled tree checked for inclusion.
    pub max_tree_size: usize,
    pub max_height: usize,
    /// Largest rooted tree in the automorphism suite.
    pub max_shape_size: usize,
    /// Largest `n` for the resolvent trace identity.
    pub max_trace_n: usize,
    /// Largest `n` for the `K_n` resolvent and transfer current closed forms.
    pub max_closed_form_n: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_complete: 6,
            max_cycle: 8,
            random_graphs: 50,
            random_max_edges: 12,
            seed: 0x5eed,
            max_event_edges: 4,
            max_tree_size: 5,
            max_height: 2,
            max_shape_size: 8,
            max_trace_n: 200,
            max_closed_form_n: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub checks: u64,
    pub max_error: f64,
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub passed: bool,
    pub max_error: f64,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn first_failure(&self) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| !s.passed)
    }
}

struct Suite {
    report: SuiteReport,
    tolerance: f64,
}

impl Suite {
    fn new(name: &str, tolerance: f64) -> Self {
        Suite {
            report: SuiteReport {
                name: name.to_string(),
                passed: true,
                checks: 0,
                max_error: 0.0,
                counterexample: None,
            },
            tolerance,
        }
    }

    fn exact() -> f64 {
        0.0
    }

    /// Records one comparison; `error` must not exceed the suite tolerance.
    fn check(&mut self, error: f64, describe: impl FnOnce() -> String) {
        self.report.checks += 1;
        let error = if error.is_nan() { f64::INFINITY } else { error };
        self.report.max_error = self.report.max_error.max(error);
        if error > self.tolerance && self.report.passed {
            self.report.passed = false;
            self.report.counterexample = Some(describe());
        }
    }

    fn check_eq<T: PartialEq + std::fmt::Display>(
        &mut self,
        got: &T,
        want: &T,
        err: f64,
        context: impl FnOnce() -> String,
    ) {
        if got == want {
            self.check(0.0, String::new);
        } else {
            let err = if err == 0.0 { f64::INFINITY } else { err };
            self.check(err, || format!("{}: got {got}, expected {want}", context()));
        }
    }

    fn fail(&mut self, message: String) {
        self.check(f64::INFINITY, || message);
    }

    fn finish(self) -> SuiteReport {
        self.report
    }
}

fn rational_gap(a: &Rational, b: &Rational) -> f64 {
    to_f64(&(a - b).abs())
}

/// Complete graphs, cycles and seeded random multigraphs used by the graph suites.
pub fn test_graphs(config: &VerifyConfig) -> Result<Vec<(String, Graph)>> {
    let mut out = Vec::new();
    for n in 1..=config.max_complete {
        out.push((format!("K_{n}"), Graph::complete(n)?));
    }
    for n in 3..=config.max_cycle {
        out.push((format!("C_{n}"), Graph::cycle(n)?));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for i in 0..config.random_graphs {
        use rand::Rng;
        let n = rng.random_range(2..=7usize);
        let m = rng.random_range(1..=config.random_max_edges);
        let g = Graph::random_multigraph(n, m, &mut rng)?;
        out.push((format!("random#{i}(n={n},m={m})"), g));
    }
    Ok(out)
}

/// Characteristic polynomial coefficients against enumerated rooted-forest counts.
pub fn suite_matrix_forest(graphs: &[(String, Graph)]) -> Result<SuiteReport> {
    let mut s = Suite::new("matrix_forest_theorem", Suite::exact());
    for (name, g) in graphs {
        let poly = char_poly(g);
        let counts = rooted_forest_counts(g)?;
        if poly.coefficients().len() != counts.len() {
            s.fail(format!("{name}: degree mismatch"));
            continue;
        }
        for (k, (a, b)) in poly.coefficients().iter().zip(&counts).enumerate() {
            s.check_eq(a, b, 0.0, || format!("{name}, coefficient of λ^{k}"));
        }
    }
    Ok(s.finish())
}

/// Partition function of the enumerated law against the characteristic polynomial.
pub fn suite_partition_function(
    graphs: &[(String, Graph)],
    lambdas: &[Rational],
) -> Result<SuiteReport> {
    let mut s = Suite::new("partition_function", Suite::exact());
    for (name, g) in graphs {
        let poly = char_poly(g);
        for lambda in lambdas {
            let d = exact_distribution(g, lambda)?;
            let z = d.partition_function();
            let want = poly.eval(lambda);
            let err = rational_gap(&z, &want);
            s.check_eq(&z, &want, err, || format!("{name}, λ={lambda}"));
        }
    }
    Ok(s.finish())
}

/// Every event on `edge_count` edges specifying at most `max_edges` of them.
pub fn all_edge_events(edge_count: usize, max_edges: usize) -> Vec<EdgeEvent> {
    fn rec(next: usize, m: usize, left: usize, cur: &mut EdgeEvent, out: &mut Vec<EdgeEvent>) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for e in next..m {
            cur.include.push(e);
            rec(e + 1, m, left - 1, cur, out);
            cur.include.pop();
            cur.exclude.push(e);
            rec(e + 1, m, left - 1, cur, out);
            cur.exclude.pop();
        }
    }
    let mut out = Vec::new();
    rec(
        0,
        edge_count,
        max_edges,
        &mut EdgeEvent::default(),
        &mut out,
    );
    out
}

/// Determinantal edge-event probabilities against the enumerated law.
pub fn suite_edge_events(
    graphs: &[(String, Graph)],
    lambdas: &[Rational],
    max_edges: usize,
) -> Result<SuiteReport> {
    let mut s = Suite::new("edge_events", TOLERANCE);
    for (name, g) in graphs {
        for lambda in lambdas {
            let d = exact_distribution(g, lambda)?;
            let r = resolvent(g, to_f64(lambda))?;
            for ev in all_edge_events(g.edge_count(), max_edges) {
                let want = to_f64(&exact_event_prob(&d, &ev)?);
                match edge_event_prob_with(g, &r, &ev) {
                    Ok(got) => s.check((got - want).abs(), || {
                        format!(
                            "{name}, λ={lambda}, include {:?}, exclude {:?}: {got} vs {want}",
                            ev.include, ev.exclude
                        )
                    }),
                    Err(e) => s.fail(format!("{name}, λ={lambda}, {ev:?}: {e}")),
                }
            }
        }
    }
    Ok(s.finish())
}

/// `P(t ⊂ F) = |t|/(n+λ)^{|t|−1}` for every labeled tree `t` in `K_n`.
pub fn suite_tree_inclusion(
    max_n: usize,
    max_size: usize,
    lambdas: &[Rational],
) -> Result<SuiteReport> {
    let mut s = Suite::new("tree_inclusion", Suite::exact());
    for n in 1..=max_n {
        let g = Graph::complete(n)?;
        // A labeled tree of K_n is a forest with one component of size > 1.
        let trees: Vec<Vec<usize>> = enumerate_forests(&g)?
            .into_iter()
            .filter(|f| f.component_sizes().iter().filter(|&&c| c > 1).count() <= 1)
            .filter(|f| f.edges().len() < max_size)
            .map(|f| f.edges().to_vec())
            .collect();
        let expected_count: usize = (1..max_size.min(n))
            .map(|k| labeled_tree_count(n, k + 1))
            .sum::<usize>()
            + 1;
        s.check_eq(&trees.len(), &expected_count, 0.0, || {
            format!("K_{n}: number of labeled trees")
        });
        for lambda in lambdas {
            let d = exact_distribution(&g, lambda)?;
            for edges in &trees {
                let ev = EdgeEvent::new(edges.clone(), vec![]);
                let got = exact_event_prob(&d, &ev)?;
                let want = kn_tree_inclusion_prob_exact(edges.len() + 1, n, lambda)?;
                let err = rational_gap(&got, &want);
                s.check_eq(&got, &want, err, || {
                    format!("K_{n}, λ={lambda}, tree {edges:?}")
                });
            }
        }
    }
    Ok(s.finish())
}

/// Labeled trees of `K_n` spanning exactly `k` chosen vertices: `C(n,k)·k^{k−2}`.
fn labeled_tree_count(n: usize, k: usize) -> usize {
    let binom = (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1));
    binom * k.pow(k.saturating_sub(2) as u32)
}

/// Finite-`n` shape law against the enumerated law of vertex 0's component.
pub fn suite_finite_shape_law(
    max_n: usize,
    max_h: usize,
    lambdas: &[Rational],
) -> Result<SuiteReport> {
    let mut s = Suite::new("finite_shape_law", Suite::exact());
    for n in 1..=max_n {
        let g = Graph::complete(n)?;
        for lambda in lambdas {
            let d = exact_distribution(&g, lambda)?;
            for h in 0..=max_h {
                let oracle = root_component_shape_law_of(&d, h);
                let mut total = Rational::zero();
                for t in shapes_with_height_at_most(h, n) {
                    let want = oracle.get(t.code()).cloned().unwrap_or_else(Rational::zero);
                    let got = shape_law_finite_exact(&t, h, n, lambda)?;
                    let err = rational_gap(&got, &want);
                    s.check_eq(&got, &want, err, || {
                        format!("K_{n}, λ={lambda}, h={h}, shape {t}")
                    });
                    total += got;
                }
                let one = Rational::one();
                let err = rational_gap(&total, &one);
                s.check_eq(&total, &one, err, || {
                    format!("K_{n}, λ={lambda}, h={h}: total mass")
                });
                for code in oracle.keys() {
                    if code
                        .parse::<crate::shape::RootedShape>()
                        .map_or(true, |t| t.height() > h || t.size() > n)
                    {
                        s.fail(format!(
                            "K_{n}, λ={lambda}, h={h}: oracle shape {code} outside the table"
                        ));
                    }
                }
            }
        }
    }
    Ok(s.finish())
}

/// Mean number of components, exact on `K_n` and `λ tr R_λ` in floating point.
pub fn suite_component_count(
    max_exact_n: usize,
    max_trace_n: usize,
    lambdas: &[Rational],
) -> Result<SuiteReport> {
    let mut s = Suite::new("component_count", TOLERANCE);
    for n in 1..=max_exact_n {
        let g = Graph::complete(n)?;
        for lambda in lambdas {
            let d = exact_distribution(&g, lambda)?;
            let got = d.mean_component_count();
            let nn = int(n as i64);
            let want = (lambda + Rational::one()) * &nn / (lambda + &nn);
            let err = rational_gap(&got, &want);
            s.check_eq(&got, &want, err, || {
                format!("K_{n}, λ={lambda}: exact mean")
            });
        }
    }
    for n in 1..=max_trace_n {
        let g = Graph::complete(n)?;
        for lambda in lambdas {
            let l = to_f64(lambda);
            let r = resolvent(&g, l)?;
            let got = l * r.trace();
            let want = kn_mean_component_count(n, l);
            s.check((got - want).abs(), || {
                format!("K_{n}, λ={l}: λ tr R = {got}, expected {want}")
            });
        }
    }
    Ok(s.finish())
}

/// Numeric resolvent and transfer current against the `K_n` closed forms.
pub fn suite_complete_closed_forms(max_n: usize, lambdas: &[f64]) -> Result<SuiteReport> {
    let mut s = Suite::new("complete_graph_closed_forms", TOLERANCE);
    for n in 2..=max_n {
        let g = Graph::complete(n)?;
        for &lambda in lambdas {
            let r = resolvent(&g, lambda)?;
            let diag = kn_resolvent_entry(n, lambda, true)?;
            let off = kn_resolvent_entry(n, lambda, false)?;
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { diag } else { off };
                    s.check((r.get(i, j) - want).abs(), || {
                        format!("K_{n}, λ={lambda}: R({i},{j})")
                    });
                }
            }
            for &e in g.edges() {
                for &f in g.edges() {
                    let got = transfer_current(&r, e, f)?;
                    let want = kn_transfer_current(n, lambda, e, f)?;
                    s.check((got - want).abs(), || {
                        format!("K_{n}, λ={lambda}: K({e:?},{f:?})")
                    });
                }
            }
        }
    }
    Ok(s.finish())
}

/// `det(I − B R Bᵀ)` against the exact ratio of characteristic polynomials.
pub fn suite_deletion(graphs: &[(String, Graph)], lambdas: &[Rational]) -> Result<SuiteReport> {
    let mut s = Suite::new("edge_deletion", TOLERANCE);
    for (name, g) in graphs {
        let m = g.edge_count();
        let subsets: Vec<Vec<usize>> = (0..m)
            .map(|e| vec![e])
            .chain((0..m.saturating_sub(1)).map(|e| vec![e, e + 1]))
            .collect();
        for lambda in lambdas {
            for del in &subsets {
                let want = to_f64(&deletion_ratio_exact(g, lambda, del)?);
                let got = deletion_ratio_via_kernel(g, to_f64(lambda), del)?;
                s.check((got - want).abs(), || {
                    format!("{name}, λ={lambda}, delete {del:?}")
                });
            }
        }
    }
    Ok(s.finish())
}

/// Event probabilities do not change when one edge is reversed.
pub fn suite_orientation(
    graphs: &[(String, Graph)],
    lambda: f64,
    max_edges: usize,
) -> Result<SuiteReport> {
    let mut s = Suite::new("orientation_invariance", TOLERANCE);
    for (name, g) in graphs {
        let r = resolvent(g, lambda)?;
        let events = all_edge_events(g.edge_count(), max_edges);
        let base: Vec<f64> = events
            .iter()
            .map(|ev| edge_event_prob_with(g, &r, ev))
            .collect::<Result<_>>()?;
        for e in 0..g.edge_count() {
            let flipped = g.flip_edge(e)?;
            let rf = resolvent(&flipped, lambda)?;
            for (ev, &p) in events.iter().zip(&base) {
                let q = edge_event_prob_with(&flipped, &rf, ev)?;
                s.check((p - q).abs(), || {
                    format!("{name}, flip edge {e}, {ev:?}: {p} vs {q}")
                });
            }
        }
    }
    Ok(s.finish())
}

/// Over the `2^p` include/exclude splits of a fixed edge set the probabilities sum to 1.
pub fn suite_complementarity(
    graphs: &[(String, Graph)],
    lambdas: &[f64],
    max_edges: usize,
) -> Result<SuiteReport> {
    let mut s = Suite::new("complementarity", 1e-9);
    for (name, g) in graphs {
        let m = g.edge_count();
        for &lambda in lambdas {
            let r = resolvent(g, lambda)?;
            for set in all_edge_events(m, max_edges)
                .into_iter()
                .filter(|ev| ev.exclude.is_empty())
            {
                let edges = set.include;
                let p = edges.len();
                let mut total = 0.0;
                for mask in 0u32..1 << p {
                    let (inc, exc): (Vec<usize>, Vec<usize>) = (
                        (0..p)
                            .filter(|i| mask >> i & 1 == 1)
                            .map(|i| edges[i])
                            .collect(),
                        (0..p)
                            .filter(|i| mask >> i & 1 == 0)
                            .map(|i| edges[i])
                            .collect(),
                    );
                    total += edge_event_prob_with(g, &r, &EdgeEvent::new(inc, exc))?;
                }
                s.check((total - 1.0).abs(), || {
                    format!("{name}, λ={lambda}, edges {edges:?}: sum {total}")
                });
            }
        }
    }
    Ok(s.finish())
}

/// Automorphism counts against brute force, and the two orbit-counting identities.
pub fn suite_automorphisms(max_size: usize) -> Result<SuiteReport> {
    let mut s = Suite::new("automorphisms_burnside", Suite::exact());
    for t in all_shapes_up_to(max_size) {
        let brute = BigInt::from(brute_force_aut(&t.to_labeled())?);
        let aut = BigInt::from(t.aut_count().clone());
        s.check_eq(&aut, &brute, 0.0, || format!("|Aut({t})|"));
        for h in 0..=t.height() {
            let reps = orbit_representatives(&t, h);
            let mut boundary = Rational::zero();
            let mut interior = Rational::zero();
            for rep in &reps {
                let size = rep.orbit_size(&t);
                if !size.is_integer() {
                    s.fail(format!("{t}, h={h}: non-integral orbit size {size}"));
                }
                if rep.depth() == h {
                    boundary += size;
                } else {
                    interior += size;
                }
            }
            let (b, i) = t.boundary_interior(h);
            let (b, i) = (int(b as i64), int(i as i64));
            s.check_eq(&boundary, &b, 0.0, || {
                format!("{t}, h={h}: boundary orbit sum")
            });
            s.check_eq(&interior, &i, 0.0, || {
                format!("{t}, h={h}: interior orbit sum")
            });
        }
    }
    Ok(s.finish())
}

/// Galton–Watson first-generation recursion against the closed form.
pub fn suite_bgwp(max_size: usize, betas: &[f64]) -> Result<SuiteReport> {
    let mut s = Suite::new("bgwp_recursion", 1e-12);
    for t in all_shapes_up_to(max_size) {
        for h in t.height()..=t.height() + 1 {
            for &beta in betas {
                let a = bgwp_pmf_truncated(beta, &t, h)?;
                let b = bgwp_pmf_recursive(beta, &t, h)?;
                s.check((a - b).abs(), || {
                    format!("{t}, h={h}, β={beta}: {a} vs {b}")
                });
            }
        }
    }
    Ok(s.finish())
}

/// `T_α` closed form against its spine decomposition.
pub fn suite_spine(max_size: usize, alphas: &[f64]) -> Result<SuiteReport> {
    let mut s = Suite::new("spine_decomposition", 1e-12);
    for t in all_shapes_up_to(max_size) {
        for h in t.height()..=t.height() + 1 {
            for &alpha in alphas {
                let a = shape_law_t_alpha(&t, h, alpha)?;
                let b = shape_law_t_alpha_spine(&t, h, alpha)?;
                s.check((a - b).abs(), || {
                    format!("{t}, h={h}, α={alpha}: {a} vs {b}")
                });
            }
        }
    }
    Ok(s.finish())
}

/// Runs every suite.
pub fn run_all(config: &VerifyConfig) -> Result<VerifyReport> {
    let graphs = test_graphs(config)?;
    let small: Vec<(String, Graph)> = graphs
        .iter()
        .filter(|(_, g)| g.edge_count() <= 12)
        .cloned()
        .collect();
    let lambdas = [ratio(1, 10), int(1), int(5)];
    let inclusion_lambdas = [ratio(1, 2), int(1), int(3)];
    let orientation: Vec<(String, Graph)> = small
        .iter()
        .filter(|(_, g)| g.edge_count() <= 8)
        .take(12)
        .cloned()
        .collect();
    let complete = vec![
        ("K_4".to_string(), Graph::complete(4)?),
        ("K_5".to_string(), Graph::complete(5)?),
    ];

    let suites = vec![
        suite_matrix_forest(&graphs)?,
        suite_partition_function(&small, &lambdas)?,
        suite_edge_events(&complete, &lambdas, config.max_event_edges)?,
        suite_tree_inclusion(
            config.max_complete,
            config.max_tree_size,
            &inclusion_lambdas,
        )?,
        suite_finite_shape_law(config.max_complete, config.max_height, &inclusion_lambdas)?,
        suite_component_count(
            config.max_complete,
            config.max_trace_n,
            &[ratio(1, 10), int(1), int(10)],
        )?,
        suite_complete_closed_forms(config.max_closed_form_n, &[0.1, 1.0, 5.0])?,
        suite_orientation(&orientation, 1.0, 2)?,
        suite_complementarity(&complete, &[0.1, 1.0, 5.0], 4)?,
        suite_deletion(&small, &lambdas)?,
        suite_automorphisms(config.max_shape_size)?,
        suite_bgwp(6, &[0.2, 0.5, 0.8, 1.0])?,
        suite_spine(6, &[0.25, 1.0, 4.0])?,
    ];
    let passed = suites.iter().all(|s| s.passed);
    let max_error = suites.iter().map(|s| s.max_error).fold(0.0, f64::max);
    Ok(VerifyReport {
        config: config.clone(),
        passed,
        max_error,
        suites,
    })
}

/// Suite name → passed, for quick summaries.
pub fn summary(report: &VerifyReport) -> BTreeMap<String, bool> {
    report
        .suites
        .iter()
        .map(|s| (s.name.clone(), s.passed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_enumeration_counts() {
        // Σ_{k ≤ 2} C(6,k) 2^k = 1 + 12 + 60
        assert_eq!(all_edge_events(6, 2).len(), 73);
        assert_eq!(all_edge_events(3, 0).len(), 1);
        for ev in all_edge_events(5, 3) {
            ev.validate(5).unwrap();
        }
    }

    #[test]
    fn labeled_tree_counts() {
        assert_eq!(labeled_tree_count(4, 4), 16);
        assert_eq!(labeled_tree_count(6, 5), 750);
        assert_eq!(labeled_tree_count(5, 2), 10);
    }

    #[test]
    fn failing_check_records_first_counterexample() {
        let mut s = Suite::new("x", 1e-10);
        s.check(1e-12, || "small".into());
        s.check(1.0, || "first".into());
        s.check(2.0, || "second".into());
        let r = s.finish();
        assert!(!r.passed);
        assert_eq!(r.counterexample.as_deref(), Some("first"));
        assert_eq!(r.max_error, 2.0);
        assert_eq!(r.checks, 3);
    }

    #[test]
    fn small_configuration_passes() {
        let config = VerifyConfig {
            max_complete: 4,
            max_cycle: 5,
            random_graphs: 5,
            random_max_edges: 6,
            max_event_edges: 2,
            max_tree_size: 4,
            max_height: 1,
            max_shape_size: 5,
            max_trace_n: 10,
            max_closed_form_n: 6,
            ..VerifyConfig::default()
        };
        let report = run_all(&config).unwrap();
        for s in &report.suites {
            assert!(s.passed, "{s:?}");
        }
        assert!(report.max_error < 1e-10);
    }
}
