//! Histograms over canonical keys and their comparison with exact laws.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::limit::{shape_law_finite, shape_law_limit, LimitRegime};
use crate::rational::{to_f64, Rational};
use crate::sampler::{batch_fold, ForestSampler, RootedForestSample};
use crate::shape::RootedShape;

/// Shape (or forest) key → probability.
pub type ShapeLaw = BTreeMap<String, f64>;
/// Shape key → exact probability.
pub type ExactShapeLaw = BTreeMap<String, Rational>;

/// Key of the catch-all bin.
pub const OTHER: &str = "OTHER";

/// Expected counts below this are merged into [`OTHER`] for the chi-square test.
pub const CHI_SQUARE_MIN_EXPECTED: f64 = 5.0;

pub fn exact_law_to_f64(law: &ExactShapeLaw) -> ShapeLaw {
    law.iter().map(|(k, v)| (k.clone(), to_f64(v))).collect()
}

/// Counts per key. Histograms form a commutative monoid under [`Histogram::merge`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: BTreeMap<String, u64>,
    pub total: u64,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub metadata: serde_json::Value,
}

pub type ShapeHistogram = Histogram;

impl Histogram {
    pub fn new() -> Self {
        Histogram::default()
    }

    pub fn with_metadata(metadata: serde_json::Value) -> Self {
        Histogram {
            metadata,
            ..Histogram::default()
        }
    }

    pub fn add(&mut self, key: impl Into<String>) {
        self.add_n(key, 1);
    }

    pub fn add_n(&mut self, key: impl Into<String>, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(key.into()).or_default() += count;
        self.total += count;
    }

    pub fn merge(mut self, other: Histogram) -> Histogram {
        for (k, c) in other.counts {
            *self.counts.entry(k).or_default() += c;
        }
        self.total += other.total;
        if self.metadata.is_null() {
            self.metadata = other.metadata;
        }
        self
    }

    pub fn count(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn frequency(&self, key: &str) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(key) as f64 / self.total as f64
        }
    }

    pub fn frequencies(&self) -> ShapeLaw {
        self.counts
            .iter()
            .map(|(k, &c)| (k.clone(), c as f64 / self.total as f64))
            .collect()
    }

    /// Builds a histogram whose counts are `scale × p` for an exact law whose
    /// probabilities all become integers at that scale.
    pub fn from_exact_law(law: &ExactShapeLaw, scale: u64) -> Result<Histogram> {
        let mut h = Histogram::new();
        for (k, p) in law {
            let c = p * Rational::from_integer(scale.into());
            if !c.is_integer() {
                return Err(Error::InvalidParameter(format!(
                    "probability {p} of {k} is not a multiple of 1/{scale}"
                )));
            }
            let c: u64 = c
                .to_integer()
                .try_into()
                .map_err(|_| Error::InvalidParameter(format!("negative probability for {k}")))?;
            h.add_n(k.clone(), c);
        }
        Ok(h)
    }
}

/// Shape of vertex 0's component, cut at `h`, over a batch of samples.
pub fn histogram_root_component(samples: &[RootedForestSample], h: usize) -> ShapeHistogram {
    let mut hist = Histogram::new();
    for s in samples {
        hist.add(s.root_component_code(h));
    }
    hist
}

/// Draws `count` samples (stream `i` for sample `i`) and histograms vertex 0's
/// component cut at `h`.
pub fn sample_root_component_histogram(
    proto: &ForestSampler,
    count: u64,
    seed: u64,
    h: usize,
) -> ShapeHistogram {
    batch_fold(
        proto,
        count,
        seed,
        Histogram::new,
        |acc, s| acc.add(s.root_component_code(h)),
        Histogram::merge,
    )
}

/// Draws `count` samples and histograms the underlying unrooted forests by edge set.
pub fn sample_forest_histogram(proto: &ForestSampler, count: u64, seed: u64) -> Histogram {
    batch_fold(
        proto,
        count,
        seed,
        Histogram::new,
        |acc, s| acc.add(s.forest_key()),
        Histogram::merge,
    )
}

/// Histogram of `count` keys drawn by `draw(stream)`, streams `0..count`.
pub fn histogram_of<F>(count: u64, draw: F) -> Histogram
where
    F: Fn(u64) -> String + Sync + Send,
{
    use rayon::prelude::*;
    (0..count)
        .into_par_iter()
        .fold(Histogram::new, |mut acc, i| {
            acc.add(draw(i));
            acc
        })
        .reduce(Histogram::new, Histogram::merge)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// True when some bins were merged into OTHER for low expected count.
    pub bins_merged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub key: String,
    pub observed: u64,
    pub empirical: f64,
    pub expected: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub tv_distance: f64,
    pub chi_square: ChiSquare,
    pub max_abs_gap: f64,
    pub rows: Vec<ComparisonRow>,
}

/// Compares a histogram with a law. Keys missing from the law, and the mass
/// the law leaves unlisted, meet in the [`OTHER`] bin.
pub fn compare(hist: &Histogram, law: &ShapeLaw) -> Result<ComparisonReport> {
    if hist.total == 0 {
        return Err(Error::InvalidParameter("empty histogram".into()));
    }
    let mut listed = 0.0;
    for (k, &p) in law {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::InvalidParameter(format!("law assigns {p} to {k}")));
        }
        listed += p;
    }
    if listed > 1.0 + 1e-9 {
        return Err(Error::LawMass { mass: listed });
    }
    let total = hist.total as f64;
    let law_other = (1.0 - listed).max(0.0);
    let observed_other: u64 = hist
        .counts
        .iter()
        .filter(|(k, _)| !law.contains_key(*k))
        .map(|(_, &c)| c)
        .sum();

    let mut rows = Vec::with_capacity(law.len() + 1);
    for (k, &p) in law {
        let observed = hist.count(k);
        let empirical = observed as f64 / total;
        rows.push(ComparisonRow {
            key: k.clone(),
            observed,
            empirical,
            expected: p,
            gap: empirical - p,
        });
    }
    let other_emp = observed_other as f64 / total;
    rows.push(ComparisonRow {
        key: OTHER.to_string(),
        observed: observed_other,
        empirical: other_emp,
        expected: law_other,
        gap: other_emp - law_other,
    });

    let tv_distance = (0.5 * rows.iter().map(|r| r.gap.abs()).sum::<f64>()).min(1.0);
    let max_abs_gap = rows.iter().map(|r| r.gap.abs()).fold(0.0, f64::max);

    // Chi-square with low-expectation bins folded into OTHER.
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut merged_obs, mut merged_exp) = (observed_other as f64, law_other * total);
    let mut bins_merged = false;
    for r in rows.iter().filter(|r| r.key != OTHER) {
        let expected = r.expected * total;
        if expected < CHI_SQUARE_MIN_EXPECTED {
            merged_obs += r.observed as f64;
            merged_exp += expected;
            bins_merged = true;
        } else {
            bins.push((r.observed as f64, expected));
        }
    }
    if merged_exp > 0.0 || merged_obs > 0.0 {
        bins.push((merged_obs, merged_exp));
    }
    let statistic: f64 = bins
        .iter()
        .map(|&(o, e)| {
            if e > 0.0 {
                (o - e).powi(2) / e
            } else if o > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    let dof = bins.len().saturating_sub(1);
    let p_value = chi_square_survival(statistic, dof);
    Ok(ComparisonReport {
        tv_distance,
        chi_square: ChiSquare {
            statistic,
            dof,
            p_value,
            bins_merged,
        },
        max_abs_gap,
        rows,
    })
}

/// `P(χ²(dof) ≥ statistic)`; 1 for zero degrees of freedom.
pub fn chi_square_survival(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    if !statistic.is_finite() {
        return 0.0;
    }
    ChiSquared::new(dof as f64)
        .map(|d| d.sf(statistic))
        .unwrap_or(f64::NAN)
}

/// Upper quantile of `χ²(dof)`, e.g. `q = 0.999`.
pub fn chi_square_quantile(q: f64, dof: usize) -> f64 {
    ChiSquared::new(dof as f64)
        .map(|d| d.inverse_cdf(q))
        .unwrap_or(f64::NAN)
}

/// Total variation distance between two probability vectors on string keys.
pub fn tv_distance(p: &ShapeLaw, q: &ShapeLaw) -> f64 {
    let mut keys: Vec<&String> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Total variation distance between the empirical laws of two histograms.
pub fn tv_between(a: &Histogram, b: &Histogram) -> f64 {
    tv_distance(&a.frequencies(), &b.frequencies())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub shape: String,
    pub n: usize,
    pub lambda: f64,
    pub finite: f64,
    pub limit: f64,
    pub gap: f64,
}

/// Finite-`n` against limit probabilities for each shape, with `λ_n` from
/// [`LimitRegime::lambda_for`].
pub fn convergence_table(
    shapes: &[RootedShape],
    h: usize,
    regime: LimitRegime,
    ns: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    convergence_table_with(shapes, h, regime, ns, |n| regime.lambda_for(n))
}

/// As [`convergence_table`] with an explicit schedule `n ↦ λ_n`.
pub fn convergence_table_with(
    shapes: &[RootedShape],
    h: usize,
    regime: LimitRegime,
    ns: &[usize],
    lambda_of: impl Fn(usize) -> f64,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::with_capacity(shapes.len() * ns.len());
    for t in shapes {
        let limit = shape_law_limit(t, h, regime)?;
        for &n in ns {
            let lambda = lambda_of(n);
            let finite = shape_law_finite(t, h, n, lambda)?;
            rows.push(ConvergenceRow {
                shape: t.code().to_string(),
                n,
                lambda,
                finite,
                limit,
                gap: (finite - limit).abs(),
            });
        }
    }
    Ok(rows)
}

/// Whether each shape's gap sequence (rows in increasing `n`) never grows by
/// more than the relative `slack`.
pub fn gaps_non_increasing(rows: &[ConvergenceRow], slack: f64) -> bool {
    let mut by_shape: BTreeMap<&str, Vec<&ConvergenceRow>> = BTreeMap::new();
    for r in rows {
        by_shape.entry(&r.shape).or_default().push(r);
    }
    by_shape.values_mut().all(|rs| {
        rs.sort_by_key(|r| r.n);
        rs.windows(2)
            .all(|w| w[1].gap <= w[0].gap * (1.0 + slack) + f64::EPSILON)
    })
}

pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "shape,n,lambda,finite,limit,gap")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.17e},{:.17e},{:.17e}",
            r.shape, r.n, r.lambda, r.finite, r.limit, r.gap
        )?;
    }
    Ok(())
}

/// One `(n, finite-n probability)` series per shape, with its limit value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub shape: String,
    pub limit: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn plot_data(rows: &[ConvergenceRow]) -> Vec<PlotSeries> {
    let mut series: BTreeMap<&str, PlotSeries> = BTreeMap::new();
    for r in rows {
        series
            .entry(&r.shape)
            .or_insert_with(|| PlotSeries {
                shape: r.shape.clone(),
                limit: r.limit,
                points: Vec::new(),
            })
            .points
            .push((r.n as f64, r.finite));
    }
    series.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::sampler::{sample_lsf_kn, RngSeed};
    use proptest::prelude::*;

    fn law(entries: &[(&str, f64)]) -> ShapeLaw {
        entries.iter().map(|&(k, p)| (k.to_string(), p)).collect()
    }

    #[test]
    fn empty_forest_puts_all_mass_on_singleton() {
        // λ huge: the sample is almost surely the empty forest.
        let samples: Vec<_> = (0..20)
            .map(|i| sample_lsf_kn(6, 1e12, RngSeed::new(0, i)).unwrap())
            .collect();
        let hist = histogram_root_component(&samples, 2);
        assert_eq!(hist.count("()"), 20);
        assert_eq!(hist.total, 20);
    }

    #[test]
    fn proportional_histogram_has_zero_distance() {
        let exact: ExactShapeLaw = [
            ("()", ratio(16, 125)),
            ("(())", ratio(72, 125)),
            ("(()())", ratio(33, 125)),
            ("(()()())", ratio(4, 125)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let hist = Histogram::from_exact_law(&exact, 125_000).unwrap();
        let report = compare(&hist, &exact_law_to_f64(&exact)).unwrap();
        assert!(report.tv_distance < 1e-15);
        assert!(report.chi_square.statistic < 1e-9);
        assert!(Histogram::from_exact_law(&exact, 7).is_err());
    }

    #[test]
    fn disjoint_atoms_have_distance_one() {
        let mut hist = Histogram::new();
        hist.add_n("(())", 10);
        let report = compare(&hist, &law(&[("()", 1.0)])).unwrap();
        assert!((report.tv_distance - 1.0).abs() < 1e-15);
        assert_eq!(report.chi_square.p_value, 0.0);
    }

    #[test]
    fn other_bin_absorbs_unlisted_mass() {
        let mut hist = Histogram::new();
        hist.add_n("a", 50);
        hist.add_n("b", 30);
        hist.add_n("c", 20);
        let report = compare(&hist, &law(&[("a", 0.5), ("b", 0.3)])).unwrap();
        assert!(report.tv_distance < 1e-12);
        let other = report.rows.iter().find(|r| r.key == OTHER).unwrap();
        assert_eq!(other.observed, 20);
        assert!((other.expected - 0.2).abs() < 1e-12);
    }

    #[test]
    fn compare_rejects_bad_inputs() {
        let mut hist = Histogram::new();
        assert!(compare(&hist, &law(&[("a", 1.0)])).is_err());
        hist.add("a");
        assert!(matches!(
            compare(&hist, &law(&[("a", 0.7), ("b", 0.7)])),
            Err(Error::LawMass { .. })
        ));
        assert!(compare(&hist, &law(&[("a", -0.1)])).is_err());
    }

    #[test]
    fn chi_square_merges_small_bins() {
        let mut hist = Histogram::new();
        hist.add_n("a", 990);
        hist.add_n("b", 10);
        let report = compare(&hist, &law(&[("a", 0.996), ("b", 0.004)])).unwrap();
        assert!(report.chi_square.bins_merged);
        assert_eq!(report.chi_square.dof, 1);
    }

    #[test]
    fn chi_square_quantiles() {
        // χ²(1) 95% quantile is 3.841...
        assert!((chi_square_quantile(0.95, 1) - 3.841_458_820_694_124).abs() < 1e-6);
        assert!((chi_square_survival(3.841_458_820_694_124, 1) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn merge_is_a_monoid() {
        let mut a = Histogram::new();
        a.add_n("x", 3);
        let mut b = Histogram::new();
        b.add_n("x", 1);
        b.add_n("y", 2);
        let ab = a.clone().merge(b.clone());
        assert_eq!(ab, b.merge(a.clone()));
        assert_eq!(ab.total, 6);
        assert_eq!(a.clone().merge(Histogram::new()), a);
    }

    #[test]
    fn convergence_examples() {
        let single = RootedShape::singleton();
        let rows = convergence_table(
            std::slice::from_ref(&single),
            1,
            LimitRegime::Linear(1.0),
            &[100, 1000, 10_000],
        )
        .unwrap();
        assert!(gaps_non_increasing(&rows, 0.1));
        assert!(rows.last().unwrap().gap <= 0.01);
        let sup = convergence_table(
            std::slice::from_ref(&single),
            1,
            LimitRegime::Superlinear,
            &[1000],
        )
        .unwrap();
        assert!(sup[0].finite > 0.99);
        let sub = convergence_table(&[single], 1, LimitRegime::Sublinear, &[10_000]).unwrap();
        assert!(sub[0].finite < 0.05);
        let mut csv = Vec::new();
        write_convergence_csv(&rows, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("shape,n,lambda,finite,limit,gap\n()"));
        let series = plot_data(&rows);
        assert_eq!(series.len(), 1);
        assert_eq!(series[0].points.len(), 3);
    }

    fn arb_hist() -> impl Strategy<Value = Histogram> {
        prop::collection::vec(0u64..50, 4).prop_map(|cs| {
            let mut h = Histogram::new();
            for (i, c) in cs.into_iter().enumerate() {
                h.add_n(format!("k{i}"), c);
            }
            h.add("k0");
            h
        })
    }

    proptest! {
        #[test]
        fn tv_is_a_metric(a in arb_hist(), b in arb_hist(), c in arb_hist()) {
            let ab = tv_between(&a, &b);
            prop_assert!((ab - tv_between(&b, &a)).abs() < 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
            prop_assert!(tv_between(&a, &c) <= ab + tv_between(&b, &c) + 1e-12);
            prop_assert!(tv_between(&a, &a) < 1e-15);
        }
    }
}
