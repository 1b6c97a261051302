use std::collections::BTreeMap;
use std::io::Write;

use serde_json::{json, Value};

use lsf_core::determinantal::{char_poly, edge_event_prob_with, resolvent, EdgeEvent};
use lsf_core::limit::{
    bgwp_pmf_truncated, sample_bgwp_truncated, sample_t0_truncated, sample_t_alpha_truncated,
    shape_law_finite, shape_law_finite_exact, shape_law_limit, LimitRegime,
};
use lsf_core::oracle::{
    exact_distribution, exact_event_prob, root_component_shape_law_of, ENUMERATION_BUDGET,
};
use lsf_core::rational::{parse_rational, to_f64};
use lsf_core::sampler::{sample_batch, ForestSampler, GraphSampler, KnSampler, RngSeed};
use lsf_core::shape::shapes_with_height_at_most;
use lsf_core::stats::{
    compare, convergence_table_with, exact_law_to_f64, histogram_of, plot_data,
    sample_forest_histogram, sample_root_component_histogram, write_convergence_csv, Histogram,
    ShapeLaw,
};
use lsf_core::verify::{run_all, VerifyConfig};
use lsf_core::{Graph, Rational, RootedShape};

use crate::args::*;
use crate::output::{config_value, csv_field, sink, write_csv_header, write_json};
use crate::CliError;

/// Probability of a shape under some law.
type ShapeProb = Box<dyn Fn(&RootedShape) -> lsf_core::Result<f64>>;

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Sample(a) => sample(a),
        Command::SampleLimit(a) => sample_limit(a),
        Command::Exact(a) => exact(a),
        Command::Verify(a) => verify(a),
        Command::Limit(a) => limit(a),
        Command::ConvergenceTable(a) => table(a, false),
        Command::PlotData(a) => table(a, true),
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn load_graph(source: &GraphSource) -> Result<Graph, CliError> {
    match (source.n, &source.graph) {
        (Some(n), None) => Ok(Graph::complete(n)?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                config_error(format!("cannot read graph file {}: {e}", path.display()))
            })?;
            Ok(text.parse()?)
        }
        _ => Err(config_error("give exactly one of --n or --graph")),
    }
}

fn parse_lambda(s: &str) -> Result<(Rational, f64), CliError> {
    let r = parse_rational(s).map_err(|_| {
        config_error(format!(
            "--lambda {s:?} is not a number; use \"p/q\" or a decimal"
        ))
    })?;
    if r < Rational::from_integer(0.into()) {
        return Err(config_error(format!(
            "--lambda must be non-negative, got {s}"
        )));
    }
    let f = to_f64(&r);
    Ok((r, f))
}

fn parse_shapes(codes: &[String], h: usize, max_size: usize) -> Result<Vec<RootedShape>, CliError> {
    if codes.is_empty() {
        return Ok(shapes_with_height_at_most(h, max_size));
    }
    codes
        .iter()
        .map(|c| {
            let t: RootedShape = c.parse()?;
            if t.height() > h {
                return Err(config_error(format!(
                    "shape {c} has height {} > --h {h}",
                    t.height()
                )));
            }
            Ok(t)
        })
        .collect()
}

fn histogram_value(hist: &Histogram) -> Value {
    json!(hist.counts)
}

fn write_histogram(
    out: &mut dyn Write,
    format: Format,
    config: &Value,
    hist: &Histogram,
    comparison: Option<Value>,
) -> Result<(), CliError> {
    match format {
        Format::Json => {
            let mut v =
                json!({"config": config, "total": hist.total, "histogram": histogram_value(hist)});
            if let Some(c) = comparison {
                v["comparison"] = c;
            }
            write_json(out, &v)?;
        }
        Format::Jsonl => {
            writeln!(out, "{}", json!({ "config": config }))?;
            for (k, c) in &hist.counts {
                writeln!(out, "{}", json!({"code": k, "count": c}))?;
            }
        }
        Format::Csv => {
            write_csv_header(out, config)?;
            writeln!(out, "code,count")?;
            for (k, c) in &hist.counts {
                writeln!(out, "{},{c}", csv_field(k))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn comparison_value(hist: &Histogram, law: &ShapeLaw) -> Result<Value, CliError> {
    Ok(serde_json::to_value(compare(hist, law)?)?)
}

fn sample(a: SampleArgs) -> Result<(), CliError> {
    let config = config_value("sample", &a)?;
    let g = load_graph(&a.source)?;
    let (lambda_exact, lambda) = parse_lambda(&a.lambda)?;
    let proto = match a.source.n {
        Some(n) if !a.general => ForestSampler::Complete(KnSampler::new(n, lambda)?),
        _ => ForestSampler::General(GraphSampler::new(&g, lambda)?),
    };
    if a.compare && a.aggregate.is_none() {
        return Err(config_error("--compare needs --aggregate"));
    }
    let mut out = sink(a.output.as_deref())?;
    match a.aggregate {
        None => {
            let samples = sample_batch(&proto, a.count, a.seed);
            match a.format {
                Format::Jsonl => {
                    writeln!(out, "{}", json!({ "config": config }))?;
                    for s in &samples {
                        writeln!(out, "{}", serde_json::to_string(&s.record())?)?;
                    }
                }
                Format::Json => {
                    let records: Vec<_> = samples.iter().map(|s| s.record()).collect();
                    write_json(&mut out, &json!({"config": config, "samples": records}))?;
                }
                Format::Csv => {
                    write_csv_header(&mut out, &config)?;
                    writeln!(out, "sample,vertex,parent")?;
                    for (i, s) in samples.iter().enumerate() {
                        for (v, p) in s.parents().iter().enumerate() {
                            let p = p.map(|p| p.to_string()).unwrap_or_default();
                            writeln!(out, "{i},{v},{p}")?;
                        }
                    }
                }
            }
            out.flush()?;
            Ok(())
        }
        Some(Aggregate::Forest) => {
            let hist = sample_forest_histogram(&proto, a.count, a.seed);
            let comparison = if a.compare {
                check_budget(&g)?;
                let d = exact_distribution(&g, &positive(&lambda_exact)?)?;
                Some(comparison_value(&hist, &d.law_by_key())?)
            } else {
                None
            };
            write_histogram(&mut *out, a.format, &config, &hist, comparison)
        }
        Some(Aggregate::RootShape) => {
            let hist = sample_root_component_histogram(&proto, a.count, a.seed, a.h);
            let comparison = if a.compare {
                let law: ShapeLaw = match a.source.n {
                    Some(n) => finite_law(n, a.h, lambda, n.min(12))?,
                    None => {
                        check_budget(&g)?;
                        let d = exact_distribution(&g, &positive(&lambda_exact)?)?;
                        exact_law_to_f64(&root_component_shape_law_of(&d, a.h))
                    }
                };
                Some(comparison_value(&hist, &law)?)
            } else {
                None
            };
            write_histogram(&mut *out, a.format, &config, &hist, comparison)
        }
    }
}

fn positive(lambda: &Rational) -> Result<Rational, CliError> {
    if *lambda > Rational::from_integer(0.into()) {
        Ok(lambda.clone())
    } else {
        Err(config_error("exact laws need --lambda > 0"))
    }
}

fn check_budget(g: &Graph) -> Result<(), CliError> {
    if g.edge_count() > ENUMERATION_BUDGET {
        return Err(config_error(format!(
            "graph has {} edges; enumeration is limited to {ENUMERATION_BUDGET}",
            g.edge_count()
        )));
    }
    Ok(())
}

/// Finite-`n` law on shapes with at most `max_size` vertices.
fn finite_law(n: usize, h: usize, lambda: f64, max_size: usize) -> Result<ShapeLaw, CliError> {
    let mut law = ShapeLaw::new();
    for t in shapes_with_height_at_most(h, max_size.min(n)) {
        law.insert(t.code().to_string(), shape_law_finite(&t, h, n, lambda)?);
    }
    Ok(law)
}

fn require<T: Copy>(v: Option<T>, flag: &str, context: &str) -> Result<T, CliError> {
    v.ok_or_else(|| config_error(format!("{context} needs {flag}")))
}

fn sample_limit(a: SampleLimitArgs) -> Result<(), CliError> {
    let config = config_value("sample-limit", &a)?;
    let (h, seed) = (a.h, a.seed);
    let (hist, law): (Histogram, ShapeProb) = match a.tree {
        LimitTree::T0 => {
            if a.alpha.is_some() || a.beta.is_some() {
                return Err(config_error("t0 takes neither --alpha nor --beta"));
            }
            let hist = histogram_of(a.count, |i| {
                sample_t0_truncated(h, RngSeed::new(seed, i))
                    .code()
                    .to_string()
            });
            (
                hist,
                Box::new(move |t| shape_law_limit(t, h, LimitRegime::Sublinear)),
            )
        }
        LimitTree::TAlpha => {
            let alpha = require(a.alpha, "--alpha", "t-alpha")?;
            if a.beta.is_some() {
                return Err(config_error("t-alpha takes --alpha, not --beta"));
            }
            let regime = LimitRegime::linear(alpha)?;
            sample_t_alpha_truncated(alpha, h, RngSeed::new(seed, 0))?;
            let hist = histogram_of(a.count, |i| {
                sample_t_alpha_truncated(alpha, h, RngSeed::new(seed, i))
                    .expect("alpha checked")
                    .code()
                    .to_string()
            });
            (hist, Box::new(move |t| shape_law_limit(t, h, regime)))
        }
        LimitTree::Bgwp => {
            let beta = require(a.beta, "--beta", "bgwp")?;
            if a.alpha.is_some() {
                return Err(config_error("bgwp takes --beta, not --alpha"));
            }
            sample_bgwp_truncated(beta, h, RngSeed::new(seed, 0))?;
            let hist = histogram_of(a.count, |i| {
                sample_bgwp_truncated(beta, h, RngSeed::new(seed, i))
                    .expect("beta checked")
                    .code()
                    .to_string()
            });
            (hist, Box::new(move |t| bgwp_pmf_truncated(beta, t, h)))
        }
    };
    let comparison = if a.compare {
        let mut table = ShapeLaw::new();
        for t in shapes_with_height_at_most(h, a.max_size) {
            table.insert(t.code().to_string(), law(&t)?);
        }
        Some(comparison_value(&hist, &table)?)
    } else {
        None
    };
    let mut out = sink(a.output.as_deref())?;
    write_histogram(&mut *out, a.format, &config, &hist, comparison)
}

fn exact(a: ExactArgs) -> Result<(), CliError> {
    let config = config_value("exact", &a)?;
    let g = load_graph(&a.source)?;
    let (lambda_exact, lambda) = parse_lambda(&a.lambda)?;
    let mut result = json!({"config": config});
    let needs_positive = !matches!(a.query, Query::CharPoly);
    if needs_positive && lambda <= 0.0 {
        return Err(config_error("this query needs --lambda > 0"));
    }
    let (include, exclude) = event_edges(&g, &a)?;
    if a.query != Query::Event && !(include.is_empty() && exclude.is_empty()) {
        return Err(config_error("edge constraints only apply to --query event"));
    }
    match a.query {
        Query::Event => {
            let ev = EdgeEvent::new(include, exclude);
            ev.validate(g.edge_count())?;
            let r = resolvent(&g, lambda)?;
            result["probability"] = json!(edge_event_prob_with(&g, &r, &ev)?);
            if a.oracle {
                check_budget(&g)?;
                let d = exact_distribution(&g, &lambda_exact)?;
                let p = exact_event_prob(&d, &ev)?;
                result["exact"] = json!(p.to_string());
            }
        }
        Query::CharPoly => {
            let p = char_poly(&g);
            let coeffs: Vec<String> = p.coefficients().iter().map(|c| c.to_string()).collect();
            result["coefficients"] = json!(coeffs);
            result["value"] = json!(p.eval(&lambda_exact).to_string());
        }
        Query::Resolvent => {
            let r = resolvent(&g, lambda)?;
            let n = r.n();
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| r.get(i, j)).collect())
                .collect();
            result["matrix"] = json!(rows);
            result["trace"] = json!(r.trace());
        }
        Query::MeanComponents => {
            let r = resolvent(&g, lambda)?;
            result["mean"] = json!(lambda * r.trace());
            if a.oracle {
                check_budget(&g)?;
                let d = exact_distribution(&g, &lambda_exact)?;
                result["exact"] = json!(d.mean_component_count().to_string());
            }
        }
        Query::ForestLaw => {
            check_budget(&g)?;
            let d = exact_distribution(&g, &lambda_exact)?;
            let law: BTreeMap<String, String> =
                d.iter().map(|(f, p)| (f.key(), p.to_string())).collect();
            result["partition_function"] = json!(d.partition_function().to_string());
            result["atoms"] = json!(law.len());
            result["law"] = json!(law);
        }
        Query::ShapeLaw => {
            check_budget(&g)?;
            let d = exact_distribution(&g, &lambda_exact)?;
            let law: BTreeMap<String, String> = root_component_shape_law_of(&d, a.h)
                .into_iter()
                .map(|(k, p)| (k, p.to_string()))
                .collect();
            result["law"] = json!(law);
        }
    }
    let mut out = sink(a.output.as_deref())?;
    write_json(&mut out, &result)?;
    Ok(())
}

/// Edge indices named by `--*-index` and by endpoint pairs in `--*-edge`.
fn event_edges(g: &Graph, a: &ExactArgs) -> Result<(Vec<usize>, Vec<usize>), CliError> {
    let mut taken: Vec<usize> = a.include.iter().chain(&a.exclude).copied().collect();
    let mut resolve = |spec: &str| -> Result<usize, CliError> {
        let bad = || {
            config_error(format!(
                "edge {spec:?} should be two vertices, e.g. \"0,1\""
            ))
        };
        let (x, y) = spec.split_once([',', '-']).ok_or_else(bad)?;
        let x: usize = x.trim().parse().map_err(|_| bad())?;
        let y: usize = y.trim().parse().map_err(|_| bad())?;
        let found = g
            .edges()
            .iter()
            .enumerate()
            .find(|&(i, &(t, h))| ((t, h) == (x, y) || (t, h) == (y, x)) && !taken.contains(&i))
            .map(|(i, _)| i)
            .ok_or_else(|| config_error(format!("no unused edge between {x} and {y}")))?;
        taken.push(found);
        Ok(found)
    };
    let mut include = a.include.clone();
    for spec in &a.include_edges {
        include.push(resolve(spec)?);
    }
    let mut exclude = a.exclude.clone();
    for spec in &a.exclude_edges {
        exclude.push(resolve(spec)?);
    }
    Ok((include, exclude))
}

fn verify(a: VerifyArgs) -> Result<(), CliError> {
    let mut vc = if a.quick {
        VerifyConfig {
            max_complete: 5,
            max_cycle: 6,
            random_graphs: 10,
            random_max_edges: 8,
            max_event_edges: 2,
            max_tree_size: 4,
            max_height: 2,
            max_shape_size: 6,
            max_trace_n: 30,
            max_closed_form_n: 10,
            ..VerifyConfig::default()
        }
    } else {
        VerifyConfig::default()
    };
    if let Some(k) = a.max_event_edges {
        vc.max_event_edges = k;
    }
    if let Some(k) = a.random_graphs {
        vc.random_graphs = k;
    }
    if let Some(s) = a.seed {
        vc.seed = s;
    }
    let report = run_all(&vc)?;
    let value = json!({"config": config_value("verify", &a)?, "report": report});
    let mut out = sink(a.output.as_deref())?;
    write_json(&mut out, &value)?;
    match report.first_failure() {
        None => Ok(()),
        Some(s) => Err(CliError::Verification(format!(
            "suite {} failed: {}",
            s.name,
            s.counterexample.as_deref().unwrap_or("no detail")
        ))),
    }
}

fn limit(a: LimitArgs) -> Result<(), CliError> {
    let config = config_value("limit", &a)?;
    let h = a.h;
    let flags = |allowed: &[&str]| -> Result<(), CliError> {
        let given = [
            ("--n", a.n.is_some()),
            ("--lambda", a.lambda.is_some()),
            ("--alpha", a.alpha.is_some()),
            ("--beta", a.beta.is_some()),
        ];
        for (name, present) in given {
            if present && !allowed.contains(&name) {
                return Err(config_error(format!(
                    "--law {:?} does not take {name}",
                    a.law
                )));
            }
        }
        Ok(())
    };
    let mut shapes = parse_shapes(&a.shapes, h, a.max_size)?;
    let mut exact_law: Option<BTreeMap<String, String>> = None;
    let law: ShapeProb = match a.law {
        LawKind::Finite => {
            flags(&["--n", "--lambda"])?;
            let n = require(a.n, "--n", "the finite law")?;
            let lambda_s = a
                .lambda
                .clone()
                .ok_or_else(|| config_error("the finite law needs --lambda"))?;
            let (lambda_exact, lambda) = parse_lambda(&lambda_s)?;
            shapes.retain(|t| t.size() <= n);
            if a.exact {
                let mut m = BTreeMap::new();
                for t in &shapes {
                    m.insert(
                        t.code().to_string(),
                        shape_law_finite_exact(t, h, n, &lambda_exact)?.to_string(),
                    );
                }
                exact_law = Some(m);
            }
            Box::new(move |t| shape_law_finite(t, h, n, lambda))
        }
        LawKind::Sublinear => {
            flags(&[])?;
            Box::new(move |t| shape_law_limit(t, h, LimitRegime::Sublinear))
        }
        LawKind::Superlinear => {
            flags(&[])?;
            Box::new(move |t| shape_law_limit(t, h, LimitRegime::Superlinear))
        }
        LawKind::Linear => {
            flags(&["--alpha"])?;
            let regime = LimitRegime::linear(require(a.alpha, "--alpha", "the linear law")?)?;
            Box::new(move |t| shape_law_limit(t, h, regime))
        }
        LawKind::Bgwp => {
            flags(&["--beta"])?;
            let beta = require(a.beta, "--beta", "the bgwp law")?;
            Box::new(move |t| bgwp_pmf_truncated(beta, t, h))
        }
    };
    if a.exact && a.law != LawKind::Finite {
        return Err(config_error("--exact is only available for --law finite"));
    }
    let mut rows = Vec::with_capacity(shapes.len());
    for t in &shapes {
        rows.push((t.code().to_string(), law(t)?));
    }
    let mut out = sink(a.output.as_deref())?;
    match a.format {
        Format::Json => {
            let table: BTreeMap<&str, f64> = rows.iter().map(|(k, p)| (k.as_str(), *p)).collect();
            let mut v = json!({"config": config, "listed_mass": rows.iter().map(|r| r.1).sum::<f64>(), "law": table});
            if let Some(m) = exact_law {
                v["exact"] = json!(m);
            }
            write_json(&mut out, &v)?;
        }
        Format::Jsonl => {
            writeln!(out, "{}", json!({ "config": config }))?;
            for (k, p) in &rows {
                writeln!(out, "{}", json!({"code": k, "probability": p}))?;
            }
        }
        Format::Csv => {
            write_csv_header(&mut out, &config)?;
            writeln!(out, "code,probability")?;
            for (k, p) in &rows {
                writeln!(out, "{},{p:.17e}", csv_field(k))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn table(a: TableArgs, plot: bool) -> Result<(), CliError> {
    let command = if plot {
        "plot-data"
    } else {
        "convergence-table"
    };
    let config = config_value(command, &a)?;
    let regime = match (a.alpha, a.regime) {
        (Some(alpha), None) | (Some(alpha), Some(RegimeKind::Linear)) => {
            LimitRegime::linear(alpha)?
        }
        (None, Some(RegimeKind::Sublinear)) => LimitRegime::Sublinear,
        (None, Some(RegimeKind::Superlinear)) => LimitRegime::Superlinear,
        (None, Some(RegimeKind::Linear)) => {
            return Err(config_error("the linear regime needs --alpha"))
        }
        (None, None) => {
            return Err(config_error(
                "give --alpha (linear regime) or --regime sublinear|superlinear",
            ))
        }
        (Some(_), Some(_)) => {
            return Err(config_error(
                "--alpha is only meaningful for the linear regime",
            ))
        }
    };
    if a.ns.is_empty() || a.ns.contains(&0) {
        return Err(config_error(
            "--n needs a list of positive sizes, e.g. 100,1000,10000",
        ));
    }
    let shapes = parse_shapes(&a.shapes, a.h, a.max_size)?;
    if let Some(t) = shapes.iter().find(|t| a.ns.iter().any(|&n| t.size() > n)) {
        return Err(config_error(format!(
            "shape {t} has more vertices than the smallest --n"
        )));
    }
    let rows = convergence_table_with(&shapes, a.h, regime, &a.ns, |n| regime.lambda_for(n))?;
    let format = a
        .format
        .unwrap_or(if plot { Format::Json } else { Format::Csv });
    let mut out = sink(a.output.as_deref())?;
    match (format, plot) {
        (Format::Csv, false) => {
            write_csv_header(&mut out, &config)?;
            write_convergence_csv(&rows, &mut out)?;
        }
        (Format::Csv, true) => {
            write_csv_header(&mut out, &config)?;
            writeln!(out, "shape,x,y,limit")?;
            for s in plot_data(&rows) {
                for (x, y) in &s.points {
                    writeln!(out, "{},{x},{y:.17e},{:.17e}", csv_field(&s.shape), s.limit)?;
                }
            }
        }
        (Format::Json, false) => write_json(&mut out, &json!({"config": config, "rows": rows}))?,
        (Format::Json, true) => write_json(
            &mut out,
            &json!({"config": config, "series": plot_data(&rows)}),
        )?,
        (Format::Jsonl, false) => {
            writeln!(out, "{}", json!({ "config": config }))?;
            for r in &rows {
                writeln!(out, "{}", serde_json::to_string(r)?)?;
            }
        }
        (Format::Jsonl, true) => {
            writeln!(out, "{}", json!({ "config": config }))?;
            for s in plot_data(&rows) {
                writeln!(out, "{}", serde_json::to_string(&s)?)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
