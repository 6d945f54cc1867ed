//! Round-trip properties over random instruction strings.
//!
//! P1: greedy encode then decode gives an isomorphic graph. P2: every decoded
//! graph sorts topologically. P3: the canonical string decodes back to the
//! encoded graph and is stable under a second canonicalization. P4: the
//! greedy round trip evaluates identically.

use std::time::{Duration, Instant};

use isalsr_core::canonical::{canonical, canonical_input, CanonError, CanonicalRequest, SearchMode};
use isalsr_core::generators::{random_string, string_seed, BASE_SEED};
use isalsr_core::isomorphism::IsoWitness;
use isalsr_core::{d2s, isomorphic, s2d, LabeledDag, OperationSet};
use serde::Serialize;

use super::{run_indexed, Check};
use crate::report::Table;
use crate::stats::clopper_pearson;

/// Grid each variable sweeps; point `i` sets every variable to `GRID[i]`.
pub const GRID: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

#[derive(Clone, Debug, Serialize)]
pub struct PropertiesConfig {
    pub m_list: Vec<usize>,
    pub n_per_m: usize,
    pub max_tokens: usize,
    pub canon_timeout: Duration,
    pub tolerance: f64,
    pub strip_var_inputs: bool,
    /// P3 is by far the slowest property; switching it off leaves P1/P2/P4.
    pub run_p3: bool,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl PropertiesConfig {
    pub fn desk() -> Self {
        PropertiesConfig {
            m_list: vec![1, 2, 3],
            n_per_m: 500,
            max_tokens: 20,
            canon_timeout: Duration::from_secs(2),
            tolerance: 1e-8,
            strip_var_inputs: false,
            run_p3: true,
            seed: BASE_SEED,
            workers: None,
        }
    }

    pub fn full_scale() -> Self {
        PropertiesConfig {
            n_per_m: 5000,
            ..Self::desk()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum P3Status {
    Pass,
    Fail,
    Timeout,
    Unencodable,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRow {
    pub m: usize,
    pub sample: usize,
    pub seed: u64,
    pub text: String,
    pub valid: bool,
    pub nodes: usize,
    pub edges: usize,
    pub var_inputs: bool,
    pub p1: bool,
    pub p2: bool,
    pub p4: bool,
    pub p3: P3Status,
    pub p3_cause: String,
    /// Wall time of the P3 check; excluded from determinism comparisons.
    pub p3_ms: f64,
}

impl SampleRow {
    pub const HEADER: &'static [&'static str] = &[
        "m", "sample", "seed", "text", "valid", "nodes", "edges", "var_inputs", "p1", "p2", "p4", "p3", "p3_cause", "p3_ms",
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub m: String,
    pub samples: usize,
    pub valid: usize,
    pub p1_pass: usize,
    pub p2_pass: usize,
    pub p4_pass: usize,
    pub p3_eval: usize,
    pub p3_pass: usize,
    pub p3_timeout: usize,
    pub p3_unencodable: usize,
    pub p3_lo: f64,
    pub p3_hi: f64,
}

/// Pass rate of one property with its exact 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRow {
    pub m: String,
    pub property: String,
    pub passed: usize,
    pub trials: usize,
    pub rate: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertiesReport {
    pub config: PropertiesConfig,
    pub summary: Vec<SummaryRow>,
    pub rates: Vec<RateRow>,
    pub samples: Vec<SampleRow>,
}

pub struct Summary<'a>(pub &'a PropertiesReport);
pub struct Samples<'a>(pub &'a PropertiesReport);

impl Table for Summary<'_> {
    type Row = SummaryRow;
    const HEADER: &'static [&'static str] = &[
        "m", "samples", "valid", "p1_pass", "p2_pass", "p4_pass", "p3_eval", "p3_pass", "p3_timeout", "p3_unencodable",
        "p3_lo", "p3_hi",
    ];
    fn rows(&self) -> &[SummaryRow] {
        &self.0.summary
    }
}

impl Table for Samples<'_> {
    type Row = SampleRow;
    const HEADER: &'static [&'static str] = SampleRow::HEADER;
    fn rows(&self) -> &[SampleRow] {
        &self.0.samples
    }
}

fn grid_points(m: usize) -> impl Iterator<Item = Vec<f64>> {
    GRID.iter().map(move |&g| vec![g; m])
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    // matching protected fallbacks and matching failures both count
    a == b || (!a.is_finite() && !b.is_finite()) || (a - b).abs() < tol
}

/// Every node of `a` evaluates like its image in `b`.
fn same_values(a: &LabeledDag, b: &LabeledDag, witness: Option<&IsoWitness>, tol: f64) -> bool {
    grid_points(a.num_vars()).all(|x| match (a.evaluate(&x), b.evaluate(&x)) {
        (Ok(va), Ok(vb)) => match witness {
            Some(w) => (0..va.len()).all(|v| close(va[v], vb[w.map(v)], tol)),
            None => {
                let (mut sa, mut sb) = (va, vb);
                sa.sort_by(f64::total_cmp);
                sb.sort_by(f64::total_cmp);
                sa.len() == sb.len() && sa.iter().zip(&sb).all(|(x, y)| close(*x, *y, tol))
            }
        },
        (Err(_), Err(_)) => true,
        _ => false,
    })
}

/// P3 for one graph.
pub fn check_p3(dag: &LabeledDag, strip: bool, timeout: Duration) -> (P3Status, String) {
    let m = dag.num_vars();
    let full = OperationSet::full();
    let run = |d: &LabeledDag| {
        canonical(&CanonicalRequest::new(d, SearchMode::Pruned).deadline(timeout).normalize_var_inputs(strip))
    };
    let w = match run(dag) {
        Ok(r) => r.string,
        Err(CanonError::Timeout { .. }) => return (P3Status::Timeout, String::new()),
        Err(CanonError::Unencodable(why)) => return (P3Status::Unencodable, why),
    };
    let target = match canonical_input(dag, strip) {
        Ok(t) => t,
        Err(e) => return (P3Status::Unencodable, e.to_string()),
    };
    let back = match s2d(&w, m, &full) {
        Ok(b) => b,
        Err(e) => return (P3Status::Fail, format!("canonical string does not decode: {e}")),
    };
    if isomorphic(&target, &back).is_none() {
        return (P3Status::Fail, "decoded canonical string is not isomorphic".into());
    }
    match run(&back) {
        Ok(r) if r.string == w => (P3Status::Pass, String::new()),
        Ok(r) => (P3Status::Fail, format!("second canonicalization gave {}", r.string)),
        Err(CanonError::Timeout { .. }) => (P3Status::Timeout, "second canonicalization timed out".into()),
        Err(CanonError::Unencodable(why)) => (P3Status::Fail, format!("decoded graph unencodable: {why}")),
    }
}

pub fn sample_graph(cfg: &PropertiesConfig, m: usize, sample: usize) -> (u64, Option<(String, LabeledDag)>) {
    let seed = string_seed(cfg.seed, m, sample);
    let r = random_string(cfg.max_tokens, m, &OperationSet::full(), seed);
    (seed, r.map(|r| (r.text, r.dag)))
}

fn run_sample(cfg: &PropertiesConfig, m: usize, sample: usize) -> SampleRow {
    let (seed, drawn) = sample_graph(cfg, m, sample);
    let mut row = SampleRow {
        m,
        sample,
        seed,
        text: String::new(),
        valid: false,
        nodes: 0,
        edges: 0,
        var_inputs: false,
        p1: false,
        p2: false,
        p4: false,
        p3: P3Status::Skipped,
        p3_cause: String::new(),
        p3_ms: 0.0,
    };
    let Some((text, dag)) = drawn else {
        return row;
    };
    row.text = text;
    row.valid = true;
    row.nodes = dag.len();
    row.edges = dag.edge_count();
    row.var_inputs = dag.has_var_inputs();
    row.p2 = dag.topological_order().is_some_and(|o| o.len() == dag.len());

    let round_trip = d2s(&dag)
        .ok()
        .and_then(|w| s2d(&w, m, &OperationSet::full()).ok());
    if let Some(back) = &round_trip {
        let witness = isomorphic(&dag, back);
        row.p1 = witness.is_some();
        row.p2 &= back.topological_order().is_some_and(|o| o.len() == back.len());
        row.p4 = same_values(&dag, back, witness.as_ref(), cfg.tolerance);
    }

    if cfg.run_p3 {
        let start = Instant::now();
        let (status, cause) = check_p3(&dag, cfg.strip_var_inputs, cfg.canon_timeout);
        row.p3 = status;
        row.p3_cause = cause;
        row.p3_ms = start.elapsed().as_secs_f64() * 1e3;
    }
    row
}

fn rate(m: &str, property: &str, passed: usize, trials: usize) -> RateRow {
    let (lo, hi) = if trials == 0 {
        (0.0, 1.0)
    } else {
        clopper_pearson(passed as u64, trials as u64, 0.95).expect("valid counts")
    };
    RateRow {
        m: m.to_string(),
        property: property.to_string(),
        passed,
        trials,
        rate: if trials == 0 { 0.0 } else { passed as f64 / trials as f64 },
        lo,
        hi,
    }
}

fn summarize(label: &str, rows: &[&SampleRow], out: &mut Vec<SummaryRow>, rates: &mut Vec<RateRow>) {
    let valid: Vec<&&SampleRow> = rows.iter().filter(|r| r.valid).collect();
    let count = |f: &dyn Fn(&SampleRow) -> bool| valid.iter().filter(|r| f(r)).count();
    let p3 = |s: P3Status| count(&|r| r.p3 == s);
    let p3_pass = p3(P3Status::Pass);
    let p3_eval = p3_pass + p3(P3Status::Fail) + p3(P3Status::Unencodable);
    let p3_rate = rate(label, "p3", p3_pass, p3_eval);
    let (p1, p2, p4) = (count(&|r| r.p1), count(&|r| r.p2), count(&|r| r.p4));
    rates.push(rate(label, "p1", p1, valid.len()));
    rates.push(rate(label, "p2", p2, valid.len()));
    rates.push(rate(label, "p4", p4, valid.len()));
    out.push(SummaryRow {
        m: label.to_string(),
        samples: rows.len(),
        valid: valid.len(),
        p1_pass: p1,
        p2_pass: p2,
        p4_pass: p4,
        p3_eval,
        p3_pass,
        p3_timeout: p3(P3Status::Timeout),
        p3_unencodable: p3(P3Status::Unencodable),
        p3_lo: p3_rate.lo,
        p3_hi: p3_rate.hi,
    });
    rates.push(p3_rate);
}

fn assemble(config: PropertiesConfig, samples: Vec<SampleRow>) -> PropertiesReport {
    let mut summary = Vec::new();
    let mut rates = Vec::new();
    for &m in &config.m_list {
        let rows: Vec<&SampleRow> = samples.iter().filter(|r| r.m == m).collect();
        summarize(&m.to_string(), &rows, &mut summary, &mut rates);
    }
    let all: Vec<&SampleRow> = samples.iter().collect();
    summarize("all", &all, &mut summary, &mut rates);
    PropertiesReport {
        config,
        summary,
        rates,
        samples,
    }
}

pub fn run_properties(config: &PropertiesConfig) -> PropertiesReport {
    let jobs: Vec<(usize, usize)> = config
        .m_list
        .iter()
        .flat_map(|&m| (0..config.n_per_m).map(move |s| (m, s)))
        .collect();
    let samples = run_indexed(jobs.len(), config.workers, |i| run_sample(config, jobs[i].0, jobs[i].1));
    assemble(config.clone(), samples)
}

/// The report `run_properties` would give with `strip_var_inputs` on,
/// reusing P3 results of graphs that have no edge into a variable (the strip
/// leaves those unchanged).
pub fn with_stripped_p3(report: &PropertiesReport) -> PropertiesReport {
    let mut config = report.config.clone();
    config.strip_var_inputs = true;
    let cfg = &config;
    let samples = run_indexed(report.samples.len(), cfg.workers, |i| {
        let mut row = report.samples[i].clone();
        if row.valid && row.var_inputs && cfg.run_p3 {
            let (_, drawn) = sample_graph(cfg, row.m, row.sample);
            let (_, dag) = drawn.expect("sample was valid");
            let start = Instant::now();
            let (status, cause) = check_p3(&dag, true, cfg.canon_timeout);
            row.p3 = status;
            row.p3_cause = cause;
            row.p3_ms = start.elapsed().as_secs_f64() * 1e3;
        }
        row
    });
    assemble(config, samples)
}

/// Every P3 failure is an unencodable graph with an edge into a variable.
pub fn failures_are_var_inputs(report: &PropertiesReport) -> bool {
    report
        .samples
        .iter()
        .filter(|r| matches!(r.p3, P3Status::Fail | P3Status::Unencodable))
        .all(|r| r.p3 == P3Status::Unencodable && r.var_inputs)
}

pub fn checks(report: &PropertiesReport) -> Vec<Check> {
    let all = report.summary.last().expect("summary has an all row");
    let mut out = vec![
        Check::new("p1", all.p1_pass == all.valid, format!("{}/{}", all.p1_pass, all.valid)),
        Check::new("p2", all.p2_pass == all.valid, format!("{}/{}", all.p2_pass, all.valid)),
        Check::new("p4", all.p4_pass == all.valid, format!("{}/{}", all.p4_pass, all.valid)),
    ];
    if report.config.run_p3 {
        let detail = format!(
            "{}/{} passed, {} timeouts, {} unencodable",
            all.p3_pass, all.p3_eval, all.p3_timeout, all.p3_unencodable
        );
        if report.config.strip_var_inputs {
            out.push(Check::new("p3", all.p3_pass == all.p3_eval, detail));
        } else {
            out.push(Check::new("p3 failures are edge-into-variable", failures_are_var_inputs(report), detail));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(run_p3: bool) -> PropertiesConfig {
        PropertiesConfig {
            n_per_m: 25,
            run_p3,
            workers: Some(2),
            ..PropertiesConfig::desk()
        }
    }

    #[test]
    fn small_run_passes_and_counts_add_up() {
        let r = run_properties(&small(true));
        assert_eq!(r.samples.len(), 75);
        assert_eq!(r.summary.len(), 4);
        let all = r.summary.last().unwrap();
        assert_eq!(all.m, "all");
        assert_eq!(all.samples, 75);
        assert_eq!(all.valid, r.summary[..3].iter().map(|s| s.valid).sum::<usize>());
        assert!(all.p3_eval + all.p3_timeout <= all.valid);
        for c in checks(&r) {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn worker_count_does_not_change_rows() {
        let strip_time = |r: PropertiesReport| {
            r.samples
                .into_iter()
                .map(|mut s| {
                    s.p3_ms = 0.0;
                    s
                })
                .collect::<Vec<_>>()
        };
        let a = run_properties(&PropertiesConfig { workers: Some(1), ..small(false) });
        let b = run_properties(&PropertiesConfig { workers: Some(3), ..small(false) });
        assert_eq!(strip_time(a), strip_time(b));
    }

    #[test]
    fn evaluation_matching_rule() {
        assert!(close(f64::NAN, f64::INFINITY, 1e-8));
        assert!(close(1.0, 1.0 + 1e-12, 1e-8));
        assert!(!close(1.0, f64::NAN, 1e-8));
        assert!(!close(1.0, 1.1, 1e-8));
    }

    #[test]
    fn edge_into_a_variable_is_unencodable_until_stripped() {
        // the trailing C adds Neg -> x0, and the constant anchored at x0 closes a cycle
        let d = s2d("NVkNC", 2, &OperationSet::full()).unwrap();
        assert!(d.has_var_inputs());
        assert_eq!(check_p3(&d, false, Duration::from_secs(1)).0, P3Status::Unencodable);
        assert_eq!(check_p3(&d, true, Duration::from_secs(1)).0, P3Status::Pass);
    }

    #[test]
    fn timeouts_leave_the_denominator() {
        let mk = |p3| SampleRow {
            m: 1,
            sample: 0,
            seed: 0,
            text: "Vs".into(),
            valid: true,
            nodes: 2,
            edges: 1,
            var_inputs: false,
            p1: true,
            p2: true,
            p4: true,
            p3,
            p3_cause: String::new(),
            p3_ms: 0.0,
        };
        let r = assemble(
            PropertiesConfig { m_list: vec![1], ..small(true) },
            vec![mk(P3Status::Pass), mk(P3Status::Timeout), mk(P3Status::Pass)],
        );
        let all = &r.summary[1];
        assert_eq!((all.p3_eval, all.p3_pass, all.p3_timeout), (2, 2, 1));
        assert_eq!(all.p3_hi, 1.0);
    }
}
