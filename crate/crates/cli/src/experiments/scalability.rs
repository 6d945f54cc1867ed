//! Wall time of exhaustive against pruned canonicalization on random DAGs.

use std::time::{Duration, Instant};

use isalsr_core::canonical::{canonical, CanonicalRequest, SearchMode};
use isalsr_core::generators::{dag_seed, random_dag_seeded, BASE_SEED};
use isalsr_core::LabeledDag;
use serde::Serialize;

use super::{run_indexed, Check};
use crate::report::Table;
use crate::stats::Summary;

#[derive(Clone, Debug, Serialize)]
pub struct ScalabilityConfig {
    pub k_range: (usize, usize),
    pub m_range: (usize, usize),
    pub samples: usize,
    pub timeout: Duration,
    /// Each completed search is repeated and the fastest run kept, which
    /// takes most scheduler noise out of sub-millisecond timings.
    pub repeats: usize,
    /// Pruned must not be slower from this k on.
    pub speed_check_from: usize,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl ScalabilityConfig {
    pub fn desk() -> Self {
        ScalabilityConfig {
            k_range: (1, 10),
            m_range: (1, 3),
            samples: 30,
            timeout: Duration::from_secs(10),
            repeats: 3,
            speed_check_from: 6,
            seed: BASE_SEED,
            workers: None,
        }
    }

    pub fn full_scale() -> Self {
        ScalabilityConfig {
            k_range: (1, 15),
            samples: 200,
            timeout: Duration::from_secs(120),
            ..Self::desk()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRow {
    pub k: usize,
    pub m: usize,
    pub sample: usize,
    pub seed: u64,
    pub exhaustive: Option<String>,
    pub pruned: Option<String>,
    pub exhaustive_ms: Option<f64>,
    pub pruned_ms: Option<f64>,
    pub exhaustive_branches: Option<u64>,
    pub pruned_branches: Option<u64>,
}

impl RunRow {
    /// `None` unless both searches finished.
    pub fn agree(&self) -> Option<bool> {
        Some(self.exhaustive.as_ref()? == self.pruned.as_ref()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigRow {
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub exhaustive_timeouts: usize,
    pub pruned_timeouts: usize,
    pub exhaustive_median_ms: Option<f64>,
    pub exhaustive_iqr_ms: Option<f64>,
    pub pruned_median_ms: Option<f64>,
    pub pruned_iqr_ms: Option<f64>,
    pub speedup: Option<f64>,
    pub compared: usize,
    pub agree: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalabilityReport {
    pub config: ScalabilityConfig,
    pub summary: Vec<ConfigRow>,
    pub runs: Vec<RunRow>,
}

pub struct Summaries<'a>(pub &'a ScalabilityReport);
pub struct Runs<'a>(pub &'a ScalabilityReport);

impl Table for Summaries<'_> {
    type Row = ConfigRow;
    const HEADER: &'static [&'static str] = &[
        "k", "m", "n", "exhaustive_timeouts", "pruned_timeouts", "exhaustive_median_ms", "exhaustive_iqr_ms",
        "pruned_median_ms", "pruned_iqr_ms", "speedup", "compared", "agree",
    ];
    fn rows(&self) -> &[ConfigRow] {
        &self.0.summary
    }
}

impl Table for Runs<'_> {
    type Row = RunRow;
    const HEADER: &'static [&'static str] = &[
        "k", "m", "sample", "seed", "exhaustive", "pruned", "exhaustive_ms", "pruned_ms", "exhaustive_branches",
        "pruned_branches",
    ];
    fn rows(&self) -> &[RunRow] {
        &self.0.runs
    }
}

fn timed(dag: &LabeledDag, mode: SearchMode, cfg: &ScalabilityConfig) -> Option<(String, f64, u64)> {
    let mut best: Option<(String, f64, u64)> = None;
    for _ in 0..cfg.repeats.max(1) {
        let start = Instant::now();
        let r = canonical(&CanonicalRequest::new(dag, mode).deadline(cfg.timeout)).ok()?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        if best.as_ref().is_none_or(|b| ms < b.1) {
            best = Some((r.string, ms, r.branch_count));
        }
    }
    best
}

fn run_one(cfg: &ScalabilityConfig, k: usize, m: usize, sample: usize) -> RunRow {
    let seed = dag_seed(cfg.seed, k, m, sample);
    let dag = random_dag_seeded(k, m, seed);
    let ex = timed(&dag, SearchMode::Exhaustive, cfg);
    let pr = timed(&dag, SearchMode::Pruned, cfg);
    RunRow {
        k,
        m,
        sample,
        seed,
        exhaustive_ms: ex.as_ref().map(|r| r.1),
        pruned_ms: pr.as_ref().map(|r| r.1),
        exhaustive_branches: ex.as_ref().map(|r| r.2),
        pruned_branches: pr.as_ref().map(|r| r.2),
        exhaustive: ex.map(|r| r.0),
        pruned: pr.map(|r| r.0),
    }
}

fn summarize(k: usize, m: usize, runs: &[&RunRow]) -> ConfigRow {
    let times = |f: fn(&RunRow) -> Option<f64>| runs.iter().filter_map(|r| f(r)).collect::<Vec<f64>>();
    let ex = Summary::of(&times(|r| r.exhaustive_ms));
    let pr = Summary::of(&times(|r| r.pruned_ms));
    let compared: Vec<bool> = runs.iter().filter_map(|r| r.agree()).collect();
    ConfigRow {
        k,
        m,
        n: runs.len(),
        exhaustive_timeouts: runs.iter().filter(|r| r.exhaustive.is_none()).count(),
        pruned_timeouts: runs.iter().filter(|r| r.pruned.is_none()).count(),
        exhaustive_median_ms: ex.map(|s| s.median),
        exhaustive_iqr_ms: ex.map(|s| s.iqr()),
        pruned_median_ms: pr.map(|s| s.median),
        pruned_iqr_ms: pr.map(|s| s.iqr()),
        speedup: ex.zip(pr).map(|(e, p)| e.median / p.median),
        compared: compared.len(),
        agree: compared.iter().filter(|&&a| a).count(),
    }
}

pub fn run_scalability(cfg: &ScalabilityConfig) -> ScalabilityReport {
    let configs: Vec<(usize, usize)> = (cfg.k_range.0..=cfg.k_range.1)
        .flat_map(|k| (cfg.m_range.0..=cfg.m_range.1).map(move |m| (k, m)))
        .collect();
    let jobs: Vec<(usize, usize, usize)> = configs
        .iter()
        .flat_map(|&(k, m)| (0..cfg.samples).map(move |s| (k, m, s)))
        .collect();
    let runs = run_indexed(jobs.len(), cfg.workers, |i| run_one(cfg, jobs[i].0, jobs[i].1, jobs[i].2));
    let summary = configs
        .iter()
        .map(|&(k, m)| {
            let these: Vec<&RunRow> = runs.iter().filter(|r| r.k == k && r.m == m).collect();
            summarize(k, m, &these)
        })
        .collect();
    ScalabilityReport {
        config: cfg.clone(),
        summary,
        runs,
    }
}

/// Median per mode over all completed runs with this `k`.
pub fn medians_for_k(report: &ScalabilityReport, k: usize) -> (Option<f64>, Option<f64>) {
    let pick = |f: fn(&RunRow) -> Option<f64>| {
        let v: Vec<f64> = report.runs.iter().filter(|r| r.k == k).filter_map(f).collect();
        Summary::of(&v).map(|s| s.median)
    };
    (pick(|r| r.exhaustive_ms), pick(|r| r.pruned_ms))
}

pub fn checks(report: &ScalabilityReport) -> Vec<Check> {
    let cfg = &report.config;
    let mut slower = Vec::new();
    for k in cfg.speed_check_from.max(cfg.k_range.0)..=cfg.k_range.1 {
        if let (Some(e), Some(p)) = medians_for_k(report, k) {
            if p > e {
                slower.push(format!("k={k}: pruned {p:.3} ms > exhaustive {e:.3} ms"));
            }
        }
    }
    let compared: usize = report.summary.iter().map(|s| s.compared).sum();
    let agree: usize = report.summary.iter().map(|s| s.agree).sum();
    vec![
        Check::new(
            "pruned not slower",
            slower.is_empty(),
            if slower.is_empty() {
                format!("k >= {}", cfg.speed_check_from)
            } else {
                slower.join("; ")
            },
        ),
        Check::new("pruned equals exhaustive", agree == compared, format!("{agree}/{compared} identical")),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_shapes() {
        let cfg = ScalabilityConfig {
            k_range: (1, 3),
            m_range: (1, 2),
            samples: 4,
            repeats: 1,
            workers: Some(1),
            ..ScalabilityConfig::desk()
        };
        let r = run_scalability(&cfg);
        assert_eq!(r.runs.len(), 24);
        assert_eq!(r.summary.len(), 6);
        for s in &r.summary {
            assert_eq!(s.n, 4);
            assert_eq!(s.exhaustive_timeouts + s.pruned_timeouts, 0);
            assert_eq!(s.compared, 4);
            assert!(s.speedup.unwrap() > 0.0);
        }
        // single insertions leave nothing to prune
        assert!(r.runs.iter().filter(|x| x.k == 1).all(|x| x.agree() == Some(true)));
    }

    #[test]
    fn timeouts_are_counted_not_timed() {
        let row = RunRow {
            k: 9,
            m: 1,
            sample: 0,
            seed: 0,
            exhaustive: None,
            pruned: Some("Vs".into()),
            exhaustive_ms: None,
            pruned_ms: Some(2.0),
            exhaustive_branches: None,
            pruned_branches: Some(1),
        };
        let s = summarize(9, 1, &[&row, &row]);
        assert_eq!((s.exhaustive_timeouts, s.pruned_timeouts, s.compared), (2, 0, 0));
        assert_eq!(s.exhaustive_median_ms, None);
        assert_eq!(s.pruned_median_ms, Some(2.0));
        assert_eq!(s.speedup, None);
    }
}
