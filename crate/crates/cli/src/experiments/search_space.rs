//! Search-space size under internal renumbering, and agreement between the
//! canonical string and the isomorphism oracle.
//!
//! Renumbering the k internal nodes of a DAG gives k! labelings, and by
//! orbit-stabilizer exactly k!/|Aut| of them are structurally distinct. The
//! canonical string must be the same for all of them.

use std::collections::HashSet;
use std::time::Duration;

use isalsr_core::canonical::{canonical, CanonicalRequest, SearchMode};
use isalsr_core::generators::{dag_seed, random_dag_seeded, rng, BASE_SEED};
use isalsr_core::isomorphism::{count_automorphisms, is_valid_witness};
use isalsr_core::{isomorphic, LabeledDag};
use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::{run_indexed, Check};
use crate::report::Table;

#[derive(Clone, Debug, Serialize)]
pub struct SearchSpaceConfig {
    pub k_range: (usize, usize),
    pub m_range: (usize, usize),
    pub dags_per_config: usize,
    /// Enumerate all k! permutations up to this k, sample above it.
    pub exhaustive_k_max: usize,
    pub sampled_perms: usize,
    pub invariance_subset: usize,
    pub canon_timeout: Duration,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl SearchSpaceConfig {
    pub fn desk() -> Self {
        SearchSpaceConfig {
            k_range: (1, 8),
            m_range: (1, 2),
            dags_per_config: 10,
            exhaustive_k_max: 8,
            sampled_perms: 50_000,
            invariance_subset: 100,
            canon_timeout: Duration::from_secs(5),
            seed: BASE_SEED,
            workers: None,
        }
    }

    pub fn full_scale() -> Self {
        SearchSpaceConfig {
            k_range: (1, 12),
            dags_per_config: 40,
            ..Self::desk()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DagRow {
    pub k: usize,
    pub m: usize,
    pub index: usize,
    pub seed: u64,
    pub canonical: String,
    pub n_permutations: u64,
    pub exhaustive: bool,
    pub n_distinct: u64,
    pub automorphisms: u64,
    /// Distinct count over k! when enumerated, over the sample size otherwise.
    pub ratio: f64,
    /// `n_distinct * |Aut| == k!`; vacuous for sampled runs.
    pub orbit_ok: bool,
    pub invariance_passed: usize,
    pub invariance_attempted: usize,
    pub invariance_timeouts: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchSpaceReport {
    pub config: SearchSpaceConfig,
    pub rows: Vec<DagRow>,
    /// Configurations that yielded fewer unique DAGs than asked for.
    pub shortfalls: Vec<(usize, usize, usize)>,
}

impl Table for SearchSpaceReport {
    type Row = DagRow;
    const HEADER: &'static [&'static str] = &[
        "k", "m", "index", "seed", "canonical", "n_permutations", "exhaustive", "n_distinct", "automorphisms", "ratio",
        "orbit_ok", "invariance_passed", "invariance_attempted", "invariance_timeouts",
    ];
    fn rows(&self) -> &[DagRow] {
        &self.rows
    }
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

fn canon(dag: &LabeledDag, timeout: Duration) -> Option<String> {
    canonical(&CanonicalRequest::new(dag, SearchMode::Pruned).deadline(timeout))
        .ok()
        .map(|r| r.string)
}

/// Up to `want` DAGs with pairwise different canonical strings.
pub fn unique_dags(k: usize, m: usize, want: usize, base: u64, timeout: Duration) -> Vec<(u64, String, LabeledDag)> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    // small configurations have few classes (k = 1, m = 1 has five)
    for s in 0..want * 30 {
        if out.len() == want {
            break;
        }
        let seed = dag_seed(base, k, m, s);
        let d = random_dag_seeded(k, m, seed);
        if let Some(w) = canon(&d, timeout) {
            if seen.insert(w.clone()) {
                out.push((seed, w, d));
            }
        }
    }
    out
}

fn analyse(cfg: &SearchSpaceConfig, k: usize, m: usize, index: usize, seed: u64, w: String, dag: &LabeledDag) -> DagRow {
    let kf = factorial(k);
    let exhaustive = k <= cfg.exhaustive_k_max;
    let mut r = rng(seed ^ 0x5eed_0f_9e2a);
    let mut distinct = HashSet::new();
    let n_permutations = if exhaustive {
        for perm in (0..k).permutations(k) {
            distinct.insert(dag.remap_internal_ids(&perm).expect("permutation").structural_fingerprint());
        }
        kf
    } else {
        let mut perm: Vec<usize> = (0..k).collect();
        for _ in 0..cfg.sampled_perms {
            perm.shuffle(&mut r);
            distinct.insert(dag.remap_internal_ids(&perm).expect("permutation").structural_fingerprint());
        }
        cfg.sampled_perms as u64
    };
    let n_distinct = distinct.len() as u64;
    let automorphisms = count_automorphisms(dag);

    let (mut passed, mut timeouts) = (0, 0);
    let mut perm: Vec<usize> = (0..k).collect();
    for _ in 0..cfg.invariance_subset {
        perm.shuffle(&mut r);
        match canon(&dag.remap_internal_ids(&perm).expect("permutation"), cfg.canon_timeout) {
            Some(v) if v == w => passed += 1,
            Some(_) => {}
            None => timeouts += 1,
        }
    }
    DagRow {
        k,
        m,
        index,
        seed,
        canonical: w,
        n_permutations,
        exhaustive,
        n_distinct,
        automorphisms,
        ratio: n_distinct as f64 / n_permutations as f64,
        orbit_ok: !exhaustive || n_distinct * automorphisms == kf,
        invariance_passed: passed,
        invariance_attempted: cfg.invariance_subset - timeouts,
        invariance_timeouts: timeouts,
    }
}

pub fn run_search_space(cfg: &SearchSpaceConfig) -> SearchSpaceReport {
    let configs: Vec<(usize, usize)> = (cfg.k_range.0..=cfg.k_range.1)
        .flat_map(|k| (cfg.m_range.0..=cfg.m_range.1).map(move |m| (k, m)))
        .collect();
    let found = run_indexed(configs.len(), cfg.workers, |i| {
        let (k, m) = configs[i];
        unique_dags(k, m, cfg.dags_per_config, cfg.seed, cfg.canon_timeout)
    });
    let mut shortfalls = Vec::new();
    let mut jobs = Vec::new();
    for (&(k, m), dags) in configs.iter().zip(found) {
        if dags.len() < cfg.dags_per_config {
            shortfalls.push((k, m, dags.len()));
        }
        jobs.extend(dags.into_iter().enumerate().map(|(i, d)| (k, m, i, d)));
    }
    let rows = run_indexed(jobs.len(), cfg.workers, |i| {
        let (k, m, index, (seed, w, ref dag)) = jobs[i].clone();
        analyse(cfg, k, m, index, seed, w, dag)
    });
    SearchSpaceReport {
        config: cfg.clone(),
        rows,
        shortfalls,
    }
}

pub fn checks(report: &SearchSpaceReport) -> Vec<Check> {
    let bad_orbit: Vec<String> = report
        .rows
        .iter()
        .filter(|r| !r.orbit_ok)
        .map(|r| format!("k={} m={} #{}", r.k, r.m, r.index))
        .collect();
    let passed: usize = report.rows.iter().map(|r| r.invariance_passed).sum();
    let attempted: usize = report.rows.iter().map(|r| r.invariance_attempted).sum();
    let timeouts: usize = report.rows.iter().map(|r| r.invariance_timeouts).sum();
    vec![
        Check::new(
            "orbit-stabilizer",
            bad_orbit.is_empty(),
            if bad_orbit.is_empty() {
                format!("{} DAGs", report.rows.len())
            } else {
                bad_orbit.join(", ")
            },
        ),
        Check::new(
            "canonical invariance",
            passed == attempted,
            format!("{passed}/{attempted} ({timeouts} timeouts)"),
        ),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairRow {
    pub index: usize,
    pub k: usize,
    pub m: usize,
    pub isomorphic: bool,
    pub witness_valid: bool,
    pub pruned_equal: bool,
    pub exhaustive_equal: bool,
    pub agree: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub rows: Vec<PairRow>,
    pub isomorphic_pairs: usize,
    pub agreements: usize,
}

impl Table for OracleReport {
    type Row = PairRow;
    const HEADER: &'static [&'static str] =
        &["index", "k", "m", "isomorphic", "witness_valid", "pruned_equal", "exhaustive_equal", "agree"];
    fn rows(&self) -> &[PairRow] {
        &self.rows
    }
}

/// Random pairs drawn from a small pool per `(k, m)`, half of them with the
/// second graph renumbered, so isomorphic and non-isomorphic pairs both occur.
pub fn random_pair(index: usize, k_max: usize, base: u64) -> (usize, usize, LabeledDag, LabeledDag) {
    let k = 1 + index % k_max;
    let m = 1 + (index / k_max) % 2;
    let mut r = rng(base.wrapping_add(1_000_000 + index as u64));
    let pool = |r: &mut rand_chacha::ChaCha8Rng| dag_seed(base, k, m, r.random_range(0..3));
    let a = random_dag_seeded(k, m, pool(&mut r));
    let mut b = random_dag_seeded(k, m, pool(&mut r));
    if r.random_bool(0.5) {
        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(&mut r);
        b = b.remap_internal_ids(&perm).expect("permutation");
    }
    (k, m, a, b)
}

pub fn run_oracle_agreement(pairs: usize, k_max: usize, base: u64, workers: Option<usize>) -> OracleReport {
    let rows = run_indexed(pairs, workers, |index| {
        let (k, m, a, b) = random_pair(index, k_max, base);
        let witness = isomorphic(&a, &b);
        let eq = |mode| {
            let c = |d: &LabeledDag| canonical(&CanonicalRequest::new(d, mode)).map(|r| r.string);
            c(&a).ok().zip(c(&b).ok()).is_some_and(|(x, y)| x == y)
        };
        let (pruned_equal, exhaustive_equal) = (eq(SearchMode::Pruned), eq(SearchMode::Exhaustive));
        let iso = witness.is_some();
        PairRow {
            index,
            k,
            m,
            isomorphic: iso,
            witness_valid: witness.as_ref().is_none_or(|w| is_valid_witness(&a, &b, w)),
            pruned_equal,
            exhaustive_equal,
            agree: pruned_equal == iso && exhaustive_equal == iso,
        }
    });
    OracleReport {
        isomorphic_pairs: rows.iter().filter(|r| r.isomorphic).count(),
        agreements: rows.iter().filter(|r| r.agree && r.witness_valid).count(),
        rows,
    }
}
