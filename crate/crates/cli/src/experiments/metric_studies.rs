//! Edit distances between canonical strings: fixed expression pairs and the
//! distance-1 neighbourhood of sin(x0) + cos(x0).

use std::time::Duration;

use isalsr_core::benchmarks::benchmark;
use isalsr_core::canonical::{canonical, CanonicalRequest, SearchMode};
use isalsr_core::metric::{classify_neighbourhood, levenshtein, EditAlphabet, EditKind, NeighbourhoodReport};
use isalsr_core::{LabeledDag, NodeId, NodeType, OperationSet};
use serde::Serialize;

use super::Check;
use crate::report::Table;

/// Small builder for the fixed expressions, constants anchored at x0.
struct Expr(LabeledDag);

impl Expr {
    fn new(m: usize) -> Self {
        Expr(LabeledDag::new(m).expect("m >= 1"))
    }

    fn unary(&mut self, kind: NodeType, x: NodeId) -> NodeId {
        self.0.add_node_from(kind, 0.0, x).expect("input exists")
    }

    fn op(&mut self, kind: NodeType, xs: &[NodeId]) -> NodeId {
        let v = self.0.add_node_from(kind, 0.0, xs[0]).expect("input exists");
        for &x in &xs[1..] {
            self.0.add_edge(x, v).expect("input exists");
        }
        v
    }

    fn square(&mut self, x: NodeId) -> NodeId {
        let two = self.0.add_node_from(NodeType::Const, 2.0, 0).expect("x0 exists");
        self.op(NodeType::Pow, &[x, two])
    }
}

fn sin_x() -> LabeledDag {
    let mut e = Expr::new(1);
    e.unary(NodeType::Sin, 0);
    e.0
}

fn x_squared_plus_x() -> LabeledDag {
    let mut e = Expr::new(1);
    let sq = e.square(0);
    e.op(NodeType::Add, &[sq, 0]);
    e.0
}

fn sin_cos(kind: NodeType) -> LabeledDag {
    let mut e = Expr::new(1);
    let s = e.unary(NodeType::Sin, 0);
    let c = e.unary(NodeType::Cos, 0);
    e.op(kind, &[s, c]);
    e.0
}

fn x_squared() -> LabeledDag {
    let mut e = Expr::new(1);
    e.square(0);
    e.0
}

fn unary_of_x(kind: NodeType) -> LabeledDag {
    let mut e = Expr::new(1);
    e.unary(kind, 0);
    e.0
}

fn sin_x_plus_y_squared() -> LabeledDag {
    let mut e = Expr::new(2);
    let s = e.unary(NodeType::Sin, 0);
    let sq = e.square(1);
    e.op(NodeType::Add, &[s, sq]);
    e.0
}

fn cos_x_times_y() -> LabeledDag {
    let mut e = Expr::new(2);
    let c = e.unary(NodeType::Cos, 0);
    e.op(NodeType::Mul, &[c, 1]);
    e.0
}

pub struct Pair {
    pub name: &'static str,
    pub left: &'static str,
    pub right: &'static str,
    pub expected: usize,
    pub dags: (LabeledDag, LabeledDag),
}

/// The five fixed pairs plus a zero-distance sanity row.
pub fn pairs() -> Vec<Pair> {
    let nguyen1 = benchmark("Nguyen-1").expect("catalogued").dag;
    vec![
        Pair {
            name: "A",
            left: "sin(x)",
            right: "x^2 + x",
            expected: 10,
            dags: (sin_x(), x_squared_plus_x()),
        },
        Pair {
            name: "B",
            left: "sin(x) + cos(x)",
            right: "sin(x) * cos(x)",
            expected: 1,
            dags: (sin_cos(NodeType::Add), sin_cos(NodeType::Mul)),
        },
        Pair {
            name: "C",
            left: "x^2",
            right: "x^3 + x^2 + x",
            expected: 12,
            dags: (x_squared(), nguyen1),
        },
        Pair {
            name: "D",
            left: "exp(x)",
            right: "log(x)",
            expected: 1,
            dags: (unary_of_x(NodeType::Exp), unary_of_x(NodeType::Log)),
        },
        Pair {
            name: "E",
            left: "sin(x) + y^2",
            right: "cos(x) * y",
            expected: 12,
            dags: (sin_x_plus_y_squared(), cos_x_times_y()),
        },
        Pair {
            name: "same",
            left: "sin(x) + cos(x)",
            right: "sin(x) + cos(x)",
            expected: 0,
            dags: (sin_cos(NodeType::Add), sin_cos(NodeType::Add)),
        },
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairRow {
    pub pair: String,
    pub expr1: String,
    pub expr2: String,
    pub canonical1: String,
    pub canonical2: String,
    pub distance: usize,
    pub expected: usize,
    pub script: String,
    pub script_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ShortestPathReport {
    pub rows: Vec<PairRow>,
}

impl Table for ShortestPathReport {
    type Row = PairRow;
    const HEADER: &'static [&'static str] = &[
        "pair", "expr1", "expr2", "canonical1", "canonical2", "distance", "expected", "script", "script_ok",
    ];
    fn rows(&self) -> &[PairRow] {
        &self.rows
    }
}

fn canon(dag: &LabeledDag, timeout: Duration) -> String {
    canonical(&CanonicalRequest::new(dag, SearchMode::Pruned).deadline(timeout))
        .map(|r| r.string)
        .unwrap_or_default()
}

pub fn run_shortest_path(timeout: Duration) -> ShortestPathReport {
    let rows = pairs()
        .into_iter()
        .map(|p| {
            let (a, b) = (canon(&p.dags.0, timeout), canon(&p.dags.1, timeout));
            let (distance, script) = levenshtein(&a, &b);
            PairRow {
                pair: p.name.to_string(),
                expr1: p.left.to_string(),
                expr2: p.right.to_string(),
                script_ok: script.apply(&a).as_deref() == Ok(b.as_str()) && script.cost() == distance,
                script: script.to_string(),
                canonical1: a,
                canonical2: b,
                distance,
                expected: p.expected,
            }
        })
        .collect();
    ShortestPathReport { rows }
}

pub fn shortest_path_checks(report: &ShortestPathReport) -> Vec<Check> {
    report
        .rows
        .iter()
        .map(|r| {
            Check::new(
                format!("pair {}", r.pair),
                r.distance == r.expected && r.script_ok && !r.canonical1.is_empty() && !r.canonical2.is_empty(),
                format!("{} vs {}: {} (expected {})", r.canonical1, r.canonical2, r.distance, r.expected),
            )
        })
        .collect()
}

/// Total neighbours of a string of length `n` under a 17-entry alphabet:
/// n deletions, 16n substitutions and 17(n + 1) insertions.
pub fn expected_neighbours(n: usize) -> usize {
    n + 16 * n + 17 * (n + 1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeighbourhoodTableRow {
    pub kind: String,
    pub total: usize,
    pub valid: usize,
    pub unique: usize,
    pub back_to_original: usize,
    pub timeouts: usize,
    pub redundancy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NeighbourhoodStudy {
    pub report: NeighbourhoodReport,
    pub table: Vec<NeighbourhoodTableRow>,
}

impl Table for NeighbourhoodStudy {
    type Row = NeighbourhoodTableRow;
    const HEADER: &'static [&'static str] =
        &["kind", "total", "valid", "unique", "back_to_original", "timeouts", "redundancy"];
    fn rows(&self) -> &[NeighbourhoodTableRow] {
        &self.table
    }
}

pub fn neighbourhood_table(report: &NeighbourhoodReport) -> Vec<NeighbourhoodTableRow> {
    let named = report
        .rows
        .iter()
        .map(|(k, r)| (k.name(), r))
        .chain(std::iter::once(("all", &report.all)));
    named
        .map(|(kind, r)| NeighbourhoodTableRow {
            kind: kind.to_string(),
            total: r.total,
            valid: r.valid,
            unique: r.unique,
            back_to_original: r.back_to_original,
            timeouts: r.timeouts,
            redundancy: r.redundancy(),
        })
        .collect()
}

pub fn run_neighbourhood_of(w: &str, m: usize, timeout: Duration) -> NeighbourhoodStudy {
    let report = classify_neighbourhood(w, m, &OperationSet::commutative(), &EditAlphabet::default17(), timeout);
    NeighbourhoodStudy {
        table: neighbourhood_table(&report),
        report,
    }
}

/// The study around the canonical string of sin(x0) + cos(x0).
pub fn run_neighbourhood(timeout: Duration) -> NeighbourhoodStudy {
    let w = canon(&sin_cos(NodeType::Add), timeout);
    run_neighbourhood_of(&w, 1, timeout)
}

pub fn neighbourhood_checks(study: &NeighbourhoodStudy) -> Vec<Check> {
    let all = &study.report.all;
    let expected = expected_neighbours(study.report.string.chars().count());
    let per_kind: usize = study.report.rows.iter().map(|(_, r)| r.total).sum();
    let deletions = study
        .report
        .rows
        .iter()
        .find(|(k, _)| *k == EditKind::Deletion)
        .map_or(0, |(_, r)| r.total);
    vec![
        Check::new(
            "neighbour count",
            all.total == expected && per_kind == expected && deletions == study.report.string.chars().count(),
            format!("{} (expected {expected})", all.total),
        ),
        Check::new(
            "redundancy",
            all.redundancy() >= 0.6,
            format!(
                "{:.1}% (valid {}, unique {}, back to original {})",
                100.0 * all.redundancy(),
                all.valid,
                all.unique,
                all.back_to_original
            ),
        ),
    ]
}
