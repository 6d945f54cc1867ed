//! Nguyen and AI Feynman benchmark expressions as hand-built DAGs.
//!
//! Conventions: powers are `Pow(base, Const)`, square roots use exponent 0.5,
//! constants hang off node 0 and equal values share one node, differences
//! and quotients go through `Neg`/`Inv`, and sums/products are flattened.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dag::{LabeledDag, NodeId, NodeType};
use crate::generators::{rng, BASE_SEED};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown benchmark '{0}'")]
pub struct UnknownBenchmark(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Suite {
    Nguyen,
    Feynman,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Debug)]
pub struct Benchmark {
    pub name: &'static str,
    pub formula: &'static str,
    pub suite: Suite,
    pub m: usize,
    /// Sampling interval per variable.
    pub ranges: Vec<(f64, f64)>,
    pub dag: LabeledDag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

struct Builder {
    dag: LabeledDag,
    consts: Vec<(f64, NodeId)>,
}

impl Builder {
    fn new(m: usize) -> Self {
        Builder {
            dag: LabeledDag::new(m).expect("m >= 1"),
            consts: Vec::new(),
        }
    }

    fn konst(&mut self, value: f64) -> NodeId {
        if let Some(&(_, id)) = self.consts.iter().find(|(v, _)| *v == value) {
            return id;
        }
        let id = self.dag.add_node_from(NodeType::Const, value, 0).expect("node 0 exists");
        self.consts.push((value, id));
        id
    }

    fn op(&mut self, kind: NodeType, inputs: &[NodeId]) -> NodeId {
        let v = self.dag.add_node_from(kind, 0.0, inputs[0]).expect("inputs exist");
        for &u in &inputs[1..] {
            self.dag.add_edge(u, v).expect("inputs exist");
        }
        v
    }

    fn pow(&mut self, base: NodeId, exponent: f64) -> NodeId {
        let e = self.konst(exponent);
        self.op(NodeType::Pow, &[base, e])
    }

    fn add(&mut self, inputs: &[NodeId]) -> NodeId {
        self.op(NodeType::Add, inputs)
    }

    fn mul(&mut self, inputs: &[NodeId]) -> NodeId {
        self.op(NodeType::Mul, inputs)
    }

    fn unary(&mut self, kind: NodeType, input: NodeId) -> NodeId {
        self.op(kind, &[input])
    }

    fn finish(self) -> LabeledDag {
        self.dag
    }
}

/// `x + x^2 + ... + x^n`, highest power first.
fn polynomial(n: u32) -> LabeledDag {
    let mut b = Builder::new(1);
    let mut terms: Vec<NodeId> = (2..=n).rev().map(|e| b.pow(0, e as f64)).collect();
    terms.push(0);
    b.add(&terms);
    b.finish()
}

fn build(name: &str) -> Option<LabeledDag> {
    use NodeType::*;
    let dag = match name {
        "Nguyen-1" => polynomial(3),
        "Nguyen-2" => polynomial(4),
        "Nguyen-3" => polynomial(5),
        "Nguyen-4" => polynomial(6),
        "Nguyen-5" => {
            let mut b = Builder::new(1);
            let sq = b.pow(0, 2.0);
            let s = b.unary(Sin, sq);
            let c = b.unary(Cos, 0);
            let prod = b.mul(&[s, c]);
            let k = b.konst(-1.0);
            b.add(&[prod, k]);
            b.finish()
        }
        "Nguyen-6" => {
            let mut b = Builder::new(1);
            let s1 = b.unary(Sin, 0);
            let sq = b.pow(0, 2.0);
            let inner = b.add(&[0, sq]);
            let s2 = b.unary(Sin, inner);
            b.add(&[s1, s2]);
            b.finish()
        }
        "Nguyen-7" => {
            let mut b = Builder::new(1);
            let one = b.konst(1.0);
            let a1 = b.add(&[0, one]);
            let l1 = b.unary(Log, a1);
            let sq = b.pow(0, 2.0);
            let a2 = b.add(&[sq, one]);
            let l2 = b.unary(Log, a2);
            b.add(&[l1, l2]);
            b.finish()
        }
        "Nguyen-8" => {
            let mut b = Builder::new(1);
            b.pow(0, 0.5);
            b.finish()
        }
        "Nguyen-9" => {
            let mut b = Builder::new(2);
            let s1 = b.unary(Sin, 0);
            let sq = b.pow(1, 2.0);
            let s2 = b.unary(Sin, sq);
            b.add(&[s1, s2]);
            b.finish()
        }
        "Nguyen-10" => {
            let mut b = Builder::new(2);
            let two = b.konst(2.0);
            let s = b.unary(Sin, 0);
            let c = b.unary(Cos, 1);
            b.mul(&[two, s, c]);
            b.finish()
        }
        "Nguyen-11" => {
            let mut b = Builder::new(2);
            b.op(Pow, &[0, 1]);
            b.finish()
        }
        "Nguyen-12" => {
            // x^4 - x^3 + y^2/2 - y
            let mut b = Builder::new(2);
            let x4 = b.pow(0, 4.0);
            let minus = b.konst(-1.0);
            let x3 = b.pow(0, 3.0);
            let t2 = b.mul(&[minus, x3]);
            let y2 = b.pow(1, 2.0);
            let half = b.konst(0.5);
            let t3 = b.mul(&[y2, half]);
            let t4 = b.mul(&[minus, 1]);
            b.add(&[x4, t2, t3, t4]);
            b.finish()
        }
        "I.6.20a" => {
            // exp(-theta^2 / 2) / sqrt(2 pi)
            let mut b = Builder::new(1);
            let sq = b.pow(0, 2.0);
            let neg = b.unary(Neg, sq);
            let two = b.konst(2.0);
            let half = b.unary(Inv, two);
            let arg = b.mul(&[neg, half]);
            let e = b.unary(Exp, arg);
            let pi = b.konst(PI);
            let tau = b.mul(&[two, pi]);
            let root = b.pow(tau, 0.5);
            let norm = b.unary(Inv, root);
            b.mul(&[e, norm]);
            b.finish()
        }
        "I.12.1" | "I.34.27" => {
            let mut b = Builder::new(2);
            b.mul(&[0, 1]);
            b.finish()
        }
        "I.25.13" => {
            let mut b = Builder::new(2);
            let inv = b.unary(Inv, 1);
            b.mul(&[0, inv]);
            b.finish()
        }
        "I.39.10" => {
            let mut b = Builder::new(2);
            let two = b.konst(2.0);
            let half = b.unary(Inv, two);
            b.mul(&[0, 1, half]);
            b.finish()
        }
        "II.3.24" => {
            let mut b = Builder::new(2);
            let four = b.konst(4.0);
            let pi = b.konst(PI);
            let den = b.mul(&[four, pi]);
            let inv = b.unary(Inv, den);
            b.mul(&[0, 1, inv]);
            b.finish()
        }
        "I.14.3" => {
            let mut b = Builder::new(3);
            b.mul(&[0, 1, 2]);
            b.finish()
        }
        "I.12.4" => {
            // q1 / (4 pi r c)
            let mut b = Builder::new(3);
            let four = b.konst(4.0);
            let pi = b.konst(PI);
            let den = b.mul(&[four, pi, 1, 2]);
            let inv = b.unary(Inv, den);
            b.mul(&[0, inv]);
            b.finish()
        }
        "I.10.7" => {
            // m0 / sqrt(1 - v^2 / c^2)
            let mut b = Builder::new(3);
            let v2 = b.pow(1, 2.0);
            let c2 = b.pow(2, 2.0);
            let inv_c2 = b.unary(Inv, c2);
            let ratio = b.mul(&[v2, inv_c2]);
            let neg = b.unary(Neg, ratio);
            let one = b.konst(1.0);
            let diff = b.add(&[one, neg]);
            let root = b.pow(diff, 0.5);
            let inv = b.unary(Inv, root);
            b.mul(&[0, inv]);
            b.finish()
        }
        "I.48.20" => {
            // m c^2 / sqrt(1 - (v/c)^2)
            let mut b = Builder::new(3);
            let c2 = b.pow(1, 2.0);
            let inv_c = b.unary(Inv, 1);
            let ratio = b.mul(&[2, inv_c]);
            let r2 = b.pow(ratio, 2.0);
            let neg = b.unary(Neg, r2);
            let one = b.konst(1.0);
            let diff = b.add(&[one, neg]);
            let root = b.pow(diff, 0.5);
            let inv = b.unary(Inv, root);
            b.mul(&[0, c2, inv]);
            b.finish()
        }
        _ => return None,
    };
    Some(dag)
}

struct Entry {
    name: &'static str,
    formula: &'static str,
    suite: Suite,
    ranges: &'static [(f64, f64)],
}

const UNIT: &[(f64, f64)] = &[(-1.0, 1.0)];
const UNIT2: &[(f64, f64)] = &[(-1.0, 1.0), (-1.0, 1.0)];
const ONE_FIVE2: &[(f64, f64)] = &[(1.0, 5.0), (1.0, 5.0)];
const ONE_FIVE3: &[(f64, f64)] = &[(1.0, 5.0), (1.0, 5.0), (1.0, 5.0)];

const CATALOG: &[Entry] = &[
    Entry { name: "Nguyen-1", formula: "x^3 + x^2 + x", suite: Suite::Nguyen, ranges: UNIT },
    Entry { name: "Nguyen-2", formula: "x^4 + x^3 + x^2 + x", suite: Suite::Nguyen, ranges: UNIT },
    Entry { name: "Nguyen-3", formula: "x^5 + x^4 + x^3 + x^2 + x", suite: Suite::Nguyen, ranges: UNIT },
    Entry { name: "Nguyen-4", formula: "x^6 + x^5 + x^4 + x^3 + x^2 + x", suite: Suite::Nguyen, ranges: UNIT },
    Entry { name: "Nguyen-5", formula: "sin(x^2) cos(x) - 1", suite: Suite::Nguyen, ranges: UNIT },
    Entry { name: "Nguyen-6", formula: "sin(x) + sin(x + x^2)", suite: Suite::Nguyen, ranges: UNIT },
    Entry { name: "Nguyen-7", formula: "ln(x + 1) + ln(x^2 + 1)", suite: Suite::Nguyen, ranges: &[(0.0, 2.0)] },
    Entry { name: "Nguyen-8", formula: "sqrt(x)", suite: Suite::Nguyen, ranges: &[(0.0, 4.0)] },
    Entry { name: "Nguyen-9", formula: "sin(x) + sin(y^2)", suite: Suite::Nguyen, ranges: UNIT2 },
    Entry { name: "Nguyen-10", formula: "2 sin(x) cos(y)", suite: Suite::Nguyen, ranges: UNIT2 },
    Entry { name: "Nguyen-11", formula: "x^y", suite: Suite::Nguyen, ranges: &[(0.0, 1.0), (0.0, 1.0)] },
    Entry { name: "Nguyen-12", formula: "x^4 - x^3 + y^2/2 - y", suite: Suite::Nguyen, ranges: UNIT2 },
    Entry { name: "I.6.20a", formula: "exp(-theta^2/2) / sqrt(2 pi)", suite: Suite::Feynman, ranges: &[(1.0, 3.0)] },
    Entry { name: "I.12.1", formula: "mu N_n", suite: Suite::Feynman, ranges: ONE_FIVE2 },
    Entry { name: "I.25.13", formula: "q / C", suite: Suite::Feynman, ranges: &[(1.0, 3.0), (1.0, 3.0)] },
    Entry { name: "I.34.27", formula: "hbar omega", suite: Suite::Feynman, ranges: ONE_FIVE2 },
    Entry { name: "I.39.10", formula: "p_r V / 2", suite: Suite::Feynman, ranges: ONE_FIVE2 },
    Entry { name: "II.3.24", formula: "p r / (4 pi)", suite: Suite::Feynman, ranges: ONE_FIVE2 },
    Entry { name: "I.14.3", formula: "m g z", suite: Suite::Feynman, ranges: ONE_FIVE3 },
    Entry { name: "I.12.4", formula: "q1 / (4 pi r c)", suite: Suite::Feynman, ranges: ONE_FIVE3 },
    Entry {
        name: "I.10.7",
        formula: "m0 / sqrt(1 - v^2/c^2)",
        suite: Suite::Feynman,
        ranges: &[(1.0, 5.0), (1.0, 2.0), (3.0, 10.0)],
    },
    Entry {
        name: "I.48.20",
        formula: "m c^2 / sqrt(1 - (v/c)^2)",
        suite: Suite::Feynman,
        ranges: &[(1.0, 5.0), (1.0, 2.0), (3.0, 10.0)],
    },
];

/// The eight expressions with published graph statistics.
pub const VALIDATION_SET: [&str; 8] = [
    "Nguyen-1",
    "Nguyen-5",
    "Nguyen-7",
    "Nguyen-8",
    "Nguyen-9",
    "Nguyen-10",
    "Nguyen-12",
    "Feynman-I.14.3",
];

pub fn names() -> Vec<&'static str> {
    CATALOG.iter().map(|e| e.name).collect()
}

/// Looks up a benchmark; Feynman names may carry a `Feynman-` prefix.
pub fn benchmark(name: &str) -> Result<Benchmark, UnknownBenchmark> {
    let key = name.strip_prefix("Feynman-").unwrap_or(name);
    let entry = CATALOG
        .iter()
        .find(|e| e.name == key)
        .ok_or_else(|| UnknownBenchmark(name.to_string()))?;
    let dag = build(entry.name).ok_or_else(|| UnknownBenchmark(name.to_string()))?;
    Ok(Benchmark {
        name: entry.name,
        formula: entry.formula,
        suite: entry.suite,
        m: entry.ranges.len(),
        ranges: entry.ranges.to_vec(),
        dag,
    })
}

impl Benchmark {
    /// Nguyen: 20 training and 100 test points. Feynman: 200 points split
    /// 160/40. Inputs are uniform in the ranges, seeded with 42.
    pub fn sample(&self, split: Split) -> Dataset {
        let mut r = rng(BASE_SEED);
        let (skip, take) = match (self.suite, split) {
            (Suite::Nguyen, Split::Train) => (0, 20),
            (Suite::Nguyen, Split::Test) => (20, 100),
            (Suite::Feynman, Split::Train) => (0, 160),
            (Suite::Feynman, Split::Test) => (160, 40),
        };
        let mut inputs = Vec::with_capacity(take);
        for i in 0..skip + take {
            let row: Vec<f64> = self.ranges.iter().map(|&(lo, hi)| r.random_range(lo..=hi)).collect();
            if i >= skip {
                inputs.push(row);
            }
        }
        let sink = *self.dag.sinks().last().expect("benchmark has an output");
        let targets = inputs
            .iter()
            .map(|x| self.dag.evaluate(x).expect("arity matches")[sink])
            .collect();
        Dataset { inputs, targets }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(name: &str) -> (usize, usize, usize) {
        let d = benchmark(name).unwrap().dag;
        (d.len(), d.edge_count(), d.depth())
    }

    #[test]
    fn published_graph_statistics() {
        assert_eq!(stats("Nguyen-1"), (6, 9, 3));
        assert_eq!(stats("Nguyen-5"), (8, 10, 5));
        assert_eq!(stats("Nguyen-7"), (9, 12, 5));
        assert_eq!(stats("Nguyen-8"), (3, 3, 2));
        assert_eq!(stats("Nguyen-9"), (7, 7, 4));
        assert_eq!(stats("Nguyen-10"), (6, 6, 2));
        assert_eq!(stats("Nguyen-12"), (14, 21, 4));
        assert_eq!(stats("Feynman-I.14.3"), (4, 3, 1));
    }

    #[test]
    fn every_entry_builds() {
        for name in names() {
            let b = benchmark(name).unwrap();
            assert_eq!(b.dag.num_vars(), b.m, "{name}");
            assert!(b.dag.is_acyclic());
            assert_eq!(b.dag.sinks().len(), 1, "{name}");
        }
        assert!(benchmark("Nguyen-13").is_err());
    }

    #[test]
    fn values_match_formulas() {
        let check = |name: &str, x: &[f64], want: f64| {
            let b = benchmark(name).unwrap();
            let sink = b.dag.sinks()[0];
            let got = b.dag.evaluate(x).unwrap()[sink];
            assert!((got - want).abs() < 1e-12, "{name}: {got} vs {want}");
        };
        let x: f64 = 0.7;
        check("Nguyen-1", &[x], x.powi(3) + x * x + x);
        check("Nguyen-4", &[x], (1..=6).map(|e| x.powi(e)).sum());
        check("Nguyen-5", &[x], (x * x).sin() * x.cos() - 1.0);
        check("Nguyen-6", &[x], x.sin() + (x + x * x).sin());
        check("Nguyen-7", &[x], (x + 1.0).ln() + (x * x + 1.0).ln());
        check("Nguyen-8", &[x], x.sqrt());
        check("Nguyen-9", &[x, 0.3], x.sin() + 0.09f64.sin());
        check("Nguyen-10", &[x, 0.3], 2.0 * x.sin() * 0.3f64.cos());
        check("Nguyen-11", &[x, 0.3], x.powf(0.3));
        check("Nguyen-12", &[x, 0.3], x.powi(4) - x.powi(3) + 0.045 - 0.3);
        check("I.6.20a", &[1.5], (-1.125f64).exp() / (2.0 * PI).sqrt());
        check("I.25.13", &[2.0, 4.0], 0.5);
        check("II.3.24", &[2.0, 3.0], 6.0 / (4.0 * PI));
        check("I.12.4", &[2.0, 3.0, 4.0], 2.0 / (4.0 * PI * 12.0));
        check("I.10.7", &[2.0, 1.5, 4.0], 2.0 / (1.0 - 2.25 / 16.0f64).sqrt());
        check("I.48.20", &[2.0, 1.5, 4.0], 2.0 * 2.25 / (1.0 - (4.0f64 / 1.5).powi(2)).abs().sqrt());
    }

    #[test]
    fn datasets() {
        let b = benchmark("Nguyen-1").unwrap();
        let train = b.sample(Split::Train);
        assert_eq!(train.inputs.len(), 20);
        assert!(train.inputs.iter().all(|r| (-1.0..=1.0).contains(&r[0])));
        assert_eq!(b.sample(Split::Test).inputs.len(), 100);
        assert_eq!(train, b.sample(Split::Train));
        let f = benchmark("I.12.1").unwrap();
        let (tr, te) = (f.sample(Split::Train), f.sample(Split::Test));
        assert_eq!((tr.inputs.len(), te.inputs.len()), (160, 40));
        assert!(tr.inputs.iter().chain(&te.inputs).flatten().all(|v| (1.0..=5.0).contains(v)));
        assert!((tr.targets[0] - tr.inputs[0][0] * tr.inputs[0][1]).abs() < 1e-12);
        let n7 = benchmark("Nguyen-7").unwrap().sample(Split::Test);
        assert!(n7.inputs.iter().all(|r| (0.0..=2.0).contains(&r[0])));
    }
}
