//! Seeded random DAGs and random instruction strings.
//!
//! Every stream comes from `ChaCha8Rng::seed_from_u64`, so a seed fixes the
//! output for a given build.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dag::{LabeledDag, NodeId, NodeType, OperationSet};
use crate::isa::{detokenize, execute, Token};

/// Base seed shared by the experiments.
pub const BASE_SEED: u64 = 42;

const UNARY: [NodeType; 5] = [NodeType::Sin, NodeType::Cos, NodeType::Exp, NodeType::Log, NodeType::Abs];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Binary {
    Add,
    Mul,
    Sub,
    Div,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of `random_dag(k, m, sample)` relative to `base`.
pub fn dag_seed(base: u64, k: usize, m: usize, sample: usize) -> u64 {
    base + (m as u64) * 10_000 + (k as u64) * 100 + sample as u64
}

/// Seed of the `sample`-th random string for `m` variables.
pub fn string_seed(base: u64, m: usize, sample: usize) -> u64 {
    base + (m as u64) * 10_000 + sample as u64
}

/// Random expression DAG with exactly `k` internal nodes over `m` variables.
pub fn random_dag(k: usize, m: usize, sample: usize) -> LabeledDag {
    random_dag_seeded(k, m, dag_seed(BASE_SEED, k, m, sample))
}

pub fn random_dag_seeded(k: usize, m: usize, seed: u64) -> LabeledDag {
    let mut rng = rng(seed);
    let mut dag = LabeledDag::new(m.max(1)).expect("m >= 1");
    let target = dag.len() + k;
    while dag.len() < target {
        let slots = target - dag.len();
        let unary = dag.len() < 2 || rng.random_bool(0.6);
        if unary {
            let kind = *UNARY.choose(&mut rng).expect("non-empty");
            let input = rng.random_range(0..dag.len());
            dag.add_node_from(kind, 0.0, input).expect("input exists");
            continue;
        }
        let pool: &[Binary] = if slots == 1 {
            &[Binary::Add, Binary::Mul]
        } else {
            &[Binary::Add, Binary::Mul, Binary::Sub, Binary::Div]
        };
        let op = *pool.choose(&mut rng).expect("non-empty");
        let picked = rand::seq::index::sample(&mut rng, dag.len(), 2);
        let (a, b) = (picked.index(0), picked.index(1));
        let (kind, rhs) = match op {
            Binary::Add => (NodeType::Add, b),
            Binary::Mul => (NodeType::Mul, b),
            Binary::Sub => (NodeType::Add, companion(&mut dag, NodeType::Neg, b)),
            Binary::Div => (NodeType::Mul, companion(&mut dag, NodeType::Inv, b)),
        };
        let v = dag.add_node_from(kind, 0.0, a).expect("input exists");
        dag.add_edge(rhs, v).expect("input exists");
    }
    dag
}

fn companion(dag: &mut LabeledDag, kind: NodeType, input: NodeId) -> NodeId {
    dag.add_node_from(kind, 0.0, input).expect("input exists")
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomString {
    pub text: String,
    pub dag: LabeledDag,
}

/// Random string of 1..=`max_tokens` tokens drawn uniformly from the
/// vocabulary of `opset`. `None` when the decoded DAG has no internal nodes.
pub fn random_string(max_tokens: usize, m: usize, opset: &OperationSet, seed: u64) -> Option<RandomString> {
    let mut rng = rng(seed);
    let vocab = Token::vocabulary(opset);
    let n = rng.random_range(1..=max_tokens.max(1));
    let tokens: Vec<Token> = (0..n).map(|_| *vocab.choose(&mut rng).expect("non-empty")).collect();
    let dag = execute(&tokens, m.max(1)).expect("m >= 1");
    if dag.internal_count() == 0 {
        return None;
    }
    Some(RandomString {
        text: detokenize(&tokens),
        dag,
    })
}
