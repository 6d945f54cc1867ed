//! Canonical strings.
//!
//! The canonical string of a DAG is the shortest, then byte-wise least,
//! string among all encodings reachable by branching over insert candidates.
//! Isomorphic DAGs share it, so it doubles as an isomorphism invariant.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::dag::{LabeledDag, NodeId, NodeType, TauTuple};
use crate::encoder::{push_edge, push_insert, Action, EncoderState, SpiralTable};

/// Default deadline for a single canonical search.
pub const DEFAULT_DEADLINE: Duration = Duration::from_secs(60);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    /// Branch over every insert candidate.
    Exhaustive,
    /// Within each label, keep only the candidates with the largest
    /// neighbourhood tuple.
    Pruned,
}

impl SearchMode {
    pub fn name(self) -> &'static str {
        match self {
            SearchMode::Exhaustive => "exhaustive",
            SearchMode::Pruned => "pruned",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CanonicalRequest<'a> {
    pub dag: &'a LabeledDag,
    pub mode: SearchMode,
    pub deadline: Duration,
    /// Drop edges into variables before encoding.
    pub normalize_var_inputs: bool,
}

impl<'a> CanonicalRequest<'a> {
    pub fn new(dag: &'a LabeledDag, mode: SearchMode) -> Self {
        CanonicalRequest {
            dag,
            mode,
            deadline: DEFAULT_DEADLINE,
            normalize_var_inputs: false,
        }
    }

    pub fn deadline(mut self, deadline: Duration) -> Self {
        self.deadline = deadline;
        self
    }

    pub fn normalize_var_inputs(mut self, yes: bool) -> Self {
        self.normalize_var_inputs = yes;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalResult {
    pub string: String,
    pub elapsed: Duration,
    pub branch_count: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CanonError {
    #[error("canonical search timed out after {elapsed:?} ({branches} branches)")]
    Timeout { elapsed: Duration, branches: u64 },
    #[error("graph cannot be encoded: {0}")]
    Unencodable(String),
}

/// Compares two strings by length, then byte-wise.
pub fn compare_strings(a: &str, b: &str) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.as_bytes().cmp(b.as_bytes()))
}

/// The graph that the canonical string actually encodes: optionally without
/// edges into variables, and with every constant created from node 0.
pub fn canonical_input(dag: &LabeledDag, normalize_var_inputs: bool) -> Result<LabeledDag, CanonError> {
    let base = if normalize_var_inputs {
        dag.strip_var_inputs()
    } else {
        dag.clone()
    };
    let normalized = base.normalize_const_creation();
    if !normalized.is_acyclic() {
        return Err(CanonError::Unencodable(
            "anchoring a constant at x0 closes a cycle through an edge into x0".into(),
        ));
    }
    Ok(normalized)
}

pub fn canonical(req: &CanonicalRequest<'_>) -> Result<CanonicalResult, CanonError> {
    let start = Instant::now();
    let dag = canonical_input(req.dag, req.normalize_var_inputs)?;
    let mut search = Search {
        dag: &dag,
        mode: req.mode,
        spiral: SpiralTable::new(dag.len()),
        start,
        deadline: req.deadline,
        branches: 0,
        best: None,
        tau: HashMap::new(),
        twin_of: None,
    };
    let mut state = EncoderState::new(&dag);
    let mut prefix = String::new();
    search.run(&mut state, &mut prefix)?;
    match search.best {
        Some(string) => Ok(CanonicalResult {
            string,
            elapsed: start.elapsed(),
            branch_count: search.branches,
        }),
        None => Err(CanonError::Unencodable("no branch completed the encoding".into())),
    }
}

/// Canonical string with the default deadline.
pub fn canonical_string(dag: &LabeledDag, mode: SearchMode) -> Result<String, CanonError> {
    canonical(&CanonicalRequest::new(dag, mode)).map(|r| r.string)
}

struct Search<'d> {
    dag: &'d LabeledDag,
    mode: SearchMode,
    spiral: SpiralTable,
    start: Instant,
    deadline: Duration,
    branches: u64,
    best: Option<String>,
    tau: HashMap<NodeId, TauTuple>,
    // built on the first branch point that needs it
    twin_of: Option<Vec<NodeId>>,
}

/// Lowest-id representative of each node's twin class. Twins share label,
/// inputs and outputs, so swapping two uninserted twins maps the search onto
/// itself. Nodes feeding a `Pow` are left alone since operand order tells
/// them apart.
fn twin_classes(dag: &LabeledDag) -> Vec<NodeId> {
    let mut seen: HashMap<(NodeType, Vec<NodeId>, &[NodeId]), NodeId> = HashMap::new();
    (0..dag.len())
        .map(|v| {
            let outs = dag.outputs(v);
            if v < dag.num_vars() || outs.iter().any(|&t| dag.kind(t) == NodeType::Pow) {
                return v;
            }
            let mut ins = dag.inputs(v).to_vec();
            if dag.kind(v) != NodeType::Pow {
                ins.sort_unstable();
            }
            *seen.entry((dag.kind(v), ins, outs)).or_insert(v)
        })
        .collect()
}

impl<'d> Search<'d> {
    fn run(&mut self, state: &mut EncoderState<'d>, prefix: &mut String) -> Result<(), CanonError> {
        self.branches += 1;
        let elapsed = self.start.elapsed();
        if elapsed > self.deadline {
            return Err(CanonError::Timeout {
                elapsed,
                branches: self.branches,
            });
        }
        if state.is_done() {
            let better = self
                .best
                .as_deref()
                .is_none_or(|b| compare_strings(prefix, b) == Ordering::Less);
            if better {
                self.best = Some(prefix.clone());
            }
            return Ok(());
        }
        if let Some(best) = &self.best {
            // every remaining node costs at least two characters, every
            // remaining edge at least one
            let bound = prefix.len() + state.nodes_left() + state.edges_left();
            if bound > best.len() || (bound == best.len() && prefix.as_bytes() > &best.as_bytes()[..prefix.len()]) {
                return Ok(());
            }
        }
        let mark = prefix.len();
        match state.next_action(self.spiral.get(state.output_size())) {
            // which nodes can ever be inserted does not depend on the branch
            None => {
                return Err(CanonError::Unencodable(format!(
                    "encoding stalled with {} nodes and {} edges left",
                    state.nodes_left(),
                    state.edges_left()
                )))
            }
            Some(Action::Insert { primary, steps, via }) => {
                let mut candidates = self.filter(state.insert_candidates(state.value(via)));
                // smaller labels first, so good bounds are found early
                candidates.sort_by_key(|&v| (self.dag.kind(v).label(), v));
                for node in candidates {
                    push_insert(prefix, primary, steps, self.dag.kind(node));
                    let undo = state.insert(node, via, primary);
                    self.run(state, prefix)?;
                    state.undo_insert(undo);
                    prefix.truncate(mark);
                }
            }
            Some(Action::Edge { forward, a, b, p, q }) => {
                push_edge(prefix, a, b, forward);
                let undo = state.place_edge(p, q, forward);
                self.run(state, prefix)?;
                state.undo_edge(undo);
                prefix.truncate(mark);
            }
        }
        Ok(())
    }

    fn filter(&mut self, candidates: Vec<NodeId>) -> Vec<NodeId> {
        if self.mode == SearchMode::Exhaustive || candidates.len() < 2 {
            return candidates;
        }
        let mut groups: Vec<(NodeType, Vec<NodeId>)> = Vec::new();
        for c in candidates {
            let kind = self.dag.kind(c);
            match groups.iter_mut().find(|(k, _)| *k == kind) {
                Some((_, g)) => g.push(c),
                None => groups.push((kind, vec![c])),
            }
        }
        let mut kept = Vec::new();
        for (_, group) in groups {
            if group.len() == 1 {
                kept.extend(group);
                continue;
            }
            let dag = self.dag;
            let twin_of = self.twin_of.get_or_insert_with(|| twin_classes(dag));
            let mut classes = HashSet::new();
            let group: Vec<NodeId> = group.into_iter().filter(|&v| classes.insert(twin_of[v])).collect();
            let taus: Vec<TauTuple> = group.iter().map(|&v| self.tau_of(v)).collect();
            let top = *taus.iter().max().expect("group is non-empty");
            kept.extend(group.iter().zip(&taus).filter(|(_, t)| **t == top).map(|(v, _)| *v));
        }
        kept.sort_unstable();
        kept
    }

    fn tau_of(&mut self, v: NodeId) -> TauTuple {
        let dag = self.dag;
        *self
            .tau
            .entry(v)
            .or_insert_with(|| dag.tau(v).expect("candidate ids are in range"))
    }
}
