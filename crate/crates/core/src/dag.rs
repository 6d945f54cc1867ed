//! Labeled expression DAGs.
//!
//! A [`LabeledDag`] stores its nodes in insertion order. Ids `0..m` are the
//! pre-inserted variables; every other node is an operation or a constant.
//! Each node keeps its ordered input list, which doubles as the in-edge set:
//! an edge `(u, v)` exists exactly when `u` appears in `v.inputs`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = usize;

/// Threshold used by the protected operations.
pub const PROTECTION_EPS: f64 = 1e-9;

/// Upper clamp applied to the argument of `Exp`.
pub const EXP_CLAMP: f64 = 700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DagError {
    #[error("a DAG needs at least one variable")]
    NoVariables,
    #[error("node id {0} does not exist")]
    InvalidNode(NodeId),
    #[error("expected {expected} variable values, got {got}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("malformed DAG: {0}")]
    Malformed(String),
    #[error("invalid DAG json: {0}")]
    Json(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeType {
    Var,
    Const,
    Add,
    Mul,
    Neg,
    Inv,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arity {
    Leaf,
    Unary,
    Binary,
    Variadic,
}

impl NodeType {
    /// Every type that carries a label character, in label-table order.
    pub const LABELED: [NodeType; 12] = [
        NodeType::Add,
        NodeType::Mul,
        NodeType::Neg,
        NodeType::Inv,
        NodeType::Sin,
        NodeType::Cos,
        NodeType::Exp,
        NodeType::Log,
        NodeType::Sqrt,
        NodeType::Abs,
        NodeType::Pow,
        NodeType::Const,
    ];

    pub fn label(self) -> Option<char> {
        Some(match self {
            NodeType::Var => return None,
            NodeType::Const => 'k',
            NodeType::Add => '+',
            NodeType::Mul => '*',
            NodeType::Neg => 'g',
            NodeType::Inv => 'i',
            NodeType::Sin => 's',
            NodeType::Cos => 'c',
            NodeType::Exp => 'e',
            NodeType::Log => 'l',
            NodeType::Sqrt => 'r',
            NodeType::Abs => 'a',
            NodeType::Pow => '^',
        })
    }

    pub fn from_label(label: char) -> Option<NodeType> {
        NodeType::LABELED
            .iter()
            .copied()
            .find(|t| t.label() == Some(label))
    }

    pub fn arity(self) -> Arity {
        match self {
            NodeType::Var | NodeType::Const => Arity::Leaf,
            NodeType::Add | NodeType::Mul => Arity::Variadic,
            NodeType::Pow => Arity::Binary,
            _ => Arity::Unary,
        }
    }

    /// Operand order only matters for `Pow`.
    pub fn is_commutative(self) -> bool {
        self != NodeType::Pow
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeType::Var => "Var",
            NodeType::Const => "Const",
            NodeType::Add => "Add",
            NodeType::Mul => "Mul",
            NodeType::Neg => "Neg",
            NodeType::Inv => "Inv",
            NodeType::Sin => "Sin",
            NodeType::Cos => "Cos",
            NodeType::Exp => "Exp",
            NodeType::Log => "Log",
            NodeType::Sqrt => "Sqrt",
            NodeType::Abs => "Abs",
            NodeType::Pow => "Pow",
        }
    }
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The set of operation types a string may use. `Var` is always implied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperationSet {
    types: Vec<NodeType>,
}

impl OperationSet {
    /// Add, Mul, Neg, Inv, Sin, Cos, Exp, Log, Sqrt, Abs.
    pub fn commutative() -> Self {
        OperationSet {
            types: NodeType::LABELED[..10].to_vec(),
        }
    }

    /// The commutative set plus `Pow` and `Const`.
    pub fn full() -> Self {
        OperationSet {
            types: NodeType::LABELED.to_vec(),
        }
    }

    pub fn from_types(types: impl IntoIterator<Item = NodeType>) -> Self {
        let mut wanted: Vec<NodeType> = types.into_iter().filter(|t| *t != NodeType::Var).collect();
        wanted.sort();
        wanted.dedup();
        // keep the label-table order
        let types = NodeType::LABELED
            .iter()
            .copied()
            .filter(|t| wanted.contains(t))
            .collect();
        OperationSet { types }
    }

    pub fn contains(&self, kind: NodeType) -> bool {
        kind == NodeType::Var || self.types.contains(&kind)
    }

    pub fn includes_pow(&self) -> bool {
        self.types.contains(&NodeType::Pow)
    }

    pub fn includes_const(&self) -> bool {
        self.types.contains(&NodeType::Const)
    }

    pub fn types(&self) -> &[NodeType] {
        &self.types
    }

    pub fn labels(&self) -> Vec<char> {
        self.types.iter().filter_map(|t| t.label()).collect()
    }

    pub fn type_for_label(&self, label: char) -> Option<NodeType> {
        NodeType::from_label(label).filter(|t| self.types.contains(t))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub kind: NodeType,
    /// Variable index for `Var`, value for `Const`, zero otherwise.
    pub payload: f64,
    /// Ordered input list: in-neighbours in edge-insertion order.
    pub inputs: Vec<NodeId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeOutcome {
    Added,
    SkippedCycle,
    SkippedDuplicate,
}

/// Directed 1/2/3-hop neighbourhood sizes, ordered
/// `(in1, out1, in2, out2, in3, out3)` and compared lexicographically.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TauTuple(pub [u32; 6]);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FingerprintLabel {
    Var(usize),
    Op(char),
}

/// `(label, inputs)` per node in id order. Inputs of commutative nodes are
/// sorted; `Pow` keeps base/exponent order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(pub Vec<(FingerprintLabel, Vec<NodeId>)>);

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDag {
    m: usize,
    nodes: Vec<Node>,
    outputs: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl LabeledDag {
    /// A DAG holding only the `m` variable nodes.
    pub fn new(m: usize) -> Result<Self, DagError> {
        if m == 0 {
            return Err(DagError::NoVariables);
        }
        let nodes = (0..m)
            .map(|i| Node {
                kind: NodeType::Var,
                payload: i as f64,
                inputs: Vec::new(),
            })
            .collect();
        Ok(LabeledDag {
            m,
            nodes,
            outputs: vec![Vec::new(); m],
            edge_count: 0,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of non-variable nodes.
    pub fn internal_count(&self) -> usize {
        self.nodes.len() - self.m
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&Node, DagError> {
        self.nodes.get(id).ok_or(DagError::InvalidNode(id))
    }

    pub fn kind(&self, id: NodeId) -> NodeType {
        self.nodes[id].kind
    }

    pub fn inputs(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].inputs
    }

    pub fn outputs(&self, id: NodeId) -> &[NodeId] {
        &self.outputs[id]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        v < self.nodes.len() && self.nodes[v].inputs.contains(&u)
    }

    /// All edges `(source, target)`, grouped by target in σ order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .flat_map(|(v, n)| n.inputs.iter().map(move |&u| (u, v)))
    }

    /// `Var` nodes cannot be appended; they exist from construction.
    pub fn add_node(&mut self, kind: NodeType, payload: f64) -> Result<NodeId, DagError> {
        if kind == NodeType::Var {
            return Err(DagError::Malformed("variables are fixed at construction".into()));
        }
        self.nodes.push(Node {
            kind,
            payload,
            inputs: Vec::new(),
        });
        self.outputs.push(Vec::new());
        Ok(self.nodes.len() - 1)
    }

    /// Appends a node together with its creation edge `from -> new`.
    pub fn add_node_from(&mut self, kind: NodeType, payload: f64, from: NodeId) -> Result<NodeId, DagError> {
        self.check(from)?;
        let id = self.add_node(kind, payload)?;
        self.push_edge_unchecked(from, id);
        Ok(id)
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<EdgeOutcome, DagError> {
        self.check(u)?;
        self.check(v)?;
        if self.has_edge(u, v) {
            return Ok(EdgeOutcome::SkippedDuplicate);
        }
        if u == v || self.reaches(v, u) {
            return Ok(EdgeOutcome::SkippedCycle);
        }
        self.push_edge_unchecked(u, v);
        Ok(EdgeOutcome::Added)
    }

    fn push_edge_unchecked(&mut self, u: NodeId, v: NodeId) {
        self.nodes[v].inputs.push(u);
        // out-lists stay sorted so equal graphs compare equal
        let at = self.outputs[u].partition_point(|&w| w < v);
        self.outputs[u].insert(at, v);
        self.edge_count += 1;
    }

    fn remove_edge(&mut self, u: NodeId, v: NodeId) -> bool {
        let before = self.nodes[v].inputs.len();
        self.nodes[v].inputs.retain(|&w| w != u);
        if self.nodes[v].inputs.len() == before {
            return false;
        }
        self.outputs[u].retain(|&w| w != v);
        self.edge_count -= 1;
        true
    }

    fn check(&self, id: NodeId) -> Result<(), DagError> {
        if id < self.nodes.len() {
            Ok(())
        } else {
            Err(DagError::InvalidNode(id))
        }
    }

    /// Reflexive directed reachability `u ⇝ v`.
    pub fn reachable(&self, u: NodeId, v: NodeId) -> Result<bool, DagError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.reaches(u, v))
    }

    fn reaches(&self, u: NodeId, v: NodeId) -> bool {
        if u == v {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![u];
        seen[u] = true;
        while let Some(x) = stack.pop() {
            for &y in &self.outputs[x] {
                if y == v {
                    return true;
                }
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        false
    }

    /// Kahn order over all nodes, or `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<NodeId>> {
        let n = self.nodes.len();
        let mut indeg: Vec<usize> = self.nodes.iter().map(|x| x.inputs.len()).collect();
        let mut queue: VecDeque<NodeId> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &w in &self.outputs[u] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Per-node values under the protected semantics.
    pub fn evaluate(&self, assignment: &[f64]) -> Result<Vec<f64>, DagError> {
        if assignment.len() != self.m {
            return Err(DagError::AssignmentLength {
                expected: self.m,
                got: assignment.len(),
            });
        }
        let order = self
            .topological_order()
            .ok_or_else(|| DagError::Malformed("graph has a cycle".into()))?;
        let mut values = vec![0.0; self.nodes.len()];
        for v in order {
            let node = &self.nodes[v];
            let first = |vals: &[f64]| node.inputs.first().map_or(f64::NAN, |&u| vals[u]);
            values[v] = match node.kind {
                NodeType::Var => assignment[node.payload as usize],
                NodeType::Const => node.payload,
                // operands are combined in sorted order so the result does
                // not depend on edge insertion order
                NodeType::Add => sorted_operands(node, &values).iter().sum(),
                NodeType::Mul => sorted_operands(node, &values).iter().product(),
                NodeType::Neg => -first(&values),
                NodeType::Inv => protected_inv(first(&values)),
                NodeType::Sin => first(&values).sin(),
                NodeType::Cos => first(&values).cos(),
                NodeType::Exp => protected_exp(first(&values)),
                NodeType::Log => protected_log(first(&values)),
                NodeType::Sqrt => first(&values).abs().sqrt(),
                NodeType::Abs => first(&values).abs(),
                NodeType::Pow => {
                    let base = first(&values);
                    let exponent = node.inputs.get(1).map_or(1.0, |&u| values[u]);
                    protected_pow(base, exponent)
                }
            };
        }
        Ok(values)
    }

    pub fn tau(&self, v: NodeId) -> Result<TauTuple, DagError> {
        self.check(v)?;
        let ins = self.ring_sizes(v, |d, x| &d.nodes[x].inputs);
        let outs = self.ring_sizes(v, |d, x| &d.outputs[x]);
        Ok(TauTuple([ins[0], outs[0], ins[1], outs[1], ins[2], outs[2]]))
    }

    pub fn tau_all(&self) -> Vec<TauTuple> {
        (0..self.nodes.len()).map(|v| self.tau(v).unwrap()).collect()
    }

    /// Number of nodes at shortest distance exactly 1, 2, 3 along `step`.
    fn ring_sizes<'a, F>(&'a self, v: NodeId, step: F) -> [u32; 3]
    where
        F: Fn(&'a LabeledDag, NodeId) -> &'a [NodeId],
    {
        let mut dist = vec![u8::MAX; self.nodes.len()];
        dist[v] = 0;
        let mut frontier = vec![v];
        let mut sizes = [0u32; 3];
        for (level, size) in sizes.iter_mut().enumerate() {
            let mut next = Vec::new();
            for &x in &frontier {
                for &y in step(self, x) {
                    if dist[y] == u8::MAX {
                        dist[y] = level as u8 + 1;
                        next.push(y);
                    }
                }
            }
            *size = next.len() as u32;
            frontier = next;
        }
        sizes
    }

    /// Longest path (in edges) starting at any variable node.
    pub fn depth(&self) -> usize {
        let Some(order) = self.topological_order() else {
            return 0;
        };
        let mut longest: Vec<Option<usize>> = vec![None; self.nodes.len()];
        for &v in &order {
            let via_inputs = self.nodes[v]
                .inputs
                .iter()
                .filter_map(|&u| longest[u].map(|d| d + 1))
                .max();
            let own = (self.nodes[v].kind == NodeType::Var).then_some(0);
            longest[v] = via_inputs.max(own);
        }
        longest.into_iter().flatten().max().unwrap_or(0)
    }

    pub fn structural_fingerprint(&self) -> Fingerprint {
        Fingerprint(
            self.nodes
                .iter()
                .map(|n| {
                    let label = match n.kind.label() {
                        Some(c) => FingerprintLabel::Op(c),
                        None => FingerprintLabel::Var(n.payload as usize),
                    };
                    let mut inputs = n.inputs.clone();
                    if n.kind.is_commutative() {
                        inputs.sort_unstable();
                    }
                    (label, inputs)
                })
                .collect(),
        )
    }

    /// Moves internal node `m + i` to id `m + perm[i]`, keeping every
    /// edge, label, payload and operand order.
    pub fn remap_internal_ids(&self, perm: &[usize]) -> Result<LabeledDag, DagError> {
        let k = self.internal_count();
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
            return Err(DagError::NotAPermutation(k));
        }
        let m = self.m;
        let new_id = |old: NodeId| if old < m { old } else { m + perm[old - m] };
        let mut slots: Vec<Option<Node>> = vec![None; self.nodes.len()];
        for (old, node) in self.nodes.iter().enumerate() {
            slots[new_id(old)] = Some(Node {
                kind: node.kind,
                payload: node.payload,
                inputs: node.inputs.iter().map(|&u| new_id(u)).collect(),
            });
        }
        Ok(LabeledDag::from_nodes(m, slots.into_iter().map(Option::unwrap).collect()))
    }

    /// Re-anchors every `Const` creation edge at node 0.
    pub fn normalize_const_creation(&self) -> LabeledDag {
        let mut nodes = self.nodes.clone();
        for node in nodes.iter_mut().filter(|n| n.kind == NodeType::Const) {
            if node.inputs.first() == Some(&0) {
                continue;
            }
            if !node.inputs.is_empty() {
                node.inputs.remove(0);
            }
            node.inputs.retain(|&u| u != 0);
            node.inputs.insert(0, 0);
        }
        LabeledDag::from_nodes(self.m, nodes)
    }

    /// Drops every edge that points into a variable node.
    pub fn strip_var_inputs(&self) -> LabeledDag {
        let mut out = self.clone();
        for v in 0..out.nodes.len() {
            if out.nodes[v].kind == NodeType::Var {
                for u in out.nodes[v].inputs.clone() {
                    out.remove_edge(u, v);
                }
            }
        }
        out
    }

    pub fn has_var_inputs(&self) -> bool {
        self.nodes[..self.m].iter().any(|n| !n.inputs.is_empty())
    }

    /// Builds the derived adjacency from node records. Callers guarantee ids
    /// and inputs are in range.
    fn from_nodes(m: usize, nodes: Vec<Node>) -> LabeledDag {
        let mut outputs = vec![Vec::new(); nodes.len()];
        let mut edge_count = 0;
        for (v, n) in nodes.iter().enumerate() {
            for &u in &n.inputs {
                outputs[u].push(v);
                edge_count += 1;
            }
        }
        for o in &mut outputs {
            o.sort_unstable();
        }
        LabeledDag {
            m,
            nodes,
            outputs,
            edge_count,
        }
    }

    /// Validating constructor from explicit node records.
    pub fn from_parts(m: usize, nodes: Vec<Node>) -> Result<LabeledDag, DagError> {
        if m == 0 {
            return Err(DagError::NoVariables);
        }
        if nodes.len() < m {
            return Err(DagError::Malformed(format!("{} nodes but {m} variables", nodes.len())));
        }
        for (id, node) in nodes.iter().enumerate() {
            let is_var = node.kind == NodeType::Var;
            if (id < m) != is_var {
                return Err(DagError::Malformed(format!(
                    "node {id}: ids 0..{m} must be exactly the variables"
                )));
            }
            if is_var && node.payload != id as f64 {
                return Err(DagError::Malformed(format!("variable {id} has payload {}", node.payload)));
            }
            for (j, &u) in node.inputs.iter().enumerate() {
                if u >= nodes.len() {
                    return Err(DagError::InvalidNode(u));
                }
                if node.inputs[..j].contains(&u) {
                    return Err(DagError::Malformed(format!("duplicate edge ({u}, {id})")));
                }
            }
        }
        let dag = LabeledDag::from_nodes(m, nodes);
        if !dag.is_acyclic() {
            return Err(DagError::Malformed("graph has a cycle".into()));
        }
        Ok(dag)
    }

    pub fn to_json(&self) -> DagJson {
        DagJson {
            m: self.m,
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| NodeJson {
                    id,
                    kind: n.kind,
                    payload: n.payload,
                })
                .collect(),
            inputs: self
                .nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| !n.inputs.is_empty())
                .map(|(id, n)| (id.to_string(), n.inputs.clone()))
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("DAG json is always serializable")
    }

    pub fn from_json(doc: DagJson) -> Result<LabeledDag, DagError> {
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        for (pos, n) in doc.nodes.iter().enumerate() {
            if n.id != pos {
                return Err(DagError::Json(format!("node at position {pos} has id {}", n.id)));
            }
            nodes.push(Node {
                kind: n.kind,
                payload: n.payload,
                inputs: Vec::new(),
            });
        }
        for (key, inputs) in doc.inputs {
            let id: NodeId = key
                .parse()
                .map_err(|_| DagError::Json(format!("input key {key:?} is not a node id")))?;
            let node = nodes.get_mut(id).ok_or(DagError::InvalidNode(id))?;
            node.inputs = inputs;
        }
        LabeledDag::from_parts(doc.m, nodes)
    }

    pub fn from_json_str(text: &str) -> Result<LabeledDag, DagError> {
        let doc: DagJson = serde_json::from_str(text).map_err(|e| DagError::Json(e.to_string()))?;
        LabeledDag::from_json(doc)
    }

    /// Nodes without outputs, in id order.
    pub fn sinks(&self) -> Vec<NodeId> {
        (0..self.nodes.len()).filter(|&v| self.outputs[v].is_empty()).collect()
    }

    /// Parenthesized rendering of every non-variable sink, joined by `; `.
    pub fn to_infix(&self) -> String {
        let roots: Vec<NodeId> = self
            .sinks()
            .into_iter()
            .filter(|&v| self.nodes[v].kind != NodeType::Var)
            .collect();
        if roots.is_empty() {
            return (0..self.m).map(|i| format!("x{i}")).collect::<Vec<_>>().join("; ");
        }
        roots
            .into_iter()
            .map(|r| self.render(r))
            .collect::<Vec<_>>()
            .join("; ")
    }

    pub fn render(&self, v: NodeId) -> String {
        let node = &self.nodes[v];
        let arg = |i: usize| {
            node.inputs
                .get(i)
                .map_or_else(|| "?".to_string(), |&u| self.render(u))
        };
        match node.kind {
            NodeType::Var => format!("x{}", node.payload as usize),
            NodeType::Const => format!("{}", node.payload),
            NodeType::Add | NodeType::Mul => {
                let sep = if node.kind == NodeType::Add { " + " } else { " * " };
                let parts: Vec<String> = node.inputs.iter().map(|&u| self.render(u)).collect();
                if parts.len() == 1 {
                    parts[0].clone()
                } else {
                    format!("({})", parts.join(sep))
                }
            }
            NodeType::Neg => format!("(-{})", arg(0)),
            NodeType::Inv => format!("(1/{})", arg(0)),
            NodeType::Pow => {
                let exponent = node.inputs.get(1).map_or_else(|| "1".to_string(), |&u| self.render(u));
                format!("({} ^ {})", arg(0), exponent)
            }
            kind => format!("{}({})", kind.name().to_lowercase(), arg(0)),
        }
    }
}

fn sorted_operands(node: &Node, values: &[f64]) -> Vec<f64> {
    let mut ops: Vec<f64> = node.inputs.iter().map(|&u| values[u]).collect();
    ops.sort_by(f64::total_cmp);
    ops
}

pub fn protected_inv(x: f64) -> f64 {
    if x.abs() > PROTECTION_EPS {
        1.0 / x
    } else {
        1.0
    }
}

pub fn protected_log(x: f64) -> f64 {
    if x.abs() > PROTECTION_EPS {
        x.abs().ln()
    } else {
        0.0
    }
}

pub fn protected_exp(x: f64) -> f64 {
    x.min(EXP_CLAMP).exp()
}

/// `|base|^exponent`, with a near-zero base giving 0 for positive exponents
/// and 1 otherwise. Overflow from finite operands falls back to 1.
pub fn protected_pow(base: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        return 1.0;
    }
    let b = base.abs();
    if b <= PROTECTION_EPS {
        return if exponent > 0.0 { 0.0 } else { 1.0 };
    }
    let r = b.powf(exponent);
    if r.is_infinite() && base.is_finite() && exponent.is_finite() {
        1.0
    } else {
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: NodeId,
    #[serde(rename = "type")]
    pub kind: NodeType,
    #[serde(default)]
    pub payload: f64,
}

/// Interchange form; edges are implied by `inputs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DagJson {
    pub m: usize,
    pub nodes: Vec<NodeJson>,
    #[serde(default)]
    pub inputs: BTreeMap<String, Vec<NodeId>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    /// x0 -> Cos(1), x0 -> Sin(2), Cos -> Add(3), Sin -> Add.
    fn sin_plus_cos() -> LabeledDag {
        let mut d = LabeledDag::new(1).unwrap();
        let c = d.add_node_from(NodeType::Cos, 0.0, 0).unwrap();
        let s = d.add_node_from(NodeType::Sin, 0.0, 0).unwrap();
        let a = d.add_node_from(NodeType::Add, 0.0, c).unwrap();
        d.add_edge(s, a).unwrap();
        d
    }

    #[test]
    fn label_table_is_a_bijection() {
        let labels: Vec<char> = NodeType::LABELED.iter().filter_map(|t| t.label()).collect();
        assert_eq!(labels.len(), 12);
        for (t, l) in NodeType::LABELED.iter().zip(&labels) {
            assert_eq!(NodeType::from_label(*l), Some(*t));
        }
        assert_eq!(NodeType::Var.label(), None);
    }

    #[test]
    fn presets() {
        assert_eq!(OperationSet::commutative().labels().len(), 10);
        assert!(!OperationSet::commutative().includes_pow());
        let full = OperationSet::full();
        assert_eq!(full.labels().len(), 12);
        assert!(full.includes_pow() && full.includes_const());
        assert!(full.contains(NodeType::Var));
    }

    #[test]
    fn add_edge_outcomes() {
        let mut d = LabeledDag::new(1).unwrap();
        let add = d.add_node(NodeType::Add, 0.0).unwrap();
        assert_eq!(d.add_edge(0, add), Ok(EdgeOutcome::Added));
        assert_eq!(d.inputs(add), &[0]);
        assert_eq!(d.add_edge(0, add), Ok(EdgeOutcome::SkippedDuplicate));
        assert_eq!(d.add_edge(add, 0), Ok(EdgeOutcome::SkippedCycle));
        assert_eq!(d.add_edge(add, add), Ok(EdgeOutcome::SkippedCycle));
        assert_eq!(d.add_edge(0, 9), Err(DagError::InvalidNode(9)));
        assert_eq!(d.edge_count(), 1);
    }

    #[test]
    fn reachability() {
        let d = sin_plus_cos();
        assert!(d.reachable(0, 3).unwrap());
        assert!(!d.reachable(3, 0).unwrap());
        assert!(d.reachable(0, 0).unwrap());
        assert!(d.reachable(0, 7).is_err());
    }

    #[test]
    fn evaluation() {
        let d = sin_plus_cos();
        let vals = d.evaluate(&[0.0]).unwrap();
        assert!((vals[3] - 1.0).abs() < 1e-15);
        assert!(d.evaluate(&[]).is_err());

        let mut inv = LabeledDag::new(1).unwrap();
        let i = inv.add_node_from(NodeType::Inv, 0.0, 0).unwrap();
        assert_eq!(inv.evaluate(&[0.0]).unwrap()[i], 1.0);
        assert_eq!(inv.evaluate(&[4.0]).unwrap()[i], 0.25);

        let lone = LabeledDag::new(1).unwrap();
        assert_eq!(lone.evaluate(&[3.5]).unwrap(), vec![3.5]);
    }

    #[test]
    fn protected_ops() {
        assert_eq!(protected_log(0.0), 0.0);
        assert!((protected_log(-std::f64::consts::E) - 1.0).abs() < 1e-15);
        assert!(protected_exp(1e6).is_finite());
        assert_eq!(protected_pow(0.0, 2.0), 0.0);
        assert_eq!(protected_pow(0.0, 0.0), 1.0);
        assert_eq!(protected_pow(-2.0, 2.0), 4.0);
        assert_eq!(protected_pow(0.0, -1.0), 1.0);
        assert!(protected_pow(f64::NAN, 2.0).is_nan());
    }

    #[test]
    fn pow_with_one_input_uses_unit_exponent() {
        let mut d = LabeledDag::new(1).unwrap();
        let p = d.add_node_from(NodeType::Pow, 0.0, 0).unwrap();
        assert_eq!(d.evaluate(&[-3.0]).unwrap()[p], 3.0);
    }

    #[test]
    fn var_ignores_inputs() {
        let mut d = LabeledDag::new(2).unwrap();
        let k = d.add_node_from(NodeType::Const, 5.0, 1).unwrap();
        assert_eq!(d.add_edge(k, 0), Ok(EdgeOutcome::Added));
        assert_eq!(d.evaluate(&[2.0, 3.0]).unwrap(), vec![2.0, 3.0, 5.0]);
    }

    #[test]
    fn tau_tuples() {
        let d = sin_plus_cos();
        assert_eq!(d.tau(3).unwrap(), TauTuple([2, 0, 1, 0, 0, 0]));
        assert_eq!(d.tau(0).unwrap(), TauTuple([0, 2, 0, 1, 0, 0]));
        assert_eq!(LabeledDag::new(1).unwrap().tau(0).unwrap(), TauTuple::default());
        assert!(d.tau(10).is_err());
    }

    #[test]
    fn tau_counts_shortest_distance_only() {
        // x0 -> a -> b and x0 -> b: b is at distance 1 from x0, not 2.
        let mut d = LabeledDag::new(1).unwrap();
        let a = d.add_node_from(NodeType::Sin, 0.0, 0).unwrap();
        let b = d.add_node_from(NodeType::Add, 0.0, a).unwrap();
        d.add_edge(0, b).unwrap();
        assert_eq!(d.tau(0).unwrap(), TauTuple([0, 2, 0, 0, 0, 0]));
        assert_eq!(d.tau(b).unwrap(), TauTuple([2, 0, 0, 0, 0, 0]));
    }

    #[test]
    fn depth_of_small_dags() {
        assert_eq!(LabeledDag::new(2).unwrap().depth(), 0);
        assert_eq!(sin_plus_cos().depth(), 2);
        let mut d = LabeledDag::new(3).unwrap();
        let mul = d.add_node_from(NodeType::Mul, 0.0, 0).unwrap();
        d.add_edge(1, mul).unwrap();
        d.add_edge(2, mul).unwrap();
        assert_eq!(d.depth(), 1);
    }

    #[test]
    fn fingerprints() {
        let d = sin_plus_cos();
        let fp = d.structural_fingerprint();
        assert_eq!(
            fp.0,
            vec![
                (FingerprintLabel::Var(0), vec![]),
                (FingerprintLabel::Op('c'), vec![0]),
                (FingerprintLabel::Op('s'), vec![0]),
                (FingerprintLabel::Op('+'), vec![1, 2]),
            ]
        );
        let vars = LabeledDag::new(2).unwrap().structural_fingerprint();
        assert_eq!(vars.0, vec![(FingerprintLabel::Var(0), vec![]), (FingerprintLabel::Var(1), vec![])]);

        let mut p1 = LabeledDag::new(2).unwrap();
        let p = p1.add_node_from(NodeType::Pow, 0.0, 0).unwrap();
        p1.add_edge(1, p).unwrap();
        let mut p2 = LabeledDag::new(2).unwrap();
        let p = p2.add_node_from(NodeType::Pow, 0.0, 1).unwrap();
        p2.add_edge(0, p).unwrap();
        assert_ne!(p1.structural_fingerprint(), p2.structural_fingerprint());
    }

    #[test]
    fn remapping() {
        let d = sin_plus_cos();
        assert_eq!(d.remap_internal_ids(&[0, 1, 2]).unwrap(), d);
        let swapped = d.remap_internal_ids(&[1, 0, 2]).unwrap();
        assert_ne!(swapped.structural_fingerprint(), d.structural_fingerprint());
        assert_eq!(swapped.kind(1), NodeType::Sin);
        assert_eq!(swapped.kind(2), NodeType::Cos);
        assert!(swapped.is_acyclic());
        assert_eq!(swapped.edge_count(), 4);
        assert!(d.remap_internal_ids(&[0, 0, 1]).is_err());
        assert!(d.remap_internal_ids(&[0, 1]).is_err());
    }

    #[test]
    fn const_normalization() {
        let mut d = LabeledDag::new(1).unwrap();
        let s = d.add_node_from(NodeType::Sin, 0.0, 0).unwrap();
        let c = d.add_node_from(NodeType::Cos, 0.0, s).unwrap();
        let k = d.add_node_from(NodeType::Const, 2.0, c).unwrap();
        let n = d.normalize_const_creation();
        assert_eq!(n.inputs(k), &[0]);
        assert!(!n.has_edge(c, k));
        assert_eq!(n.edge_count(), d.edge_count());
        assert_eq!(n.normalize_const_creation(), n);
        assert_eq!(sin_plus_cos().normalize_const_creation(), sin_plus_cos());
    }

    #[test]
    fn const_normalization_collapses_duplicate_anchor() {
        let mut d = LabeledDag::new(2).unwrap();
        let k = d.add_node_from(NodeType::Const, 1.0, 1).unwrap();
        d.add_edge(0, k).unwrap();
        let n = d.normalize_const_creation();
        assert_eq!(n.inputs(k), &[0]);
        assert_eq!(n.edge_count(), 1);
    }

    #[test]
    fn const_without_inputs_gets_anchored() {
        let mut nodes = LabeledDag::new(1).unwrap().nodes().to_vec();
        nodes.push(Node {
            kind: NodeType::Const,
            payload: 3.0,
            inputs: vec![],
        });
        let d = LabeledDag::from_parts(1, nodes).unwrap();
        assert_eq!(d.normalize_const_creation().inputs(1), &[0]);
    }

    #[test]
    fn strip_edges_into_vars() {
        let mut d = LabeledDag::new(1).unwrap();
        let s = d.add_node_from(NodeType::Sin, 0.0, 0).unwrap();
        let mut d2 = LabeledDag::new(2).unwrap();
        let k = d2.add_node_from(NodeType::Const, 1.0, 1).unwrap();
        d2.add_edge(k, 0).unwrap();
        let stripped = d2.strip_var_inputs();
        assert!(!stripped.has_edge(k, 0));
        assert!(!stripped.has_var_inputs());
        assert_eq!(stripped.evaluate(&[0.3, 0.7]), d2.evaluate(&[0.3, 0.7]));
        assert_eq!(d.strip_var_inputs(), d);
        assert_eq!(d.inputs(s), &[0]);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let d = sin_plus_cos();
        let text = d.to_json_string();
        assert_eq!(LabeledDag::from_json_str(&text).unwrap(), d);
        let cyclic = r#"{"m":1,"nodes":[{"id":0,"type":"Var","payload":0},{"id":1,"type":"Sin","payload":0},{"id":2,"type":"Cos","payload":0}],"inputs":{"1":[0,2],"2":[1]}}"#;
        assert!(LabeledDag::from_json_str(cyclic).is_err());
        let bad_var = r#"{"m":1,"nodes":[{"id":0,"type":"Sin","payload":0}]}"#;
        assert!(LabeledDag::from_json_str(bad_var).is_err());
    }

    #[test]
    fn infix() {
        assert_eq!(sin_plus_cos().to_infix(), "(cos(x0) + sin(x0))");
    }
}
