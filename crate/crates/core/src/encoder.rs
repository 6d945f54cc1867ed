//! DAG-to-string encoding.
//!
//! The encoder replays a DAG onto a fresh machine. At every step it scans
//! pointer displacements `(a, b)` in spiral order and takes the first
//! applicable operation, in priority order: insert via the primary pointer,
//! insert via the secondary pointer, edge `p -> q`, edge `q -> p`.
//! [`EncoderState`] holds the replay and is shared with the canonical search,
//! which branches where the greedy encoder picks a single candidate.

use thiserror::Error;

use crate::dag::{Arity, LabeledDag, NodeId, NodeType};
use crate::isa::{Cdll, Handle};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("encoding stalled with {nodes_left} nodes and {edges_left} edges left")]
    Stalled { nodes_left: usize, edges_left: usize },
    #[error("input graph has a cycle")]
    Cyclic,
}

/// All `(a, b)` with `-n <= a, b <= n`, sorted by `(|a|+|b|, |a|, a, b)`.
pub fn spiral_pairs(n: usize) -> Vec<(isize, isize)> {
    let n = n as isize;
    let mut pairs: Vec<(isize, isize)> = (-n..=n).flat_map(|a| (-n..=n).map(move |b| (a, b))).collect();
    pairs.sort_by_key(|&(a, b)| (a.abs() + b.abs(), a.abs(), a, b));
    pairs
}

/// Spiral orders for every size up to a bound, computed once per encoding.
pub(crate) struct SpiralTable {
    by_size: Vec<Vec<(isize, isize)>>,
}

impl SpiralTable {
    pub(crate) fn new(max_n: usize) -> Self {
        SpiralTable {
            by_size: (0..=max_n).map(spiral_pairs).collect(),
        }
    }

    pub(crate) fn get(&self, n: usize) -> &[(isize, isize)] {
        &self.by_size[n]
    }
}

pub(crate) fn push_moves(out: &mut String, steps: isize, forward: char, backward: char) {
    let c = if steps > 0 { forward } else { backward };
    for _ in 0..steps.unsigned_abs() {
        out.push(c);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Action {
    /// Insert an out-neighbour of the node under the displaced pointer.
    Insert { primary: bool, steps: isize, via: Handle },
    /// Place edge `val(p~) -> val(q~)` (`forward`) or the reverse.
    Edge {
        forward: bool,
        a: isize,
        b: isize,
        p: Handle,
        q: Handle,
    },
}

pub(crate) struct InsertUndo {
    primary: bool,
    old_pointer: Handle,
    source: NodeId,
    node: NodeId,
}

pub(crate) struct EdgeUndo {
    old_p: Handle,
    old_q: Handle,
    source: NodeId,
    target: NodeId,
}

/// Replay of an input DAG onto an output machine. The list stores input ids,
/// so `val` and `o2i` are folded together; `i2o` gives output ids.
pub struct EncoderState<'a> {
    dag: &'a LabeledDag,
    list: Cdll,
    p: Handle,
    q: Handle,
    i2o: Vec<Option<NodeId>>,
    o2i: Vec<NodeId>,
    /// Per input node, which entries of its input list are already placed.
    placed: Vec<Vec<bool>>,
    placed_count: Vec<usize>,
    /// Per node, how many uninserted out-neighbours it may still create.
    open: Vec<usize>,
    nodes_left: usize,
    edges_left: usize,
    keep_unary_operand: bool,
}

/// `v` must be created from its first input: always for `Pow`, and for
/// unary nodes when their value must survive (they read only `σ[0]`).
fn anchored(dag: &LabeledDag, v: NodeId, keep_unary_operand: bool) -> bool {
    match dag.kind(v).arity() {
        Arity::Binary => true,
        Arity::Unary => keep_unary_operand,
        _ => false,
    }
}

/// Nodes that may create `v`.
fn creators(dag: &LabeledDag, v: NodeId, keep_unary_operand: bool) -> &[NodeId] {
    let inputs = dag.inputs(v);
    if anchored(dag, v, keep_unary_operand) {
        &inputs[..inputs.len().min(1)]
    } else {
        inputs
    }
}

impl<'a> EncoderState<'a> {
    /// State for the canonical search: only `Pow` operand order is kept,
    /// matching the isomorphism relation.
    pub fn new(dag: &'a LabeledDag) -> Self {
        Self::with_operand_order(dag, false)
    }

    /// With `keep_unary_operand`, a unary node with extra in-edges is created
    /// from its first input, so decoding evaluates it the same way.
    pub fn with_operand_order(dag: &'a LabeledDag, keep_unary_operand: bool) -> Self {
        let m = dag.num_vars();
        let mut i2o = vec![None; dag.len()];
        for (i, slot) in i2o.iter_mut().take(m).enumerate() {
            *slot = Some(i);
        }
        let list = Cdll::from_values(0..m);
        let head = list.head();
        let mut open = vec![0; dag.len()];
        for v in m..dag.len() {
            for &u in creators(dag, v, keep_unary_operand) {
                open[u] += 1;
            }
        }
        EncoderState {
            dag,
            list,
            p: head,
            q: head,
            i2o,
            o2i: (0..m).collect(),
            placed: dag.nodes().iter().map(|n| vec![false; n.inputs.len()]).collect(),
            placed_count: vec![0; dag.len()],
            open,
            nodes_left: dag.internal_count(),
            edges_left: dag.edge_count(),
            keep_unary_operand,
        }
    }

    pub fn nodes_left(&self) -> usize {
        self.nodes_left
    }

    pub fn edges_left(&self) -> usize {
        self.edges_left
    }

    pub fn is_done(&self) -> bool {
        self.nodes_left == 0 && self.edges_left == 0
    }

    pub fn output_size(&self) -> usize {
        self.o2i.len()
    }

    pub fn i2o(&self, input: NodeId) -> Option<NodeId> {
        self.i2o[input]
    }

    pub fn o2i(&self, output: NodeId) -> NodeId {
        self.o2i[output]
    }

    fn eligible(&self, source: NodeId, candidate: NodeId) -> bool {
        !anchored(self.dag, candidate, self.keep_unary_operand) || self.dag.inputs(candidate).first() == Some(&source)
    }

    /// Uninserted, eligible out-neighbours of `source`, in ascending id order.
    pub(crate) fn insert_candidates(&self, source: NodeId) -> Vec<NodeId> {
        let mut c: Vec<NodeId> = self
            .dag
            .outputs(source)
            .iter()
            .copied()
            .filter(|&v| self.i2o[v].is_none() && self.eligible(source, v))
            .collect();
        c.sort_unstable();
        c
    }

    fn has_insert_candidate(&self, source: NodeId) -> bool {
        self.open[source] > 0
    }

    fn set_open(&mut self, node: NodeId, inserted: bool) {
        for &u in creators(self.dag, node, self.keep_unary_operand) {
            if inserted {
                self.open[u] -= 1;
            } else {
                self.open[u] += 1;
            }
        }
    }

    /// Whether `u -> v` is an unplaced input edge that may be placed now.
    /// Inputs of a `Pow` node are placed strictly in operand order.
    fn edge_placeable(&self, u: NodeId, v: NodeId) -> bool {
        let Some(idx) = self.dag.inputs(v).iter().position(|&w| w == u) else {
            return false;
        };
        if self.placed[v][idx] {
            return false;
        }
        self.dag.kind(v) != NodeType::Pow || idx == self.placed_count[v]
    }

    fn mark(&mut self, u: NodeId, v: NodeId, value: bool) {
        let idx = self
            .dag
            .inputs(v)
            .iter()
            .position(|&w| w == u)
            .expect("marked edges exist in the input");
        self.placed[v][idx] = value;
        if value {
            self.placed_count[v] += 1;
        } else {
            self.placed_count[v] -= 1;
        }
    }

    /// First applicable operation in spiral order, or `None` if nothing
    /// applies anywhere.
    pub(crate) fn next_action(&self, pairs: &[(isize, isize)]) -> Option<Action> {
        let n = self.list.len() as isize;
        let span = (2 * n + 1) as usize;
        let mut p_at = Vec::with_capacity(span);
        let mut q_at = Vec::with_capacity(span);
        let (mut pb, mut qb) = (self.p, self.q);
        for _ in 0..n {
            pb = self.list.prev(pb);
            qb = self.list.prev(qb);
        }
        for _ in 0..span {
            p_at.push(pb);
            q_at.push(qb);
            pb = self.list.next(pb);
            qb = self.list.next(qb);
        }
        let inserting = self.nodes_left > 0;
        let p_can: Vec<bool> = if inserting {
            p_at.iter().map(|&h| self.has_insert_candidate(self.list.value(h))).collect()
        } else {
            Vec::new()
        };
        let q_can: Vec<bool> = if inserting {
            q_at.iter().map(|&h| self.has_insert_candidate(self.list.value(h))).collect()
        } else {
            Vec::new()
        };
        for &(a, b) in pairs {
            let ia = (a + n) as usize;
            let ib = (b + n) as usize;
            if inserting && p_can[ia] {
                return Some(Action::Insert {
                    primary: true,
                    steps: a,
                    via: p_at[ia],
                });
            }
            if inserting && q_can[ib] {
                return Some(Action::Insert {
                    primary: false,
                    steps: b,
                    via: q_at[ib],
                });
            }
            let up = self.list.value(p_at[ia]);
            let uq = self.list.value(q_at[ib]);
            if self.edge_placeable(up, uq) {
                return Some(Action::Edge {
                    forward: true,
                    a,
                    b,
                    p: p_at[ia],
                    q: q_at[ib],
                });
            }
            if self.edge_placeable(uq, up) {
                return Some(Action::Edge {
                    forward: false,
                    a,
                    b,
                    p: p_at[ia],
                    q: q_at[ib],
                });
            }
        }
        None
    }

    pub(crate) fn value(&self, h: Handle) -> NodeId {
        self.list.value(h)
    }

    pub(crate) fn insert(&mut self, node: NodeId, via: Handle, primary: bool) -> InsertUndo {
        let source = self.list.value(via);
        let old_pointer = if primary {
            std::mem::replace(&mut self.p, via)
        } else {
            std::mem::replace(&mut self.q, via)
        };
        self.list.insert_after(via, node);
        self.i2o[node] = Some(self.o2i.len());
        self.o2i.push(node);
        self.mark(source, node, true);
        self.set_open(node, true);
        self.nodes_left -= 1;
        self.edges_left -= 1;
        InsertUndo {
            primary,
            old_pointer,
            source,
            node,
        }
    }

    pub(crate) fn undo_insert(&mut self, undo: InsertUndo) {
        self.edges_left += 1;
        self.nodes_left += 1;
        self.set_open(undo.node, false);
        self.mark(undo.source, undo.node, false);
        self.o2i.pop();
        self.i2o[undo.node] = None;
        self.list.remove_last();
        if undo.primary {
            self.p = undo.old_pointer;
        } else {
            self.q = undo.old_pointer;
        }
    }

    pub(crate) fn place_edge(&mut self, p: Handle, q: Handle, forward: bool) -> EdgeUndo {
        let (up, uq) = (self.list.value(p), self.list.value(q));
        let (source, target) = if forward { (up, uq) } else { (uq, up) };
        self.mark(source, target, true);
        self.edges_left -= 1;
        let old_p = std::mem::replace(&mut self.p, p);
        let old_q = std::mem::replace(&mut self.q, q);
        EdgeUndo {
            old_p,
            old_q,
            source,
            target,
        }
    }

    pub(crate) fn undo_edge(&mut self, undo: EdgeUndo) {
        self.p = undo.old_p;
        self.q = undo.old_q;
        self.edges_left += 1;
        self.mark(undo.source, undo.target, false);
    }
}

/// Text emitted for an insert action of `node`.
pub(crate) fn push_insert(out: &mut String, primary: bool, steps: isize, kind: NodeType) {
    if primary {
        push_moves(out, steps, 'N', 'P');
        out.push('V');
    } else {
        push_moves(out, steps, 'n', 'p');
        out.push('v');
    }
    out.push(kind.label().expect("inserted nodes are labeled"));
}

pub(crate) fn push_edge(out: &mut String, a: isize, b: isize, forward: bool) {
    push_moves(out, a, 'N', 'P');
    push_moves(out, b, 'n', 'p');
    out.push(if forward { 'C' } else { 'c' });
}

/// Greedy encoding; at insert steps the lowest-id candidate is taken.
/// Decoding the result with `dag.num_vars()` variables gives a DAG
/// isomorphic to `dag` that also evaluates identically.
pub fn d2s(dag: &LabeledDag) -> Result<String, EncodeError> {
    if !dag.is_acyclic() {
        return Err(EncodeError::Cyclic);
    }
    let spiral = SpiralTable::new(dag.len());
    let mut state = EncoderState::with_operand_order(dag, true);
    let mut out = String::new();
    while !state.is_done() {
        match state.next_action(spiral.get(state.output_size())) {
            Some(Action::Insert { primary, steps, via }) => {
                let node = state.insert_candidates(state.value(via))[0];
                push_insert(&mut out, primary, steps, dag.kind(node));
                state.insert(node, via, primary);
            }
            Some(Action::Edge { forward, a, b, p, q }) => {
                push_edge(&mut out, a, b, forward);
                state.place_edge(p, q, forward);
            }
            None => {
                return Err(EncodeError::Stalled {
                    nodes_left: state.nodes_left(),
                    edges_left: state.edges_left(),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::{Node, OperationSet};
    use crate::isa::s2d;

    #[test]
    fn spiral_small() {
        assert_eq!(spiral_pairs(0), vec![(0, 0)]);
        let p1 = spiral_pairs(1);
        assert_eq!(&p1[..5], &[(0, 0), (0, -1), (0, 1), (-1, 0), (1, 0)]);
        assert_eq!(p1.len(), 9);
        assert_eq!(spiral_pairs(2).len(), 25);
        assert_eq!(
            &spiral_pairs(2)[5..13],
            &[(0, -2), (0, 2), (-1, -1), (-1, 1), (1, -1), (1, 1), (-2, 0), (2, 0)]
        );
    }

    #[test]
    fn greedy_trivial() {
        let d = LabeledDag::new(3).unwrap();
        assert_eq!(d2s(&d).unwrap(), "");
        let d = s2d("Vs", 1, &OperationSet::full()).unwrap();
        assert_eq!(d2s(&d).unwrap(), "Vs");
    }

    #[test]
    fn greedy_sin_plus_cos() {
        let full = OperationSet::full();
        let d = s2d("VcVspv+Ppc", 1, &full).unwrap();
        // lowest id first: Cos (1) before Sin (2), same as the decoded order
        assert_eq!(d2s(&d).unwrap(), "VcVspv+Ppc");
    }

    #[test]
    fn greedy_handles_edges_into_vars() {
        let full = OperationSet::full();
        let d = s2d("VkNnnC", 2, &full).unwrap();
        assert!(d.has_var_inputs());
        let w = d2s(&d).unwrap();
        let back = s2d(&w, 2, &full).unwrap();
        assert_eq!(back.edge_count(), d.edge_count());
        assert!(back.has_var_inputs());
    }

    #[test]
    fn pow_created_from_base() {
        // Pow(x1, x0): base is x1 even though x0 has the lower id.
        let mut d = LabeledDag::new(2).unwrap();
        let p = d.add_node_from(NodeType::Pow, 0.0, 1).unwrap();
        d.add_edge(0, p).unwrap();
        let w = d2s(&d).unwrap();
        let back = s2d(&w, 2, &OperationSet::full()).unwrap();
        assert_eq!(back.inputs(2), &[1, 0]);
    }

    #[test]
    fn stall_on_unreachable_node() {
        let mut nodes = LabeledDag::new(1).unwrap().nodes().to_vec();
        nodes.push(Node {
            kind: NodeType::Sin,
            payload: 0.0,
            inputs: vec![],
        });
        let d = LabeledDag::from_parts(1, nodes).unwrap();
        assert_eq!(
            d2s(&d),
            Err(EncodeError::Stalled {
                nodes_left: 1,
                edges_left: 0
            })
        );
    }

    #[test]
    fn greedy_keeps_the_operand_of_a_unary_node() {
        // sin reads x1 but also has an extra edge from x0
        let mut d = LabeledDag::new(2).unwrap();
        let s = d.add_node_from(NodeType::Sin, 0.0, 1).unwrap();
        d.add_edge(0, s).unwrap();
        let w = d2s(&d).unwrap();
        let back = s2d(&w, 2, &OperationSet::full()).unwrap();
        assert_eq!(back.inputs(2)[0], 1);
        assert_eq!(back.evaluate(&[0.0, 1.0]).unwrap()[2], 1f64.sin());
    }
}
