//! Label-preserving isomorphism of DAGs with fixed variables.
//!
//! Two DAGs are isomorphic when some bijection fixes every variable, keeps
//! node types, and maps edges onto edges. For `Pow` nodes the operand order
//! must also be kept. Constant payloads are not compared.

use crate::dag::{LabeledDag, NodeId, NodeType, TauTuple};

/// Node mapping from the first graph to the second.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoWitness(pub Vec<NodeId>);

impl IsoWitness {
    pub fn map(&self, v: NodeId) -> NodeId {
        self.0[v]
    }

    /// The inverse mapping, from the second graph back to the first.
    pub fn inverse(&self) -> IsoWitness {
        let mut inv = vec![0; self.0.len()];
        for (v, &w) in self.0.iter().enumerate() {
            inv[w] = v;
        }
        IsoWitness(inv)
    }
}

fn inputs_match(g1: &LabeledDag, g2: &LabeledDag, map: &[Option<NodeId>], v: NodeId, w: NodeId) -> bool {
    let (a, b) = (g1.inputs(v), g2.inputs(w));
    if a.len() != b.len() {
        return false;
    }
    if g1.kind(v) == NodeType::Pow {
        return a.iter().zip(b).all(|(&u, &x)| map[u] == Some(x));
    }
    a.iter().all(|&u| map[u].is_some_and(|x| b.contains(&x)))
}

fn quick_reject(g1: &LabeledDag, g2: &LabeledDag) -> bool {
    if g1.num_vars() != g2.num_vars() || g1.len() != g2.len() || g1.edge_count() != g2.edge_count() {
        return true;
    }
    let profile = |g: &LabeledDag| {
        let mut p: Vec<(NodeType, usize, usize)> = (g.num_vars()..g.len())
            .map(|v| (g.kind(v), g.inputs(v).len(), g.outputs(v).len()))
            .collect();
        p.sort_unstable();
        p
    };
    let var_profile = |g: &LabeledDag| {
        (0..g.num_vars())
            .map(|v| (g.inputs(v).len(), g.outputs(v).len()))
            .collect::<Vec<_>>()
    };
    profile(g1) != profile(g2) || var_profile(g1) != var_profile(g2)
}

struct Matcher<'a> {
    g1: &'a LabeledDag,
    g2: &'a LabeledDag,
    order: Vec<NodeId>,
    map: Vec<Option<NodeId>>,
    used: Vec<bool>,
    tau1: Vec<TauTuple>,
    tau2: Vec<TauTuple>,
}

impl<'a> Matcher<'a> {
    fn new(g1: &'a LabeledDag, g2: &'a LabeledDag) -> Option<Self> {
        if quick_reject(g1, g2) {
            return None;
        }
        let m = g1.num_vars();
        let order: Vec<NodeId> = g1.topological_order()?.into_iter().filter(|&v| v >= m).collect();
        g2.topological_order()?;
        let mut map = vec![None; g1.len()];
        let mut used = vec![false; g2.len()];
        for x in 0..m {
            map[x] = Some(x);
            used[x] = true;
        }
        Some(Matcher {
            g1,
            g2,
            order,
            map,
            used,
            tau1: g1.tau_all(),
            tau2: g2.tau_all(),
        })
    }

    fn candidates(&self, v: NodeId) -> Vec<NodeId> {
        let (g1, g2) = (self.g1, self.g2);
        let pool: Vec<NodeId> = match g1.inputs(v).first() {
            Some(&u) => g2.outputs(self.map[u].expect("inputs precede their node")).to_vec(),
            None => (g2.num_vars()..g2.len()).collect(),
        };
        pool.into_iter()
            .filter(|&w| {
                !self.used[w]
                    && g2.kind(w) == g1.kind(v)
                    && g2.outputs(w).len() == g1.outputs(v).len()
                    && self.tau1[v] == self.tau2[w]
                    && inputs_match(g1, g2, &self.map, v, w)
            })
            .collect()
    }

    fn vars_match(&self) -> bool {
        (0..self.g1.num_vars()).all(|x| inputs_match(self.g1, self.g2, &self.map, x, x))
    }

    /// Visits every complete mapping; stops as soon as `visit` returns false.
    fn search(&mut self, depth: usize, visit: &mut dyn FnMut(&[Option<NodeId>]) -> bool) -> bool {
        if depth == self.order.len() {
            return !self.vars_match() || visit(&self.map);
        }
        let v = self.order[depth];
        for w in self.candidates(v) {
            self.map[v] = Some(w);
            self.used[w] = true;
            let go_on = self.search(depth + 1, visit);
            self.used[w] = false;
            self.map[v] = None;
            if !go_on {
                return false;
            }
        }
        true
    }
}

/// Finds an isomorphism from `g1` onto `g2`, if one exists.
pub fn isomorphic(g1: &LabeledDag, g2: &LabeledDag) -> Option<IsoWitness> {
    let mut matcher = Matcher::new(g1, g2)?;
    let mut found = None;
    matcher.search(0, &mut |map| {
        found = Some(IsoWitness(map.iter().map(|w| w.expect("complete")).collect()));
        false
    });
    found
}

/// Number of automorphisms of `g`.
pub fn count_automorphisms(g: &LabeledDag) -> u64 {
    let Some(mut matcher) = Matcher::new(g, g) else {
        return 0;
    };
    let mut count = 0u64;
    matcher.search(0, &mut |_| {
        count += 1;
        true
    });
    count
}

/// Checks a claimed isomorphism directly against both graphs.
pub fn is_valid_witness(g1: &LabeledDag, g2: &LabeledDag, witness: &IsoWitness) -> bool {
    let map = &witness.0;
    if map.len() != g1.len() || g1.len() != g2.len() || g1.edge_count() != g2.edge_count() {
        return false;
    }
    let mut seen = vec![false; g2.len()];
    for &w in map {
        if w >= g2.len() || std::mem::replace(&mut seen[w], true) {
            return false;
        }
    }
    if (0..g1.num_vars()).any(|x| map[x] != x) || g1.num_vars() != g2.num_vars() {
        return false;
    }
    if (0..g1.len()).any(|v| g1.kind(v) != g2.kind(map[v])) {
        return false;
    }
    if !g1.edges().all(|(u, v)| g2.has_edge(map[u], map[v])) {
        return false;
    }
    (0..g1.len()).filter(|&v| g1.kind(v) == NodeType::Pow).all(|v| {
        let mapped: Vec<NodeId> = g1.inputs(v).iter().map(|&u| map[u]).collect();
        mapped == g2.inputs(map[v])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::OperationSet;
    use crate::isa::s2d;

    fn dag(text: &str, m: usize) -> LabeledDag {
        s2d(text, m, &OperationSet::full()).unwrap()
    }

    #[test]
    fn relabelled_copies_match() {
        let a = dag("VcVspv+Ppc", 1);
        let b = dag("VsVcpv+Ppc", 1);
        let w = isomorphic(&a, &b).unwrap();
        assert!(is_valid_witness(&a, &b, &w));
        assert_eq!(w.0, vec![0, 2, 1, 3]);
        assert!(is_valid_witness(&b, &a, &w.inverse()));
    }

    #[test]
    fn different_labels_or_wiring_do_not_match() {
        assert!(isomorphic(&dag("Vs", 1), &dag("Vc", 1)).is_none());
        assert!(isomorphic(&dag("Vs", 2), &dag("nvs", 2)).is_none());
        assert!(isomorphic(&dag("VsVc", 1), &dag("VsNVc", 1)).is_none());
    }

    #[test]
    fn variables_are_fixed() {
        // sin(x0) vs sin(x1)
        let a = dag("Vs", 2);
        let b = dag("NVs", 2);
        assert!(isomorphic(&a, &b).is_none());
    }

    #[test]
    fn pow_operand_order_matters() {
        let a = dag("V^NNnC", 2); // x0 ^ x1
        let b = dag("NV^PpC", 2); // x1 ^ x0
        assert_eq!(a.inputs(2), &[0, 1]);
        assert_eq!(b.inputs(2), &[1, 0]);
        assert!(isomorphic(&a, &b).is_none());
        assert!(isomorphic(&a, &a).is_some());
    }

    #[test]
    fn automorphisms() {
        assert_eq!(count_automorphisms(&dag("Vs", 1)), 1);
        // two interchangeable sines
        assert_eq!(count_automorphisms(&dag("VsVs", 1)), 2);
        assert_eq!(count_automorphisms(&dag("VsVsVs", 1)), 6);
        assert_eq!(count_automorphisms(&dag("VcVspv+Ppc", 1)), 1);
    }

    #[test]
    fn witness_validation_rejects_bad_maps() {
        let a = dag("VsVs", 1);
        assert!(is_valid_witness(&a, &a, &IsoWitness(vec![0, 2, 1])));
        assert!(!is_valid_witness(&a, &a, &IsoWitness(vec![0, 1, 1])));
        assert!(!is_valid_witness(&a, &a, &IsoWitness(vec![1, 0, 2])));
    }
}
