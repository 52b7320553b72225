//! Reachability, strong connectivity, theorem certificates and the
//! breadth-first spanning forest toward a source set.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::algebra::RatFunc;
use crate::error::GraphError;
use crate::model::{CompartmentModel, Model};

/// Directed graph on vertices `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for &(a, b) in edges {
            for v in [a, b] {
                if v == 0 || v > n {
                    return Err(GraphError::OutOfRange { vertex: v, n });
                }
            }
            succ[a - 1].push(b - 1);
            pred[b - 1].push(a - 1);
        }
        for l in succ.iter_mut().chain(pred.iter_mut()) {
            l.sort_unstable();
            l.dedup();
        }
        Ok(Digraph { n, succ, pred })
    }

    pub fn of(cm: &CompartmentModel) -> Self {
        let edges: Vec<_> = cm.edges.iter().map(|e| (e.from, e.to)).collect();
        Digraph::new(cm.n, &edges).expect("validated model")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, v: usize) -> Result<(), GraphError> {
        if v == 0 || v > self.n {
            Err(GraphError::OutOfRange { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }

    /// 0-based visited flags of a search from `start` along `adj`.
    fn search(&self, start: &[usize], adj: &[Vec<usize>]) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack: Vec<usize> = start.to_vec();
        for &s in start {
            seen[s] = true;
        }
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Whether some target is reachable from `from`; a vertex reaches itself.
    pub fn reachable(&self, from: usize, targets: &BTreeSet<usize>) -> Result<bool, GraphError> {
        self.check(from)?;
        for &t in targets {
            self.check(t)?;
        }
        let seen = self.search(&[from - 1], &self.succ);
        Ok(targets.iter().any(|&t| seen[t - 1]))
    }

    /// Forward and backward search from vertex 1. The one-vertex graph is
    /// strongly connected.
    pub fn strongly_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let fwd = self.search(&[0], &self.succ);
        let bwd = self.search(&[0], &self.pred);
        fwd.iter().chain(&bwd).all(|&b| b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Certificate {
    Thm1,
    Thm2,
    Thm3,
}

impl Certificate {
    pub fn describe(self) -> &'static str {
        match self {
            Certificate::Thm1 => "single output: IO-identifiable functions are identifiable",
            Certificate::Thm2 => "every vertex reaches a leak or an input: IO-identifiable functions are identifiable",
            Certificate::Thm3 => {
                "strongly connected with an input: Cramer and transfer coefficients generate the identifiable field"
            }
        }
    }
}

/// Graph conditions under which the coefficient fields coincide with the
/// field of identifiable functions. Compartment-only flags are `None` for a
/// general linear model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub single_output: bool,
    pub leak_or_input_reachable_from_all: Option<bool>,
    pub strongly_connected: Option<bool>,
    pub has_input: Option<bool>,
    pub certificates: BTreeSet<Certificate>,
}

impl ConditionReport {
    pub fn has(&self, c: Certificate) -> bool {
        self.certificates.contains(&c)
    }

    /// Full IO equations generate the identifiable field.
    pub fn elimination_gate(&self) -> bool {
        self.has(Certificate::Thm1) || self.has(Certificate::Thm2)
    }

    /// Cramer and transfer coefficients generate the identifiable field.
    pub fn cramer_gate(&self) -> bool {
        self.has(Certificate::Thm3)
    }

    /// Certificates agree with the flags, and strong connectivity with an
    /// input implies the reachability condition.
    pub fn check_consistency(&self) -> Result<(), String> {
        if self.has(Certificate::Thm1) != self.single_output {
            return Err("Thm1 certificate disagrees with the output count".into());
        }
        if self.has(Certificate::Thm2) != (self.leak_or_input_reachable_from_all == Some(true)) {
            return Err("Thm2 certificate disagrees with the reachability flag".into());
        }
        let sc_in = self.strongly_connected == Some(true) && self.has_input == Some(true);
        if self.has(Certificate::Thm3) != sc_in {
            return Err("Thm3 certificate disagrees with the connectivity flags".into());
        }
        if sc_in && self.leak_or_input_reachable_from_all != Some(true) {
            return Err("strongly connected model with an input fails the reachability condition".into());
        }
        Ok(())
    }
}

pub fn condition_report(model: &Model) -> ConditionReport {
    match model {
        Model::Compartment(cm) => compartment_conditions(cm),
        Model::Linear(lm) => {
            let single_output = lm.m() == 1;
            ConditionReport {
                single_output,
                leak_or_input_reachable_from_all: None,
                strongly_connected: None,
                has_input: None,
                certificates: single_output.then_some(Certificate::Thm1).into_iter().collect(),
            }
        }
    }
}

pub fn compartment_conditions(cm: &CompartmentModel) -> ConditionReport {
    let g = Digraph::of(cm);
    let targets: BTreeSet<usize> = cm.leaks.iter().map(|l| l.0).chain(cm.inputs.iter().map(|i| i.0)).collect();
    let reach_all = (1..=cm.n).all(|v| g.reachable(v, &targets).expect("vertex in range"));
    let sc = g.strongly_connected();
    let has_input = !cm.inputs.is_empty();
    let single_output = cm.outputs.len() == 1;
    let mut certificates = BTreeSet::new();
    if single_output {
        certificates.insert(Certificate::Thm1);
    }
    if reach_all {
        certificates.insert(Certificate::Thm2);
    }
    if sc && has_input {
        certificates.insert(Certificate::Thm3);
    }
    ConditionReport {
        single_output,
        leak_or_input_reachable_from_all: Some(reach_all),
        strongly_connected: Some(sc),
        has_input: Some(has_input),
        certificates,
    }
}

/// Forest in which every vertex has a unique path to a source, with a
/// relabeling that lists each tree in breadth-first order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningForest {
    /// Kept edges `child -> parent`, in discovery order.
    pub edges: Vec<(usize, usize)>,
    /// `relabel[v - 1]` is the new label of vertex `v`.
    pub relabel: Vec<usize>,
}

/// Multi-source breadth-first search on the reversed graph. Sources and
/// predecessors are visited in increasing order.
pub fn bfs_spanning_forest(g: &Digraph, sources: &BTreeSet<usize>) -> Result<SpanningForest, GraphError> {
    for &s in sources {
        g.check(s)?;
    }
    let n = g.n();
    let mut root = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for &s in sources {
        root[s - 1] = s - 1;
        order.push(s - 1);
        queue.push_back(s - 1);
    }
    let mut edges = Vec::new();
    while let Some(w) = queue.pop_front() {
        for &v in &g.pred[w] {
            if root[v] == usize::MAX {
                root[v] = root[w];
                edges.push((v + 1, w + 1));
                order.push(v);
                queue.push_back(v);
            }
        }
    }
    if let Some(v) = root.iter().position(|&r| r == usize::MAX) {
        return Err(GraphError::Unreachable { vertex: v + 1 });
    }
    let mut relabel = vec![0; n];
    let mut next = 1;
    for &s in sources {
        for &v in order.iter().filter(|&&v| root[v] == s - 1) {
            relabel[v] = next;
            next += 1;
        }
    }
    Ok(SpanningForest { edges, relabel })
}

/// Compartment matrix of the forest subgraph, rows and columns permuted by
/// the relabeling. Rates of dropped edges are zero; leaks are kept.
pub fn forest_matrix(cm: &CompartmentModel, forest: &SpanningForest) -> Vec<Vec<RatFunc>> {
    let kept = CompartmentModel {
        edges: cm.edges.iter().filter(|e| forest.edges.contains(&(e.from, e.to))).copied().collect(),
        ..cm.clone()
    };
    let a = kept.compartment_matrix();
    let n = cm.n;
    let mut out = vec![vec![RatFunc::zero(cm.nvars()); n]; n];
    for i in 0..n {
        for j in 0..n {
            out[forest.relabel[i] - 1][forest.relabel[j] - 1] = a[i][j].clone();
        }
    }
    out
}

pub fn is_upper_triangular(m: &[Vec<RatFunc>]) -> bool {
    m.iter().enumerate().all(|(i, row)| row[..i].iter().all(RatFunc::is_zero))
}
