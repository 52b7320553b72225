use crate::algebra::{RatFunc, Symbols};
use crate::error::ModelError;

use super::linear::LinearModel;

/// Directed transfer `from -> to` whose rate is the symbol `rate`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub rate: usize,
}

/// Linear compartment model on vertices `1..=n`. Rates index the symbol
/// table, whose last entry is the operator variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompartmentModel {
    pub name: String,
    pub symbols: Symbols,
    pub n: usize,
    pub edges: Vec<Edge>,
    pub leaks: Vec<(usize, usize)>,
    pub inputs: Vec<(usize, RatFunc)>,
    pub outputs: Vec<(usize, RatFunc)>,
}

impl CompartmentModel {
    pub fn nvars(&self) -> usize {
        self.symbols.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::Invalid(msg));
        if self.n == 0 {
            return bad("model has no compartments".into());
        }
        let in_range = |v: usize| (1..=self.n).contains(&v);
        let mut rates = Vec::new();
        for (k, e) in self.edges.iter().enumerate() {
            if !in_range(e.from) || !in_range(e.to) {
                return bad(format!("edge {} -> {} out of range", e.from, e.to));
            }
            if e.from == e.to {
                return bad(format!("self-loop at vertex {}", e.from));
            }
            if self.edges[..k].iter().any(|f| (f.from, f.to) == (e.from, e.to)) {
                return bad(format!("duplicate edge {} -> {}", e.from, e.to));
            }
            rates.push(e.rate);
        }
        for (k, &(v, r)) in self.leaks.iter().enumerate() {
            if !in_range(v) || self.leaks[..k].iter().any(|l| l.0 == v) {
                return bad(format!("invalid or duplicate leak at vertex {v}"));
            }
            rates.push(r);
        }
        rates.sort_unstable();
        if rates.windows(2).any(|w| w[0] == w[1]) {
            return bad("a rate symbol is used twice".into());
        }
        if rates.iter().any(|&r| r + 1 >= self.nvars()) {
            return bad("rate outside the parameter table".into());
        }
        for (what, list) in [("input", &self.inputs), ("output", &self.outputs)] {
            for (k, (v, scale)) in list.iter().enumerate() {
                if !in_range(*v) || list[..k].iter().any(|o| o.0 == *v) {
                    return bad(format!("invalid or duplicate {what} at vertex {v}"));
                }
                if scale.is_zero() {
                    return bad(format!("zero {what} scaling at vertex {v}"));
                }
            }
        }
        Ok(())
    }

    pub fn has_leak(&self, v: usize) -> bool {
        self.leaks.iter().any(|l| l.0 == v)
    }

    pub fn has_input(&self, v: usize) -> bool {
        self.inputs.iter().any(|i| i.0 == v)
    }

    /// Adjacency lists over 0-based vertices.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.from - 1].push(e.to - 1);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// The compartment matrix: off-diagonal `(i, j)` is the rate of `j -> i`,
    /// the diagonal collects outflows and leaks with negative sign.
    pub fn compartment_matrix(&self) -> Vec<Vec<RatFunc>> {
        let nv = self.nvars();
        let mut a = vec![vec![RatFunc::zero(nv); self.n]; self.n];
        for e in &self.edges {
            let rate = RatFunc::var(nv, e.rate);
            a[e.to - 1][e.from - 1] = &a[e.to - 1][e.from - 1] + &rate;
            a[e.from - 1][e.from - 1] = &a[e.from - 1][e.from - 1] - &rate;
        }
        for &(v, r) in &self.leaks {
            a[v - 1][v - 1] = &a[v - 1][v - 1] - &RatFunc::var(nv, r);
        }
        a
    }

    pub fn to_state_space(&self) -> LinearModel {
        let nv = self.nvars();
        let zero = RatFunc::zero(nv);
        let mut b = vec![vec![zero.clone(); self.inputs.len()]; self.n];
        for (k, (v, scale)) in self.inputs.iter().enumerate() {
            b[v - 1][k] = scale.clone();
        }
        let mut c = vec![vec![zero.clone(); self.n]; self.outputs.len()];
        for (k, (v, scale)) in self.outputs.iter().enumerate() {
            c[k][v - 1] = scale.clone();
        }
        LinearModel {
            name: self.name.clone(),
            symbols: self.symbols.clone(),
            states: (1..=self.n).map(|i| format!("x{i}")).collect(),
            outputs: self.outputs.iter().map(|(v, _)| format!("y{v}")).collect(),
            inputs: self.inputs.iter().map(|(v, _)| format!("u{v}")).collect(),
            a: self.compartment_matrix(),
            b,
            c,
            d: vec![vec![zero.clone(); self.inputs.len()]; self.outputs.len()],
            f0: vec![zero.clone(); self.n],
            g0: vec![zero; self.outputs.len()],
        }
    }
}
