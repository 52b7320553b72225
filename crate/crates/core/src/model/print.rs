//! Canonical text form; parsing the output gives back an equal model.

use std::fmt::{self, Write};

use super::{CompartmentModel, LinearModel, Model};
use crate::algebra::operator::write_combination;
use crate::algebra::{RatFunc, Symbols};

pub fn print_model(model: &Model) -> String {
    match model {
        Model::Linear(m) => print_system(m),
        Model::Compartment(m) => print_compartment(m),
    }
}

struct Combination<'a> {
    terms: Vec<(RatFunc, String)>,
    symbols: &'a Symbols,
}

impl fmt::Display for Combination<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_combination(f, self.terms.iter().cloned(), self.symbols)
    }
}

fn affine(m: &LinearModel, lin: &[&RatFunc], constant: &RatFunc) -> String {
    let names = m.states.iter().chain(&m.inputs);
    let mut terms: Vec<(RatFunc, String)> =
        lin.iter().zip(names).filter(|(c, _)| !c.is_zero()).map(|(c, n)| ((*c).clone(), n.clone())).collect();
    if !constant.is_zero() {
        terms.push((constant.clone(), String::new()));
    }
    Combination { terms, symbols: &m.symbols }.to_string()
}

fn print_system(m: &LinearModel) -> String {
    let mut out = String::new();
    writeln!(out, "system {}", m.name).unwrap();
    if m.num_params() > 0 {
        writeln!(out, "params {}", m.params().join(" ")).unwrap();
    }
    writeln!(out, "states {}", m.states.join(" ")).unwrap();
    if !m.inputs.is_empty() {
        writeln!(out, "inputs {}", m.inputs.join(" ")).unwrap();
    }
    for (i, x) in m.states.iter().enumerate() {
        let lin: Vec<&RatFunc> = m.a[i].iter().chain(&m.b[i]).collect();
        writeln!(out, "eq {x}' = {}", affine(m, &lin, &m.f0[i])).unwrap();
    }
    for (j, y) in m.outputs.iter().enumerate() {
        let lin: Vec<&RatFunc> = m.c[j].iter().chain(&m.d[j]).collect();
        writeln!(out, "out {y} = {}", affine(m, &lin, &m.g0[j])).unwrap();
    }
    out
}

fn print_compartment(m: &CompartmentModel) -> String {
    let mut out = String::new();
    writeln!(out, "compartment {}", m.name).unwrap();
    let params = &m.symbols.names()[..m.symbols.len() - 1];
    if !params.is_empty() {
        writeln!(out, "params {}", params.join(" ")).unwrap();
    }
    writeln!(out, "vertices {}", m.n).unwrap();
    for e in &m.edges {
        writeln!(out, "edge {} -> {} rate {}", e.from, e.to, m.symbols.name(e.rate)).unwrap();
    }
    for &(v, r) in &m.leaks {
        writeln!(out, "leak {v} rate {}", m.symbols.name(r)).unwrap();
    }
    for (kw, list) in [("input", &m.inputs), ("output", &m.outputs)] {
        for (v, scale) in list {
            if scale.is_one() {
                writeln!(out, "{kw} {v}").unwrap();
            } else {
                writeln!(out, "{kw} {v} scale {}", scale.display(&m.symbols)).unwrap();
            }
        }
    }
    out
}
