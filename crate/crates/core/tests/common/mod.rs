#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write;
use std::path::PathBuf;

use ioid_core::algebra::{BigRational, Monomial, MultiPoly, RatFunc};
use ioid_core::identifiability::parse_function;
use ioid_core::model::{parse_model, LinearModel, Model};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn load(name: &str) -> Model {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("models").join(format!("{name}.model"));
    parse_model(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Parses parameter expressions written in the model's symbols.
pub fn funcs(model: &LinearModel, texts: &[&str]) -> Vec<RatFunc> {
    texts.iter().map(|t| parse_function(model, t).unwrap()).collect()
}

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn small<R: Rng>(rng: &mut R) -> i64 {
    let v = rng.gen_range(1..=3);
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

/// Random polynomial with up to `terms` terms of total degree at most
/// `max_deg` and small integer coefficients.
pub fn random_poly<R: Rng>(rng: &mut R, nvars: usize, terms: usize, max_deg: u32) -> MultiPoly {
    let mut p = MultiPoly::zero(nvars);
    for _ in 0..rng.gen_range(1..=terms) {
        let mut e = vec![0u32; nvars];
        let mut budget = rng.gen_range(0..=max_deg);
        while budget > 0 {
            e[rng.gen_range(0..nvars)] += 1;
            budget -= 1;
        }
        let c = rng.gen_range(-5i64..=5);
        p = &p + &MultiPoly::from_terms(nvars, [(Monomial::from_exponents(e), q(c))]);
    }
    p
}

/// Determinant by Laplace expansion along the first row.
pub fn cofactor_det(m: &[Vec<MultiPoly>], nvars: usize) -> MultiPoly {
    if m.is_empty() {
        return MultiPoly::one(nvars);
    }
    let mut acc = MultiPoly::zero(nvars);
    for j in 0..m.len() {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<MultiPoly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = &m[0][j] * &cofactor_det(&minor, nvars);
        acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

fn coefficient_text<R: Rng>(rng: &mut R, nparams: usize) -> String {
    if rng.gen_bool(0.75) {
        let p = rng.gen_range(1..=nparams);
        if rng.gen_bool(0.3) {
            format!("-p{p}")
        } else {
            format!("p{p}")
        }
    } else {
        format!("{}", small(rng))
    }
}

/// Random affine system with `outputs` outputs, up to `max_states` states,
/// and optionally one input and constant offsets.
pub fn random_system<R: Rng>(rng: &mut R, max_states: usize, outputs: usize, with_input: bool) -> String {
    let n = rng.gen_range(outputs.max(1)..=max_states.max(outputs));
    let nparams = rng.gen_range(2..=5);
    let mut s = String::from("system random\nparams");
    for p in 1..=nparams {
        let _ = write!(s, " p{p}");
    }
    s.push_str("\nstates");
    for i in 1..=n {
        let _ = write!(s, " x{i}");
    }
    s.push('\n');
    if with_input {
        s.push_str("inputs u\n");
    }
    let input_row = rng.gen_range(1..=n);
    for i in 1..=n {
        let mut terms = Vec::new();
        for j in 1..=n {
            if i == j || rng.gen_bool(0.5) {
                terms.push(format!("{}*x{j}", coefficient_text(rng, nparams)));
            }
        }
        if with_input && i == input_row {
            terms.push(if rng.gen_bool(0.5) { "u".into() } else { format!("p{}*u", rng.gen_range(1..=nparams)) });
        }
        if rng.gen_bool(0.15) {
            terms.push(format!("p{}", rng.gen_range(1..=nparams)));
        }
        let _ = writeln!(s, "eq x{i}' = {}", terms.join(" + "));
    }
    let mut states: Vec<usize> = (1..=n).collect();
    states.shuffle(rng);
    for (k, &i) in states.iter().take(outputs).enumerate() {
        let mut rhs = format!("x{i}");
        if rng.gen_bool(0.3) {
            rhs = format!("p{}*{rhs}", rng.gen_range(1..=nparams));
        }
        let _ = writeln!(s, "out y{} = {rhs}", k + 1);
    }
    s
}

/// Compartment model text on `n` vertices with the given edges, leaks,
/// inputs and outputs, using default rate names.
pub fn compartment_text(
    n: usize,
    edges: &[(usize, usize)],
    leaks: &[usize],
    inputs: &[usize],
    outputs: &[usize],
) -> String {
    let mut s = format!("compartment random\nvertices {n}\n");
    for (i, j) in edges {
        let _ = writeln!(s, "edge {i} -> {j}");
    }
    for v in leaks {
        let _ = writeln!(s, "leak {v}");
    }
    for v in inputs {
        let _ = writeln!(s, "input {v}");
    }
    for v in outputs {
        let _ = writeln!(s, "output {v}");
    }
    s
}

fn random_subset<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<usize> {
    (1..=n).filter(|_| rng.gen_bool(p)).collect()
}

/// Random compartment model: arbitrary simple graph, leaks, inputs and at
/// least one output.
pub fn random_compartment<R: Rng>(rng: &mut R, max_vertices: usize) -> String {
    let n = rng.gen_range(1..=max_vertices);
    let edges: Vec<(usize, usize)> =
        (1..=n).flat_map(|i| (1..=n).map(move |j| (i, j))).filter(|&(i, j)| i != j && rng.gen_bool(0.35)).collect();
    let mut outputs = random_subset(rng, n, 0.4);
    if outputs.is_empty() {
        outputs.push(rng.gen_range(1..=n));
    }
    compartment_text(n, &edges, &random_subset(rng, n, 0.4), &random_subset(rng, n, 0.3), &outputs)
}

/// Random strongly connected compartment model with one input: a
/// Hamiltonian cycle through a random permutation plus extra edges.
pub fn random_strongly_connected<R: Rng>(rng: &mut R, max_vertices: usize, outputs: usize) -> String {
    let n = rng.gen_range(2.max(outputs)..=max_vertices.max(outputs));
    let mut perm: Vec<usize> = (1..=n).collect();
    perm.shuffle(rng);
    let mut edges: BTreeSet<(usize, usize)> = (0..n).map(|k| (perm[k], perm[(k + 1) % n])).collect();
    for i in 1..=n {
        for j in 1..=n {
            if i != j && rng.gen_bool(0.2) {
                edges.insert((i, j));
            }
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    let mut outs: Vec<usize> = (1..=n).collect();
    outs.shuffle(rng);
    outs.truncate(outputs);
    outs.sort_unstable();
    compartment_text(n, &edges, &random_subset(rng, n, 0.4), &[rng.gen_range(1..=n)], &outs)
}

/// Random DAG on `1..=n` (edges go from higher to lower labels) with its
/// sinks.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize) -> (Vec<(usize, usize)>, BTreeSet<usize>) {
    let edges: Vec<(usize, usize)> =
        (1..=n).flat_map(|i| (1..i).map(move |j| (i, j))).filter(|_| rng.gen_bool(0.3)).collect();
    let sinks = (1..=n).filter(|&v| !edges.iter().any(|e| e.0 == v)).collect();
    (edges, sinks)
}
