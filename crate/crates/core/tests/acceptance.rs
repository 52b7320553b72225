//! Acceptance criteria. Run with `cargo test -p ioid-core --test acceptance`;
//! prints one PASS/FAIL line per criterion and fails if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use ioid_core::algebra::modp::{random_prime, rational_mod};
use ioid_core::algebra::{bareiss_det, poly_gcd, rat, BigRational, MultiPoly, RatFunc};
use ioid_core::graph::{bfs_spanning_forest, condition_report, forest_matrix, Certificate, Digraph};
use ioid_core::identifiability::{
    analyze, field_equivalence, solvability_diagnostic, witness_transformation, AnalyzeOptions, RankTrials,
    Solvability, Status, WitnessMap,
};
use ioid_core::io_equations::{
    check_full_set_shape, coefficients, cramer_io_equations, full_io_equations, resolve_ordering, verify_equation,
    DiffMonomial, IOEquation,
};
use ioid_core::model::{parse_model, LinearModel};
use ioid_core::transfer::{transfer_coefficients, transfer_matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const TRIALS: RankTrials = RankTrials { points: 3, primes: 3 };

/// Monic equation in output `output` of order `order` with the given
/// non-leading terms.
fn equation(model: &LinearModel, output: usize, order: usize, terms: &[(DiffMonomial, &str)]) -> IOEquation {
    let mut map = BTreeMap::new();
    for (m, text) in terms {
        map.insert(*m, funcs(model, &[text])[0].clone());
    }
    IOEquation { leading: Some((output, order)), terms: map }
}

fn y(index: usize, order: usize) -> DiffMonomial {
    DiffMonomial::Output { index, order }
}

fn u(index: usize, order: usize) -> DiffMonomial {
    DiffMonomial::Input { index, order }
}

fn show(model: &LinearModel, eqs: &[IOEquation]) -> String {
    eqs.iter().map(|e| e.display(model).to_string()).collect::<Vec<_>>().join("; ")
}

fn equivalent(model: &LinearModel, a: &[RatFunc], b: &[RatFunc], seed: u64) -> Result<bool, String> {
    field_equivalence(a, b, model.num_params(), TRIALS, &mut rng(seed)).map(|r| r.0).map_err(|e| e.to_string())
}

fn criterion_1() -> Check {
    let m = load("example1");
    let lm = m.to_linear();
    let expected = equation(&lm, 0, 2, &[(y(0, 1), "a01 + a12 + a21"), (y(0, 0), "a01*a12"), (u(0, 0), "-a21")]);
    let elim = full_io_equations(&lm, &[0]).map_err(|e| e.to_string())?;
    ensure!(elim == [expected.clone()], "elimination gave {}", show(&lm, &elim));
    let cramer = cramer_io_equations(m.as_compartment().unwrap());
    ensure!(cramer == [expected], "Cramer gave {}", show(&lm, &cramer));
    Ok(())
}

fn criterion_2() -> Check {
    let lm = load("radioactive").to_linear();
    let ordering = resolve_ordering(&lm, Some(&["y2".into(), "y1".into()])).map_err(|e| e.to_string())?;
    let eqs = full_io_equations(&lm, &ordering).map_err(|e| e.to_string())?;
    let expected = [
        equation(&lm, 1, 1, &[]),
        equation(&lm, 0, 1, &[(y(0, 0), "a"), (y(1, 0), "c"), (DiffMonomial::Constant, "-c*b")]),
    ];
    ensure!(eqs == expected, "got {}", show(&lm, &eqs));
    Ok(())
}

fn criterion_3() -> Check {
    let m = load("radioactive");
    let lm = m.to_linear();
    let eqs = full_io_equations(&lm, &[0, 1]).map_err(|e| e.to_string())?;
    let p2 = &eqs[1];
    ensure!(p2.output() == Some(1), "second equation is not in y2: {}", p2.display(&lm));
    let verdict = solvability_diagnostic(&lm, p2, 5, None, &mut rng(3)).map_err(|e| e.to_string())?;
    ensure!(verdict == Solvability::RankDeficient, "solvability of {} was {verdict:?}", p2.display(&lm));
    let map = WitnessMap::parse("x -> k*x, c -> c/k, b -> k*b + w - k*w").map_err(|e| e.to_string())?;
    ensure!(
        witness_transformation(&lm, &map, 5, &mut rng(4)).map_err(|e| e.to_string())?,
        "witness map changed the outputs"
    );
    let report = analyze(&m, &AnalyzeOptions::default()).map_err(|e| e.to_string())?;
    ensure!(report.status == Status::IOFieldOnly, "status {:?}", report.status);
    Ok(())
}

fn criterion_4() -> Check {
    for (name, output_eq, entry) in [
        ("chain_out1", vec![(y(0, 0), "a31"), (u(0, 0), "-1")], "1/(s + a31)"),
        (
            "chain_out3",
            vec![(y(0, 2), "a31 + a32"), (y(0, 1), "a31*a32"), (u(0, 0), "-a31*a32"), (u(0, 1), "-a31")],
            "a31/(s^2 + a31*s)",
        ),
    ] {
        let m = load(name);
        let lm = m.to_linear();
        let order = if name == "chain_out1" { 1 } else { 3 };
        let expected = equation(&lm, 0, order, &output_eq);
        let eqs = full_io_equations(&lm, &[0]).map_err(|e| e.to_string())?;
        ensure!(eqs == [expected], "{name}: got {}", show(&lm, &eqs));
        let h = transfer_matrix(&lm);
        let shown = h.entries[0][0].display(&lm.symbols).to_string();
        ensure!(shown == entry, "{name}: transfer entry {shown}");
        let c = condition_report(&m);
        ensure!(c.certificates == BTreeSet::from([Certificate::Thm1]), "{name}: certificates {:?}", c.certificates);
    }
    // Independent check of the reduced second entry: a31 / (s (s + a31)).
    let lm = load("chain_out3").to_linear();
    let s = RatFunc::var(lm.nvars(), lm.operator_var());
    let a31 = funcs(&lm, &["a31"]).remove(0);
    let expected = &a31 / &(&s * &(&s + &a31));
    ensure!(ioid_core::transfer::transfer_ratfuncs(&lm)[0][0] == expected, "transfer entry is not a31/(s(s + a31))");
    Ok(())
}

/// The coefficients as printed for the lead model, in equation order.
const LEAD_DISPLAYED: [&str; 4] =
    ["-(k1 + k3 + k6)", "-k1*k3 + k1*k6 - k2*k5 - k3*k6 - k3*k7", "k1*k3*k6 - k2*k3*k5 + k3*k6*k7", "k3*k4*k6"];
const LEAD_GENERATORS: [&str; 4] =
    ["k1 + k3 + k6", "-k1*k3 + k1*k6 - k2*k5 - k3*k6 - k3*k7", "k3*(k1*k6 - k2*k5 + k6*k7)", "k3*k4*k6"];

fn criterion_5() -> Check {
    let lm = load("lead").to_linear();
    let eqs = full_io_equations(&lm, &[0]).map_err(|e| e.to_string())?;
    ensure!(
        eqs.len() == 1 && eqs[0].leading == Some((0, 3)),
        "expected one third-order equation, got {}",
        show(&lm, &eqs)
    );
    let computed = coefficients(&eqs);
    let displayed = funcs(&lm, &LEAD_DISPLAYED);
    let mut problems = Vec::new();
    for (i, (c, d)) in computed.iter().zip(&displayed).enumerate() {
        if c.sign_normalized() != d.sign_normalized() {
            problems.push(format!(
                "coefficient {} is {} but the displayed value is {}",
                i + 1,
                c.display(&lm.symbols),
                d.display(&lm.symbols)
            ));
        }
    }
    if computed.len() != displayed.len() {
        problems.push(format!("{} coefficients instead of 4", computed.len()));
    }
    if !equivalent(&lm, &computed, &funcs(&lm, &LEAD_GENERATORS), 5)? {
        problems.push("field_equivalence with the displayed generator list is false".into());
    }
    ensure!(problems.is_empty(), "{}", problems.join("; "));
    Ok(())
}

fn criterion_6() -> Check {
    let m = load("bromosulfophthalein");
    let lm = m.to_linear();
    let eqs = full_io_equations(&lm, &[0, 1]).map_err(|e| e.to_string())?;
    let expected = funcs(&lm, &["k13", "k31", "k04*k42", "k24*k43", "k03 + k43", "k04 + k24 + k42"]);
    ensure!(
        equivalent(&lm, &coefficients(&eqs), &expected, 6)?,
        "coefficient field differs from the listed generators"
    );
    let c = condition_report(&m);
    ensure!(c.leak_or_input_reachable_from_all == Some(true) && c.has(Certificate::Thm2), "conditions {c:?}");
    ensure!(c.elimination_gate() && !c.single_output, "gate is not the reachability condition: {c:?}");
    Ok(())
}

fn criterion_7() -> Check {
    let m = load("cyclic");
    let lm = m.to_linear();
    let c = condition_report(&m);
    ensure!(c.has(Certificate::Thm2) && c.has(Certificate::Thm3), "certificates {:?}", c.certificates);
    let sets = [
        ("elimination", coefficients(&full_io_equations(&lm, &[0, 1]).map_err(|e| e.to_string())?)),
        ("cramer", coefficients(&cramer_io_equations(m.as_compartment().unwrap()))),
        ("transfer", transfer_coefficients(&transfer_matrix(&lm))),
        ("listed", funcs(&lm, &["a21", "(a01 + a21)*a13", "a01 + a13", "a13*a32", "a02 + a32"])),
    ];
    for (i, (na, a)) in sets.iter().enumerate() {
        for (nb, b) in &sets[i + 1..] {
            ensure!(equivalent(&lm, a, b, 7 + i as u64)?, "{na} and {nb} generate different fields");
        }
    }
    Ok(())
}

fn criterion_8() -> Check {
    let graph = [(2, 1), (3, 2), (1, 4), (3, 6), (4, 5), (5, 6), (2, 5), (5, 2)];
    let model = parse_model(&compartment_text(6, &graph, &[1, 6], &[], &[1])).map_err(|e| e.to_string())?;
    let cm = model.as_compartment().unwrap();
    let forest = bfs_spanning_forest(&Digraph::of(cm), &BTreeSet::from([1, 6])).map_err(|e| e.to_string())?;
    let edges: BTreeSet<_> = forest.edges.iter().copied().collect();
    ensure!(edges == BTreeSet::from([(2, 1), (3, 6), (5, 6), (4, 5)]), "forest edges {edges:?}");
    let mut labels = forest.relabel.clone();
    labels.sort_unstable();
    ensure!(labels == (1..=6).collect::<Vec<_>>(), "relabeling {:?} is not a permutation", forest.relabel);

    // Build A(H) directly: keep only forest edges, then permute.
    let forest_only =
        parse_model(&compartment_text(6, &forest.edges, &[1, 6], &[], &[1])).map_err(|e| e.to_string())?;
    let fm = forest_only.as_compartment().unwrap();
    let rate = |name: &str| cm.symbols.index_of(name).map(|i| RatFunc::var(cm.nvars(), i));
    let mut expected = vec![vec![RatFunc::zero(cm.nvars()); 6]; 6];
    for (r, row) in fm.compartment_matrix().iter().enumerate() {
        for (c, entry) in row.iter().enumerate() {
            // Rename symbols into the full model's table.
            let mut renamed = RatFunc::zero(cm.nvars());
            for (k, name) in fm.symbols.names().iter().enumerate() {
                if entry.depends_on(k) {
                    let coeff = if r == c { rat(-1) } else { rat(1) };
                    renamed = &renamed + &rate(name).unwrap().scale(&coeff);
                }
            }
            expected[forest.relabel[r] - 1][forest.relabel[c] - 1] = renamed;
        }
    }
    let got = forest_matrix(cm, &forest);
    let fmt = |m: &Vec<Vec<RatFunc>>| {
        m.iter()
            .map(|r| r.iter().map(|e| e.display(&cm.symbols).to_string()).collect::<Vec<_>>().join(", "))
            .collect::<Vec<_>>()
            .join(" | ")
    };
    ensure!(got == expected, "forest matrix differs from the direct construction: {} vs {}", fmt(&got), fmt(&expected));
    for (r, row) in got.iter().enumerate() {
        for (c, entry) in row.iter().enumerate() {
            ensure!(c >= r || entry.is_zero(), "entry ({}, {}) below the diagonal is nonzero", r + 1, c + 1);
        }
        ensure!(!row[r].is_zero(), "zero diagonal entry at {}", r + 1);
    }
    Ok(())
}

fn order_sum(eqs: &[IOEquation], ordering: &[usize]) -> usize {
    eqs.iter().zip(ordering).map(|(e, &o)| e.order_in_output(o).unwrap_or(0)).sum()
}

fn criterion_9a() -> Check {
    let mut r = rng(91);
    for trial in 0..50 {
        let with_input = r.gen_bool(0.7);
        let text = random_system(&mut r, 3, 1, with_input);
        let lm = parse_model(&text).map_err(|e| e.to_string())?.to_linear();
        let eqs = full_io_equations(&lm, &[0]).map_err(|e| format!("trial {trial}: {e}\n{text}"))?;
        check_full_set_shape(&lm, &eqs, &[0]).map_err(|e| format!("trial {trial}: {e}"))?;
        ensure!(order_sum(&eqs, &[0]) <= lm.n(), "trial {trial}: order budget exceeded\n{text}");
        let ok = verify_equation(&lm, &eqs[0], 2, &mut r).map_err(|e| e.to_string())?;
        ensure!(ok, "trial {trial}: residual nonzero for {}\n{text}", eqs[0].display(&lm));
        let v = solvability_diagnostic(&lm, &eqs[0], 5, None, &mut r).map_err(|e| e.to_string())?;
        ensure!(v == Solvability::Solvable, "trial {trial}: {} is {v:?}\n{text}", eqs[0].display(&lm));
    }
    Ok(())
}

fn criterion_9b() -> Check {
    let mut r = rng(92);
    for trial in 0..30 {
        let outputs = if trial % 2 == 0 { 1 } else { 2 };
        let text = random_strongly_connected(&mut r, 4, outputs);
        let m = parse_model(&text).map_err(|e| e.to_string())?;
        let lm = m.to_linear();
        let cramer = cramer_io_equations(m.as_compartment().unwrap());
        if outputs == 1 {
            let elim = full_io_equations(&lm, &[0]).map_err(|e| e.to_string())?;
            ensure!(
                elim == cramer,
                "trial {trial}: elimination {} vs Cramer {}\n{text}",
                show(&lm, &elim),
                show(&lm, &cramer)
            );
        }
        let h = transfer_coefficients(&transfer_matrix(&lm));
        ensure!(
            equivalent(&lm, &h, &coefficients(&cramer), 900 + trial)?,
            "trial {trial}: transfer and Cramer fields differ\n{text}"
        );
    }
    Ok(())
}

fn criterion_9c() -> Check {
    let mut r = rng(93);
    for trial in 0..30 {
        let with_input = r.gen_bool(0.5);
        let text = if trial % 3 == 2 {
            random_strongly_connected(&mut r, 3, 2)
        } else {
            random_system(&mut r, 3, 2, with_input)
        };
        let lm = parse_model(&text).map_err(|e| e.to_string())?.to_linear();
        let a = full_io_equations(&lm, &[0, 1]).map_err(|e| e.to_string())?;
        let b = full_io_equations(&lm, &[1, 0]).map_err(|e| e.to_string())?;
        ensure!(
            equivalent(&lm, &coefficients(&a), &coefficients(&b), 950 + trial)?,
            "trial {trial}: orderings give different fields: {} | {}\n{text}",
            show(&lm, &a),
            show(&lm, &b)
        );
    }
    Ok(())
}

fn criterion_9d() -> Check {
    let mut r = rng(94);
    for trial in 0..1000 {
        let n = r.gen_range(1..=5);
        let nv = if n <= 3 { 2 } else { 1 };
        let deg = if n <= 3 { 1 } else { 0 };
        let m: Vec<Vec<MultiPoly>> =
            (0..n).map(|_| (0..n).map(|_| random_poly(&mut r, nv, 2, deg)).collect()).collect();
        let d = bareiss_det(&m, nv).map_err(|e| e.to_string())?;
        ensure!(d == cofactor_det(&m, nv), "trial {trial}: determinant mismatch for {n}x{n}");
    }
    for trial in 0..1000 {
        let nv = r.gen_range(1..=3);
        let g = random_poly(&mut r, nv, 3, 2);
        let a = &g * &random_poly(&mut r, nv, 3, 2);
        let b = &g * &random_poly(&mut r, nv, 3, 2);
        let h = poly_gcd(&a, &b);
        if a.is_zero() && b.is_zero() {
            continue;
        }
        let (Some(qa), Some(qb)) = (a.div_exact(&h), b.div_exact(&h)) else {
            return Err(format!("trial {trial}: gcd does not divide both inputs"));
        };
        ensure!(poly_gcd(&qa, &qb).is_constant(), "trial {trial}: cofactors are not coprime");
        ensure!(g.is_zero() || h.div_exact(&g).is_some(), "trial {trial}: planted factor does not divide the gcd");
    }
    for trial in 0..1000 {
        let nv = r.gen_range(1..=4);
        let p = random_poly(&mut r, nv, 4, 4);
        let q = random_poly(&mut r, nv, 4, 4);
        let prime = random_prime(&mut r);
        let point: Vec<u64> = (0..nv).map(|_| r.gen_range(0..prime)).collect();
        let ev = |x: &MultiPoly| x.eval_mod(&point, prime).map_err(|e| e.to_string());
        let mul = |a: u64, b: u64| ((a as u128 * b as u128) % prime as u128) as u64;
        let add = |a: u64, b: u64| ((a as u128 + b as u128) % prime as u128) as u64;
        ensure!(ev(&(&p * &q))? == mul(ev(&p)?, ev(&q)?), "trial {trial}: product not preserved");
        ensure!(ev(&(&p + &q))? == add(ev(&p)?, ev(&q)?), "trial {trial}: sum not preserved");
        // Agreement with exact evaluation reduced modulo the prime.
        let exact_point: Vec<BigRational> = point.iter().map(|&v| BigRational::from_integer(v.into())).collect();
        let exact = rational_mod(&p.eval(&exact_point), prime);
        ensure!(exact == Some(ev(&p)?), "trial {trial}: modular and exact evaluation disagree");
    }
    Ok(())
}

fn criterion_9() -> Check {
    let parts: [(&str, fn() -> Check); 4] =
        [("a", criterion_9a), ("b", criterion_9b), ("c", criterion_9c), ("d", criterion_9d)];
    let failures: Vec<String> =
        parts.iter().filter_map(|(name, f)| f().err().map(|e| format!("({name}) {e}"))).collect();
    ensure!(failures.is_empty(), "{}", failures.join("; "));
    Ok(())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("two-compartment equation by elimination and Cramer", criterion_1),
        ("decay model full set with ordering y2 < y1", criterion_2),
        ("decay model solvability failure and witness map", criterion_3),
        ("chain models: equations, transfer entries, certificates", criterion_4),
        ("lead model coefficients and generator field", criterion_5),
        ("bromosulfophthalein generator field and gate", criterion_6),
        ("cyclic model generator fields and gates", criterion_7),
        ("spanning forest of the six-vertex graph", criterion_8),
        ("property suites", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(()) => println!("criterion {}: PASS  {name} ({ms} ms)", k + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({ms} ms): {e}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
