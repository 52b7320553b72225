//! Gate-checked generator selection, the Wronskian solvability diagnostic,
//! and randomized Jacobian-rank tests for algebraic dependence.

use std::collections::BTreeMap;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::modp::{inv_mod, mul_mod, random_prime, rank_mod, sub_mod};
use crate::algebra::{MultiPoly, RatFunc};
use crate::error::{AlgebraError, AnalysisError};
use crate::graph::{condition_report, ConditionReport};
use crate::io_equations::{
    check_full_set_shape, coefficients, cramer_io_equations, full_io_equations, random_point, resolve_ordering,
    verify_equation, IOEquation,
};
use crate::model::expr::{eval_param_expr, eval_rational, parse_expr, tokenize, ExprParser, Tok};
use crate::model::{LinearModel, Model};
use crate::series::{default_order, random_polynomial_input, series_wronskian, simulate, TruncatedSeries};
use crate::transfer::{transfer_coefficients, transfer_matrix, TransferMatrix};

/// Evaluation points per prime and number of primes for rank tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RankTrials {
    pub points: usize,
    pub primes: usize,
}

impl Default for RankTrials {
    fn default() -> Self {
        RankTrials { points: 3, primes: 3 }
    }
}

/// Primes drawn and the resulting error bound of a rank test.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RankLog {
    pub primes: Vec<u64>,
    /// log2 of the probability that the maximal ranks are not attained.
    pub failure_log2: f64,
}

impl RankLog {
    /// Union bound over independent tests.
    pub fn merge(&mut self, other: RankLog) {
        self.failure_log2 = if self.primes.is_empty() {
            other.failure_log2
        } else {
            let (hi, lo) = if self.failure_log2 >= other.failure_log2 {
                (self.failure_log2, other.failure_log2)
            } else {
                (other.failure_log2, self.failure_log2)
            };
            (hi + (1.0 + (lo - hi).exp2()).log2()).min(0.0)
        };
        self.primes.extend(other.primes);
    }
}

const RESAMPLE_LIMIT: usize = 50;

struct Gradient {
    num: MultiPoly,
    den: MultiPoly,
    dnum: Vec<MultiPoly>,
    dden: Vec<MultiPoly>,
}

impl Gradient {
    fn new(f: &RatFunc, nparams: usize) -> Self {
        Gradient {
            num: f.numer().clone(),
            den: f.denom().clone(),
            dnum: (0..nparams).map(|k| f.numer().derivative(k)).collect(),
            dden: (0..nparams).map(|k| f.denom().derivative(k)).collect(),
        }
    }

    /// Degree of the gradient after clearing the squared denominator.
    fn cleared_degree(&self) -> u32 {
        (self.num.total_degree() + self.den.total_degree()).saturating_sub(1)
    }

    /// Gradient modulo `p`; `Err` when the point or prime is unlucky.
    fn eval(&self, point: &[u64], p: u64) -> Result<Vec<u64>, AlgebraError> {
        let d = self.den.eval_mod(point, p)?;
        let inv = inv_mod(d, p).ok_or(AlgebraError::ZeroDivision)?;
        let n = self.num.eval_mod(point, p)?;
        let inv2 = mul_mod(inv, inv, p);
        self.dnum
            .iter()
            .zip(&self.dden)
            .map(|(dn, dd)| {
                let t = sub_mod(mul_mod(dn.eval_mod(point, p)?, d, p), mul_mod(n, dd.eval_mod(point, p)?, p), p);
                Ok(mul_mod(t, inv2, p))
            })
            .collect()
    }
}

/// Largest Jacobian rank of each set of functions over random points
/// modulo random primes. `sets` index into `funcs`.
pub fn jacobian_ranks<R: Rng + ?Sized>(
    funcs: &[RatFunc],
    sets: &[Vec<usize>],
    nparams: usize,
    trials: RankTrials,
    rng: &mut R,
) -> Result<(Vec<usize>, RankLog), AnalysisError> {
    let grads: Vec<Gradient> = funcs.iter().map(|f| Gradient::new(f, nparams)).collect();
    let nvars = funcs.first().map_or(nparams + 1, RatFunc::nvars);
    let mut best = vec![0; sets.len()];
    let mut log = RankLog::default();
    let degree: u32 = grads.iter().map(Gradient::cleared_degree).sum::<u32>().max(1);
    let mut per_trial_log2 = f64::NEG_INFINITY;
    let total = (trials.primes * trials.points).max(1);
    for _ in 0..trials.primes.max(1) {
        let p = random_prime(rng);
        log.primes.push(p);
        per_trial_log2 = per_trial_log2.max((degree as f64).log2() - (p as f64).log2());
        for _ in 0..trials.points.max(1) {
            let mut attempts = 0;
            let rows = loop {
                attempts += 1;
                if attempts > RESAMPLE_LIMIT {
                    return Err(AnalysisError::Resampling(RESAMPLE_LIMIT));
                }
                let mut point: Vec<u64> = (0..nvars).map(|_| rng.gen_range(1..p)).collect();
                if let Some(last) = point.last_mut().filter(|_| nvars > nparams) {
                    *last = 0;
                }
                if let Ok(rows) = grads.iter().map(|g| g.eval(&point, p)).collect::<Result<Vec<_>, _>>() {
                    break rows;
                }
            };
            for (b, set) in best.iter_mut().zip(sets) {
                let m: Vec<Vec<u64>> = set.iter().map(|&i| rows[i].clone()).collect();
                *b = (*b).max(rank_mod(&m, p));
            }
        }
    }
    log.failure_log2 = (per_trial_log2 * total as f64).min(0.0);
    Ok((best, log))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Membership {
    Dependent,
    Independent,
}

/// Whether `h` is algebraic over the field generated by `generators`
/// (local identifiability relative to the generators).
pub fn jacobian_membership<R: Rng + ?Sized>(
    h: &RatFunc,
    generators: &[RatFunc],
    nparams: usize,
    trials: RankTrials,
    rng: &mut R,
) -> Result<(Membership, RankLog), AnalysisError> {
    let mut funcs = generators.to_vec();
    funcs.push(h.clone());
    let g: Vec<usize> = (0..generators.len()).collect();
    let gh: Vec<usize> = (0..funcs.len()).collect();
    let (ranks, log) = jacobian_ranks(&funcs, &[g, gh], nparams, trials, rng)?;
    let verdict = if ranks[0] == ranks[1] { Membership::Dependent } else { Membership::Independent };
    Ok((verdict, log))
}

/// Whether each set is algebraic over the field generated by the other.
pub fn field_equivalence<R: Rng + ?Sized>(
    gens1: &[RatFunc],
    gens2: &[RatFunc],
    nparams: usize,
    trials: RankTrials,
    rng: &mut R,
) -> Result<(bool, RankLog), AnalysisError> {
    let funcs: Vec<RatFunc> = gens1.iter().chain(gens2).cloned().collect();
    let a: Vec<usize> = (0..gens1.len()).collect();
    let b: Vec<usize> = (gens1.len()..funcs.len()).collect();
    let ab: Vec<usize> = (0..funcs.len()).collect();
    let (r, log) = jacobian_ranks(&funcs, &[a, b, ab], nparams, trials, rng)?;
    Ok((r[0] == r[2] && r[1] == r[2], log))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Solvability {
    Solvable,
    RankDeficient,
}

/// Wronskian of the non-leading monomials of `eq` along random trajectories
/// with polynomial inputs. A nonzero value in any trial means the
/// coefficients are determined by the data.
pub fn solvability_diagnostic<R: Rng + ?Sized>(
    model: &LinearModel,
    eq: &IOEquation,
    trials: usize,
    series_order: Option<usize>,
    rng: &mut R,
) -> Result<Solvability, AnalysisError> {
    let monomials = eq.monomials();
    if monomials.is_empty() {
        return Ok(Solvability::Solvable);
    }
    let top = eq.max_order();
    let k = monomials.len();
    let order = series_order.unwrap_or(0).max(default_order(model.n())).max(top + k + 1);
    for _ in 0..trials.max(1) {
        let mut attempts = 0;
        let tuple = loop {
            attempts += 1;
            if attempts > RESAMPLE_LIMIT {
                return Err(AnalysisError::Resampling(RESAMPLE_LIMIT));
            }
            let params = random_point(rng, model.num_params());
            let x0 = random_point(rng, model.n());
            let inputs: Vec<TruncatedSeries> =
                (0..model.num_inputs()).map(|_| random_polynomial_input(rng, order, order)).collect();
            let Ok(traj) = simulate(model, &params, &x0, &inputs, order) else { continue };
            break monomial_jets(&monomials, &traj.outputs, &inputs, order - top);
        };
        if !series_wronskian(&tuple)?.is_zero() {
            return Ok(Solvability::Solvable);
        }
    }
    Ok(Solvability::RankDeficient)
}

fn monomial_jets(
    monomials: &[crate::io_equations::DiffMonomial],
    outputs: &[TruncatedSeries],
    inputs: &[TruncatedSeries],
    order: usize,
) -> Vec<TruncatedSeries> {
    use crate::io_equations::DiffMonomial as M;
    monomials
        .iter()
        .map(|m| match *m {
            M::Output { index, order: k } => outputs[index].nth_derivative(k).truncate(order),
            M::Input { index, order: k } => inputs[index].nth_derivative(k).truncate(order),
            M::Constant => TruncatedSeries::constant(BigRational::from_integer(1.into()), order),
        })
        .collect()
}

/// Substitutions `name -> expression` for parameters and initial values.
/// Identifiers that are neither parameters nor states are free symbols,
/// drawn at random in each trial.
#[derive(Clone, Debug)]
pub struct WitnessMap {
    entries: Vec<(String, crate::model::expr::Expr)>,
}

impl WitnessMap {
    /// Parses `x -> k*x; c -> c/k`; entries may also be separated by commas.
    pub fn parse(text: &str) -> Result<Self, AnalysisError> {
        let mut entries = Vec::new();
        for part in text.split([';', ',']).map(str::trim).filter(|p| !p.is_empty()) {
            let toks = tokenize(part, 1)?;
            let (Some(Tok::Ident(name)), Some(Tok::Arrow)) =
                (toks.first().map(|t| &t.tok), toks.get(1).map(|t| &t.tok))
            else {
                return Err(AnalysisError::Model(crate::error::ModelError::Syntax {
                    line: 1,
                    col: 1,
                    msg: format!("expected `name -> expression` in `{part}`"),
                }));
            };
            let expr = ExprParser::new(&toks[2..], 1, part.chars().count() + 1).parse_all()?;
            entries.push((name.clone(), expr));
        }
        Ok(WitnessMap { entries })
    }

    pub fn identity() -> Self {
        WitnessMap { entries: Vec::new() }
    }
}

/// Checks that the substituted model produces the same output jets as the
/// original for random parameters, initial values, inputs and free symbols.
pub fn witness_transformation<R: Rng + ?Sized>(
    model: &LinearModel,
    map: &WitnessMap,
    trials: usize,
    rng: &mut R,
) -> Result<bool, AnalysisError> {
    let params = model.params().to_vec();
    for (name, _) in &map.entries {
        if !params.contains(name) && !model.states.contains(name) {
            return Err(AnalysisError::UnknownSymbol(name.clone()));
        }
    }
    let mut free: Vec<String> = Vec::new();
    for (_, e) in &map.entries {
        let mut ids = Vec::new();
        crate::model::expr::identifiers(e, &mut ids);
        for (id, _) in ids {
            if !params.contains(&id) && !model.states.contains(&id) && !free.contains(&id) {
                free.push(id);
            }
        }
    }
    let order = default_order(model.n());
    for _ in 0..trials.max(1) {
        let mut attempts = 0;
        let same = loop {
            attempts += 1;
            if attempts > RESAMPLE_LIMIT {
                return Err(AnalysisError::Resampling(RESAMPLE_LIMIT));
            }
            let mu = random_point(rng, params.len());
            let x0 = random_point(rng, model.n());
            let ks = random_point(rng, free.len());
            let env = |id: &str| -> Option<BigRational> {
                if let Some(i) = params.iter().position(|p| p == id) {
                    return Some(mu[i].clone());
                }
                if let Some(i) = model.states.iter().position(|p| p == id) {
                    return Some(x0[i].clone());
                }
                free.iter().position(|p| p == id).map(|i| ks[i].clone())
            };
            let mut mu2 = mu.clone();
            let mut x02 = x0.clone();
            let mut ok = true;
            for (name, e) in &map.entries {
                let Some(v) = eval_rational(e, &env).map_err(AnalysisError::UnknownSymbol)? else {
                    ok = false;
                    break;
                };
                if let Some(i) = params.iter().position(|p| p == name) {
                    mu2[i] = v;
                } else if let Some(i) = model.states.iter().position(|p| p == name) {
                    x02[i] = v;
                }
            }
            if !ok {
                continue;
            }
            let inputs: Vec<TruncatedSeries> =
                (0..model.num_inputs()).map(|_| random_polynomial_input(rng, order, order)).collect();
            let (Ok(a), Ok(b)) =
                (simulate(model, &mu, &x0, &inputs, order), simulate(model, &mu2, &x02, &inputs, order))
            else {
                continue;
            };
            break a.outputs == b.outputs;
        };
        if !same {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Elimination,
    Cramer,
    Transfer,
    #[default]
    All,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "elimination" => Ok(Method::Elimination),
            "cramer" => Ok(Method::Cramer),
            "transfer" => Ok(Method::Transfer),
            "all" => Ok(Method::All),
            _ => Err(format!("unknown method `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    IdentifiableFieldProven,
    IOFieldOnly,
}

#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    pub ordering: Option<Vec<String>>,
    pub method: Method,
    pub seed: u64,
    pub series_order: Option<usize>,
    pub rank_trials: RankTrials,
    pub solvability_trials: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            ordering: None,
            method: Method::All,
            seed: 0,
            series_order: None,
            rank_trials: RankTrials::default(),
            solvability_trials: 5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EquationDiagnostic {
    pub source: &'static str,
    pub equation: IOEquation,
    pub verified: bool,
    pub solvability: Solvability,
}

#[derive(Clone, Debug)]
pub struct IdentifiabilityReport {
    pub model: LinearModel,
    pub is_compartment: bool,
    pub conditions: ConditionReport,
    pub ordering: Vec<usize>,
    pub method: Method,
    pub status: Status,
    pub generators: Vec<RatFunc>,
    pub elimination: Vec<IOEquation>,
    pub cramer: Option<Vec<IOEquation>>,
    /// Cramer relations form a full set only under the strong-connectivity
    /// gate.
    pub cramer_is_full_set: bool,
    pub transfer: Option<TransferMatrix>,
    pub diagnostics: Vec<EquationDiagnostic>,
    /// Field equivalence of other generator sets with the chosen one.
    pub cross_checks: BTreeMap<&'static str, bool>,
    pub seed: u64,
    pub rank_log: RankLog,
}

fn unsupported(what: &str) -> AnalysisError {
    AnalysisError::Unsupported(format!("method `{what}` needs a compartment model"))
}

/// Runs the elimination and, for compartment models, the Cramer and
/// transfer pipelines, then picks generators by the strongest gate.
pub fn analyze(model: &Model, opts: &AnalyzeOptions) -> Result<IdentifiabilityReport, AnalysisError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let lm = model.to_linear();
    let conditions = condition_report(model);
    conditions.check_consistency().map_err(AnalysisError::Invariant)?;
    let ordering = resolve_ordering(&lm, opts.ordering.as_deref())?;
    let elimination = full_io_equations(&lm, &ordering)?;
    check_full_set_shape(&lm, &elimination, &ordering).map_err(AnalysisError::Invariant)?;

    let cm = model.as_compartment();
    let cramer = cm.map(cramer_io_equations);
    let cramer_gate = cm.is_some() && conditions.cramer_gate();
    let transfer = matches!(opts.method, Method::Transfer | Method::All).then(|| transfer_matrix(&lm));

    let (method, generators, proven) = match opts.method {
        Method::Elimination | Method::All => {
            (Method::Elimination, coefficients(&elimination), conditions.elimination_gate())
        }
        Method::Cramer => {
            let eqs = cramer.as_ref().ok_or_else(|| unsupported("cramer"))?;
            (Method::Cramer, coefficients(eqs), cramer_gate)
        }
        Method::Transfer => {
            if cm.is_none() {
                return Err(unsupported("transfer"));
            }
            (Method::Transfer, transfer_coefficients(transfer.as_ref().unwrap()), cramer_gate)
        }
    };
    let status = if proven { Status::IdentifiableFieldProven } else { Status::IOFieldOnly };

    let mut diagnostics = Vec::new();
    let mut labelled: Vec<(&'static str, &IOEquation)> = elimination.iter().map(|e| ("elimination", e)).collect();
    if let Some(c) = &cramer {
        labelled.extend(c.iter().map(|e| ("cramer", e)));
    }
    for (source, eq) in labelled {
        let verified = verify_equation(&lm, eq, 2, &mut rng)?;
        if !verified {
            return Err(AnalysisError::Invariant(format!("{source} equation fails on simulated trajectories")));
        }
        let solvability = solvability_diagnostic(&lm, eq, opts.solvability_trials, opts.series_order, &mut rng)?;
        diagnostics.push(EquationDiagnostic { source, equation: eq.clone(), verified, solvability });
    }

    let np = lm.num_params();
    let mut rank_log = RankLog::default();
    let mut cross_checks = BTreeMap::new();
    if cramer_gate {
        let others = [
            ("elimination", coefficients(&elimination)),
            ("cramer", coefficients(cramer.as_ref().unwrap())),
            ("transfer", transfer_coefficients(&transfer.clone().unwrap_or_else(|| transfer_matrix(&lm)))),
        ];
        for (name, gens) in others {
            if name == method_name(method) {
                continue;
            }
            let (eq, log) = field_equivalence(&generators, &gens, np, opts.rank_trials, &mut rng)?;
            rank_log.merge(log);
            cross_checks.insert(name, eq);
        }
    }

    Ok(IdentifiabilityReport {
        is_compartment: cm.is_some(),
        model: lm,
        conditions,
        ordering,
        method,
        status,
        generators,
        elimination,
        cramer_is_full_set: cramer_gate,
        cramer,
        transfer,
        diagnostics,
        cross_checks,
        seed: opts.seed,
        rank_log,
    })
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Elimination => "elimination",
        Method::Cramer => "cramer",
        Method::Transfer => "transfer",
        Method::All => "all",
    }
}

/// Parses a parameter expression against the model's parameters.
pub fn parse_function(model: &LinearModel, text: &str) -> Result<RatFunc, AnalysisError> {
    let e = parse_expr(text)?;
    let params = model.params();
    let resolve = |id: &str| params.iter().position(|p| p == id);
    Ok(eval_param_expr(&e, model.nvars(), 1, &resolve)?)
}

/// Membership of a user-supplied parameter function in the field of the
/// analysis generators.
pub fn check_function(
    report: &IdentifiabilityReport,
    h: &RatFunc,
    trials: RankTrials,
    seed: u64,
) -> Result<(Membership, RankLog), AnalysisError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c4ec);
    jacobian_membership(h, &report.generators, report.model.num_params(), trials, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn membership_basics() {
        let v = |i| RatFunc::var(4, i);
        let gens = vec![&(&v(0) + &v(1)) + &v(2), &v(0) * &v(1), -v(2)];
        let t = RankTrials::default();
        assert_eq!(jacobian_membership(&v(2), &gens, 3, t, &mut rng()).unwrap().0, Membership::Dependent);
        assert_eq!(jacobian_membership(&v(0), &gens, 3, t, &mut rng()).unwrap().0, Membership::Dependent);
        assert_eq!(jacobian_membership(&v(0), &[v(1)], 3, t, &mut rng()).unwrap().0, Membership::Independent);
        let (eq, log) = field_equivalence(&[v(0)], &[v(0), v(2)], 3, t, &mut rng()).unwrap();
        assert!(!eq);
        assert!(log.failure_log2 <= -40.0);
    }

    #[test]
    fn witness_identity_and_scaling() {
        let m = parse_model(
            "system r\nparams a b c\nstates x w\neq x' = -a*x + b - w\neq w' = 0\nout y1 = c*x\nout y2 = w\n",
        )
        .unwrap()
        .to_linear();
        assert!(witness_transformation(&m, &WitnessMap::identity(), 3, &mut rng()).unwrap());
        let good = WitnessMap::parse("x -> k*x; c -> c/k; b -> k*b + w - k*w").unwrap();
        assert!(witness_transformation(&m, &good, 5, &mut rng()).unwrap());
        let bad = WitnessMap::parse("c -> 2*c").unwrap();
        assert!(!witness_transformation(&m, &bad, 5, &mut rng()).unwrap());
        assert!(matches!(
            witness_transformation(&m, &WitnessMap::parse("q -> 1").unwrap(), 1, &mut rng()),
            Err(AnalysisError::UnknownSymbol(_))
        ));
    }

    #[test]
    fn one_state_solvable() {
        let m = parse_model("system d\nparams a\nstates x\neq x' = -a*x\nout y = x\n").unwrap().to_linear();
        let eqs = full_io_equations(&m, &[0]).unwrap();
        assert_eq!(solvability_diagnostic(&m, &eqs[0], 5, None, &mut rng()).unwrap(), Solvability::Solvable);
    }
}
