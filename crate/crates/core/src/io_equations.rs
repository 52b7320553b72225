//! Input-output equations by linear elimination over the derivative tower,
//! and the determinant-based relations of compartment models.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::modp::{random_prime, rank_mod};
use crate::algebra::operator::write_combination;
use crate::algebra::{bareiss_det, solve_linear, MultiPoly, RatFunc};
use crate::error::AnalysisError;
use crate::model::{CompartmentModel, LinearModel};
use crate::series::{default_order, random_polynomial_input, simulate, small_nonzero, TruncatedSeries};
use crate::transfer::characteristic_coefficients;

/// A derivative of an output or an input, or the constant monomial 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DiffMonomial {
    Output { index: usize, order: usize },
    Input { index: usize, order: usize },
    Constant,
}

impl DiffMonomial {
    fn differentiate(self) -> Option<DiffMonomial> {
        match self {
            DiffMonomial::Output { index, order } => Some(DiffMonomial::Output { index, order: order + 1 }),
            DiffMonomial::Input { index, order } => Some(DiffMonomial::Input { index, order: order + 1 }),
            DiffMonomial::Constant => None,
        }
    }

    pub fn label(self, model: &LinearModel) -> String {
        let primes = |k: usize| "'".repeat(k);
        match self {
            DiffMonomial::Output { index, order } => format!("{}{}", model.outputs[index], primes(order)),
            DiffMonomial::Input { index, order } => format!("{}{}", model.inputs[index], primes(order)),
            DiffMonomial::Constant => String::new(),
        }
    }

    /// Display rank: outputs, then inputs, each by decreasing order.
    fn display_key(self) -> (u8, std::cmp::Reverse<usize>, usize) {
        match self {
            DiffMonomial::Output { index, order } => (0, std::cmp::Reverse(order), index),
            DiffMonomial::Input { index, order } => (1, std::cmp::Reverse(order), index),
            DiffMonomial::Constant => (2, std::cmp::Reverse(0), 0),
        }
    }
}

/// `y_i^(k) + Σ c_m·m` with the leading coefficient normalized to one. The
/// zero relation has no leading monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IOEquation {
    pub leading: Option<(usize, usize)>,
    pub terms: BTreeMap<DiffMonomial, RatFunc>,
}

impl IOEquation {
    pub fn zero() -> Self {
        IOEquation { leading: None, terms: BTreeMap::new() }
    }

    /// Builds a monic equation from the coefficient of every monomial,
    /// dividing through by the coefficient of `y_output^(order)`.
    pub fn from_terms(output: usize, order: usize, mut all: BTreeMap<DiffMonomial, RatFunc>) -> Self {
        let key = DiffMonomial::Output { index: output, order };
        let lc = all.remove(&key).expect("leading monomial present");
        let inv = lc.recip().expect("leading coefficient is nonzero");
        let terms = all.into_iter().filter(|(_, c)| !c.is_zero()).map(|(m, c)| (m, &c * &inv)).collect();
        IOEquation { leading: Some((output, order)), terms }
    }

    pub fn output(&self) -> Option<usize> {
        self.leading.map(|l| l.0)
    }

    /// Highest derivative order of output `j`, if it occurs.
    pub fn order_in_output(&self, j: usize) -> Option<usize> {
        let lead = self.leading.filter(|l| l.0 == j).map(|l| l.1);
        let rest = self.terms.keys().filter_map(|m| match m {
            DiffMonomial::Output { index, order } if *index == j => Some(*order),
            _ => None,
        });
        lead.into_iter().chain(rest).max()
    }

    /// Highest derivative order of any output or input.
    pub fn max_order(&self) -> usize {
        let lead = self.leading.map_or(0, |l| l.1);
        self.terms
            .keys()
            .map(|m| match m {
                DiffMonomial::Output { order, .. } | DiffMonomial::Input { order, .. } => *order,
                DiffMonomial::Constant => 0,
            })
            .chain([lead])
            .max()
            .unwrap_or(0)
    }

    /// Non-leading monomials in display order.
    pub fn monomials(&self) -> Vec<DiffMonomial> {
        let mut ms: Vec<DiffMonomial> = self.terms.keys().copied().collect();
        ms.sort_by_key(|m| m.display_key());
        ms
    }

    pub fn coefficients(&self) -> Vec<RatFunc> {
        self.monomials().into_iter().map(|m| self.terms[&m].clone()).collect()
    }

    pub fn coefficient(&self, m: DiffMonomial) -> Option<&RatFunc> {
        self.terms.get(&m)
    }

    pub fn display<'a>(&'a self, model: &'a LinearModel) -> EquationDisplay<'a> {
        EquationDisplay { eq: self, model }
    }

    /// Value of the equation along jets of the outputs and inputs at the
    /// parameter point. `None` when a coefficient has a vanishing denominator.
    pub fn residual(
        &self,
        params: &[BigRational],
        outputs: &[TruncatedSeries],
        inputs: &[TruncatedSeries],
    ) -> Option<TruncatedSeries> {
        let mut point = params.to_vec();
        point.push(BigRational::from_integer(0.into()));
        let order = outputs.iter().chain(inputs).map(TruncatedSeries::order).min().unwrap_or(0);
        let top = self.max_order();
        assert!(top <= order, "jets too short for the equation");
        let jet = |m: DiffMonomial| -> TruncatedSeries {
            let s = match m {
                DiffMonomial::Output { index, order } => outputs[index].nth_derivative(order),
                DiffMonomial::Input { index, order } => inputs[index].nth_derivative(order),
                DiffMonomial::Constant => TruncatedSeries::constant(BigRational::from_integer(1.into()), order),
            };
            s.truncate(order - top)
        };
        let mut acc = match self.leading {
            Some((i, k)) => jet(DiffMonomial::Output { index: i, order: k }),
            None => TruncatedSeries::zero(order - top),
        };
        for (m, c) in &self.terms {
            let v = c.eval(&point)?;
            acc = &acc + &jet(*m).scale(&v);
        }
        Some(acc)
    }
}

pub struct EquationDisplay<'a> {
    eq: &'a IOEquation,
    model: &'a LinearModel,
}

impl fmt::Display for EquationDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nv = self.model.nvars();
        let lead = self
            .eq
            .leading
            .map(|(i, k)| (RatFunc::one(nv), DiffMonomial::Output { index: i, order: k }.label(self.model)));
        let rest = self.eq.monomials().into_iter().map(|m| (self.eq.terms[&m].clone(), m.label(self.model)));
        write_combination(f, lead.into_iter().chain(rest), &self.model.symbols)
    }
}

/// Affine form in the states plus a combination of input derivatives and
/// the constant monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerEntry {
    pub row: Vec<RatFunc>,
    pub rest: BTreeMap<DiffMonomial, RatFunc>,
}

/// `y_i^(k)` expressed through the states: `row_{k+1} = row_k·A`, and the
/// remainder is differentiated and picks up `row_k·(B u + f0)`.
#[derive(Clone, Debug)]
pub struct DerivativeTower<'a> {
    model: &'a LinearModel,
    levels: Vec<Vec<TowerEntry>>,
}

fn add_into(map: &mut BTreeMap<DiffMonomial, RatFunc>, m: DiffMonomial, c: &RatFunc) {
    if c.is_zero() {
        return;
    }
    let sum = match map.get(&m) {
        Some(prev) => prev + c,
        None => c.clone(),
    };
    if sum.is_zero() {
        map.remove(&m);
    } else {
        map.insert(m, sum);
    }
}

fn dot(a: &[RatFunc], b: &[RatFunc]) -> RatFunc {
    let nv = a.first().or(b.first()).map_or(0, RatFunc::nvars);
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).fold(RatFunc::zero(nv), |acc, (x, y)| &acc + &(x * y))
}

impl<'a> DerivativeTower<'a> {
    pub fn new(model: &'a LinearModel) -> Self {
        let levels = (0..model.m())
            .map(|i| {
                let mut rest = BTreeMap::new();
                for (j, d) in model.d[i].iter().enumerate() {
                    add_into(&mut rest, DiffMonomial::Input { index: j, order: 0 }, d);
                }
                add_into(&mut rest, DiffMonomial::Constant, &model.g0[i]);
                vec![TowerEntry { row: model.c[i].clone(), rest }]
            })
            .collect();
        DerivativeTower { model, levels }
    }

    /// Entry of `y_i^(k)`, extending the tower as needed.
    pub fn entry(&mut self, i: usize, k: usize) -> &TowerEntry {
        while self.levels[i].len() <= k {
            let last = self.levels[i].last().unwrap();
            let m = self.model;
            let n = m.n();
            let col = |j: usize| -> Vec<RatFunc> { (0..n).map(|r| m.a[r][j].clone()).collect() };
            let row: Vec<RatFunc> = (0..n).map(|j| dot(&last.row, &col(j))).collect();
            let mut rest = BTreeMap::new();
            for (mono, c) in &last.rest {
                if let Some(d) = mono.differentiate() {
                    add_into(&mut rest, d, c);
                }
            }
            for j in 0..m.num_inputs() {
                let bj: Vec<RatFunc> = (0..n).map(|r| m.b[r][j].clone()).collect();
                add_into(&mut rest, DiffMonomial::Input { index: j, order: 0 }, &dot(&last.row, &bj));
            }
            add_into(&mut rest, DiffMonomial::Constant, &dot(&last.row, &m.f0));
            self.levels[i].push(TowerEntry { row, rest });
        }
        &self.levels[i][k]
    }
}

/// Resolves an ordering given as output names; `None` means declaration
/// order.
pub fn resolve_ordering(model: &LinearModel, names: Option<&[String]>) -> Result<Vec<usize>, AnalysisError> {
    let Some(names) = names else {
        return Ok((0..model.m()).collect());
    };
    let mut idx = Vec::new();
    for n in names {
        let i = model.output_index(n).ok_or_else(|| AnalysisError::BadOrdering(format!("unknown output `{n}`")))?;
        if idx.contains(&i) {
            return Err(AnalysisError::BadOrdering(format!("output `{n}` listed twice")));
        }
        idx.push(i);
    }
    if idx.len() != model.m() {
        return Err(AnalysisError::BadOrdering(format!("{} of {} outputs listed", idx.len(), model.m())));
    }
    Ok(idx)
}

const INDEPENDENCE_SEED: u64 = 0x1d3a_5eed;

/// True when the state rows of `basis` and `target` are independent at a
/// random point modulo a random prime, which proves generic independence.
/// `false` is inconclusive.
fn independent_mod_p<R: Rng + ?Sized>(basis: &[&(DiffMonomial, TowerEntry)], target: &[RatFunc], rng: &mut R) -> bool {
    let Some(nv) = target.first().map(RatFunc::nvars) else { return false };
    let prime = random_prime(rng);
    let point: Vec<u64> = (0..nv).map(|_| rng.gen_range(1..prime)).collect();
    let rows: Option<Vec<Vec<u64>>> = basis
        .iter()
        .map(|(_, e)| e.row.as_slice())
        .chain(std::iter::once(target))
        .map(|row| row.iter().map(|f| f.eval_mod(&point, prime).ok()).collect())
        .collect();
    rows.is_some_and(|rows| rank_mod(&rows, prime) == rows.len())
}

/// The full set of input-output equations for the output ordering
/// `ordering` (indices into the model's outputs, lowest first).
///
/// For each output in turn, the least `k` is found at which the state row of
/// `y^(k)` is a combination of the admissible rows: rows of earlier outputs
/// below their equation orders and of lower derivatives of this output.
pub fn full_io_equations(model: &LinearModel, ordering: &[usize]) -> Result<Vec<IOEquation>, AnalysisError> {
    let m = model.m();
    let mut check = ordering.to_vec();
    check.sort_unstable();
    if check != (0..m).collect::<Vec<_>>() {
        return Err(AnalysisError::BadOrdering("not a permutation of the outputs".into()));
    }
    let n = model.n();
    let nv = model.nvars();
    let mut tower = DerivativeTower::new(model);
    let mut rng = ChaCha8Rng::seed_from_u64(INDEPENDENCE_SEED);
    let mut admissible: Vec<(DiffMonomial, TowerEntry)> = Vec::new();
    let mut eqs = Vec::with_capacity(m);
    for &i in ordering {
        let mut own: Vec<(DiffMonomial, TowerEntry)> = Vec::new();
        let mut found = None;
        for k in 0..=n {
            let target = tower.entry(i, k).clone();
            let basis: Vec<&(DiffMonomial, TowerEntry)> = admissible.iter().chain(&own).collect();
            let matrix: Vec<Vec<RatFunc>> =
                (0..n).map(|r| basis.iter().map(|(_, e)| e.row[r].clone()).collect()).collect();
            let solution = if basis.is_empty() {
                target.row.iter().all(RatFunc::is_zero).then(Vec::new)
            } else if independent_mod_p(&basis, &target.row, &mut rng) {
                None
            } else if admissible.is_empty() && k == n {
                // Cayley–Hamilton: c·A^n = −Σ χ_j c·A^j.
                Some(characteristic_coefficients(model)[..n].iter().map(|c| -c).collect())
            } else {
                solve_linear(&matrix, &target.row)?
            };
            if let Some(coeffs) = solution {
                let mut all = BTreeMap::new();
                all.insert(DiffMonomial::Output { index: i, order: k }, RatFunc::one(nv));
                for (mono, c) in &target.rest {
                    add_into(&mut all, *mono, &-c);
                }
                for ((mono, entry), c) in basis.iter().zip(&coeffs) {
                    add_into(&mut all, *mono, &-c);
                    for (rm, rc) in &entry.rest {
                        add_into(&mut all, *rm, &(c * rc));
                    }
                }
                found = Some(IOEquation::from_terms(i, k, all));
                break;
            }
            own.push((DiffMonomial::Output { index: i, order: k }, target));
        }
        let eq = found.ok_or_else(|| AnalysisError::Invariant("no relation within n derivatives".into()))?;
        admissible.extend(own);
        eqs.push(eq);
    }
    Ok(eqs)
}

/// Checks the triangular shape of a full set and the order budget
/// `Σ ord ≤ n`.
pub fn check_full_set_shape(model: &LinearModel, eqs: &[IOEquation], ordering: &[usize]) -> Result<(), String> {
    if eqs.len() != ordering.len() {
        return Err("one equation per output expected".into());
    }
    let mut total = 0;
    for (l, (eq, &i)) in eqs.iter().zip(ordering).enumerate() {
        let Some((lead, d)) = eq.leading else {
            return Err(format!("equation {} has no leading monomial", l + 1));
        };
        if lead != i {
            return Err(format!("equation {} leads with the wrong output", l + 1));
        }
        if eq.order_in_output(i) != Some(d) {
            return Err(format!("equation {} has a derivative above its leading order", l + 1));
        }
        total += d;
        for (j, &prev) in ordering[..l].iter().enumerate() {
            let bound = eqs[j].leading.map_or(0, |x| x.1);
            if eq.order_in_output(prev).is_some_and(|o| o >= bound) {
                return Err(format!("equation {} is not reduced with respect to equation {}", l + 1, j + 1));
            }
        }
    }
    if total > model.n() {
        return Err(format!("orders sum to {total}, more than the {} states", model.n()));
    }
    Ok(())
}

/// `det(∂I − A) y_i − c_i Σ_j (−1)^(i+j) det(M_ji) b_j u_j` for every
/// output vertex `i`, where `M_ji` deletes row `j` and column `i` of
/// `∂I − A`.
pub fn cramer_io_equations(cm: &CompartmentModel) -> Vec<IOEquation> {
    let nv = cm.nvars();
    let s_var = nv - 1;
    let n = cm.n;
    let s = MultiPoly::var(nv, s_var);
    let a = cm.compartment_matrix();
    let p: Vec<Vec<MultiPoly>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    let entry = -a[r][c].numer();
                    if r == c {
                        &s + &entry
                    } else {
                        entry
                    }
                })
                .collect()
        })
        .collect();
    let char_poly = bareiss_det(&p, nv).expect("square matrix");
    let minor = |del_row: usize, del_col: usize| -> MultiPoly {
        let sub: Vec<Vec<MultiPoly>> = (0..n)
            .filter(|&r| r != del_row)
            .map(|r| (0..n).filter(|&c| c != del_col).map(|c| p[r][c].clone()).collect())
            .collect();
        bareiss_det(&sub, nv).expect("square matrix")
    };
    cm.outputs
        .iter()
        .enumerate()
        .map(|(oi, (vi, ci))| {
            let mut all = BTreeMap::new();
            for (k, coeff) in char_poly.coeffs_in(s_var).into_iter().enumerate() {
                add_into(&mut all, DiffMonomial::Output { index: oi, order: k }, &RatFunc::from_poly(coeff));
            }
            for (ji, (vj, bj)) in cm.inputs.iter().enumerate() {
                let det = minor(vj - 1, vi - 1);
                let sign = if (vi + vj) % 2 == 0 { -1 } else { 1 };
                let scale = &(ci * bj) * &RatFunc::from_int(nv, sign);
                for (k, coeff) in det.coeffs_in(s_var).into_iter().enumerate() {
                    add_into(
                        &mut all,
                        DiffMonomial::Input { index: ji, order: k },
                        &(&scale * &RatFunc::from_poly(coeff)),
                    );
                }
            }
            IOEquation::from_terms(oi, n, all)
        })
        .collect()
}

/// Union of the non-leading coefficients with rational constants and
/// repeats removed, in order of first appearance.
pub fn coefficients(eqs: &[IOEquation]) -> Vec<RatFunc> {
    let mut out: Vec<RatFunc> = Vec::new();
    for c in eqs.iter().flat_map(IOEquation::coefficients) {
        if !c.is_constant() && !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Random nonzero small integers for parameters and initial values.
pub(crate) fn random_point<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<BigRational> {
    (0..len).map(|_| small_nonzero(rng)).collect()
}

const RESAMPLE_LIMIT: usize = 50;

/// Checks that the equation vanishes along `trials` random trajectories
/// (random parameters, initial values and polynomial inputs).
pub fn verify_equation<R: Rng + ?Sized>(
    model: &LinearModel,
    eq: &IOEquation,
    trials: usize,
    rng: &mut R,
) -> Result<bool, AnalysisError> {
    if eq.leading.is_none() && eq.terms.is_empty() {
        return Ok(true);
    }
    let order = default_order(model.n()).max(eq.max_order() + 4);
    for _ in 0..trials {
        let mut attempts = 0;
        let residual = loop {
            attempts += 1;
            if attempts > RESAMPLE_LIMIT {
                return Err(AnalysisError::Resampling(RESAMPLE_LIMIT));
            }
            let params = random_point(rng, model.num_params());
            let x0 = random_point(rng, model.n());
            let inputs: Vec<TruncatedSeries> =
                (0..model.num_inputs()).map(|_| random_polynomial_input(rng, order, order)).collect();
            let Ok(traj) = simulate(model, &params, &x0, &inputs, order) else { continue };
            if let Some(r) = eq.residual(&params, &traj.outputs, &inputs) {
                break r;
            }
        };
        if !residual.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}
