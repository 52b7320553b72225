//! Exact Taylor jets of model trajectories at `t = 0`.

use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::SeriesError;
use crate::model::LinearModel;

/// `Σ_{k=0..=N} c_k t^k`, exact to order `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<BigRational>,
}

impl TruncatedSeries {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series has order at least 0");
        TruncatedSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![BigRational::zero(); order + 1])
    }

    pub fn constant(c: BigRational, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// A polynomial truncated (or zero-padded) to `order`.
    pub fn from_poly(coeffs: &[BigRational], order: usize) -> Self {
        let mut s = Self::zero(order);
        for (k, c) in coeffs.iter().enumerate().take(order + 1) {
            s.coeffs[k] = c.clone();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &BigRational {
        &self.coeffs[k]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot extend a truncated series");
        Self::new(self.coeffs[..=order].to_vec())
    }

    /// Term-wise derivative; the order drops by one. The derivative of an
    /// order-0 series is the zero series of order 0 with no information,
    /// so callers must keep orders positive.
    pub fn derivative(&self) -> Self {
        assert!(self.order() >= 1, "derivative of an order-0 series");
        Self::new(
            self.coeffs[1..].iter().enumerate().map(|(k, c)| c * BigRational::from_integer((k + 1).into())).collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |s, _| s.derivative())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    fn zip(&self, other: &Self, f: impl Fn(&BigRational, &BigRational) -> BigRational) -> Self {
        let n = self.order().min(other.order());
        Self::new((0..=n).map(|k| f(&self.coeffs[k], &other.coeffs[k])).collect())
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order().min(rhs.order());
        let mut out = vec![BigRational::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(n + 1 - i) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        TruncatedSeries::new(out)
    }
}

/// Default truncation order for a model with `n` states.
pub fn default_order(n: usize) -> usize {
    2 * n + 4
}

/// State and output jets of one trajectory.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<TruncatedSeries>,
    pub outputs: Vec<TruncatedSeries>,
}

/// Solves `x' = A x + B u + f0`, `x(0) = x0` coefficient by coefficient and
/// evaluates `y = C x + D u + g0`, all to order `order`.
pub fn simulate(
    model: &LinearModel,
    params: &[BigRational],
    x0: &[BigRational],
    inputs: &[TruncatedSeries],
    order: usize,
) -> Result<Trajectory, SeriesError> {
    let (n, m, kappa) = (model.n(), model.m(), model.num_inputs());
    let arity = |what, expected, found| SeriesError::Arity { what, expected, found };
    if params.len() != model.num_params() {
        return Err(arity("parameter values", model.num_params(), params.len()));
    }
    if x0.len() != n {
        return Err(arity("initial values", n, x0.len()));
    }
    if inputs.len() != kappa {
        return Err(arity("input series", kappa, inputs.len()));
    }
    if let Some(u) = inputs.iter().find(|u| u.order() < order) {
        return Err(SeriesError::ShortInput { needed: order, found: u.order() });
    }
    let num = model.at(params).ok_or(SeriesError::NonGenericPoint)?;

    let mut x: Vec<Vec<BigRational>> = vec![x0.to_vec()];
    for k in 0..order {
        let xk = &x[k];
        let next: Vec<BigRational> = (0..n)
            .map(|i| {
                let mut acc = BigRational::zero();
                for (a, xj) in num.a[i].iter().zip(xk) {
                    if !a.is_zero() && !xj.is_zero() {
                        acc += a * xj;
                    }
                }
                for (b, u) in num.b[i].iter().zip(inputs) {
                    if !b.is_zero() {
                        acc += b * u.coeff(k);
                    }
                }
                if k == 0 {
                    acc += &num.f0[i];
                }
                acc / BigRational::from_integer((k + 1).into())
            })
            .collect();
        x.push(next);
    }
    let states: Vec<TruncatedSeries> =
        (0..n).map(|i| TruncatedSeries::new(x.iter().map(|xk| xk[i].clone()).collect())).collect();
    let outputs = (0..m)
        .map(|j| {
            let coeffs = (0..=order)
                .map(|k| {
                    let mut acc = if k == 0 { num.g0[j].clone() } else { BigRational::zero() };
                    for (c, xi) in num.c[j].iter().zip(&x[k]) {
                        if !c.is_zero() {
                            acc += c * xi;
                        }
                    }
                    for (d, u) in num.d[j].iter().zip(inputs) {
                        if !d.is_zero() {
                            acc += d * u.coeff(k);
                        }
                    }
                    acc
                })
                .collect();
            TruncatedSeries::new(coeffs)
        })
        .collect();
    Ok(Trajectory { states, outputs })
}

/// Polynomial of degree `degree` with random nonzero small-integer
/// coefficients, as a series of order `order`.
pub fn random_polynomial_input<R: Rng + ?Sized>(rng: &mut R, degree: usize, order: usize) -> TruncatedSeries {
    let coeffs: Vec<BigRational> = (0..=degree).map(|_| small_nonzero(rng)).collect();
    TruncatedSeries::from_poly(&coeffs, order)
}

pub(crate) fn small_nonzero<R: Rng + ?Sized>(rng: &mut R) -> BigRational {
    let v: i64 = rng.gen_range(1..=9) * if rng.gen_bool(0.5) { 1 } else { -1 };
    BigRational::from_integer(v.into())
}

/// Wronskian of `tuple`: the determinant whose `(i, j)` entry is the `i`-th
/// derivative of the `j`-th series. The result is exact to order
/// `N - (k - 1)` where `N` is the smallest input order and `k` the tuple
/// length.
pub fn series_wronskian(tuple: &[TruncatedSeries]) -> Result<TruncatedSeries, SeriesError> {
    let k = tuple.len();
    if k == 0 {
        return Ok(TruncatedSeries::constant(BigRational::one(), 0));
    }
    let order = tuple.iter().map(TruncatedSeries::order).min().unwrap();
    if k > order {
        return Err(SeriesError::TupleTooLong { len: k, order });
    }
    let out_order = order - (k - 1);
    // rows[i][j] = i-th derivative of series j
    let mut rows: Vec<Vec<TruncatedSeries>> = Vec::with_capacity(k);
    let mut current: Vec<TruncatedSeries> = tuple.iter().map(|s| s.truncate(order)).collect();
    for i in 0..k {
        rows.push(current.iter().map(|s| s.truncate(out_order)).collect());
        if i + 1 < k {
            current = current.iter().map(TruncatedSeries::derivative).collect();
        }
    }
    // Permutation expansion by subsets of used columns: row r goes to a free
    // column, and the sign counts used columns to its right.
    let mut dp: Vec<Option<TruncatedSeries>> = vec![None; 1 << k];
    dp[0] = Some(TruncatedSeries::constant(BigRational::one(), out_order));
    for mask in 0usize..(1 << k) {
        let Some(acc) = dp[mask].take() else { continue };
        if mask == (1 << k) - 1 {
            dp[mask] = Some(acc);
            break;
        }
        let r = mask.count_ones() as usize;
        for j in 0..k {
            if mask & (1 << j) != 0 || rows[r][j].is_zero() {
                continue;
            }
            let inversions = (mask >> (j + 1)).count_ones();
            let mut term = &acc * &rows[r][j];
            if inversions % 2 == 1 {
                term = -&term;
            }
            let slot = &mut dp[mask | (1 << j)];
            *slot = Some(match slot.take() {
                Some(prev) => &prev + &term,
                None => term,
            });
        }
    }
    Ok(dp[(1 << k) - 1].take().unwrap_or_else(|| TruncatedSeries::zero(out_order)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, ratio};
    use crate::model::parse_model;

    #[test]
    fn exponential_decay() {
        let m = parse_model("system decay\nstates x\neq x' = -2*x\nout y = x\n").unwrap().to_linear();
        let t = simulate(&m, &[], &[rat(1)], &[], 4).unwrap();
        let expected = vec![rat(1), rat(-2), rat(2), ratio(-4, 3), ratio(2, 3)];
        assert_eq!(t.states[0].coeffs(), &expected[..]);
        assert_eq!(t.outputs[0], t.states[0]);
    }

    #[test]
    fn wronskian_basics() {
        let one = TruncatedSeries::constant(rat(1), 5);
        let t = TruncatedSeries::from_poly(&[rat(0), rat(1)], 5);
        let w = series_wronskian(&[one.clone(), t.clone()]).unwrap();
        assert_eq!(w, TruncatedSeries::constant(rat(1), 4));
        let dependent = &t.scale(&rat(3)) + &one;
        assert!(series_wronskian(&[one.clone(), t.clone(), dependent]).unwrap().is_zero());
        assert!(series_wronskian(&[]).unwrap().coeff(0).is_one());
        assert!(matches!(series_wronskian(&[one.truncate(1), t.truncate(1)]), Err(SeriesError::TupleTooLong { .. })));
    }

    #[test]
    fn wronskian_sign() {
        // W(t, 1) = t*0 - 1*1 = -1
        let one = TruncatedSeries::constant(rat(1), 3);
        let t = TruncatedSeries::from_poly(&[rat(0), rat(1)], 3);
        assert_eq!(series_wronskian(&[t, one]).unwrap(), TruncatedSeries::constant(rat(-1), 2));
    }

    #[test]
    fn non_generic_point() {
        let m = parse_model("system q\nparams a\nstates x\neq x' = x/a\nout y = x\n").unwrap().to_linear();
        assert_eq!(simulate(&m, &[rat(0)], &[rat(1)], &[], 3).unwrap_err(), SeriesError::NonGenericPoint);
    }
}
