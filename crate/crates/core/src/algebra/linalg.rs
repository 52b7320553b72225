//! Fraction-free elimination over polynomial rings.

use super::gcd::poly_lcm;
use super::poly::MultiPoly;
use super::ratfunc::RatFunc;
use crate::error::AlgebraError;

fn check_square<T>(m: &[Vec<T>]) -> Result<usize, AlgebraError> {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return Err(AlgebraError::DimensionMismatch { expected: n, found: row.len() });
        }
    }
    Ok(n)
}

/// Determinant by Bareiss elimination with row pivoting. Every division is
/// exact. `nvars` fixes the symbol table of the empty matrix's determinant.
pub fn bareiss_det(m: &[Vec<MultiPoly>], nvars: usize) -> Result<MultiPoly, AlgebraError> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(MultiPoly::one(nvars));
    }
    let mut a: Vec<Vec<MultiPoly>> = m.to_vec();
    let mut negate = false;
    let mut prev = MultiPoly::one(nvars);
    for k in 0..n - 1 {
        // Prefer the sparsest nonzero pivot; it keeps intermediate minors small.
        let piv = (k..n).filter(|&r| !a[r][k].is_zero()).min_by_key(|&r| (a[r][k].num_terms(), r));
        let Some(piv) = piv else {
            return Ok(MultiPoly::zero(nvars));
        };
        if piv != k {
            a.swap(piv, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = if prev.is_one() { t } else { t.div_exact(&prev).expect("Bareiss step divides exactly") };
            }
            a[i][k] = MultiPoly::zero(nvars);
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Ok(if negate { -d } else { d })
}

/// Unique solution of `m · x = rhs`, or `None` when the columns of `m` are
/// dependent or the system is inconsistent. `m` may have more rows than
/// columns.
pub fn solve_linear(m: &[Vec<RatFunc>], rhs: &[RatFunc]) -> Result<Option<Vec<RatFunc>>, AlgebraError> {
    let rows = m.len();
    if rhs.len() != rows {
        return Err(AlgebraError::DimensionMismatch { expected: rows, found: rhs.len() });
    }
    let cols = m.first().map_or(0, Vec::len);
    for row in m {
        if row.len() != cols {
            return Err(AlgebraError::DimensionMismatch { expected: cols, found: row.len() });
        }
    }
    let nvars =
        rhs.first().map(RatFunc::nvars).or_else(|| m.first().and_then(|r| r.first()).map(RatFunc::nvars)).unwrap_or(0);
    if cols > rows {
        return Ok(None);
    }

    // Clear denominators row by row so that elimination runs over polynomials.
    let mut a: Vec<Vec<MultiPoly>> = Vec::with_capacity(rows);
    for (row, b) in m.iter().zip(rhs) {
        let mut l = MultiPoly::one(nvars);
        for e in row.iter().chain(std::iter::once(b)) {
            if !e.denom().is_one() {
                l = poly_lcm(&l, e.denom());
            }
        }
        let scaled = row
            .iter()
            .chain(std::iter::once(b))
            .map(|e| {
                if e.denom().is_one() {
                    e.numer() * &l
                } else {
                    e.numer() * &l.div_exact(e.denom()).expect("lcm is a multiple")
                }
            })
            .collect();
        a.push(scaled);
    }

    let mut prev = MultiPoly::one(nvars);
    for k in 0..cols {
        let piv = (k..rows).filter(|&r| !a[r][k].is_zero()).min_by_key(|&r| (a[r][k].num_terms(), r));
        let Some(piv) = piv else {
            return Ok(None);
        };
        a.swap(piv, k);
        for i in k + 1..rows {
            for j in k + 1..=cols {
                let t = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = if prev.is_one() { t } else { t.div_exact(&prev).expect("Bareiss step divides exactly") };
            }
            a[i][k] = MultiPoly::zero(nvars);
        }
        prev = a[k][k].clone();
    }
    if (cols..rows).any(|r| !a[r][cols].is_zero()) {
        return Ok(None);
    }

    // The leading `cols` rows now hold a triangular system whose last pivot
    // is its determinant `det`, so `det·x` is polynomial and back
    // substitution divides exactly.
    if cols == 0 {
        return Ok(Some(Vec::new()));
    }
    let det = a[cols - 1][cols - 1].clone();
    let mut y = vec![MultiPoly::zero(nvars); cols];
    for k in (0..cols).rev() {
        let mut acc = &det * &a[k][cols];
        for j in k + 1..cols {
            if !a[k][j].is_zero() && !y[j].is_zero() {
                acc = &acc - &(&a[k][j] * &y[j]);
            }
        }
        y[k] = acc.div_exact(&a[k][k]).expect("back substitution divides exactly");
    }
    let x = y.into_iter().map(|yk| RatFunc::new(yk, det.clone())).collect::<Result<Vec<_>, _>>()?;
    Ok(Some(x))
}
