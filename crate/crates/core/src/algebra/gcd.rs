//! Multivariate polynomial gcd over the rationals.
//!
//! Recursive primitive polynomial remainder sequences: pick a variable shared
//! by both inputs, split off the content with respect to it (a gcd in one
//! fewer variable), and run a primitive PRS on the primitive parts.

use super::poly::{Monomial, MultiPoly};
use num_rational::BigRational;
use num_traits::One;

/// Greatest common divisor with coprime integer coefficients and a positive
/// leading coefficient. `gcd(0, 0) = 0`.
pub fn poly_gcd(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    assert_eq!(a.nvars(), b.nvars(), "symbol table mismatch");
    normalize(&gcd_rec(a, b))
}

pub fn poly_lcm(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    if a.is_zero() || b.is_zero() {
        return MultiPoly::zero(a.nvars());
    }
    let g = poly_gcd(a, b);
    let q = a.div_exact(&g).expect("gcd divides its argument");
    normalize(&(&q * b))
}

fn normalize(p: &MultiPoly) -> MultiPoly {
    p.primitive_part().1
}

fn monomial_poly(nvars: usize, m: Monomial) -> MultiPoly {
    MultiPoly::from_terms(nvars, [(m, BigRational::one())])
}

fn gcd_rec(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    let n = a.nvars();
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return MultiPoly::one(n);
    }
    let ma = a.monomial_content().unwrap();
    let mb = b.monomial_content().unwrap();
    let mono = monomial_poly(n, ma.gcd(&mb));
    if a.is_monomial() || b.is_monomial() {
        return mono;
    }
    let a = a.div_exact(&monomial_poly(n, ma)).unwrap();
    let b = b.div_exact(&monomial_poly(n, mb)).unwrap();
    &mono * &gcd_stripped(&a, &b)
}

/// Gcd of polynomials that have no monomial factor.
fn gcd_stripped(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    let n = a.nvars();
    if a.is_constant() || b.is_constant() {
        return MultiPoly::one(n);
    }
    let (small, large) = if a.total_degree() <= b.total_degree() { (a, b) } else { (b, a) };
    if large.div_exact(small).is_some() {
        return small.clone();
    }
    let shared =
        (0..n).filter(|&v| a.depends_on(v) && b.depends_on(v)).min_by_key(|&v| a.degree_in(v).max(b.degree_in(v)));
    let Some(v) = shared else {
        return MultiPoly::one(n);
    };
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let c = gcd_rec(&ca, &cb);
    let g = primitive_prs(pa, pb, v);
    &c * &g
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `v`.
fn content_in(p: &MultiPoly, v: usize) -> MultiPoly {
    let mut coeffs: Vec<MultiPoly> = p.coeffs_in(v).into_iter().filter(|c| !c.is_zero()).collect();
    coeffs.sort_by_key(|c| (c.total_degree(), c.num_terms()));
    let mut acc = MultiPoly::zero(p.nvars());
    for c in &coeffs {
        acc = normalize(&gcd_rec(&acc, c));
        if acc.is_constant() {
            return MultiPoly::one(p.nvars());
        }
    }
    acc
}

fn primitive_in(p: &MultiPoly, v: usize) -> MultiPoly {
    let c = content_in(p, v);
    normalize(&p.div_exact(&c).expect("content divides"))
}

fn lead_coeff_in(p: &MultiPoly, v: usize) -> MultiPoly {
    p.coeffs_in(v).pop().unwrap_or_else(|| MultiPoly::zero(p.nvars()))
}

/// Pseudo-remainder of `a` by `b` with respect to `v`.
fn pseudo_rem(a: &MultiPoly, b: &MultiPoly, v: usize) -> MultiPoly {
    let n = a.nvars();
    let db = b.degree_in(v);
    let lcb = lead_coeff_in(b, v);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lcr = lead_coeff_in(&r, v);
        let shift = MultiPoly::var(n, v).pow(dr - db);
        r = &(&lcb * &r) - &(&(&lcr * &shift) * b);
    }
    r
}

fn primitive_prs(a: MultiPoly, b: MultiPoly, v: usize) -> MultiPoly {
    let n = a.nvars();
    let (mut r0, mut r1) = if a.degree_in(v) >= b.degree_in(v) { (a, b) } else { (b, a) };
    loop {
        let r = pseudo_rem(&r0, &r1, v);
        if r.is_zero() {
            return normalize(&r1);
        }
        if r.degree_in(v) == 0 {
            return MultiPoly::one(n);
        }
        r0 = r1;
        r1 = primitive_in(&r, v);
    }
}
