//! Word-size prime field helpers used for randomized zero and rank testing.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;

pub fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

pub fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + p as u128 - (b % p) as u128) % p as u128) as u64
}

pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow_mod(mut base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        e >>= 1;
    }
    acc
}

/// Inverse modulo a prime; `None` for zero.
pub fn inv_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    (a != 0).then(|| pow_mod(a, p - 2, p))
}

fn int_mod(n: &BigInt, p: u64) -> u64 {
    let r = n % BigInt::from(p);
    let r = if r.is_negative() { r + BigInt::from(p) } else { r };
    r.to_u64().expect("residue fits in a word")
}

/// Image of a rational in the prime field, `None` when `p` divides the
/// denominator.
pub fn rational_mod(q: &BigRational, p: u64) -> Option<u64> {
    let num = int_mod(q.numer(), p);
    let den = int_mod(q.denom(), p);
    inv_mod(den, p).map(|inv| mul_mod(num, inv, p))
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &w in &WITNESSES {
        if n % w == 0 {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Uniformly drawn prime in `[2^61, 2^62)`.
pub fn random_prime<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    loop {
        let candidate = rng.gen_range((1u64 << 61)..(1u64 << 62)) | 1;
        if is_prime(candidate) {
            return candidate;
        }
    }
}

/// Rank of a dense matrix over the prime field.
pub fn rank_mod(rows: &[Vec<u64>], p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = inv_mod(m[rank][col], p).unwrap();
        for r in 0..m.len() {
            if r != rank && m[r][col] != 0 {
                let factor = mul_mod(m[r][col], inv, p);
                for c in col..ncols {
                    let sub = mul_mod(factor, m[rank][c], p);
                    m[r][c] = sub_mod(m[r][c], sub, p);
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn known_primes() {
        assert!(is_prime(2));
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1_000_000_007 * 3));
        assert!(is_prime((1u64 << 61) - 1));
    }

    #[test]
    fn random_prime_is_62_bit() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random_prime(&mut rng);
        assert!(p >= 1 << 61 && p < 1 << 62);
        assert!(is_prime(p));
    }

    #[test]
    fn rank_of_dependent_rows() {
        let p = 101;
        let rows = vec![vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]];
        assert_eq!(rank_mod(&rows, p), 2);
    }

    #[test]
    fn half_mod_seven() {
        let h = BigRational::new(3.into(), 2.into());
        assert_eq!(rational_mod(&h, 7), Some(5));
        let neg = BigRational::new((-1).into(), 3.into());
        assert_eq!(mul_mod(rational_mod(&neg, 7).unwrap(), 3, 7), 6);
    }
}
