//! Small integer helpers shared by the field and lattice code.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    num_prime::nt_funcs::is_prime64(n)
}

pub fn primes_up_to(bound: u64) -> Vec<u64> {
    (2..=bound).filter(|&n| is_prime(n)).collect()
}

/// Prime factorization of a nonzero integer's absolute value, primes ascending.
pub fn factor(n: &BigInt) -> Result<Vec<(u64, u32)>> {
    let mag = n.magnitude();
    if mag.is_zero() {
        return Err(Error::ZeroElement);
    }
    let small = mag
        .to_u128()
        .ok_or_else(|| Error::FactorOverflow(n.to_string()))?;
    let mut out = Vec::new();
    for (p, e) in num_prime::nt_funcs::factorize128(small) {
        let p = u64::try_from(p).map_err(|_| Error::FactorOverflow(n.to_string()))?;
        out.push((p, e as u32));
    }
    Ok(out)
}

pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    if n <= 1 {
        return Vec::new();
    }
    num_prime::nt_funcs::factorize64(n)
        .into_iter()
        .map(|(p, e)| (p, e as u32))
        .collect()
}

pub fn is_squarefree(n: u64) -> bool {
    n > 0 && factor_u64(n).iter().all(|&(_, e)| e == 1)
}

/// ℓ-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, ell: u64) -> u32 {
    debug_assert!(!n.is_zero());
    let ell = BigInt::from(ell);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&ell);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// Kronecker symbol (d | ℓ) for a prime ℓ.
pub fn kronecker(d: i64, ell: u64) -> i8 {
    if ell == 2 {
        return match d.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
    }
    let r = d.rem_euclid(ell as i64) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (ell - 1) / 2, ell) == 1 {
        1
    } else {
        -1
    }
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = a.extended_gcd(m);
    if !g.gcd.is_one() {
        return None;
    }
    Some(g.x.mod_floor(m))
}

/// Reduce a rational number modulo `m`; `None` when the denominator is not a unit.
pub fn rational_mod(num: &BigInt, den: &BigInt, m: &BigInt) -> Option<BigInt> {
    let inv = inv_mod(&den.mod_floor(m), m)?;
    Some((num * inv).mod_floor(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_matches_square_scan() {
        for d in [2i64, 3, 5, 12, 229, 8, 13] {
            for &ell in &primes_up_to(60) {
                let expected = if d.rem_euclid(ell as i64) == 0 {
                    0
                } else if ell == 2 {
                    // For ell = 2 the symbol is defined through d mod 8.
                    match d.rem_euclid(8) {
                        1 | 7 => 1,
                        _ => -1,
                    }
                } else if (1..ell).any(|x| (x * x) % ell == d.rem_euclid(ell as i64) as u64) {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker(d, ell), expected, "d={d} ell={ell}");
            }
        }
    }

    #[test]
    fn factor_roundtrip() {
        let n = BigInt::from(2u64 * 2 * 3 * 229 * 1_000_003);
        let f = factor(&n).unwrap();
        assert_eq!(f, vec![(2, 2), (3, 1), (229, 1), (1_000_003, 1)]);
        assert_eq!(valuation(&n, 2), 2);
    }
}
