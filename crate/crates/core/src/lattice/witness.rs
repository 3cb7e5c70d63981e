//! Deciding whether two lattices lie in the same Z·K_{S,q}-homothety class.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::context::ModMat;
use super::search::elements_of_norm;
use super::{ContextS, Lattice};
use crate::arith::factor;
use crate::error::Result;
use crate::quadfield::KElement;

/// L2 = β·L1 with β = r·α, α ∈ K_{S,q} and r a rational prime to pdN.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub beta: KElement,
    pub alpha: KElement,
    pub r: BigRational,
}

/// Search for a witness that L2 = r·α·L1. `None` means the lattices are in
/// different classes.
pub fn homothety_witness(ctx: &ContextS, l1: &Lattice, l2: &Lattice) -> Result<Option<Witness>> {
    let qf = &ctx.qf;
    let nu = l2.index() / l1.index();
    let m1 = ctx.unit_stabilizer(l1)?;
    let mut shifted = l1.clone();
    let mut eps_pow = KElement::one();
    for _ in 0..m1 {
        let colon = l2.colon(qf, &shifted)?;
        for gamma in elements_of_norm(qf, &colon, &nu) {
            if shifted.scale(qf, &gamma)? != *l2 {
                continue;
            }
            let beta = qf.mul(&gamma, &eps_pow);
            if let Some(w) = split_rational(ctx, &beta, m1)? {
                return Ok(Some(w));
            }
        }
        shifted = shifted.scale(qf, &qf.unit)?;
        eps_pow = qf.mul(&eps_pow, &qf.unit);
    }
    Ok(None)
}

/// Write ±β·ε^{m₁t} = r·α with α ∈ K_{S,q}, trying every unit that fixes L1.
fn split_rational(ctx: &ContextS, beta: &KElement, m1: u64) -> Result<Option<Witness>> {
    let qf = &ctx.qf;
    if !ctx.in_s0(beta) {
        return Ok(None);
    }
    let target = ctx.q_star(beta)?;
    let step = qf.pow(&qf.unit, m1 as i64)?;
    let period = unit_period(ctx, m1);
    let mut unit = KElement::one();
    for _ in 0..period {
        for sign in [1i64, -1] {
            let b = qf.mul(beta, &unit).scale(&BigRational::from_integer(sign.into()));
            let Some(c) = ctx.scalar_mod_m(&b) else { continue };
            if let Some(r) = choose_rational(ctx, &b, &c, target)? {
                let alpha = b.scale(&r.recip());
                if ctx.in_ksq(&alpha)? {
                    return Ok(Some(Witness { beta: b, alpha, r }));
                }
            }
        }
        unit = qf.mul(&unit, &step);
    }
    Ok(None)
}

/// Order of r(ε^{m₁}) in GL₂(Z/M).
fn unit_period(ctx: &ContextS, m1: u64) -> u64 {
    let e = ModMat::from_big(&ctx.unit_matrix(), ctx.m).pow(m1);
    let mut x = e;
    let mut k = 1;
    while !x.is_identity() {
        x = x.mul(&e);
        k += 1;
    }
    k
}

/// A rational r ≡ c (mod M), prime to pdN, with θ(r) equal to `target`.
/// Divisors of N(β) are tried first, closest to √|N(β)|; then the least
/// integer in the residue class.
fn choose_rational(ctx: &ContextS, beta: &KElement, c: &BigInt, target: i8) -> Result<Option<BigRational>> {
    let m = BigInt::from(ctx.m);
    let norm = ctx.qf.norm(beta).abs();
    let mut primes: Vec<(u64, i64)> = Vec::new();
    for (p, e) in factor(norm.numer())? {
        primes.push((p, e as i64));
    }
    for (p, e) in factor(norm.denom())? {
        primes.push((p, -(e as i64)));
    }
    let mut candidates = vec![BigRational::one()];
    for &(p, e) in &primes {
        let mut next = Vec::new();
        for base in &candidates {
            for k in 0..=e.unsigned_abs() {
                let pk = BigInt::from(p).pow(k as u32);
                let f = if e > 0 { BigRational::from_integer(pk) } else { BigRational::new(BigInt::one(), pk) };
                next.push(base * f);
            }
        }
        candidates = next;
    }
    let log_norm = ratio_log(&norm);
    let mut scored: Vec<(f64, BigRational)> = candidates
        .into_iter()
        .flat_map(|r| [r.clone(), -r])
        .map(|r| ((log_norm - 2.0 * ratio_log(&r.abs())).abs(), r))
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| b.1.cmp(&a.1)));
    let ok = |r: &BigRational| -> Result<bool> {
        if !ctx.is_coprime_to_pdn(r.numer()) || !ctx.is_coprime_to_pdn(r.denom()) {
            return Ok(false);
        }
        let Some(res) = crate::arith::rational_mod(r.numer(), r.denom(), &m) else { return Ok(false) };
        Ok(res == *c && ctx.theta(r)? == target)
    };
    for (_, r) in &scored {
        if ok(r)? {
            return Ok(Some(r.clone()));
        }
    }
    // Fallback: the least |r| in the residue class with the right character.
    let c = c.to_i64().unwrap_or(0);
    let mi = ctx.m as i64;
    for k in 0..100_000i64 {
        for cand in [c + k * mi, c - (k + 1) * mi] {
            if cand == 0 {
                continue;
            }
            let r = BigRational::from_integer(cand.into());
            if ok(&r)? {
                return Ok(Some(r));
            }
        }
    }
    Ok(None)
}

fn ratio_log(r: &BigRational) -> f64 {
    let bits = |x: &BigInt| {
        let b = x.bits() as i64;
        let shift = (b - 60).max(0);
        ((x >> shift as usize).to_f64().unwrap_or(1.0)).ln() + shift as f64 * std::f64::consts::LN_2
    };
    if r.is_zero() {
        return 0.0;
    }
    bits(r.numer()) - bits(r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::QuadraticField;

    fn ctx() -> ContextS {
        ContextS::new(QuadraticField::new(229).unwrap(), 7, 1, 7).unwrap()
    }

    #[test]
    fn identity_and_scalar_witnesses() {
        let c = ctx();
        let l = Lattice::from_hnf(3, 1, 5);
        let w = homothety_witness(&c, &l, &l).unwrap().unwrap();
        assert_eq!((w.beta, w.r), (KElement::one(), BigRational::one()));
        let l3 = l.scale_rational(&BigRational::from_integer(3.into())).unwrap();
        let w = homothety_witness(&c, &l, &l3).unwrap().unwrap();
        assert_eq!(w.beta, KElement::integer(3));
        assert_eq!(w.r, BigRational::from_integer(3.into()));
        assert_eq!(w.alpha, KElement::one());
    }

    #[test]
    fn ideal_and_nonideal_are_not_homothetic() {
        let c = ctx();
        let thin = Lattice::from_hnf(2, 0, 1);
        assert!(homothety_witness(&c, &Lattice::unit(), &thin).unwrap().is_none());
    }

    #[test]
    fn witness_round_trip_on_random_multiple() {
        let c = ctx();
        let l = Lattice::from_hnf(2, 1, 3);
        let alpha = c.stabilizer_generator(crate::lattice::StabilizerExponent { m: c.i_s, sign: c.sign_s });
        let target = l.scale(&c.qf, &c.qf.mul(&alpha, &KElement::integer(5))).unwrap();
        let w = homothety_witness(&c, &l, &target).unwrap().expect("same class");
        assert_eq!(l.scale(&c.qf, &w.beta).unwrap(), target);
        assert!(c.in_ksq(&w.alpha).unwrap());
    }
}
