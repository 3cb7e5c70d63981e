use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use super::Lattice;
use crate::arith::{factor_u64, rational_mod};
use crate::error::{Error, Result};
use crate::quadfield::{KElement, PrimeKind, QuadraticField};

/// Hard ceiling on the stabilizer iteration; finiteness is guaranteed, so
/// hitting this means the configuration is wrong.
pub const STABILIZER_CAP: u64 = 1_000_000;

/// The level structure: S₀ = S₀(pdN), S = S(M) ∩ S₀, and the derived i^S.
#[derive(Clone, Debug)]
pub struct ContextS {
    pub qf: QuadraticField,
    pub m: u64,
    pub level_n: u64,
    pub p: u64,
    pub pdn: u64,
    /// Least k with ±ε^k ∈ K_{S,q}.
    pub i_s: u64,
    /// The sign s with s·ε^{i_s} ∈ K_{S,q}.
    pub sign_s: i8,
}

/// m_L together with the sign that puts ±ε^{m_L} into K_{S,q}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StabilizerExponent {
    pub m: u64,
    pub sign: i8,
}

impl ContextS {
    pub fn new(qf: QuadraticField, m: u64, level_n: u64, p: u64) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidContext(format!("M = {m} must be at least 3")));
        }
        if level_n == 0 {
            return Err(Error::InvalidContext("N must be positive".into()));
        }
        let pdn = p
            .checked_mul(qf.disc.unsigned_abs())
            .and_then(|x| x.checked_mul(level_n))
            .ok_or_else(|| Error::InvalidContext("pdN overflows u64".into()))?;
        if pdn % m != 0 {
            return Err(Error::InvalidContext(format!("M = {m} does not divide pdN = {pdn}")));
        }
        let mut ctx = ContextS { qf, m, level_n, p, pdn, i_s: 0, sign_s: 1 };
        let (i_s, sign) = ctx.unit_scalar_order()?;
        ctx.i_s = i_s;
        ctx.sign_s = sign;
        Ok(ctx)
    }

    /// Apply the defaults: M = 4 unless given, and N enlarged until M | pdN.
    pub fn with_defaults(qf: QuadraticField, m: Option<u64>, level_n: Option<u64>, p: u64) -> Result<Self> {
        let m = m.unwrap_or(4);
        let mut n = level_n.unwrap_or(1);
        let base = p * qf.disc.unsigned_abs() * n;
        let g = base.gcd(&m);
        n *= m / g;
        ContextS::new(qf, m, n, p)
    }

    pub fn is_coprime_to_pdn(&self, x: &BigInt) -> bool {
        x.gcd(&BigInt::from(self.pdn)).is_one()
    }

    /// Multiplication by ε on (ω, 1)-coordinate columns: the transpose of r(ε).
    pub fn unit_matrix(&self) -> [[BigInt; 2]; 2] {
        let eps = &self.qf.unit;
        let (u, v) = (eps.u.to_integer(), eps.v.to_integer());
        let (t, n) = (BigInt::from(self.qf.t), BigInt::from(self.qf.n));
        [[&u + &v * &t, v.clone()], [-(&v * &n), u]]
    }

    /// Least k ≥ 1 with r(ε)^k ≡ ±I (mod M), and the sign of that scalar.
    fn unit_scalar_order(&self) -> Result<(u64, i8)> {
        let m = self.m;
        let e = ModMat::from_big(&self.unit_matrix(), m);
        let mut x = e;
        for k in 1..=STABILIZER_CAP {
            if let Some(s) = x.scalar_sign() {
                return Ok((k, s));
            }
            x = x.mul(&e);
        }
        Err(Error::StabilizerCap(STABILIZER_CAP))
    }

    /// Membership in K_{S,q}.
    pub fn in_ksq(&self, a: &KElement) -> Result<bool> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        if !self.in_s0(a) {
            return Ok(false);
        }
        if !self.congruent_to_identity(a) {
            return Ok(false);
        }
        Ok(self.q_star(a)? == 1)
    }

    /// r(a) has pdN-integral entries and a determinant prime to pdN.
    pub fn in_s0(&self, a: &KElement) -> bool {
        let r = self.qf.r_omega_matrix(a);
        let pdn = BigInt::from(self.pdn);
        let entries_ok = r.iter().flatten().all(|x| x.denom().gcd(&pdn).is_one());
        let det = self.qf.norm(a);
        entries_ok && det.numer().gcd(&pdn).is_one() && det.denom().gcd(&pdn).is_one()
    }

    /// r(a) ≡ I (mod M); requires a ∈ K_{S₀}.
    pub fn congruent_to_identity(&self, a: &KElement) -> bool {
        self.scalar_mod_m(a).is_some_and(|c| c.is_one())
    }

    /// If r(a) ≡ c·I (mod M) for a residue c, return c.
    pub fn scalar_mod_m(&self, a: &KElement) -> Option<BigInt> {
        let r = self.qf.r_omega_matrix(a);
        let m = BigInt::from(self.m);
        let red: Option<Vec<BigInt>> = r.iter().flatten().map(|x| rational_mod(x.numer(), x.denom(), &m)).collect();
        let red = red?;
        (red[1].is_zero() && red[2].is_zero() && red[0] == red[3]).then(|| red[0].clone())
    }

    /// q*(a) = Π over inert ℓ of θ(ℓ)^{v_(ℓ)(a)}, as ±1.
    pub fn q_star(&self, a: &KElement) -> Result<i8> {
        let f = self.qf.factor_principal(a)?;
        let mut sign = 1i8;
        for (p, e) in &f.factors {
            if self.pdn % p.ell == 0 {
                return Err(Error::NotCoprime(a.to_string(), self.pdn));
            }
            if p.kind == PrimeKind::Inert && e.rem_euclid(2) == 1 {
                sign = -sign;
            }
        }
        Ok(sign)
    }

    /// θ on rationals prime to pdN (the character q on scalars).
    pub fn theta(&self, r: &BigRational) -> Result<i8> {
        if !self.is_coprime_to_pdn(r.numer()) || !self.is_coprime_to_pdn(r.denom()) {
            return Err(Error::NotCoprime(r.to_string(), self.pdn));
        }
        self.qf.theta_rational(r)
    }

    /// Least m₁ ≥ 1 with ε^{m₁}L = L.
    pub fn unit_stabilizer(&self, lattice: &Lattice) -> Result<u64> {
        let (_, prim) = lattice.primitive_part();
        let (a, b, c) = prim.hnf();
        let det = a * c;
        if det.is_one() {
            return Ok(1);
        }
        // ε^m L = L  ⟺  adj(H)·E^m·H ≡ 0 (mod det H)
        let h = [[a.clone(), BigInt::zero()], [b.clone(), c.clone()]];
        let adj = [[c.clone(), BigInt::zero()], [-b.clone(), a.clone()]];
        let e = self.unit_matrix();
        if let Some(d) = det.to_u64() {
            let em = ModMat::from_big(&e, d);
            let hm = ModMat::from_big(&h, d);
            let am = ModMat::from_big(&adj, d);
            let mut x = em;
            for k in 1..=STABILIZER_CAP {
                if am.mul(&x).mul(&hm).is_zero() {
                    return Ok(k);
                }
                x = x.mul(&em);
            }
        } else {
            let e = reduce(&e, &det);
            let mut x = e.clone();
            for k in 1..=STABILIZER_CAP {
                let y = mat_mul(&mat_mul(&adj, &x, &det), &h, &det);
                if y.iter().flatten().all(Zero::is_zero) {
                    return Ok(k);
                }
                x = mat_mul(&x, &e, &det);
            }
        }
        Err(Error::StabilizerCap(STABILIZER_CAP))
    }

    /// m_L: the least m with ε^m L = L and ±ε^m ∈ K_{S,q}. Scans multiples of
    /// m₁ for the membership condition, which for units is r(ε^m) ≡ ±I (mod M).
    pub fn m_of(&self, lattice: &Lattice) -> Result<StabilizerExponent> {
        let m1 = self.unit_stabilizer(lattice)?;
        let e = ModMat::from_big(&self.unit_matrix(), self.m);
        let step = e.pow(m1);
        let mut x = step;
        for j in 1..=STABILIZER_CAP {
            if let Some(sign) = x.scalar_sign() {
                return Ok(StabilizerExponent { m: j * m1, sign });
            }
            x = x.mul(&step);
        }
        Err(Error::StabilizerCap(STABILIZER_CAP))
    }

    /// m′_L = m_L / i^S.
    pub fn m_prime(&self, lattice: &Lattice) -> Result<u64> {
        let m = self.m_of(lattice)?.m;
        debug_assert_eq!(m % self.i_s, 0);
        Ok(m / self.i_s)
    }

    /// The element s·ε^{m} of K_{S,q} that generates the stabilizer of L.
    pub fn stabilizer_generator(&self, st: StabilizerExponent) -> KElement {
        let e = self.qf.pow(&self.qf.unit, st.m as i64).expect("unit is invertible");
        if st.sign < 0 {
            e.neg()
        } else {
            e
        }
    }

    /// A random element of K_{S,q}: a product of integral factors ≡ 1 (mod M)
    /// with norm prime to pdN and q* = 1, possibly inverted, times a power of
    /// the stabilizer generator ±ε^{i^S}.
    pub fn sample_ksq<R: Rng>(&self, rng: &mut R) -> Result<KElement> {
        let qf = &self.qf;
        let m = self.m as i64;
        let mut acc = KElement::one();
        for _ in 0..rng.gen_range(1..=2) {
            let factor = loop {
                let x = rng.gen_range(-6i64..=6);
                let y = rng.gen_range(-6i64..=6);
                let cand = KElement::from_ints(1 + m * x, m * y);
                if cand.is_zero() || !self.in_s0(&cand) {
                    continue;
                }
                if self.q_star(&cand)? == 1 {
                    break cand;
                }
            };
            let factor = if rng.gen_bool(0.3) { qf.inverse(&factor)? } else { factor };
            acc = qf.mul(&acc, &factor);
        }
        let gen = self.stabilizer_generator(StabilizerExponent { m: self.i_s, sign: self.sign_s });
        let k = rng.gen_range(-1i64..=1);
        acc = qf.mul(&acc, &qf.pow(&gen, k)?);
        debug_assert!(self.in_ksq(&acc)?);
        Ok(acc)
    }

    /// Primes dividing pdN.
    pub fn pdn_primes(&self) -> Vec<u64> {
        factor_u64(self.pdn).into_iter().map(|(p, _)| p).collect()
    }
}

/// 2×2 matrix over Z/mZ for m < 2^64.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct ModMat {
    e: [[u64; 2]; 2],
    m: u64,
}

impl ModMat {
    pub(crate) fn from_big(x: &[[BigInt; 2]; 2], m: u64) -> Self {
        let mb = BigInt::from(m);
        let r = |v: &BigInt| v.mod_floor(&mb).to_u64().unwrap();
        ModMat { e: [[r(&x[0][0]), r(&x[0][1])], [r(&x[1][0]), r(&x[1][1])]], m }
    }

    pub(crate) fn mul(&self, o: &ModMat) -> ModMat {
        let m = self.m as u128;
        let f = |i: usize, j: usize| {
            ((self.e[i][0] as u128 * o.e[0][j] as u128 + self.e[i][1] as u128 * o.e[1][j] as u128) % m) as u64
        };
        ModMat { e: [[f(0, 0), f(0, 1)], [f(1, 0), f(1, 1)]], m: self.m }
    }

    pub(crate) fn pow(&self, mut k: u64) -> ModMat {
        let mut acc = ModMat { e: [[1 % self.m, 0], [0, 1 % self.m]], m: self.m };
        let mut base = *self;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    fn is_zero(&self) -> bool {
        self.e.iter().flatten().all(|&x| x == 0)
    }

    pub(crate) fn is_identity(&self) -> bool {
        self.scalar_sign() == Some(1)
    }

    /// Some(+1) for I, Some(−1) for −I (mod m), None otherwise.
    pub(crate) fn scalar_sign(&self) -> Option<i8> {
        let [[a, b], [c, d]] = self.e;
        if b != 0 || c != 0 || a != d {
            return None;
        }
        if a == 1 % self.m {
            Some(1)
        } else if a == self.m - 1 {
            Some(-1)
        } else {
            None
        }
    }
}

fn reduce(x: &[[BigInt; 2]; 2], m: &BigInt) -> [[BigInt; 2]; 2] {
    [[x[0][0].mod_floor(m), x[0][1].mod_floor(m)], [x[1][0].mod_floor(m), x[1][1].mod_floor(m)]]
}

fn mat_mul(x: &[[BigInt; 2]; 2], y: &[[BigInt; 2]; 2], m: &BigInt) -> [[BigInt; 2]; 2] {
    let f = |i: usize, j: usize| (&x[i][0] * &y[0][j] + &x[i][1] * &y[1][j]).mod_floor(m);
    [[f(0, 0), f(0, 1)], [f(1, 0), f(1, 1)]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx229() -> ContextS {
        ContextS::new(QuadraticField::new(229).unwrap(), 7, 1, 7).unwrap()
    }

    #[test]
    fn rejects_bad_levels() {
        let qf = QuadraticField::new(229).unwrap();
        assert!(ContextS::new(qf.clone(), 2, 1, 7).is_err());
        assert!(ContextS::new(qf.clone(), 4, 1, 7).is_err());
        let c = ContextS::with_defaults(qf, None, None, 7).unwrap();
        assert_eq!((c.m, c.level_n), (4, 4));
    }

    #[test]
    fn membership_examples() {
        let c = ctx229();
        assert!(c.in_ksq(&KElement::one()).unwrap());
        assert!(!c.in_ksq(&KElement::integer(-1)).unwrap());
        let gen = c.stabilizer_generator(StabilizerExponent { m: c.i_s, sign: c.sign_s });
        assert!(c.in_ksq(&gen).unwrap());
        for k in 1..c.i_s {
            let e = c.qf.pow(&c.qf.unit, k as i64).unwrap();
            assert!(!c.in_ksq(&e).unwrap() && !c.in_ksq(&e.neg()).unwrap());
        }
    }

    #[test]
    fn q_star_examples() {
        let c = ctx229();
        assert_eq!(c.q_star(&KElement::integer(2)).unwrap(), -1);
        assert_eq!(c.q_star(&KElement::integer(3)).unwrap(), 1);
        assert_eq!(c.q_star(&c.qf.unit).unwrap(), 1);
        assert!(c.q_star(&KElement::integer(7)).is_err());
    }

    #[test]
    fn ideals_have_m_equal_to_i_s() {
        let c = ctx229();
        let o = Lattice::unit();
        assert_eq!(c.m_of(&o).unwrap().m, c.i_s);
        let lam = Lattice::prime_ideal(&c.qf, &crate::quadfield::PrimeIdeal::new(3, PrimeKind::SplitFirst));
        assert_eq!(c.m_prime(&lam).unwrap(), 1);
        let thin = Lattice::from_hnf(13, 0, 1);
        let st = c.m_of(&thin).unwrap();
        assert_eq!(st.m % c.i_s, 0);
        let g = c.stabilizer_generator(st);
        assert_eq!(thin.scale(&c.qf, &g).unwrap(), thin);
        assert!(c.in_ksq(&g).unwrap());
    }
}
