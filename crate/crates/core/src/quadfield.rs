//! Exact arithmetic in K = Q(√d₀): elements, the fundamental unit, prime
//! splitting, prime ideals, principal-ideal factorization and ℓ-adic roots.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{factor, is_prime, is_squarefree, kronecker, mul_mod, pow_mod, valuation};
use crate::error::{Error, Result};

/// An element u + vω of K.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KElement {
    pub u: BigRational,
    pub v: BigRational,
}

impl KElement {
    pub fn new(u: BigRational, v: BigRational) -> Self {
        KElement { u, v }
    }

    pub fn from_ints(u: i64, v: i64) -> Self {
        Self::from_bigints(BigInt::from(u), BigInt::from(v))
    }

    pub fn from_bigints(u: BigInt, v: BigInt) -> Self {
        KElement::new(BigRational::from_integer(u), BigRational::from_integer(v))
    }

    pub fn rational(q: BigRational) -> Self {
        KElement::new(q, BigRational::zero())
    }

    pub fn integer(n: i64) -> Self {
        Self::from_ints(n, 0)
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    pub fn omega() -> Self {
        Self::from_ints(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.v.is_zero()
    }

    pub fn add(&self, other: &KElement) -> KElement {
        KElement::new(&self.u + &other.u, &self.v + &other.v)
    }

    pub fn sub(&self, other: &KElement) -> KElement {
        KElement::new(&self.u - &other.u, &self.v - &other.v)
    }

    pub fn neg(&self) -> KElement {
        KElement::new(-&self.u, -&self.v)
    }

    pub fn scale(&self, q: &BigRational) -> KElement {
        KElement::new(&self.u * q, &self.v * q)
    }

    /// Least common denominator of the two coordinates.
    pub fn denominator(&self) -> BigInt {
        self.u.denom().lcm(self.v.denom())
    }
}

impl fmt::Display for KElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.u.is_zero(), self.v.is_zero()) {
            (_, true) => write!(f, "{}", self.u),
            (true, false) => write!(f, "{}*w", self.v),
            (false, false) => {
                if self.v.is_negative() {
                    write!(f, "{} - {}*w", self.u, -&self.v)
                } else {
                    write!(f, "{} + {}*w", self.u, self.v)
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

impl Splitting {
    pub fn name(self) -> &'static str {
        match self {
            Splitting::Split => "split",
            Splitting::Inert => "inert",
            Splitting::Ramified => "ramified",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrimeKind {
    /// λ: the prime (ℓ, ω − r) for the least nonnegative root r mod ℓ.
    SplitFirst,
    /// λ′: the conjugate of λ.
    SplitSecond,
    Inert,
    Ramified,
}

/// A prime ideal of O, identified by its residue prime and kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PrimeIdeal {
    pub ell: u64,
    pub kind: PrimeKind,
}

impl PrimeIdeal {
    pub fn new(ell: u64, kind: PrimeKind) -> Self {
        PrimeIdeal { ell, kind }
    }

    pub fn norm(&self) -> u128 {
        match self.kind {
            PrimeKind::Inert => self.ell as u128 * self.ell as u128,
            _ => self.ell as u128,
        }
    }

    pub fn conjugate(&self) -> PrimeIdeal {
        let kind = match self.kind {
            PrimeKind::SplitFirst => PrimeKind::SplitSecond,
            PrimeKind::SplitSecond => PrimeKind::SplitFirst,
            k => k,
        };
        PrimeIdeal::new(self.ell, kind)
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PrimeKind::SplitFirst => write!(f, "lambda_{}", self.ell),
            PrimeKind::SplitSecond => write!(f, "lambda'_{}", self.ell),
            PrimeKind::Inert => write!(f, "({})", self.ell),
            PrimeKind::Ramified => write!(f, "P_{}", self.ell),
        }
    }
}

/// A fractional ideal as a product of prime powers with nonzero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FracIdealFactorization {
    pub factors: BTreeMap<PrimeIdeal, i64>,
}

impl FracIdealFactorization {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn single(p: PrimeIdeal, e: i64) -> Self {
        let mut f = Self::default();
        f.add(p, e);
        f
    }

    pub fn add(&mut self, p: PrimeIdeal, e: i64) {
        if e == 0 {
            return;
        }
        let slot = self.factors.entry(p).or_insert(0);
        *slot += e;
        if *slot == 0 {
            self.factors.remove(&p);
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&p, &e) in &other.factors {
            out.add(p, e);
        }
        out
    }

    pub fn inverse(&self) -> Self {
        FracIdealFactorization {
            factors: self.factors.iter().map(|(&p, &e)| (p, -e)).collect(),
        }
    }

    pub fn exponent(&self, p: &PrimeIdeal) -> i64 {
        self.factors.get(p).copied().unwrap_or(0)
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    /// Absolute norm as a rational number.
    pub fn norm(&self) -> BigRational {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (p, &e) in &self.factors {
            let n = BigInt::from(p.norm()).pow(e.unsigned_abs() as u32);
            if e > 0 {
                num *= n;
            } else {
                den *= n;
            }
        }
        BigRational::new(num, den)
    }
}

impl fmt::Display for FracIdealFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "(1)");
        }
        let parts: Vec<String> = self.factors.iter().map(|(p, e)| format!("{p}^{e}")).collect();
        write!(f, "{}", parts.join(" * "))
    }
}

/// The real quadratic field Q(√d₀) with O = Z[ω], ω² = tω − n.
#[derive(Clone, Debug)]
pub struct QuadraticField {
    pub d0: i64,
    /// Field discriminant d.
    pub disc: i64,
    /// Trace of ω.
    pub t: i64,
    /// Norm of ω.
    pub n: i64,
    pub unit: KElement,
    pub unit_norm: i8,
    sqrt_d0: f64,
}

impl QuadraticField {
    pub fn new(d0: i64) -> Result<Self> {
        if d0 <= 1 || !is_squarefree(d0 as u64) {
            return Err(Error::InvalidDiscriminant(d0));
        }
        let (disc, t, n) = if d0 % 4 == 1 { (d0, 1, (1 - d0) / 4) } else { (4 * d0, 0, -d0) };
        let mut field = QuadraticField {
            d0,
            disc,
            t,
            n,
            unit: KElement::one(),
            unit_norm: 1,
            sqrt_d0: (d0 as f64).sqrt(),
        };
        let unit = field.fundamental_unit();
        field.unit_norm = if field.norm(&unit).is_one() { 1 } else { -1 };
        field.unit = unit;
        Ok(field)
    }

    pub fn mul(&self, a: &KElement, b: &KElement) -> KElement {
        // (u1 + v1ω)(u2 + v2ω) with ω² = tω − n
        let vv = &a.v * &b.v;
        let u = &a.u * &b.u - &vv * BigInt::from(self.n);
        let v = &a.u * &b.v + &a.v * &b.u + &vv * BigInt::from(self.t);
        KElement::new(u, v)
    }

    pub fn conjugate(&self, a: &KElement) -> KElement {
        KElement::new(&a.u + &a.v * BigInt::from(self.t), -&a.v)
    }

    pub fn norm(&self, a: &KElement) -> BigRational {
        // u² + t·uv + n·v²
        &a.u * &a.u + &a.u * &a.v * BigInt::from(self.t) + &a.v * &a.v * BigInt::from(self.n)
    }

    pub fn trace(&self, a: &KElement) -> BigRational {
        &a.u * BigInt::from(2) + &a.v * BigInt::from(self.t)
    }

    pub fn inverse(&self, a: &KElement) -> Result<KElement> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        let nrm = self.norm(a);
        let c = self.conjugate(a);
        Ok(KElement::new(c.u / &nrm, c.v / &nrm))
    }

    pub fn div(&self, a: &KElement, b: &KElement) -> Result<KElement> {
        Ok(self.mul(a, &self.inverse(b)?))
    }

    pub fn pow(&self, a: &KElement, e: i64) -> Result<KElement> {
        let mut base = if e < 0 { self.inverse(a)? } else { a.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = KElement::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// The two real embeddings, √d₀ ↦ +√d₀ first.
    pub fn embeddings(&self, a: &KElement) -> (f64, f64) {
        let (w1, w2) = self.omega_embeddings();
        let u = a.u.to_f64().unwrap_or(f64::NAN);
        let v = a.v.to_f64().unwrap_or(f64::NAN);
        (u + v * w1, u + v * w2)
    }

    pub fn omega_embeddings(&self) -> (f64, f64) {
        if self.t == 1 {
            ((1.0 + self.sqrt_d0) / 2.0, (1.0 - self.sqrt_d0) / 2.0)
        } else {
            (self.sqrt_d0, -self.sqrt_d0)
        }
    }

    /// log of the fundamental unit under the first embedding.
    pub fn regulator(&self) -> f64 {
        let (e1, _) = self.embeddings(&self.unit);
        e1.ln()
    }

    /// Regular representation r(a) on the ordered basis (ω, 1):
    /// r(a)·(ω, 1)ᵀ = (aω, a)ᵀ.
    pub fn r_omega_matrix(&self, a: &KElement) -> [[BigRational; 2]; 2] {
        let t = BigInt::from(self.t);
        let n = BigInt::from(self.n);
        [
            [&a.u + &a.v * &t, -(&a.v * &n)],
            [a.v.clone(), a.u.clone()],
        ]
    }

    pub fn splitting_type(&self, ell: u64) -> Splitting {
        match kronecker(self.disc, ell) {
            1 => Splitting::Split,
            -1 => Splitting::Inert,
            _ => Splitting::Ramified,
        }
    }

    /// θ(ℓ) for a prime, i.e. the Kronecker symbol (d | ℓ).
    pub fn theta_prime(&self, ell: u64) -> i8 {
        kronecker(self.disc, ell)
    }

    /// θ on a nonzero rational coprime to d. θ(−1) = 1 since K is real.
    pub fn theta_rational(&self, r: &BigRational) -> Result<i8> {
        let mut sign = 1i8;
        for n in [r.numer(), r.denom()] {
            for (ell, e) in factor(n)? {
                let th = self.theta_prime(ell);
                if th == 0 {
                    return Err(Error::NotCoprime(r.to_string(), self.disc.unsigned_abs()));
                }
                if th < 0 && e % 2 == 1 {
                    sign = -sign;
                }
            }
        }
        Ok(sign)
    }

    /// Roots of x² − tx + n modulo a prime ℓ, least first (one root when ramified).
    pub fn roots_mod(&self, ell: u64) -> Vec<u64> {
        let t = self.t.rem_euclid(ell as i64) as u64;
        let n = self.n.rem_euclid(ell as i64) as u64;
        let f = |x: u64| (mul_mod(x, x, ell) + ell - mul_mod(t, x, ell) + n) % ell;
        if ell < 64 {
            return (0..ell).filter(|&x| f(x) == 0).collect();
        }
        // ℓ odd: x = (t ± √d)/2
        let d = self.disc.rem_euclid(ell as i64) as u64;
        let Some(s) = sqrt_mod(d, ell) else { return Vec::new() };
        let half = (ell + 1) / 2;
        let mut roots = vec![mul_mod((t + s) % ell, half, ell), mul_mod((t + ell - s) % ell, half, ell)];
        roots.sort_unstable();
        roots.dedup();
        debug_assert!(roots.iter().all(|&r| f(r) == 0));
        roots
    }

    /// The root r mod ℓ attached to a split or ramified prime ideal.
    pub fn prime_root(&self, p: &PrimeIdeal) -> Option<u64> {
        let roots = self.roots_mod(p.ell);
        match p.kind {
            PrimeKind::SplitFirst | PrimeKind::Ramified => roots.first().copied(),
            PrimeKind::SplitSecond => roots.get(1).copied(),
            PrimeKind::Inert => None,
        }
    }

    /// The prime ideals above ℓ, λ before λ′.
    pub fn primes_above(&self, ell: u64) -> Vec<PrimeIdeal> {
        match self.splitting_type(ell) {
            Splitting::Split => vec![
                PrimeIdeal::new(ell, PrimeKind::SplitFirst),
                PrimeIdeal::new(ell, PrimeKind::SplitSecond),
            ],
            Splitting::Inert => vec![PrimeIdeal::new(ell, PrimeKind::Inert)],
            Splitting::Ramified => vec![PrimeIdeal::new(ell, PrimeKind::Ramified)],
        }
    }

    /// Integer HNF (a, b, c) of a prime ideal: basis aω + b, c.
    pub fn prime_hnf(&self, p: &PrimeIdeal) -> (u64, u64, u64) {
        match p.kind {
            PrimeKind::Inert => (p.ell, 0, p.ell),
            _ => {
                let r = self.prime_root(p).expect("split or ramified prime has a root");
                (1, (p.ell - r) % p.ell, p.ell)
            }
        }
    }

    /// Lifts (r, r′) of the two roots modulo ℓ^prec, r lifting λ's root.
    pub fn hensel_roots(&self, ell: u64, prec: u32) -> Result<(BigInt, BigInt)> {
        if self.splitting_type(ell) != Splitting::Split {
            return Err(Error::WrongSplitting {
                ell,
                found: self.splitting_type(ell).name(),
                expected: "split",
            });
        }
        let r0 = self.roots_mod(ell)[0];
        let modulus = BigInt::from(ell).pow(prec);
        let r = hensel_lift(self.t, self.n, ell, r0, prec);
        let r_conj = (BigInt::from(self.t) - &r).mod_floor(&modulus);
        Ok((r, r_conj))
    }

    /// The principal fractional ideal (a) as a product of prime ideals.
    pub fn factor_principal(&self, a: &KElement) -> Result<FracIdealFactorization> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        let den = a.denominator();
        let x = (&a.u * BigRational::from_integer(den.clone())).to_integer();
        let y = (&a.v * BigRational::from_integer(den.clone())).to_integer();
        let beta = KElement::from_bigints(x.clone(), y.clone());
        let nb = self.norm(&beta).to_integer();
        let mut out = FracIdealFactorization::unit();
        for (ell, e) in factor(&nb)? {
            for (p, v) in self.integral_valuations(&x, &y, ell, e) {
                out.add(p, v);
            }
        }
        if !den.is_one() {
            for (ell, e) in factor(&den)? {
                for p in self.primes_above(ell) {
                    let mult = if p.kind == PrimeKind::Ramified { 2 } else { 1 };
                    out.add(p, -(mult * e as i64));
                }
            }
        }
        Ok(out)
    }

    /// Valuations of the integral element x + yω at the primes above ℓ,
    /// given e = v_ℓ(N(x + yω)).
    fn integral_valuations(&self, x: &BigInt, y: &BigInt, ell: u64, e: u32) -> Vec<(PrimeIdeal, i64)> {
        match self.splitting_type(ell) {
            Splitting::Inert => vec![(PrimeIdeal::new(ell, PrimeKind::Inert), (e / 2) as i64)],
            Splitting::Ramified => vec![(PrimeIdeal::new(ell, PrimeKind::Ramified), e as i64)],
            Splitting::Split => {
                let prec = e + 1;
                let r = hensel_lift(self.t, self.n, ell, self.roots_mod(ell)[0], prec);
                let image = x + y * r;
                let modulus = BigInt::from(ell).pow(prec);
                let reduced = image.mod_floor(&modulus);
                let v1 = if reduced.is_zero() { prec } else { valuation(&reduced, ell) };
                debug_assert!(v1 <= e);
                vec![
                    (PrimeIdeal::new(ell, PrimeKind::SplitFirst), v1 as i64),
                    (PrimeIdeal::new(ell, PrimeKind::SplitSecond), (e - v1) as i64),
                ]
            }
        }
    }

    /// The least unit ε > 1, from the continued fraction of ω.
    fn fundamental_unit(&self) -> KElement {
        // ω = (P + √d)/Q with P = t, Q = 2; convergents p/q of ω yield units
        // p − qω′ = (p − qt) + qω whenever p² − tpq + nq² = ±1.
        let d = BigInt::from(self.disc);
        let sqrt_floor = d.sqrt();
        let (mut big_p, mut big_q) = (BigInt::from(self.t), BigInt::from(2));
        let (mut p_prev, mut p_cur) = (BigInt::zero(), BigInt::one());
        let (mut q_prev, mut q_cur) = (BigInt::one(), BigInt::zero());
        let t = BigInt::from(self.t);
        let n = BigInt::from(self.n);
        loop {
            let a = floor_quadratic(&big_p, &sqrt_floor, &big_q);
            let p_next = &a * &p_cur + &p_prev;
            let q_next = &a * &q_cur + &q_prev;
            p_prev = std::mem::replace(&mut p_cur, p_next);
            q_prev = std::mem::replace(&mut q_cur, q_next);
            let norm = &p_cur * &p_cur - &t * &p_cur * &q_cur + &n * &q_cur * &q_cur;
            if q_cur.is_positive() && norm.abs().is_one() {
                return KElement::from_bigints(&p_cur - &q_cur * &t, q_cur.clone());
            }
            big_p = &a * &big_q - &big_p;
            big_q = (&d - &big_p * &big_p) / &big_q;
        }
    }
}

/// floor((P + √d)/Q) for non-square d, given s = floor(√d).
fn floor_quadratic(p: &BigInt, s: &BigInt, q: &BigInt) -> BigInt {
    if q.is_positive() {
        (p + s).div_floor(q)
    } else {
        // (P + √d)/Q with Q < 0 lies strictly between (P + s + 1)/Q and (P + s)/Q.
        (p + s + BigInt::one()).div_floor(q)
    }
}

/// Newton lift of a simple root of x² − tx + n from mod ℓ to mod ℓ^prec.
fn hensel_lift(t: i64, n: i64, ell: u64, r0: u64, prec: u32) -> BigInt {
    let modulus = BigInt::from(ell).pow(prec);
    let (t, n) = (BigInt::from(t), BigInt::from(n));
    let mut r = BigInt::from(r0);
    let mut k = 1u32;
    while k < prec {
        k = (2 * k).min(prec);
        let m = BigInt::from(ell).pow(k);
        let f = &r * &r - &t * &r + &n;
        let df = BigInt::from(2) * &r - &t;
        let inv = crate::arith::inv_mod(&df.mod_floor(&m), &m).expect("simple root");
        r = (&r - f * inv).mod_floor(&m);
    }
    r.mod_floor(&modulus)
}

/// Square root modulo an odd prime (Tonelli–Shanks).
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let (mut q, mut s) = (p - 1, 0);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p).find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1)?;
    let (mut m, mut c, mut t, mut r) = (s, pow_mod(z, q, p), pow_mod(a, q, p), pow_mod(a, (q + 1) / 2, p));
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Helper for tests and callers that need a prime check with a typed error.
pub fn require_prime(ell: u64) -> Result<()> {
    if is_prime(ell) {
        Ok(())
    } else {
        Err(Error::NotPrime(ell))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(d0: i64) -> QuadraticField {
        QuadraticField::new(d0).unwrap()
    }

    #[test]
    fn omega_conventions() {
        let q2 = k(2);
        assert_eq!((q2.t, q2.n, q2.disc), (0, -2, 8));
        let q229 = k(229);
        assert_eq!((q229.t, q229.n, q229.disc), (1, -57, 229));
        let w = KElement::omega();
        assert_eq!(q2.conjugate(&w), KElement::from_ints(0, -1));
        assert_eq!(k(5).conjugate(&w), KElement::from_ints(1, -1));
        assert_eq!(q2.conjugate(&KElement::integer(3)), KElement::integer(3));
    }

    #[test]
    fn fundamental_units_match_known_values() {
        assert_eq!(k(2).unit, KElement::from_ints(1, 1));
        assert_eq!(k(2).unit_norm, -1);
        assert_eq!(k(5).unit, KElement::from_ints(0, 1));
        assert_eq!(k(5).unit_norm, -1);
        assert_eq!(k(3).unit, KElement::from_ints(2, 1));
        assert_eq!(k(3).unit_norm, 1);
        // (15 + √229)/2 = 7 + ω
        assert_eq!(k(229).unit, KElement::from_ints(7, 1));
        assert_eq!(k(229).unit_norm, -1);
    }

    #[test]
    fn r_omega_matrix_of_omega() {
        let m = k(2).r_omega_matrix(&KElement::omega());
        let ints: Vec<i64> = m.iter().flatten().map(|x| x.to_integer().to_i64().unwrap()).collect();
        assert_eq!(ints, vec![0, 2, 1, 0]);
    }

    #[test]
    fn splitting_examples() {
        assert_eq!(k(229).splitting_type(3), Splitting::Split);
        assert_eq!(k(229).splitting_type(229), Splitting::Ramified);
        assert_eq!(k(2).splitting_type(5), Splitting::Inert);
        let inert: Vec<u64> = crate::arith::primes_up_to(25)
            .into_iter()
            .filter(|&l| k(229).splitting_type(l) == Splitting::Inert)
            .collect();
        assert_eq!(inert, vec![2, 7, 13, 23]);
    }

    #[test]
    fn hensel_examples() {
        let q5 = k(5);
        let (r, rc) = q5.hensel_roots(11, 1).unwrap();
        assert_eq!((r, rc), (BigInt::from(4), BigInt::from(8)));
        let (r, rc) = q5.hensel_roots(11, 2).unwrap();
        assert_eq!(&r % 11, BigInt::from(4));
        assert_eq!(&rc % 11, BigInt::from(8));
        for x in [&r, &rc] {
            assert!((x * x - x - BigInt::one()).mod_floor(&BigInt::from(121)).is_zero());
        }
    }

    #[test]
    fn factor_principal_examples() {
        let q = k(229);
        let f = q.factor_principal(&KElement::integer(2)).unwrap();
        assert_eq!(f, FracIdealFactorization::single(PrimeIdeal::new(2, PrimeKind::Inert), 1));
        let f = q.factor_principal(&KElement::integer(3)).unwrap();
        assert_eq!(f.exponent(&PrimeIdeal::new(3, PrimeKind::SplitFirst)), 1);
        assert_eq!(f.exponent(&PrimeIdeal::new(3, PrimeKind::SplitSecond)), 1);
        assert!(q.factor_principal(&q.unit).unwrap().is_unit());
    }

    #[test]
    fn sqrt_mod_scan() {
        for p in [3u64, 5, 7, 13, 101, 1009] {
            for a in 0..p {
                match sqrt_mod(a, p) {
                    Some(s) => assert_eq!(mul_mod(s, s, p), a),
                    None => assert!((0..p).all(|x| mul_mod(x, x, p) != a)),
                }
            }
        }
    }
}
