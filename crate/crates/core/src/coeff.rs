//! The coefficient field: a prime field F_p with p odd, or a cyclotomic field
//! Q(ζ_n) with n odd. All downstream code goes through [`CoeffField`] so it is
//! agnostic about which one is in use.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{factor_u64, is_prime, pow_mod};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoeffField {
    Prime { p: u64 },
    /// `modulus` is the monic n-th cyclotomic polynomial, low degree first.
    Cyclotomic { n: u64, modulus: Vec<BigRational> },
}

/// Field elements are plain data; arithmetic needs the owning [`CoeffField`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldElement {
    Prime(u64),
    /// Coefficients of a polynomial in ζ of degree < φ(n), trailing zeros trimmed.
    Cyclotomic(Vec<BigRational>),
}

impl FromStr for CoeffField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidField(s.to_string());
        let (mode, arg) = s.trim().split_once(':').ok_or_else(bad)?;
        let arg: u64 = arg.trim().parse().map_err(|_| bad())?;
        match mode.trim() {
            "Fp" | "fp" | "F" => CoeffField::prime(arg),
            "cyclotomic" | "cyc" => CoeffField::cyclotomic(arg),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for CoeffField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffField::Prime { p } => write!(f, "Fp:{p}"),
            CoeffField::Cyclotomic { n, .. } => write!(f, "cyclotomic:{n}"),
        }
    }
}

impl CoeffField {
    pub fn prime(p: u64) -> Result<Self> {
        if p == 2 || !is_prime(p) {
            return Err(Error::InvalidField(format!("Fp:{p}")));
        }
        Ok(CoeffField::Prime { p })
    }

    pub fn cyclotomic(n: u64) -> Result<Self> {
        if n == 0 || n % 2 == 0 {
            return Err(Error::InvalidField(format!("cyclotomic:{n}")));
        }
        let modulus = cyclotomic_polynomial(n)
            .into_iter()
            .map(BigRational::from_integer)
            .collect();
        Ok(CoeffField::Cyclotomic { n, modulus })
    }

    /// The characteristic, 0 for the cyclotomic mode.
    pub fn characteristic(&self) -> u64 {
        match self {
            CoeffField::Prime { p } => *p,
            CoeffField::Cyclotomic { .. } => 0,
        }
    }

    /// The integer that enters pdN: the characteristic, or 1 in characteristic 0.
    pub fn p_param(&self) -> u64 {
        match self {
            CoeffField::Prime { p } => *p,
            CoeffField::Cyclotomic { .. } => 1,
        }
    }

    fn degree(&self) -> usize {
        match self {
            CoeffField::Prime { .. } => 1,
            CoeffField::Cyclotomic { modulus, .. } => modulus.len() - 1,
        }
    }

    pub fn zero(&self) -> FieldElement {
        match self {
            CoeffField::Prime { .. } => FieldElement::Prime(0),
            CoeffField::Cyclotomic { .. } => FieldElement::Cyclotomic(Vec::new()),
        }
    }

    pub fn one(&self) -> FieldElement {
        self.embed_integer(1)
    }

    pub fn embed_integer(&self, m: i64) -> FieldElement {
        self.embed_bigint(&BigInt::from(m))
    }

    pub fn embed_bigint(&self, m: &BigInt) -> FieldElement {
        match self {
            CoeffField::Prime { p } => {
                FieldElement::Prime(m.mod_floor(&BigInt::from(*p)).to_u64().unwrap())
            }
            CoeffField::Cyclotomic { .. } => {
                FieldElement::Cyclotomic(trim(vec![BigRational::from_integer(m.clone())]))
            }
        }
    }

    pub fn embed_rational(&self, q: &BigRational) -> Result<FieldElement> {
        let num = self.embed_bigint(q.numer());
        let den = self.embed_bigint(q.denom());
        self.div(&num, &den)
    }

    pub fn is_zero(&self, a: &FieldElement) -> bool {
        match a {
            FieldElement::Prime(x) => *x == 0,
            FieldElement::Cyclotomic(c) => c.is_empty(),
        }
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        match (self, a, b) {
            (CoeffField::Prime { p }, FieldElement::Prime(x), FieldElement::Prime(y)) => {
                FieldElement::Prime((x + y) % p)
            }
            (CoeffField::Cyclotomic { .. }, FieldElement::Cyclotomic(x), FieldElement::Cyclotomic(y)) => {
                FieldElement::Cyclotomic(poly_add(x, y))
            }
            _ => panic!("field element does not belong to {self}"),
        }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        match (self, a) {
            (CoeffField::Prime { p }, FieldElement::Prime(x)) => FieldElement::Prime((p - x) % p),
            (CoeffField::Cyclotomic { .. }, FieldElement::Cyclotomic(x)) => {
                FieldElement::Cyclotomic(x.iter().map(|c| -c).collect())
            }
            _ => panic!("field element does not belong to {self}"),
        }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        match (self, a, b) {
            (CoeffField::Prime { p }, FieldElement::Prime(x), FieldElement::Prime(y)) => {
                FieldElement::Prime(((*x as u128 * *y as u128) % *p as u128) as u64)
            }
            (CoeffField::Cyclotomic { modulus, .. }, FieldElement::Cyclotomic(x), FieldElement::Cyclotomic(y)) => {
                FieldElement::Cyclotomic(poly_rem(&poly_mul(x, y), modulus))
            }
            _ => panic!("field element does not belong to {self}"),
        }
    }

    pub fn invert(&self, a: &FieldElement) -> Result<FieldElement> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        match (self, a) {
            (CoeffField::Prime { p }, FieldElement::Prime(x)) => {
                Ok(FieldElement::Prime(pow_mod(*x, p - 2, *p)))
            }
            (CoeffField::Cyclotomic { modulus, .. }, FieldElement::Cyclotomic(x)) => {
                Ok(FieldElement::Cyclotomic(poly_inverse(x, modulus)))
            }
            _ => panic!("field element does not belong to {self}"),
        }
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, &self.invert(b)?))
    }

    /// `a^e` for any integer `e`; negative exponents need `a ≠ 0`.
    pub fn pow(&self, a: &FieldElement, e: i64) -> Result<FieldElement> {
        let mut base = if e < 0 { self.invert(a)? } else { a.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// 1/ℓ, failing when ℓ is the characteristic.
    pub fn inverse_of_prime(&self, ell: u64) -> Result<FieldElement> {
        self.invert(&self.embed_integer(ell as i64))
            .map_err(|_| Error::EllNotInvertible { ell })
    }

    /// A primitive `order`-th root of unity. In F_p the least such residue is
    /// returned; in Q(ζ_n) a power of ±ζ.
    pub fn make_root_of_unity(&self, order: u64) -> Result<FieldElement> {
        if order == 0 {
            return Err(Error::NoSuchRoot { field: self.to_string(), order });
        }
        match self {
            CoeffField::Prime { p } => {
                if (p - 1) % order != 0 {
                    return Err(Error::NoSuchRoot { field: self.to_string(), order });
                }
                let prime_divisors: Vec<u64> = factor_u64(order).into_iter().map(|(q, _)| q).collect();
                (1..*p)
                    .find(|&g| {
                        pow_mod(g, order, *p) == 1
                            && prime_divisors.iter().all(|q| pow_mod(g, order / q, *p) != 1)
                    })
                    .map(FieldElement::Prime)
                    .ok_or(Error::NoSuchRoot { field: self.to_string(), order })
            }
            CoeffField::Cyclotomic { n, .. } => {
                let zeta = self.generator();
                // Roots of unity in Q(ζ_n), n odd, form the cyclic group ⟨-ζ⟩ of order 2n.
                let full = 2 * n;
                if full % order != 0 {
                    return Err(Error::NoSuchRoot { field: self.to_string(), order });
                }
                if n % order == 0 {
                    return self.pow(&zeta, (n / order) as i64);
                }
                let minus_zeta = self.neg(&zeta);
                self.pow(&minus_zeta, (full / order) as i64)
            }
        }
    }

    /// ζ_n itself in cyclotomic mode; the least primitive (p-1)-th root in F_p.
    pub fn generator(&self) -> FieldElement {
        match self {
            CoeffField::Prime { p } => self.make_root_of_unity(p - 1).unwrap(),
            CoeffField::Cyclotomic { modulus, .. } => {
                let x = vec![BigRational::zero(), BigRational::one()];
                FieldElement::Cyclotomic(poly_rem(&x, modulus))
            }
        }
    }

    /// Canonical text form: a residue, or a polynomial in `z`.
    pub fn format(&self, a: &FieldElement) -> String {
        match a {
            FieldElement::Prime(x) => x.to_string(),
            FieldElement::Cyclotomic(c) => format_poly(c),
        }
    }

    /// Sample a uniformly random element (F_p) or a small random polynomial.
    pub fn random<R: rand::Rng>(&self, rng: &mut R) -> FieldElement {
        match self {
            CoeffField::Prime { p } => FieldElement::Prime(rng.gen_range(0..*p)),
            CoeffField::Cyclotomic { modulus, .. } => {
                let coeffs = (0..self.degree())
                    .map(|_| BigRational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=5).into()))
                    .collect();
                FieldElement::Cyclotomic(poly_rem(&trim(coeffs), modulus))
            }
        }
    }
}

/// Integer coefficients of the n-th cyclotomic polynomial, low degree first.
pub fn cyclotomic_polynomial(n: u64) -> Vec<BigInt> {
    // Φ_n = (x^n - 1) / Π_{d | n, d < n} Φ_d
    let mut num: Vec<BigInt> = vec![BigInt::zero(); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::one();
    for d in (1..n).filter(|d| n % d == 0) {
        num = int_poly_exact_div(&num, &cyclotomic_polynomial(d));
    }
    num
}

fn int_poly_exact_div(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    debug_assert!(den[dd].is_one());
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd].clone();
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= &c * dj;
        }
        quot[i] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero));
    quot
}

fn trim(mut c: Vec<BigRational>) -> Vec<BigRational> {
    while c.last().is_some_and(Zero::is_zero) {
        c.pop();
    }
    c
}

fn poly_add(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let zero = BigRational::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&zero) + b.get(i).unwrap_or(&zero)).collect())
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_divrem(a: &[BigRational], m: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut rem = trim(a.to_vec());
    let m = trim(m.to_vec());
    let dm = m.len() - 1;
    if rem.len() <= dm {
        return (Vec::new(), rem);
    }
    let lead = m[dm].clone();
    let mut quot = vec![BigRational::zero(); rem.len() - dm];
    while rem.len() > dm {
        let shift = rem.len() - 1 - dm;
        let c = rem.last().unwrap() / &lead;
        for (j, mj) in m.iter().enumerate() {
            rem[shift + j] -= &c * mj;
        }
        quot[shift] = c;
        rem = trim(rem);
    }
    (trim(quot), rem)
}

fn poly_rem(a: &[BigRational], m: &[BigRational]) -> Vec<BigRational> {
    poly_divrem(a, m).1
}

/// Inverse of `a` modulo the irreducible `m` via the extended Euclidean algorithm.
fn poly_inverse(a: &[BigRational], m: &[BigRational]) -> Vec<BigRational> {
    let (mut r0, mut r1) = (m.to_vec(), trim(a.to_vec()));
    let (mut s0, mut s1): (Vec<BigRational>, Vec<BigRational>) = (Vec::new(), vec![BigRational::one()]);
    while r1.len() > 1 {
        let (q, r) = poly_divrem(&r0, &r1);
        let s = poly_add(&s0, &poly_mul(&q, &s1).iter().map(|c| -c).collect::<Vec<_>>());
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    // r1 is a nonzero constant because m is irreducible and a ≢ 0.
    let c = r1[0].clone();
    poly_rem(&s1.iter().map(|x| x / &c).collect::<Vec<_>>(), m)
}

fn format_poly(c: &[BigRational]) -> String {
    if c.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, coef) in c.iter().enumerate() {
        if coef.is_zero() {
            continue;
        }
        let negative = coef.is_negative();
        let mag = coef.abs();
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let mono = match i {
            0 => String::new(),
            1 => "z".to_string(),
            _ => format!("z^{i}"),
        };
        if i == 0 || !mag.is_one() {
            out.push_str(&mag.to_string());
            if i > 0 {
                out.push('*');
            }
        }
        out.push_str(&mono);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_reject() {
        assert_eq!("Fp:7".parse::<CoeffField>().unwrap(), CoeffField::Prime { p: 7 });
        assert!("Fp:2".parse::<CoeffField>().is_err());
        assert!("Fp:9".parse::<CoeffField>().is_err());
        assert!("cyclotomic:4".parse::<CoeffField>().is_err());
        assert!("cyclotomic:3".parse::<CoeffField>().is_ok());
    }

    #[test]
    fn roots_of_unity() {
        let f7 = CoeffField::prime(7).unwrap();
        assert_eq!(f7.make_root_of_unity(3).unwrap(), FieldElement::Prime(2));
        assert_eq!(f7.make_root_of_unity(1).unwrap(), FieldElement::Prime(1));
        assert!(CoeffField::prime(5).unwrap().make_root_of_unity(3).is_err());
        let c3 = CoeffField::cyclotomic(3).unwrap();
        assert_eq!(c3.make_root_of_unity(3).unwrap(), c3.generator());
    }

    #[test]
    fn inverses() {
        let f7 = CoeffField::prime(7).unwrap();
        assert_eq!(f7.invert(&FieldElement::Prime(3)).unwrap(), FieldElement::Prime(5));
        assert_eq!(f7.invert(&f7.one()).unwrap(), f7.one());
        assert_eq!(f7.invert(&f7.zero()), Err(Error::DivisionByZero));
        let c3 = CoeffField::cyclotomic(3).unwrap();
        let z = c3.generator();
        let z2 = c3.mul(&z, &z);
        assert_eq!(c3.invert(&z).unwrap(), z2);
        assert_eq!(c3.format(&z2), "-1 - z");
    }

    #[test]
    fn embedding() {
        let f7 = CoeffField::prime(7).unwrap();
        assert_eq!(f7.embed_integer(10), FieldElement::Prime(3));
        assert_eq!(f7.embed_integer(-1), f7.neg(&f7.one()));
        let c3 = CoeffField::cyclotomic(3).unwrap();
        assert_eq!(c3.format(&c3.embed_integer(5)), "5");
        assert_eq!(c3.format(&c3.inverse_of_prime(7).unwrap()), "1/7");
        assert_eq!(f7.inverse_of_prime(7), Err(Error::EllNotInvertible { ell: 7 }));
    }

    #[test]
    fn cyclotomic_polynomials() {
        let as_i64 = |n| cyclotomic_polynomial(n).iter().map(|c| c.to_i64().unwrap()).collect::<Vec<_>>();
        assert_eq!(as_i64(1), vec![-1, 1]);
        assert_eq!(as_i64(3), vec![1, 1, 1]);
        assert_eq!(as_i64(9), vec![1, 0, 0, 1, 0, 0, 1]);
        assert_eq!(as_i64(15), vec![1, -1, 0, 1, -1, 1, 0, -1, 1]);
    }
}
