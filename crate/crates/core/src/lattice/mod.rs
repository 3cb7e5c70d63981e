//! Rank-2 Z-lattices in K in canonical Hermite normal form, together with the
//! S-structure (K_S, K_{S,q}, q*, stabilizer exponents) and homothety search.

mod context;
pub(crate) mod search;
mod witness;

pub use context::{ContextS, StabilizerExponent};
pub use search::elements_of_norm;
pub use witness::{homothety_witness, Witness};

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::quadfield::{KElement, PrimeIdeal, QuadraticField};

/// The lattice spanned by (aω + b)/den and c/den, with a, c > 0, 0 ≤ b < c and
/// gcd(den, a, b, c) = 1. Equal lattices have equal fields.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lattice {
    den: BigInt,
    a: BigInt,
    b: BigInt,
    c: BigInt,
}

impl Lattice {
    /// The ring of integers O = ⟨ω, 1⟩.
    pub fn unit() -> Self {
        Lattice { den: BigInt::one(), a: BigInt::one(), b: BigInt::zero(), c: BigInt::one() }
    }

    /// From integer HNF data; panics if the triple is not in normal form.
    pub fn from_hnf(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>) -> Self {
        let gens = [(a.into(), b.into()), (BigInt::zero(), c.into())];
        Lattice::from_integer_generators(&gens, vec![], BigInt::one()).expect("nondegenerate HNF")
    }

    pub fn prime_ideal(qf: &QuadraticField, p: &PrimeIdeal) -> Self {
        let (a, b, c) = qf.prime_hnf(p);
        Lattice::from_integer_generators(
            &[(BigInt::from(a), BigInt::from(b)), (BigInt::zero(), BigInt::from(c))],
            vec![],
            BigInt::one(),
        )
        .expect("prime ideals are nondegenerate")
    }

    /// The lattice generated by integer vectors (ω-coordinate, 1-coordinate)
    /// from both lists, divided by `den`.
    pub fn from_integer_generators(
        gens: &[(BigInt, BigInt)],
        more: Vec<(BigInt, BigInt)>,
        den: BigInt,
    ) -> Result<Self> {
        // Column-style HNF: fold every generator into a pivot with nonzero
        // ω-coordinate; what remains lies on the 1-axis and generates cZ.
        let mut pivot: Option<(BigInt, BigInt)> = None;
        let mut c = BigInt::zero();
        for (x, y) in gens.iter().cloned().chain(more) {
            if x.is_zero() {
                c = c.gcd(&y);
                continue;
            }
            match pivot.take() {
                None => pivot = Some((x, y)),
                Some((px, py)) => {
                    let eg = px.extended_gcd(&x);
                    let g = eg.gcd;
                    let ny = &eg.x * &py + &eg.y * &y;
                    // (x/g)·pivot − (px/g)·(x, y) has zero ω-coordinate.
                    let rest = (&x / &g) * &py - (&px / &g) * &y;
                    c = c.gcd(&rest);
                    pivot = Some((g, ny));
                }
            }
        }
        let (mut a, mut b) = pivot.ok_or(Error::DegenerateLattice)?;
        if c.is_zero() {
            return Err(Error::DegenerateLattice);
        }
        if a.is_negative() {
            a = -a;
            b = -b;
        }
        let b = b.mod_floor(&c);
        let mut den = den;
        if den.is_negative() {
            den = -den;
        }
        let g = den.gcd(&a).gcd(&b).gcd(&c);
        Ok(Lattice { den: &den / &g, a: a / &g, b: b / &g, c: c / &g })
    }

    /// The Z-span of the given elements.
    pub fn from_elements(elems: &[KElement]) -> Result<Self> {
        let den = elems.iter().fold(BigInt::one(), |acc, e| acc.lcm(&e.denominator()));
        let dq = BigRational::from_integer(den.clone());
        let gens: Vec<(BigInt, BigInt)> = elems
            .iter()
            .map(|e| ((&e.v * &dq).to_integer(), (&e.u * &dq).to_integer()))
            .collect();
        Lattice::from_integer_generators(&gens, vec![], den)
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    /// Integer HNF entries (a, b, c) of den·L.
    pub fn hnf(&self) -> (&BigInt, &BigInt, &BigInt) {
        (&self.a, &self.b, &self.c)
    }

    /// The basis ((aω + b)/den, c/den).
    pub fn basis(&self) -> [KElement; 2] {
        let d = BigRational::from_integer(self.den.clone());
        [
            KElement::new(BigRational::from_integer(self.b.clone()) / &d, BigRational::from_integer(self.a.clone()) / &d),
            KElement::new(BigRational::from_integer(self.c.clone()) / &d, BigRational::zero()),
        ]
    }

    /// Covolume relative to O; equals [O : L] when L ⊆ O.
    pub fn index(&self) -> BigRational {
        BigRational::new(&self.a * &self.c, &self.den * &self.den)
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    /// Write L = r·P with P ⊆ O integral and primitive (not inside kO for k > 1).
    pub fn primitive_part(&self) -> (BigRational, Lattice) {
        let g = self.a.gcd(&self.b).gcd(&self.c);
        let p = Lattice { den: BigInt::one(), a: &self.a / &g, b: &self.b / &g, c: &self.c / &g };
        (BigRational::new(g, self.den.clone()), p)
    }

    /// {x·y : y ∈ L}.
    pub fn scale(&self, qf: &QuadraticField, x: &KElement) -> Result<Lattice> {
        if x.is_zero() {
            return Err(Error::ZeroElement);
        }
        let [e1, e2] = self.basis();
        Lattice::from_elements(&[qf.mul(x, &e1), qf.mul(x, &e2)])
    }

    pub fn scale_rational(&self, r: &BigRational) -> Result<Lattice> {
        if r.is_zero() {
            return Err(Error::ZeroElement);
        }
        let num = r.numer().abs();
        let gens = [(&self.a * &num, &self.b * &num), (BigInt::zero(), &self.c * &num)];
        Lattice::from_integer_generators(&gens, vec![], &self.den * r.denom())
    }

    pub fn contains(&self, x: &KElement) -> bool {
        // x = s·e1 + t·e2 with s = den·v/a and t = (den·u − s·b)/c
        let d = BigRational::from_integer(self.den.clone());
        let xv = &x.v * &d;
        let xu = &x.u * &d;
        if !xv.is_integer() || !xu.is_integer() {
            return false;
        }
        let (xv, xu) = (xv.to_integer(), xu.to_integer());
        if !xv.is_multiple_of(&self.a) {
            return false;
        }
        let s = &xv / &self.a;
        (xu - s * &self.b).is_multiple_of(&self.c)
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis().iter().all(|e| self.contains(e))
    }

    /// True when L is closed under multiplication by ω, i.e. a fractional ideal.
    pub fn is_idealistic(&self, qf: &QuadraticField) -> bool {
        let w = KElement::omega();
        self.basis().iter().all(|e| self.contains(&qf.mul(&w, e)))
    }

    /// The ℓ+1 sublattices of index ℓ: ⟨ℓe₁, e₂⟩ and ⟨e₁ + k·e₂, ℓe₂⟩ for
    /// k = 0..ℓ−1, i.e. diag(ℓ, 1) and [[1, k], [0, ℓ]] acting on the basis rows.
    pub fn sublattices_index_ell(&self, ell: u64) -> Vec<Lattice> {
        let l = BigInt::from(ell);
        let (a, b, c) = (&self.a, &self.b, &self.c);
        let mut out = Vec::with_capacity(ell as usize + 1);
        let first = [(a * &l, b * &l), (BigInt::zero(), c.clone())];
        out.push(Lattice::from_integer_generators(&first, vec![], self.den.clone()).unwrap());
        for k in 0..ell {
            let k = BigInt::from(k);
            let gens = [(a.clone(), b + c * &k), (BigInt::zero(), c * &l)];
            out.push(Lattice::from_integer_generators(&gens, vec![], self.den.clone()).unwrap());
        }
        out
    }

    /// The lattice generated by L1 and L2.
    pub fn sum(&self, other: &Lattice) -> Lattice {
        let den = self.den.lcm(&other.den);
        let scaled = |l: &Lattice| {
            let f = &den / &l.den;
            [(&l.a * &f, &l.b * &f), (BigInt::zero(), &l.c * &f)]
        };
        Lattice::from_integer_generators(&scaled(self), scaled(other).to_vec(), den).unwrap()
    }

    /// Dual lattice in coordinates (ω-coordinate, 1-coordinate) under the dot product.
    pub fn dual(&self) -> Lattice {
        // Basis matrix B = (1/den)[[a, 0], [b, c]] (columns are basis vectors);
        // the dual basis is the columns of (B⁻¹)ᵀ = den/(ac)·[[c, −b], [0, a]].
        let det = &self.a * &self.c;
        let gens = [
            (&self.c * &self.den, BigInt::zero()),
            (-(&self.b * &self.den), &self.a * &self.den),
        ];
        Lattice::from_integer_generators(&gens, vec![], det).unwrap()
    }

    pub fn intersection(&self, other: &Lattice) -> Lattice {
        self.dual().sum(&other.dual()).dual()
    }

    /// (self : other) = {x ∈ K : x·other ⊆ self}.
    pub fn colon(&self, qf: &QuadraticField, other: &Lattice) -> Result<Lattice> {
        let [e1, e2] = other.basis();
        let l1 = self.scale(qf, &qf.inverse(&e1)?)?;
        let l2 = self.scale(qf, &qf.inverse(&e2)?)?;
        Ok(l1.intersection(&l2))
    }

    /// Ideal product of two fractional ideals (or the Z-span of pairwise products).
    pub fn product(&self, qf: &QuadraticField, other: &Lattice) -> Lattice {
        let [a1, a2] = self.basis();
        let [b1, b2] = other.basis();
        Lattice::from_elements(&[qf.mul(&a1, &b1), qf.mul(&a1, &b2), qf.mul(&a2, &b1), qf.mul(&a2, &b2)])
            .expect("product of nondegenerate lattices")
    }

    pub fn conjugate(&self, qf: &QuadraticField) -> Lattice {
        let [e1, e2] = self.basis();
        Lattice::from_elements(&[qf.conjugate(&e1), qf.conjugate(&e2)]).expect("conjugate is nondegenerate")
    }
}

impl fmt::Display for Lattice {
    /// Literal syntax `[[a,b],[c,d]]`: columns are basis vectors in (ω, 1) coordinates.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = |x: &BigInt| BigRational::new(x.clone(), self.den.clone());
        write!(f, "[[{},{}],[0,{}]]", q(&self.a), q(&self.b), q(&self.c))
    }
}

impl FromStr for Lattice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::LatticeSyntax(s.to_string());
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = cleaned.strip_prefix("[[").and_then(|r| r.strip_suffix("]]")).ok_or_else(bad)?;
        let (c1, c2) = inner.split_once("],[").ok_or_else(bad)?;
        let parse_col = |col: &str| -> Result<KElement> {
            let (w, one) = col.split_once(',').ok_or_else(bad)?;
            let w: BigRational = w.parse().map_err(|_| bad())?;
            let one: BigRational = one.parse().map_err(|_| bad())?;
            Ok(KElement::new(one, w))
        };
        let basis = [parse_col(c1)?, parse_col(c2)?];
        Lattice::from_elements(&basis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(a: i64, b: i64, c: i64) -> Lattice {
        Lattice::from_integer_generators(
            &[(BigInt::from(a), BigInt::from(b)), (BigInt::zero(), BigInt::from(c))],
            vec![],
            BigInt::one(),
        )
        .unwrap()
    }

    #[test]
    fn sublattices_of_o_at_two() {
        let subs = Lattice::unit().sublattices_index_ell(2);
        assert_eq!(subs.len(), 3);
        let expected = [l(2, 0, 1), l(1, 0, 2), l(1, 1, 2)];
        for e in &expected {
            assert!(subs.contains(e), "missing {e}");
        }
        for s in &subs {
            assert_eq!(s.index(), BigRational::from_integer(2.into()));
        }
    }

    #[test]
    fn literal_roundtrip() {
        let lat: Lattice = "[[3,1],[0,5]]".parse().unwrap();
        assert_eq!(lat, l(3, 1, 5));
        assert_eq!(lat.to_string().parse::<Lattice>().unwrap(), lat);
        let half: Lattice = "[[1/2,0],[0,1]]".parse().unwrap();
        assert_eq!(half.index(), BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn scale_and_membership() {
        let qf = QuadraticField::new(229).unwrap();
        let o = Lattice::unit();
        assert_eq!(o.scale(&qf, &qf.unit).unwrap(), o);
        assert_eq!(o.scale(&qf, &KElement::integer(3)).unwrap().index(), BigRational::from_integer(9.into()));
        assert!(o.is_idealistic(&qf));
        let thin = l(13, 0, 1); // ⟨13ω, 1⟩
        assert!(!thin.is_idealistic(&qf));
        assert!(o.contains_lattice(&thin));
        assert!(!thin.contains(&KElement::omega()));
    }

    #[test]
    fn intersection_and_colon() {
        let qf = QuadraticField::new(229).unwrap();
        let a = l(2, 0, 1);
        let b = l(1, 0, 3);
        let i = a.intersection(&b);
        assert_eq!(i, l(2, 0, 3));
        let o = Lattice::unit();
        // (O : λ) = λ⁻¹ ⊇ O
        let lam = Lattice::prime_ideal(&qf, &PrimeIdeal::new(3, crate::quadfield::PrimeKind::SplitFirst));
        let inv = o.colon(&qf, &lam).unwrap();
        assert!(inv.contains_lattice(&o));
        assert_eq!(inv.index(), BigRational::new(1.into(), 3.into()));
    }
}
