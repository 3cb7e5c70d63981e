//! The global lattice function Φ, its pairing with homology generators, and
//! the action of T_ℓ and T_{ℓ,ℓ} on it.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::factor;
use crate::classchar::{sample_rational, IdealCharacter};
use crate::coeff::{CoeffField, FieldElement};
use crate::error::{Error, Result};
use crate::lattice::{homothety_witness, ContextS, Lattice};
use crate::localtree::{local_vertex_inert, local_vertex_split, psi_inert, psi_split};
use crate::quadfield::Splitting;

/// Φ(L) = m′_L · Π_{w ∤ pdN} ψ_w(L_w), the product running over the finitely
/// many w where L_w ≠ O_w.
#[derive(Clone, Debug)]
pub struct PhiEvaluator {
    pub ctx: ContextS,
    pub field: CoeffField,
    pub chi: IdealCharacter,
}

impl PhiEvaluator {
    pub fn new(ctx: ContextS, field: CoeffField, chi: IdealCharacter) -> Result<Self> {
        if field.p_param() != ctx.p {
            return Err(Error::InvalidContext(format!(
                "context built for p = {} but the coefficient field has p = {}",
                ctx.p,
                field.p_param()
            )));
        }
        Ok(PhiEvaluator { ctx, field, chi })
    }

    /// Primes w ∤ pdN at which L_w may differ from O_w.
    pub fn support(&self, lattice: &Lattice) -> Result<Vec<u64>> {
        let (a, _, c) = lattice.hnf();
        let data = lattice.den() * a * c;
        Ok(factor(&data)?.into_iter().map(|(w, _)| w).filter(|w| self.ctx.pdn % w != 0).collect())
    }

    /// ψ_w(L_w) for w ∤ pdN.
    pub fn local_psi(&self, lattice: &Lattice, w: u64) -> Result<FieldElement> {
        let qf = &self.ctx.qf;
        match qf.splitting_type(w) {
            Splitting::Split => psi_split(&self.field, &self.chi, w, &local_vertex_split(qf, w, lattice)?),
            Splitting::Inert => psi_inert(&self.field, w, &local_vertex_inert(qf, w, lattice)?),
            Splitting::Ramified => Err(Error::RamifiedPrime(w)),
        }
    }

    /// Distance of L_ℓ from O_ℓ in T_ℓ.
    pub fn local_tier(&self, lattice: &Lattice, ell: u64) -> Result<u64> {
        let qf = &self.ctx.qf;
        match qf.splitting_type(ell) {
            Splitting::Split => Ok(local_vertex_split(qf, ell, lattice)?.tier()),
            Splitting::Inert => Ok(local_vertex_inert(qf, ell, lattice)?.tier() as u64),
            Splitting::Ramified => Err(Error::RamifiedPrime(ell)),
        }
    }

    /// Π_{w ∤ pdN, w ≠ skip} ψ_w(L_w).
    fn local_product(&self, lattice: &Lattice, skip: Option<u64>) -> Result<FieldElement> {
        let mut acc = self.field.one();
        for w in self.support(lattice)? {
            if Some(w) == skip {
                continue;
            }
            acc = self.field.mul(&acc, &self.local_psi(lattice, w)?);
            if self.field.is_zero(&acc) {
                break;
            }
        }
        Ok(acc)
    }

    pub fn phi(&self, lattice: &Lattice) -> Result<FieldElement> {
        let prod = self.local_product(lattice, None)?;
        if self.field.is_zero(&prod) {
            return Ok(prod);
        }
        let mp = self.ctx.m_prime(lattice)?;
        Ok(self.field.mul(&self.field.embed_integer(mp as i64), &prod))
    }

    /// ⟨Φ, z_L⟩ for the homology generator attached to L.
    pub fn pairing(&self, lattice: &Lattice) -> Result<FieldElement> {
        self.phi(lattice)
    }

    fn require_usable(&self, ell: u64) -> Result<()> {
        crate::quadfield::require_prime(ell)?;
        let ch = self.field.characteristic();
        if self.ctx.pdn % ell == 0 || (ch != 0 && ell == ch) {
            return Err(Error::UnusablePrime { ell, pdn: self.ctx.pdn });
        }
        Ok(())
    }

    /// T_{ℓ,ℓ} acts through the central character: check Φ(ℓL) = θ(ℓ)Φ(L)
    /// and return θ(ℓ).
    pub fn hecke_tll(&self, lattice: &Lattice, ell: u64) -> Result<i8> {
        self.require_usable(ell)?;
        let theta = self.ctx.qf.theta_prime(ell);
        let scaled = lattice.scale_rational(&BigRational::from_integer(BigInt::from(ell)))?;
        let lhs = self.phi(&scaled)?;
        let rhs = self.field.mul(&self.field.embed_integer(theta as i64), &self.phi(lattice)?);
        if lhs != rhs {
            return Err(Error::Decomposition {
                ell,
                lattice: lattice.to_string(),
                reason: "Phi(l L) differs from theta(l) Phi(L)".into(),
            });
        }
        Ok(theta)
    }

    /// Decompose T_ℓ at L0 into classes of index-ℓ sublattices and evaluate
    /// ⟨ΦT_ℓ, z_{L0}⟩ along two routes.
    pub fn hecke_decompose(&self, l0: &Lattice, ell: u64) -> Result<HeckeReport> {
        self.require_usable(ell)?;
        let ctx = &self.ctx;
        let qf = &ctx.qf;
        let f = &self.field;
        let fail = |reason: String| Error::Decomposition { ell, lattice: l0.to_string(), reason };

        let subs = l0.sublattices_index_ell(ell);
        let position: HashMap<&Lattice, usize> = subs.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let st0 = ctx.m_of(l0)?;
        let m0 = st0.m;
        let delta = ctx.stabilizer_generator(st0);

        // Orbits of the stabilizer generator of L0 on its sublattices.
        let mut orbit_of = vec![usize::MAX; subs.len()];
        let mut orbits: Vec<Orbit> = Vec::new();
        for start in 0..subs.len() {
            if orbit_of[start] != usize::MAX {
                continue;
            }
            let id = orbits.len();
            let mut members = vec![start];
            orbit_of[start] = id;
            let mut cur = subs[start].scale(qf, &delta)?;
            loop {
                let &j = position.get(&cur).ok_or_else(|| fail("stabilizer moved a sublattice outside L0".into()))?;
                if j == start {
                    break;
                }
                orbit_of[j] = id;
                members.push(j);
                cur = cur.scale(qf, &delta)?;
            }
            let m = ctx.m_of(&subs[start])?.m;
            let lcm = m0.lcm(&m);
            let d = lcm / m0;
            if members.len() as u64 != d {
                return Err(fail(format!("orbit of size {} where lcm(m0, m)/m0 = {d}", members.len())));
            }
            let phi = self.phi(&subs[start])?;
            let conductor = conductor(ctx, &subs[start])?;
            orbits.push(Orbit { members, m, d, e: lcm / m, phi, conductor });
        }

        // Merge orbits lying in one Z·K_{S,q}-homothety class.
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for (o, orbit) in orbits.iter().enumerate() {
            let mut joined = false;
            if !f.is_zero(&orbit.phi) {
                for class in classes.iter_mut() {
                    let rep = &orbits[class[0]];
                    let same_invariants = rep.m == orbit.m
                        && rep.conductor == orbit.conductor
                        && (rep.phi == orbit.phi || rep.phi == f.neg(&orbit.phi));
                    if !same_invariants {
                        continue;
                    }
                    let (a, b) = (&subs[rep.members[0]], &subs[orbit.members[0]]);
                    if let Some(w) = homothety_witness(ctx, a, b)? {
                        let expect = f.mul(&f.embed_integer(ctx.theta(&w.r)? as i64), &rep.phi);
                        if expect != orbit.phi {
                            return Err(fail(format!("witness r = {} contradicts the homogeneity of Phi", w.r)));
                        }
                        class.push(o);
                        joined = true;
                        break;
                    }
                }
            }
            if !joined {
                classes.push(vec![o]);
            }
        }

        let tier0 = self.local_tier(l0, ell)?;
        let mut inner = None;
        if tier0 > 0 {
            for (i, s) in subs.iter().enumerate() {
                if self.local_tier(s, ell)? < tier0 {
                    inner = Some(i);
                }
            }
        }

        let mut summands = Vec::with_capacity(classes.len());
        let mut lhs = f.zero();
        for class in &classes {
            let first = &orbits[class[0]];
            let member = &subs[first.members[0]];
            let (content, prim) = member.primitive_part();
            let r = strip_pdn(&content, ctx.pdn);
            let phi = self.phi(&prim)?;
            let theta = ctx.theta(&r)?;
            let n: u64 = class.iter().map(|&o| orbits[o].members.len() as u64).sum();
            let weight = (n / first.d) * first.e;
            let term = f.mul(&f.embed_integer(weight as i64 * theta as i64), &phi);
            lhs = f.add(&lhs, &term);
            let downhill_inner = inner.is_some_and(|i| class.iter().any(|&o| orbit_of[i] == o));
            summands.push(OrbitClassSummand {
                lattice: prim,
                r,
                n,
                m: first.m,
                d: first.d,
                e: first.e,
                phi,
                orbits: class.len(),
                idealistic: member.is_idealistic(qf),
                downhill_inner,
            });
        }

        let rhs = f.mul(&self.chi.mu(qf, ell)?, &self.phi(l0)?);
        let mut lap = f.zero();
        for s in &subs {
            lap = f.add(&lap, &self.local_psi(s, ell)?);
        }
        let mp0 = ctx.m_prime(l0)?;
        let lhs_laplacian = f.mul(
            &f.mul(&f.embed_integer(mp0 as i64), &lap),
            &self.local_product(l0, Some(ell))?,
        );
        Ok(HeckeReport { ell, lattice: l0.clone(), m0, summands, lhs, rhs, lhs_laplacian })
    }

    /// Sample Φ(αL) = Φ(L) for α ∈ K_{S,q} and Φ(rL) = θ(r)Φ(L) for rationals
    /// prime to pdN, on integral L of index ≤ `index_bound` prime to pdN.
    pub fn invariance_suite<R: Rng>(&self, samples: usize, index_bound: u64, rng: &mut R) -> Result<InvarianceReport> {
        let ctx = &self.ctx;
        let f = &self.field;
        let mut failures = Vec::new();
        let mut nonzero = 0;
        for _ in 0..samples {
            let lattice = if rng.gen_bool(0.5) {
                random_lattice(ctx, index_bound, rng)
            } else {
                structured_lattice(ctx, index_bound, rng)?
            };
            let alpha = ctx.sample_ksq(rng)?;
            if !ctx.in_ksq(&alpha)? {
                failures.push(format!("sampled alpha = {alpha} is not in K_S,q"));
                continue;
            }
            let base = self.phi(&lattice)?;
            if !f.is_zero(&base) {
                nonzero += 1;
            }
            let moved = self.phi(&lattice.scale(&ctx.qf, &alpha)?)?;
            if moved != base {
                failures.push(format!("Phi(alpha L) != Phi(L) for alpha = {alpha}, L = {lattice}"));
            }
            let r = sample_rational(ctx, rng);
            let scaled = self.phi(&lattice.scale_rational(&r)?)?;
            let expect = f.mul(&f.embed_integer(ctx.theta(&r)? as i64), &base);
            if scaled != expect {
                failures.push(format!("Phi(r L) != theta(r) Phi(L) for r = {r}, L = {lattice}"));
            }
        }
        Ok(InvarianceReport { samples, nonzero_phi: nonzero, failures })
    }
}

struct Orbit {
    members: Vec<usize>,
    m: u64,
    d: u64,
    e: u64,
    phi: FieldElement,
    conductor: BigInt,
}

/// Conductor of the multiplier ring {x : xL ⊆ L}; a homothety invariant.
fn conductor(ctx: &ContextS, lattice: &Lattice) -> Result<BigInt> {
    let ring = lattice.colon(&ctx.qf, lattice)?;
    Ok(ring.index().to_integer())
}

/// The part of a positive rational prime to pdN.
fn strip_pdn(x: &BigRational, pdn: u64) -> BigRational {
    let strip = |n: &BigInt| {
        let mut n = n.abs();
        let p = BigInt::from(pdn);
        loop {
            let g = n.gcd(&p);
            if g.is_one() {
                return n;
            }
            n /= g;
        }
    };
    BigRational::new(strip(x.numer()), strip(x.denom()))
}

/// Integral HNF lattice of index ≤ bound, prime to pdN.
pub fn random_lattice<R: Rng>(ctx: &ContextS, index_bound: u64, rng: &mut R) -> Lattice {
    loop {
        let a = rng.gen_range(1..=index_bound);
        let c = rng.gen_range(1..=index_bound / a);
        if !ctx.is_coprime_to_pdn(&BigInt::from(a * c)) {
            continue;
        }
        let b = rng.gen_range(0..c);
        return Lattice::from_hnf(a, b, c);
    }
}

/// A lattice built to make Φ likely nonzero: a product of small prime ideals,
/// then up to one two-step walk away from it in T_w for a small prime w.
pub fn structured_lattice<R: Rng>(ctx: &ContextS, index_bound: u64, rng: &mut R) -> Result<Lattice> {
    let qf = &ctx.qf;
    let small: Vec<u64> = crate::arith::primes_up_to(23)
        .into_iter()
        .filter(|&w| ctx.pdn % w != 0)
        .collect();
    loop {
        let mut l = Lattice::unit();
        for _ in 0..rng.gen_range(0..=2) {
            let w = small[rng.gen_range(0..small.len())];
            let primes = qf.primes_above(w);
            let p = &primes[rng.gen_range(0..primes.len())];
            l = l.product(qf, &Lattice::prime_ideal(qf, p));
        }
        if rng.gen_bool(0.7) {
            let w = small[rng.gen_range(0..small.len().min(4))];
            for _ in 0..2 {
                let subs = l.sublattices_index_ell(w);
                l = subs[rng.gen_range(0..subs.len())].clone();
            }
        }
        let index = l.index().to_integer();
        if index <= BigInt::from(index_bound) && ctx.is_coprime_to_pdn(&index) {
            return Ok(l);
        }
    }
}

/// One class of index-ℓ sublattices of L0 in the decomposition of T_ℓ.
#[derive(Clone, Debug)]
pub struct OrbitClassSummand {
    /// Primitive representative L_j.
    pub lattice: Lattice,
    /// The rational with member = r·L_j up to pdN-units; q(ζ_j) = θ(r).
    pub r: BigRational,
    /// Number of sublattices in the class.
    pub n: u64,
    pub m: u64,
    pub d: u64,
    pub e: u64,
    pub phi: FieldElement,
    /// Number of stabilizer orbits merged into this class.
    pub orbits: usize,
    pub idealistic: bool,
    /// Contains the neighbor of L0 one step closer to O_ℓ.
    pub downhill_inner: bool,
}

#[derive(Clone, Debug)]
pub struct HeckeReport {
    pub ell: u64,
    pub lattice: Lattice,
    pub m0: u64,
    pub summands: Vec<OrbitClassSummand>,
    pub lhs: FieldElement,
    pub rhs: FieldElement,
    pub lhs_laplacian: FieldElement,
}

/// Outcome of the bookkeeping identities on one decomposition.
#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct IndexChecks {
    pub em_equals_dm0: bool,
    pub d_divides_n: bool,
    pub total_is_ell_plus_one: bool,
    pub idealistic_d_one: bool,
    pub downhill_inner_d_one: bool,
}

impl IndexChecks {
    pub fn all(&self) -> bool {
        self.em_equals_dm0 && self.d_divides_n && self.total_is_ell_plus_one && self.idealistic_d_one && self.downhill_inner_d_one
    }
}

impl HeckeReport {
    pub fn index_checks(&self) -> IndexChecks {
        let s = &self.summands;
        IndexChecks {
            em_equals_dm0: s.iter().all(|x| x.e * x.m == x.d * self.m0),
            d_divides_n: s.iter().all(|x| x.n % x.d == 0),
            total_is_ell_plus_one: s.iter().map(|x| x.n).sum::<u64>() == self.ell + 1,
            idealistic_d_one: s.iter().filter(|x| x.idealistic).all(|x| x.d == 1),
            downhill_inner_d_one: s.iter().filter(|x| x.downhill_inner).all(|x| x.d == 1),
        }
    }

    pub fn routes_agree(&self) -> bool {
        self.lhs == self.lhs_laplacian
    }

    pub fn pass(&self) -> bool {
        self.lhs == self.rhs && self.routes_agree() && self.index_checks().all()
    }

    pub fn to_json(&self, field: &CoeffField) -> Value {
        let summands: Vec<Value> = self
            .summands
            .iter()
            .map(|x| {
                json!({
                    "lattice": x.lattice.to_string(),
                    "m": x.m,
                    "d": x.d,
                    "e": x.e,
                    "n": x.n,
                    "r": x.r.to_string(),
                    "phi": field.format(&x.phi),
                    "orbits": x.orbits,
                    "idealistic": x.idealistic,
                    "downhill_inner": x.downhill_inner,
                })
            })
            .collect();
        json!({
            "ell": self.ell,
            "lattice": self.lattice.to_string(),
            "m0": self.m0,
            "summands": summands,
            "lhs": field.format(&self.lhs),
            "rhs": field.format(&self.rhs),
            "lhs_laplacian": field.format(&self.lhs_laplacian),
            "index_checks": self.index_checks(),
            "pass": self.pass(),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub samples: usize,
    /// Samples where Φ(L) ≠ 0, i.e. where the check has content.
    pub nonzero_phi: usize,
    pub failures: Vec<String>,
}

impl InvarianceReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classchar::ClassGroup;
    use crate::quadfield::{PrimeIdeal, PrimeKind, QuadraticField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn evaluator() -> PhiEvaluator {
        let qf = QuadraticField::new(229).unwrap();
        let f7 = CoeffField::prime(7).unwrap();
        let group = Arc::new(ClassGroup::compute(&qf).unwrap());
        let chi = IdealCharacter::from_class_group(group, 3, &f7).unwrap();
        let ctx = ContextS::new(qf, 7, 1, 7).unwrap();
        PhiEvaluator::new(ctx, f7, chi).unwrap()
    }

    #[test]
    fn phi_examples() {
        let ev = evaluator();
        let f = &ev.field;
        assert_eq!(ev.phi(&Lattice::unit()).unwrap(), f.one());
        let lam = PrimeIdeal::new(3, PrimeKind::SplitFirst);
        let l = Lattice::prime_ideal(&ev.ctx.qf, &lam);
        assert_eq!(ev.phi(&l).unwrap(), ev.chi.eval_prime(&lam).unwrap());
        let two = Lattice::unit().scale_rational(&BigRational::from_integer(2.into())).unwrap();
        assert_eq!(ev.phi(&two).unwrap(), f.neg(&f.one()));
        assert_eq!(ev.pairing(&two).unwrap(), ev.phi(&two).unwrap());
    }

    #[test]
    fn decomposition_at_the_base_lattice() {
        let ev = evaluator();
        let o = Lattice::unit();
        for ell in [2u64, 3, 5, 11, 13] {
            let rep = ev.hecke_decompose(&o, ell).unwrap();
            assert!(rep.pass(), "l = {ell}: {:?}", rep.to_json(&ev.field));
            assert_eq!(rep.lhs, ev.chi.mu(&ev.ctx.qf, ell).unwrap());
        }
    }

    #[test]
    fn decomposition_at_non_idealistic_lattices() {
        let ev = evaluator();
        for l0 in [Lattice::from_hnf(2, 1, 3), Lattice::from_hnf(1, 0, 4), Lattice::from_hnf(5, 2, 3)] {
            for ell in [2u64, 3, 5] {
                let rep = ev.hecke_decompose(&l0, ell).unwrap();
                assert!(rep.pass(), "{l0} at {ell}: {}", rep.to_json(&ev.field));
            }
        }
    }

    #[test]
    fn tll_is_theta() {
        let ev = evaluator();
        let l = Lattice::from_hnf(2, 1, 3);
        assert_eq!(ev.hecke_tll(&l, 3).unwrap(), 1);
        assert_eq!(ev.hecke_tll(&l, 2).unwrap(), -1);
        assert!(ev.hecke_tll(&l, 7).is_err());
    }

    #[test]
    fn small_invariance_run() {
        let ev = evaluator();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rep = ev.invariance_suite(20, 200, &mut rng).unwrap();
        assert!(rep.pass(), "{:?}", rep.failures);
    }
}
