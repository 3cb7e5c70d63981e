//! Enumeration of lattice elements of a given norm inside one unit period.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::Lattice;
use crate::quadfield::{KElement, QuadraticField};

const SLACK: f64 = 1e-6;

/// All γ ∈ L with |N(γ)| = ν and √ν ≤ |σ₁(γ)| ≤ ε₁√ν (up to float slack),
/// normalized to σ₁(γ) > 0. Every element of norm ±ν is a unit multiple of
/// one of these.
pub fn elements_of_norm(qf: &QuadraticField, lattice: &Lattice, nu: &BigRational) -> Vec<KElement> {
    if !nu.is_positive() {
        return Vec::new();
    }
    let root = nu.to_f64().unwrap_or(f64::INFINITY).sqrt();
    let (eps1, _) = qf.embeddings(&qf.unit);
    let bound1 = eps1 * root;
    let bound2 = root;
    let basis = lattice.basis();
    // Scaled embedding coordinates: the search box becomes [-1, 1]².
    let coords: Vec<[f64; 2]> = basis
        .iter()
        .map(|e| {
            let (s1, s2) = qf.embeddings(e);
            [s1 / bound1, s2 / bound2]
        })
        .collect();
    let (reduced, transform) = lagrange_reduce([coords[0], coords[1]]);
    let elems: Vec<KElement> = (0..2)
        .map(|i| {
            let a = BigRational::from_integer(BigInt::from(transform[i][0]));
            let b = BigRational::from_integer(BigInt::from(transform[i][1]));
            basis[0].scale(&a).add(&basis[1].scale(&b))
        })
        .collect();

    let [b1, b2] = reduced;
    let det = b1[0] * b2[1] - b1[1] * b2[0];
    let lim = 1.0 + SLACK;
    let x_max = ((b2[1].abs() + b2[0].abs()) / det.abs() * lim).floor() as i64 + 1;
    let in_box = |x: i64, y: &BigInt| {
        let y = y.to_f64().unwrap_or(f64::INFINITY);
        (0..2).all(|i| (x as f64 * b1[i] + y * b2[i]).abs() <= lim)
    };
    // N(x·e₁ + y·e₂) = A·x² + B·xy + C·y², scaled to integer coefficients.
    let (na, nc) = (qf.norm(&elems[0]), qf.norm(&elems[1]));
    let nb = qf.norm(&elems[0].add(&elems[1])) - &na - &nc;
    let scale = [&na, &nb, &nc, nu].iter().fold(BigInt::from(1), |l, q| num_integer::lcm(l, q.denom().clone()));
    let int = |q: &BigRational| (q * BigRational::from_integer(scale.clone())).to_integer();
    let (a, b, c, target) = (int(&na), int(&nb), int(&nc), int(nu));
    let mut out: Vec<KElement> = Vec::new();
    for x in -x_max..=x_max {
        let xb = BigInt::from(x);
        for t in [&target, &-&target] {
            // c·y² + (b·x)·y + (a·x² − t) = 0
            let lin = &b * &xb;
            let disc = &lin * &lin - BigInt::from(4) * &c * (&a * &xb * &xb - t);
            if disc.is_negative() {
                continue;
            }
            let root = disc.sqrt();
            if &root * &root != disc {
                continue;
            }
            let two_c = BigInt::from(2) * &c;
            for num in [-&lin + &root, -&lin - &root] {
                if !(&num % &two_c).is_zero() {
                    continue;
                }
                let y = num / &two_c;
                if (x == 0 && y.is_zero()) || !in_box(x, &y) {
                    continue;
                }
                let g = elems[0].scale(&BigRational::from_integer(xb.clone())).add(&elems[1].scale(&BigRational::from_integer(y)));
                let g = if qf.embeddings(&g).0 < 0.0 { g.neg() } else { g };
                if !out.contains(&g) {
                    out.push(g);
                }
            }
        }
    }
    out.sort_by(|a, b| {
        let (x, y) = (qf.embeddings(a).0, qf.embeddings(b).0);
        x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}

/// Gauss–Lagrange reduction of a planar basis; returns the reduced vectors and
/// the integer rows expressing them in the input basis.
pub(crate) fn lagrange_reduce(basis: [[f64; 2]; 2]) -> ([[f64; 2]; 2], [[i64; 2]; 2]) {
    let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
    let (mut u, mut v) = (basis[0], basis[1]);
    let (mut tu, mut tv) = ([1i64, 0], [0i64, 1]);
    if dot(u, u) < dot(v, v) {
        std::mem::swap(&mut u, &mut v);
        std::mem::swap(&mut tu, &mut tv);
    }
    // Invariant: |u| ≥ |v|.
    for _ in 0..200 {
        let mu = (dot(u, v) / dot(v, v)).round();
        if mu != 0.0 {
            u = [u[0] - mu * v[0], u[1] - mu * v[1]];
            let m = mu as i64;
            tu = [tu[0] - m * tv[0], tu[1] - m * tv[1]];
        }
        if dot(u, u) >= dot(v, v) {
            break;
        }
        std::mem::swap(&mut u, &mut v);
        std::mem::swap(&mut tu, &mut tv);
    }
    ([v, u], [tv, tu])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_split_prime_generators() {
        // Q(√2) has class number one, so every prime above a split ℓ is principal.
        let qf = QuadraticField::new(2).unwrap();
        let o = Lattice::unit();
        let hits = elements_of_norm(&qf, &o, &BigRational::from_integer(7.into()));
        assert!(!hits.is_empty());
        for h in &hits {
            assert_eq!(qf.norm(h).abs(), BigRational::from_integer(7.into()));
        }
    }

    #[test]
    fn nonprincipal_prime_has_no_generator() {
        let qf = QuadraticField::new(229).unwrap();
        let hits = elements_of_norm(&qf, &Lattice::unit(), &BigRational::from_integer(3.into()));
        assert!(hits.is_empty());
        let units = elements_of_norm(&qf, &Lattice::unit(), &BigRational::from_integer(1.into()));
        assert!(units.contains(&KElement::one()));
        assert!(units.iter().all(|u| !u.is_zero() && qf.norm(u).abs() == BigRational::from_integer(1.into())));
    }
}
