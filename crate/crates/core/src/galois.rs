//! Frobenius characteristic polynomials of ρ = Ind χ and the comparison
//! with the Hecke eigenvalues of Φ.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::arith::primes_up_to;
use crate::classchar::IdealCharacter;
use crate::coeff::{CoeffField, FieldElement};
use crate::error::{Error, Result};
use crate::global::{HeckeReport, PhiEvaluator};
use crate::lattice::Lattice;
use crate::quadfield::{PrimeIdeal, PrimeKind, QuadraticField, Splitting};

/// (tr ρ(Frob_ℓ), det ρ(Frob_ℓ)).
pub fn frobenius_charpoly(chi: &IdealCharacter, qf: &QuadraticField, ell: u64) -> Result<(FieldElement, FieldElement)> {
    let f = &chi.field;
    match qf.splitting_type(ell) {
        Splitting::Ramified => Err(Error::RamifiedPrime(ell)),
        Splitting::Inert => Ok((f.zero(), f.neg(&f.one()))),
        Splitting::Split => {
            let a = chi.eval_prime(&PrimeIdeal::new(ell, PrimeKind::SplitFirst))?;
            let b = chi.eval_prime(&PrimeIdeal::new(ell, PrimeKind::SplitSecond))?;
            Ok((f.add(&a, &b), f.mul(&a, &b)))
        }
    }
}

/// ρ(c) is scalar exactly when χ has odd order.
pub fn evenness_check(chi: &IdealCharacter) -> bool {
    chi.order % 2 == 1
}

#[derive(Clone, Debug)]
pub struct AttachmentRow {
    pub ell: u64,
    pub kind: Splitting,
    pub a: FieldElement,
    pub big_a: FieldElement,
    pub tr: FieldElement,
    pub det: FieldElement,
    /// lhs(L0) = a_ℓ·Φ(L0) and T_{ℓ,ℓ} = θ(ℓ) on every panel lattice.
    pub panel_consistent: bool,
}

impl AttachmentRow {
    pub fn matches(&self) -> bool {
        self.a == self.tr && self.big_a == self.det
    }
}

#[derive(Clone, Debug)]
pub struct AttachmentTable {
    pub rows: Vec<AttachmentRow>,
    /// Every decomposition computed, grouped by ℓ in increasing order.
    pub reports: Vec<HeckeReport>,
}

/// Primes ℓ ≤ bound usable for the comparison: ℓ ∤ pdN and ℓ ≠ char F.
pub fn usable_primes(ev: &PhiEvaluator, bound: u64) -> Vec<u64> {
    let ch = ev.field.characteristic();
    primes_up_to(bound).into_iter().filter(|&l| ev.ctx.pdn % l != 0 && l != ch).collect()
}

fn row_for(ev: &PhiEvaluator, ell: u64, panel: &[Lattice]) -> Result<(AttachmentRow, Vec<HeckeReport>)> {
    let f = &ev.field;
    let qf = &ev.ctx.qf;
    let base = ev.hecke_decompose(&Lattice::unit(), ell)?;
    let a = base.lhs.clone();
    let theta = ev.hecke_tll(&Lattice::unit(), ell)?;
    let mut consistent = true;
    let mut reports = vec![base];
    for l0 in panel {
        let rep = ev.hecke_decompose(l0, ell)?;
        if rep.lhs != f.mul(&a, &ev.phi(l0)?) || ev.hecke_tll(l0, ell)? != theta {
            consistent = false;
        }
        reports.push(rep);
    }
    let (tr, det) = frobenius_charpoly(&ev.chi, qf, ell)?;
    let row = AttachmentRow {
        ell,
        kind: qf.splitting_type(ell),
        a,
        big_a: f.embed_integer(theta as i64),
        tr,
        det,
        panel_consistent: consistent,
    };
    Ok((row, reports))
}

/// The attachment comparison at every usable ℓ ≤ bound. Rows are computed in
/// parallel on the current rayon pool and returned in increasing ℓ.
pub fn attachment_table(ev: &PhiEvaluator, bound: u64, panel: &[Lattice]) -> Result<AttachmentTable> {
    let primes = usable_primes(ev, bound);
    let results: Vec<Result<(AttachmentRow, Vec<HeckeReport>)>> =
        primes.par_iter().map(|&ell| row_for(ev, ell, panel)).collect();
    let mut rows = Vec::with_capacity(primes.len());
    let mut reports = Vec::new();
    for r in results {
        let (row, reps) = r?;
        rows.push(row);
        reports.extend(reps);
    }
    Ok(AttachmentTable { rows, reports })
}

impl AttachmentTable {
    pub fn all_match(&self) -> bool {
        self.rows.iter().all(|r| r.matches() && r.panel_consistent)
    }

    pub fn to_tsv(&self, field: &CoeffField) -> String {
        let mut s = String::from("ell\tkind\ta\tA\ttr\tdet\tmatch\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.ell,
                r.kind.name(),
                field.format(&r.a),
                field.format(&r.big_a),
                field.format(&r.tr),
                field.format(&r.det),
                r.matches()
            );
        }
        s
    }

    pub fn to_json(&self, field: &CoeffField) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "ell": r.ell,
                    "kind": r.kind.name(),
                    "a": field.format(&r.a),
                    "A": field.format(&r.big_a),
                    "tr": field.format(&r.tr),
                    "det": field.format(&r.det),
                    "match": r.matches(),
                    "panel_consistent": r.panel_consistent,
                })
            })
            .collect();
        json!({ "rows": rows, "all_match": self.all_match() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classchar::ClassGroup;
    use crate::lattice::ContextS;
    use std::sync::Arc;

    #[test]
    fn charpoly_examples() {
        let qf = QuadraticField::new(229).unwrap();
        let f7 = CoeffField::prime(7).unwrap();
        let group = Arc::new(ClassGroup::compute(&qf).unwrap());
        let chi = IdealCharacter::from_class_group(group.clone(), 3, &f7).unwrap();
        assert_eq!(frobenius_charpoly(&chi, &qf, 2).unwrap(), (f7.zero(), f7.neg(&f7.one())));
        assert!(frobenius_charpoly(&chi, &qf, 229).is_err());
        let (tr, det) = frobenius_charpoly(&chi, &qf, 3).unwrap();
        // λ₃ generates the class group; χ(λ₃) = 2 and χ(λ₃′) = 4.
        assert_eq!((tr, det), (f7.embed_integer(6), f7.one()));
        let triv = IdealCharacter::trivial(group, &f7).unwrap();
        assert_eq!(frobenius_charpoly(&triv, &qf, 3).unwrap(), (f7.embed_integer(2), f7.one()));
        assert!(evenness_check(&chi) && evenness_check(&triv));
    }

    #[test]
    fn small_attachment_table() {
        let qf = QuadraticField::new(229).unwrap();
        let f7 = CoeffField::prime(7).unwrap();
        let group = Arc::new(ClassGroup::compute(&qf).unwrap());
        let chi = IdealCharacter::from_class_group(group, 3, &f7).unwrap();
        let ctx = ContextS::new(qf, 7, 1, 7).unwrap();
        let ev = PhiEvaluator::new(ctx, f7.clone(), chi).unwrap();
        let panel = [Lattice::from_hnf(2, 1, 3)];
        let table = attachment_table(&ev, 13, &panel).unwrap();
        assert_eq!(table.rows.iter().map(|r| r.ell).collect::<Vec<_>>(), vec![2, 3, 5, 11, 13]);
        assert!(table.all_match(), "{}", table.to_tsv(&f7));
        assert!(table.to_tsv(&f7).starts_with("ell\tkind\ta\tA\ttr\tdet\tmatch\n2\tinert\t0\t6\t0\t6\ttrue"));
    }
}
