//! The acceptance suite: nine end-to-end checks with pinned parameters.
//! Every comparison is exact equality in F; the time budgets are reported,
//! not enforced.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arith::primes_up_to;
use crate::classchar::{verify_conditions, ClassGroup};
use crate::error::Result;
use crate::galois::{attachment_table, AttachmentTable};
use crate::global::HeckeReport;
use crate::lattice::Lattice;
use crate::localtree::{laplacian_walk_inert, laplacian_walk_split, recursion_oracle_inert};
use crate::quadfield::{QuadraticField, Splitting};
use crate::session::{default_panel, Setup, SetupParams};

pub const HEADLINE_D0: i64 = 229;
pub const HEADLINE_COEFF: &str = "Fp:7";
pub const HEADLINE_CHI_ORDER: u64 = 3;
pub const HEADLINE_M: u64 = 7;
pub const HEADLINE_N: u64 = 1;
pub const LAPLACIAN_RADIUS: u32 = 5;
pub const RECURSION_RADIUS: u32 = 6;
pub const PRIMES_PER_KIND: usize = 3;
pub const PANEL_SIZE: usize = 5;
pub const PAIRING_BOUND: u64 = 50;
pub const ATTACH_BOUND: u64 = 100;
pub const CYCLOTOMIC_BOUND: u64 = 20;
pub const INVARIANCE_SAMPLES: usize = 500;
pub const INVARIANCE_INDEX_BOUND: u64 = 10_000;
pub const CHARACTER_SAMPLES: usize = 50;
pub const CLASS_NUMBER_FIELDS: [(i64, u64); 4] = [(2, 1), (3, 1), (5, 1), (229, 3)];

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        let over = if self.elapsed > self.budget { ", over budget" } else { "" };
        format!(
            "[{}] {} {}: {} ({:.1}s of {}s{over})",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

fn outcome(id: u8, title: &'static str, budget_secs: u64, start: Instant, r: Result<(bool, String)>) -> CriterionOutcome {
    let (pass, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionOutcome { id, title, pass, detail, elapsed: start.elapsed(), budget: Duration::from_secs(budget_secs) }
}

pub fn headline_setup() -> Result<Setup> {
    Setup::build(&SetupParams::new(HEADLINE_D0, HEADLINE_COEFF, HEADLINE_CHI_ORDER).with_level(HEADLINE_M, HEADLINE_N))
}

/// The first `count` inert and split primes of K usable with this setup.
pub fn first_usable_primes(setup: &Setup, count: usize) -> (Vec<u64>, Vec<u64>) {
    let ch = setup.field().characteristic();
    let usable: Vec<u64> = primes_up_to(10_000)
        .into_iter()
        .filter(|&l| setup.ev.ctx.pdn % l != 0 && l != ch)
        .collect();
    let pick = |kind| usable.iter().copied().filter(|&l| setup.qf().splitting_type(l) == kind).take(count).collect();
    (pick(Splitting::Inert), pick(Splitting::Split))
}

pub fn laplacian_eigen(setup: &Setup) -> Result<(bool, String)> {
    let (inert, split) = first_usable_primes(setup, PRIMES_PER_KIND);
    let mut pass = true;
    let mut parts = Vec::new();
    for &ell in &inert {
        let t = Instant::now();
        let rep = laplacian_walk_inert(setup.field(), ell, LAPLACIAN_RADIUS)?;
        pass &= rep.pass();
        parts.push(format!("inert {ell}: {} vertices {:.1}s", rep.vertices_checked, t.elapsed().as_secs_f64()));
    }
    for &ell in &split {
        let t = Instant::now();
        let rep = laplacian_walk_split(setup.qf(), setup.field(), &setup.ev.chi, ell, LAPLACIAN_RADIUS)?;
        pass &= rep.pass();
        parts.push(format!("split {ell}: {} vertices {:.1}s", rep.vertices_checked, t.elapsed().as_secs_f64()));
    }
    Ok((pass, parts.join("; ")))
}

pub fn recursion_oracle(setup: &Setup) -> Result<(bool, String)> {
    let (inert, _) = first_usable_primes(setup, PRIMES_PER_KIND);
    let mut pass = true;
    let mut parts = Vec::new();
    for &ell in &inert {
        let rep = recursion_oracle_inert(setup.field(), ell, RECURSION_RADIUS)?;
        pass &= rep.pass();
        parts.push(format!("{ell}: {} vertices", rep.vertices_checked));
    }
    Ok((pass, parts.join("; ")))
}

pub fn index_identities(tables: &[&AttachmentTable]) -> (bool, String) {
    let reports: Vec<&HeckeReport> = tables.iter().flat_map(|t| t.reports.iter()).collect();
    let summands: usize = reports.iter().map(|r| r.summands.len()).sum();
    let bad: Vec<String> = reports
        .iter()
        .filter(|r| !r.index_checks().all())
        .map(|r| format!("l={} L0={}", r.ell, r.lattice))
        .collect();
    let detail = format!("{} decompositions, {summands} summands, {} violations {:?}", reports.len(), bad.len(), bad.iter().take(3).collect::<Vec<_>>());
    (bad.is_empty(), detail)
}

pub fn pairing_routes(table: &AttachmentTable, panel_size: usize) -> (bool, String) {
    let relevant: Vec<&HeckeReport> = table.reports.iter().filter(|r| r.ell <= PAIRING_BOUND).collect();
    let primes = table.rows.iter().filter(|r| r.ell <= PAIRING_BOUND).count();
    let disagree = relevant.iter().filter(|r| !r.routes_agree() || r.lhs != r.rhs).count();
    let enough = panel_size >= PANEL_SIZE && relevant.len() == primes * (panel_size + 1);
    (
        disagree == 0 && enough,
        format!("{} (L0, l) pairs over {primes} primes <= {PAIRING_BOUND}, {disagree} disagreements", relevant.len()),
    )
}

pub fn invariance(setup: &Setup, seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rep = setup.ev.invariance_suite(INVARIANCE_SAMPLES, INVARIANCE_INDEX_BOUND, &mut rng)?;
    Ok((
        rep.pass(),
        format!("{} samples, {} with nonzero Phi, {} failures", rep.samples, rep.nonzero_phi, rep.failures.len()),
    ))
}

fn rows_summary(table: &AttachmentTable) -> String {
    let matched = table.rows.iter().filter(|r| r.matches()).count();
    format!("{matched}/{} rows match", table.rows.len())
}

pub fn headline(setup: &Setup, table: &AttachmentTable, seed: u64) -> Result<(bool, String)> {
    let f = setup.field();
    let oracle = class_number_by_forms(setup.qf().d0);
    let order = setup.group.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let conditions = verify_conditions(&setup.ev.chi, &setup.ev.ctx, CHARACTER_SAMPLES, &mut rng)?;
    let shapes = table.rows.iter().all(|r| match r.kind {
        Splitting::Inert => f.is_zero(&r.a) && r.big_a == f.neg(&f.one()),
        _ => r.big_a == f.one(),
    });
    let expected: Vec<u64> = primes_up_to(ATTACH_BOUND).into_iter().filter(|l| setup.ev.ctx.pdn % l != 0).collect();
    let covered = table.rows.iter().map(|r| r.ell).collect::<Vec<_>>() == expected;
    let pass = order == 3 && oracle == order && conditions.all_pass() && shapes && covered && table.all_match();
    Ok((pass, format!("h = {order} (oracle {oracle}), {}, character hypotheses {}", rows_summary(table), conditions.all_pass())))
}

pub fn control(table: &AttachmentTable, setup: &Setup) -> (bool, String) {
    let f = setup.field();
    let two = f.embed_integer(2);
    let values = table.rows.iter().all(|r| match r.kind {
        Splitting::Split => r.a == two,
        _ => f.is_zero(&r.a),
    });
    (values && table.all_match(), rows_summary(table))
}

pub fn cyclotomic(setup: &Setup, table: &AttachmentTable, panel: &[Lattice]) -> Result<(bool, String)> {
    // At least one panel lattice must carry a nonzero inert factor of tier 2,
    // so that 1/ℓ values actually enter the products.
    let mut inert_hits = 0;
    for l in panel {
        for w in setup.ev.support(l)? {
            if setup.qf().splitting_type(w) == Splitting::Inert
                && setup.ev.local_tier(l, w)? >= 2
                && !setup.field().is_zero(&setup.ev.phi(l)?)
            {
                inert_hits += 1;
            }
        }
    }
    Ok((table.all_match() && inert_hits > 0, format!("{}, {inert_hits} panel lattices with inert 1/l factors", rows_summary(table))))
}

pub fn class_numbers() -> Result<(bool, String)> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (d0, expected) in CLASS_NUMBER_FIELDS {
        let h = ClassGroup::compute(&QuadraticField::new(d0)?)?.order();
        let oracle = class_number_by_forms(d0);
        pass &= h == oracle && oracle == expected;
        parts.push(format!("d0={d0}: {h} (oracle {oracle})"));
    }
    Ok((pass, parts.join(", ")))
}

/// Wide class number h of Q(√d0) from cycles of reduced indefinite binary
/// quadratic forms. The fundamental unit has norm −1 exactly when the
/// principal cycle also contains a form with leading coefficient −1, and in
/// that case the narrow and wide class numbers agree.
pub fn class_number_by_forms(d0: i64) -> u64 {
    let disc = if d0.rem_euclid(4) == 1 { d0 } else { 4 * d0 };
    let cycles = reduced_form_cycles(disc);
    let principal = cycles.iter().find(|c| c.iter().any(|f| f.0 == 1)).expect("principal cycle");
    let narrow = cycles.len() as u64;
    if principal.iter().any(|f| f.0 == -1) {
        narrow
    } else {
        narrow / 2
    }
}

/// The least (x, y), y ≥ 1, with x² − D·y² = ±4 and that sign, searching
/// y ≤ max_y.
pub fn fundamental_unit_by_search(disc: i64, max_y: i64) -> Option<(i128, i128, i8)> {
    let disc = disc as i128;
    (1..=max_y as i128).find_map(|y| {
        let base = disc * y * y;
        [(-4, -1i8), (4, 1)].into_iter().find_map(|(delta, sign)| {
            let n = base + delta;
            let r = n.isqrt();
            (r * r == n).then_some((r, y, sign))
        })
    })
}

type Form = (i64, i64, i64);

/// The ρ-cycles of primitive reduced forms (a, b, c) of discriminant D.
fn reduced_form_cycles(disc: i64) -> Vec<Vec<Form>> {
    let s = disc.isqrt();
    let gcd = |x: i64, y: i64| num_integer::gcd(x, y);
    let reduced = |a: i64, b: i64| {
        let two_a = 2 * a.abs();
        b > 0 && b * b < disc && (two_a + b) * (two_a + b) > disc && (two_a <= b || (two_a - b) * (two_a - b) < disc)
    };
    let mut forms = Vec::new();
    for b in 1..=s {
        if (b * b - disc) % 4 != 0 {
            continue;
        }
        let ac = (b * b - disc) / 4;
        for a in 1..=ac.abs() {
            if ac % a != 0 {
                continue;
            }
            for a in [a, -a] {
                let c = ac / a;
                if reduced(a, b) && gcd(gcd(a, b), c).abs() == 1 {
                    forms.push((a, b, c));
                }
            }
        }
    }
    let rho = |(_, b, c): Form| {
        let m = 2 * c.abs();
        let b2 = s - (s + b).rem_euclid(m);
        (c, b2, (b2 * b2 - disc) / (4 * c))
    };
    let mut seen = std::collections::HashSet::new();
    let mut cycles = Vec::new();
    for &f in &forms {
        if seen.contains(&f) {
            continue;
        }
        let mut cycle = Vec::new();
        let mut g = f;
        while seen.insert(g) {
            cycle.push(g);
            g = rho(g);
        }
        cycles.push(cycle);
    }
    cycles
}

/// Run all nine criteria in order.
pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    let mut out = Vec::new();
    let setup = match headline_setup() {
        Ok(s) => s,
        Err(e) => {
            return vec![CriterionOutcome {
                id: 0,
                title: "setup",
                pass: false,
                detail: format!("error: {e}"),
                elapsed: Duration::ZERO,
                budget: Duration::ZERO,
            }]
        }
    };

    let t = Instant::now();
    out.push(outcome(1, "Laplacian eigen-equations", 60, t, laplacian_eigen(&setup)));
    let t = Instant::now();
    out.push(outcome(2, "closed form vs recursion", 120, t, recursion_oracle(&setup)));

    let t = Instant::now();
    let main = default_panel(&setup.ev.ctx, PANEL_SIZE, seed)
        .and_then(|panel| attachment_table(&setup.ev, ATTACH_BOUND, &panel).map(|t| (panel, t)));
    let main_elapsed = t.elapsed();

    let t = Instant::now();
    let trivial = Setup::build(&SetupParams::new(HEADLINE_D0, HEADLINE_COEFF, 1).with_level(HEADLINE_M, HEADLINE_N))
        .and_then(|s| {
            let panel = default_panel(&s.ev.ctx, PANEL_SIZE, seed)?;
            let table = attachment_table(&s.ev, ATTACH_BOUND, &panel)?;
            Ok((s, table))
        });
    let trivial_elapsed = t.elapsed();

    let t = Instant::now();
    let cyclo = Setup::build(&SetupParams::new(HEADLINE_D0, "cyclotomic:3", HEADLINE_CHI_ORDER)).and_then(|s| {
        let panel = default_panel(&s.ev.ctx, PANEL_SIZE, seed)?;
        let table = attachment_table(&s.ev, CYCLOTOMIC_BOUND, &panel)?;
        Ok((s, panel, table))
    });
    let cyclo_elapsed = t.elapsed();

    let t = Instant::now();
    let tables: Result<Vec<&AttachmentTable>> = match (&main, &trivial, &cyclo) {
        (Ok((_, a)), Ok((_, b)), Ok((_, _, c))) => Ok(vec![a, b, c]),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => Err(e.clone()),
    };
    out.push(outcome(3, "index-formula identities", 300, t, tables.map(|ts| index_identities(&ts))));

    let t = Instant::now();
    let r = main.as_ref().map_err(Clone::clone).map(|(panel, table)| pairing_routes(table, panel.len()));
    out.push(outcome(4, "two routes to the Hecke pairing", 300, t, r));

    let t = Instant::now();
    out.push(outcome(5, "K_S,q invariance and homogeneity", 60, t, invariance(&setup, seed)));

    let t = Instant::now() - main_elapsed;
    let r = main.as_ref().map_err(Clone::clone).and_then(|(_, table)| headline(&setup, table, seed));
    out.push(outcome(6, "attachment, d0=229, F7, order-3 character", 300, t, r));

    let t = Instant::now() - trivial_elapsed;
    let r = trivial.as_ref().map_err(Clone::clone).map(|(s, table)| control(table, s));
    out.push(outcome(7, "control run with trivial character", 300, t, r));

    let t = Instant::now() - cyclo_elapsed;
    let r = cyclo.as_ref().map_err(Clone::clone).and_then(|(s, panel, table)| cyclotomic(s, table, panel));
    out.push(outcome(8, "characteristic-0 attachment, cyclotomic:3", 120, t, r));

    let t = Instant::now();
    out.push(outcome(9, "class numbers against the form-cycle oracle", 10, t, class_numbers()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn form_oracle_examples() {
        assert_eq!(fundamental_unit_by_search(8, 10), Some((2, 1, -1)));
        assert_eq!(fundamental_unit_by_search(12, 10), Some((4, 1, 1)));
        assert_eq!(fundamental_unit_by_search(229, 10), Some((15, 1, -1)));
        assert_eq!(fundamental_unit_by_search(4 * 94, 1000), None);
        assert_eq!(reduced_form_cycles(12).len(), 2);
        assert_eq!(reduced_form_cycles(4 * 34).len(), 4);
        assert_eq!(class_number_by_forms(34), 2);
        assert_eq!(class_number_by_forms(229), 3);
        assert_eq!(class_number_by_forms(10), 2);
        assert_eq!(class_number_by_forms(79), 3);
    }
}
