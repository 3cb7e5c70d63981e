//! One function per subcommand. Each returns the primary artifact text and
//! whether every check it ran passed.

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use quadhecke::classchar::{minkowski_bound, verify_conditions, ClassGroup, ConditionStatus};
use quadhecke::galois::{attachment_table, usable_primes};
use quadhecke::global::HeckeReport;
use quadhecke::localtree::{build_patch, laplacian_check};
use quadhecke::selftest::{run_all, CHARACTER_SAMPLES};
use quadhecke::session::{default_panel, seeded_rng, Setup};
use quadhecke::{CoeffField, ContextS, Error, Lattice, QuadraticField, Splitting};

use crate::config::RunConfig;
use crate::CliError;

/// How primes above a split ℓ are named in every report.
pub const LAMBDA_CONVENTION: &str =
    "lambda_l is the prime above split l whose root r of the minimal polynomial of omega is the least nonnegative residue mod l; lambda'_l is its conjugate";
/// Which local tree carries ψ at each place.
pub const TREE_CONVENTION: &str =
    "local factors live on T_l^2 (fiber of two lattices per homothety class) for inert l and on T_l^1 for split l; the n_w labels of the global definition are read transposed";

pub struct Artifact {
    pub text: String,
    pub json_twin: Option<String>,
    pub pass: bool,
}

fn envelope(cfg: &RunConfig, command: &str, body: Value) -> String {
    let mut map = Map::new();
    map.insert("command".into(), json!(command));
    map.insert("config_hash".into(), json!(cfg.hash()));
    map.insert("config".into(), json!(cfg.canonical()));
    map.insert("conventions".into(), json!({ "lambda": LAMBDA_CONVENTION, "trees": TREE_CONVENTION }));
    if let Value::Object(extra) = body {
        map.extend(extra);
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("reports serialize");
    s.push('\n');
    s
}

fn comment_header(cfg: &RunConfig, prefix: &str) -> String {
    format!(
        "{prefix} config_hash={}\n{prefix} lambda: {LAMBDA_CONVENTION}\n{prefix} trees: {TREE_CONVENTION}\n",
        cfg.hash()
    )
}

fn compute<T>(context: impl Into<String>, r: quadhecke::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Compute { context: context.into(), source })
}

/// Setup failures that come from a bad configuration name the key.
fn setup(cfg: &RunConfig) -> Result<Setup, CliError> {
    Setup::build(&cfg.setup_params()).map_err(|e| match e {
        Error::InvalidContext(m) => CliError::config(if cfg.level_n.is_some() { "S.N" } else { "S.M" }, m),
        Error::NoSuchRoot { .. } | Error::NoOddQuotient(_) | Error::EvenCharacterOrder(_) => {
            CliError::config("chi.order", e.to_string())
        }
        Error::TableSyntax { .. } => CliError::config("chi.table", e.to_string()),
        Error::Config(m) if m.contains("modulus") => CliError::config("chi.modulus", m),
        other => CliError::Compute { context: "setup".into(), source: other },
    })
}

fn parse_lattice(text: &str) -> Result<Lattice, CliError> {
    text.parse().map_err(|e: Error| CliError::config("--lattice", e.to_string()))
}

pub fn field(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let qf = compute("field", QuadraticField::new(cfg.d0))?;
    let coeff: CoeffField = compute("coeff", cfg.coeff.parse())?;
    let group = compute("class group", ClassGroup::compute(&qf))?;
    let ctx = ContextS::with_defaults(qf.clone(), cfg.level_m, cfg.level_n, coeff.p_param())
        .map_err(|e| CliError::config("S.M", e.to_string()))?;
    let splitting: Vec<Value> = quadhecke::arith::primes_up_to(cfg.bound)
        .into_iter()
        .map(|ell| {
            let primes: Vec<String> = qf.primes_above(ell).iter().map(|p| p.to_string()).collect();
            json!({ "ell": ell, "kind": qf.splitting_type(ell).name(), "primes": primes })
        })
        .collect();
    let generators: Vec<Value> = group
        .generators
        .iter()
        .zip(&group.orders)
        .map(|(g, k)| json!({ "prime": g.to_string(), "relative_order": k }))
        .collect();
    let body = json!({
        "d0": qf.d0,
        "discriminant": qf.disc,
        "omega": { "trace": qf.t, "norm": qf.n },
        "fundamental_unit": qf.unit.to_string(),
        "unit_norm": qf.unit_norm,
        "regulator": format!("{:.12}", qf.regulator()),
        "class_number": group.order(),
        "class_group_generators": generators,
        "minkowski_bound": minkowski_bound(&qf),
        "level": { "M": ctx.m, "N": ctx.level_n, "pdN": ctx.pdn, "i_S": ctx.i_s, "sign_S": ctx.sign_s },
        "splitting": splitting,
    });
    Ok(Artifact { text: envelope(cfg, "field", body), json_twin: None, pass: true })
}

pub fn character(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let s = setup(cfg)?;
    let ev = &s.ev;
    let chi = &ev.chi;
    let f = &ev.field;
    let conditions = compute("character conditions", verify_conditions(chi, &ev.ctx, CHARACTER_SAMPLES, &mut seeded_rng(cfg.seed)))?;
    let mut values = Vec::new();
    for ell in quadhecke::arith::primes_up_to(cfg.bound) {
        if chi.modulus % ell == 0 && chi.modulus > 1 {
            continue;
        }
        for p in s.qf().primes_above(ell) {
            let (log, value) = match chi.log_prime(&p) {
                Ok(k) => (json!(k), json!(f.format(&compute(p.to_string(), chi.eval_prime(&p))?))),
                Err(Error::MissingTableEntry(_)) => (Value::Null, Value::Null),
                Err(e) => return Err(CliError::Compute { context: format!("l = {ell}, prime {p}"), source: e }),
            };
            values.push(json!({ "ell": ell, "prime": p.to_string(), "log": log, "value": value }));
        }
    }
    let pass = [conditions.principal, conditions.rational, conditions.odd_order, conditions.galois]
        .iter()
        .all(|c| *c != ConditionStatus::Fail);
    let body = json!({
        "order": chi.order,
        "zeta": f.format(&chi.zeta),
        "modulus": chi.modulus,
        "source": if chi.is_class_group_character() { "class-group" } else { "table" },
        "class_number": s.group.order(),
        "conditions": conditions,
        "values": values,
    });
    Ok(Artifact { text: envelope(cfg, "character", body), json_twin: None, pass })
}

pub fn tree(cfg: &RunConfig, ell: u64, n: Option<u8>, radius: Option<u32>) -> Result<Artifact, CliError> {
    let s = setup(cfg)?;
    let qf = s.qf();
    let kind = qf.splitting_type(ell);
    if kind == Splitting::Ramified {
        return Err(CliError::config("--ell", format!("{ell} is ramified in Q(sqrt {})", qf.d0)));
    }
    let n = n.unwrap_or(if kind == Splitting::Inert { 2 } else { 1 });
    let radius = radius.unwrap_or(cfg.radius);
    let context = format!("tree at l = {ell}");
    let patch = compute(&context, build_patch(qf, ell, n, radius))?;
    let natural = (kind == Splitting::Inert) == (n == 2);
    let values = if ell != s.field().characteristic() {
        Some(compute(&context, patch.psi_values(qf, s.field(), &s.ev.chi))?)
    } else {
        None
    };
    let mut extra = comment_header(cfg, "  //");
    let mut pass = true;
    match &values {
        Some(vals) if natural => {
            let mu = compute(&context, s.ev.chi.mu(qf, ell))?;
            let rep = laplacian_check(&patch, s.field(), vals, &mu);
            pass = rep.pass();
            extra.push_str(&format!(
                "  // laplacian: {} interior vertices, {}\n",
                rep.vertices_checked,
                rep.violation.as_deref().unwrap_or("no violation")
            ));
        }
        Some(_) => extra.push_str("  // laplacian: not checked (psi lives on the other fiber count for this prime)\n"),
        None => extra.push_str("  // psi: omitted (l equals the coefficient characteristic)\n"),
    }
    let dot = patch.to_dot(s.field(), values.as_deref());
    let (first, rest) = dot.split_once('\n').expect("dot has a header line");
    Ok(Artifact { text: format!("{first}\n{extra}{rest}"), json_twin: None, pass })
}

pub fn phi(cfg: &RunConfig, lattices: &[String], invariance: bool) -> Result<Artifact, CliError> {
    let s = setup(cfg)?;
    let ev = &s.ev;
    let lattices: Vec<Lattice> = if lattices.is_empty() {
        vec![Lattice::unit()]
    } else {
        lattices.iter().map(|t| parse_lattice(t)).collect::<Result<_, _>>()?
    };
    let mut rows = Vec::new();
    for l in &lattices {
        let context = format!("lattice {l}");
        let value = compute(&context, ev.phi(l))?;
        let support = compute(&context, ev.support(l))?;
        rows.push(json!({
            "lattice": l.to_string(),
            "index": l.index().to_string(),
            "support": support,
            "phi": ev.field.format(&value),
        }));
    }
    let mut body = json!({ "lattices": rows });
    let mut pass = true;
    if invariance {
        let mut rng = seeded_rng(cfg.seed);
        let rep = compute("invariance suite", ev.invariance_suite(cfg.samples, cfg.index_bound, &mut rng))?;
        pass = rep.pass();
        body["invariance"] = json!({ "samples": rep.samples, "nonzero_phi": rep.nonzero_phi, "failures": rep.failures, "pass": pass });
    }
    Ok(Artifact { text: envelope(cfg, "phi", body), json_twin: None, pass })
}

pub fn hecke(cfg: &RunConfig, ell: Option<u64>, lattice: Option<&str>, all_upto: Option<u64>) -> Result<Artifact, CliError> {
    let s = setup(cfg)?;
    let ev = &s.ev;
    let l0 = match lattice {
        Some(t) => parse_lattice(t)?,
        None => Lattice::unit(),
    };
    let primes = match (ell, all_upto) {
        (Some(l), None) => vec![l],
        (None, Some(b)) => usable_primes(ev, b),
        _ => return Err(CliError::config("--ell", "give exactly one of --ell and --all-ell-upto".into())),
    };
    let reports: Vec<Result<HeckeReport, CliError>> = primes
        .par_iter()
        .map(|&l| compute(format!("l = {l}, lattice {l0}"), ev.hecke_decompose(&l0, l)))
        .collect();
    let reports: Vec<HeckeReport> = reports.into_iter().collect::<Result<_, _>>()?;
    let pass = reports.iter().all(|r| r.pass());
    let body = if ell.is_some() {
        reports[0].to_json(&ev.field)
    } else {
        let list: Vec<Value> = reports.iter().map(|r| r.to_json(&ev.field)).collect();
        json!({ "lattice": l0.to_string(), "reports": list, "pass": pass })
    };
    Ok(Artifact { text: envelope(cfg, "hecke", body), json_twin: None, pass })
}

pub fn attach(cfg: &RunConfig, json_primary: bool) -> Result<Artifact, CliError> {
    let s = setup(cfg)?;
    let ev = &s.ev;
    let panel = compute("panel", default_panel(&ev.ctx, cfg.panel, cfg.seed))?;
    let table = compute("attach", attachment_table(ev, cfg.bound, &panel))?;
    let panel_text: Vec<String> = panel.iter().map(|l| l.to_string()).collect();
    let mut body = table.to_json(&ev.field);
    body["panel"] = json!(panel_text);
    body["class_number"] = json!(s.group.order());
    let json_text = envelope(cfg, "attach", body);
    let tsv = format!("{}# panel: {}\n{}", comment_header(cfg, "#"), panel_text.join(" "), table.to_tsv(&ev.field));
    let pass = table.all_match();
    Ok(if json_primary {
        Artifact { text: json_text, json_twin: None, pass }
    } else {
        Artifact { text: tsv, json_twin: Some(json_text), pass }
    })
}

pub fn selftest(cfg: &RunConfig) -> Artifact {
    let outcomes = run_all(cfg.seed);
    let mut text = comment_header(cfg, "#");
    for o in &outcomes {
        text.push_str(&o.line());
        text.push('\n');
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    let pass = passed == outcomes.len() && outcomes.len() == 9;
    text.push_str(&format!("selftest: {passed} of {} criteria passed\n", outcomes.len()));
    Artifact { text, json_twin: None, pass }
}
