//! Assembling a full evaluation context from run parameters.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classchar::{ClassGroup, IdealCharacter};
use crate::coeff::CoeffField;
use crate::error::{Error, Result};
use crate::global::{structured_lattice, PhiEvaluator};
use crate::lattice::{ContextS, Lattice};
use crate::quadfield::QuadraticField;

/// Where χ comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CharacterSource {
    /// The deterministic class-group character of the given odd order.
    ClassGroup { order: u64 },
    /// An explicit table of prime values (see `IdealCharacter::from_table`).
    Table { text: String, order: u64, modulus: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetupParams {
    pub d0: i64,
    pub coeff: String,
    pub character: CharacterSource,
    /// M; defaults to 4.
    pub m: Option<u64>,
    /// N before augmentation; defaults to 1.
    pub n: Option<u64>,
}

impl SetupParams {
    pub fn new(d0: i64, coeff: &str, chi_order: u64) -> Self {
        SetupParams { d0, coeff: coeff.into(), character: CharacterSource::ClassGroup { order: chi_order }, m: None, n: None }
    }

    pub fn with_level(mut self, m: u64, n: u64) -> Self {
        self.m = Some(m);
        self.n = Some(n);
        self
    }
}

pub struct Setup {
    pub group: Arc<ClassGroup>,
    pub ev: PhiEvaluator,
}

impl Setup {
    pub fn build(params: &SetupParams) -> Result<Self> {
        let qf = QuadraticField::new(params.d0)?;
        let field: CoeffField = params.coeff.parse()?;
        let group = Arc::new(ClassGroup::compute(&qf)?);
        let chi = match &params.character {
            CharacterSource::ClassGroup { order } => IdealCharacter::from_class_group(group.clone(), *order, &field)?,
            CharacterSource::Table { text, order, modulus } => {
                IdealCharacter::from_table(text, *order, *modulus, &field, &qf)?
            }
        };
        let ctx = ContextS::with_defaults(qf, params.m, params.n, field.p_param())?;
        if chi.modulus > 1 && ctx.level_n % chi.modulus != 0 {
            return Err(Error::Config(format!("character modulus {} must divide N = {}", chi.modulus, ctx.level_n)));
        }
        let ev = PhiEvaluator::new(ctx, field, chi)?;
        Ok(Setup { group, ev })
    }

    pub fn qf(&self) -> &QuadraticField {
        &self.ev.ctx.qf
    }

    pub fn field(&self) -> &CoeffField {
        &self.ev.field
    }
}

/// The generator behind every sampled quantity of a run.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Base lattices for panel checks: a few fixed lattices with tier 2 at small
/// primes, then seeded structured samples, all of index prime to pdN.
pub fn default_panel(ctx: &ContextS, size: usize, seed: u64) -> Result<Vec<Lattice>> {
    let fixed = [
        Lattice::from_hnf(1, 0, 4),
        Lattice::from_hnf(1, 0, 9),
        Lattice::from_hnf(1, 0, 169),
        Lattice::from_hnf(1, 0, 49),
        Lattice::from_hnf(2, 1, 3),
    ];
    let mut panel: Vec<Lattice> = fixed
        .into_iter()
        .filter(|l| ctx.is_coprime_to_pdn(&l.index().to_integer()))
        .take(size.div_ceil(2))
        .collect();
    let mut rng = seeded_rng(seed);
    let mut attempts = 0;
    while panel.len() < size {
        let l = structured_lattice(ctx, 2_000, &mut rng)?;
        attempts += 1;
        if !panel.contains(&l) && (l != Lattice::unit() || attempts > 1000) {
            panel.push(l);
        }
    }
    Ok(panel)
}
