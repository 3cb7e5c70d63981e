//! Local structure at a prime ℓ: positions of completed lattices in the
//! Bruhat–Tits tree (n = 1) or its double cover (n = 2), the local
//! eigenfunctions ψ, and patches of the graph for checking them.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::valuation;
use crate::classchar::IdealCharacter;
use crate::coeff::{CoeffField, FieldElement};
use crate::error::{Error, Result};
use crate::lattice::{ContextS, Lattice};
use crate::quadfield::{PrimeIdeal, PrimeKind, QuadraticField, Splitting};

/// Elementary-divisor valuations (a, b), a ≤ b, of L_ℓ relative to O_ℓ, shifted
/// by an even amount so that a ∈ {0, 1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct InertVertex {
    pub a: u32,
    pub b: u32,
}

impl InertVertex {
    pub fn from_valuations(lo: i64, hi: i64) -> Self {
        debug_assert!(lo <= hi);
        let a = lo.rem_euclid(2);
        InertVertex { a: a as u32, b: (hi - (lo - a)) as u32 }
    }

    pub fn tier(&self) -> u32 {
        self.b - self.a
    }
}

/// Position of a vertex of T_ℓ for split ℓ: the nearest idealistic vertex is
/// λ^m (m > 0), λ′^{−m} (m < 0) or O_ℓ (m = 0), at distance k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SplitVertex {
    pub m: i64,
    pub k: u64,
}

impl SplitVertex {
    pub fn is_idealistic(&self) -> bool {
        self.k == 0
    }

    pub fn tier(&self) -> u64 {
        self.m.unsigned_abs() + self.k
    }
}

fn require_kind(qf: &QuadraticField, ell: u64, expected: Splitting) -> Result<()> {
    let found = qf.splitting_type(ell);
    if found != expected {
        return Err(Error::WrongSplitting { ell, found: found.name(), expected: expected.name() });
    }
    Ok(())
}

fn val_or(x: &BigInt, ell: u64, inf: i64) -> i64 {
    if x.is_zero() {
        inf
    } else {
        valuation(x, ell) as i64
    }
}

pub fn local_vertex_inert(qf: &QuadraticField, ell: u64, lattice: &Lattice) -> Result<InertVertex> {
    require_kind(qf, ell, Splitting::Inert)?;
    let (a, b, c) = lattice.hnf();
    let vden = valuation(lattice.den(), ell) as i64;
    let (va, vc) = (val_or(a, ell, 0), val_or(c, ell, 0));
    let lo = va.min(vc).min(val_or(b, ell, i64::MAX));
    Ok(InertVertex::from_valuations(lo - vden, va + vc - lo - vden))
}

/// ℓ-adic data needed to place lattices in T_ℓ for a split ℓ.
#[derive(Clone, Debug)]
pub struct SplitPlace {
    pub ell: u64,
    prec: u32,
    r: BigInt,
    r_conj: BigInt,
    modulus: BigInt,
}

impl SplitPlace {
    pub fn new(qf: &QuadraticField, ell: u64, prec: u32) -> Result<Self> {
        let (r, r_conj) = qf.hensel_roots(ell, prec)?;
        Ok(SplitPlace { ell, prec, r, r_conj, modulus: BigInt::from(ell).pow(prec) })
    }

    /// (m, k) from the integer HNF (a, b, c). With v₁, v₂ the least valuations of
    /// the rows of [[r, 1], [r′, 1]]·H and v_d = v(det H), the tree distance to
    /// the apartment point of offset x is v_d − x − 2·min(v₁ − x, v₂), which is
    /// minimized exactly at x = v₁ − v₂.
    fn vertex(&self, a: &BigInt, b: &BigInt, c: &BigInt) -> SplitVertex {
        let vc = valuation(c, self.ell) as i64;
        let vd = valuation(a, self.ell) as i64 + vc;
        let row_val = |root: &BigInt| {
            let x = (a * root + b).mod_floor(&self.modulus);
            val_or(&x, self.ell, self.prec as i64).min(vc)
        };
        let (v1, v2) = (row_val(&self.r), row_val(&self.r_conj));
        SplitVertex { m: v1 - v2, k: (vd - v1 - v2) as u64 }
    }
}

pub fn local_vertex_split(qf: &QuadraticField, ell: u64, lattice: &Lattice) -> Result<SplitVertex> {
    require_kind(qf, ell, Splitting::Split)?;
    let (a, b, c) = lattice.hnf();
    let vd = (valuation(a, ell) + valuation(c, ell)) as u32;
    let prec = 2 * vd + 4;
    let first = SplitPlace::new(qf, ell, prec)?.vertex(a, b, c);
    let check = SplitPlace::new(qf, ell, 2 * prec)?.vertex(a, b, c);
    if first != check {
        return Err(Error::PrecisionInsufficient { ell });
    }
    Ok(first)
}

/// ψ on T_ℓ² for inert ℓ: zero on odd tiers, and on even tier 2j equal to
/// (−1/ℓ)^j·(−1)^{(a+b)/2}. This solves ψ(O) = 1, ψ(ℓO) = −1, ψ = 0 on tier 1
/// and ψ(t) = −ψ(v)/ℓ for v two steps inward on the opposite fiber.
pub fn psi_inert(field: &CoeffField, ell: u64, v: &InertVertex) -> Result<FieldElement> {
    let inv = field.inverse_of_prime(ell)?;
    let tier = v.tier();
    if tier % 2 == 1 {
        return Ok(field.zero());
    }
    let step = field.neg(&inv);
    let mut out = field.pow(&step, (tier / 2) as i64)?;
    if ((v.a + v.b) / 2) % 2 == 1 {
        out = field.neg(&out);
    }
    Ok(out)
}

/// a_k with a₀ = 1, a₁ = 0, a_k = (μ·a_{k−1} − a_{k−2})/ℓ.
pub fn theta_t_mu(field: &CoeffField, ell: u64, mu: &FieldElement, k: u64) -> Result<FieldElement> {
    Ok(theta_table(field, ell, mu, k)?.pop().expect("nonempty"))
}

/// a_0, …, a_k.
pub fn theta_table(field: &CoeffField, ell: u64, mu: &FieldElement, k: u64) -> Result<Vec<FieldElement>> {
    let inv = field.inverse_of_prime(ell)?;
    let mut out = vec![field.one(), field.zero()];
    while (out.len() as u64) <= k {
        let n = out.len();
        let next = field.mul(&field.sub(&field.mul(mu, &out[n - 1]), &out[n - 2]), &inv);
        out.push(next);
    }
    out.truncate(k as usize + 1);
    Ok(out)
}

/// ψ on T_ℓ for split ℓ: χ of the nearest idealistic vertex times a_k.
pub fn psi_split(field: &CoeffField, chi: &IdealCharacter, ell: u64, v: &SplitVertex) -> Result<FieldElement> {
    let lam = PrimeIdeal::new(ell, PrimeKind::SplitFirst);
    let mu = field.add(&chi.eval_prime(&lam)?, &chi.eval_prime(&lam.conjugate())?);
    let a = theta_t_mu(field, ell, &mu, v.k)?;
    let p = if v.m >= 0 { lam } else { lam.conjugate() };
    let c = field.pow(&chi.eval_prime(&p)?, v.m.abs())?;
    Ok(field.mul(&c, &a))
}

/// m′_L·ψ.
pub fn transform_hat(ctx: &ContextS, field: &CoeffField, psi: &FieldElement, lattice: &Lattice) -> Result<FieldElement> {
    let mp = ctx.m_prime(lattice)?;
    Ok(field.mul(&field.embed_integer(mp as i64), psi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    /// An edge of T_ℓ (n = 1); always counts as downhill for the Laplacian.
    Tree,
    DownhillOuter,
    DownhillInner,
    UphillOuter,
    UphillInner,
}

impl EdgeKind {
    pub fn is_downhill(self) -> bool {
        matches!(self, EdgeKind::Tree | EdgeKind::DownhillOuter | EdgeKind::DownhillInner)
    }
}

#[derive(Clone, Debug)]
pub struct PatchVertex {
    /// Primitive integral lattice of ℓ-power index; the vertex is ℓ^fiber times it.
    pub lattice: Lattice,
    pub fiber: u8,
    pub tier: u32,
    /// BFS distance from the base vertices.
    pub depth: u32,
    pub idealistic: bool,
}

impl PatchVertex {
    /// The representative ℓ^fiber·P.
    pub fn representative(&self, ell: u64) -> Lattice {
        if self.fiber == 0 {
            self.lattice.clone()
        } else {
            self.lattice.scale_rational(&BigRational::from_integer(BigInt::from(ell))).expect("nonzero")
        }
    }
}

/// A finite ball in T_ℓ^n around the base vertices.
#[derive(Clone, Debug)]
pub struct TreePatch {
    pub ell: u64,
    pub n: u8,
    pub radius: u32,
    pub vertices: Vec<PatchVertex>,
    pub edges: Vec<Vec<(usize, EdgeKind)>>,
}

/// Patches larger than this many vertices are refused.
pub const PATCH_VERTEX_CAP: u64 = 2_000_000;

fn tier_of(lattice: &Lattice, ell: u64) -> u32 {
    valuation(&lattice.index().to_integer(), ell)
}

/// Neighbors of ℓ^f·P in T_ℓ^n, as (primitive lattice, fiber, kind).
fn neighbors(p: &Lattice, fiber: u8, ell: u64, n: u8) -> Vec<(Lattice, u8, EdgeKind)> {
    let mut out = Vec::with_capacity(2 * ell as usize + 2);
    for sub in p.sublattices_index_ell(ell) {
        let (content, prim) = sub.primitive_part();
        let outer = content.is_one();
        if n == 1 {
            out.push((prim, 0, EdgeKind::Tree));
        } else if outer {
            out.push((prim.clone(), fiber, EdgeKind::DownhillOuter));
            out.push((prim, 1 - fiber, EdgeKind::UphillOuter));
        } else {
            out.push((prim.clone(), 1 - fiber, EdgeKind::DownhillInner));
            out.push((prim, fiber, EdgeKind::UphillInner));
        }
    }
    out
}

pub fn build_patch(qf: &QuadraticField, ell: u64, n: u8, radius: u32) -> Result<TreePatch> {
    if n != 1 && n != 2 {
        return Err(Error::Config(format!("tree n must be 1 or 2, got {n}")));
    }
    crate::quadfield::require_prime(ell)?;
    let geometric = (ell as f64).powi(radius as i32);
    let estimate = n as f64 * (1.0 + (ell as f64 + 1.0) * (geometric - 1.0) / (ell as f64 - 1.0));
    if estimate > PATCH_VERTEX_CAP as f64 {
        return Err(Error::Config(format!("patch at l = {ell}, radius {radius} exceeds {PATCH_VERTEX_CAP} vertices")));
    }
    let mut index: HashMap<(Lattice, u8), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut queue = VecDeque::new();
    for f in 0..n {
        let o = Lattice::unit();
        index.insert((o.clone(), f), vertices.len());
        queue.push_back(vertices.len());
        vertices.push(PatchVertex { lattice: o, fiber: f, tier: 0, depth: 0, idealistic: true });
    }
    let mut edges: Vec<Vec<(usize, EdgeKind)>> = vec![Vec::new(); n as usize];
    while let Some(i) = queue.pop_front() {
        let (lat, fiber, depth) = (vertices[i].lattice.clone(), vertices[i].fiber, vertices[i].depth);
        if depth == radius {
            continue;
        }
        for (nb, f, kind) in neighbors(&lat, fiber, ell, n) {
            let key = (nb, f);
            let j = match index.get(&key) {
                Some(&j) => j,
                None => {
                    let j = vertices.len();
                    let tier = tier_of(&key.0, ell);
                    let idealistic = key.0.is_idealistic(qf);
                    vertices.push(PatchVertex { lattice: key.0.clone(), fiber: key.1, tier, depth: depth + 1, idealistic });
                    edges.push(Vec::new());
                    index.insert(key, j);
                    queue.push_back(j);
                    j
                }
            };
            edges[i].push((j, kind));
        }
    }
    Ok(TreePatch { ell, n, radius, vertices, edges })
}

impl TreePatch {
    /// Vertices whose full neighborhood lies in the patch.
    pub fn is_interior(&self, i: usize) -> bool {
        self.vertices[i].depth < self.radius
    }

    pub fn downhill(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges[i].iter().filter(|(_, k)| k.is_downhill()).map(|&(j, _)| j)
    }

    /// ψ at every vertex: ψ_inert for inert ℓ, ψ_split for split ℓ.
    pub fn psi_values(&self, qf: &QuadraticField, field: &CoeffField, chi: &IdealCharacter) -> Result<Vec<FieldElement>> {
        let split = qf.splitting_type(self.ell) == Splitting::Split;
        self.vertices
            .iter()
            .map(|v| {
                let rep = v.representative(self.ell);
                if split {
                    psi_split(field, chi, self.ell, &local_vertex_split(qf, self.ell, &rep)?)
                } else {
                    psi_inert(field, self.ell, &local_vertex_inert(qf, self.ell, &rep)?)
                }
            })
            .collect()
    }

    /// Graphviz rendering; edges point downhill (to the index-ℓ sublattice).
    pub fn to_dot(&self, field: &CoeffField, values: Option<&[FieldElement]>) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph T_{}_{} {{", self.ell, self.n);
        let _ = writeln!(s, "  // l = {}, n = {}, radius = {}, vertices = {}", self.ell, self.n, self.radius, self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            let psi = values.map(|vals| format!("\\npsi={}", field.format(&vals[i]))).unwrap_or_default();
            let shape = if v.idealistic { "box" } else { "ellipse" };
            let _ = writeln!(
                s,
                "  v{i} [label=\"{}\\nfiber={} tier={}{psi}\", shape={shape}, tier={}, idealistic={}];",
                v.lattice, v.fiber, v.tier, v.tier, v.idealistic
            );
        }
        for (i, adj) in self.edges.iter().enumerate() {
            for &(j, kind) in adj {
                match kind {
                    EdgeKind::Tree if i < j => {
                        let _ = writeln!(s, "  v{i} -> v{j} [dir=none];");
                    }
                    EdgeKind::DownhillOuter | EdgeKind::DownhillInner => {
                        let style = if kind == EdgeKind::DownhillInner { "dashed" } else { "solid" };
                        let _ = writeln!(s, "  v{i} -> v{j} [style={style}];");
                    }
                    _ => {}
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LaplacianReport {
    pub ell: u64,
    pub n: u8,
    pub radius: u32,
    pub vertices_checked: u64,
    /// The first vertex where Σ_downhill ψ ≠ μ·ψ.
    pub violation: Option<String>,
}

impl LaplacianReport {
    pub fn pass(&self) -> bool {
        self.violation.is_none()
    }
}

/// Check Σ_{downhill w} ψ(w) = μ·ψ(v) at every interior vertex of the patch.
pub fn laplacian_check(patch: &TreePatch, field: &CoeffField, values: &[FieldElement], mu: &FieldElement) -> LaplacianReport {
    let mut checked = 0;
    let mut violation = None;
    for i in 0..patch.vertices.len() {
        if !patch.is_interior(i) {
            continue;
        }
        let sum = patch.downhill(i).fold(field.zero(), |acc, j| field.add(&acc, &values[j]));
        checked += 1;
        if sum != field.mul(mu, &values[i]) {
            let v = &patch.vertices[i];
            violation = Some(format!("vertex {i}: {} fiber {}", v.lattice, v.fiber));
            break;
        }
    }
    LaplacianReport { ell: patch.ell, n: patch.n, radius: patch.radius, vertices_checked: checked, violation }
}

// Streaming walkers over primitive integral HNF triples (a, b, c), used where
// the patches are too large to hold in memory.

pub type Triple = [i64; 3];

fn gcd3(t: &Triple) -> i64 {
    t[0].gcd(&t[1]).gcd(&t[2])
}

/// The ℓ+1 index-ℓ sublattices of a triple, each with its content (1 or ℓ).
pub fn sub_triples(t: &Triple, ell: i64) -> Vec<(Triple, i64)> {
    let [a, b, c] = *t;
    let mut out = Vec::with_capacity(ell as usize + 1);
    let first = [ell * a, (ell * b).rem_euclid(c), c];
    out.push((first, gcd3(&first)));
    for k in 0..ell {
        let s = [a, (b + k * c).rem_euclid(ell * c), ell * c];
        out.push((s, gcd3(&s)));
    }
    out
}

/// Does the triple lattice `outer` contain `inner`?
pub fn triple_contains(outer: &Triple, inner: &Triple) -> bool {
    let [a, b, c] = *outer;
    let in_lattice = |x: i64, y: i64| x % a == 0 && (y - (x / a) * b) % c == 0;
    in_lattice(inner[0], inner[1]) && in_lattice(0, inner[2])
}

fn val_i64(x: i64, ell: i64) -> u32 {
    debug_assert!(x != 0);
    let mut x = x;
    let mut v = 0;
    while x % ell == 0 {
        x /= ell;
        v += 1;
    }
    v
}

/// Inert vertex of ℓ^fiber times a triple lattice.
pub fn inert_vertex_of_triple(t: &Triple, fiber: u8, ell: i64) -> InertVertex {
    let (va, vc) = (val_i64(t[0], ell) as i64, val_i64(t[2], ell) as i64);
    let lo = if t[1] == 0 { va.min(vc) } else { va.min(vc).min(val_i64(t[1], ell) as i64) };
    InertVertex::from_valuations(lo + fiber as i64, va + vc - lo + fiber as i64)
}

/// Closed-form ψ on T_ℓ² tabulated by (a, b) for b ≤ `max_b`.
struct InertTable {
    rows: [Vec<FieldElement>; 2],
}

impl InertTable {
    fn new(field: &CoeffField, ell: u64, max_b: u32) -> Result<Self> {
        let row = |a: u32| -> Result<Vec<FieldElement>> {
            (0..=max_b)
                .map(|b| if b < a { Ok(field.zero()) } else { psi_inert(field, ell, &InertVertex { a, b }) })
                .collect()
        };
        Ok(InertTable { rows: [row(0)?, row(1)?] })
    }

    fn get(&self, v: &InertVertex) -> &FieldElement {
        &self.rows[v.a as usize][v.b as usize]
    }
}

/// Depth-first enumeration of the primitive lattices of tier ≤ `max_tier`.
/// The callback sees the path from O to the current lattice.
pub fn walk_primitive<F: FnMut(&[Triple]) -> Result<()>>(ell: u64, max_tier: usize, visit: &mut F) -> Result<()> {
    fn rec<F: FnMut(&[Triple]) -> Result<()>>(ell: i64, max: usize, path: &mut Vec<Triple>, visit: &mut F) -> Result<()> {
        visit(path)?;
        if path.len() > max {
            return Ok(());
        }
        let last = *path.last().expect("nonempty path");
        for (sub, content) in sub_triples(&last, ell) {
            if content == 1 {
                path.push(sub);
                rec(ell, max, path, visit)?;
                path.pop();
            }
        }
        Ok(())
    }
    let mut path = vec![[1, 0, 1]];
    rec(ell as i64, max_tier, &mut path, visit)
}

/// Laplacian check over the radius-R ball of T_ℓ² for inert ℓ (μ = 0),
/// without materializing it.
pub fn laplacian_walk_inert(field: &CoeffField, ell: u64, radius: u32) -> Result<LaplacianReport> {
    let l = ell as i64;
    let table = InertTable::new(field, ell, 2 * radius + 4)?;
    let psi = |t: &Triple, f: u8| -> Result<FieldElement> { Ok(table.get(&inert_vertex_of_triple(t, f, l)).clone()) };
    let mut checked = 0u64;
    let mut violation = None;
    if radius > 0 {
        walk_primitive(ell, radius as usize - 1, &mut |path: &[Triple]| {
            if violation.is_some() {
                return Ok(());
            }
            let p = path.last().expect("nonempty");
            for f in 0..2u8 {
                let mut sum = field.zero();
                for (sub, content) in sub_triples(p, l) {
                    let val = if content == 1 {
                        psi(&sub, f)?
                    } else {
                        let prim = [sub[0] / l, sub[1] / l, sub[2] / l];
                        psi(&prim, 1 - f)?
                    };
                    sum = field.add(&sum, &val);
                }
                checked += 1;
                if !field.is_zero(&sum) {
                    violation = Some(format!("{:?} fiber {f}", p));
                    break;
                }
            }
            Ok(())
        })?;
    }
    Ok(LaplacianReport { ell, n: 2, radius, vertices_checked: checked, violation })
}

/// Split-prime placement on i128 triples; valuations are capped by v(c), so a
/// precision above the largest v(c) in the walk is exact.
struct SplitPlace128 {
    ell: i128,
    modulus: i128,
    r: i128,
    r_conj: i128,
    prec: u32,
}

impl SplitPlace128 {
    fn new(qf: &QuadraticField, ell: u64, prec: u32) -> Result<Self> {
        let (r, rc) = qf.hensel_roots(ell, prec)?;
        let modulus = (ell as i128).checked_pow(prec).ok_or(Error::PrecisionInsufficient { ell })?;
        Ok(SplitPlace128 {
            ell: ell as i128,
            modulus,
            r: r.to_i128().expect("fits"),
            r_conj: rc.to_i128().expect("fits"),
            prec,
        })
    }

    fn vertex(&self, t: &Triple) -> SplitVertex {
        let val = |x: i128| {
            if x == 0 {
                return self.prec as i64;
            }
            let (mut x, mut v) = (x, 0i64);
            while x % self.ell == 0 {
                x /= self.ell;
                v += 1;
            }
            v
        };
        let (a, b, c) = (t[0] as i128, t[1] as i128, t[2] as i128);
        let vc = val(c);
        let vd = val(a) + vc;
        let row = |root: i128| val((a % self.modulus * root % self.modulus + b).rem_euclid(self.modulus)).min(vc);
        let (v1, v2) = (row(self.r), row(self.r_conj));
        SplitVertex { m: v1 - v2, k: (vd - v1 - v2) as u64 }
    }
}

/// Laplacian check over the radius-R ball of T_ℓ for split ℓ with μ = χ(λ)+χ(λ′).
pub fn laplacian_walk_split(
    qf: &QuadraticField,
    field: &CoeffField,
    chi: &IdealCharacter,
    ell: u64,
    radius: u32,
) -> Result<LaplacianReport> {
    require_kind(qf, ell, Splitting::Split)?;
    let l = ell as i64;
    // Walk lattices have v(c) ≤ radius; keep ℓ^prec·ℓ^radius well inside i128.
    let mut prec = radius + 2;
    while (ell as f64).powi((prec + radius + 2) as i32) > 1e36 {
        prec -= 1;
    }
    if prec <= radius {
        return Err(Error::PrecisionInsufficient { ell });
    }
    let place = SplitPlace128::new(qf, ell, prec)?;
    let mu = chi.mu(qf, ell)?;
    let lam = PrimeIdeal::new(ell, PrimeKind::SplitFirst);
    let (x1, x2) = (chi.eval_prime(&lam)?, chi.eval_prime(&lam.conjugate())?);
    let table = theta_table(field, ell, &mu, radius as u64 + 2)?;
    let psi = |t: &Triple| -> Result<FieldElement> {
        let v = place.vertex(t);
        let base = if v.m >= 0 { &x1 } else { &x2 };
        Ok(field.mul(&field.pow(base, v.m.abs())?, &table[v.k as usize]))
    };
    let mut checked = 0u64;
    let mut violation = None;
    if radius > 0 {
        walk_primitive(ell, radius as usize - 1, &mut |path: &[Triple]| {
            if violation.is_some() {
                return Ok(());
            }
            let p = path.last().expect("nonempty");
            let mut sum = field.zero();
            for (sub, _) in sub_triples(p, l) {
                sum = field.add(&sum, &psi(&sub)?);
            }
            checked += 1;
            if sum != field.mul(&mu, &psi(p)?) {
                violation = Some(format!("{:?}", p));
            }
            Ok(())
        })?;
    }
    Ok(LaplacianReport { ell, n: 1, radius, vertices_checked: checked, violation })
}

#[derive(Clone, Debug, Serialize)]
pub struct RecursionReport {
    pub ell: u64,
    pub radius: u32,
    pub vertices_checked: u64,
    pub mismatch: Option<String>,
}

impl RecursionReport {
    pub fn pass(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Rebuild ψ on T_ℓ² tier by tier from the defining recursion (seeds 1, −1 at
/// tier 0, zero on tier 1, ψ(t) = −ψ(v)/ℓ where v is reached by the uphill-inner
/// then downhill-inner step) and compare with the closed form at every vertex
/// of the radius-R ball.
pub fn recursion_oracle_inert(field: &CoeffField, ell: u64, radius: u32) -> Result<RecursionReport> {
    let l = ell as i64;
    let inv = field.inverse_of_prime(ell)?;
    let minus_inv = field.neg(&inv);
    let table = InertTable::new(field, ell, 2 * radius + 4)?;
    let mut stack: Vec<[FieldElement; 2]> = Vec::new();
    let mut checked = 0u64;
    let mut mismatch = None;
    walk_primitive(ell, radius as usize, &mut |path: &[Triple]| {
        let depth = path.len() - 1;
        stack.truncate(depth);
        let values: [FieldElement; 2] = match depth {
            0 => [field.one(), field.neg(&field.one())],
            1 => [field.zero(), field.zero()],
            _ => {
                let (p, parent, grand) = (&path[depth], &path[depth - 1], &path[depth - 2]);
                // uphill-inner of (P, f) is (parent, f); its downhill-inner is
                // (grandparent, f + 1), i.e. ℓ·grandparent ⊂ parent with index ℓ.
                let scaled = [grand[0] * l, grand[1] * l, grand[2] * l];
                let related = triple_contains(parent, p)
                    && triple_contains(parent, &scaled)
                    && parent[0] * parent[2] * l == scaled[0] * scaled[2];
                if !related {
                    return Err(Error::Decomposition {
                        ell,
                        lattice: format!("{p:?}"),
                        reason: "walk path violates the inner-neighbor relations".into(),
                    });
                }
                let g = &stack[depth - 2];
                [field.mul(&minus_inv, &g[1]), field.mul(&minus_inv, &g[0])]
            }
        };
        let p = &path[depth];
        for f in 0..2u8 {
            checked += 1;
            let closed = table.get(&inert_vertex_of_triple(p, f, l));
            if mismatch.is_none() && *closed != values[f as usize] {
                mismatch = Some(format!("{p:?} fiber {f}"));
            }
        }
        stack.push(values);
        Ok(())
    })?;
    Ok(RecursionReport { ell, radius, vertices_checked: checked, mismatch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classchar::ClassGroup;
    use std::sync::Arc;

    fn setup() -> (QuadraticField, CoeffField, IdealCharacter) {
        let qf = QuadraticField::new(229).unwrap();
        let f7 = CoeffField::prime(7).unwrap();
        let g = Arc::new(ClassGroup::compute(&qf).unwrap());
        let chi = IdealCharacter::from_class_group(g, 3, &f7).unwrap();
        (qf, f7, chi)
    }

    #[test]
    fn inert_vertex_examples() {
        let qf = QuadraticField::new(229).unwrap();
        let o = Lattice::unit();
        assert_eq!(local_vertex_inert(&qf, 13, &o).unwrap(), InertVertex { a: 0, b: 0 });
        let o13 = o.scale_rational(&BigRational::from_integer(13.into())).unwrap();
        assert_eq!(local_vertex_inert(&qf, 13, &o13).unwrap(), InertVertex { a: 1, b: 1 });
        let thin = Lattice::from_hnf(13, 0, 1);
        let v = local_vertex_inert(&qf, 13, &thin).unwrap();
        assert_eq!((v, v.tier()), (InertVertex { a: 0, b: 1 }, 1));
    }

    #[test]
    fn psi_inert_examples() {
        let f7 = CoeffField::prime(7).unwrap();
        let p = |a, b| psi_inert(&f7, 13, &InertVertex { a, b }).unwrap();
        assert_eq!(p(0, 0), f7.one());
        assert_eq!(p(1, 1), f7.neg(&f7.one()));
        assert_eq!(p(0, 1), f7.zero());
        // −ψ(ℓO)/ℓ = 1/13 = 1/6 = 6 in F₇
        assert_eq!(p(0, 2), f7.inverse_of_prime(13).unwrap());
        assert!(psi_inert(&f7, 7, &InertVertex { a: 0, b: 0 }).is_err());
    }

    #[test]
    fn theta_examples() {
        let f7 = CoeffField::prime(7).unwrap();
        let mu = f7.embed_integer(3);
        assert_eq!(theta_t_mu(&f7, 3, &mu, 0).unwrap(), f7.one());
        assert_eq!(theta_t_mu(&f7, 3, &mu, 1).unwrap(), f7.zero());
        let expect = f7.neg(&f7.inverse_of_prime(3).unwrap());
        assert_eq!(theta_t_mu(&f7, 3, &mu, 2).unwrap(), expect);
    }

    #[test]
    fn split_vertex_examples() {
        let (qf, f7, chi) = setup();
        assert_eq!(local_vertex_split(&qf, 3, &Lattice::unit()).unwrap(), SplitVertex { m: 0, k: 0 });
        let lam = Lattice::prime_ideal(&qf, &PrimeIdeal::new(3, PrimeKind::SplitFirst));
        assert_eq!(local_vertex_split(&qf, 3, &lam).unwrap(), SplitVertex { m: 1, k: 0 });
        let lam2 = Lattice::prime_ideal(&qf, &PrimeIdeal::new(3, PrimeKind::SplitSecond));
        assert_eq!(local_vertex_split(&qf, 3, &lam2).unwrap(), SplitVertex { m: -1, k: 0 });
        let thin = Lattice::from_hnf(3, 0, 1);
        let v = local_vertex_split(&qf, 3, &thin).unwrap();
        assert_eq!(v.k, 1);
        assert!(v.m.abs() <= 1);
        assert_eq!(psi_split(&f7, &chi, 3, &SplitVertex { m: 0, k: 0 }).unwrap(), f7.one());
        assert_eq!(psi_split(&f7, &chi, 3, &SplitVertex { m: 5, k: 1 }).unwrap(), f7.zero());
        let c = chi.eval_prime(&PrimeIdeal::new(3, PrimeKind::SplitFirst)).unwrap();
        assert_eq!(psi_split(&f7, &chi, 3, &SplitVertex { m: 2, k: 0 }).unwrap(), f7.mul(&c, &c));
    }

    #[test]
    fn patch_counts() {
        let qf = QuadraticField::new(229).unwrap();
        let t1 = build_patch(&qf, 2, 1, 1).unwrap();
        assert_eq!(t1.vertices.len(), 4);
        for r in 0..5u32 {
            let p = build_patch(&qf, 3, 1, r).unwrap();
            let expect = 1 + 4 * (3u64.pow(r) - 1) / 2;
            assert_eq!(p.vertices.len() as u64, expect);
        }
        let t2 = build_patch(&qf, 2, 2, 1).unwrap();
        assert_eq!(t2.vertices.iter().filter(|v| v.tier == 0).count(), 2);
        for i in 0..2 {
            let down = t2.edges[i].iter().filter(|(_, k)| k.is_downhill()).count();
            let up = t2.edges[i].len() - down;
            assert_eq!((down, up), (3, 3));
        }
    }

    #[test]
    fn patch_degrees_at_positive_tier() {
        let qf = QuadraticField::new(229).unwrap();
        let p = build_patch(&qf, 2, 2, 3).unwrap();
        for (i, v) in p.vertices.iter().enumerate() {
            if v.tier == 0 || !p.is_interior(i) {
                continue;
            }
            let count = |kind| p.edges[i].iter().filter(|(_, k)| *k == kind).count();
            assert_eq!(count(EdgeKind::DownhillOuter), 2);
            assert_eq!(count(EdgeKind::DownhillInner), 1);
            assert_eq!(count(EdgeKind::UphillOuter), 2);
            assert_eq!(count(EdgeKind::UphillInner), 1);
        }
    }

    #[test]
    fn laplacian_on_small_patches() {
        let (qf, f7, chi) = setup();
        for ell in [2u64, 13] {
            let patch = build_patch(&qf, ell, 2, 3).unwrap();
            let vals = patch.psi_values(&qf, &f7, &chi).unwrap();
            assert!(laplacian_check(&patch, &f7, &vals, &f7.zero()).pass(), "l = {ell}");
        }
        let patch = build_patch(&qf, 3, 1, 4).unwrap();
        let vals = patch.psi_values(&qf, &f7, &chi).unwrap();
        let mu = chi.mu(&qf, 3).unwrap();
        assert!(laplacian_check(&patch, &f7, &vals, &mu).pass());
    }

    #[test]
    fn perturbation_is_caught_at_the_parent() {
        let (qf, f7, chi) = setup();
        let patch = build_patch(&qf, 3, 1, 3).unwrap();
        let mut vals = patch.psi_values(&qf, &f7, &chi).unwrap();
        let target = patch.vertices.iter().position(|v| v.tier == 2).unwrap();
        vals[target] = f7.add(&vals[target], &f7.one());
        let mu = chi.mu(&qf, 3).unwrap();
        let report = laplacian_check(&patch, &f7, &vals, &mu);
        let bad: usize = report.violation.unwrap().split(':').next().unwrap()[7..].parse().unwrap();
        assert!(patch.downhill(bad).any(|j| j == target));
    }

    #[test]
    fn walkers_agree_with_patches() {
        let (qf, f7, chi) = setup();
        let w = laplacian_walk_inert(&f7, 13, 3).unwrap();
        assert!(w.pass());
        assert_eq!(w.vertices_checked, 2 * (1 + 14 * (13 * 13 - 1) / 12));
        assert!(laplacian_walk_split(&qf, &f7, &chi, 5, 4).unwrap().pass());
        assert!(recursion_oracle_inert(&f7, 2, 6).unwrap().pass());
    }
}
