//! Graded `W_π`-modules supported on a coset `Γ = β + π(Λ)`.
//!
//! Modules are intensional: a module knows the fiber dimension of each
//! component and the matrix of `L_λ` from component `k` to component `k+λ`.
//! Vectors are finitely supported, so actions are exact everywhere and no
//! truncation is involved; [`Window`]s only bound searches and spans.
//!
//! `ℳⁿ(Γ)` stores the fiber `S^nV` against the symbol `L_μ`, `μ ∈ Γ`, with
//!
//! ```text
//! L_λ(L_μ ⊗ u) = ⟨λ+ρ, μ+ρ⟩ L_{λ+μ} ⊗ u + ½ L_{λ+μ} ⊗ {λ(λ+ρ), u}
//! ```
//!
//! and `𝒜_π` acting by `L_{λ−ρ}(L_μ ⊗ u) = L_{λ+μ} ⊗ u`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::enveloping::UElement;
use crate::error::{Error, Result};
use crate::lattice::{parse_cvec2, Coset, LatticeEmbedding, LatticePoint};
use crate::linalg::{Matrix, Subspace};
use crate::poisson::{ad_matrix, poly_bracket, s_product, PolyV, SymbolElement};
use crate::scalars::{rho, symplectic, CVec2, Gauss};

/// A finitely supported vector: lattice coordinate `k` ↦ fiber coordinates.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct ModuleVector {
    comps: BTreeMap<LatticePoint, Vec<Gauss>>,
}

impl ModuleVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn component_vector(k: LatticePoint, v: Vec<Gauss>) -> Self {
        let mut out = Self::zero();
        out.add_component(k, &v);
        out
    }

    /// The `j`-th basis vector of a `dim`-dimensional fiber at `k`.
    pub fn basis(k: LatticePoint, j: usize, dim: usize) -> Self {
        let mut v = vec![Gauss::zero(); dim];
        v[j] = Gauss::one();
        Self::component_vector(k, v)
    }

    pub fn add_component(&mut self, k: LatticePoint, v: &[Gauss]) {
        if v.iter().all(Zero::is_zero) {
            return;
        }
        match self.comps.get_mut(&k) {
            Some(cur) => {
                assert_eq!(cur.len(), v.len(), "fiber dimension mismatch at {k}");
                for (a, b) in cur.iter_mut().zip(v) {
                    *a += b;
                }
                if cur.iter().all(Zero::is_zero) {
                    self.comps.remove(&k);
                }
            }
            None => {
                self.comps.insert(k, v.to_vec());
            }
        }
    }

    pub fn components(&self) -> impl Iterator<Item = (&LatticePoint, &Vec<Gauss>)> {
        self.comps.iter()
    }

    pub fn component(&self, k: &LatticePoint) -> Option<&Vec<Gauss>> {
        self.comps.get(k)
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.comps {
            out.add_component(k.clone(), v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Gauss::one()))
    }

    pub fn scale(&self, c: &Gauss) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.comps {
            let w: Vec<Gauss> = v.iter().map(|x| x * c).collect();
            out.add_component(k.clone(), &w);
        }
        out
    }

    /// Moves component `k` to `k + λ` without touching fibers.
    pub fn shift(&self, lambda: &LatticePoint) -> Self {
        ModuleVector {
            comps: self
                .comps
                .iter()
                .map(|(k, v)| (k + lambda, v.clone()))
                .collect(),
        }
    }
}

impl fmt::Debug for ModuleVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.comps.iter()).finish()
    }
}

/// Anything with a graded `W_π`-action given componentwise by matrices.
pub trait GradedAction: Send + Sync {
    fn embedding(&self) -> &LatticeEmbedding;

    /// Weight of the component with coordinate `0`.
    fn base(&self) -> &CVec2;

    fn fiber_dim(&self, k: &LatticePoint) -> usize;

    /// Matrix of `L_λ` from component `k` to component `k + λ`.
    fn act_matrix(&self, lambda: &LatticePoint, k: &LatticePoint) -> Matrix;

    fn label(&self) -> String;

    fn weight(&self, k: &LatticePoint) -> CVec2 {
        self.base() + &self.embedding().embed(k)
    }

    fn rank(&self) -> usize {
        self.embedding().rank()
    }
}

/// `L_λ . v`.
pub fn act_v<M: GradedAction + ?Sized>(m: &M, lambda: &LatticePoint, v: &ModuleVector) -> ModuleVector {
    let mut out = ModuleVector::zero();
    for (k, x) in v.components() {
        let y = m.act_matrix(lambda, k).apply(x);
        out.add_component(k + lambda, &y);
    }
    out
}

/// Action of a PBW element: each word acts letter by letter, rightmost first.
pub fn act_u<M: GradedAction + ?Sized>(m: &M, u: &UElement, v: &ModuleVector) -> ModuleVector {
    let mut out = ModuleVector::zero();
    for (w, c) in u.terms() {
        let mut cur = v.clone();
        for letter in w.0.iter().rev() {
            cur = act_v(m, letter, &cur);
            if cur.is_zero() {
                break;
            }
        }
        out = out.add(&cur.scale(c));
    }
    out
}

/// `[L_λ, L_μ] − ⟨λ+ρ, μ+ρ⟩ L_{λ+μ}` as a matrix from component `k`.
pub fn action_law_residual<M: GradedAction + ?Sized>(
    m: &M,
    lambda: &LatticePoint,
    mu: &LatticePoint,
    k: &LatticePoint,
) -> Matrix {
    let lm = &m.act_matrix(lambda, &(k + mu)) * &m.act_matrix(mu, k);
    let ml = &m.act_matrix(mu, &(k + lambda)) * &m.act_matrix(lambda, k);
    let c = m.embedding().bracket_coeff(lambda, mu);
    let s = m.act_matrix(&(lambda + mu), k).scale(&c);
    &(&lm - &ml) - &s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "n", rename_all = "lowercase")]
pub enum ModuleKind {
    /// `𝒮_Γ`, fiber ℂ.
    SGamma,
    /// `ℳⁿ(Γ)`, fiber `S^nV`.
    Mn(u32),
}

/// `𝒮_Γ` or `ℳⁿ(Γ)`; both are `𝒜𝒱_π`-modules.
pub struct GradedModuleSpec {
    pub kind: ModuleKind,
    pub coset: Coset,
    // ½·ad(λ(λ+ρ)) on S^nV, cached per λ
    cocycle: DashMap<LatticePoint, Arc<Matrix>>,
}

impl Clone for GradedModuleSpec {
    fn clone(&self) -> Self {
        Self::new(self.kind, self.coset.clone())
    }
}

impl fmt::Debug for GradedModuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl GradedModuleSpec {
    pub fn new(kind: ModuleKind, coset: Coset) -> Self {
        GradedModuleSpec {
            kind,
            coset,
            cocycle: DashMap::new(),
        }
    }

    pub fn sgamma(base: CVec2, e: Arc<LatticeEmbedding>) -> Self {
        Self::new(ModuleKind::SGamma, Coset::new(base, e))
    }

    pub fn mn(n: u32, base: CVec2, e: Arc<LatticeEmbedding>) -> Self {
        Self::new(ModuleKind::Mn(n), Coset::new(base, e))
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            ModuleKind::SGamma => 1,
            ModuleKind::Mn(n) => n as usize + 1,
        }
    }

    pub fn embedding_arc(&self) -> &Arc<LatticeEmbedding> {
        &self.coset.embedding
    }

    /// `½·ad(λ(λ+ρ))` on the fiber (zero for `𝒮_Γ` and `ℳ⁰`).
    pub fn cocycle_matrix(&self, lambda: &LatticePoint) -> Arc<Matrix> {
        if let Some(hit) = self.cocycle.get(lambda) {
            return hit.clone();
        }
        let m = match self.kind {
            ModuleKind::SGamma => Matrix::zeros(1, 1),
            ModuleKind::Mn(n) => {
                let l = self.coset.embedding.embed(lambda);
                let q = PolyV::from_vec(&l).mul(&PolyV::from_vec(&(&l + &rho())));
                ad_matrix(&q, n).scale(&Gauss::half())
            }
        };
        let m = Arc::new(m);
        self.cocycle.insert(lambda.clone(), m.clone());
        m
    }

    /// `L_{λ−ρ} . v` (the `𝒜_π`-action): shift by `λ`.
    pub fn act_a(&self, lambda: &LatticePoint, v: &ModuleVector) -> ModuleVector {
        v.shift(lambda)
    }

    /// `L_λ L^𝒜_{μ−ρ} − L^𝒜_{{L_λ, L_{μ−ρ}}} − L^𝒜_{μ−ρ} L_λ` applied to `v`.
    pub fn av_compatibility_residual(
        &self,
        lambda: &LatticePoint,
        mu: &LatticePoint,
        v: &ModuleVector,
    ) -> ModuleVector {
        let e = &self.coset.embedding;
        let lhs = act_v(self, lambda, &self.act_a(mu, v));
        // {L_λ, L_{μ−ρ}} = ⟨λ+ρ, μ⟩ L_{λ+μ−ρ}
        let c = e.pair(lambda, mu) + e.rho_pair(mu);
        let mid = self.act_a(&(lambda + mu), v).scale(&c);
        let rhs = self.act_a(mu, &act_v(self, lambda, v));
        lhs.sub(&mid).sub(&rhs)
    }

    /// Fiber at `k` as a polynomial (for `ℳⁿ`) — used by the vector dump.
    pub fn fiber_poly(&self, v: &[Gauss]) -> PolyV {
        PolyV::from_coords(v)
    }

    /// `[{point, fiber}]` with scalar or polynomial fibers.
    pub fn dump(&self, v: &ModuleVector) -> serde_json::Value {
        let items: Vec<serde_json::Value> = v
            .components()
            .map(|(k, x)| {
                let fiber = match self.kind {
                    ModuleKind::SGamma => x[0].to_string(),
                    ModuleKind::Mn(_) => self.fiber_poly(x).to_string(),
                };
                serde_json::json!({ "point": k, "fiber": fiber })
            })
            .collect();
        serde_json::Value::Array(items)
    }

    /// Parses `{ "kind": "sgamma"|"mn", "n"?: int, "beta": [gauss, gauss] }`.
    pub fn from_json(text: &str, e: Arc<LatticeEmbedding>) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|err| Error::Config(err.to_string()))?;
        let beta = parse_cvec2(
            v.get("beta")
                .ok_or_else(|| Error::Config("missing field `beta`".into()))?,
        )?;
        let kind = match v.get("kind").and_then(serde_json::Value::as_str) {
            Some("sgamma") => ModuleKind::SGamma,
            Some("mn") => {
                let n = v
                    .get("n")
                    .and_then(serde_json::Value::as_u64)
                    .ok_or_else(|| Error::Config("kind `mn` needs a nonnegative integer `n`".into()))?;
                ModuleKind::Mn(n as u32)
            }
            Some(other) => return Err(Error::Config(format!("unknown module kind `{other}`"))),
            None => return Err(Error::Config("missing string field `kind`".into())),
        };
        Ok(Self::new(kind, Coset::new(beta, e)))
    }
}

impl GradedAction for GradedModuleSpec {
    fn embedding(&self) -> &LatticeEmbedding {
        &self.coset.embedding
    }

    fn base(&self) -> &CVec2 {
        &self.coset.base
    }

    fn fiber_dim(&self, _k: &LatticePoint) -> usize {
        self.dim()
    }

    fn act_matrix(&self, lambda: &LatticePoint, k: &LatticePoint) -> Matrix {
        let e = self.embedding();
        let mu = self.weight(k);
        let c = symplectic(&(&e.embed(lambda) + &rho()), &(&mu + &rho()));
        let scalar = Matrix::scalar(self.dim(), &c);
        match self.kind {
            ModuleKind::SGamma => scalar,
            ModuleKind::Mn(_) => &scalar + &self.cocycle_matrix(lambda),
        }
    }

    fn label(&self) -> String {
        match self.kind {
            ModuleKind::SGamma => format!("S_Γ, Γ = {} + π(Λ)", self.coset.base),
            ModuleKind::Mn(n) => format!("M^{n}(Γ), Γ = {} + π(Λ)", self.coset.base),
        }
    }
}

/// The quotient `𝒮_{−ρ+π(Λ)} / ℂL_{−ρ}`: component `0` is removed.
pub struct MBar {
    emb: Arc<LatticeEmbedding>,
    base: CVec2,
}

impl MBar {
    pub fn new(emb: Arc<LatticeEmbedding>) -> Self {
        MBar { emb, base: -rho() }
    }
}

/// The submodule of `𝒮_{−2ρ+π(Λ)}` spanned by all `L_μ`, `μ ≠ −2ρ`.
pub struct MBarDual {
    emb: Arc<LatticeEmbedding>,
    base: CVec2,
}

impl MBarDual {
    pub fn new(emb: Arc<LatticeEmbedding>) -> Self {
        MBarDual {
            emb,
            base: rho().scale_int(-2),
        }
    }
}

/// The one-dimensional trivial module `ℂL_{−ρ}`.
pub struct Trivial {
    emb: Arc<LatticeEmbedding>,
    base: CVec2,
}

impl Trivial {
    pub fn new(emb: Arc<LatticeEmbedding>) -> Self {
        Trivial { emb, base: -rho() }
    }
}

fn punctured_action<M: GradedAction + ?Sized>(m: &M, lambda: &LatticePoint, k: &LatticePoint) -> Matrix {
    let (src, dst) = (m.fiber_dim(k), m.fiber_dim(&(k + lambda)));
    if src == 0 || dst == 0 {
        return Matrix::zeros(dst, src);
    }
    let e = m.embedding();
    let c = symplectic(&(&e.embed(lambda) + &rho()), &(&m.weight(k) + &rho()));
    Matrix::scalar(1, &c)
}

macro_rules! fixture_impl {
    ($ty:ty, $label:expr, $dim:expr, $act:expr) => {
        impl GradedAction for $ty {
            fn embedding(&self) -> &LatticeEmbedding {
                &self.emb
            }
            fn base(&self) -> &CVec2 {
                &self.base
            }
            fn fiber_dim(&self, k: &LatticePoint) -> usize {
                $dim(k)
            }
            fn act_matrix(&self, lambda: &LatticePoint, k: &LatticePoint) -> Matrix {
                $act(self, lambda, k)
            }
            fn label(&self) -> String {
                $label.to_string()
            }
        }
    };
}

fixture_impl!(MBar, "S_{-ρ+π(Λ)}/CL_{-ρ}", |k: &LatticePoint| usize::from(!k.is_zero()), punctured_action);
fixture_impl!(MBarDual, "restricted dual of S_{-ρ+π(Λ)}/CL_{-ρ}", |k: &LatticePoint| usize::from(!k.is_zero()), punctured_action);
fixture_impl!(Trivial, "CL_{-ρ}", |k: &LatticePoint| usize::from(k.is_zero()), |m: &Trivial, l: &LatticePoint, k: &LatticePoint| {
    Matrix::zeros(m.fiber_dim(&(k + l)), m.fiber_dim(k))
});

/// A coordinate box `lo ≤ k ≤ hi` in `ℤ^N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Window {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl Window {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(a, b)| a <= b), "empty window");
        Window { lo, hi }
    }

    /// The box of radius `r` around `center`.
    pub fn around(center: &LatticePoint, r: i64) -> Self {
        Window::new(
            center.0.iter().map(|c| c - r).collect(),
            center.0.iter().map(|c| c + r).collect(),
        )
    }

    pub fn radius(n: usize, r: i64) -> Self {
        Self::around(&LatticePoint::zero(n), r)
    }

    pub fn points(&self) -> Vec<LatticePoint> {
        LatticePoint::box_points_between(&self.lo, &self.hi)
    }

    pub fn contains(&self, k: &LatticePoint) -> bool {
        k.0.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(c, (a, b))| a <= c && c <= b)
    }

    /// Points `k` with `k + λ` inside the window for every probe `λ`.
    pub fn interior(&self, probes: &[LatticePoint]) -> Vec<LatticePoint> {
        self.points()
            .into_iter()
            .filter(|k| probes.iter().all(|l| self.contains(&(k + l))))
            .collect()
    }

    pub fn grow(&self, by: i64) -> Self {
        Window::new(
            self.lo.iter().map(|c| c - by).collect(),
            self.hi.iter().map(|c| c + by).collect(),
        )
    }
}

/// A graded subspace of a window: one subspace per component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowSpan {
    pub spaces: BTreeMap<LatticePoint, Subspace>,
}

impl WindowSpan {
    pub fn dim_at(&self, k: &LatticePoint) -> usize {
        self.spaces.get(k).map_or(0, Subspace::dim)
    }

    pub fn total_dim(&self) -> usize {
        self.spaces.values().map(Subspace::dim).sum()
    }

    pub fn contains(&self, v: &ModuleVector) -> bool {
        v.components().all(|(k, x)| self.spaces.get(k).is_some_and(|s| s.contains(x)))
    }

    pub fn support(&self) -> Vec<LatticePoint> {
        self.spaces
            .iter()
            .filter(|(_, s)| s.dim() > 0)
            .map(|(k, _)| k.clone())
            .collect()
    }
}

/// Smallest graded subspace of the window containing `seed` and closed under
/// every `L_λ` whose source and target components both lie in the window.
pub fn submodule_window_span<M: GradedAction + ?Sized>(
    m: &M,
    seed: &ModuleVector,
    w: &Window,
) -> WindowSpan {
    let pts = w.points();
    let mut spaces: BTreeMap<LatticePoint, Subspace> = pts
        .iter()
        .map(|k| (k.clone(), Subspace::new(m.fiber_dim(k))))
        .collect();
    let mut queue: Vec<(LatticePoint, Vec<Gauss>)> = Vec::new();
    for (k, x) in seed.components() {
        assert!(w.contains(k), "seed component {k} outside the window");
        if spaces.get_mut(k).expect("in window").insert(x) {
            queue.push((k.clone(), x.clone()));
        }
    }
    while let Some((k, x)) = queue.pop() {
        for t in &pts {
            if m.fiber_dim(t) == 0 {
                continue;
            }
            let lambda = t - &k;
            let y = m.act_matrix(&lambda, &k).apply(&x);
            if y.iter().all(Zero::is_zero) {
                continue;
            }
            if spaces.get_mut(t).expect("in window").insert(&y) {
                queue.push((t.clone(), y));
            }
        }
    }
    WindowSpan { spaces }
}

/// Invariance of the pairing `𝒮_{β+π(Λ)} × 𝒮_{−β−3ρ+π(Λ)} → ℂ`: with weights
/// `μ_w = β + π(μ)`, `ν_w = −β−3ρ + π(ν)` and `λ + μ + ν = 0` returns
/// `⟨λ+ρ, μ_w+ρ⟩ + ⟨λ+ρ, ν_w+ρ⟩`.
pub fn dual_pairing_invariance(
    e: &LatticeEmbedding,
    beta: &CVec2,
    lambda: &LatticePoint,
    mu: &LatticePoint,
    nu: &LatticePoint,
) -> Result<Gauss> {
    if !(&(lambda + mu) + nu).is_zero() {
        return Err(Error::Config("dual pairing needs λ + μ + ν = 0".into()));
    }
    let r = rho();
    let lr = &e.embed(lambda) + &r;
    let mu_w = beta + &e.embed(mu);
    let nu_w = &(&-beta - &r.scale_int(3)) + &e.embed(nu);
    Ok(symplectic(&lr, &(&mu_w + &r)) + symplectic(&lr, &(&nu_w + &r)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct M1SequenceReport {
    pub embed_ok: bool,
    pub quotient_ok: bool,
    pub exact: bool,
    pub splits: bool,
    pub window: Window,
    /// The stored-convention base of `ℳ¹` that was tested.
    pub stored_base: String,
}

/// The vector attached to `L_κ` by the embedding `𝒮 → ℳ¹`: `κ + ρ + s·ρ`,
/// with `s = ½` for the genuine map.
fn m1_embed_vector(kappa: &CVec2, shift: &Gauss) -> PolyV {
    PolyV::from_vec(&(&(kappa + &rho()) + &rho().scale(shift)))
}

/// Checks the sequence `0 → 𝒮_{Γ'+½ρ} → ℳ¹ → 𝒮_{Γ'−½ρ} → 0` on the window,
/// where `Γ'` is the stored coset of `ℳ¹` (fibers at `L_κ`, `κ ∈ Γ'`). The
/// embedding sends `L_{κ+½ρ}` to `L_κ ⊗ (κ + ρ + s·ρ)` (`s = embed_shift`,
/// ½ for the genuine map) and the quotient sends `L_κ ⊗ v` to
/// `⟨κ + 3/2ρ, v⟩ L_{κ−½ρ}`.
///
/// `splits` is decided by solving exactly for a graded section
/// `L_{κ−½ρ} ↦ L_κ ⊗ w_κ` of the quotient that intertwines every `L_λ`
/// with source and target in the window.
pub fn m1_sequence_check(stored: &Coset, w: &Window, embed_shift: &Gauss) -> M1SequenceReport {
    let m1 = GradedModuleSpec::new(ModuleKind::Mn(1), stored.clone());
    let e = stored.embedding.clone();
    let r = rho();
    let half = Gauss::half();
    let three_half = Gauss::rat(3, 2);
    let pts = w.points();
    let mut embed_ok = true;
    let mut quotient_ok = true;
    let mut exact = true;

    for k in &pts {
        let kappa = stored.point(k);
        let emb_k = m1_embed_vector(&kappa, embed_shift);
        let q_k = &kappa + &r.scale(&three_half);
        // quotient ∘ embed = 0
        let qe = symplectic(&q_k, &vec_of(&emb_k));
        exact &= qe.is_zero();
        for t in &pts {
            let lambda = t - k;
            let l = e.embed(&lambda);
            // embed intertwines: L_λ·L_{κ+½ρ} = ⟨λ+ρ, κ+3/2ρ⟩ L_{κ+λ+½ρ}
            let src = ModuleVector::component_vector(k.clone(), emb_k.to_coords(1));
            let got = act_v(&m1, &lambda, &src);
            let c = symplectic(&(&l + &r), &(&kappa + &r.scale(&three_half)));
            let kappa_t = stored.point(t);
            let want = ModuleVector::component_vector(
                t.clone(),
                m1_embed_vector(&kappa_t, embed_shift).to_coords(1),
            )
            .scale(&c);
            embed_ok &= got == want;

            // quotient intertwines on both basis vectors of the fiber
            for j in 0..2 {
                let b = ModuleVector::basis(k.clone(), j, 2);
                let image = act_v(&m1, &lambda, &b);
                let lhs = image
                    .component(t)
                    .map(|y| symplectic(&(&kappa_t + &r.scale(&three_half)), &vec_of(&PolyV::from_coords(y))))
                    .unwrap_or_else(Gauss::zero);
                let qv = symplectic(&q_k, &vec_of(&PolyV::sn_basis(1, j as u32)));
                // L_λ · L_{κ−½ρ} = ⟨λ+ρ, κ+½ρ⟩ L_{κ+λ−½ρ}
                let rhs = qv * symplectic(&(&l + &r), &(&kappa + &r.scale(&half)));
                quotient_ok &= lhs == rhs;
            }
        }
    }

    let splits = m1_section_exists(&m1, stored, &pts);
    M1SequenceReport {
        embed_ok,
        quotient_ok,
        exact,
        splits,
        window: w.clone(),
        stored_base: stored.base.to_string(),
    }
}

fn vec_of(p: &PolyV) -> CVec2 {
    CVec2::new(p.coeff(1, 0), p.coeff(0, 1))
}

/// Exact linear search for a graded section of the quotient map on `pts`.
fn m1_section_exists(m1: &GradedModuleSpec, stored: &Coset, pts: &[LatticePoint]) -> bool {
    let e = &stored.embedding;
    let r = rho();
    let idx: BTreeMap<&LatticePoint, usize> = pts.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let n = 2 * pts.len();
    let mut rows: Vec<Vec<Gauss>> = Vec::new();
    let mut rhs: Vec<Gauss> = Vec::new();
    for (i, k) in pts.iter().enumerate() {
        let kappa = stored.point(k);
        // ⟨κ + 3/2ρ, w_κ⟩ = 1
        let q = &kappa + &r.scale(&Gauss::rat(3, 2));
        let mut row = vec![Gauss::zero(); n];
        row[2 * i] = -&q.y;
        row[2 * i + 1] = q.x.clone();
        rows.push(row);
        rhs.push(Gauss::one());
        for t in pts {
            let lambda = t - k;
            let a = m1.act_matrix(&lambda, k);
            let c = symplectic(&(&e.embed(&lambda) + &r), &(&kappa + &r.scale(&Gauss::half())));
            let ti = idx[t];
            // A·w_κ − c·w_{κ+λ} = 0
            for comp in 0..2 {
                let mut row = vec![Gauss::zero(); n];
                for j in 0..2 {
                    row[2 * i + j] += &a[(comp, j)];
                }
                row[2 * ti + comp] -= &c;
                rows.push(row);
                rhs.push(Gauss::zero());
            }
        }
    }
    Matrix::from_rows(rows).solve(&rhs).is_some()
}

/// `α = ⟨ρ,μ⟩/⟨ρ,ξ⟩`, `β = n/2 + ⟨ξ,μ⟩/⟨ρ,ξ⟩ − 1` for the Witt subalgebra along
/// `ξ` acting on `L_{μ+kξ} ⊗ ξ^n`.
pub fn tensor_parameters(
    e: &LatticeEmbedding,
    mu: &CVec2,
    xi: &LatticePoint,
    n: u32,
) -> Result<(Gauss, Gauss)> {
    let x = e.embed(xi);
    let rx = symplectic(&rho(), &x);
    if rx.is_zero() {
        return Err(Error::DegenerateDirection);
    }
    let alpha = symplectic(&rho(), mu).checked_div(&rx)?;
    let beta = Gauss::rat(n as i64, 2) + symplectic(&x, mu).checked_div(&rx)? - Gauss::one();
    Ok((alpha, beta))
}

/// `L_{mξ}(L_{μ+kξ} ⊗ ξ^n) − ⟨ρ,ξ⟩(k+α+mβ) L_{μ+(k+m)ξ} ⊗ ξ^n` in `ℳⁿ` on the
/// coset through `μ`.
pub fn tensor_validation_residual(
    e: Arc<LatticeEmbedding>,
    mu: &CVec2,
    xi: &LatticePoint,
    n: u32,
    m: i64,
    k: i64,
) -> Result<ModuleVector> {
    let (alpha, beta) = tensor_parameters(&e, mu, xi, n)?;
    let x = e.embed(xi);
    let rx = symplectic(&rho(), &x);
    let module = GradedModuleSpec::mn(n, mu.clone(), e);
    let lx = PolyV::from_vec(&x);
    let xn = (0..n).fold(PolyV::one(), |acc, _| acc.mul(&lx));
    let v = ModuleVector::component_vector(xi.scale(k), xn.to_coords(n));
    let got = act_v(&module, &xi.scale(m), &v);
    let c = rx * (Gauss::from_int(k) + alpha + Gauss::from_int(m) * beta);
    let want = ModuleVector::component_vector(xi.scale(k + m), xn.to_coords(n)).scale(&c);
    Ok(got.sub(&want))
}

/// An element of `𝒮 ⊗ S•V`: symbol index ↦ polynomial.
pub type SymbolTensor = BTreeMap<CVec2, PolyV>;

fn tensor_add(a: &mut SymbolTensor, k: CVec2, p: PolyV) {
    if p.is_zero() {
        return;
    }
    let slot = a.entry(k.clone()).or_default();
    *slot = slot.add(&p);
    if slot.is_zero() {
        a.remove(&k);
    }
}

/// `c(L_λ) = ½ L_{λ−ρ} ⊗ λ(λ+ρ)`.
pub fn mc_cocycle(lambda: &CVec2) -> SymbolTensor {
    let q = PolyV::from_vec(lambda)
        .mul(&PolyV::from_vec(&(lambda + &rho())))
        .scale(&Gauss::half());
    let mut t = SymbolTensor::new();
    tensor_add(&mut t, lambda - &rho(), q);
    t
}

/// `c([X,Y]) − X.c(Y) + Y.c(X) − [c(X), c(Y)]` for `X = L_λ`, `Y = L_μ`,
/// with `X.(a⊗s) = {X,a}⊗s` and `[a⊗s, b⊗t] = ab⊗{s,t}`.
pub fn mc_residual(lambda: &CVec2, mu: &CVec2) -> SymbolTensor {
    let r = rho();
    let mut out = SymbolTensor::new();
    let br = symplectic(&(lambda + &r), &(mu + &r));
    for (k, p) in mc_cocycle(&(lambda + mu)) {
        tensor_add(&mut out, k, p.scale(&br));
    }
    let act = |x: &CVec2, t: &SymbolTensor, sign: i64, out: &mut SymbolTensor| {
        for (k, p) in t {
            let s = crate::poisson::s_bracket(&SymbolElement::basis(x.clone()), &SymbolElement::basis(k.clone()));
            for (kk, c) in s.terms() {
                tensor_add(out, kk.clone(), p.scale(&(c * Gauss::from_int(sign))));
            }
        }
    };
    act(lambda, &mc_cocycle(mu), -1, &mut out);
    act(mu, &mc_cocycle(lambda), 1, &mut out);
    for (a, s) in mc_cocycle(lambda) {
        for (b, t) in mc_cocycle(mu) {
            let ab = s_product(&SymbolElement::basis(a.clone()), &SymbolElement::basis(b.clone()));
            let st = poly_bracket(&s, &t);
            for (k, c) in ab.terms() {
                tensor_add(&mut out, k.clone(), st.scale(&-c));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: &[i64]) -> LatticePoint {
        LatticePoint(c.to_vec())
    }

    fn demo() -> Arc<LatticeEmbedding> {
        Arc::new(LatticeEmbedding::demo())
    }

    fn generic_base() -> CVec2 {
        CVec2::new(Gauss::rat(1, 3), Gauss::rat(-2, 7))
    }

    #[test]
    fn sgamma_trivial_point() {
        let m = GradedModuleSpec::sgamma(-rho(), demo());
        let v = ModuleVector::basis(lp(&[0, 0]), 0, 1);
        for l in Window::radius(2, 2).points() {
            assert!(act_v(&m, &l, &v).is_zero());
        }
    }

    #[test]
    fn m0_matches_sgamma() {
        let (s, m0) = (
            GradedModuleSpec::sgamma(generic_base(), demo()),
            GradedModuleSpec::mn(0, generic_base(), demo()),
        );
        for l in Window::radius(2, 1).points() {
            for k in Window::radius(2, 1).points() {
                assert_eq!(s.act_matrix(&l, &k), m0.act_matrix(&l, &k));
            }
        }
    }

    #[test]
    fn m2_hand_expansion() {
        // L_{ε₁}(L_β ⊗ x²) with λ = (0,1): λ(λ+ρ) = y(x+2y) = xy + 2y²
        let beta = generic_base();
        let m = GradedModuleSpec::mn(2, beta.clone(), demo());
        let x2 = PolyV::monomial(2, 0, Gauss::one());
        let v = ModuleVector::component_vector(lp(&[0, 0]), x2.to_coords(2));
        let got = act_v(&m, &lp(&[1, 0]), &v);
        let lam = CVec2::from_ints(0, 1);
        let q = PolyV::monomial(1, 1, Gauss::one()).add(&PolyV::monomial(0, 2, Gauss::from_int(2)));
        let want_poly = x2
            .scale(&symplectic(&(&lam + &rho()), &(&beta + &rho())))
            .add(&poly_bracket(&q, &x2).scale(&Gauss::half()));
        let want = ModuleVector::component_vector(lp(&[1, 0]), want_poly.to_coords(2));
        assert_eq!(got, want);
    }

    #[test]
    fn action_law_holds() {
        let mods: Vec<GradedModuleSpec> = vec![
            GradedModuleSpec::sgamma(generic_base(), demo()),
            GradedModuleSpec::mn(1, generic_base(), demo()),
            GradedModuleSpec::mn(3, generic_base(), demo()),
        ];
        for m in &mods {
            for (l, mu) in [(lp(&[1, 0]), lp(&[0, 1])), (lp(&[2, -1]), lp(&[-1, 3]))] {
                assert!(action_law_residual(m, &l, &mu, &lp(&[1, -2])).is_zero(), "{}", m.label());
            }
        }
        let fixtures: Vec<Box<dyn GradedAction>> = vec![
            Box::new(MBar::new(demo())),
            Box::new(MBarDual::new(demo())),
            Box::new(Trivial::new(demo())),
        ];
        for f in &fixtures {
            for k in Window::radius(2, 1).points() {
                assert!(action_law_residual(f.as_ref(), &lp(&[1, 0]), &lp(&[-1, 1]), &k).is_zero(), "{}", f.label());
            }
        }
    }

    #[test]
    fn a_action_examples() {
        let m = GradedModuleSpec::mn(2, generic_base(), demo());
        let v = ModuleVector::basis(lp(&[1, 1]), 1, 3).add(&ModuleVector::basis(lp(&[0, 2]), 0, 3));
        assert_eq!(m.act_a(&lp(&[0, 0]), &v), v);
        assert_eq!(m.act_a(&lp(&[2, -1]), &m.act_a(&lp(&[-2, 1]), &v)), v);
        for mm in [&m, &GradedModuleSpec::sgamma(generic_base(), demo())] {
            let v = ModuleVector::basis(lp(&[1, 0]), 0, mm.dim());
            assert!(mm.av_compatibility_residual(&lp(&[2, 1]), &lp(&[-1, 3]), &v).is_zero());
        }
    }

    #[test]
    fn lemma_spans() {
        let w = Window::radius(2, 2);
        let s = GradedModuleSpec::sgamma(-rho(), demo());
        let span = submodule_window_span(&s, &ModuleVector::basis(lp(&[0, 0]), 0, 1), &w);
        assert_eq!(span.total_dim(), 1);
        let g = GradedModuleSpec::sgamma(generic_base(), demo());
        let span = submodule_window_span(&g, &ModuleVector::basis(lp(&[1, -1]), 0, 1), &w);
        assert_eq!(span.total_dim(), w.points().len());
        // −2ρ: the complement of L_{−2ρ} is invariant
        let d = GradedModuleSpec::sgamma(rho().scale_int(-2), demo());
        let span = submodule_window_span(&d, &ModuleVector::basis(lp(&[1, 0]), 0, 1), &w);
        assert_eq!(span.dim_at(&lp(&[0, 0])), 0);
        assert_eq!(span.total_dim(), w.points().len() - 1);
    }

    #[test]
    fn m2_window_irreducible() {
        let m = GradedModuleSpec::mn(2, generic_base(), demo());
        let w = Window::radius(2, 2);
        let seed = ModuleVector::basis(lp(&[0, 0]), 1, 3);
        let span = submodule_window_span(&m, &seed, &w);
        for k in w.interior(&Window::radius(2, 1).points()) {
            assert_eq!(span.dim_at(&k), 3, "at {k}");
        }
    }

    #[test]
    fn m1_sequence() {
        let stored = Coset::new(generic_base(), demo());
        let w = Window::radius(2, 2);
        let rep = m1_sequence_check(&stored, &w, &Gauss::half());
        assert!(rep.embed_ok && rep.quotient_ok && rep.exact);
        assert!(!rep.splits);
        let bad = m1_sequence_check(&stored, &w, &Gauss::zero());
        assert!(!bad.embed_ok);
    }

    #[test]
    fn m1_embedded_copy_is_a_submodule() {
        let stored = Coset::new(generic_base(), demo());
        let m1 = GradedModuleSpec::new(ModuleKind::Mn(1), stored.clone());
        let w = Window::radius(2, 2);
        let kappa = stored.point(&lp(&[0, 0]));
        let seed = ModuleVector::component_vector(lp(&[0, 0]), m1_embed_vector(&kappa, &Gauss::half()).to_coords(1));
        let span = submodule_window_span(&m1, &seed, &w);
        for k in w.points() {
            assert!(span.dim_at(&k) <= 1);
        }
    }

    #[test]
    fn dual_pairing() {
        let e = LatticeEmbedding::demo();
        let r = dual_pairing_invariance(&e, &generic_base(), &lp(&[1, 2]), &lp(&[-3, 1]), &lp(&[2, -3])).unwrap();
        assert!(r.is_zero());
        assert!(dual_pairing_invariance(&e, &generic_base(), &lp(&[1, 2]), &lp(&[0, 0]), &lp(&[0, 0])).is_err());
    }

    #[test]
    fn tensor_examples() {
        let e = demo();
        let xi = lp(&[1, 0]);
        let x = e.embed(&xi);
        // choose μ with ⟨ξ,μ⟩ = ⟨ρ,ξ⟩: μ = ρ + t·ξ works since ⟨ξ,ρ+tξ⟩ = ⟨ξ,ρ⟩ ... use −ρ
        let mu = -rho();
        assert_eq!(symplectic(&x, &mu), symplectic(&rho(), &x));
        let (_, b) = tensor_parameters(&e, &mu, &xi, 0).unwrap();
        assert!(b.is_zero());
        let (a, _) = tensor_parameters(&e, &CVec2::zero(), &xi, 2).unwrap();
        assert!(a.is_zero());
        for (m, k) in [(1, 0), (-2, 3), (3, -1)] {
            assert!(tensor_validation_residual(e.clone(), &generic_base(), &lp(&[1, 1]), 3, m, k).unwrap().is_zero());
        }
        let flat = Arc::new(LatticeEmbedding::new(vec![CVec2::from_ints(1, 1), CVec2::from_ints(0, 1)]).unwrap());
        assert_eq!(
            tensor_parameters(&flat, &CVec2::zero(), &lp(&[1, 0]), 1),
            Err(Error::DegenerateDirection)
        );
    }

    #[test]
    fn maurer_cartan() {
        let l = CVec2::new(Gauss::from_ints(1, 2), Gauss::rat(-1, 3));
        let m = CVec2::new(Gauss::from_int(-2), Gauss::from_ints(0, 1));
        assert!(mc_residual(&l, &m).is_empty());
        assert!(mc_residual(&l, &l).is_empty());
    }

    #[test]
    fn spec_json() {
        let s = GradedModuleSpec::from_json(r#"{ "kind": "mn", "n": 2, "beta": ["1/3", "-2/7"] }"#, demo()).unwrap();
        assert_eq!(s.kind, ModuleKind::Mn(2));
        assert_eq!(s.coset.base, generic_base());
        assert!(GradedModuleSpec::from_json(r#"{ "kind": "mn", "beta": [0, 0] }"#, demo()).is_err());
        assert!(GradedModuleSpec::from_json(r#"{ "kind": "xx", "beta": [0, 0] }"#, demo()).is_err());
        let v = ModuleVector::basis(lp(&[1, 0]), 0, 3);
        assert_eq!(s.dump(&v), serde_json::json!([{ "point": [1, 0], "fiber": "x^2" }]));
    }
}
