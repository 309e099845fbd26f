//! The operator `D(λ) = L^𝒜_{−λ−ρ} ∘ L_λ` on a homogeneous component of an
//! `𝒜𝒱_π`-module, its Taylor coefficients `P_K`, the relations they obey, the
//! structural maps out of the auxiliary algebra `𝒫`, and the classifier.
//!
//! `D(λ)` is polynomial in the coordinates of `λ`, so the Taylor table is
//! extracted exactly by forward differences on the grid `{0..d}^N` and then
//! validated at points off the grid.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gmod::{act_v, GradedAction, GradedModuleSpec, ModuleKind, ModuleVector};
use crate::lattice::{Coset, LatticeEmbedding, LatticePoint};
use crate::linalg::Matrix;
use crate::poisson::{ad_matrix, poly_bracket, PolyV};
use crate::scalars::{rho, rho_dagger, symplectic, CVec2, Gauss, Rational};
use crate::sweep;

/// Multi-index `K ∈ ℤ₊^N`.
pub type MultiIndex = Vec<u32>;

/// Shift between the recovered `K₁` and the value read off the stored base:
/// fibers are stored at `L_β`, so `β + ρ = K₀ρ† + K₁ρ`.
pub const CONVENTION_OFFSET: i64 = 1;

/// `D(λ)` on the component `k` of an `𝒜𝒱_π`-module.
#[derive(Clone, Copy)]
pub struct DOperator<'a> {
    pub spec: &'a GradedModuleSpec,
    pub at: &'a LatticePoint,
}

impl<'a> DOperator<'a> {
    pub fn new(spec: &'a GradedModuleSpec, at: &'a LatticePoint) -> Self {
        DOperator { spec, at }
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn rank(&self) -> usize {
        self.spec.rank()
    }

    pub fn eval(&self, lambda: &LatticePoint) -> Matrix {
        d_matrix(self.spec, self.at, lambda)
    }
}

/// Matrix of `act_a(−λ) ∘ act_v(λ)` on the component `k`, built column by
/// column from the two actions.
pub fn d_matrix(spec: &GradedModuleSpec, k: &LatticePoint, lambda: &LatticePoint) -> Matrix {
    let dim = spec.dim();
    let cols: Vec<Vec<Gauss>> = (0..dim)
        .map(|j| {
            let v = ModuleVector::basis(k.clone(), j, dim);
            let back = spec.act_a(&-lambda, &act_v(spec, lambda, &v));
            back.component(k).cloned().unwrap_or_else(|| vec![Gauss::zero(); dim])
        })
        .collect();
    Matrix::from_columns(&cols, dim)
}

/// `[D(λ),D(μ)] − ⟨λ+ρ,μ+ρ⟩D(λ+μ) + ⟨λ,μ+ρ⟩D(λ) + ⟨λ+ρ,μ⟩D(μ)`.
pub fn d_commutator_residual(d: &DOperator<'_>, lambda: &LatticePoint, mu: &LatticePoint) -> Matrix {
    let e = d.spec.embedding();
    let (dl, dm) = (d.eval(lambda), d.eval(mu));
    let r = rho();
    let (l, m) = (e.embed(lambda), e.embed(mu));
    let c_sum = symplectic(&(&l + &r), &(&m + &r));
    let c_l = symplectic(&l, &(&m + &r));
    let c_m = symplectic(&(&l + &r), &m);
    let mut out = dl.commutator(&dm);
    out = &out - &d.eval(&(lambda + mu)).scale(&c_sum);
    out = &out + &dl.scale(&c_l);
    &out + &dm.scale(&c_m)
}

fn factorial(n: u32) -> Gauss {
    Gauss::from_rational(Rational::from_integer((1..=n as i64).map(BigInt::from).product()))
}

fn multi_factorial(k: &[u32]) -> Gauss {
    k.iter().fold(Gauss::one(), |acc, &x| acc * factorial(x))
}

fn degree(k: &[u32]) -> u32 {
    k.iter().sum()
}

/// `λ^K` for integer `λ`.
fn monomial_at(lambda: &LatticePoint, k: &[u32]) -> Gauss {
    lambda
        .coords()
        .iter()
        .zip(k)
        .fold(Gauss::one(), |acc, (&c, &e)| acc * Gauss::from_int(c).pow(e))
}

/// Signed Stirling numbers of the first kind `s(n, j)`, `0 ≤ j ≤ n ≤ d`.
fn stirling1(d: usize) -> Vec<Vec<i64>> {
    let mut s = vec![vec![0i64; d + 1]; d + 1];
    s[0][0] = 1;
    for n in 1..=d {
        for j in 1..=n {
            s[n][j] = s[n - 1][j - 1] - (n as i64 - 1) * s[n - 1][j];
        }
    }
    s
}

/// The Taylor table `D(λ) = Σ_K λ^K/K! P_K`.
#[derive(Clone, PartialEq, Eq)]
pub struct PTable {
    rank: usize,
    dim: usize,
    entries: BTreeMap<MultiIndex, Matrix>,
}

impl PTable {
    pub fn new(rank: usize, dim: usize) -> Self {
        PTable {
            rank,
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set(&mut self, k: MultiIndex, m: Matrix) {
        assert_eq!(k.len(), self.rank);
        if m.is_zero() {
            self.entries.remove(&k);
        } else {
            self.entries.insert(k, m);
        }
    }

    pub fn get(&self, k: &[u32]) -> Matrix {
        self.entries
            .get(k)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.dim, self.dim))
    }

    pub fn support(&self) -> impl Iterator<Item = (&MultiIndex, &Matrix)> {
        self.entries.iter()
    }

    pub fn max_degree(&self) -> u32 {
        self.entries.keys().map(|k| degree(k)).max().unwrap_or(0)
    }

    pub fn unit(&self, i: usize) -> MultiIndex {
        let mut k = vec![0; self.rank];
        k[i] = 1;
        k
    }

    pub fn pair_index(&self, i: usize, j: usize) -> MultiIndex {
        let mut k = vec![0; self.rank];
        k[i] += 1;
        k[j] += 1;
        k
    }

    pub fn evaluate(&self, lambda: &LatticePoint) -> Matrix {
        let mut out = Matrix::zeros(self.dim, self.dim);
        for (k, p) in &self.entries {
            let c = monomial_at(lambda, k) * multi_factorial(k).inv().expect("factorial is nonzero");
            out = &out + &p.scale(&c);
        }
        out
    }
}

impl fmt::Debug for PTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

/// `count` lattice points with coordinates in `[−6, 6]` lying outside `{0..d}^N`.
pub fn off_grid_points<R: Rng>(rank: usize, d: u32, count: usize, rng: &mut R) -> Vec<LatticePoint> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = LatticePoint((0..rank).map(|_| rng.gen_range(-6..=6)).collect());
        if p.coords().iter().any(|&c| c < 0 || c > d as i64) {
            out.push(p);
        }
    }
    out
}

/// Exact Taylor table of a polynomial matrix function from its values on
/// `{0..d}^N`, validated at `validation` points.
pub fn extract_p_table_from<F>(
    rank: usize,
    dim: usize,
    d: u32,
    f: F,
    validation: &[LatticePoint],
) -> Result<PTable>
where
    F: Fn(&LatticePoint) -> Matrix + Sync + Send,
{
    if d < 2 {
        return Err(Error::Config("degree bound must be at least 2".into()));
    }
    let grid = LatticePoint::box_points_between(&vec![0; rank], &vec![d as i64; rank]);
    let values = sweep::map(&grid, &f);
    let side = d as usize + 1;
    let flat = |p: &[i64]| p.iter().fold(0usize, |acc, &c| acc * side + c as usize);
    // forward differences, one axis at a time
    let mut diffs: Vec<Matrix> = vec![Matrix::zeros(dim, dim); grid.len()];
    for (p, v) in grid.iter().zip(values) {
        diffs[flat(p.coords())] = v;
    }
    for axis in 0..rank {
        for step in 1..side {
            for p in grid.iter().rev() {
                let c = p.coords()[axis] as usize;
                if c < step {
                    continue;
                }
                let mut q = p.coords().to_vec();
                q[axis] -= 1;
                let below = diffs[flat(&q)].clone();
                let here = &mut diffs[flat(p.coords())];
                *here = &*here - &below;
            }
        }
    }
    // Newton basis C(λ,K) → monomials via Stirling numbers
    let s = stirling1(d as usize);
    let mut taylor: BTreeMap<MultiIndex, Matrix> = BTreeMap::new();
    for p in &grid {
        let delta = &diffs[flat(p.coords())];
        if delta.is_zero() {
            continue;
        }
        let kk: Vec<u32> = p.coords().iter().map(|&c| c as u32).collect();
        let inv_kf = multi_factorial(&kk).inv().expect("nonzero");
        for j in LatticePoint::box_points_between(&vec![0; rank], &kk.iter().map(|&x| x as i64).collect::<Vec<_>>()) {
            let jj: Vec<u32> = j.coords().iter().map(|&c| c as u32).collect();
            let stir = kk
                .iter()
                .zip(&jj)
                .fold(1i64, |acc, (&a, &b)| acc * s[a as usize][b as usize]);
            if stir == 0 {
                continue;
            }
            // coefficient of λ^J is Δ^K·Π s/K!; P_J = J!·that
            let c = Gauss::from_int(stir) * &inv_kf * multi_factorial(&jj);
            let slot = taylor.entry(jj).or_insert_with(|| Matrix::zeros(dim, dim));
            *slot = &*slot + &delta.scale(&c);
        }
    }
    let mut table = PTable::new(rank, dim);
    for (k, m) in taylor {
        table.set(k, m);
    }
    for (p, ok) in validation
        .iter()
        .zip(sweep::map(validation, |p| table.evaluate(p) == f(p)))
    {
        if !ok {
            return Err(Error::InterpolationMismatch(p.coords().to_vec()));
        }
    }
    Ok(table)
}

/// `P_K` table of `D` on a module component.
pub fn extract_p_table(d: &DOperator<'_>, bound: u32, validation: &[LatticePoint]) -> Result<PTable> {
    extract_p_table_from(d.rank(), d.dim(), bound, |l| d.eval(l), validation)
}

/// The three families of `𝒫` relations, by the degrees of the two indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationFamily {
    /// `|K| = 0` or `|S| = 0`: centrality of `P_0`.
    Central,
    /// `|K| = |S| = 1`.
    Linear,
    /// One index of degree 1, the other of degree ≥ 2.
    Mixed,
    /// `|K|, |S| ≥ 2`.
    General,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationResidual {
    pub family: RelationFamily,
    pub k: MultiIndex,
    pub s: MultiIndex,
    pub zero: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationReport {
    pub checked: usize,
    pub failures: Vec<RelationResidual>,
}

impl RelationReport {
    pub fn all_zero(&self) -> bool {
        self.failures.is_empty()
    }
}

fn sub_unit(k: &[u32], i: usize) -> Option<MultiIndex> {
    (k[i] > 0).then(|| {
        let mut out = k.to_vec();
        out[i] -= 1;
        out
    })
}

fn add_idx(a: &[u32], b: &[u32]) -> MultiIndex {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Right-hand side of the coefficient of `λ^K μ^S / K!S!` in the commutator
/// relation for `D`.
///
/// With `X = D(λ+μ) − D(λ) − D(μ)`, `Y = D(λ+μ) − D(λ)`, `Z = D(λ+μ) − D(μ)`:
/// `[P_K,P_S] = Σ K_iS_j⟨ε_i,ε_j⟩X_{K−ε_i,S−ε_j} + Σ K_i⟨ε_i,ρ⟩Y_{K−ε_i,S}
/// + Σ S_j⟨ρ,ε_j⟩Z_{K,S−ε_j}`. For `|K|,|S| ≥ 2` this is
/// `Σ K_iS_j⟨ε_i,ε_j⟩P_{K+S−ε_i−ε_j} + Σ (S_i−K_i)⟨ρ,ε_i⟩P_{K+S−ε_i}`.
pub fn relation_rhs(e: &LatticeEmbedding, t: &PTable, k: &[u32], s: &[u32]) -> Matrix {
    let n = t.rank();
    let zero = |v: &[u32]| v.iter().all(|&x| x == 0);
    let x_part = |a: &[u32], b: &[u32]| -> Matrix {
        match (zero(a), zero(b)) {
            (false, false) => t.get(&add_idx(a, b)),
            (true, true) => t.get(a).scale(&-Gauss::one()),
            _ => Matrix::zeros(t.dim(), t.dim()),
        }
    };
    let mut out = Matrix::zeros(t.dim(), t.dim());
    for i in 0..n {
        for j in 0..n {
            if let (Some(a), Some(b)) = (sub_unit(k, i), sub_unit(s, j)) {
                let c = Gauss::from_int((k[i] * s[j]) as i64) * e.pairing(i, j);
                out = &out + &x_part(&a, &b).scale(&c);
            }
        }
    }
    for i in 0..n {
        // ⟨ε_i, ρ⟩ = −⟨ρ, ε_i⟩
        if let Some(a) = sub_unit(k, i) {
            if !zero(s) {
                let c = -(Gauss::from_int(k[i] as i64) * e.rho_pairing(i));
                out = &out + &t.get(&add_idx(&a, s)).scale(&c);
            }
        }
        if let Some(b) = sub_unit(s, i) {
            if !zero(k) {
                let c = Gauss::from_int(s[i] as i64) * e.rho_pairing(i);
                out = &out + &t.get(&add_idx(k, &b)).scale(&c);
            }
        }
    }
    out
}

pub fn relation_family(k: &[u32], s: &[u32]) -> RelationFamily {
    match (degree(k), degree(s)) {
        (0, _) | (_, 0) => RelationFamily::Central,
        (1, 1) => RelationFamily::Linear,
        (1, _) | (_, 1) => RelationFamily::Mixed,
        _ => RelationFamily::General,
    }
}

/// Evaluates every relation `[P_K,P_S] = …` with `|K|, |S| ≤ max degree`.
pub fn verify_p_relations(e: &LatticeEmbedding, t: &PTable) -> RelationReport {
    let top = t.max_degree().max(2) as i64;
    let idx: Vec<MultiIndex> = LatticePoint::box_points_between(&vec![0; t.rank()], &vec![top; t.rank()])
        .into_iter()
        .map(|p| p.coords().iter().map(|&c| c as u32).collect::<MultiIndex>())
        .filter(|k| degree(k) as i64 <= top)
        .collect();
    let pairs: Vec<(MultiIndex, MultiIndex)> = idx
        .iter()
        .flat_map(|k| idx.iter().map(move |s| (k.clone(), s.clone())))
        .collect();
    let results = sweep::map(&pairs, |(k, s)| {
        let lhs = t.get(k).commutator(&t.get(s));
        RelationResidual {
            family: relation_family(k, s),
            k: k.clone(),
            s: s.clone(),
            zero: (&lhs - &relation_rhs(e, t, k, s)).is_zero(),
        }
    });
    RelationReport {
        checked: results.len(),
        failures: results.into_iter().filter(|r| !r.zero).collect(),
    }
}

/// `K₁` read off a stored base point: `β − K₀ρ† = K₁ρ` with `K₀ = ⟨ρ,β⟩`.
pub fn base_k1(beta: &CVec2) -> Gauss {
    let k0 = symplectic(&rho(), beta);
    let rest = beta - &rho_dagger().scale(&k0);
    debug_assert!(symplectic(&rho(), &rest).is_zero());
    // ρ = (1,1), so K₁ is either coordinate
    rest.x
}

/// Table predicted by the class-P action formulas for `S^nV` with scalars
/// `(K₀, K₁)`: `P_0 ↦ K₀`, `P_{ε_i} ↦ ⟨ε_i, K₀ρ† + K₁ρ⟩ + ½π(ε_i)ρ`,
/// `P_{ε_i+ε_j} ↦ π(ε_i)π(ε_j)`, higher `P_K ↦ 0`.
pub fn predicted_p_table(e: &LatticeEmbedding, n: u32, k0: &Gauss, k1: &Gauss) -> PTable {
    let dim = n as usize + 1;
    let rank = e.rank();
    let mut t = PTable::new(rank, dim);
    t.set(vec![0; rank], Matrix::scalar(dim, k0));
    let w = &rho_dagger().scale(k0) + &rho().scale(k1);
    let r = PolyV::from_vec(&rho());
    for i in 0..rank {
        let ei = PolyV::from_vec(e.image(i));
        let scalar = Matrix::scalar(dim, &symplectic(e.image(i), &w));
        let half = ad_matrix(&ei.mul(&r), n).scale(&Gauss::half());
        let u = t.unit(i);
        t.set(u, &scalar + &half);
        for j in i..rank {
            let ej = PolyV::from_vec(e.image(j));
            let idx = t.pair_index(i, j);
            t.set(idx, ad_matrix(&ei.mul(&ej), n));
        }
    }
    t
}

/// Indices where an extracted table differs from the predicted one.
pub fn p_action_mismatches(extracted: &PTable, predicted: &PTable) -> Vec<MultiIndex> {
    let mut keys: Vec<MultiIndex> = extracted
        .support()
        .chain(predicted.support())
        .map(|(k, _)| k.clone())
        .collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .filter(|k| extracted.get(k) != predicted.get(k))
        .collect()
}

/// `L_λ` on component `k` rebuilt from a table:
/// `L_λ(L^𝒜 ⊗ u) = ⟨λ+ρ, π(k)⟩ L^𝒜 ⊗ u + L^𝒜 ⊗ D(λ)u`.
pub fn recover_action(e: &LatticeEmbedding, t: &PTable, lambda: &LatticePoint, k: &LatticePoint) -> Matrix {
    let c = symplectic(&(&e.embed(lambda) + &rho()), &e.embed(k));
    &t.evaluate(lambda) + &Matrix::scalar(t.dim(), &c)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructuralEntry {
    pub map: &'static str,
    pub case: String,
    pub zero: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructuralReport {
    pub entries: Vec<StructuralEntry>,
}

impl StructuralReport {
    pub fn all_zero(&self) -> bool {
        self.entries.iter().all(|e| e.zero)
    }
}

/// Quadratic polynomials in `N` commuting variables `ε_1..ε_N` with the
/// constant Poisson bracket `{ε_i, ε_j} = ⟨π(ε_i), π(ε_j)⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LatticeQuadratic(pub BTreeMap<(usize, usize), Gauss>);

impl LatticeQuadratic {
    pub fn monomial(i: usize, j: usize, c: Gauss) -> Self {
        let mut out = Self::default();
        out.add(i, j, c);
        out
    }

    fn add(&mut self, i: usize, j: usize, c: Gauss) {
        let key = (i.min(j), i.max(j));
        let slot = self.0.entry(key).or_insert_with(Gauss::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&key);
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((i, j), c) in &other.0 {
            out.add(*i, *j, c.clone());
        }
        out
    }

    pub fn bracket(&self, other: &Self, e: &LatticeEmbedding) -> Self {
        let mut out = Self::default();
        for (&(a, b), c1) in &self.0 {
            for (&(c, d), c2) in &other.0 {
                let k = c1 * c2;
                // {ab, cd} = ac{b,d} + ad{b,c} + bc{a,d} + bd{a,c}
                out.add(a, c, &k * e.pairing(b, d));
                out.add(a, d, &k * e.pairing(b, c));
                out.add(b, c, &k * e.pairing(a, d));
                out.add(b, d, &k * e.pairing(a, c));
            }
        }
        out
    }

    /// `π_*`: `ε_iε_j ↦ π(ε_i)π(ε_j)`.
    pub fn push_forward(&self, e: &LatticeEmbedding) -> PolyV {
        self.0.iter().fold(PolyV::zero(), |acc, (&(i, j), c)| {
            acc.add(&PolyV::from_vec(e.image(i)).mul(&PolyV::from_vec(e.image(j))).scale(c))
        })
    }
}

/// Homomorphism residuals of `τ`, `η`, `π_*` and `φ` on generators, plus `π_*`
/// on the supplied random quadratic pairs.
pub fn structural_maps_check(
    e: &LatticeEmbedding,
    random_pairs: &[(LatticeQuadratic, LatticeQuadratic)],
) -> StructuralReport {
    let n = e.rank();
    let r = rho();
    let rp = PolyV::from_vec(&r);
    let img = |i: usize| e.image(i).clone();
    let lin = |i: usize| PolyV::from_vec(e.image(i));
    let mut entries = Vec::new();

    for a in 0..n {
        for b in 0..n {
            // τ: [P_a, P_b] = −⟨ε_a,ε_b⟩P_0 + ⟨ε_a,ρ⟩P_b + ⟨ρ,ε_b⟩P_a ↦ 0 in the abelian ℂ²
            let tau = &(&r.scale(&-e.pairing(a, b).clone()) + &img(b).scale(&-e.rho_pairing(a).clone()))
                + &img(a).scale(e.rho_pairing(b));
            entries.push(StructuralEntry {
                map: "tau",
                case: format!("[P_e{}, P_e{}]", a + 1, b + 1),
                zero: tau.is_zero(),
            });
            // φ(P_0) = 0, φ(P_i) = ½π(ε_i)ρ on the same relation
            let phi_rel = lin(b)
                .mul(&rp)
                .scale(&-e.rho_pairing(a).clone())
                .add(&lin(a).mul(&rp).scale(e.rho_pairing(b)))
                .scale(&Gauss::half());
            let phi_br = poly_bracket(&lin(a).mul(&rp), &lin(b).mul(&rp)).scale(&Gauss::rat(1, 4));
            entries.push(StructuralEntry {
                map: "phi",
                case: format!("[P_e{}, P_e{}]", a + 1, b + 1),
                zero: phi_rel == phi_br,
            });
        }
    }

    // φ against degree-2 elements: ½{π(ε_i)ρ, λμ} = [P_i, λμ]
    let probes: Vec<(CVec2, CVec2)> = (0..n)
        .flat_map(|b| (0..n).map(move |c| (b, c)))
        .map(|(b, c)| (img(b), img(c)))
        .chain([(CVec2::from_ints(1, 0), CVec2::from_ints(0, 1))])
        .collect();
    for a in 0..n {
        for (l, m) in &probes {
            let (lp, mp) = (PolyV::from_vec(l), PolyV::from_vec(m));
            let lhs = poly_bracket(&lin(a).mul(&rp), &lp.mul(&mp)).scale(&Gauss::half());
            let rhs = lp
                .mul(&mp)
                .scale(&-e.rho_pairing(a).clone())
                .add(&lin(a).mul(&mp).scale(&symplectic(&r, l)))
                .add(&lin(a).mul(&lp).scale(&symplectic(&r, m)));
            entries.push(StructuralEntry {
                map: "phi",
                case: format!("[P_e{}, {}·{}]", a + 1, l, m),
                zero: lhs == rhs,
            });
        }
    }

    // η on degree-2 generators: degree-3 terms vanish in the quotient
    let quads: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    for &(a, b) in &quads {
        for &(c, d) in &quads {
            let p = LatticeQuadratic::monomial(a, b, Gauss::one());
            let q = LatticeQuadratic::monomial(c, d, Gauss::one());
            let lhs = p.bracket(&q, e).push_forward(e);
            let rhs = poly_bracket(&p.push_forward(e), &q.push_forward(e));
            entries.push(StructuralEntry {
                map: "eta",
                case: format!("[P_e{}e{}, P_e{}e{}]", a + 1, b + 1, c + 1, d + 1),
                zero: lhs == rhs,
            });
        }
    }

    for (t, (p, q)) in random_pairs.iter().enumerate() {
        let lhs = p.bracket(q, e).push_forward(e);
        let rhs = poly_bracket(&p.push_forward(e), &q.push_forward(e));
        entries.push(StructuralEntry {
            map: "pi_star",
            case: format!("random pair {t}"),
            zero: lhs == rhs,
        });
    }
    StructuralReport { entries }
}

/// Random quadratic with small Gaussian-integer coefficients.
pub fn random_quadratic<R: Rng>(n: usize, rng: &mut R) -> LatticeQuadratic {
    let mut q = LatticeQuadratic::default();
    for i in 0..n {
        for j in i..n {
            q = q.plus(&LatticeQuadratic::monomial(
                i,
                j,
                Gauss::from_ints(rng.gen_range(-3..=3), rng.gen_range(-3..=3)),
            ));
        }
    }
    q
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "case", content = "n")]
pub enum ClassCase {
    SGammaIrreducible,
    MBar,
    MBarDual,
    Mn(u32),
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub case: ClassCase,
    pub n: u32,
    #[serde(rename = "K0")]
    pub k0: String,
    #[serde(rename = "K1")]
    pub k1: String,
    pub convention_offset: i64,
    pub gamma_base: String,
    pub condition_flags: Vec<String>,
    #[serde(skip)]
    pub gamma: Coset,
}

impl Classification {
    /// Same case and, for the coset-dependent cases, the same coset.
    pub fn same_module(&self, other: &Classification) -> bool {
        if self.case != other.case {
            return false;
        }
        match self.case {
            ClassCase::MBar | ClassCase::MBarDual => true,
            _ => self.gamma == other.gamma,
        }
    }
}

/// `(K₀, K₁)` from a table: `K₀` is the scalar `P_0`, and `K₁` solves the
/// scalar part of each `P_{ε_i}` after removing `½ad(π(ε_i)ρ)`.
pub fn recover_k0_k1(e: &LatticeEmbedding, t: &PTable) -> Result<(Gauss, Gauss)> {
    let n = t.dim() as u32 - 1;
    let k0 = t
        .get(&vec![0; t.rank()])
        .as_scalar()
        .ok_or_else(|| Error::NonConformingTable("P_0 is not scalar".into()))?;
    let r = PolyV::from_vec(&rho());
    let mut k1: Option<Gauss> = None;
    for i in 0..t.rank() {
        let half = ad_matrix(&PolyV::from_vec(e.image(i)).mul(&r), n).scale(&Gauss::half());
        let scalar = (&t.get(&t.unit(i)) - &half)
            .as_scalar()
            .ok_or_else(|| Error::NonConformingTable(format!("P_e{} has a non-scalar remainder", i + 1)))?;
        // scalar = K₀⟨ε_i,ρ†⟩ + K₁⟨ε_i,ρ⟩
        let er = symplectic(e.image(i), &rho());
        let rest = scalar - &k0 * symplectic(e.image(i), &rho_dagger());
        if er.is_zero() {
            if !rest.is_zero() {
                return Err(Error::InconsistentK1);
            }
            continue;
        }
        let cand = rest.checked_div(&er)?;
        match &k1 {
            Some(prev) if *prev != cand => return Err(Error::InconsistentK1),
            _ => k1 = Some(cand),
        }
    }
    Ok((k0, k1.ok_or(Error::InconsistentK1)?))
}

/// Classifies the module whose component has the Taylor table `t`.
///
/// `n = dim − 1`, `(K₀, K₁)` as in [`recover_k0_k1`]. The stored base is
/// recovered as `K₀ρ† + (K₁ − offset)ρ`, which lies in the coset of the
/// sampled component.
pub fn classify_table(e: std::sync::Arc<LatticeEmbedding>, t: &PTable) -> Result<Classification> {
    let dim = t.dim();
    if dim == 0 {
        return Err(Error::Dimension("empty fiber".into()));
    }
    let n = (dim - 1) as u32;
    let (k0, k1) = recover_k0_k1(&e, t)?;
    let base = &rho_dagger().scale(&k0) + &rho().scale(&(&k1 - Gauss::from_int(CONVENTION_OFFSET)));
    let gamma = Coset::new(base.clone(), e.clone());
    let mut flags = Vec::new();
    let case = if dim == 1 {
        flags.push("fiber-dim-1: decided by coset membership".to_string());
        if gamma.contains(&-rho()).is_some() {
            ClassCase::MBar
        } else if gamma.contains(&rho().scale_int(-2)).is_some() {
            ClassCase::MBarDual
        } else {
            ClassCase::SGammaIrreducible
        }
    } else {
        if n == 1 {
            flags.push("n=1: reducible, not in the simple list".to_string());
        }
        ClassCase::Mn(n)
    };
    Ok(Classification {
        case,
        n,
        k0: k0.to_string(),
        k1: k1.to_string(),
        convention_offset: CONVENTION_OFFSET,
        gamma_base: base.to_string(),
        condition_flags: flags,
        gamma,
    })
}

/// Extracts the table at the base component and classifies.
pub fn classify(spec: &GradedModuleSpec, validation: &[LatticePoint]) -> Result<Classification> {
    let at = LatticePoint::zero(spec.rank());
    let t = extract_p_table(&DOperator::new(spec, &at), 2, validation)?;
    let mut c = classify_table(spec.embedding_arc().clone(), &t)?;
    if let ModuleKind::SGamma = spec.kind {
        c.condition_flags.push("input kind: sgamma".into());
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn lp(c: &[i64]) -> LatticePoint {
        LatticePoint(c.to_vec())
    }

    fn demo() -> Arc<LatticeEmbedding> {
        Arc::new(LatticeEmbedding::demo())
    }

    fn beta() -> CVec2 {
        CVec2::new(Gauss::rat(1, 3), Gauss::from_ints(0, 1))
    }

    fn validation() -> Vec<LatticePoint> {
        off_grid_points(2, 2, 20, &mut ChaCha8Rng::seed_from_u64(3))
    }

    #[test]
    fn d_examples() {
        let zero = lp(&[0, 0]);
        let m0 = GradedModuleSpec::mn(0, beta(), demo());
        let d = DOperator::new(&m0, &zero);
        for l in [lp(&[1, 0]), lp(&[2, -3])] {
            let want = symplectic(&(&demo().embed(&l) + &rho()), &(&beta() + &rho()));
            assert_eq!(d.eval(&l).as_scalar(), Some(want));
        }
        for n in 0..4 {
            let m = GradedModuleSpec::mn(n, beta(), demo());
            let d = DOperator::new(&m, &zero);
            assert_eq!(d.eval(&zero).as_scalar(), Some(symplectic(&rho(), &beta())));
        }
    }

    #[test]
    fn d_commutator() {
        let m = GradedModuleSpec::mn(3, beta(), demo());
        let k = lp(&[1, -1]);
        let d = DOperator::new(&m, &k);
        for (l, mu) in [(lp(&[1, 0]), lp(&[0, 1])), (lp(&[2, -1]), lp(&[-3, 2]))] {
            assert!(d_commutator_residual(&d, &l, &mu).is_zero());
        }
    }

    #[test]
    fn extraction_on_polynomial() {
        // f(λ) = 3 + λ₁ − 2λ₁λ₂ + λ₂²  →  P_0=3, P_10=1, P_11=−2, P_02=2
        let f = |l: &LatticePoint| {
            let (a, b) = (l.0[0], l.0[1]);
            Matrix::scalar(1, &Gauss::from_int(3 + a - 2 * a * b + b * b))
        };
        let t = extract_p_table_from(2, 1, 3, f, &validation()).unwrap();
        assert_eq!(t.get(&[0, 0]).as_scalar(), Some(Gauss::from_int(3)));
        assert_eq!(t.get(&[1, 0]).as_scalar(), Some(Gauss::from_int(1)));
        assert_eq!(t.get(&[1, 1]).as_scalar(), Some(Gauss::from_int(-2)));
        assert_eq!(t.get(&[0, 2]).as_scalar(), Some(Gauss::from_int(2)));
        assert_eq!(t.max_degree(), 2);
        // cubic is invisible to the degree-2 grid and caught off-grid
        let g = |l: &LatticePoint| Matrix::scalar(1, &Gauss::from_int(l.0[0].pow(3)));
        assert!(matches!(
            extract_p_table_from(2, 1, 2, g, &validation()),
            Err(Error::InterpolationMismatch(_))
        ));
    }

    #[test]
    fn mn_tables_match_prediction() {
        let zero = lp(&[0, 0]);
        for n in 0..=4 {
            let m = GradedModuleSpec::mn(n, beta(), demo());
            let t = extract_p_table(&DOperator::new(&m, &zero), 2, &validation()).unwrap();
            assert!(t.max_degree() <= 2);
            let k0 = symplectic(&rho(), &beta());
            let k1 = base_k1(&beta()) + Gauss::from_int(CONVENTION_OFFSET);
            let pred = predicted_p_table(&demo(), n, &k0, &k1);
            assert!(p_action_mismatches(&t, &pred).is_empty(), "n = {n}");
            assert!(verify_p_relations(&demo(), &t).all_zero(), "n = {n}");
        }
    }

    #[test]
    fn perturbed_table_fails_at_index() {
        let zero = lp(&[0, 0]);
        let m = GradedModuleSpec::mn(2, beta(), demo());
        let mut t = extract_p_table(&DOperator::new(&m, &zero), 2, &validation()).unwrap();
        let bumped = &t.get(&[1, 0]) + &Matrix::from_rows(vec![
            vec![Gauss::zero(), Gauss::one(), Gauss::zero()],
            vec![Gauss::zero(); 3],
            vec![Gauss::zero(); 3],
        ]);
        t.set(vec![1, 0], bumped);
        let rep = verify_p_relations(&demo(), &t);
        assert!(!rep.all_zero());
        assert!(rep.failures.iter().any(|f| f.k == vec![1, 0] || f.s == vec![1, 0]));
    }

    #[test]
    fn recovery_reproduces_action() {
        let m = GradedModuleSpec::mn(2, beta(), demo());
        let zero = lp(&[0, 0]);
        let t = extract_p_table(&DOperator::new(&m, &zero), 2, &validation()).unwrap();
        for l in LatticePoint::box_points(2, 1) {
            for k in LatticePoint::box_points(2, 1) {
                assert_eq!(recover_action(&demo(), &t, &l, &k), m.act_matrix(&l, &k));
            }
        }
    }

    #[test]
    fn structural_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pairs: Vec<_> = (0..10)
            .map(|_| (random_quadratic(2, &mut rng), random_quadratic(2, &mut rng)))
            .collect();
        let rep = structural_maps_check(&demo(), &pairs);
        assert!(rep.all_zero(), "{:?}", rep.entries.iter().filter(|e| !e.zero).collect::<Vec<_>>());
        assert!(rep.entries.iter().any(|e| e.map == "tau" && e.case == "[P_e1, P_e2]"));
    }

    #[test]
    fn classifier_cases() {
        let v = validation();
        let c = classify(&GradedModuleSpec::mn(3, beta(), demo()), &v).unwrap();
        assert_eq!(c.case, ClassCase::Mn(3));
        assert_eq!(c.gamma, Coset::new(beta(), demo()));
        let c = classify(&GradedModuleSpec::sgamma(&-rho() + &demo().embed(&lp(&[2, 1])), demo()), &v).unwrap();
        assert_eq!(c.case, ClassCase::MBar);
        let c = classify(&GradedModuleSpec::sgamma(rho().scale_int(-2), demo()), &v).unwrap();
        assert_eq!(c.case, ClassCase::MBarDual);
        let c = classify(&GradedModuleSpec::sgamma(beta(), demo()), &v).unwrap();
        assert_eq!(c.case, ClassCase::SGammaIrreducible);
        let c1 = classify(&GradedModuleSpec::mn(1, beta(), demo()), &v).unwrap();
        assert!(c1.condition_flags.iter().any(|f| f.starts_with("n=1")));
    }

    #[test]
    fn inconsistent_k1_detected() {
        let mut t = predicted_p_table(&demo(), 0, &Gauss::one(), &Gauss::one());
        let bumped = &t.get(&[1, 0]) + &Matrix::scalar(1, &Gauss::one());
        t.set(vec![1, 0], bumped);
        assert_eq!(classify_table(demo(), &t).unwrap_err(), Error::InconsistentK1);
    }
}
