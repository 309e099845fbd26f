//! Lattice embeddings `π: ℤ^N → ℂ²`, lattice points, cosets `β + π(Λ)` and the
//! admissibility conditions i)–iii) and (𝒞).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalars::{rho, symplectic, CVec2, Gauss, Rational};
use crate::sweep;

/// A point of `Λ = ℤ^N`, in coordinates with respect to `ε_1, …, ε_N`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticePoint(coords)
    }

    pub fn zero(n: usize) -> Self {
        LatticePoint(vec![0; n])
    }

    /// The basis vector `ε_i` (0-based `i`).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        LatticePoint(v)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn scale(&self, k: i64) -> Self {
        LatticePoint(self.0.iter().map(|c| c * k).collect())
    }

    pub fn max_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    /// The total order used for PBW words: `a ≺ b` iff `a` is lexicographically
    /// *larger* than `b`. With this choice `ε_1 ≺ ε_2`.
    pub fn pbw_cmp(&self, other: &Self) -> Ordering {
        other.0.cmp(&self.0)
    }

    /// Every point of the box `[-r, r]^n`, in lexicographic order.
    pub fn box_points(n: usize, r: i64) -> Vec<LatticePoint> {
        Self::box_points_between(&vec![-r; n], &vec![r; n])
    }

    /// Every point `p` with `lo ≤ p ≤ hi` coordinatewise, in lexicographic order.
    pub fn box_points_between(lo: &[i64], hi: &[i64]) -> Vec<LatticePoint> {
        assert_eq!(lo.len(), hi.len());
        if lo.iter().zip(hi).any(|(a, b)| a > b) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut cur = lo.to_vec();
        loop {
            out.push(LatticePoint(cur.clone()));
            let mut i = cur.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < hi[i] {
                    cur[i] += 1;
                    cur[i + 1..].copy_from_slice(&lo[i + 1..]);
                    break;
                }
            }
        }
    }
}

impl Add for &LatticePoint {
    type Output = LatticePoint;
    fn add(self, rhs: &LatticePoint) -> LatticePoint {
        assert_eq!(self.0.len(), rhs.0.len(), "rank mismatch");
        LatticePoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Add for LatticePoint {
    type Output = LatticePoint;
    fn add(self, rhs: LatticePoint) -> LatticePoint {
        &self + &rhs
    }
}

impl Sub for &LatticePoint {
    type Output = LatticePoint;
    fn sub(self, rhs: &LatticePoint) -> LatticePoint {
        assert_eq!(self.0.len(), rhs.0.len(), "rank mismatch");
        LatticePoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Sub for LatticePoint {
    type Output = LatticePoint;
    fn sub(self, rhs: LatticePoint) -> LatticePoint {
        &self - &rhs
    }
}

impl Neg for &LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        LatticePoint(self.0.iter().map(|c| -c).collect())
    }
}

impl Neg for LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        -&self
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for LatticePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// The data of `π: ℤ^N → ℂ²` with the pairings used everywhere cached.
#[derive(Clone, PartialEq, Eq)]
pub struct LatticeEmbedding {
    images: Vec<CVec2>,
    // ⟨π(ε_i), π(ε_j)⟩
    pairings: Vec<Vec<Gauss>>,
    // ⟨ρ, π(ε_i)⟩
    rho_pairings: Vec<Gauss>,
}

impl LatticeEmbedding {
    /// Builds an embedding and checks `N ≥ 2` and injectivity.
    pub fn new(images: Vec<CVec2>) -> Result<Self> {
        let e = Self::from_images(images)?;
        if let Some(k) = e.kernel_witness() {
            return Err(Error::NotInjective(k));
        }
        Ok(e)
    }

    /// Builds the map without the injectivity check, so that
    /// [`check_conditions`](Self::check_conditions) can report on bad input.
    pub fn from_images(images: Vec<CVec2>) -> Result<Self> {
        if images.len() < 2 {
            return Err(Error::Config(format!(
                "rank must be at least 2, got {}",
                images.len()
            )));
        }
        let pairings = images
            .iter()
            .map(|a| images.iter().map(|b| symplectic(a, b)).collect())
            .collect();
        let r = rho();
        let rho_pairings = images.iter().map(|a| symplectic(&r, a)).collect();
        Ok(LatticeEmbedding {
            images,
            pairings,
            rho_pairings,
        })
    }

    /// N = 2, π(ε₁) = (0, 1), π(ε₂) = (−3, −3+i).
    pub fn demo() -> Self {
        LatticeEmbedding::new(vec![
            CVec2::from_ints(0, 1),
            CVec2::new(Gauss::from_int(-3), Gauss::from_ints(-3, 1)),
        ])
        .expect("demo embedding is injective")
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[CVec2] {
        &self.images
    }

    pub fn image(&self, i: usize) -> &CVec2 {
        &self.images[i]
    }

    /// ⟨π(ε_i), π(ε_j)⟩.
    pub fn pairing(&self, i: usize, j: usize) -> &Gauss {
        &self.pairings[i][j]
    }

    /// ⟨ρ, π(ε_i)⟩.
    pub fn rho_pairing(&self, i: usize) -> &Gauss {
        &self.rho_pairings[i]
    }

    pub fn embed(&self, p: &LatticePoint) -> CVec2 {
        assert_eq!(p.rank(), self.rank(), "rank mismatch");
        let mut x = Gauss::zero();
        let mut y = Gauss::zero();
        for (c, img) in p.0.iter().zip(&self.images) {
            if *c == 0 {
                continue;
            }
            let c = Gauss::from_int(*c);
            x += &img.x * &c;
            y += &img.y * &c;
        }
        CVec2::new(x, y)
    }

    /// ⟨π(a), π(b)⟩ via the cached pairing table.
    pub fn pair(&self, a: &LatticePoint, b: &LatticePoint) -> Gauss {
        let mut acc = Gauss::zero();
        for (i, &ai) in a.0.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.0.iter().enumerate() {
                if bj != 0 && i != j {
                    acc += self.pairings[i][j].clone() * Gauss::from_int(ai * bj);
                }
            }
        }
        acc
    }

    /// ⟨ρ, π(a)⟩.
    pub fn rho_pair(&self, a: &LatticePoint) -> Gauss {
        let mut acc = Gauss::zero();
        for (i, &ai) in a.0.iter().enumerate() {
            if ai != 0 {
                acc += self.rho_pairings[i].clone() * Gauss::from_int(ai);
            }
        }
        acc
    }

    /// The structure constant ⟨π(a)+ρ, π(b)+ρ⟩ of `[L_a, L_b]`.
    pub fn bracket_coeff(&self, a: &LatticePoint, b: &LatticePoint) -> Gauss {
        // ⟨a+ρ, b+ρ⟩ = ⟨a,b⟩ + ⟨a,ρ⟩ + ⟨ρ,b⟩ = ⟨a,b⟩ − ⟨ρ,a⟩ + ⟨ρ,b⟩
        self.pair(a, b) - self.rho_pair(a) + self.rho_pair(b)
    }

    /// The 4×N real matrix of the coordinate map ℚ^N → ℚ⁴ ≅ ℚ(i)².
    fn real_matrix(&self) -> Matrix {
        let cols: Vec<Vec<Gauss>> = self.images.iter().map(real_coords).collect();
        Matrix::from_columns(&cols, 4)
    }

    /// A primitive integer kernel vector if π is not injective.
    fn kernel_witness(&self) -> Option<Vec<i64>> {
        let ns = self.real_matrix().nullspace();
        ns.first().map(|v| primitive_integer_vector(v))
    }

    /// Rational coordinates `a` with `Σ a_i π(ε_i) = v`, if any. Unique when
    /// the map is injective.
    pub fn solve_coords(&self, v: &CVec2) -> Option<Vec<Rational>> {
        let sol = self.real_matrix().solve(&real_coords(v))?;
        Some(sol.into_iter().map(|g| g.re).collect())
    }

    /// Integer preimage of `v`, if `v ∈ π(Λ)`. Requires injectivity.
    pub fn preimage(&self, v: &CVec2) -> Option<LatticePoint> {
        let sol = self.solve_coords(v)?;
        let coords: Option<Vec<i64>> = sol
            .iter()
            .map(|r| r.is_integer().then(|| r.to_integer().to_i64()).flatten())
            .collect();
        let p = LatticePoint(coords?);
        (self.embed(&p) == *v).then_some(p)
    }

    /// Evaluates conditions i)–iii), injectivity and (𝒞) (the latter within
    /// the coordinate box of radius `radius`).
    pub fn check_conditions(&self, radius: u32) -> ConditionReport {
        let r = radius.max(1) as i64;
        let n = self.rank();
        let mut entries = Vec::new();

        let kernel = self.kernel_witness();
        let injective = kernel.is_none();
        entries.push(match &kernel {
            None => ConditionEntry::holds("injective"),
            Some(k) => ConditionEntry::fails("injective", serde_json::json!({ "kernel": k })),
        });

        // i) Im π ⊄ ℂρ
        entries.push(match (0..n).find(|&i| !self.rho_pairing(i).is_zero()) {
            Some(_) => ConditionEntry::holds("i"),
            None => ConditionEntry::fails("i", serde_json::json!({ "reason": "image contained in Cρ" })),
        });

        // ii) 2ρ ∉ Im π
        let two_rho = rho().scale_int(2);
        entries.push(if injective {
            match self.preimage(&two_rho) {
                None => ConditionEntry::holds("ii"),
                Some(p) => ConditionEntry::fails("ii", serde_json::json!({ "preimage": p })),
            }
        } else {
            // The kernel is nontrivial; fall back to a bounded search.
            let hit = LatticePoint::box_points(n, r)
                .into_iter()
                .find(|p| self.embed(p) == two_rho);
            match hit {
                Some(p) => ConditionEntry::fails("ii", serde_json::json!({ "preimage": p })),
                None => ConditionEntry::bounded("ii", radius),
            }
        });

        // iii) Im π does not lie in a complex line
        let spans = (0..n).any(|i| (0..n).any(|j| !self.pairing(i, j).is_zero()));
        entries.push(if spans {
            ConditionEntry::holds("iii")
        } else {
            ConditionEntry::fails("iii", serde_json::json!({ "reason": "image contained in a complex line" }))
        });

        entries.push(match self.find_c_witness(r) {
            Some((a, b)) => ConditionEntry::fails("C", serde_json::json!({ "alpha": a, "beta": b })),
            None => ConditionEntry::bounded("C", radius),
        });

        let weak = self.find_weak_witness(r);
        let informational = vec![match weak {
            Some((a, k)) => ConditionEntry::fails(
                "weak",
                serde_json::json!({ "alpha": a, "k": k + 1 }),
            ),
            None => ConditionEntry::bounded("weak", radius),
        }];

        ConditionReport {
            entries,
            informational,
        }
    }

    /// Smallest `(α, β)` in the box with `β ≠ 0` and `⟨π(α)+2ρ, π(β)⟩ = 0`.
    fn find_c_witness(&self, r: i64) -> Option<(LatticePoint, LatticePoint)> {
        let n = self.rank();
        let pts = LatticePoint::box_points(n, r);
        let betas: Vec<&LatticePoint> = pts.iter().filter(|b| !b.is_zero()).collect();
        let found: Vec<Option<(LatticePoint, LatticePoint)>> = sweep::map(&betas, |b| {
            // ⟨α+2ρ, β⟩ = ⟨α,β⟩ + 2⟨ρ,β⟩
            let two_rb = self.rho_pair(b) * Gauss::from_int(2);
            pts.iter()
                .filter(|a| (self.pair(a, b) + &two_rb).is_zero())
                .min_by(|x, y| witness_key(x).cmp(&witness_key(y)))
                .map(|a| (a.clone(), (*b).clone()))
        });
        found
            .into_iter()
            .flatten()
            .min_by(|(a1, b1), (a2, b2)| {
                (witness_key(b1), witness_key(a1)).cmp(&(witness_key(b2), witness_key(a2)))
            })
    }

    /// The weaker condition `⟨α+2ρ, ε_k⟩ ≠ 0`; informational only.
    fn find_weak_witness(&self, r: i64) -> Option<(LatticePoint, usize)> {
        let n = self.rank();
        LatticePoint::box_points(n, r)
            .into_iter()
            .flat_map(|a| (0..n).map(move |k| (a.clone(), k)))
            .filter(|(a, k)| {
                let e = LatticePoint::basis(n, *k);
                (self.pair(a, &e) + self.rho_pair(&e) * Gauss::from_int(2)).is_zero()
            })
            .min_by(|(a1, k1), (a2, k2)| (witness_key(a1), k1).cmp(&(witness_key(a2), k2)))
    }

    /// Parses `{ "rank": N, "images": [[gauss, gauss], ...] }`. Scalars may be
    /// strings in the scalar grammar or plain JSON integers.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let rank = v
            .get("rank")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Config("missing integer field `rank`".into()))?;
        let imgs = v
            .get("images")
            .and_then(serde_json::Value::as_array)
            .ok_or_else(|| Error::Config("missing array field `images`".into()))?;
        if imgs.len() as u64 != rank {
            return Err(Error::Config(format!(
                "rank {rank} but {} images given",
                imgs.len()
            )));
        }
        let images = imgs.iter().map(parse_cvec2).collect::<Result<Vec<_>>>()?;
        Self::from_images(images)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rank": self.rank(),
            "images": self.images.iter()
                .map(|v| vec![v.x.to_string(), v.y.to_string()])
                .collect::<Vec<_>>(),
        })
    }
}

impl fmt::Debug for LatticeEmbedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatticeEmbedding")
            .field("images", &self.images)
            .finish()
    }
}

/// Parses one scalar from a JSON string or integer.
pub fn parse_gauss_json(v: &serde_json::Value) -> Result<Gauss> {
    match v {
        serde_json::Value::String(s) => Gauss::parse(s),
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(Gauss::from_int)
            .ok_or_else(|| Error::Config(format!("non-integer number {n}; use a string"))),
        other => Err(Error::Config(format!("expected a scalar, found {other}"))),
    }
}

/// Parses `[gauss, gauss]`.
pub fn parse_cvec2(v: &serde_json::Value) -> Result<CVec2> {
    match v.as_array().map(Vec::as_slice) {
        Some([x, y]) => Ok(CVec2::new(parse_gauss_json(x)?, parse_gauss_json(y)?)),
        _ => Err(Error::Config(format!("expected a pair of scalars, found {v}"))),
    }
}

fn real_coords(v: &CVec2) -> Vec<Gauss> {
    [&v.x.re, &v.x.im, &v.y.re, &v.y.im]
        .into_iter()
        .map(|r| Gauss::from_rational(r.clone()))
        .collect()
}

fn primitive_integer_vector(v: &[Gauss]) -> Vec<i64> {
    use num_integer::Integer;
    let lcm = v
        .iter()
        .fold(num_bigint::BigInt::one(), |acc, c| acc.lcm(c.re.denom()));
    let ints: Vec<num_bigint::BigInt> = v.iter().map(|c| (&c.re * &lcm).to_integer()).collect();
    let g = ints
        .iter()
        .fold(num_bigint::BigInt::zero(), |acc, c| acc.gcd(c));
    let sign = ints
        .iter()
        .find(|c| !c.is_zero())
        .map_or(1, |c| if c.is_negative() { -1 } else { 1 });
    ints.iter()
        .map(|c| (c / &g * num_bigint::BigInt::from(sign)).to_i64().unwrap_or(i64::MAX))
        .collect()
}

/// Deterministic preference among witnesses: small max-norm, then small
/// ℓ¹-norm, then coordinatewise by magnitude with positive before negative.
fn witness_key(p: &LatticePoint) -> (i64, i64, Vec<(i64, bool)>) {
    (
        p.max_norm(),
        p.l1_norm(),
        p.0.iter().map(|&c| (c.abs(), c < 0)).collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionStatus {
    Holds,
    Fails,
    VerifiedUpToRadius,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub condition: String,
    pub status: ConditionStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<u32>,
}

impl ConditionEntry {
    fn holds(name: &str) -> Self {
        ConditionEntry {
            condition: name.into(),
            status: ConditionStatus::Holds,
            witness: None,
            radius: None,
        }
    }

    fn fails(name: &str, witness: serde_json::Value) -> Self {
        ConditionEntry {
            condition: name.into(),
            status: ConditionStatus::Fails,
            witness: Some(witness),
            radius: None,
        }
    }

    fn bounded(name: &str, radius: u32) -> Self {
        ConditionEntry {
            condition: name.into(),
            status: ConditionStatus::VerifiedUpToRadius,
            witness: None,
            radius: Some(radius),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != ConditionStatus::Fails
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub entries: Vec<ConditionEntry>,
    /// The weaker sufficient condition, reported but never used.
    pub informational: Vec<ConditionEntry>,
}

impl ConditionReport {
    pub fn get(&self, name: &str) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| e.condition == name)
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(ConditionEntry::passed)
    }
}

/// A coset `Γ = β + π(Λ)`.
#[derive(Clone)]
pub struct Coset {
    pub base: CVec2,
    pub embedding: Arc<LatticeEmbedding>,
}

impl Coset {
    pub fn new(base: CVec2, embedding: Arc<LatticeEmbedding>) -> Self {
        Coset { base, embedding }
    }

    /// The weight `β + π(k)`.
    pub fn point(&self, k: &LatticePoint) -> CVec2 {
        &self.base + &self.embedding.embed(k)
    }

    /// Whether `v ∈ Γ`; the witness `k` satisfies `v = β + π(k)`.
    pub fn contains(&self, v: &CVec2) -> Option<LatticePoint> {
        self.embedding.preimage(&(v - &self.base))
    }

    /// The same coset with base moved by `π(k)`.
    pub fn rebase(&self, k: &LatticePoint) -> Coset {
        Coset::new(self.point(k), self.embedding.clone())
    }
}

impl PartialEq for Coset {
    fn eq(&self, other: &Self) -> bool {
        self.embedding == other.embedding && self.contains(&other.base).is_some()
    }
}

impl fmt::Debug for Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coset({} + π(Λ))", self.base)
    }
}

pub fn coset_contains(g: &Coset, v: &CVec2) -> Option<LatticePoint> {
    g.contains(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lp(c: &[i64]) -> LatticePoint {
        LatticePoint(c.to_vec())
    }

    #[test]
    fn embed_examples() {
        let e = LatticeEmbedding::demo();
        assert_eq!(e.embed(&lp(&[0, 0])), CVec2::zero());
        assert_eq!(e.embed(&lp(&[1, 0])), CVec2::from_ints(0, 1));
        assert_eq!(
            e.embed(&lp(&[1, 1])),
            CVec2::new(Gauss::from_int(-3), Gauss::from_ints(-2, 1))
        );
    }

    #[test]
    fn cached_pairings_match_direct() {
        let e = LatticeEmbedding::demo();
        assert_eq!(*e.rho_pairing(0), Gauss::one());
        assert_eq!(*e.rho_pairing(1), Gauss::i());
        assert_eq!(*e.pairing(0, 1), Gauss::from_int(3));
        for i in 0..2 {
            assert_eq!(*e.rho_pairing(i), symplectic(&rho(), e.image(i)));
            for j in 0..2 {
                assert_eq!(*e.pairing(i, j), symplectic(e.image(i), e.image(j)));
            }
        }
    }

    #[test]
    fn bracket_coeff_matches_direct() {
        let e = LatticeEmbedding::demo();
        let (a, b) = (lp(&[2, -1]), lp(&[-3, 1]));
        let direct = symplectic(&(&e.embed(&a) + &rho()), &(&e.embed(&b) + &rho()));
        assert_eq!(e.bracket_coeff(&a, &b), direct);
        // ⟨ε₂+ρ, ε₁+ρ⟩ = −(2+i)
        assert_eq!(e.bracket_coeff(&lp(&[0, 1]), &lp(&[1, 0])), Gauss::from_ints(-2, -1));
    }

    #[test]
    fn demo_conditions_hold() {
        let rep = LatticeEmbedding::demo().check_conditions(6);
        assert!(rep.all_pass());
        for c in ["injective", "i", "ii", "iii"] {
            assert_eq!(rep.get(c).unwrap().status, ConditionStatus::Holds, "{c}");
        }
        let c = rep.get("C").unwrap();
        assert_eq!(c.status, ConditionStatus::VerifiedUpToRadius);
        assert_eq!(c.radius, Some(6));
    }

    #[test]
    fn c_counterexample_witness() {
        let e = LatticeEmbedding::new(vec![CVec2::from_ints(1, 0), CVec2::new(Gauss::zero(), Gauss::i())])
            .unwrap();
        let rep = e.check_conditions(3);
        let c = rep.get("C").unwrap();
        assert_eq!(c.status, ConditionStatus::Fails);
        assert_eq!(
            c.witness.as_ref().unwrap(),
            &serde_json::json!({ "alpha": [-2, 0], "beta": [0, 1] })
        );
    }

    #[test]
    fn collinear_fails_i_and_injectivity() {
        let e = LatticeEmbedding::from_images(vec![CVec2::from_ints(1, 1), CVec2::from_ints(2, 2)]).unwrap();
        let rep = e.check_conditions(2);
        assert_eq!(rep.get("i").unwrap().status, ConditionStatus::Fails);
        assert_eq!(rep.get("injective").unwrap().status, ConditionStatus::Fails);
        assert!(matches!(
            LatticeEmbedding::new(e.images().to_vec()),
            Err(Error::NotInjective(_))
        ));
    }

    #[test]
    fn rank_one_rejected() {
        assert!(LatticeEmbedding::from_images(vec![CVec2::from_ints(1, 0)]).is_err());
    }

    #[test]
    fn coset_examples() {
        let e = Arc::new(LatticeEmbedding::demo());
        let g0 = Coset::new(CVec2::zero(), e.clone());
        assert_eq!(g0.contains(&CVec2::zero()), Some(lp(&[0, 0])));
        assert_eq!(g0.contains(&CVec2::from_ints(2, 2)), None);
        let g1 = Coset::new(-rho(), e.clone());
        assert_eq!(g1.contains(&-rho()), Some(lp(&[0, 0])));
        assert_eq!(g1, g1.rebase(&lp(&[3, -2])));
        assert_ne!(g0, g1);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{ "rank": 2, "images": [["0", "1"], [-3, "-3+i"]] }"#;
        let e = LatticeEmbedding::from_json(text).unwrap();
        assert_eq!(e, LatticeEmbedding::demo());
        let again = LatticeEmbedding::from_json(&e.to_json().to_string()).unwrap();
        assert_eq!(again, e);
        assert!(LatticeEmbedding::from_json(r#"{ "rank": 3, "images": [] }"#).is_err());
        assert!(LatticeEmbedding::from_json("not json").is_err());
    }

    #[test]
    fn box_points_count() {
        assert_eq!(LatticePoint::box_points(2, 1).len(), 9);
        assert_eq!(LatticePoint::box_points_between(&[0, 0], &[2, 1]).len(), 6);
    }

    proptest! {
        #[test]
        fn embed_additive(a in prop::collection::vec(-20i64..20, 2), b in prop::collection::vec(-20i64..20, 2)) {
            let e = LatticeEmbedding::demo();
            let (a, b) = (LatticePoint(a), LatticePoint(b));
            prop_assert_eq!(e.embed(&(&a + &b)), &e.embed(&a) + &e.embed(&b));
        }

        #[test]
        fn coset_witness_round_trips(p in prop::collection::vec(-20i64..20, 2)) {
            let e = Arc::new(LatticeEmbedding::demo());
            let g = Coset::new(CVec2::new(Gauss::rat(1, 3), Gauss::from_ints(0, 2)), e.clone());
            let p = LatticePoint(p);
            let w = g.contains(&g.point(&p));
            prop_assert_eq!(w, Some(p));
        }
    }
}
