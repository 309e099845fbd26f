//! PBW normal forms in `U(W_π)` and the differentiator calculus.
//!
//! Basis letters are lattice points `k` standing for `L_{π(k)}`. A word is
//! normal when its letters are nondecreasing for [`LatticePoint::pbw_cmp`]
//! (reversed lexicographic order, so `ε_1 ≺ ε_2`). Rewriting replaces the
//! first descent `L_a L_b` by `L_b L_a + ⟨a+ρ, b+ρ⟩ L_{a+b}`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{LatticeEmbedding, LatticePoint};
use crate::scalars::Gauss;

pub const DEFAULT_WORD_BOUND: usize = 6;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct UWord(pub Vec<LatticePoint>);

impl UWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_normal(&self) -> bool {
        self.first_descent().is_none()
    }

    fn descents(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0].pbw_cmp(&w[1]) == Ordering::Greater)
            .map(|(i, _)| i)
    }

    fn first_descent(&self) -> Option<usize> {
        self.descents().next()
    }

    /// Returns `(swapped, merged)` for the descent at position `i`.
    fn rewrite_at(&self, i: usize) -> (UWord, UWord) {
        let mut swapped = self.0.clone();
        swapped.swap(i, i + 1);
        let mut merged = Vec::with_capacity(self.len() - 1);
        merged.extend_from_slice(&self.0[..i]);
        merged.push(&self.0[i] + &self.0[i + 1]);
        merged.extend_from_slice(&self.0[i + 2..]);
        (UWord(swapped), UWord(merged))
    }
}

impl fmt::Display for UWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|p| {
                let c: Vec<String> = p.0.iter().map(i64::to_string).collect();
                format!("L[{}]", c.join(", "))
            })
            .collect();
        write!(f, "{}", parts.join("·"))
    }
}

impl fmt::Debug for UWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A combination of normal words.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct UElement {
    terms: BTreeMap<UWord, Gauss>,
}

impl UElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        let mut e = Self::zero();
        e.add_term(UWord::default(), Gauss::one());
        e
    }

    fn add_term(&mut self, w: UWord, c: Gauss) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(slot) => {
                *slot += c;
                if slot.is_zero() {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    fn add_scaled(&mut self, other: &UElement, c: &Gauss) {
        if c.is_zero() {
            return;
        }
        for (w, v) in &other.terms {
            self.add_term(w.clone(), v * c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&UWord, &Gauss)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &UWord) -> Gauss {
        self.terms.get(w).cloned().unwrap_or_else(Gauss::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest word length present.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(UWord::len).max().unwrap_or(0)
    }

    /// The part made of words of exactly length `d`.
    pub fn homogeneous_part(&self, d: usize) -> UElement {
        UElement {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.len() == d)
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &Gauss::one());
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &-Gauss::one());
        out
    }

    pub fn scale(&self, c: &Gauss) -> Self {
        let mut out = Self::zero();
        out.add_scaled(self, c);
        out
    }
}

impl fmt::Display for UElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| {
                let c = if c.is_real() || c.re.is_zero() {
                    c.to_string()
                } else {
                    format!("({c})")
                };
                format!("{c} * {w}")
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for UElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `Ω^{(m)}_{α,β;ξ} = Σ_i (−1)^i C(m,i) L_{α−iξ} L_{β+iξ}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentiatorSpec {
    pub alpha: LatticePoint,
    pub beta: LatticePoint,
    pub xi: LatticePoint,
    pub m: usize,
}

impl DifferentiatorSpec {
    pub fn new(alpha: LatticePoint, beta: LatticePoint, xi: LatticePoint, m: usize) -> Self {
        DifferentiatorSpec { alpha, beta, xi, m }
    }

    /// The raw (unnormalised) terms `(coefficient, [α−iξ, β+iξ])`.
    pub fn raw_terms(&self) -> Vec<(Gauss, [LatticePoint; 2])> {
        (0..=self.m)
            .map(|i| {
                let sign = if i % 2 == 0 { 1 } else { -1 };
                let c = Gauss::from_int(sign * binomial(self.m, i));
                let s = self.xi.scale(i as i64);
                (c, [&self.alpha - &s, &self.beta + &s])
            })
            .collect()
    }
}

pub fn binomial(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// Normal-form engine with a concurrent memo of already-normalised words.
pub struct PbwRewriter {
    emb: Arc<LatticeEmbedding>,
    bound: usize,
    memo: DashMap<UWord, Arc<UElement>>,
}

impl PbwRewriter {
    pub fn new(emb: Arc<LatticeEmbedding>) -> Self {
        Self::with_bound(emb, DEFAULT_WORD_BOUND)
    }

    pub fn with_bound(emb: Arc<LatticeEmbedding>, bound: usize) -> Self {
        PbwRewriter {
            emb,
            bound,
            memo: DashMap::new(),
        }
    }

    pub fn embedding(&self) -> &Arc<LatticeEmbedding> {
        &self.emb
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn memo_size(&self) -> usize {
        self.memo.len()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len > self.bound {
            Err(Error::WordLengthExceeded {
                len,
                bound: self.bound,
            })
        } else {
            Ok(())
        }
    }

    /// Normal form of `coeff · L_{w_1} ⋯ L_{w_k}`.
    pub fn normal_form(&self, word: &[LatticePoint], coeff: &Gauss) -> Result<UElement> {
        self.check_len(word.len())?;
        Ok(self.nf(&UWord(word.to_vec())).scale(coeff))
    }

    /// Normal form of the single word `L_{w_1} ⋯ L_{w_k}`.
    pub fn word(&self, word: &[LatticePoint]) -> Result<UElement> {
        self.normal_form(word, &Gauss::one())
    }

    /// The generator `L_k`.
    pub fn letter(&self, k: &LatticePoint) -> UElement {
        let mut e = UElement::zero();
        e.add_term(UWord(vec![k.clone()]), Gauss::one());
        e
    }

    fn nf(&self, w: &UWord) -> Arc<UElement> {
        if w.is_normal() {
            let mut e = UElement::zero();
            e.add_term(w.clone(), Gauss::one());
            return Arc::new(e);
        }
        if let Some(hit) = self.memo.get(w) {
            return hit.clone();
        }
        let i = w.first_descent().expect("non-normal word has a descent");
        let (swapped, merged) = w.rewrite_at(i);
        let c = self.emb.bracket_coeff(&w.0[i], &w.0[i + 1]);
        let mut out = (*self.nf(&swapped)).clone();
        if !c.is_zero() {
            out.add_scaled(&self.nf(&merged), &c);
        }
        let out = Arc::new(out);
        self.memo.insert(w.clone(), out.clone());
        out
    }

    /// Normal form computed by rewriting at a randomly chosen descent each
    /// step, bypassing the memo. Used to test confluence.
    pub fn normal_form_random_order<R: Rng>(
        &self,
        word: &[LatticePoint],
        coeff: &Gauss,
        rng: &mut R,
    ) -> Result<UElement> {
        self.check_len(word.len())?;
        let mut pending: BTreeMap<UWord, Gauss> = BTreeMap::new();
        pending.insert(UWord(word.to_vec()), coeff.clone());
        let mut done = UElement::zero();
        while let Some((w, c)) = pending.pop_first() {
            if c.is_zero() {
                continue;
            }
            let ds: Vec<usize> = w.descents().collect();
            if ds.is_empty() {
                done.add_term(w, c);
                continue;
            }
            let i = ds[rng.gen_range(0..ds.len())];
            let (swapped, merged) = w.rewrite_at(i);
            let k = self.emb.bracket_coeff(&w.0[i], &w.0[i + 1]);
            *pending.entry(swapped).or_insert_with(Gauss::zero) += &c;
            if !k.is_zero() {
                *pending.entry(merged).or_insert_with(Gauss::zero) += c * k;
            }
        }
        Ok(done)
    }

    /// Product `a · b` (concatenate, then normalise).
    pub fn mul(&self, a: &UElement, b: &UElement) -> Result<UElement> {
        self.check_len(a.degree() + b.degree())?;
        let mut out = UElement::zero();
        for (wa, ca) in a.terms() {
            for (wb, cb) in b.terms() {
                let mut w = wa.0.clone();
                w.extend_from_slice(&wb.0);
                out.add_scaled(&self.nf(&UWord(w)), &(ca * cb));
            }
        }
        Ok(out)
    }

    /// `ab + ba`.
    pub fn anticommutator(&self, a: &UElement, b: &UElement) -> Result<UElement> {
        Ok(self.mul(a, b)?.add(&self.mul(b, a)?))
    }

    /// `ab − ba`.
    pub fn commutator(&self, a: &UElement, b: &UElement) -> Result<UElement> {
        Ok(self.mul(a, b)?.sub(&self.mul(b, a)?))
    }

    pub fn differentiator(&self, spec: &DifferentiatorSpec) -> Result<UElement> {
        let mut out = UElement::zero();
        for (c, w) in spec.raw_terms() {
            out.add_scaled(&self.nf(&UWord(w.to_vec())), &c);
        }
        Ok(out)
    }

    fn omega(&self, a: &LatticePoint, b: &LatticePoint, xi: &LatticePoint, m: usize) -> Result<UElement> {
        self.differentiator(&DifferentiatorSpec::new(a.clone(), b.clone(), xi.clone(), m))
    }

    /// Residual of `Ω^{(m)}_{α,β;ξ} = (−1)^m Ω^{(m)}_{α−mξ,β+mξ;−ξ}`.
    pub fn reflection_residual(&self, s: &DifferentiatorSpec) -> Result<UElement> {
        let shift = s.xi.scale(s.m as i64);
        let rhs = self.omega(&(&s.alpha - &shift), &(&s.beta + &shift), &-&s.xi, s.m)?;
        let sign = Gauss::from_int(if s.m.is_multiple_of(2) { 1 } else { -1 });
        Ok(self.differentiator(s)?.sub(&rhs.scale(&sign)))
    }

    /// Residual of `Ω^{(m)}_{α,β;ξ} = Ω^{(m−1)}_{α,β;ξ} − Ω^{(m−1)}_{α−ξ,β+ξ;ξ}` (m ≥ 1).
    pub fn recursion_residual(&self, s: &DifferentiatorSpec) -> Result<UElement> {
        assert!(s.m >= 1, "recursion relation needs m ≥ 1");
        let a = self.omega(&s.alpha, &s.beta, &s.xi, s.m - 1)?;
        let b = self.omega(&(&s.alpha - &s.xi), &(&s.beta + &s.xi), &s.xi, s.m - 1)?;
        Ok(self.differentiator(s)?.sub(&a).add(&b))
    }

    /// The double binomial sum of anticommutators on the left of the
    /// differentiator identity.
    pub fn bf_lhs(&self, p: &BfParams) -> Result<UElement> {
        let BfParams { alpha, beta, gamma, delta, xi, m, r } = p;
        let mut out = UElement::zero();
        for i in 0..=*m {
            for j in 0..=*r {
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                let c = Gauss::from_int(sign * binomial(*m, i) * binomial(*r, j));
                let (ix, jx) = (xi.scale(i as i64), xi.scale(j as i64));
                let a1 = self.omega(&(alpha - &ix), &(beta - &jx), xi, *m)?;
                let b1 = self.omega(&(gamma + &ix), &(delta + &jx), xi, *r)?;
                let a2 = self.omega(&(alpha - &ix), &(gamma - &jx), xi, *m)?;
                let b2 = self.omega(&(beta + &ix), &(delta + &jx), xi, *r)?;
                let term = self
                    .anticommutator(&a1, &b1)?
                    .sub(&self.anticommutator(&a2, &b2)?);
                out.add_scaled(&term, &c);
            }
        }
        Ok(out)
    }

    /// The three-differentiator combination on the right, built from `k`, in
    /// the requested form (see [`RhsForm`]).
    pub fn bf_rhs_from(&self, p: &BfParams, k: &BfCoefficients, form: RhsForm) -> Result<UElement> {
        let BfParams { alpha, beta, gamma, delta, xi, m, r } = p;
        let (m, r) = (*m, *r);
        let ad = alpha + delta;
        let bg = beta + gamma;
        let top = 2 * m + 2 * r;
        let o0 = self.omega(&(&ad + &xi.scale(2 * r as i64)), &(&bg - &xi.scale(2 * r as i64)), xi, top)?;
        let o1 = self.omega(
            &(&ad + &xi.scale(2 * r as i64 - 1)),
            &(&bg - &xi.scale(2 * r as i64 - 1)),
            xi,
            top - 1,
        )?;
        let o2 = self.omega(
            &(&ad + &xi.scale(2 * r as i64 - 2)),
            &(&bg - &xi.scale(2 * r as i64 - 2)),
            xi,
            top - 2,
        )?;
        let two = Gauss::from_int(2);
        let mut out = UElement::zero();
        out.add_scaled(&o0, &(&k.c1 * &k.k));
        out.add_scaled(&o1, &(&k.c1 * &two * &k.lm));
        let mr2 = Gauss::from_int(match form {
            RhsForm::Printed => 2 * (m + r) as i64,
            RhsForm::Corrected => (m + r) as i64,
        });
        out.add_scaled(&o1, &-(&k.d * (&mr2 * &k.k - &k.lm)));
        out.add_scaled(&o2, &-(&k.d * &k.lm * Gauss::from_int(top as i64 - 1)));
        Ok(out)
    }

    pub fn bf_rhs(&self, p: &BfParams, form: RhsForm) -> Result<UElement> {
        self.bf_rhs_from(p, &p.coefficients(&self.emb), form)
    }

    /// The two-term right-hand side valid when `β − γ ∈ ℤξ`.
    pub fn bf_rhs_collapsed(&self, p: &BfParams) -> Result<UElement> {
        let BfParams { alpha, beta, gamma, delta, xi, m, r } = p;
        let (m, r) = (*m, *r);
        let e = &self.emb;
        let c = e.bracket_coeff(beta, gamma);
        let k = e.bracket_coeff(alpha, &(delta + &xi.scale(2 * r as i64)));
        let lm = p.coefficients(e).lm;
        let ad = alpha + delta;
        let bg = beta + gamma;
        let top = 2 * m + 2 * r;
        let o0 = self.omega(&(&ad + &xi.scale(2 * r as i64)), &(&bg - &xi.scale(2 * r as i64)), xi, top)?;
        let o1 = self.omega(
            &(&ad + &xi.scale(2 * r as i64 - 1)),
            &(&bg - &xi.scale(2 * r as i64 - 1)),
            xi,
            top - 1,
        )?;
        Ok(o0.scale(&(&c * &k)).add(&o1.scale(&(&c * Gauss::from_int(2) * &lm))))
    }

    /// Independent form of the right-hand side: the quadruple binomial sum
    /// `Σ (−1)^u C·(c₁ + ½u·d)(K − (i+a)X − (j+b)Y) Ω-monomials` with
    /// `u = i+j+a+b`, `X = ⟨ξ, δ+ρ⟩`, `Y = ⟨α+ρ, ξ⟩`, before the binomial
    /// sums are collapsed into differentiators.
    pub fn bf_rhs_expanded(&self, p: &BfParams) -> Result<UElement> {
        let BfParams { alpha, delta, xi, m, r, .. } = p;
        let (m, r) = (*m, *r);
        let e = &self.emb;
        let k = p.coefficients(e);
        let x = e.pair(xi, delta) - e.rho_pair(xi);
        let y = e.pair(alpha, xi) + e.rho_pair(xi);
        let ad = alpha + delta;
        let bg = &p.beta + &p.gamma;
        let mut out = UElement::zero();
        for i in 0..=m {
            for a in 0..=m {
                for j in 0..=r {
                    for b in 0..=r {
                        let u = (i + j + a + b) as i64;
                        let sign = if u % 2 == 0 { 1 } else { -1 };
                        let bin = sign * binomial(m, i) * binomial(m, a) * binomial(r, j) * binomial(r, b);
                        let f1 = &k.c1 + &k.d * Gauss::rat(u, 2);
                        let f2 = &k.k - &x * Gauss::from_int((i + a) as i64) - &y * Gauss::from_int((j + b) as i64);
                        let s = xi.scale(2 * r as i64 - u);
                        let w = self.word(&[&ad + &s, &bg - &s])?;
                        out.add_scaled(&w, &(f1 * f2 * Gauss::from_int(bin)));
                    }
                }
            }
        }
        Ok(out)
    }

    /// `LHS − RHS`; zero iff the identity holds for these parameters.
    pub fn verify_bf_identity(&self, p: &BfParams, form: RhsForm) -> Result<UElement> {
        Ok(self.bf_lhs(p)?.sub(&self.bf_rhs(p, form)?))
    }
}

/// Which coefficient of the `⟨β−γ,ξ⟩⟨α+ρ,δ+2rξ+ρ⟩ Ω^{(2m+2r−1)}` term to use.
///
/// `Printed` is the grouped closed form as usually stated, with factor
/// `2(m+r)`. Collapsing the quadruple binomial sum (see
/// [`PbwRewriter::bf_rhs_expanded`]) by generating functions gives `(m+r)`
/// instead: the weight `½u·⟨β−γ,ξ⟩` contributes `½ t d/dt (1−t)^{2m+2r}`.
/// `Corrected` uses that factor. The two agree whenever `⟨β−γ,ξ⟩ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhsForm {
    Printed,
    Corrected,
}

/// Parameters `(α, β, γ, δ, ξ; m, r)` of the differentiator identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BfParams {
    pub alpha: LatticePoint,
    pub beta: LatticePoint,
    pub gamma: LatticePoint,
    pub delta: LatticePoint,
    pub xi: LatticePoint,
    pub m: usize,
    pub r: usize,
}

/// Scalar coefficients of the right-hand side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BfCoefficients {
    /// ⟨β−rξ+ρ, γ−rξ+ρ⟩
    pub c1: Gauss,
    /// ⟨α+ρ, δ+2rξ+ρ⟩
    pub k: Gauss,
    /// m⟨ξ, δ+ρ⟩ + r⟨α+ρ, ξ⟩
    pub lm: Gauss,
    /// ⟨β−γ, ξ⟩
    pub d: Gauss,
}

impl BfParams {
    pub fn coefficients(&self, e: &LatticeEmbedding) -> BfCoefficients {
        let (m, r) = (self.m as i64, self.r as i64);
        let rx = self.xi.scale(r);
        // ⟨ξ, δ+ρ⟩ = ⟨ξ,δ⟩ − ⟨ρ,ξ⟩ and ⟨α+ρ, ξ⟩ = ⟨α,ξ⟩ + ⟨ρ,ξ⟩
        let xi_dr = e.pair(&self.xi, &self.delta) - e.rho_pair(&self.xi);
        let ar_xi = e.pair(&self.alpha, &self.xi) + e.rho_pair(&self.xi);
        BfCoefficients {
            c1: e.bracket_coeff(&(&self.beta - &rx), &(&self.gamma - &rx)),
            k: e.bracket_coeff(&self.alpha, &(&self.delta + &self.xi.scale(2 * r))),
            lm: xi_dr * Gauss::from_int(m) + ar_xi * Gauss::from_int(r),
            d: e.pair(&(&self.beta - &self.gamma), &self.xi),
        }
    }

    /// Whether `β − γ` is an integer multiple of `ξ`.
    pub fn collapses(&self) -> bool {
        let diff = &self.beta - &self.gamma;
        if self.xi.is_zero() {
            return diff.is_zero();
        }
        let (i, &x) = self
            .xi
            .0
            .iter()
            .enumerate()
            .find(|(_, &x)| x != 0)
            .expect("nonzero ξ");
        diff.0[i] % x == 0 && self.xi.scale(diff.0[i] / x) == diff
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lp(c: &[i64]) -> LatticePoint {
        LatticePoint(c.to_vec())
    }

    fn rw() -> PbwRewriter {
        PbwRewriter::new(Arc::new(LatticeEmbedding::demo()))
    }

    fn single(w: &[&[i64]], c: Gauss) -> UElement {
        let mut e = UElement::zero();
        e.add_term(UWord(w.iter().map(|p| lp(p)).collect()), c);
        e
    }

    #[test]
    fn swap_example() {
        let nf = rw().word(&[lp(&[0, 1]), lp(&[1, 0])]).unwrap();
        let want = single(&[&[1, 0], &[0, 1]], Gauss::one())
            .add(&single(&[&[1, 1]], Gauss::from_ints(-2, -1)));
        assert_eq!(nf, want);
    }

    #[test]
    fn normal_words_are_fixed() {
        let r = rw();
        let w = [lp(&[1, 0]), lp(&[1, 0]), lp(&[0, 1]), lp(&[-2, 5])];
        assert_eq!(r.word(&w).unwrap(), single(&[&[1, 0], &[1, 0], &[0, 1], &[-2, 5]], Gauss::one()));
        assert_eq!(r.word(&[lp(&[1, 0]), lp(&[1, 0])]).unwrap().len(), 1);
    }

    #[test]
    fn length_bound_enforced() {
        let r = PbwRewriter::with_bound(Arc::new(LatticeEmbedding::demo()), 3);
        let w = vec![lp(&[0, 1]); 4];
        assert_eq!(
            r.word(&w),
            Err(Error::WordLengthExceeded { len: 4, bound: 3 })
        );
        let a = r.word(&w[..2]).unwrap();
        assert!(r.mul(&a, &a).is_err());
    }

    #[test]
    fn mul_examples() {
        let r = rw();
        let e1 = r.letter(&lp(&[1, 0]));
        let e2 = r.letter(&lp(&[0, 1]));
        let a = r.mul(&e1, &e2).unwrap();
        assert_eq!(r.mul(&a, &UElement::one()).unwrap(), a);
        assert_eq!(
            r.mul(&e2, &e1).unwrap(),
            r.word(&[lp(&[0, 1]), lp(&[1, 0])]).unwrap()
        );
        // (L_{ε₁}L_{ε₂})·L_{ε₁}: leading word plus two corrections
        let p = r.mul(&a, &e1).unwrap();
        let c = Gauss::from_ints(-2, -1);
        let want = single(&[&[1, 0], &[1, 0], &[0, 1]], Gauss::one())
            .add(&single(&[&[1, 1], &[1, 0]], c.clone()))
            .add(&single(&[&[2, 1]], c * Gauss::from_ints(3, 1)));
        assert_eq!(p, want);
    }

    #[test]
    fn differentiator_examples() {
        let r = rw();
        let (a, b, x) = (lp(&[2, -1]), lp(&[0, 3]), lp(&[1, 1]));
        let d0 = r.differentiator(&DifferentiatorSpec::new(a.clone(), b.clone(), x, 0)).unwrap();
        assert_eq!(d0, r.word(&[a, b]).unwrap());
        let z = lp(&[0, 0]);
        let d1 = r
            .differentiator(&DifferentiatorSpec::new(z.clone(), z.clone(), lp(&[1, 0]), 1))
            .unwrap();
        let want = r
            .word(&[z.clone(), z])
            .unwrap()
            .sub(&r.word(&[lp(&[-1, 0]), lp(&[1, 0])]).unwrap());
        assert_eq!(d1, want);
    }

    #[test]
    fn differentiator_relations() {
        let r = rw();
        for m in 0..=5 {
            let s = DifferentiatorSpec::new(lp(&[1, -2]), lp(&[0, 1]), lp(&[-1, 2]), m);
            assert!(r.reflection_residual(&s).unwrap().is_zero(), "m = {m}");
            if m >= 1 {
                assert!(r.recursion_residual(&s).unwrap().is_zero(), "m = {m}");
            }
        }
    }

    #[test]
    fn confluence_under_random_order() {
        let r = rw();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = [lp(&[0, 1]), lp(&[-1, 2]), lp(&[1, 0]), lp(&[2, -1]), lp(&[0, 1])];
        let a = r.word(&w).unwrap();
        for _ in 0..5 {
            let b = r.normal_form_random_order(&w, &Gauss::one(), &mut rng).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn bf_identity_example_and_sanity() {
        let r = rw();
        let p = BfParams {
            alpha: lp(&[1, 0]),
            beta: lp(&[0, 1]),
            gamma: lp(&[0, -1]),
            delta: lp(&[-1, 0]),
            xi: lp(&[1, 1]),
            m: 2,
            r: 2,
        };
        let lhs = r.bf_lhs(&p).unwrap();
        assert!(lhs.homogeneous_part(4).is_zero());
        assert_eq!(lhs, r.bf_rhs_expanded(&p).unwrap());
        let res = r.verify_bf_identity(&p, RhsForm::Corrected).unwrap();
        assert!(res.is_zero(), "residual: {res}");
        // The printed factor 2(m+r) is off by exactly (m+r)·d·K·Ω^{(2m+2r−1)}.
        let k = p.coefficients(r.embedding());
        assert!(!k.d.is_zero());
        let printed = r.verify_bf_identity(&p, RhsForm::Printed).unwrap();
        let o1 = r
            .differentiator(&DifferentiatorSpec::new(
                &(&p.alpha + &p.delta) + &p.xi.scale(3),
                &(&p.beta + &p.gamma) - &p.xi.scale(3),
                p.xi.clone(),
                7,
            ))
            .unwrap();
        assert_eq!(printed, o1.scale(&(&k.d * &k.k * Gauss::from_int(4))));
        let mut k2 = k.clone();
        k2.k += Gauss::one();
        let bad = lhs.sub(&r.bf_rhs_from(&p, &k2, RhsForm::Corrected).unwrap());
        assert!(!bad.is_zero());
    }

    #[test]
    fn bf_identity_collapsed_case() {
        let r = rw();
        let p = BfParams {
            alpha: lp(&[2, -1]),
            beta: lp(&[1, 2]),
            gamma: lp(&[0, 1]),
            delta: lp(&[-1, 1]),
            xi: lp(&[1, 1]),
            m: 2,
            r: 2,
        };
        assert!(p.collapses());
        assert!(p.coefficients(r.embedding()).d.is_zero());
        let lhs = r.bf_lhs(&p).unwrap();
        assert_eq!(lhs, r.bf_rhs(&p, RhsForm::Printed).unwrap());
        assert_eq!(lhs, r.bf_rhs(&p, RhsForm::Corrected).unwrap());
        assert_eq!(lhs, r.bf_rhs_collapsed(&p).unwrap());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(12, 6), 924);
        assert_eq!(binomial(3, 4), 0);
    }
}
