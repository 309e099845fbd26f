//! The Poisson algebra of symbols `L_λ` (λ ∈ ℂ²), the polynomial Poisson algebra
//! `S•V` on `V = ℂ²`, and the sl₂ triple acting on `S^nV`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::LatticeEmbedding;
use crate::linalg::{Matrix, Spectrum};
use crate::scalars::{rho, symplectic, CVec2, Gauss};

/// A finitely supported combination `Σ c_λ L_λ`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SymbolElement {
    terms: BTreeMap<CVec2, Gauss>,
}

impl SymbolElement {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The basis symbol `L_λ`.
    pub fn basis(lambda: CVec2) -> Self {
        Self::term(lambda, Gauss::one())
    }

    pub fn term(lambda: CVec2, c: Gauss) -> Self {
        let mut s = Self::zero();
        s.add_term(lambda, c);
        s
    }

    pub fn add_term(&mut self, lambda: CVec2, c: Gauss) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(lambda.clone()).or_insert_with(Gauss::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&lambda);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CVec2, &Gauss)> {
        self.terms.iter()
    }

    pub fn coeff(&self, lambda: &CVec2) -> Gauss {
        self.terms.get(lambda).cloned().unwrap_or_else(Gauss::zero)
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

    pub fn scale(&self, c: &Gauss) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Gauss::one()))
    }

    /// Whether the support lies in `shift + π(Λ)`.
    pub fn supported_in(&self, e: &LatticeEmbedding, shift: &CVec2) -> bool {
        self.terms.keys().all(|k| e.preimage(&(k - shift)).is_some())
    }
}

/// Commutative product `L_λ · L_μ = L_{λ+μ+ρ}`.
pub fn s_product(a: &SymbolElement, b: &SymbolElement) -> SymbolElement {
    let r = rho();
    let mut out = SymbolElement::zero();
    for (l, c) in &a.terms {
        for (m, d) in &b.terms {
            out.add_term(&(l + m) + &r, c * d);
        }
    }
    out
}

/// Poisson bracket `{L_λ, L_μ} = ⟨λ+ρ, μ+ρ⟩ L_{λ+μ}`.
pub fn s_bracket(a: &SymbolElement, b: &SymbolElement) -> SymbolElement {
    let r = rho();
    let mut out = SymbolElement::zero();
    for (l, c) in &a.terms {
        let lr = l + &r;
        for (m, d) in &b.terms {
            let k = symplectic(&lr, &(m + &r));
            if !k.is_zero() {
                out.add_term(l + m, k * c * d);
            }
        }
    }
    out
}

impl fmt::Display for SymbolElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| format!("{} * L{}", coeff_str(c), k))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for SymbolElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn coeff_str(c: &Gauss) -> String {
    if c.is_real() || c.re.is_zero() {
        c.to_string()
    } else {
        format!("({c})")
    }
}

/// A polynomial in `x, y` (the standard basis of `V`), stored by exponent pair.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PolyV {
    coeffs: BTreeMap<(u32, u32), Gauss>,
}

impl PolyV {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 0, Gauss::one())
    }

    pub fn constant(c: Gauss) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, Gauss::one())
    }

    pub fn y() -> Self {
        Self::monomial(0, 1, Gauss::one())
    }

    pub fn monomial(a: u32, b: u32, c: Gauss) -> Self {
        let mut p = Self::zero();
        p.add_term((a, b), c);
        p
    }

    /// The linear form `v_x·x + v_y·y` identified with `v ∈ V`.
    pub fn from_vec(v: &CVec2) -> Self {
        let mut p = Self::zero();
        p.add_term((1, 0), v.x.clone());
        p.add_term((0, 1), v.y.clone());
        p
    }

    pub fn add_term(&mut self, mono: (u32, u32), c: Gauss) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(mono).or_insert_with(Gauss::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&mono);
        }
    }

    pub fn coeff(&self, a: u32, b: u32) -> Gauss {
        self.coeffs.get(&(a, b)).cloned().unwrap_or_else(Gauss::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Gauss)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|(a, b)| a + b).max()
    }

    pub fn is_homogeneous_of(&self, n: u32) -> bool {
        self.coeffs.keys().all(|(a, b)| a + b == n)
    }

    pub fn scale(&self, c: &Gauss) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.coeffs {
            out.add_term(*m, v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, v) in &other.coeffs {
            out.add_term(*m, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, v) in &other.coeffs {
            out.add_term(*m, -v);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for ((a, b), c) in &self.coeffs {
            for ((p, q), d) in &other.coeffs {
                out.add_term((a + p, b + q), c * d);
            }
        }
        out
    }

    pub fn dx(&self) -> Self {
        let mut out = Self::zero();
        for ((a, b), c) in &self.coeffs {
            if *a > 0 {
                out.add_term((a - 1, *b), c * Gauss::from_int(*a as i64));
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        let mut out = Self::zero();
        for ((a, b), c) in &self.coeffs {
            if *b > 0 {
                out.add_term((*a, b - 1), c * Gauss::from_int(*b as i64));
            }
        }
        out
    }

    /// Coordinates of a degree-`n` homogeneous polynomial in the basis
    /// `x^{n−j} y^j`, `j = 0..=n`.
    pub fn to_coords(&self, n: u32) -> Vec<Gauss> {
        debug_assert!(self.is_homogeneous_of(n), "not homogeneous of degree {n}: {self}");
        (0..=n).map(|j| self.coeff(n - j, j)).collect()
    }

    pub fn from_coords(v: &[Gauss]) -> Self {
        let n = v.len() as u32 - 1;
        let mut p = Self::zero();
        for (j, c) in v.iter().enumerate() {
            p.add_term((n - j as u32, j as u32), c.clone());
        }
        p
    }

    /// The basis vector `x^{n−j} y^j` of `S^nV`.
    pub fn sn_basis(n: u32, j: u32) -> Self {
        Self::monomial(n - j, j, Gauss::one())
    }
}

/// `{p, q} = p_x q_y − p_y q_x`.
pub fn poly_bracket(p: &PolyV, q: &PolyV) -> PolyV {
    p.dx().mul(&q.dy()).sub(&p.dy().mul(&q.dx()))
}

/// Matrix of `u ↦ {p, u}` on `S^nV` in the basis `x^{n−j} y^j`. `p` must be
/// homogeneous of degree 2 so that the operator preserves `S^nV`.
pub fn ad_matrix(p: &PolyV, n: u32) -> Matrix {
    assert!(p.is_homogeneous_of(2), "ad_matrix needs a quadratic polynomial");
    let cols: Vec<Vec<Gauss>> = (0..=n)
        .map(|j| poly_bracket(p, &PolyV::sn_basis(n, j)).to_coords(n))
        .collect();
    Matrix::from_columns(&cols, n as usize + 1)
}

impl fmt::Display for PolyV {
    /// Degree-lex order: higher total degree first, then higher power of `x`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut monos: Vec<(&(u32, u32), &Gauss)> = self.coeffs.iter().collect();
        monos.sort_by(|((a1, b1), _), ((a2, b2), _)| (a2 + b2, a2).cmp(&(a1 + b1, a1)));
        let mut out = String::new();
        for (i, ((a, b), c)) in monos.into_iter().enumerate() {
            let mono = mono_str(*a, *b);
            let neg = c.is_real() && c.re < num_traits::Zero::zero()
                || c.re.is_zero() && c.im < num_traits::Zero::zero();
            let mag = if neg { -c } else { c.clone() };
            let body = match (mono.is_empty(), mag.is_one()) {
                (true, _) => coeff_str(&mag),
                (false, true) => mono,
                (false, false) => format!("{}*{}", coeff_str(&mag), mono),
            };
            match (i, neg) {
                (0, true) => out.push_str(&format!("-{body}")),
                (0, false) => out.push_str(&body),
                (_, true) => out.push_str(&format!(" - {body}")),
                (_, false) => out.push_str(&format!(" + {body}")),
            }
        }
        write!(f, "{out}")
    }
}

impl fmt::Debug for PolyV {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn mono_str(a: u32, b: u32) -> String {
    let v = |name: &str, e: u32| match e {
        0 => None,
        1 => Some(name.to_string()),
        e => Some(format!("{name}^{e}")),
    };
    [v("x", a), v("y", b)]
        .into_iter()
        .flatten()
        .collect::<Vec<_>>()
        .join("*")
}

/// A standard sl₂ triple of quadratic polynomials under the Poisson bracket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sl2Triple {
    pub e: PolyV,
    pub f: PolyV,
    pub h: PolyV,
}

impl Sl2Triple {
    /// Residuals of `[h,e] − 2e`, `[h,f] + 2f`, `[e,f] − h`.
    pub fn residuals(&self) -> [PolyV; 3] {
        let two = Gauss::from_int(2);
        [
            poly_bracket(&self.h, &self.e).sub(&self.e.scale(&two)),
            poly_bracket(&self.h, &self.f).add(&self.f.scale(&two)),
            poly_bracket(&self.e, &self.f).sub(&self.h),
        ]
    }
}

/// `e = −ξ²/(2⟨ξ,η⟩)`, `f = η²/(2⟨ξ,η⟩)`, `h = −ξη/⟨ξ,η⟩`.
pub fn sl2_triple(xi: &CVec2, eta: &CVec2) -> Result<Sl2Triple> {
    let c = symplectic(xi, eta);
    if c.is_zero() {
        return Err(Error::DegeneratePair);
    }
    let inv = c.inv()?;
    let half_inv = &inv * Gauss::half();
    let (px, pe) = (PolyV::from_vec(xi), PolyV::from_vec(eta));
    Ok(Sl2Triple {
        e: px.mul(&px).scale(&-&half_inv),
        f: pe.mul(&pe).scale(&half_inv),
        h: px.mul(&pe).scale(&-inv),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CasimirSpectrum {
    pub n: u32,
    /// `(eigenvalue, multiplicity)` as printed scalars.
    pub eigenvalues: Vec<(String, usize)>,
    /// Present only when some eigenvalue is not rational.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charpoly: Option<Vec<String>>,
    pub diagonalizable: bool,
    pub invertible: bool,
}

/// Matrix of `ef + fe − h²` acting on `S^nV` through the adjoint action.
pub fn casimir_like_matrix(t: &Sl2Triple, n: u32) -> Matrix {
    let (e, f, h) = (ad_matrix(&t.e, n), ad_matrix(&t.f, n), ad_matrix(&t.h, n));
    &(&(&e * &f) + &(&f * &e)) - &(&h * &h)
}

pub fn casimir_like_spectrum(t: &Sl2Triple, n: u32) -> CasimirSpectrum {
    let s: Spectrum = casimir_like_matrix(t, n).spectrum();
    CasimirSpectrum {
        n,
        eigenvalues: s
            .eigenvalues
            .iter()
            .map(|(v, m)| (v.to_string(), *m))
            .collect(),
        charpoly: (!s.complete).then(|| s.charpoly.iter().map(ToString::to_string).collect()),
        diagonalizable: s.diagonalizable,
        invertible: s.is_invertible(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticePoint;

    fn v(x: &str, y: &str) -> CVec2 {
        CVec2::new(x.parse().unwrap(), y.parse().unwrap())
    }

    fn l(p: CVec2) -> SymbolElement {
        SymbolElement::basis(p)
    }

    #[test]
    fn product_examples() {
        let mu = v("2", "-1+i");
        assert_eq!(s_product(&l(-rho()), &l(mu.clone())), l(mu.clone()));
        let lam = v("1/2", "3i");
        assert_eq!(
            s_product(&l(&lam - &rho()), &l(&-&lam - &rho())),
            l(-rho())
        );
        assert_eq!(
            s_product(&l(v("0", "1")), &l(v("-3", "-3+i"))),
            l(v("-2", "-1+i"))
        );
    }

    #[test]
    fn bracket_examples() {
        let lam = v("1", "2i");
        assert!(s_bracket(&l(lam.clone()), &l(lam)).is_zero());
        assert_eq!(
            s_bracket(&l(v("0", "1")), &l(v("-3", "-3+i"))),
            SymbolElement::term(v("-3", "-2+i"), "2+i".parse().unwrap())
        );
        let mu = v("5/2", "-i");
        assert_eq!(
            s_bracket(&l(CVec2::zero()), &l(mu.clone())),
            SymbolElement::term(mu.clone(), symplectic(&rho(), &mu))
        );
    }

    #[test]
    fn witt_acts_on_commutative_algebra() {
        // {L_λ, L_{μ−ρ}} = ⟨λ+ρ, μ⟩ L_{λ+μ−ρ}
        let e = LatticeEmbedding::demo();
        let lam = e.embed(&LatticePoint::new(vec![2, -1]));
        let mu = e.embed(&LatticePoint::new(vec![-1, 3]));
        let got = s_bracket(&l(lam.clone()), &l(&mu - &rho()));
        let want = SymbolElement::term(
            &(&lam + &mu) - &rho(),
            symplectic(&(&lam + &rho()), &mu),
        );
        assert_eq!(got, want);
        assert!(got.supported_in(&e, &-rho()));
    }

    #[test]
    fn poly_bracket_examples() {
        assert_eq!(poly_bracket(&PolyV::x(), &PolyV::y()), PolyV::one());
        let x2 = PolyV::x().mul(&PolyV::x());
        let y2 = PolyV::y().mul(&PolyV::y());
        assert_eq!(
            poly_bracket(&x2, &y2),
            PolyV::monomial(1, 1, Gauss::from_int(4))
        );
        let p = x2.add(&PolyV::monomial(2, 3, "1-i".parse().unwrap()));
        assert!(poly_bracket(&p, &p).is_zero());
    }

    #[test]
    fn quadratic_bracket_expands_termwise() {
        // [αβ, γδ] = ⟨α|γ⟩βδ + ⟨α|δ⟩βγ + ⟨β|γ⟩αδ + ⟨β|δ⟩αγ
        let vs = [v("1", "2"), v("-1", "i"), v("3/2", "0"), v("2-i", "1")];
        let p: Vec<PolyV> = vs.iter().map(PolyV::from_vec).collect();
        let (a, b, c, d) = (&p[0], &p[1], &p[2], &p[3]);
        let s = |i: usize, j: usize| symplectic(&vs[i], &vs[j]);
        let want = b.mul(d).scale(&s(0, 2))
            .add(&b.mul(c).scale(&s(0, 3)))
            .add(&a.mul(d).scale(&s(1, 2)))
            .add(&a.mul(c).scale(&s(1, 3)));
        assert_eq!(poly_bracket(&a.mul(b), &c.mul(d)), want);
    }

    #[test]
    fn display_degree_lex() {
        let p = PolyV::x()
            .mul(&PolyV::x())
            .add(&PolyV::monomial(1, 1, Gauss::from_int(-2)))
            .add(&PolyV::constant("2+i".parse().unwrap()));
        assert_eq!(p.to_string(), "x^2 - 2*x*y + (2+i)");
        assert_eq!(
            SymbolElement::term(v("1", "-i"), Gauss::from_int(3)).to_string(),
            "3 * L[1, -i]"
        );
    }

    #[test]
    fn sl2_examples() {
        let t = sl2_triple(&v("1", "0"), &v("0", "1")).unwrap();
        assert_eq!(t.e, PolyV::monomial(2, 0, Gauss::rat(-1, 2)));
        assert_eq!(t.f, PolyV::monomial(0, 2, Gauss::rat(1, 2)));
        assert_eq!(t.h, PolyV::monomial(1, 1, Gauss::from_int(-1)));
        let t2 = sl2_triple(&v("1", "2"), &v("-2", "-2+i")).unwrap();
        for r in t.residuals().iter().chain(t2.residuals().iter()) {
            assert!(r.is_zero());
        }
        assert_eq!(sl2_triple(&v("1", "2"), &v("1", "2")), Err(Error::DegeneratePair));
    }

    #[test]
    fn casimir_small_cases() {
        let t = sl2_triple(&v("1", "0"), &v("0", "1")).unwrap();
        let s0 = casimir_like_spectrum(&t, 0);
        assert_eq!(s0.eigenvalues, vec![("0".to_string(), 1)]);
        let s1 = casimir_like_spectrum(&t, 1);
        assert_eq!(s1.eigenvalues, vec![("0".to_string(), 2)]);
        assert!(!s1.invertible);
        let s2 = casimir_like_spectrum(&t, 2);
        assert_eq!(
            s2.eigenvalues,
            vec![("4".to_string(), 1), ("-2".to_string(), 2)]
        );
        assert!(s2.invertible && s2.diagonalizable);
    }

    #[test]
    fn casimir_matches_weight_formula() {
        // eigenvalue n(n+2)/2 − 3m²/2 on h-weight m ∈ {n, n−2, …, −n}
        let t = sl2_triple(&v("1", "2"), &v("-2", "-2+i")).unwrap();
        for n in 0..=8u32 {
            let m = casimir_like_matrix(&t, n);
            let spec = m.spectrum();
            assert!(spec.complete && spec.diagonalizable, "n = {n}");
            let mut want: BTreeMap<Gauss, usize> = BTreeMap::new();
            for j in 0..=n as i64 {
                let w = n as i64 - 2 * j;
                let val = Gauss::rat(n as i64 * (n as i64 + 2) - 3 * w * w, 2);
                *want.entry(val).or_default() += 1;
            }
            let got: BTreeMap<Gauss, usize> = spec.eigenvalues.into_iter().collect();
            assert_eq!(got, want, "n = {n}");
        }
    }
}
