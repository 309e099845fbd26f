//! Windowed view of the `𝒜_π`-cover. The cover is spanned by functionals
//! `ψ(L_λ, x): L_{δ−ρ} ↦ L_{λ+δ}.x`; here they are only ever evaluated at a
//! finite set of probes `δ`, and ranks of the resulting evaluation matrices
//! stand in for dimensions of cover components.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::enveloping::binomial;
use crate::error::{Error, Result};
use crate::gmod::{act_v, GradedAction, ModuleVector, Window};
use crate::lattice::LatticePoint;
use crate::linalg::Matrix;
use crate::scalars::Gauss;
use crate::sweep;

/// `ψ(L_λ, x)` for homogeneous `x`.
#[derive(Clone, Debug)]
pub struct PsiFunctional {
    pub lambda: LatticePoint,
    pub x: ModuleVector,
}

impl PsiFunctional {
    pub fn new(lambda: LatticePoint, x: ModuleVector) -> Self {
        PsiFunctional { lambda, x }
    }

    /// Value at `L_{δ−ρ}`: `L_{λ+δ}.x`.
    pub fn eval<M: GradedAction + ?Sized>(&self, m: &M, delta: &LatticePoint) -> ModuleVector {
        act_v(m, &(&self.lambda + delta), &self.x)
    }

    /// Coordinates of the values at each probe, concatenated, where the value
    /// at `δ` is read in the component `degree + δ`.
    pub fn row<M: GradedAction + ?Sized>(&self, m: &M, degree: &LatticePoint, probes: &[LatticePoint]) -> Vec<Gauss> {
        let mut out = Vec::new();
        for d in probes {
            let target = degree + d;
            let dim = m.fiber_dim(&target);
            let v = self.eval(m, d);
            match v.component(&target) {
                Some(c) => out.extend(c.iter().cloned()),
                None => out.extend(std::iter::repeat_n(Gauss::zero(), dim)),
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverRank {
    pub gamma: LatticePoint,
    pub rank: usize,
    pub next_rank: usize,
    pub stabilized: bool,
    pub windows: [i64; 2],
}

fn evaluation_rank<M: GradedAction + ?Sized>(m: &M, gamma: &LatticePoint, w: &Window, g: &Window) -> usize {
    let probes = w.points();
    let gens: Vec<(LatticePoint, usize)> = g
        .points()
        .into_iter()
        .flat_map(|l| {
            let src = gamma - &l;
            let dim = m.fiber_dim(&src);
            (0..dim).map(move |j| (l.clone(), j))
        })
        .collect();
    if gens.is_empty() {
        return 0;
    }
    let rows = sweep::map(&gens, |(l, j)| {
        let src = gamma - l;
        let x = ModuleVector::basis(src.clone(), *j, m.fiber_dim(&src));
        PsiFunctional::new(l.clone(), x).row(m, gamma, &probes)
    });
    if rows[0].is_empty() {
        return 0;
    }
    Matrix::from_rows(rows).rank()
}

/// Rank of the `γ` component of the cover seen through probes `w` and
/// generators `g`; `stabilized` compares against both windows grown by one.
pub fn cover_rank<M: GradedAction + ?Sized>(m: &M, gamma: &LatticePoint, w: &Window, g: &Window) -> CoverRank {
    let rank = evaluation_rank(m, gamma, w, g);
    let next_rank = evaluation_rank(m, gamma, &w.grow(1), &g.grow(1));
    CoverRank {
        gamma: gamma.clone(),
        rank,
        next_rank,
        stabilized: rank == next_rank,
        windows: [w.hi[0] - w.lo[0], g.hi[0] - g.lo[0]],
    }
}

/// Result of the reduction identity on one component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionResidual {
    pub order: u32,
    pub zero: bool,
    /// Probes `δ` where some basis vector leaves a nonzero residual.
    pub nonzero_at: Vec<LatticePoint>,
}

/// Checks `ψ(L_{γ−α}, x) = −Σ_{i=1}^n (−1)^i C(n,i) ψ(L_{γ−α−s·iε_k}, L_{s·iε_k}.y)`
/// with `x = L_0.y`, for every basis vector `x` of the component `α`, at each
/// probe. `sign` is `s = ±1`.
pub fn spanning_reduction_check<M: GradedAction + ?Sized>(
    m: &M,
    order: u32,
    gamma: &LatticePoint,
    alpha: &LatticePoint,
    k: usize,
    sign: i64,
    probes: &[LatticePoint],
) -> Result<ReductionResidual> {
    let dim = m.fiber_dim(alpha);
    let l0 = m.act_matrix(&LatticePoint::zero(m.rank()), alpha);
    let step = LatticePoint::basis(m.rank(), k).scale(sign);
    let base = gamma - alpha;
    let mut nonzero_at = Vec::new();
    for j in 0..dim {
        let mut e = vec![Gauss::zero(); dim];
        e[j] = Gauss::one();
        let y = l0.solve(&e).ok_or(Error::NonInvertibleL0)?;
        let y = ModuleVector::component_vector(alpha.clone(), y);
        let x = ModuleVector::basis(alpha.clone(), j, dim);
        for d in probes {
            let mut res = PsiFunctional::new(base.clone(), x.clone()).eval(m, d);
            for i in 1..=order as i64 {
                let c = binomial(order as usize, i as usize) * if i % 2 == 0 { 1 } else { -1 };
                let shifted = step.scale(i);
                let inner = act_v(m, &shifted, &y);
                let term = PsiFunctional::new(&base - &shifted, inner).eval(m, d);
                res = res.add(&term.scale(&Gauss::from_int(c)));
            }
            if !res.is_zero() && !nonzero_at.contains(d) {
                nonzero_at.push(d.clone());
            }
        }
    }
    Ok(ReductionResidual {
        order,
        zero: nonzero_at.is_empty(),
        nonzero_at,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditRow {
    pub gamma: LatticePoint,
    pub rank: usize,
    pub bound: u64,
    pub stabilized: bool,
    pub windows: [i64; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundednessAudit {
    pub module: String,
    pub d: u64,
    pub n: u64,
    pub bound: u64,
    pub rows: Vec<AuditRow>,
}

impl BoundednessAudit {
    pub fn within_bound(&self) -> bool {
        self.rows.iter().all(|r| (r.rank as u64) <= r.bound)
    }

    pub fn all_stabilized(&self) -> bool {
        self.rows.iter().all(|r| r.stabilized)
    }
}

/// Compares windowed cover ranks at each `γ` with `d·n^N`.
pub fn boundedness_audit<M: GradedAction + ?Sized>(
    m: &M,
    d: u64,
    n: u64,
    gammas: &[LatticePoint],
    w: &Window,
    g: &Window,
) -> BoundednessAudit {
    let bound = d * n.pow(m.rank() as u32);
    let rows = gammas
        .iter()
        .map(|gamma| {
            let r = cover_rank(m, gamma, w, g);
            AuditRow {
                gamma: gamma.clone(),
                rank: r.rank,
                bound,
                stabilized: r.stabilized,
                windows: r.windows,
            }
        })
        .collect();
    BoundednessAudit {
        module: m.label(),
        d,
        n,
        bound,
        rows,
    }
}
