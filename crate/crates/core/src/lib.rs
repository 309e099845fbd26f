//! Exact computer algebra for lattice Lie algebras of Witt type `W_π`.
//!
//! The algebra `W_π` has basis `L_λ` for `λ` in the image of an injective map
//! `π: ℤ^N → ℂ²`, with bracket `[L_λ, L_μ] = ⟨λ+ρ, μ+ρ⟩ L_{λ+μ}` where
//! `ρ = (1,1)` and `⟨·,·⟩` is the standard symplectic form. All arithmetic is
//! exact over the Gaussian rationals ℚ(i).
//!
//! Module map:
//!
//! * [`scalars`] — ℚ(i), points of ℂ², the symplectic form.
//! * [`lattice`] — embeddings, lattice points, cosets, admissibility conditions.
//! * [`poisson`] — the symbol algebra, polynomials on `V = ℂ²`, sl₂ triples.
//! * [`enveloping`] — PBW normal forms and differentiators in `U(W_π)`.
//! * [`gmod`] — the graded modules `𝒮_Γ` and `ℳⁿ(Γ)` on finite windows.
//! * [`dop`] — the `D(λ)` operators, `P_K` tables and the classifier.
//! * [`cover`] — ψ functionals and windowed cover ranks.
//! * [`suites`] — seeded verification sweeps used by the CLI and tests.

pub mod cover;
pub mod dop;
pub mod enveloping;
pub mod error;
pub mod gmod;
pub mod lattice;
pub mod linalg;
pub mod poisson;
pub mod scalars;
pub mod suites;
pub mod sweep;

pub use error::{Error, Result};
pub use lattice::{Coset, LatticeEmbedding, LatticePoint};
pub use scalars::{rho, rho_dagger, symplectic, CVec2, Gauss, Rational};
