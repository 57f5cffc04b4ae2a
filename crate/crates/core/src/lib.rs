//! Numerics for region-charge operators of the free Dirac field.
//!
//! The crate builds the objects that enter the formal expression for the
//! charge contained in a spatial region and checks, on exactly solvable
//! finite instances and by momentum-space quadrature, how they behave:
//!
//! - [`spinor`]: gamma matrices, the energy function, the momentum-space
//!   spectral projectors `Λ±(p)` and the charge-conjugation matrix `iγ²`.
//! - [`involution`]: anti-unitary involutions on `ℂⁿ` and the construction of
//!   orthonormal bases that they fix pointwise.
//! - [`fock`]: a finite-mode fermionic Fock space with particle and
//!   antiparticle creation/annihilation operators and field operators.
//! - [`charge`]: subspace charges, `Q̃`, the total charge, weighted and
//!   truncated charges, and the sector-norm decomposition of `‖Q^J ψ‖²`.
//! - [`modes`]: plane-wave modes on the cube `x₀ + [−π, π]³` and their
//!   analytic Fourier transforms.
//! - [`quadrature`]: Gauss–Legendre tensor grids and weighted Gram matrices.
//! - [`bessel`]: `K₀`, `K₁` and the position-space kernel of `1/λ`.
//! - [`divergence`]: the vacuum-norm series `S_J = ‖Q^J Ω‖²` over mode shells.
//! - [`runner`]: experiment configuration, the verification suites and
//!   CSV/JSON output used by the `fockcharge` binary.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bessel;
pub mod charge;
pub mod divergence;
pub mod error;
pub mod fock;
pub mod involution;
pub mod linalg;
pub mod modes;
pub mod quadrature;
pub mod runner;
pub mod spinor;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
