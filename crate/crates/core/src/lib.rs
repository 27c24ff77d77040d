//! Numerical machinery for character-automorphic Hardy spaces on the unit disk.
//!
//! The crate is organised bottom-up:
//!
//! * [`moebius`]: disk automorphisms in unit-determinant normal form.
//! * [`fuchsian`]: free Fuchsian groups, reduced-word orbits, characters and
//!   depth-certified fundamental-domain membership.
//! * [`green`]: truncated Green's-function Blaschke products, their characters
//!   and the Poincaré series projection.
//! * [`covering`]: covering maps, the half-domain `Ω₊`, the Cayley transform
//!   `σ` and its local inverse.
//! * [`kernels`]: the reproducing-kernel structure formula, the functions
//!   `A`, `B`, `S` and the rewritten (de Branges–Rovnyak) kernel form.
//! * [`schur`]: PSD testing of Hermitian kernels, Nevanlinna–Pick extension by
//!   lurking isometry, and the Hardy-space isometry.
//! * [`multiplier`]: Schur-multiplier detection, Leech factorization and the
//!   linear-fractional reconstruction formulas.
//! * [`fixture`]: the closed-form Joukowski/Szegő fixture suite used by the CLI.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covering;
pub mod error;
pub mod fixture;
pub mod fuchsian;
pub mod green;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod moebius;
pub mod multiplier;
pub mod schur;

use std::sync::Arc;

pub use num_complex::Complex64;

pub use crate::covering::CoveringMap;
pub use crate::error::{Error, Result};
pub use crate::fuchsian::{Character, GroupPresentation, Letter, OrbitTruncation, Word};
pub use crate::green::GreenFunction;
pub use crate::kernels::{HardySpace, Normalization, SpectralData};
pub use crate::moebius::{Classification, Moebius};
pub use crate::schur::{PsdReport, Realization, SamplingGrid, SchurEvaluator};

/// A shareable scalar evaluator `ℂ → ℂ`.
pub type Evaluator = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Wraps a closure as an [`Evaluator`].
pub fn evaluator<F>(f: F) -> Evaluator
where
    F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
{
    Arc::new(f)
}
