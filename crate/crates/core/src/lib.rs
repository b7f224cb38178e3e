//! Left-invariant Hermitian geometry on Oeljeklaus-Toma-type solvable Lie
//! algebras.
//!
//! The crate models a complexified Lie algebra 𝔤 = 𝔥 ⊕ 𝔍 through its
//! structure constants on an adapted frame {Z₁..Z_r, W₁..W_s} together with
//! the complex structure that multiplies the (1,0) frame by √−1.  On top of
//! that it provides:
//!
//! * Chevalley-Eilenberg exterior calculus ([`exterior`]) with the ∂∂̄
//!   operator used to decide whether a metric is pluriclosed,
//! * constructors for Oeljeklaus-Toma algebras and their semidirect-product
//!   generalization ([`ot`]),
//! * Chern-Ricci and Bismut-Ricci forms of left-invariant Hermitian metrics
//!   ([`hermitian`]),
//! * derivation algebras and algebraic-soliton detection ([`soliton`]),
//! * the Chern-Ricci and pluriclosed flows with convergence diagnostics
//!   ([`flow`]).
//!
//! All numerical routines work over `Complex64`; the algebraic identity
//! checks (Jacobi, pluriclosedness, the closed-form Bismut-Ricci expression)
//! can also run over exact Gaussian rationals, see [`scalar`].

// dense matrix loops read better with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod exterior;
pub mod flow;
pub mod hermitian;
pub mod lie;
pub mod linalg;
pub mod ot;
pub mod scalar;
pub mod soliton;

pub use error::Error;
pub use scalar::{CExact, Scalar, C64};

/// Default tolerance for algebraic validation checks; entries are O(1) so
/// double precision leaves several orders of margin.
pub const DEFAULT_TOL: f64 = 1e-10;

pub type Result<T> = std::result::Result<T, Error>;
