//! Explicit twisted spinor representations and pointwise numeric verification
//! of the curvature identities behind linear semi-stability of Einstein
//! metrics carrying parallel twisted pure spinors.
//!
//! The crate is organised bottom-up:
//!
//! * [`clifford`] builds complex representations of `Cl(TM ⊕ F)` acting on
//!   `ΣM ⊗ (ΣF)^{⊗m}`.
//! * [`curvature`] holds algebraic curvature tensors and model curvatures.
//! * [`spinlab`] computes the η two-forms, purity, the Φ map and the
//!   parallel-spinor curvature constraint.
//! * [`models`] assembles consistent pointwise data (flat, Kähler,
//!   tautological spin^n, quaternion-Kähler).
//! * [`verify`] runs the identity and inequality checks on that data.
//! * [`expr`] is a small Einstein-summation expression language.
//! * [`suite`] bundles everything into a deterministic report battery.
//!
//! Index conventions: `R_{ijkl} = g(R_{e_i e_j} e_k, e_l)`,
//! `Ric_{ij} = R_{ikkj}`, `scal = R_{ikki}`, and repeated indices are summed.
//! Clifford multiplication satisfies `e_i e_j + e_j e_i = -2 δ_{ij}`.

pub mod clifford;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod models;
pub mod spinlab;
pub mod suite;
pub mod tolerances;
pub mod verify;

pub use clifford::{build_gamma, build_twisted_rep, CliffordRep, RepSpec, Spinor};
pub use curvature::{constant_curvature, qk_model, random_curvature, CurvatureTensor, SymTensor2};
pub use error::{Error, Result};
pub use spinlab::{GeometricDatum, TwoFormFamily};
pub use verify::{SecondDerivSymbol, VerificationReport};
