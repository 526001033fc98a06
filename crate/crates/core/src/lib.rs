//! Certified upper and lower bounds for the sharp constant `K_n` in the
//! advection inequality `‖L(v·∂w)‖_n ≤ K_n ‖v‖_n ‖w‖_{n+1}` on the
//! d-dimensional torus.
//!
//! The upper bound comes from the supremum of the convolution lattice sum
//! `KK_n(k) = |k|^{2n} Σ_h |h∧k|² / (|h|^{2n+2} |k-h|^{2n+2})`, which is
//! split into a finite part `K_m(k)` under a cutoff `ρ` and a tail bounded
//! uniformly by `δK_n`. For `|k| ≥ 2ρ` the finite part is sandwiched by an
//! asymptotic expansion built from Taylor coefficients of the kernel
//! `E_n(c, ξ) = (1 - c²) / (1 - 2cξ + ξ²)^{n+1}`. The lower bound is realized
//! by explicit two-mode trial fields.
//!
//! Module map:
//!
//! * [`lattice`]: lattice balls, wedge norms, signed-permutation symmetry.
//! * [`kernel`]: the kernel `E_n`, its Taylor coefficients and remainder extrema.
//! * [`tail`]: tail-sum bounds and `δK_n`.
//! * [`sums`]: `K_m`, a truncated direct oracle for `KK_n`, and the asymptotic
//!   coefficients `Z_n`, `Q_{nℓ}`, `v_{nt}`, `V_{nt}`.
//! * [`certify`]: the full certificate `K⁻_n ≤ K_n ≤ K⁺_n`.
//! * [`fields`]: sparse Fourier vector fields, Leray projection, advection.

// `!(x >= y)` guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod fields;
pub mod kernel;
pub mod lattice;
pub mod numeric;
pub mod poly;
pub mod sums;
pub mod tail;

pub use certify::{certify_bounds, k_minus, BoundCertificate, CertifyOptions};
pub use error::{Error, Result};
pub use lattice::{BallEnumeration, LatticeVector, Radius};
pub use sums::SumConfig;
