//! Numerical toolkit for the stability of the flat free-boundary slice
//! `Σ = Ω_λ ∩ {x_{n+1} = 0}` inside the circular cone
//! `Ω_λ = {x_n > λ √(|x'|² + x_{n+1}²)}`.
//!
//! The crate is organized bottom-up:
//!
//! * [`domain`]: cone parameters, points, the profile `ω_λ` and the foliation curves.
//! * [`trial`]: compactly supported Lipschitz deformation fields with exact gradients.
//! * [`flow`]: the deformation flow `Φ[f]` and its partial derivatives.
//! * [`jacobian`]: the area-distortion factor computed three independent ways.
//! * [`quadrature`]: integration over the slice and over its boundary trace, and
//!   dyadic difference quotients with Richardson extrapolation.
//! * [`variation`]: the area functional and its first and second lower-right variations.
//! * [`stability`]: Kato's constant, the threshold aperture, margins and verdicts.
//! * [`verify`]: randomized invariant suites bundled for the command line.

pub mod domain;
pub mod error;
pub mod flow;
pub mod jacobian;
pub mod quadrature;
pub mod stability;
pub mod trial;
pub mod variation;
pub mod verify;

pub use domain::{AmbientPoint, ConeParams, Membership, PlanePoint};
pub use error::{Error, Result};
pub use flow::FlowCoefficients;
pub use jacobian::JacobianBreakdown;
pub use quadrature::{LiminfEstimate, QuadratureEstimate, QuadratureSpec};
pub use stability::{Regime, StabilityVerdict, ThresholdResult};
pub use trial::{TrialFamily, TrialFunction};
pub use variation::VariationReport;
