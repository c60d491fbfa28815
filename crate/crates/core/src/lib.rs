//! Evans-function stability computations for parallel isentropic MHD shock
//! layers: profile solver, Evans system, analytic Kato frames, polar
//! shooting, strong-shock and high-frequency limits, winding numbers and
//! parameter sweeps.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod contour;
pub mod engine;
pub mod error;
pub mod evans_system;
pub mod kato;
pub mod limits;
pub mod linalg;
pub mod ode;
pub mod params;
pub mod profile;
pub mod shooting;
pub mod sweep;

pub use error::{EvansError, Result};
pub use params::{classify_shock, PhysicalParams, ShockType, Side};
pub use profile::{compute_profile, DensityProfile, Profile, ProfileOptions};
