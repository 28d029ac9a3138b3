//! Möbius dynamics on the Riemann sphere and numerical Equi-Baire one
//! verdicts for families of iterates `{fⁿ}` and one-parameter flows `{exp(tA)}`.
//!
//! - [`sphere`]: points `[z:w]`, the chordal metric, balls and grids.
//! - [`moebius`]: SL(2,ℂ) maps, classification, fixed points, normal forms.
//! - [`flow`]: trace-zero generators, the closed-form exponential, subgroup types.
//! - [`equibaire`]: gauge estimation, collapse detection and verdicts.
//! - [`cli`]: scenario files, reports and the built-in batteries.

pub mod canonical;
pub mod cli;
pub mod equibaire;
pub mod error;
pub mod flow;
pub mod moebius;
pub mod sphere;

pub use error::{Error, Result};
pub use flow::{FlowGenerator, SubgroupType};
pub use moebius::{ClassTag, Homography, MoebiusMap};
pub use sphere::{ChordalBall, SphereGrid, SpherePoint};
