//! Numerical Equi-Baire one verdicts.
//!
//! Certification uses the ε–δ gauge form: at a point `x` the gauge
//!
//! ```text
//! S(x, r) = sup over members f, sup over y ∈ B_r(x) of d(f(y), f(x))
//! ```
//!
//! must vanish as `r → 0`, and for loxodromic iterates it is bounded by
//! `C′·r`. Refutation for flows uses the collapse obstruction: an open set
//! whose images along `t_n → ∞` shrink to a single point outside it.

mod approx;
mod collapse;
mod family;
mod gauge;
mod verdict;

pub use approx::{
    approximating_sequence, default_probe_times, density_error, density_tolerance,
    ApproximatingSequence, DensityCheck, SequenceRule,
};
pub use collapse::{detect_collapse, CollapseCertificate, CollapseConfig, CollapseSearch};
pub use family::FamilySpec;
pub use gauge::{
    certify_linear_bound, estimate_gauge, GaugeEstimate, GaugeRow, LinearBound, Violation,
    EPS_FLOOR,
};
pub use verdict::{
    default_radii, theorem1_verdict, theorem2_verdict, Basis, DecayCheck, Disagreement,
    EquiBaireReport, Evidence, Theorem1Config, Theorem2Config, Verdict,
};

use rayon::prelude::*;

/// Maps `f` over `items`, on `workers` threads when `workers > 1`.
/// Output order always matches input order.
pub(crate) fn ordered_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if workers <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}
