use serde::Serialize;
use std::fmt;

use super::{
    certify_linear_bound, detect_collapse, estimate_gauge, CollapseConfig, CollapseSearch,
    FamilySpec, GaugeEstimate, LinearBound, EPS_FLOOR,
};
use crate::error::{Error, Result};
use crate::flow::{CompactnessReport, FlowGenerator};
use crate::moebius::{Basin, MoebiusMap};
use crate::sphere::{SphereGrid, SpherePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    OutOfScope,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Basis {
    #[serde(rename = "theorem1-gauge")]
    Theorem1Gauge,
    #[serde(rename = "theorem2-compact")]
    Theorem2Compact,
    #[serde(rename = "theorem2-collapse")]
    Theorem2Collapse,
}

/// Agreement of measured per-step decay of the ball images with `|λ|`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayCheck {
    pub lambda_modulus: f64,
    /// Mean decay ratio per radius (`None` where no geometric phase was found).
    pub measured: Vec<Option<f64>>,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    None,
    Gauge {
        gauge: GaugeEstimate,
        linear_bound: LinearBound,
        decay_check: DecayCheck,
    },
    Flow {
        algebraic: CompactnessReport,
        collapse: CollapseSearch,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct EquiBaireReport {
    pub verdict: Verdict,
    pub basis: Option<Basis>,
    pub reason: Option<String>,
    pub evidence: Evidence,
    pub parameters: serde_json::Value,
    pub tolerances: serde_json::Value,
}

/// The algebraic and dynamical flow evidence, when they disagree.
#[derive(Debug, Serialize)]
pub struct Disagreement {
    pub algebraic: CompactnessReport,
    pub collapse: CollapseSearch,
}

impl fmt::Display for Disagreement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "algebraic basis says relatively compact = {}, collapse search found {} certificate",
            self.algebraic.compact,
            if self.collapse.certificate.is_some() {
                "a"
            } else {
                "no"
            }
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Config {
    /// Descending radii; by default nine radii from `min(0.1, d(x, q)/4)`
    /// down by factors of √10.
    pub radii: Option<Vec<f64>>,
    pub samples_per_ball: usize,
    pub n_max: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for Theorem1Config {
    fn default() -> Self {
        Self {
            radii: None,
            samples_per_ball: 128,
            n_max: 5000,
            seed: 0,
            workers: 1,
        }
    }
}

/// Default gauge radii at a basin point `dist_to_repeller` away from `q`.
pub fn default_radii(dist_to_repeller: f64) -> Vec<f64> {
    let top = (0.25 * dist_to_repeller).min(0.1);
    (0..9).map(|k| top * 10f64.powf(-0.5 * k as f64)).collect()
}

fn out_of_scope(reason: String, parameters: serde_json::Value) -> EquiBaireReport {
    EquiBaireReport {
        verdict: Verdict::OutOfScope,
        basis: None,
        reason: Some(reason),
        evidence: Evidence::None,
        parameters,
        tolerances: theorem1_tolerances(),
    }
}

fn theorem1_tolerances() -> serde_json::Value {
    serde_json::json!({
        "eps_floor": EPS_FLOOR,
        "stability_factor": super::gauge::STABILITY_FACTOR,
        "decay_tol": super::gauge::DECAY_TOL,
        "truncation_factor": super::gauge::TRUNCATION_FACTOR,
        "basin_tol": crate::moebius::BASIN_TOL,
        "parabolic_tol": crate::moebius::PARABOLIC_TOL,
    })
}

/// Orbital Equi-Baire one verdict for the iterates of `f` at `x`.
///
/// Only loxodromic-type maps (`|λ| ≠ 1`) at points of the attracting basin
/// are in scope. There the gauge is estimated, the linear bound certified,
/// and the per-step decay of ball images is checked against `|λ|` within 10%.
pub fn theorem1_verdict(
    f: &MoebiusMap,
    x: &SpherePoint,
    cfg: &Theorem1Config,
) -> Result<EquiBaireReport> {
    let class = f.classify();
    let mut parameters = serde_json::json!({
        "samples_per_ball": cfg.samples_per_ball,
        "n_max": cfg.n_max,
        "seed": cfg.seed,
        "class": class.tag,
    });
    if !class.tag.is_loxodromic_type() {
        return Ok(out_of_scope(
            format!(
                "map is {:?}, not conjugate to z -> lambda z with |lambda| != 1",
                class.tag
            )
            .to_lowercase(),
            parameters,
        ));
    }
    let nf = f.normal_form()?;
    if f.in_attracting_basin(x)? == Basin::BoundaryUndecided {
        return Ok(out_of_scope(
            "repelling fixed point excluded from the basin".into(),
            parameters,
        ));
    }
    let radii = cfg
        .radii
        .clone()
        .unwrap_or_else(|| default_radii(x.chordal_distance(&nf.repelling)));
    parameters["radii"] = serde_json::json!(radii);
    let family = FamilySpec::iterates(*f, cfg.n_max)?;
    let gauge = estimate_gauge(
        &family,
        x,
        &radii,
        cfg.samples_per_ball,
        cfg.seed,
        cfg.workers,
    )?;
    let linear_bound = certify_linear_bound(&gauge)?;
    let lam = nf.lambda.norm();
    let measured: Vec<Option<f64>> = gauge.rows.iter().map(|r| r.decay_ratio).collect();
    let tolerance = super::gauge::DECAY_TOL;
    let passed = measured
        .iter()
        .all(|m| m.is_some_and(|q| (q / lam - 1.0).abs() <= tolerance));
    let decay_check = DecayCheck {
        lambda_modulus: lam,
        measured,
        tolerance,
        passed,
    };
    let (verdict, reason) = match (linear_bound.certified, decay_check.passed) {
        (true, true) => (Verdict::Holds, None),
        (false, _) => (
            Verdict::Fails,
            Some("gauge did not certify a vanishing linear bound".to_string()),
        ),
        (true, false) => (
            Verdict::Fails,
            Some("ball images did not enter geometric decay at rate |lambda|".to_string()),
        ),
    };
    Ok(EquiBaireReport {
        verdict,
        basis: Some(super::Basis::Theorem1Gauge),
        reason,
        evidence: Evidence::Gauge {
            gauge,
            linear_bound,
            decay_check,
        },
        parameters,
        tolerances: theorem1_tolerances(),
    })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Theorem2Config {
    pub collapse: CollapseConfig,
}

/// Equi-Baire one verdict for `{exp(tA) : t ≥ 0}` on `K`.
///
/// The algebraic basis (relative compactness) is authoritative; the
/// dynamical basis (collapse search) must agree with it, otherwise a
/// [`Error::BasisDisagreement`] carrying both is returned.
pub fn theorem2_verdict(
    a: &FlowGenerator,
    k: &SphereGrid,
    cfg: &Theorem2Config,
) -> Result<EquiBaireReport> {
    let algebraic = a.relative_compactness();
    let collapse = detect_collapse(a, k, &cfg.collapse)?;
    if algebraic.compact == collapse.certificate.is_some() {
        return Err(Error::BasisDisagreement(Box::new(Disagreement {
            algebraic,
            collapse,
        })));
    }
    let (verdict, basis) = if algebraic.compact {
        (Verdict::Holds, Basis::Theorem2Compact)
    } else {
        (Verdict::Fails, Basis::Theorem2Collapse)
    };
    Ok(EquiBaireReport {
        verdict,
        basis: Some(basis),
        reason: None,
        evidence: Evidence::Flow {
            algebraic,
            collapse,
        },
        parameters: serde_json::json!({
            "grid_size": k.len(),
            "subgroup": a.classify(),
            "collapse": cfg.collapse,
        }),
        tolerances: serde_json::json!({
            "collapse_tol": cfg.collapse.collapse_tol,
            "candidate_radius": cfg.collapse.candidate_radius,
            "trace_tol": crate::flow::TRACE_TOL,
            "nilpotent_tol": crate::flow::NILPOTENT_TOL,
            "axis_tol": crate::flow::AXIS_TOL,
            "unitary_tol": crate::flow::UNITARY_TOL,
        }),
    })
}
