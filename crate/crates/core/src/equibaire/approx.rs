use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::flow::{FlowGenerator, SubgroupType};
use crate::moebius::{Homography, MoebiusMap};
use crate::sphere::SphereGrid;

/// Largest denominator accepted when recognising `θ/π` as rational.
const MAX_DENOMINATOR: i64 = 1000;
const RATIONAL_TOL: f64 = 1e-12;
/// Sequence members compared per probe, on each side of the probe phase.
const NEIGHBOURS: usize = 4;
/// Density tolerance at `m_max = 10⁴`; it scales like `m_max^{-1/2}`.
const BASE_TOLERANCE: f64 = 0.05;

/// How the times `t_m` are chosen inside one period `T = π/θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum SequenceRule {
    /// `A = 0`: every member is the identity.
    Constant,
    /// `θ/π = p/q`: base-2 van der Corput points scaled to `[0, T)`.
    VanDerCorput { p: i64, q: i64 },
    /// `t_m = m mod T`, equidistributed because `T` is irrational.
    IrrationalRotation,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityCheck {
    pub probes: Vec<f64>,
    /// Per probe: `min_m sup_K d(h_m(x), exp(tA)(x))`.
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproximatingSequence {
    pub times: Vec<f64>,
    #[serde(skip)]
    pub maps: Vec<MoebiusMap>,
    /// Period of the flow acting on the sphere (`None` for `A = 0`).
    pub period: Option<f64>,
    pub rule: SequenceRule,
    pub density: DensityCheck,
}

/// Twenty probe times `(j + ½)·1.618`, `j = 0..20`.
pub fn default_probe_times() -> Vec<f64> {
    (0..20).map(|j| (j as f64 + 0.5) * 1.618).collect()
}

/// Tolerance for the probe density error given `m_max` sequence members.
pub fn density_tolerance(m_max: usize) -> f64 {
    (BASE_TOLERANCE * (1e4 / m_max as f64).sqrt()).min(1.0)
}

fn rational_approx(x: f64) -> Option<(i64, i64)> {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        if a.abs() > 1e9 {
            break;
        }
        let a = a as i64;
        let h = a * h1 + h0;
        let k = a * k1 + k0;
        if k > MAX_DENOMINATOR {
            break;
        }
        if (x - h as f64 / k as f64).abs() <= RATIONAL_TOL * x.abs().max(1.0) {
            return Some((h, k));
        }
        (h0, h1, k0, k1) = (h1, h, k1, k);
        let frac = r - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

fn van_der_corput(mut m: u64) -> f64 {
    let (mut v, mut scale) = (0.0, 0.5);
    while m > 0 {
        if m & 1 == 1 {
            v += scale;
        }
        m >>= 1;
        scale *= 0.5;
    }
    v
}

/// Dense sequence `h_m = exp(t_m A)`, `m < m_max`, in the closure of the
/// flow of a relatively compact generator, with its probe density check.
pub fn approximating_sequence(
    a: &FlowGenerator,
    k: &SphereGrid,
    m_max: usize,
) -> Result<ApproximatingSequence> {
    if m_max == 0 {
        return Err(Error::parameter("m_max", "must be positive"));
    }
    let (times, period, rule) = match a.classify() {
        SubgroupType::Trivial => (vec![0.0; m_max], None, SequenceRule::Constant),
        SubgroupType::Elliptic { theta } => {
            let period = PI / theta;
            match rational_approx(theta / PI) {
                Some((p, q)) => (
                    (0..m_max as u64)
                        .map(|m| period * van_der_corput(m))
                        .collect(),
                    Some(period),
                    SequenceRule::VanDerCorput { p, q },
                ),
                None => (
                    (0..m_max).map(|m| (m as f64).rem_euclid(period)).collect(),
                    Some(period),
                    SequenceRule::IrrationalRotation,
                ),
            }
        }
        other => {
            return Err(Error::Precondition(
                format!("generator is {:?}, not relatively compact", other.tag()).to_lowercase(),
            ))
        }
    };
    let maps = times.iter().map(|&t| a.exp(t)).collect();
    let mut seq = ApproximatingSequence {
        times,
        maps,
        period,
        rule,
        density: DensityCheck {
            probes: Vec::new(),
            errors: Vec::new(),
            max_error: 0.0,
            tolerance: density_tolerance(m_max),
            passed: true,
        },
    };
    seq.density = density_error(a, k, &seq, &default_probe_times())?;
    Ok(seq)
}

fn sup_distance(h: &Homography, g: &Homography, k: &SphereGrid) -> f64 {
    k.points()
        .iter()
        .map(|x| h.apply(x).chordal_distance(&g.apply(x)))
        .fold(0.0, f64::max)
}

/// Probe density error of `seq` on `K`.
///
/// Target maps are evaluated at the probe time reduced modulo the period.
/// Only the sequence members closest in phase to each probe are compared.
pub fn density_error(
    a: &FlowGenerator,
    k: &SphereGrid,
    seq: &ApproximatingSequence,
    probes: &[f64],
) -> Result<DensityCheck> {
    if k.is_empty() {
        return Err(Error::parameter("K", "grid must be nonempty"));
    }
    if probes.iter().any(|t| !t.is_finite()) {
        return Err(Error::parameter("probes", "probe times must be finite"));
    }
    let tolerance = density_tolerance(seq.times.len());
    let errors: Vec<f64> = match seq.period {
        None => vec![0.0; probes.len()],
        Some(period) => {
            let mut order: Vec<usize> = (0..seq.times.len()).collect();
            order.sort_by(|&i, &j| seq.times[i].total_cmp(&seq.times[j]));
            let n = order.len();
            probes
                .iter()
                .map(|&t| {
                    let phase = t.rem_euclid(period);
                    let target = a.homography(phase);
                    let pos = order.partition_point(|&i| seq.times[i] < phase);
                    let span = NEIGHBOURS.min(n);
                    (0..2 * span)
                        .map(|j| order[(pos + n + j - span) % n])
                        .map(|i| sup_distance(&a.homography(seq.times[i]), &target, k))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect()
        }
    };
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(DensityCheck {
        probes: probes.to_vec(),
        errors,
        max_error,
        tolerance,
        passed: max_error < tolerance,
    })
}
