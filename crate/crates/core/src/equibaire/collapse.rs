use serde::Serialize;

use super::ordered_map;
use crate::error::{Error, Result};
use crate::flow::FlowGenerator;
use crate::sphere::{chordal_ball_grid, ChordalBall, SphereGrid, SpherePoint};

/// Probe times `2⁰ … 2¹⁰`.
pub const PROBE_TIMES: [f64; 11] = [
    1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0,
];

/// Distances at or below this are rounding noise and count as zero in the
/// monotonicity checks.
pub const ROUNDING_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct CollapseConfig {
    pub candidate_radius: f64,
    pub collapse_tol: f64,
    /// Sample points per candidate ball (the center is added on top).
    pub ball_samples: usize,
    pub seed: u64,
    /// Thread hint; never changes the result, so it is not reported.
    #[serde(skip)]
    pub workers: usize,
}

impl Default for CollapseConfig {
    fn default() -> Self {
        Self {
            candidate_radius: 0.1,
            collapse_tol: 1e-4,
            ball_samples: 24,
            seed: 0,
            workers: 1,
        }
    }
}

/// Evidence that the images of an open set shrink to a point outside it.
#[derive(Clone, Debug, Serialize)]
pub struct CollapseCertificate {
    pub region: ChordalBall,
    pub times: Vec<f64>,
    /// Image of the region's center at the last probe time.
    pub limit: SpherePoint,
    /// Chordal diameter of the sampled image at each probe time.
    pub diameters: Vec<f64>,
    /// Diameters are strictly decreasing (or at the rounding floor) from this index on.
    pub decreasing_from: usize,
    pub initial_diameter: f64,
}

/// Result of scanning every candidate ball.
#[derive(Clone, Debug, Serialize)]
pub struct CollapseSearch {
    pub certificate: Option<CollapseCertificate>,
    pub candidates: usize,
    /// Smallest `diameter(t)/diameter(0)` seen over all candidates and times.
    pub min_diameter_ratio: f64,
}

fn diameter(pts: &[SpherePoint]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            d = d.max(p.chordal_distance(q));
        }
    }
    d
}

fn floored(v: f64) -> f64 {
    if v <= ROUNDING_FLOOR {
        0.0
    } else {
        v
    }
}

/// First index from which the sequence only decreases strictly (zeros may repeat).
fn decreasing_from(d: &[f64]) -> usize {
    let d: Vec<f64> = d.iter().copied().map(floored).collect();
    let mut k = d.len() - 1;
    while k > 0 && (d[k] < d[k - 1] || (d[k] == 0.0 && d[k - 1] == 0.0)) {
        k -= 1;
    }
    k
}

struct Probe {
    certificate: Option<CollapseCertificate>,
    min_ratio: f64,
}

fn probe_candidate(
    a: &FlowGenerator,
    center: &SpherePoint,
    cfg: &CollapseConfig,
    index: usize,
) -> Result<Probe> {
    let region = ChordalBall::new(*center, cfg.candidate_radius)?;
    let mut pts = vec![*center];
    pts.extend_from_slice(
        chordal_ball_grid(
            &region,
            cfg.ball_samples,
            cfg.seed.wrapping_add(index as u64),
        )?
        .points(),
    );
    let initial = diameter(&pts);
    let mut diameters = Vec::with_capacity(PROBE_TIMES.len());
    let mut centers = Vec::with_capacity(PROBE_TIMES.len());
    for &t in &PROBE_TIMES {
        let h = a.homography(t);
        let img: Vec<SpherePoint> = pts.iter().map(|p| h.apply(p)).collect();
        diameters.push(diameter(&img));
        centers.push(img[0]);
    }
    let min_ratio = diameters.iter().copied().fold(f64::INFINITY, f64::min) / initial;
    let n = PROBE_TIMES.len();
    let last = diameters[n - 1];
    let limit = centers[n - 1];
    let start = decreasing_from(&diameters);
    // the center's images must settle: successive steps non-increasing
    let steps: Vec<f64> = (n - 3..n)
        .map(|k| floored(centers[k].chordal_distance(&centers[k - 1])))
        .collect();
    let settled = steps.windows(2).all(|w| w[1] <= w[0]);
    let collapsed = last < cfg.collapse_tol
        && start + 2 < n
        && settled
        && limit.chordal_distance(center) > cfg.candidate_radius;
    Ok(Probe {
        certificate: collapsed.then(|| CollapseCertificate {
            region,
            times: PROBE_TIMES.to_vec(),
            limit,
            diameters,
            decreasing_from: start,
            initial_diameter: initial,
        }),
        min_ratio,
    })
}

/// Searches `K` for a ball whose images under `exp(tA)`, `t = 2⁰ … 2¹⁰`,
/// collapse below `collapse_tol` onto a settled point outside the ball.
/// The certificate from the first such grid point (in grid order) is returned.
pub fn detect_collapse(
    a: &FlowGenerator,
    k: &SphereGrid,
    cfg: &CollapseConfig,
) -> Result<CollapseSearch> {
    if k.is_empty() {
        return Err(Error::parameter("K", "grid must be nonempty"));
    }
    if cfg.collapse_tol.is_nan() || cfg.collapse_tol <= 0.0 || cfg.ball_samples == 0 {
        return Err(Error::parameter(
            "collapse",
            "need collapse_tol > 0 and ball_samples > 0",
        ));
    }
    let indexed: Vec<(usize, SpherePoint)> = k.points().iter().copied().enumerate().collect();
    let probes = ordered_map(&indexed, cfg.workers, |(i, p)| {
        probe_candidate(a, p, cfg, *i)
    });
    let mut min_ratio = f64::INFINITY;
    let mut certificate = None;
    for probe in probes {
        let probe = probe?;
        min_ratio = min_ratio.min(probe.min_ratio);
        if certificate.is_none() {
            certificate = probe.certificate;
        }
    }
    Ok(CollapseSearch {
        certificate,
        candidates: k.len(),
        min_diameter_ratio: min_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::canonical_generators;
    use crate::flow::SubgroupTag;

    fn generator(tag: SubgroupTag) -> FlowGenerator {
        canonical_generators()
            .into_iter()
            .find(|(t, _)| *t == tag)
            .unwrap()
            .1
    }

    fn grid() -> SphereGrid {
        SphereGrid::fibonacci(64, 0).unwrap()
    }

    fn check_certificate(cert: &CollapseCertificate, tol: f64) {
        let d = &cert.diameters;
        assert!(*d.last().unwrap() < tol);
        for k in cert.decreasing_from..d.len() - 1 {
            assert!(d[k + 1] < d[k] || d[k + 1] <= ROUNDING_FLOOR);
        }
        assert!(cert.limit.chordal_distance(&cert.region.center()) > cert.region.radius());
    }

    #[test]
    fn hyperbolic_flow_collapses_to_infinity() {
        let s = detect_collapse(
            &generator(SubgroupTag::Hyperbolic),
            &grid(),
            &CollapseConfig::default(),
        )
        .unwrap();
        let cert = s.certificate.expect("collapse expected");
        check_certificate(&cert, 1e-4);
        assert!(cert.limit.chordal_distance(&SpherePoint::infinity()) < 1e-6);
    }

    #[test]
    fn rotation_does_not_collapse() {
        let s = detect_collapse(
            &generator(SubgroupTag::Elliptic),
            &grid(),
            &CollapseConfig::default(),
        )
        .unwrap();
        assert!(s.certificate.is_none());
        assert!(s.min_diameter_ratio > 0.9, "{}", s.min_diameter_ratio);
        let s = detect_collapse(
            &generator(SubgroupTag::Trivial),
            &grid(),
            &CollapseConfig::default(),
        )
        .unwrap();
        assert!(s.certificate.is_none());
        assert!((s.min_diameter_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn translations_collapse_to_infinity() {
        let s = detect_collapse(
            &generator(SubgroupTag::Parabolic),
            &grid(),
            &CollapseConfig::default(),
        )
        .unwrap();
        let cert = s.certificate.expect("collapse expected");
        check_certificate(&cert, 1e-4);
        assert!(cert.limit.chordal_distance(&SpherePoint::infinity()) < 1e-2);
    }

    #[test]
    fn workers_do_not_change_the_result() {
        let a = generator(SubgroupTag::Loxodromic);
        let one = detect_collapse(&a, &grid(), &CollapseConfig::default()).unwrap();
        let cfg = CollapseConfig {
            workers: 3,
            ..CollapseConfig::default()
        };
        let many = detect_collapse(&a, &grid(), &cfg).unwrap();
        let (c1, c3) = (one.certificate.unwrap(), many.certificate.unwrap());
        assert_eq!(c1.diameters, c3.diameters);
        assert_eq!(one.min_diameter_ratio, many.min_diameter_ratio);
    }

    #[test]
    fn decreasing_index() {
        assert_eq!(decreasing_from(&[1.0, 3.0, 2.0, 1.0]), 1);
        assert_eq!(decreasing_from(&[3.0, 2.0, 0.0, 0.0]), 0);
        assert_eq!(decreasing_from(&[1.0, 2.0]), 1);
        assert_eq!(decreasing_from(&[1.0, 1e-3, 2e-16, 3e-16]), 0);
    }
}
