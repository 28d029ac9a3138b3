use serde::Serialize;
use std::fmt::Write as _;

use super::{ordered_map, FamilySpec};
use crate::error::{Error, Result};
use crate::moebius::Homography;
use crate::sphere::{chordal_ball_grid, ChordalBall, SpherePoint};

/// The smallest-radius gauge value must fall below this for certification.
pub const EPS_FLOOR: f64 = 1e-3;
/// Iterates stop once the ball image is this fraction of `r` (after the decay phase).
pub const TRUNCATION_FACTOR: f64 = 1e-3;
/// Relative band around `|λ|` for a per-step decay ratio.
pub const DECAY_TOL: f64 = 0.1;
/// Consecutive in-band ratios that mark the geometric phase.
pub const DECAY_RUN: usize = 3;
/// Allowed growth of `Ŝ/r` on the small radii relative to the largest one.
pub const STABILITY_FACTOR: f64 = 1.5;

/// Per-radius details of a gauge estimate.
#[derive(Clone, Debug, Serialize)]
pub struct GaugeRow {
    pub r: f64,
    pub s: f64,
    pub s_over_r: f64,
    /// Sampled supremum before nesting and tail slack.
    pub sampled: f64,
    pub members_used: usize,
    /// Index at which loxodromic iterates were truncated.
    pub truncated_at: Option<usize>,
    /// Geometric-series bound on the skipped iterates, included in `s`.
    pub tail_bound: f64,
    /// Mean per-step decay ratio over the certified geometric phase.
    pub decay_ratio: Option<f64>,
}

/// Sampled gauge `Ŝ(x, r)` over a descending list of radii.
#[derive(Clone, Debug, Serialize)]
pub struct GaugeEstimate {
    pub center: SpherePoint,
    pub radii: Vec<f64>,
    pub s_values: Vec<f64>,
    /// `max Ŝ(x, r)/r` over the listed radii.
    pub c_prime: f64,
    /// `(ε, δ)` pairs, ascending: every pair of points in `B_δ(x)` has all
    /// sampled images within `ε` of each other (`ε = 2·Ŝ(x, δ)`).
    pub delta_of_epsilon: Vec<[f64; 2]>,
    pub rows: Vec<GaugeRow>,
    /// `|λ|` when the family is loxodromic iterates.
    pub lambda_modulus: Option<f64>,
    pub samples_per_ball: usize,
    pub seed: u64,
}

impl GaugeEstimate {
    /// `δ` for a requested `ε`: the largest listed radius whose entry fits.
    pub fn delta_for(&self, eps: f64) -> Option<f64> {
        self.delta_of_epsilon
            .iter()
            .filter(|[e, _]| *e <= eps)
            .map(|[_, d]| *d)
            .fold(None, |acc: Option<f64>, d| {
                Some(acc.map_or(d, |a| a.max(d)))
            })
    }

    /// CSV table with header `r,S,S_over_r`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,S,S_over_r\n");
        for row in &self.rows {
            let _ = writeln!(out, "{:e},{:e},{:e}", row.r, row.s, row.s_over_r);
        }
        out
    }
}

fn sup_displacement(h: &Homography, x: &SpherePoint, pts: &[SpherePoint]) -> f64 {
    let fx = h.apply(x);
    pts.iter()
        .map(|y| h.apply(y).chordal_distance(&fx))
        .fold(0.0, f64::max)
}

struct RadiusOutcome {
    sampled: f64,
    tail_bound: f64,
    members_used: usize,
    truncated_at: Option<usize>,
    decay_ratio: Option<f64>,
}

/// Loxodromic iterates: scan `n = 0, 1, …` until the image of the ball
/// is in geometric decay at rate `|λ|` and below `1e-3·r`.
fn scan_loxodromic(
    map: &Homography,
    lam: f64,
    n_max: usize,
    x: &SpherePoint,
    r: f64,
    pts: &[SpherePoint],
) -> RadiusOutcome {
    let mut sup: f64 = 0.0;
    let mut history: Vec<f64> = Vec::new();
    for n in 0..=n_max {
        let disp = sup_displacement(&map.power(n as u64), x, pts);
        sup = sup.max(disp);
        history.push(disp);
        if disp == 0.0 {
            return RadiusOutcome {
                sampled: sup,
                tail_bound: 0.0,
                members_used: n + 1,
                truncated_at: Some(n),
                decay_ratio: None,
            };
        }
        if history.len() <= DECAY_RUN {
            continue;
        }
        let k = history.len();
        let ratios: Vec<f64> = (k - DECAY_RUN..k)
            .map(|i| history[i] / history[i - 1])
            .collect();
        let in_band = ratios.iter().all(|q| (q / lam - 1.0).abs() <= DECAY_TOL);
        if in_band && disp < TRUNCATION_FACTOR * r {
            let rho = (1.0 + DECAY_TOL) * lam;
            if rho < 1.0 {
                let mean = ratios.iter().sum::<f64>() / DECAY_RUN as f64;
                return RadiusOutcome {
                    sampled: sup,
                    tail_bound: disp * rho / (1.0 - rho),
                    members_used: n + 1,
                    truncated_at: Some(n),
                    decay_ratio: Some(mean),
                };
            }
        }
    }
    RadiusOutcome {
        sampled: sup,
        tail_bound: 0.0,
        members_used: n_max + 1,
        truncated_at: None,
        decay_ratio: None,
    }
}

/// Estimates `Ŝ(x, r)` for each radius.
///
/// Each ball is sampled with [`chordal_ball_grid`]; the estimate at a
/// radius also includes the samples of every smaller radius, so `Ŝ` is
/// monotone in `r` exactly. Loxodromic iterates are truncated once the
/// ball image is in certified geometric decay (three consecutive ratios
/// within 10% of `|λ|`) and below `1e-3·r`; the remaining iterates are
/// bounded by a geometric series that is added to `Ŝ`.
pub fn estimate_gauge(
    family: &FamilySpec,
    x: &SpherePoint,
    radii: &[f64],
    samples_per_ball: usize,
    seed: u64,
    workers: usize,
) -> Result<GaugeEstimate> {
    if radii.is_empty() {
        return Err(Error::parameter("radii", "need at least one radius"));
    }
    if let Some(r) = radii.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::parameter(
            "radii",
            format!("radius {r} is outside (0, 1)"),
        ));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::parameter(
            "radii",
            "radii must be strictly descending",
        ));
    }
    if samples_per_ball == 0 {
        return Err(Error::parameter("samples_per_ball", "must be positive"));
    }

    let loxodromic = match family {
        FamilySpec::Iterates { map, n_max } if map.classify().tag.is_loxodromic_type() => {
            Some((map.homography(), map.normal_form()?.lambda.norm(), *n_max))
        }
        _ => None,
    };
    let members = if loxodromic.is_some() {
        Vec::new()
    } else {
        family.members()
    };

    let balls = radii
        .iter()
        .map(|&r| {
            Ok((
                r,
                chordal_ball_grid(&ChordalBall::new(*x, r)?, samples_per_ball, seed)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let outcomes = ordered_map(&balls, workers, |(r, grid)| match &loxodromic {
        Some((h, lam, n_max)) => scan_loxodromic(h, *lam, *n_max, x, *r, grid.points()),
        None => RadiusOutcome {
            sampled: members
                .iter()
                .map(|h| sup_displacement(h, x, grid.points()))
                .fold(0.0, f64::max),
            tail_bound: 0.0,
            members_used: members.len(),
            truncated_at: None,
            decay_ratio: None,
        },
    });

    // nest: the ball of radius r_i contains every smaller ball's samples
    let mut s_values = vec![0.0; radii.len()];
    let mut acc: f64 = 0.0;
    for i in (0..radii.len()).rev() {
        acc = acc.max(outcomes[i].sampled + outcomes[i].tail_bound);
        s_values[i] = acc;
    }
    let rows: Vec<GaugeRow> = radii
        .iter()
        .zip(&s_values)
        .zip(outcomes)
        .map(|((&r, &s), o)| GaugeRow {
            r,
            s,
            s_over_r: s / r,
            sampled: o.sampled,
            members_used: o.members_used,
            truncated_at: o.truncated_at,
            tail_bound: o.tail_bound,
            decay_ratio: o.decay_ratio,
        })
        .collect();
    let c_prime = rows.iter().map(|row| row.s_over_r).fold(0.0, f64::max);
    let delta_of_epsilon = radii
        .iter()
        .zip(&s_values)
        .rev()
        .map(|(&r, &s)| [2.0 * s, r])
        .collect();
    Ok(GaugeEstimate {
        center: *x,
        radii: radii.to_vec(),
        s_values,
        c_prime,
        delta_of_epsilon,
        rows,
        lambda_modulus: loxodromic.map(|(_, lam, _)| lam),
        samples_per_ball,
        seed,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// `Ŝ/r` on the small radii exceeds 1.5× its value at the largest radius.
    Unstable { ratio_small: f64, ratio_large: f64 },
    /// The gauge does not shrink below the floor.
    NotVanishing { smallest_s: f64, eps_floor: f64 },
}

/// Outcome of the linear-bound check `Ŝ(x, r) ≤ C′·r`.
#[derive(Clone, Debug, Serialize)]
pub struct LinearBound {
    pub certified: bool,
    pub c_prime: f64,
    pub ratio_largest: f64,
    pub max_ratio_small_half: f64,
    pub smallest_s: f64,
    pub violations: Vec<Violation>,
}

/// Certifies the linear bound: the ratio `Ŝ/r` over the smaller half of
/// the radii stays within 1.5× the ratio at the largest radius, and the
/// smallest `Ŝ` is below [`EPS_FLOOR`]. `C′` is reported either way.
pub fn certify_linear_bound(g: &GaugeEstimate) -> Result<LinearBound> {
    let n = g.radii.len();
    if n < 4 {
        return Err(Error::parameter(
            "radii",
            format!("need at least 4 radii, got {n}"),
        ));
    }
    let span = g.radii[0] / g.radii[n - 1];
    if span < 10.0 {
        return Err(Error::parameter(
            "radii",
            format!("radii must span a 10x range, got {span:.3}x"),
        ));
    }
    let ratios: Vec<f64> = g.rows.iter().map(|r| r.s_over_r).collect();
    let ratio_largest = ratios[0];
    let max_ratio_small_half = ratios[n / 2..].iter().copied().fold(0.0, f64::max);
    let smallest_s = g.s_values[n - 1];
    let mut violations = Vec::new();
    if max_ratio_small_half > STABILITY_FACTOR * ratio_largest {
        violations.push(Violation::Unstable {
            ratio_small: max_ratio_small_half,
            ratio_large: ratio_largest,
        });
    }
    if smallest_s.is_nan() || smallest_s >= EPS_FLOOR {
        violations.push(Violation::NotVanishing {
            smallest_s,
            eps_floor: EPS_FLOOR,
        });
    }
    Ok(LinearBound {
        certified: violations.is_empty(),
        c_prime: g.c_prime,
        ratio_largest,
        max_ratio_small_half,
        smallest_s,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowGenerator;
    use crate::moebius::MoebiusMap;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn halving() -> MoebiusMap {
        let s = 0.5f64.sqrt();
        MoebiusMap::new(c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0 / s, 0.0)).unwrap()
    }

    /// Brute force: every iterate up to `n_max`, every point of a dense ball sample.
    fn brute_gauge(f: &MoebiusMap, x: &SpherePoint, r: f64, n_max: u64, samples: usize) -> f64 {
        let grid = chordal_ball_grid(&ChordalBall::new(*x, r).unwrap(), samples, 99).unwrap();
        let mut sup: f64 = 0.0;
        let mut fy: Vec<SpherePoint> = grid.points().to_vec();
        let mut fx = *x;
        for _ in 0..=n_max {
            for y in &fy {
                sup = sup.max(y.chordal_distance(&fx));
            }
            fy = fy.iter().map(|y| f.apply(y)).collect();
            fx = f.apply(&fx);
        }
        sup
    }

    #[test]
    fn halving_map_gauge_matches_brute_force() {
        let f = halving();
        let x = SpherePoint::zero();
        let oracle = brute_gauge(&f, &x, 0.3, 60, 10_000);
        assert!((oracle / 0.3 - 1.0).abs() < 0.02);
        let fam = FamilySpec::iterates(f, 200).unwrap();
        let g = estimate_gauge(&fam, &x, &[0.3], 2000, 1, 1).unwrap();
        assert!((g.s_values[0] / oracle - 1.0).abs() < 0.02);
        assert!(g.rows[0].truncated_at.is_some());
        let d = g.rows[0].decay_ratio.unwrap();
        assert!((d / 0.5 - 1.0).abs() < 0.1);
    }

    #[test]
    fn identity_gauge_is_radius() {
        let fam = FamilySpec::iterates(MoebiusMap::identity(), 10).unwrap();
        let x = SpherePoint::from_affine(c(2.0, -1.0)).unwrap();
        let radii = [0.5, 0.2, 0.05, 0.01];
        let g = estimate_gauge(&fam, &x, &radii, 400, 3, 1).unwrap();
        for (s, r) in g.s_values.iter().zip(radii) {
            assert!(*s < r && *s > 0.95 * r);
        }
        let lb = certify_linear_bound(&g).unwrap();
        assert!((lb.c_prime - 1.0).abs() < 0.05);
    }

    #[test]
    fn gauge_is_monotone_and_workers_agree() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let f = crate::canonical::random_loxodromic(&mut rng);
        let fam = FamilySpec::iterates(f, 2000).unwrap();
        let x = SpherePoint::from_affine(c(0.1, 0.2)).unwrap();
        let radii = [0.05, 0.02, 0.01, 0.005, 0.001];
        let g1 = estimate_gauge(&fam, &x, &radii, 200, 5, 1).unwrap();
        let g4 = estimate_gauge(&fam, &x, &radii, 200, 5, 4).unwrap();
        assert_eq!(g1.s_values, g4.s_values);
        assert!(g1.s_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rejects_bad_radii() {
        let fam = FamilySpec::iterates(MoebiusMap::identity(), 3).unwrap();
        let x = SpherePoint::zero();
        assert!(estimate_gauge(&fam, &x, &[], 10, 0, 1).is_err());
        assert!(estimate_gauge(&fam, &x, &[1.0], 10, 0, 1).is_err());
        assert!(estimate_gauge(&fam, &x, &[0.0], 10, 0, 1).is_err());
        assert!(estimate_gauge(&fam, &x, &[0.1, 0.2], 10, 0, 1).is_err());
        assert!(estimate_gauge(&fam, &x, &[0.1], 0, 0, 1).is_err());
    }

    #[test]
    fn certification_examples() {
        let x = SpherePoint::zero();
        let radii = [0.1, 0.03, 0.01, 0.003, 0.001, 0.0003];
        let fam = FamilySpec::iterates(halving(), 500).unwrap();
        let g = estimate_gauge(&fam, &x, &radii, 500, 0, 1).unwrap();
        let lb = certify_linear_bound(&g).unwrap();
        assert!(lb.certified, "{lb:?}");
        assert!((lb.c_prime - 1.0).abs() < 0.05);

        let fam = FamilySpec::iterates(MoebiusMap::identity(), 5).unwrap();
        let g = estimate_gauge(&fam, &x, &radii, 500, 0, 1).unwrap();
        let lb = certify_linear_bound(&g).unwrap();
        assert!(lb.certified);
        assert!((lb.c_prime - 1.0).abs() < 1e-6);

        // z ↦ e^{2t} z pushes every y ≠ 0 toward ∞: the gauge at 0 stalls near 1
        let a =
            FlowGenerator::new([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]).unwrap();
        let fam = FamilySpec::flow(a, 20.0, 200).unwrap();
        let g = estimate_gauge(&fam, &x, &radii, 100, 0, 1).unwrap();
        assert!(g.s_values.iter().all(|&s| s > 0.9));
        let lb = certify_linear_bound(&g).unwrap();
        assert!(!lb.certified);
        assert!(lb
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NotVanishing { .. })));
    }

    #[test]
    fn certification_needs_enough_radii() {
        let fam = FamilySpec::iterates(MoebiusMap::identity(), 2).unwrap();
        let x = SpherePoint::zero();
        let g = estimate_gauge(&fam, &x, &[0.1, 0.05, 0.01], 50, 0, 1).unwrap();
        assert!(certify_linear_bound(&g).is_err());
        let g = estimate_gauge(&fam, &x, &[0.1, 0.08, 0.05, 0.02], 50, 0, 1).unwrap();
        assert!(certify_linear_bound(&g).is_err());
    }

    #[test]
    fn csv_and_delta_table() {
        let fam = FamilySpec::iterates(MoebiusMap::identity(), 2).unwrap();
        let g = estimate_gauge(&fam, &SpherePoint::zero(), &[0.4, 0.1, 0.01], 50, 0, 1).unwrap();
        let csv = g.to_csv();
        assert!(csv.starts_with("r,S,S_over_r\n"));
        assert_eq!(csv.lines().count(), 4);
        assert!(g
            .delta_of_epsilon
            .windows(2)
            .all(|w| w[0][0] <= w[1][0] && w[0][1] <= w[1][1]));
        assert_eq!(g.delta_for(2.0 * g.s_values[1]), Some(0.1));
        assert_eq!(g.delta_for(1e-9), None);
    }
}
