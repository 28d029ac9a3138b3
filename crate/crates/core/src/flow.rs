//! One-parameter subgroups `t ↦ exp(tA)` of SL(2,ℂ).
//!
//! For trace-zero `A` with eigenvalues `±μ`, Cayley–Hamilton gives
//! `A² = μ² I` and hence the closed form
//!
//! ```text
//! exp(tA) = cosh(tμ) I + (sinh(tμ)/μ) A
//! ```
//!
//! which is even in `μ` and reduces to `I + tA` at `μ = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moebius::{frobenius, mat_mul, Homography, Mat2, MoebiusMap};
use crate::sphere::SpherePoint;

/// Largest `|tr A|` accepted for a generator.
pub const TRACE_TOL: f64 = 1e-10;
/// `‖A‖` below this counts as zero, and so does `μ` once `|μ|² ≤ NILPOTENT_TOL·‖A‖²`
/// (rounding in `μ² = −det A` grows with `‖A‖²`).
pub const NILPOTENT_TOL: f64 = 1e-8;
/// Relative size of `Re μ` (or `Im μ`) below which `μ` is purely imaginary (real).
pub const AXIS_TOL: f64 = 1e-9;
/// Times at which a compactness certificate is checked for unitarity.
pub const UNITARY_CHECK_TIMES: [f64; 3] = [0.1, 1.0, 7.3];
pub const UNITARY_TOL: f64 = 1e-8;
/// Frobenius norm a non-compact subgroup must exceed to witness growth.
pub const GROWTH_THRESHOLD: f64 = 10.0;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Beyond this `|Re(tμ)|` the exponential is evaluated with `e^{|Re tμ|}` divided out.
const OVERFLOW_GUARD: f64 = 300.0;

/// A trace-zero 2×2 complex matrix generating `exp(tA)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGenerator", into = "RawGenerator")]
pub struct FlowGenerator {
    a: Mat2,
    mu: Complex64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    #[serde(rename = "A")]
    a: Mat2,
}

impl TryFrom<RawGenerator> for FlowGenerator {
    type Error = Error;

    fn try_from(r: RawGenerator) -> Result<Self> {
        FlowGenerator::new(r.a)
    }
}

impl From<FlowGenerator> for RawGenerator {
    fn from(g: FlowGenerator) -> Self {
        RawGenerator { a: g.a }
    }
}

/// `sinh(x)/x`, by its series near 0.
fn sinhc(x: Complex64) -> Complex64 {
    if x.norm() < 1e-4 {
        let x2 = x * x;
        ONE + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

impl FlowGenerator {
    /// Accepts `A` when `|tr A| ≤ 1e-10`; the residual trace is removed.
    pub fn new(a: Mat2) -> Result<Self> {
        for e in a.iter().flatten() {
            if !(e.re.is_finite() && e.im.is_finite()) {
                return Err(Error::malformed("A", "generator entries must be finite"));
            }
        }
        let tr = a[0][0] + a[1][1];
        if tr.norm() > TRACE_TOL {
            return Err(Error::TraceNotZero {
                trace: tr.to_string(),
            });
        }
        let half = tr * 0.5;
        let a = [[a[0][0] - half, a[0][1]], [a[1][0], a[1][1] - half]];
        // μ² = −det A = a₀₀² + a₀₁a₁₀ for trace-zero A
        let mu = (a[0][0] * a[0][0] + a[0][1] * a[1][0]).sqrt();
        Ok(Self { a, mu })
    }

    pub fn matrix(&self) -> Mat2 {
        self.a
    }

    /// Principal square root of `−det A`; the eigenvalues are `±μ`.
    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    pub fn norm(&self) -> f64 {
        frobenius(&self.a)
    }

    pub fn is_zero(&self) -> bool {
        self.norm() <= NILPOTENT_TOL
    }

    fn is_nilpotent(&self) -> bool {
        self.mu.norm_sqr() <= NILPOTENT_TOL * self.norm().powi(2)
    }

    /// False only for nonzero nilpotent `A` (within [`NILPOTENT_TOL`]).
    pub fn is_diagonalizable(&self) -> bool {
        !(self.is_nilpotent() && !self.is_zero())
    }

    fn exp_matrix_with_mu(&self, mu: Complex64, t: f64) -> Mat2 {
        let x = mu * t;
        let ch = x.cosh();
        let sh = sinhc(x) * t;
        [
            [ch + sh * self.a[0][0], sh * self.a[0][1]],
            [sh * self.a[1][0], ch + sh * self.a[1][1]],
        ]
    }

    /// `exp(tA)` entrywise.
    pub fn exp_matrix(&self, t: f64) -> Mat2 {
        self.exp_matrix_with_mu(self.mu, t)
    }

    /// `exp(tA)` as a Möbius map. Entries overflow once `|Re(tμ)|` nears
    /// 700; [`FlowGenerator::homography`] stays valid for any `t`.
    pub fn exp(&self, t: f64) -> MoebiusMap {
        MoebiusMap::from_sl2(self.exp_matrix(t))
    }

    /// `exp(tA)` up to scale, safe for arbitrarily large `|t|`.
    pub fn homography(&self, t: f64) -> Homography {
        let x = self.mu * t;
        if x.re.abs() <= OVERFLOW_GUARD {
            return Homography::from_matrix(self.exp_matrix(t));
        }
        // divide cosh and sinh by e^{s·tμ}, s = sign(Re tμ)
        let s = x.re.signum();
        let decay = (-2.0 * s * x).exp();
        let ch = (ONE + decay) * 0.5;
        let sh = (ONE - decay) * (0.5 * s) / self.mu;
        Homography::from_matrix([
            [ch + sh * self.a[0][0], sh * self.a[0][1]],
            [sh * self.a[1][0], ch + sh * self.a[1][1]],
        ])
    }

    pub fn classify(&self) -> SubgroupType {
        if self.is_zero() {
            return SubgroupType::Trivial;
        }
        let m = self.mu.norm();
        if self.is_nilpotent() {
            return SubgroupType::Parabolic;
        }
        if self.mu.re.abs() <= AXIS_TOL * m {
            SubgroupType::Elliptic { theta: m }
        } else if self.mu.im.abs() <= AXIS_TOL * m {
            SubgroupType::Hyperbolic { lambda: m }
        } else {
            let s = self.mu.re.signum();
            SubgroupType::Loxodromic {
                alpha: self.mu.re.abs(),
                beta: self.mu.im * s,
            }
        }
    }

    /// Eigenvector of `A` for eigenvalue `nu`.
    fn eigenvector(&self, nu: Complex64) -> (Complex64, Complex64) {
        let a = self.a;
        let v1 = (a[0][1], nu - a[0][0]);
        let v2 = (nu - a[1][1], a[1][0]);
        let n1 = v1.0.norm_sqr() + v1.1.norm_sqr();
        let n2 = v2.0.norm_sqr() + v2.1.norm_sqr();
        if n1 >= n2 {
            v1
        } else {
            v2
        }
    }

    /// Relatively compact iff `A = 0`, or `μ ≠ 0` is purely imaginary (then
    /// `A` is automatically diagonalizable).
    pub fn relative_compactness(&self) -> CompactnessReport {
        match self.classify() {
            SubgroupType::Trivial => CompactnessReport {
                compact: true,
                certificate: CompactnessCertificate::Trivial,
            },
            SubgroupType::Elliptic { theta } => {
                let nu = Complex64::new(0.0, theta);
                let (p0, p1) = self.eigenvector(nu);
                let (q0, q1) = self.eigenvector(-nu);
                let p = MoebiusMap::from_matrix([[p0, q0], [p1, q1]])
                    .expect("eigenvectors of distinct eigenvalues are independent");
                let pm = p.matrix();
                let pinv = p.inverse().matrix();
                let checks = UNITARY_CHECK_TIMES
                    .iter()
                    .map(|&t| {
                        let u = mat_mul(&mat_mul(&pinv, &self.exp_matrix(t)), &pm);
                        UnitaryCheck {
                            t,
                            defect: unitarity_defect(&u),
                        }
                    })
                    .collect::<Vec<_>>();
                let verified = checks.iter().all(|c| c.defect <= UNITARY_TOL);
                CompactnessReport {
                    compact: true,
                    certificate: CompactnessCertificate::Conjugator {
                        conjugator: p,
                        theta,
                        checks,
                        verified,
                    },
                }
            }
            _ => CompactnessReport {
                compact: false,
                certificate: CompactnessCertificate::Growth {
                    witness: self.growth_witness(),
                },
            },
        }
    }

    /// First `t = 2^k` with `‖exp(tA)‖_F > 10`. The probe runs over
    /// `k = 0..=10` and then continues to `k = 62` for slowly growing flows.
    pub fn growth_witness(&self) -> Option<GrowthWitness> {
        (0..=62).find_map(|k| {
            let t = (1u64 << k) as f64;
            let norm = frobenius(&self.exp_matrix(t));
            (norm > GROWTH_THRESHOLD).then_some(GrowthWitness { t_star: t, norm })
        })
    }

    /// `[exp(t_j A)·x]` for ascending `times`.
    pub fn trajectory(&self, x: &SpherePoint, times: &[f64]) -> Result<Vec<SpherePoint>> {
        if times.is_empty() {
            return Err(Error::parameter("times", "need at least one time"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::parameter("times", "times must be finite"));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::parameter("times", "times must be sorted ascending"));
        }
        Ok(times.iter().map(|&t| self.homography(t).apply(x)).collect())
    }
}

/// Largest entry of `U U* − I`.
fn unitarity_defect(u: &Mat2) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut s = u[i][0] * u[j][0].conj() + u[i][1] * u[j][1].conj();
            if i == j {
                s -= ONE;
            }
            worst = worst.max(s.norm());
        }
    }
    worst
}

/// Conjugacy type of the subgroup with its normal-form parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum SubgroupType {
    Trivial,
    Elliptic { theta: f64 },
    Hyperbolic { lambda: f64 },
    Parabolic,
    Loxodromic { alpha: f64, beta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SubgroupTag {
    Trivial,
    Elliptic,
    Hyperbolic,
    Parabolic,
    Loxodromic,
}

impl SubgroupType {
    pub fn tag(&self) -> SubgroupTag {
        match self {
            SubgroupType::Trivial => SubgroupTag::Trivial,
            SubgroupType::Elliptic { .. } => SubgroupTag::Elliptic,
            SubgroupType::Hyperbolic { .. } => SubgroupTag::Hyperbolic,
            SubgroupType::Parabolic => SubgroupTag::Parabolic,
            SubgroupType::Loxodromic { .. } => SubgroupTag::Loxodromic,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CompactnessReport {
    pub compact: bool,
    pub certificate: CompactnessCertificate,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CompactnessCertificate {
    /// `A = 0`: the subgroup is `{I}`.
    Trivial,
    /// `P⁻¹AP = diag(iθ, −iθ)`, with `P⁻¹exp(tA)P` checked unitary.
    Conjugator {
        conjugator: MoebiusMap,
        theta: f64,
        checks: Vec<UnitaryCheck>,
        verified: bool,
    },
    /// `None` only if no probe time up to 2⁶² crossed the threshold.
    Growth { witness: Option<GrowthWitness> },
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct UnitaryCheck {
    pub t: f64,
    pub defect: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GrowthWitness {
    pub t_star: f64,
    pub norm: f64,
}
