//! Möbius transformations as SL(2,ℂ) matrices acting on the sphere.
//!
//! `f(z) = (az + b)/(cz + d)` acts on homogeneous coordinates by
//! `[z : w] ↦ [az + bw : cz + dw]`, which has no pole case.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::SpherePoint;

pub type Mat2 = [[Complex64; 2]; 2];

/// Band around `|tr| = 2` (and around real traces) owned by the parabolic class.
pub const PARABOLIC_TOL: f64 = 1e-9;
/// Entrywise distance from `±I` below which a map is the identity.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Chordal tolerance for the repelling-point exclusion zone.
pub const BASIN_TOL: f64 = 1e-9;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub(crate) fn mat_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    [
        [
            x[0][0] * y[0][0] + x[0][1] * y[1][0],
            x[0][0] * y[0][1] + x[0][1] * y[1][1],
        ],
        [
            x[1][0] * y[0][0] + x[1][1] * y[1][0],
            x[1][0] * y[0][1] + x[1][1] * y[1][1],
        ],
    ]
}

pub(crate) fn mat_det(m: &Mat2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub(crate) fn mat_scale(m: &Mat2, s: Complex64) -> Mat2 {
    [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]]
}

pub(crate) fn max_entry(m: &Mat2) -> f64 {
    m.iter().flatten().map(|e| e.norm()).fold(0.0, f64::max)
}

pub(crate) fn frobenius(m: &Mat2) -> f64 {
    m.iter().flatten().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
}

fn apply_matrix(m: &Mat2, p: &SpherePoint) -> SpherePoint {
    let (z, w) = (p.z(), p.w());
    let (nz, nw) = (m[0][0] * z + m[0][1] * w, m[1][0] * z + m[1][1] * w);
    if nz.norm() == 0.0 && nw.norm() == 0.0 {
        // Only a numerically rank-one matrix (a flow at huge |t|) has a
        // kernel, and its kernel direction is the repelling fixed point.
        return *p;
    }
    SpherePoint::normalized(nz, nw)
}

/// An invertible matrix taken up to a nonzero scalar.
///
/// Only the projective action is meaningful. Entries are rescaled after
/// every product so long iterate chains neither overflow nor underflow.
#[derive(Clone, Copy, Debug)]
pub struct Homography {
    m: Mat2,
}

impl Homography {
    pub fn from_matrix(m: Mat2) -> Self {
        let s = max_entry(&m);
        debug_assert!(s > 0.0 && s.is_finite());
        Self {
            m: mat_scale(&m, Complex64::new(1.0 / s, 0.0)),
        }
    }

    pub fn identity() -> Self {
        Self {
            m: [[ONE, ZERO], [ZERO, ONE]],
        }
    }

    pub fn matrix(&self) -> Mat2 {
        self.m
    }

    pub fn compose(&self, other: &Homography) -> Homography {
        Homography::from_matrix(mat_mul(&self.m, &other.m))
    }

    pub fn apply(&self, p: &SpherePoint) -> SpherePoint {
        apply_matrix(&self.m, p)
    }

    /// `selfⁿ` by repeated squaring.
    pub fn power(&self, mut n: u64) -> Homography {
        let mut acc = Homography::identity();
        let mut base = *self;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.compose(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.compose(&base);
            }
        }
        acc
    }

    /// The SL(2,ℂ) representative, when the determinant is representable.
    pub fn to_moebius(&self) -> Result<MoebiusMap> {
        MoebiusMap::from_matrix(self.m)
    }
}

/// A Möbius transformation with `ad − bc = 1`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawMap")]
pub struct MoebiusMap {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl TryFrom<RawMap> for MoebiusMap {
    type Error = Error;

    fn try_from(r: RawMap) -> Result<Self> {
        MoebiusMap::new(r.a, r.b, r.c, r.d)
    }
}

/// Fine trace classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassTag {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
    Loxodromic,
}

impl ClassTag {
    /// `|λ| ≠ 1`: the hyperbolic and loxodromic trace classes.
    pub fn is_loxodromic_type(self) -> bool {
        matches!(self, ClassTag::Hyperbolic | ClassTag::Loxodromic)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MapClass {
    pub tag: ClassTag,
    pub trace: Complex64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPointData {
    pub points: Vec<SpherePoint>,
    /// `|f'(p)|` in the affine chart, or in the chart `1/z` near ∞.
    pub multipliers: Vec<f64>,
    /// Index into `points` of the attracting fixed point, if any.
    pub attracting: Option<usize>,
}

/// `h ∘ f ∘ h⁻¹ = (z ↦ λz)` with `|λ| < 1`, `h(attracting) = 0` and
/// `h(repelling) = ∞`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormalForm {
    pub conjugator: MoebiusMap,
    pub lambda: Complex64,
    pub attracting: SpherePoint,
    pub repelling: SpherePoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basin {
    Inside,
    /// Within [`BASIN_TOL`] of the repelling fixed point.
    BoundaryUndecided,
}

impl MoebiusMap {
    /// Builds the map, rescaling by `1/√det`. A zero determinant is rejected.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        Self::from_matrix([[a, b], [c, d]])
    }

    pub fn from_matrix(m: Mat2) -> Result<Self> {
        for (name, e) in ["a", "b", "c", "d"].iter().zip(m.iter().flatten()) {
            if !(e.re.is_finite() && e.im.is_finite()) {
                return Err(Error::malformed(*name, "matrix entries must be finite"));
            }
        }
        let scale = max_entry(&m);
        if scale == 0.0 {
            return Err(Error::Degenerate(0.0));
        }
        let m = mat_scale(&m, Complex64::new(1.0 / scale, 0.0));
        let det = mat_det(&m);
        if det.norm() <= 1e-14 {
            return Err(Error::Degenerate(det.norm() * scale * scale));
        }
        let m = mat_scale(&m, det.sqrt().inv());
        Ok(Self {
            a: m[0][0],
            b: m[0][1],
            c: m[1][0],
            d: m[1][1],
        })
    }

    /// Trusts that `m` already has unit determinant up to rounding.
    pub(crate) fn from_sl2(m: Mat2) -> Self {
        Self {
            a: m[0][0],
            b: m[0][1],
            c: m[1][0],
            d: m[1][1],
        }
    }

    pub fn identity() -> Self {
        Self {
            a: ONE,
            b: ZERO,
            c: ZERO,
            d: ONE,
        }
    }

    /// `z ↦ k z` as `diag(√k, 1/√k)`.
    pub fn scaling(k: Complex64) -> Result<Self> {
        Self::new(k, ZERO, ZERO, ONE)
    }

    /// `z ↦ z + s`.
    pub fn translation(s: Complex64) -> Self {
        Self {
            a: ONE,
            b: s,
            c: ZERO,
            d: ONE,
        }
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn matrix(&self) -> Mat2 {
        [[self.a, self.b], [self.c, self.d]]
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn det(&self) -> Complex64 {
        mat_det(&self.matrix())
    }

    pub fn homography(&self) -> Homography {
        Homography::from_matrix(self.matrix())
    }

    /// `self ∘ g`.
    ///
    /// The product is divided by `√det` to undo rounding drift. When the
    /// entries are so large that the computed determinant is itself mostly
    /// rounding error (`|det − 1| ≥ 1e-6`), the product is kept as is.
    pub fn compose(&self, g: &MoebiusMap) -> MoebiusMap {
        let m = mat_mul(&self.matrix(), &g.matrix());
        let det = mat_det(&m);
        if (det - ONE).norm() < 1e-6 {
            MoebiusMap::from_sl2(mat_scale(&m, det.sqrt().inv()))
        } else {
            MoebiusMap::from_sl2(m)
        }
    }

    pub fn inverse(&self) -> MoebiusMap {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// `g ∘ self ∘ g⁻¹`.
    pub fn conjugate_by(&self, g: &MoebiusMap) -> MoebiusMap {
        g.compose(self).compose(&g.inverse())
    }

    pub fn apply(&self, p: &SpherePoint) -> SpherePoint {
        apply_matrix(&self.matrix(), p)
    }

    /// `selfⁿ` with renormalization after each squaring. Entries grow like
    /// the dominant eigenvalue to the n-th power; use [`Homography::power`]
    /// when only the action is needed.
    pub fn power(&self, mut n: u64) -> MoebiusMap {
        let mut acc = MoebiusMap::identity();
        let mut base = *self;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.compose(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.compose(&base);
            }
        }
        acc
    }

    /// Largest entrywise distance to `I` or `−I`.
    fn distance_to_identity(&self) -> f64 {
        let dev = |s: f64| {
            [self.a - s, self.b, self.c, self.d - s]
                .iter()
                .map(|e| e.norm())
                .fold(0.0, f64::max)
        };
        dev(1.0).min(dev(-1.0))
    }

    pub fn classify(&self) -> MapClass {
        let tr = self.trace();
        let tag = if self.distance_to_identity() <= IDENTITY_TOL {
            ClassTag::Identity
        } else if tr.im.abs() <= PARABOLIC_TOL {
            let re = tr.re.abs();
            if (re - 2.0).abs() <= PARABOLIC_TOL {
                ClassTag::Parabolic
            } else if re < 2.0 {
                ClassTag::Elliptic
            } else {
                ClassTag::Hyperbolic
            }
        } else {
            ClassTag::Loxodromic
        };
        MapClass { tag, trace: tr }
    }

    /// Eigenvalues `(μ, 1/μ)` with `|μ| ≥ 1`, computed without cancellation.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let tr = self.trace();
        let disc = (tr * tr - 4.0).sqrt();
        let (p, m) = (tr + disc, tr - disc);
        let big = if p.norm() >= m.norm() { p } else { m } * 0.5;
        (big, big.inv())
    }

    /// Fixed point belonging to eigenvalue `mu`: the better conditioned of
    /// the two kernel vectors of `M − μI`.
    fn eigen_point(&self, mu: Complex64) -> SpherePoint {
        let v1 = (self.b, mu - self.a);
        let v2 = (mu - self.d, self.c);
        let n1 = v1.0.norm_sqr() + v1.1.norm_sqr();
        let n2 = v2.0.norm_sqr() + v2.1.norm_sqr();
        let (z, w) = if n1 >= n2 { v1 } else { v2 };
        SpherePoint::normalized(z, w)
    }

    /// `|f'(p)|` via `1/(cz + d)²` in the affine chart, or `1/(a + bu)²`
    /// with `u = 1/z` in the chart at ∞.
    pub fn multiplier_at(&self, p: &SpherePoint) -> f64 {
        let (z, w) = (p.z(), p.w());
        if w.norm() >= z.norm() {
            let x = z / w;
            1.0 / (self.c * x + self.d).norm_sqr()
        } else {
            let u = w / z;
            1.0 / (self.a + self.b * u).norm_sqr()
        }
    }

    /// Fixed points: homogeneous roots of `cz² + (d − a)zw − bw² = 0`,
    /// i.e. eigenvectors of the matrix. With `c = 0`, ∞ is always fixed and
    /// the other root is `b/(d − a)` (∞ again for translations).
    pub fn fixed_points(&self) -> Result<FixedPointData> {
        let class = self.classify();
        match class.tag {
            ClassTag::Identity => Err(Error::Precondition(
                "identity map: every point fixed".into(),
            )),
            ClassTag::Parabolic => {
                let p = self.eigen_point(class.trace * 0.5);
                Ok(FixedPointData {
                    multipliers: vec![self.multiplier_at(&p)],
                    points: vec![p],
                    attracting: None,
                })
            }
            tag => {
                let (big, small) = self.eigenvalues();
                let points = vec![self.eigen_point(big), self.eigen_point(small)];
                let multipliers: Vec<f64> = points.iter().map(|p| self.multiplier_at(p)).collect();
                let attracting = tag.is_loxodromic_type().then_some(0);
                Ok(FixedPointData {
                    points,
                    multipliers,
                    attracting,
                })
            }
        }
    }

    /// Conjugates a hyperbolic or loxodromic map to `z ↦ λz`, `0 < |λ| < 1`.
    ///
    /// The conjugator is `h = [[p₁, −p₀], [−q₁, q₀]]` for the unit
    /// representatives `p = [p₀ : p₁]` (attracting) and `q = [q₀ : q₁]`
    /// (repelling). Up to a constant factor this is `(z − p)/(z − q)`,
    /// becoming `1/(z − q)` when `p = ∞` and `z − p` when `q = ∞`.
    pub fn normal_form(&self) -> Result<NormalForm> {
        let class = self.classify();
        if !class.tag.is_loxodromic_type() {
            return Err(Error::Precondition(format!(
                "not loxodromic-type: map is {:?} with trace {}",
                class.tag, class.trace
            )));
        }
        let (big, small) = self.eigenvalues();
        let lambda = small / big;
        if lambda.norm() >= 1.0 {
            return Err(Error::Precondition(format!(
                "multiplier {} has modulus 1 to working precision",
                lambda
            )));
        }
        let p = self.eigen_point(big);
        let q = self.eigen_point(small);
        let h = MoebiusMap::from_matrix([[p.w(), -p.z()], [-q.w(), q.z()]])?;
        Ok(NormalForm {
            conjugator: h,
            lambda,
            attracting: p,
            repelling: q,
        })
    }

    /// Basin of the attracting fixed point: everything except the repelling one.
    pub fn in_attracting_basin(&self, x: &SpherePoint) -> Result<Basin> {
        let nf = self.normal_form()?;
        Ok(if x.chordal_distance(&nf.repelling) <= BASIN_TOL {
            Basin::BoundaryUndecided
        } else {
            Basin::Inside
        })
    }

    /// `[x, f(x), …, f^{n_max}(x)]`, each entry from the matrix power.
    pub fn iterate_orbit(&self, x: &SpherePoint, n_max: usize) -> Result<Vec<SpherePoint>> {
        if n_max == 0 {
            return Err(Error::parameter("n_max", "must be at least 1"));
        }
        let h = self.homography();
        Ok((0..=n_max as u64).map(|k| h.power(k).apply(x)).collect())
    }
}

impl PartialEq for MoebiusMap {
    /// Equal as elements of PSL(2,ℂ): entrywise up to a common sign.
    fn eq(&self, other: &Self) -> bool {
        let e = self.entries();
        let o = other.entries();
        let close = |s: f64| {
            e.iter()
                .zip(o.iter())
                .all(|(x, y)| (x - y * s).norm() <= IDENTITY_TOL)
        };
        close(1.0) || close(-1.0)
    }
}
