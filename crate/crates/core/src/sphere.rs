//! Geometry of the Riemann sphere.
//!
//! Points are stored as normalized homogeneous pairs `[z : w]` with
//! `|z|² + |w|² = 1`, so the point at infinity is `[1 : 0]` and needs no
//! special casing. With unit representatives the chordal metric
//!
//! ```text
//! d(z₁, z₂) = |z₁ − z₂| / √((1 + |z₁|²)(1 + |z₂|²)),   d(z, ∞) = (1 + |z|²)^(-1/2)
//! ```
//!
//! collapses to the single expression `|z₁w₂ − z₂w₁|`. This normalization has
//! diameter 1 (`d(0, ∞) = 1`); some references use twice this value.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Default tolerance for point equality.
pub const POINT_EQ_TOL: f64 = 1e-10;

/// Points whose chordal distance to ∞ is below this are reported as ∞.
pub const INFINITY_REPORT_TOL: f64 = 1e-15;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653_5;

/// A point of the extended complex plane in normalized homogeneous coordinates.
#[derive(Clone, Copy, Debug)]
pub struct SpherePoint {
    z: Complex64,
    w: Complex64,
}

/// An affine value or the point at infinity, as used for input and reporting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AffineValue {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    /// Builds `[z : w]`, rejecting non-finite input and the zero pair.
    pub fn new(z: Complex64, w: Complex64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite() && w.re.is_finite() && w.im.is_finite()) {
            return Err(Error::malformed(
                "point",
                "homogeneous coordinates must be finite",
            ));
        }
        if z.norm_sqr() == 0.0 && w.norm_sqr() == 0.0 {
            return Err(Error::malformed(
                "point",
                "(0, 0) is not a point of the sphere",
            ));
        }
        Ok(Self::normalized(z, w))
    }

    /// Normalizes a pair the caller knows is finite and nonzero.
    pub(crate) fn normalized(z: Complex64, w: Complex64) -> Self {
        let scale = z.norm().max(w.norm());
        debug_assert!(
            scale > 0.0 && scale.is_finite(),
            "degenerate homogeneous pair"
        );
        let (z, w) = (z / scale, w / scale);
        let n = (z.norm_sqr() + w.norm_sqr()).sqrt();
        let (z, w) = (z / n, w / n);
        // Canonical phase: the larger component is real and positive.
        let lead = if w.norm() >= z.norm() { w } else { z };
        let phase = lead.conj() / lead.norm();
        Self {
            z: z * phase,
            w: w * phase,
        }
    }

    /// `[c : 1]` for a finite complex number.
    pub fn from_affine(c: Complex64) -> Result<Self> {
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::malformed("affine", "affine value must be finite"));
        }
        Self::new(c, Complex64::new(1.0, 0.0))
    }

    pub fn from_value(v: AffineValue) -> Result<Self> {
        match v {
            AffineValue::Finite(c) => Self::from_affine(c),
            AffineValue::Infinity => Ok(Self::infinity()),
        }
    }

    pub fn infinity() -> Self {
        Self {
            z: Complex64::new(1.0, 0.0),
            w: Complex64::new(0.0, 0.0),
        }
    }

    pub fn zero() -> Self {
        Self {
            z: Complex64::new(0.0, 0.0),
            w: Complex64::new(1.0, 0.0),
        }
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    /// The affine value `z / w`, or `None` when the point is (numerically) ∞.
    pub fn affine(&self) -> Option<Complex64> {
        if self.w.norm() <= INFINITY_REPORT_TOL {
            None
        } else {
            Some(self.z / self.w)
        }
    }

    pub fn value(&self) -> AffineValue {
        match self.affine() {
            Some(c) => AffineValue::Finite(c),
            None => AffineValue::Infinity,
        }
    }

    /// Chordal distance `|z₁w₂ − z₂w₁|`, in `[0, 1]`.
    pub fn chordal_distance(&self, other: &SpherePoint) -> f64 {
        (self.z * other.w - other.z * self.w).norm().min(1.0)
    }

    pub fn approx_eq(&self, other: &SpherePoint, tol: f64) -> bool {
        self.chordal_distance(other) <= tol
    }

    /// Image on the sphere of diameter 1 centred at the origin; ∞ goes to
    /// the north pole `(0, 0, 1/2)` and 0 to the south pole.
    ///
    /// Euclidean distance between images equals the chordal distance.
    pub fn embed(&self) -> [f64; 3] {
        let zw = self.z * self.w.conj();
        [zw.re, zw.im, 0.5 * (self.z.norm_sqr() - self.w.norm_sqr())]
    }

    /// Inverse of [`SpherePoint::embed`]. The triple is first projected
    /// radially onto the diameter-1 sphere.
    pub fn from_embedded(p: [f64; 3]) -> Result<Self> {
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::malformed(
                "embedded",
                "cannot project the origin onto the sphere",
            ));
        }
        let s = 0.5 / n;
        let (x, y, h) = (p[0] * s, p[1] * s, p[2] * s);
        // Use whichever chart avoids cancellation near the poles.
        if h <= 0.0 {
            Self::new(Complex64::new(x, y), Complex64::new(0.5 - h, 0.0))
        } else {
            Self::new(Complex64::new(0.5 + h, 0.0), Complex64::new(x, -y))
        }
    }
}

/// Equality up to [`POINT_EQ_TOL`] in the chordal metric. Not transitive.
impl PartialEq for SpherePoint {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, POINT_EQ_TOL)
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.affine() {
            Some(c) => write!(f, "{}", c),
            None => write!(f, "inf"),
        }
    }
}

/// Chordal distance between two points.
pub fn chordal_distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    p.chordal_distance(q)
}

impl Serialize for AffineValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AffineValue::Finite(c) => [c.re, c.im].serialize(s),
            AffineValue::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for AffineValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Pair([f64; 2]),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Pair([re, im]) => Ok(AffineValue::Finite(Complex64::new(re, im))),
            Raw::Text(t) if t == "inf" => Ok(AffineValue::Infinity),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected [re, im] or \"inf\", found \"{t}\""
            ))),
        }
    }
}

impl Serialize for SpherePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Homogeneous {
            z: Complex64,
            w: Complex64,
        }
        Homogeneous {
            z: self.z,
            w: self.w,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpherePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Homogeneous {
            z: Complex64,
            w: Complex64,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Affine {
            affine: AffineValue,
        }
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Homogeneous(Homogeneous),
            Affine(Affine),
        }
        let raw = Raw::deserialize(d).map_err(|_| {
            serde::de::Error::custom(
                "sphere point must be {\"z\": [re, im], \"w\": [re, im]} or {\"affine\": [re, im] | \"inf\"}",
            )
        })?;
        let p = match raw {
            Raw::Homogeneous(h) => SpherePoint::new(h.z, h.w),
            Raw::Affine(a) => SpherePoint::from_value(a.affine),
        };
        p.map_err(serde::de::Error::custom)
    }
}

/// Open chordal ball `B_r(x)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChordalBall {
    center: SpherePoint,
    radius: f64,
}

impl ChordalBall {
    pub fn new(center: SpherePoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(Error::parameter(
                "radius",
                format!("{radius} is outside (0, 1]"),
            ));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> SpherePoint {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, p: &SpherePoint) -> bool {
        self.center.chordal_distance(p) < self.radius
    }
}

/// How a [`SphereGrid`] was generated.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum GridDescriptor {
    Fibonacci {
        count: usize,
    },
    ChordalCap {
        center: SpherePoint,
        radius: f64,
        count: usize,
    },
    Affine {
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
        step: f64,
    },
    Explicit {
        count: usize,
    },
}

/// A finite sample of the sphere standing in for a compact set.
#[derive(Clone, Debug, Serialize)]
pub struct SphereGrid {
    points: Vec<SpherePoint>,
    descriptor: GridDescriptor,
    seed: u64,
}

impl SphereGrid {
    /// Wraps an explicit nonempty list of points.
    pub fn from_points(points: Vec<SpherePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::parameter("grid", "a grid needs at least one point"));
        }
        let count = points.len();
        Ok(Self {
            points,
            descriptor: GridDescriptor::Explicit { count },
            seed: 0,
        })
    }

    /// Fibonacci lattice of `n` nearly equal-area points over the whole sphere.
    /// The seed rotates the lattice about the polar axis.
    pub fn fibonacci(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::parameter("n", "grid size must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offset = rng.gen::<f64>() * 2.0 * PI;
        let points = (0..n)
            .map(|i| {
                let h = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let rho = (1.0 - h * h).max(0.0).sqrt();
                let phi = i as f64 * GOLDEN_ANGLE + offset;
                SpherePoint::from_embedded([rho * phi.cos(), rho * phi.sin(), h])
                    .expect("lattice point lies on the sphere")
            })
            .collect();
        Ok(Self {
            points,
            descriptor: GridDescriptor::Fibonacci { count: n },
            seed,
        })
    }

    /// Rectangular grid of affine points `re + i·im` with the given spacing.
    pub fn affine(re: (f64, f64), im: (f64, f64), step: f64) -> Result<Self> {
        let ordered = |a: f64, b: f64| a.partial_cmp(&b).is_some_and(|o| o.is_le());
        if !ordered(f64::MIN_POSITIVE, step) || !ordered(re.0, re.1) || !ordered(im.0, im.1) {
            return Err(Error::parameter(
                "affine grid",
                "need step > 0 and ordered bounds",
            ));
        }
        let nx = ((re.1 - re.0) / step).floor() as usize + 1;
        let ny = ((im.1 - im.0) / step).floor() as usize + 1;
        let mut points = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let c = Complex64::new(re.0 + i as f64 * step, im.0 + j as f64 * step);
                points.push(SpherePoint::from_affine(c)?);
            }
        }
        Ok(Self {
            points,
            descriptor: GridDescriptor::Affine {
                re_min: re.0,
                re_max: re.1,
                im_min: im.0,
                im_max: im.1,
                step,
            },
            seed: 0,
        })
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn descriptor(&self) -> &GridDescriptor {
        &self.descriptor
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keeps only the points farther than `radius` from `center`.
    pub fn excluding(&self, center: &SpherePoint, radius: f64) -> Result<Self> {
        let points: Vec<_> = self
            .points
            .iter()
            .copied()
            .filter(|p| p.chordal_distance(center) >= radius)
            .collect();
        if points.is_empty() {
            return Err(Error::parameter(
                "radius",
                "exclusion removed every grid point",
            ));
        }
        Ok(Self {
            points,
            descriptor: self.descriptor.clone(),
            seed: self.seed,
        })
    }
}

/// Unitary matrix columns `(u, v)` sending ∞ to `center`; unitary maps are
/// chordal isometries.
fn rotation_to(center: &SpherePoint) -> [[Complex64; 2]; 2] {
    let (c0, c1) = (center.z(), center.w());
    [[c0, -c1.conj()], [c1, c0.conj()]]
}

/// Deterministic sample of `n` points inside `ball`.
///
/// A Fibonacci cap around ∞ (uniform in area, farthest point at
/// `radius·(1 − 5e-10)`) is rotated onto the ball's center by a unitary
/// map. Candidates failing the containment check are rejected and redrawn
/// from the seeded generator.
pub fn chordal_ball_grid(ball: &ChordalBall, n: usize, seed: u64) -> Result<SphereGrid> {
    if n == 0 {
        return Err(Error::parameter("n", "sample count must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = rng.gen::<f64>() * 2.0 * PI;
    let rot = rotation_to(&ball.center);
    let r = ball.radius;
    let place = |s: f64, phi: f64| {
        let z = Complex64::new((1.0 - s * s).max(0.0).sqrt(), 0.0);
        let w = Complex64::from_polar(s, phi);
        SpherePoint::normalized(rot[0][0] * z + rot[0][1] * w, rot[1][0] * z + rot[1][1] * w)
    };
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let u = (i as f64 + 1.0) / n as f64 * (1.0 - 1e-9);
        let mut p = place(r * u.sqrt(), i as f64 * GOLDEN_ANGLE + offset);
        while !ball.contains(&p) {
            p = place(r * rng.gen::<f64>().sqrt(), rng.gen::<f64>() * 2.0 * PI);
        }
        points.push(p);
    }
    Ok(SphereGrid {
        points,
        descriptor: GridDescriptor::ChordalCap {
            center: ball.center,
            radius: r,
            count: n,
        },
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn affine_formula(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
    }

    #[test]
    fn affine_charts() {
        let zero = SpherePoint::from_affine(c(0.0, 0.0)).unwrap();
        assert_eq!(zero.z(), c(0.0, 0.0));
        assert_eq!(zero.w(), c(1.0, 0.0));
        let inf = SpherePoint::from_value(AffineValue::Infinity).unwrap();
        assert_eq!((inf.z(), inf.w()), (c(1.0, 0.0), c(0.0, 0.0)));
        let p = SpherePoint::from_affine(c(3.0, 4.0)).unwrap();
        assert!((p.affine().unwrap() - c(3.0, 4.0)).norm() < 1e-12);
        assert!((p.z().norm_sqr() + p.w().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nan_and_zero_pair() {
        assert!(SpherePoint::from_affine(c(f64::NAN, 0.0)).is_err());
        assert!(SpherePoint::new(c(0.0, 0.0), c(0.0, 0.0)).is_err());
        assert!(SpherePoint::new(c(f64::INFINITY, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn distance_examples() {
        let p = |x: f64| SpherePoint::from_affine(c(x, 0.0)).unwrap();
        let inf = SpherePoint::infinity();
        assert!((p(0.0).chordal_distance(&inf) - 1.0).abs() < 1e-15);
        assert_eq!(p(2.5).chordal_distance(&p(2.5)), 0.0);
        assert!((p(1.0).chordal_distance(&p(-1.0)) - 1.0).abs() < 1e-12);
        assert!((p(1.0).chordal_distance(&p(0.0)) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn matches_affine_formula_and_infinity_extension() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a = c(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let b = c(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let (pa, pb) = (
                SpherePoint::from_affine(a).unwrap(),
                SpherePoint::from_affine(b).unwrap(),
            );
            assert!((pa.chordal_distance(&pb) - affine_formula(a, b)).abs() < 1e-12);
            let to_inf = (1.0 + a.norm_sqr()).powf(-0.5);
            assert!((pa.chordal_distance(&SpherePoint::infinity()) - to_inf).abs() < 1e-12);
        }
    }

    #[test]
    fn embedding_poles_and_inverse() {
        let n = SpherePoint::infinity().embed();
        let s = SpherePoint::zero().embed();
        assert_eq!(n, [0.0, 0.0, 0.5]);
        assert_eq!(s, [0.0, 0.0, -0.5]);
        let p = SpherePoint::from_affine(c(0.3, -2.0)).unwrap();
        assert_eq!(p.embed(), p.embed());
        let back = SpherePoint::from_embedded(p.embed()).unwrap();
        assert!(back.chordal_distance(&p) < 1e-10);
        assert!(SpherePoint::from_embedded([0.0; 3]).is_err());
    }

    #[test]
    fn ball_validation() {
        let o = SpherePoint::zero();
        assert!(ChordalBall::new(o, 0.0).is_err());
        assert!(ChordalBall::new(o, 1.01).is_err());
        assert!(ChordalBall::new(o, 1.0).is_ok());
    }

    #[test]
    fn ball_grid_examples() {
        let ball = ChordalBall::new(SpherePoint::zero(), 0.5).unwrap();
        let g = chordal_ball_grid(&ball, 1, 7).unwrap();
        assert_eq!(g.len(), 1);
        assert!(g.points()[0].chordal_distance(&SpherePoint::zero()) < 0.5);

        let a = chordal_ball_grid(&ball, 64, 7).unwrap();
        let b = chordal_ball_grid(&ball, 64, 7).unwrap();
        for (p, q) in a.points().iter().zip(b.points()) {
            assert_eq!((p.z(), p.w()), (q.z(), q.w()));
        }

        let ball = ChordalBall::new(SpherePoint::infinity(), 0.3).unwrap();
        let g = chordal_ball_grid(&ball, 500, 1).unwrap();
        assert_eq!(g.len(), 500);
        let dists: Vec<f64> = g
            .points()
            .iter()
            .map(|p| p.chordal_distance(&SpherePoint::infinity()))
            .collect();
        assert!(dists.iter().all(|&d| d < 0.3));
        assert!(dists.iter().any(|&d| d > 0.95 * 0.3));
    }

    #[test]
    fn fibonacci_spacing() {
        for &n in &[100usize, 500, 2000] {
            let g = SphereGrid::fibonacci(n, 0).unwrap();
            let bound = 4.0 / (n as f64).sqrt();
            for (i, p) in g.points().iter().enumerate() {
                let nn = g
                    .points()
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, q)| p.chordal_distance(q))
                    .fold(f64::INFINITY, f64::min);
                assert!(nn < bound, "n={n} point {i}: nearest {nn} >= {bound}");
            }
        }
    }

    #[test]
    fn json_forms() {
        let p: SpherePoint = serde_json::from_str(r#"{"affine": [3, 4]}"#).unwrap();
        assert!((p.affine().unwrap() - c(3.0, 4.0)).norm() < 1e-12);
        let q: SpherePoint = serde_json::from_str(r#"{"affine": "inf"}"#).unwrap();
        assert!(q.affine().is_none());
        let r: SpherePoint = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert!(r.chordal_distance(&p) < 1e-15);
        assert!(serde_json::from_str::<SpherePoint>(r#"{"affine": "nan"}"#).is_err());
        assert!(serde_json::from_str::<SpherePoint>(r#"{"z": [0, 0], "w": [0, 0]}"#).is_err());
        assert!(serde_json::from_str::<SpherePoint>(r#"{"affine": [1, 0], "extra": 1}"#).is_err());
    }
}
