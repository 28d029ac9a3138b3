//! Canonical maps and generators, and seeded random families built by
//! conjugating them. Used by the battery runner and the test suites.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

use crate::flow::{FlowGenerator, SubgroupTag};
use crate::moebius::{mat_mul, ClassTag, Mat2, MoebiusMap};
use crate::sphere::SpherePoint;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn diag_map(x: Complex64, y: Complex64) -> MoebiusMap {
    MoebiusMap::new(x, ZERO, ZERO, y).expect("nonsingular diagonal")
}

/// One representative per trace class:
/// `[[1,1],[0,1]]`, `diag(2, 1/2)`, `[[0,−1],[1,0]]`, `diag(1+i, (1−i)/2)`.
pub fn canonical_maps() -> Vec<(ClassTag, MoebiusMap)> {
    vec![
        (ClassTag::Parabolic, MoebiusMap::translation(ONE)),
        (ClassTag::Hyperbolic, diag_map(c(2.0, 0.0), c(0.5, 0.0))),
        (
            ClassTag::Elliptic,
            MoebiusMap::new(ZERO, -ONE, ONE, ZERO).expect("rotation"),
        ),
        (ClassTag::Loxodromic, diag_map(c(1.0, 1.0), c(0.5, -0.5))),
    ]
}

/// The subgroup normal forms: `diag(i, −i)`, `diag(1, −1)`, `[[0,1],[0,0]]`,
/// `diag(1+i, −1−i)`, plus the zero generator.
pub fn canonical_generators() -> Vec<(SubgroupTag, FlowGenerator)> {
    let g = |m: Mat2| FlowGenerator::new(m).expect("trace-zero canonical form");
    vec![
        (
            SubgroupTag::Elliptic,
            g([[c(0.0, 1.0), ZERO], [ZERO, c(0.0, -1.0)]]),
        ),
        (SubgroupTag::Hyperbolic, g([[ONE, ZERO], [ZERO, -ONE]])),
        (SubgroupTag::Parabolic, g([[ZERO, ONE], [ZERO, ZERO]])),
        (
            SubgroupTag::Loxodromic,
            g([[c(1.0, 1.0), ZERO], [ZERO, c(-1.0, -1.0)]]),
        ),
        (SubgroupTag::Trivial, g([[ZERO, ZERO], [ZERO, ZERO]])),
    ]
}

fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random point from a uniformly drawn homogeneous pair in the unit polydisc box.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R) -> SpherePoint {
    loop {
        if let Ok(p) = SpherePoint::new(random_complex(rng), random_complex(rng)) {
            return p;
        }
    }
}

/// Random SL(2,ℂ) matrix with Frobenius norm at most `max_norm`.
pub fn random_sl2<R: Rng + ?Sized>(rng: &mut R, max_norm: f64) -> MoebiusMap {
    loop {
        let m = [
            [random_complex(rng), random_complex(rng)],
            [random_complex(rng), random_complex(rng)],
        ];
        if let Ok(f) = MoebiusMap::from_matrix(m) {
            if crate::moebius::frobenius(&f.matrix()) <= max_norm {
                return f;
            }
        }
    }
}

fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))
}

/// A random conjugate of a random normal form of the requested class.
pub fn random_map_of_class<R: Rng + ?Sized>(rng: &mut R, tag: ClassTag) -> MoebiusMap {
    let base = match tag {
        ClassTag::Identity => MoebiusMap::identity(),
        ClassTag::Elliptic => {
            let u = Complex64::from_polar(1.0, rng.gen_range(0.2..PI - 0.2));
            diag_map(u, u.inv())
        }
        ClassTag::Parabolic => MoebiusMap::translation(random_phase(rng) * rng.gen_range(0.5..2.0)),
        ClassTag::Hyperbolic => {
            let k = rng.gen_range(1.2..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            diag_map(c(k, 0.0), c(1.0 / k, 0.0))
        }
        ClassTag::Loxodromic => {
            let mu = Complex64::from_polar(rng.gen_range(1.1..2.0), rng.gen_range(0.2..PI - 0.2));
            diag_map(mu, mu.inv())
        }
    };
    base.conjugate_by(&random_sl2(rng, 6.0))
}

/// Random loxodromic-type map (hyperbolic or loxodromic trace class).
pub fn random_loxodromic<R: Rng + ?Sized>(rng: &mut R) -> MoebiusMap {
    let tag = if rng.gen_bool(0.25) {
        ClassTag::Hyperbolic
    } else {
        ClassTag::Loxodromic
    };
    random_map_of_class(rng, tag)
}

/// A random conjugate `P A P⁻¹` of a random normal-form generator.
pub fn random_generator_of_type<R: Rng + ?Sized>(rng: &mut R, tag: SubgroupTag) -> FlowGenerator {
    let base: Mat2 = match tag {
        SubgroupTag::Trivial => [[ZERO, ZERO], [ZERO, ZERO]],
        SubgroupTag::Elliptic => {
            let th = rng.gen_range(0.3..2.0);
            [[c(0.0, th), ZERO], [ZERO, c(0.0, -th)]]
        }
        SubgroupTag::Hyperbolic => {
            let l = rng.gen_range(0.3..2.0);
            [[c(l, 0.0), ZERO], [ZERO, c(-l, 0.0)]]
        }
        SubgroupTag::Parabolic => [
            [ZERO, random_phase(rng) * rng.gen_range(0.5..2.0)],
            [ZERO, ZERO],
        ],
        SubgroupTag::Loxodromic => {
            let mu = c(rng.gen_range(0.3..1.5), rng.gen_range(0.3..1.5))
                * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            [[mu, ZERO], [ZERO, -mu]]
        }
    };
    let p = random_sl2(rng, 4.0);
    let m = mat_mul(&mat_mul(&p.matrix(), &base), &p.inverse().matrix());
    FlowGenerator::new(m).expect("conjugation preserves the trace")
}
