use num_complex::Complex64;
use proptest::prelude::*;

use equibaire::flow::FlowGenerator;
use equibaire::moebius::MoebiusMap;
use equibaire::sphere::SpherePoint;

fn complex(range: f64) -> impl Strategy<Value = Complex64> {
    (-range..range, -range..range).prop_map(|(re, im)| Complex64::new(re, im))
}

fn point() -> impl Strategy<Value = SpherePoint> {
    (complex(10.0), complex(10.0))
        .prop_filter("nonzero pair", |(z, w)| z.norm() + w.norm() > 1e-3)
        .prop_map(|(z, w)| SpherePoint::new(z, w).unwrap())
}

/// Maps with moderately sized entries, so apply/compose stay well conditioned.
fn map() -> impl Strategy<Value = MoebiusMap> {
    (complex(2.0), complex(2.0), complex(2.0), complex(2.0))
        .prop_filter("det away from zero", |(a, b, c, d)| {
            (a * d - b * c).norm() > 0.1
        })
        .prop_map(|(a, b, c, d)| MoebiusMap::new(a, b, c, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn chordal_metric_axioms(x in point(), y in point(), z in point()) {
        let (xy, yz, xz) = (x.chordal_distance(&y), y.chordal_distance(&z), x.chordal_distance(&z));
        prop_assert!(xz <= xy + yz + 1e-12);
        prop_assert!((xy - y.chordal_distance(&x)).abs() <= 1e-12);
        prop_assert!(x.chordal_distance(&x) <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&xy));
    }

    #[test]
    fn homogeneous_rescaling_is_the_same_point(z in complex(10.0), w in complex(10.0), k in complex(5.0)) {
        prop_assume!(z.norm() + w.norm() > 1e-3 && k.norm() > 1e-3);
        let p = SpherePoint::new(z, w).unwrap();
        let q = SpherePoint::new(z * k, w * k).unwrap();
        prop_assert!(p.chordal_distance(&q) < 1e-12);
        prop_assert_eq!(p, q);
    }

    #[test]
    fn embedding_round_trip(p in point()) {
        let e = p.embed();
        let r2: f64 = e[0] * e[0] + e[1] * e[1] + e[2] * e[2];
        prop_assert!((r2 - 0.25).abs() < 1e-12);
        let back = SpherePoint::from_embedded(e).unwrap();
        prop_assert!(back.chordal_distance(&p) < 1e-10);
    }

    #[test]
    fn unitary_maps_are_isometries(x in point(), y in point(), u in complex(1.0), v in complex(1.0)) {
        prop_assume!(u.norm() + v.norm() > 1e-3);
        let n = (u.norm_sqr() + v.norm_sqr()).sqrt();
        let (u, v) = (u / n, v / n);
        let g = MoebiusMap::new(u, -v.conj(), v, u.conj()).unwrap();
        let d = (g.apply(&x).chordal_distance(&g.apply(&y)) - x.chordal_distance(&y)).abs();
        prop_assert!(d < 1e-12);
    }

    #[test]
    fn composition_and_inverse(f in map(), g in map(), x in point()) {
        let fg = f.compose(&g);
        prop_assert!(fg.apply(&x).chordal_distance(&f.apply(&g.apply(&x))) < 1e-9);
        prop_assert!(f.inverse().apply(&f.apply(&x)).chordal_distance(&x) < 1e-9);
        prop_assert!((fg.det() - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn class_is_a_conjugacy_invariant(f in map(), g in map()) {
        let h = f.conjugate_by(&g);
        let (t1, t2) = (f.trace(), h.trace());
        prop_assert!((t1 - t2).norm() < 1e-8 || (t1 + t2).norm() < 1e-8);
    }

    #[test]
    fn flow_is_a_one_parameter_group(
        a in complex(1.0), b in complex(1.0), c in complex(1.0),
        s in -2.0f64..2.0, t in -2.0f64..2.0,
    ) {
        let gen = FlowGenerator::new([[a, b], [c, -a]]).unwrap();
        let lhs = gen.exp(s).compose(&gen.exp(t));
        let rhs = gen.exp(s + t);
        let (l, r) = (lhs.entries(), rhs.entries());
        let err = l.iter().zip(r.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9, "group law defect {}", err);
        prop_assert!((gen.exp(t).det() - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }
}
