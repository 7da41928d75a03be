use metacloud_core::cloud::{onto_set_report, SampleCloud};
use metacloud_core::marginal::{HeavyMarginal, LightMarginal, SymmetricLaw};
use metacloud_core::meta::{Direction, MetaMap};
use metacloud_core::partition::{build_quantile_partition, Space};
use metacloud_core::star::{Shape, StarSet, Target};
use proptest::prelude::*;

fn shapes() -> impl Strategy<Value = StarSet> {
    prop_oneof![
        Just(StarSet::cube(2)),
        Just(StarSet::ball(2)),
        Just(StarSet::diamond(2)),
        (0.3f64..4.0).prop_map(|p| StarSet::new(2, Shape::Lp(p)).unwrap()),
        (0.2f64..3.0, 0.5f64..3.0).prop_map(|(l, t)| StarSet::limit_set(2, l, t).unwrap()),
    ]
}

fn maps() -> impl Strategy<Value = MetaMap> {
    (0.5f64..4.0, 0.5f64..3.0, any::<bool>()).prop_map(|(lambda, theta, student)| {
        let heavy = if student {
            HeavyMarginal::student_t(lambda).unwrap()
        } else {
            HeavyMarginal::pareto(lambda).unwrap()
        };
        MetaMap::new(heavy, LightMarginal::power(theta).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauge_is_homogeneous(s in shapes(), x in -5.0f64..5.0, y in -5.0f64..5.0, c in 0.1f64..10.0) {
        let g = s.gauge(&[x, y]);
        prop_assert!((s.gauge(&[c * x, c * y]) - c * g).abs() <= 1e-9 * (1.0 + c * g));
    }

    #[test]
    fn boundary_points_have_unit_gauge(s in shapes(), phi in 0.0f64..std::f64::consts::TAU) {
        let p = s.boundary_point(&[phi.cos(), phi.sin()]).unwrap();
        prop_assert!((s.gauge(&p) - 1.0).abs() < 1e-8);
        prop_assert!(s.contains(&[0.999 * p[0], 0.999 * p[1]]));
    }

    #[test]
    fn meta_map_is_odd_increasing_and_invertible(map in maps(), a in -30.0f64..30.0, b in -30.0f64..30.0) {
        prop_assert_eq!(map.forward(0.0).unwrap(), 0.0);
        let (ka, kb) = (map.forward(a).unwrap(), map.forward(b).unwrap());
        prop_assert_eq!(map.forward(-a).unwrap(), -ka);
        if a < b {
            prop_assert!(ka <= kb);
        }
        // K flattens like s^theta at 0 and overflows far out
        if a.abs() > 0.05 && ka.is_finite() {
            let back = map.inverse(ka).unwrap();
            prop_assert!((back - a).abs() <= 1e-7 * (1.0 + a.abs()), "{} -> {} -> {}", a, ka, back);
        }
    }

    #[test]
    fn pushing_a_cloud_keeps_coordinate_ranks(map in maps(), pts in prop::collection::vec(-20.0f64..20.0, 2..200)) {
        let pts = if pts.len() % 2 == 1 { &pts[1..] } else { &pts[..] };
        let z = map.push_cloud(pts, 2, Direction::Forward).unwrap();
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if i % 2 == j % 2 && pts[i] < pts[j] {
                    prop_assert!(z[i] <= z[j]);
                }
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf(lambda in 0.5f64..5.0, p in 0.001f64..0.999) {
        let f = HeavyMarginal::pareto(lambda).unwrap();
        let t = f.quantile(p).unwrap();
        prop_assert!((f.cdf(t).unwrap() - p).abs() < 1e-9);
        prop_assert!((f.cdf(-t).unwrap() - (1.0 - p)).abs() < 1e-9);
    }

    #[test]
    fn partition_radii_increase(theta in 0.5f64..3.0, n_max in 10u32..80) {
        let p = build_quantile_partition(&LightMarginal::power(theta).unwrap(), Space::X, 2, n_max).unwrap();
        let mut last = p.ln_central;
        for r in &p.rings {
            prop_assert!(r.ln_inner >= last - 1e-12 && r.ln_outer > r.ln_inner);
            prop_assert!(r.base.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(r.cuts.windows(2).all(|w| w[0] < w[1]));
            last = r.ln_outer;
        }
    }

    #[test]
    fn outside_fraction_falls_with_eps(pts in prop::collection::vec(-2.0f64..2.0, 2..400)) {
        let pts = pts[..pts.len() / 2 * 2].to_vec();
        let cloud = SampleCloud::from_raw(pts, 2, 1.0, "x".into(), 0, Space::X).unwrap();
        let r = onto_set_report(&cloud, &Target::Set(StarSet::ball(2)), &[0.05, 0.1, 0.2, 0.4], 16).unwrap();
        prop_assert!(r.is_monotone());
        prop_assert!(r.outside_frac.windows(2).all(|w| w[1] <= w[0]));
    }
}
