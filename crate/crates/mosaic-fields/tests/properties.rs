//! Property tests for the structural invariants: stream determinism,
//! generating-function shape, index-family algebra, hit-probability
//! bounds, and query-order independence.

use proptest::prelude::*;

use mosaic_fields::analytics::block_intersection;
use mosaic_fields::dist::{CountDistribution, RadiusLaw, ValueDistribution};
use mosaic_fields::field::{realize, FieldModel, IndexSet, Submodel};
use mosaic_fields::rng::{Generator, StreamKey};
use mosaic_fields::sets::SetFamily;
use mosaic_fields::space::Space;

fn count_strategy() -> impl Strategy<Value = CountDistribution> {
    prop_oneof![
        (0.1f64..20.0).prop_map(|l| CountDistribution::poisson(l).unwrap()),
        (0.05f64..1.0).prop_map(|p| CountDistribution::geometric(p).unwrap()),
        (1u64..12, 0.05f64..1.0).prop_map(|(n, p)| CountDistribution::binomial(n, p).unwrap()),
        (0.2f64..5.0, 0.1f64..0.9)
            .prop_map(|(r, p)| CountDistribution::negative_binomial(r, p).unwrap()),
        (0.05f64..=1.0).prop_map(|a| CountDistribution::power_alpha(a).unwrap()),
        (0.1f64..5.0, 0.1f64..=1.0).prop_map(|(l, a)| CountDistribution::compound(
            CountDistribution::poisson(l).unwrap(),
            CountDistribution::power_alpha(a).unwrap(),
        )),
        (0u64..6).prop_map(CountDistribution::deterministic),
        proptest::collection::vec(0.01f64..1.0, 1..8)
            .prop_map(|w| CountDistribution::table(&w).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pgf_is_normalized_nondecreasing_convex(count in count_strategy()) {
        prop_assert!((count.pgf(1.0).unwrap() - 1.0).abs() < 1e-9);
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| count.pgf(t).unwrap()).collect();
        for w in vals.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "pgf must not decrease on [0,1]");
        }
        for w in vals.windows(3) {
            prop_assert!(w[0] + w[2] >= 2.0 * w[1] - 1e-9, "pgf must be convex on [0,1]");
        }
        for &t in &[-1.0, -0.3, 0.0, 0.7, 1.0] {
            prop_assert!(count.pgf(t).unwrap().abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn pgf_derivative_matches_finite_differences(
        count in count_strategy(),
        t in -0.9f64..0.9,
    ) {
        let h = 1e-6;
        let fd = (count.pgf(t + h).unwrap() - count.pgf(t - h).unwrap()) / (2.0 * h);
        let an = count.pgf_derivative(t).unwrap();
        prop_assert!((fd - an).abs() <= 1e-5, "t = {t}: {fd} vs {an}");
    }

    #[test]
    fn index_family_identity_holds(
        n in 0u64..7,
        a in -3i64..4,
        b in 0u64..4,
        extra in 0u64..3,
        i_mask in 0u32..128,
        j_mask in 0u32..128,
    ) {
        prop_assume!(a >= -(b as i64));
        let c = n * b + extra + 1;
        let mask = (1u32 << n) - 1;
        let (i_mask, j_mask) = (i_mask & mask, j_mask & mask);
        let to_set = |m: u32| IndexSet::from_sorted(
            (1..=n).filter(|k| m >> (k - 1) & 1 == 1).collect()
        ).unwrap();
        let expect = a * (i_mask & j_mask).count_ones() as i64
            - b as i64 * (i_mask ^ j_mask).count_ones() as i64
            + c as i64;
        let got = block_intersection(n, a, b, c, &to_set(i_mask), &to_set(j_mask)).unwrap();
        prop_assert_eq!(got as i64, expect);
    }

    #[test]
    fn substreams_replay_and_separate(seed in any::<u64>(), key_a in 0u64..1000, key_b in 0u64..1000) {
        let root = Generator::from_seed(seed);
        let mut a1 = root.derive(&StreamKey::new(7).with_u64(key_a));
        let mut a2 = root.derive(&StreamKey::new(7).with_u64(key_a));
        let mut b = root.derive(&StreamKey::new(7).with_u64(key_b));
        let xs1: Vec<u64> = (0..32).map(|_| a1.next_u64()).collect();
        let xs2: Vec<u64> = (0..32).map(|_| a2.next_u64()).collect();
        prop_assert_eq!(&xs1, &xs2);
        if key_a != key_b {
            let ys: Vec<u64> = (0..32).map(|_| b.next_u64()).collect();
            prop_assert_ne!(&xs1, &ys);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hit_probability_bounds_hold(
        which in 0usize..5,
        scale in 0.3f64..1.5,
        frac in 0.0f64..1.0,
    ) {
        // The probe construction moves along one axis, so the reachable
        // distance is bounded per space (pi on the torus circles).
        let (fam, space, max_d) = match which {
            0 => (
                SetFamily::halfspace(2, 1.0).unwrap(),
                Space::euclid_ball(2, 1.0).unwrap(),
                1.8,
            ),
            1 => (
                SetFamily::euclid_ball(2, RadiusLaw::uniform_diameter(scale).unwrap(), 1.0)
                    .unwrap(),
                Space::euclid_ball(2, 1.0).unwrap(),
                1.8,
            ),
            2 => (
                SetFamily::euclid_ball(2, RadiusLaw::deterministic(scale).unwrap(), 1.0).unwrap(),
                Space::euclid_ball(2, 1.0).unwrap(),
                1.8,
            ),
            3 => (
                SetFamily::sphere_cap(2, RadiusLaw::cos_polynomial(vec![0.25, 0.25]).unwrap())
                    .unwrap(),
                Space::sphere(2).unwrap(),
                std::f64::consts::PI,
            ),
            _ => (
                SetFamily::torus_ball(RadiusLaw::uniform_diameter(scale.min(1.0)).unwrap())
                    .unwrap(),
                Space::torus2(),
                std::f64::consts::PI,
            ),
        };
        let anchor = space.default_anchor();
        let d = max_d * frac;
        let y = space.point_at_distance(&anchor, d).unwrap();
        let px = fam.hit_prob_single(&anchor).unwrap();
        let py = fam.hit_prob_single(&y).unwrap();
        let pxy = fam.hit_prob_pair(&anchor, &y).unwrap();
        prop_assert!(px > 0.0 && px < 1.0);
        prop_assert!(pxy <= px.min(py) + 1e-9);
        prop_assert!(pxy >= (px + py - 1.0).max(0.0) - 1e-9);
    }

    #[test]
    fn field_values_are_query_order_independent(
        seed in any::<u64>(),
        perm_seed in any::<u64>(),
        submodel_pick in 0usize..5,
    ) {
        let submodel = match submodel_pick {
            0 => Submodel::SimpleMosaic,
            1 => Submodel::RandomToken,
            2 => Submodel::Mixture,
            3 => Submodel::DeadLeaves,
            _ => Submodel::GeneralLinear {
                a: 2,
                b: 1,
                c_min: 1,
                g: mosaic_fields::field::GKind::Injective,
            },
        };
        let model = FieldModel::new(
            Space::euclid_ball(2, 1.0).unwrap(),
            SetFamily::halfspace(2, 1.0).unwrap(),
            CountDistribution::poisson(3.0).unwrap(),
            ValueDistribution::gaussian(0.0, 1.0).unwrap(),
            submodel,
        ).unwrap();
        let g = Generator::from_seed(seed);
        let mut pg = Generator::from_seed(perm_seed);
        let points: Vec<_> = (0..12).map(|_| model.space.sample_uniform_point(&mut pg)).collect();
        // A pseudo-random permutation of the evaluation order.
        let mut order: Vec<usize> = (0..points.len()).collect();
        for i in (1..order.len()).rev() {
            let j = (pg.next_u64() % (i as u64 + 1)) as usize;
            order.swap(i, j);
        }
        let straight: Vec<f64> = {
            let r = realize(&model, &g);
            points.iter().map(|p| r.evaluate(p).unwrap()).collect()
        };
        let permuted: Vec<f64> = {
            let r = realize(&model, &g);
            let mut out = vec![0.0; points.len()];
            for &i in &order {
                out[i] = r.evaluate(&points[i]).unwrap();
            }
            out
        };
        prop_assert_eq!(straight, permuted);
    }
}
