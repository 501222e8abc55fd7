use std::sync::Arc;

use proptest::prelude::*;
use rnd_core::bayes::check_inverse_bayes;
use rnd_core::density::{check_chain_rule_density, rnd_density};
use rnd_core::generate;
use rnd_core::info::identity_rhs;
use rnd_core::kernel::Axis;
use rnd_core::rnd::verify_rn_identity;
use rnd_core::subsets::SubsetFamily;
use rnd_core::theorems::check_chain_rule;
use rnd_core::tolerance::DISCRETE;
use rnd_core::*;

fn space(n: usize) -> Arc<SampleSpace> {
    Arc::new(SampleSpace::indexed(n).unwrap())
}

/// Nonnegative weight that is zero about a quarter of the time.
fn sparse_weight() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(0.0), 3 => 0.01f64..10.0]
}

fn signed_weight() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(0.0), 3 => -5.0f64..5.0]
}

fn strict_row(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|w| {
        let total: f64 = w.iter().sum();
        w.iter().map(|v| v / total).collect()
    })
}

fn strict_probability(n: usize) -> impl Strategy<Value = ProbabilityMeasure> {
    strict_row(n).prop_map(move |w| ProbabilityMeasure::normalized(space(n), w).unwrap())
}

/// Nonnegative `Q` and signed `P` charging only `Q`-charged points.
fn ac_pair() -> impl Strategy<Value = (SignedMeasure, SignedMeasure)> {
    (1usize..=8).prop_flat_map(|n| {
        (
            prop::collection::vec(sparse_weight(), n),
            prop::collection::vec(signed_weight(), n),
        )
            .prop_map(move |(q, p)| {
                let p = p
                    .iter()
                    .zip(&q)
                    .map(|(&pv, &qv)| if qv == 0.0 { 0.0 } else { pv })
                    .collect();
                (
                    SignedMeasure::new(space(n), p).unwrap(),
                    SignedMeasure::new(space(n), q).unwrap(),
                )
            })
    })
}

/// Strict kernel with its input law.
fn strict_setting() -> impl Strategy<Value = (ConditionalKernel, ProbabilityMeasure)> {
    (2usize..=5, 2usize..=5).prop_flat_map(|(nx, ny)| {
        (
            prop::collection::vec(strict_row(ny), nx),
            strict_probability(nx),
        )
            .prop_map(move |(rows, px)| {
                (
                    ConditionalKernel::new(space(nx), space(ny), rows).unwrap(),
                    px,
                )
            })
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn dyadic_density() -> impl Strategy<Value = DensityMeasure> {
    prop::collection::vec(1u32..=256, 21).prop_map(|k| {
        let samples = k.iter().map(|&v| v as f64 / 64.0).collect();
        DensityMeasure::new(0.0, 1.0, samples, DensityKind::Finite).unwrap()
    })
}

fn positive_density() -> impl Strategy<Value = DensityMeasure> {
    prop::collection::vec(0.05f64..5.0, 4).prop_map(|c| {
        DensityMeasure::from_fn(0.0, 1.0, 101, |x| {
            c[0] + c[1] * x + c[2] * x * x + c[3] * (7.0 * x).sin().abs()
        })
        .unwrap()
    })
}

proptest! {
    #[test]
    fn finite_additivity(
        (m, labels) in (1usize..=8).prop_flat_map(|n| (
            prop::collection::vec(signed_weight(), n),
            prop::collection::vec(0u8..3, n),
        ))
    ) {
        let n = m.len();
        let m = SignedMeasure::new(space(n), m).unwrap();
        let set = |tag: u8| SubsetMask::new(space(n), labels.iter().map(|&l| l == tag).collect()).unwrap();
        let union = SubsetMask::new(space(n), labels.iter().map(|&l| l != 2).collect()).unwrap();
        let a = m.measure_of(&set(0)).unwrap();
        let b = m.measure_of(&set(1)).unwrap();
        let ab = m.measure_of(&union).unwrap();
        let magnitude: f64 = m.weights().iter().map(|w| w.abs()).sum();
        prop_assert!((ab - (a + b)).abs() <= DISCRETE * magnitude.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn product_marginalizes(
        w1 in prop::collection::vec(sparse_weight(), 1..=5),
        w2 in prop::collection::vec(sparse_weight(), 1..=5),
    ) {
        let (m1, m2) = (SignedMeasure::from_weights(w1.clone()).unwrap(), SignedMeasure::from_weights(w2.clone()).unwrap());
        let prod = m1.product(&m2).unwrap();
        let t2 = m2.total_mass();
        for (i, &a) in w1.iter().enumerate() {
            let row: f64 = (0..w2.len()).map(|j| prod.weight(i * w2.len() + j)).sum();
            prop_assert!(rel_close(row, a * t2, DISCRETE));
        }
    }

    #[test]
    fn absolute_continuity_reflexive_and_transitive(
        (r, keep_q, keep_p) in (1usize..=8).prop_flat_map(|n| (
            prop::collection::vec(sparse_weight(), n),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(any::<bool>(), n),
        ))
    ) {
        let n = r.len();
        let q: Vec<f64> = r.iter().zip(&keep_q).map(|(&v, &k)| if k { v * 0.5 } else { 0.0 }).collect();
        let p: Vec<f64> = q.iter().zip(&keep_p).map(|(&v, &k)| if k { -v } else { 0.0 }).collect();
        let (p, q, r) = (
            SignedMeasure::new(space(n), p).unwrap(),
            SignedMeasure::new(space(n), q).unwrap(),
            SignedMeasure::new(space(n), r).unwrap(),
        );
        prop_assert!(r.is_absolutely_continuous(&r));
        prop_assert!(p.is_absolutely_continuous(&q) && q.is_absolutely_continuous(&r));
        prop_assert!(p.is_absolutely_continuous(&r));
    }

    #[test]
    fn dyadic_scales_compose_exactly(
        w in prop::collection::vec(signed_weight(), 1..=8),
        a in -8i32..8,
        b in -8i32..8,
    ) {
        let m = SignedMeasure::from_weights(w).unwrap();
        let (ca, cb) = (2f64.powi(a), 2f64.powi(b));
        prop_assert_eq!(m.scale(ca).unwrap().scale(cb).unwrap(), m.scale(ca * cb).unwrap());
    }

    #[test]
    fn rnd_satisfies_identity((p, q) in ac_pair()) {
        let g = rnd(&p, &q).unwrap();
        let check = verify_rn_identity(&p, &q, g.values(), SubsetFamily::for_points(p.len()), DISCRETE).unwrap();
        prop_assert!(check.pass, "{check:?}");
    }

    #[test]
    fn rnd_is_zero_off_the_support((p, q) in ac_pair()) {
        let g = rnd(&p, &q).unwrap();
        for i in 0..q.len() {
            if q.weight(i) == 0.0 {
                prop_assert_eq!(g.value(i), 0.0);
            }
        }
    }

    #[test]
    fn rnd_unique_up_to_null_sets(
        (p, q) in ac_pair(),
        shift in prop_oneof![1e-6f64..1.0, -1.0f64..-1e-6],
        pick in any::<prop::sample::Index>(),
    ) {
        let g = rnd(&p, &q).unwrap();
        let family = || SubsetFamily::for_points(p.len());
        let nulls: Vec<usize> = (0..q.len()).filter(|&i| q.weight(i) == 0.0).collect();
        let mut on_nulls = g.values().to_vec();
        for &i in &nulls {
            on_nulls[i] += 1.0;
        }
        prop_assert!(verify_rn_identity(&p, &q, &on_nulls, family(), DISCRETE).unwrap().pass);

        let charged: Vec<usize> = q.support().collect();
        prop_assume!(!charged.is_empty());
        let i = charged[pick.index(charged.len())];
        let mut perturbed = g.values().to_vec();
        perturbed[i] += shift * g.value(i).abs().max(1.0);
        prop_assert!(!verify_rn_identity(&p, &q, &perturbed, family(), DISCRETE).unwrap().pass);
        let verdict = as_equal(&perturbed, g.values(), &q, DISCRETE).unwrap();
        prop_assert!(!verdict.equal);
    }

    #[test]
    fn rnd_homogeneous((p, q) in ac_pair(), a in 0.1f64..10.0) {
        let scaled = rnd(&p.scale(a).unwrap(), &q).unwrap();
        let g = rnd(&p, &q).unwrap();
        let expect: Vec<f64> = g.values().iter().map(|v| a * v).collect();
        prop_assert!(as_equal_scaled(scaled.values(), &expect, &q, DISCRETE).unwrap().equal);
    }

    #[test]
    fn chain_rule_holds_along_generated_chains(seed in any::<u64>(), n in 1usize..=10) {
        let chain = generate::probability_chain(&mut generate::rng_for(seed, 0), n, 3).unwrap();
        let [p, q, r] = [&chain[0], &chain[1], &chain[2]].map(|m| m.as_signed());
        prop_assert!(check_chain_rule(p, q, r).unwrap().pass);
    }

    #[test]
    fn kernel_marginal_and_joint_are_probabilities((k, px) in strict_setting()) {
        let py = k.output_marginal(&px).unwrap();
        prop_assert!((py.total_mass() - 1.0).abs() <= DISCRETE);
        let joint = joint_from(&k, &px).unwrap();
        let mass: f64 = joint.weights().iter().sum();
        prop_assert!((mass - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn kernel_reciprocity((k, px) in strict_setting()) {
        let joint = joint_from(&k, &px).unwrap();
        let back = joint.conditional(Axis::Y).unwrap();
        let py = k.output_marginal(&px).unwrap();
        for x in 0..px.len() {
            for y in 0..py.len() {
                let lhs = back.entry(y, x) * py.weight(y);
                let rhs = k.entry(x, y) * px.weight(x);
                prop_assert!(rel_close(lhs, rhs, 1e-12));
            }
        }
        prop_assert!(check_inverse_bayes(&k, &px).unwrap().pass);
    }

    #[test]
    fn swap_is_an_involution((k, px) in strict_setting()) {
        let joint = joint_from(&k, &px).unwrap();
        prop_assert_eq!(joint.swap().swap(), joint.clone());
        let nx = px.len();
        let ny = k.output_space().len();
        let swapped = joint.swap();
        for x in 0..nx {
            for y in 0..ny {
                prop_assert_eq!(swapped.weights()[y * nx + x], joint.weights()[x * ny + y]);
            }
        }
    }

    #[test]
    fn information_measures_nonnegative((k, px) in strict_setting()) {
        prop_assert!(mutual_information(&k, &px).unwrap().value >= -1e-12);
        prop_assert!(lautum_information(&k, &px).unwrap().value >= -1e-12);
    }

    #[test]
    fn identity_invariant_under_reference(
        ((k, px), q1, q2) in strict_setting().prop_flat_map(|(k, px)| {
            let ny = k.output_space().len();
            (
                Just((k, px)),
                prop::collection::vec(0.01f64..5.0, ny),
                prop::collection::vec(0.01f64..5.0, ny),
            )
        })
    ) {
        let out = Arc::clone(k.output_space());
        let r1 = identity_rhs(&k, &px, &SignedMeasure::new(Arc::clone(&out), q1).unwrap()).unwrap();
        let r2 = identity_rhs(&k, &px, &SignedMeasure::new(out, q2).unwrap()).unwrap();
        let sum = mutual_information(&k, &px).unwrap().value + lautum_information(&k, &px).unwrap().value;
        prop_assert!((r1 - sum).abs() <= 1e-9);
        prop_assert!((r2 - sum).abs() <= 1e-9);
    }

    #[test]
    fn reference_collapse_to_output_marginal((k, px) in strict_setting()) {
        let py = k.output_marginal(&px).unwrap().into_signed();
        let rhs = identity_rhs(&k, &px, &py).unwrap();
        let sum = mutual_information(&k, &px).unwrap().value + lautum_information(&k, &px).unwrap().value;
        prop_assert!(rel_close(rhs, sum, 1e-12));
    }

    #[test]
    fn bsc_relabeling_symmetry(eps in 0.01f64..0.99, a in 0.01f64..0.99) {
        let k = ConditionalKernel::binary_symmetric(eps).unwrap();
        let px = ProbabilityMeasure::from_weights(vec![a, 1.0 - a]).unwrap();
        let flipped = ProbabilityMeasure::from_weights(vec![1.0 - a, a]).unwrap();
        let mirrored = ConditionalKernel::binary_symmetric(1.0 - eps).unwrap();
        let i = mutual_information(&k, &px).unwrap().value;
        prop_assert!(rel_close(i, mutual_information(&k, &flipped).unwrap().value, 1e-12));
        prop_assert!(rel_close(i, mutual_information(&mirrored, &px).unwrap().value, 1e-12));
        let l = lautum_information(&k, &px).unwrap().value;
        prop_assert!(rel_close(l, lautum_information(&k, &flipped).unwrap().value, 1e-12));
    }

    #[test]
    fn density_ratios_are_reciprocal(p in positive_density(), q in positive_density()) {
        let forward = rnd_density(&p, &q).unwrap();
        let backward = rnd_density(&q, &p).unwrap();
        for (f, b) in forward.values().iter().zip(backward.values()) {
            prop_assert!((f * b - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn dyadic_density_proportionality(p in dyadic_density(), c in prop::sample::select(vec![0.5, 2.0, 10.0])) {
        let q = p.scale(c).unwrap();
        prop_assert!(rnd_density(&q, &p).unwrap().values().iter().all(|&v| v == c));
        prop_assert!(rnd_density(&p, &q).unwrap().values().iter().all(|&v| v == 1.0 / c));
    }

    #[test]
    fn density_chain_rule(p in positive_density(), q in positive_density(), r in positive_density()) {
        prop_assert!(check_chain_rule_density(&p, &q, &r).unwrap().pass);
    }

    #[test]
    fn generators_meet_their_hypotheses(seed in any::<u64>(), n in 1usize..=12, nx in 1usize..=6, ny in 1usize..=6) {
        let mut rng = generate::rng_for(seed, 1);
        let (p, q) = generate::ac_pair(&mut rng, n).unwrap();
        prop_assert!(p.is_absolutely_continuous(&q) && q.is_nonnegative());
        let strict = generate::probability(&mut rng, n, true).unwrap();
        prop_assert!(strict.weights().iter().all(|&w| w > 0.0));
        prop_assert!((strict.total_mass() - 1.0).abs() <= 1e-12);
        for strict in [false, true] {
            let k = generate::kernel(&mut rng, nx, ny, strict).unwrap();
            for row in k.rows_matrix() {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                prop_assert!(!strict || row.iter().all(|&w| w >= generate::STRICT_FLOOR * (1.0 - 1e-12)));
            }
        }
    }
}
