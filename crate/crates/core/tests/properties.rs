use num_complex::Complex64;
use proptest::prelude::*;
use tavis_core::basis::{BasisState, ModelParams};
use tavis_core::{enumerate_basis, propagate, CavityIndex, Method, OrderedBasis, Permutation, PropagatorPlan, Snapshot};

fn params(n_cavity: usize, two_j: u32) -> ModelParams {
    ModelParams::from_ghz(2.4, 3.6, 0.05, 1.0, 6.0, n_cavity, two_j)
}

fn orderings(p: &ModelParams) -> (Vec<BasisState>, OrderedBasis, OrderedBasis) {
    let states = enumerate_basis(p).unwrap();
    let h0 = OrderedBasis::for_h0(p, &states).unwrap();
    let v = OrderedBasis::for_v(p, &states).unwrap();
    (states, h0, v)
}

fn sorted(mut s: Vec<BasisState>) -> Vec<(u32, i32)> {
    s.sort_by_key(|b| (b.n, b.two_m));
    s.into_iter().map(|b| (b.n, b.two_m)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orderings_are_permutations_of_the_basis(nc in 1usize..40, tj in 0u32..40) {
        let p = params(nc, tj);
        let (states, h0, v) = orderings(&p);
        prop_assert_eq!(states.len(), nc * (tj as usize + 1));
        let canonical = sorted(states);
        prop_assert_eq!(&sorted(h0.states().to_vec()), &canonical);
        prop_assert_eq!(&sorted(v.states().to_vec()), &canonical);
        prop_assert_eq!(h0.block_sizes().iter().sum::<usize>(), h0.len());
        prop_assert_eq!(v.block_sizes().iter().sum::<usize>(), v.len());
    }

    #[test]
    fn block_keys_are_constant(nc in 1usize..30, tj in 0u32..30) {
        let p = params(nc, tj);
        let (_, h0, v) = orderings(&p);
        for block in h0.blocks() {
            let keys: Vec<i64> = h0.states()[block.clone()].iter().map(|s| 2 * s.n as i64 + s.two_m as i64).collect();
            prop_assert!(keys.windows(2).all(|w| w[0] == w[1]));
        }
        for block in v.blocks() {
            let keys: Vec<i64> = v.states()[block.clone()].iter().map(|s| 2 * s.n as i64 - s.two_m as i64).collect();
            prop_assert!(keys.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn permutation_round_trip(nc in 1usize..25, tj in 0u32..25, seed in any::<u64>()) {
        let p = params(nc, tj);
        let (_, h0, v) = orderings(&p);
        let perm = Permutation::between(&h0, &v).unwrap();
        let d = h0.len();
        let src: Vec<Complex64> = (0..d)
            .map(|i| Complex64::new(((i as u64).wrapping_mul(seed | 1) % 1009) as f64, i as f64))
            .collect();
        let mut there = vec![Complex64::new(0.0, 0.0); d];
        let mut back = there.clone();
        perm.apply(&src, &mut there);
        perm.apply_inverse(&there, &mut back);
        prop_assert_eq!(&back, &src);
        for (i, s) in h0.states().iter().enumerate() {
            prop_assert_eq!(v.states()[perm.forward()[i]], *s);
            prop_assert_eq!(perm.inverse()[perm.forward()[i]], i);
        }
    }

    #[test]
    fn block_boundaries_are_exact_zeros(nc in 1usize..30, tj in 0u32..30) {
        let p = params(nc, tj);
        let plan = PropagatorPlan::new(&p, 1e-3, Method::Linear).unwrap();
        for op in [plan.h0(), plan.v()] {
            let mut inside = vec![false; op.off().len()];
            for b in op.blocks() {
                for i in b.start..b.end.saturating_sub(1) {
                    inside[i] = true;
                }
            }
            for (o, &within) in op.off().iter().zip(&inside) {
                prop_assert!(o.is_finite());
                if !within {
                    prop_assert_eq!(o.to_bits(), 0.0f64.to_bits());
                }
            }
        }
    }

    #[test]
    fn propagated_states_respect_uncertainty_bound(
        nc in 2usize..10,
        tj in 0u32..8,
        g in 0.0f64..0.5,
        lambda in 0.0f64..2.0,
        exp in any::<bool>(),
    ) {
        let p = ModelParams::from_ghz(2.4, 3.6, g, lambda, 6.0, nc, tj);
        let method = if exp { Method::Exp } else { Method::Linear };
        let plan = PropagatorPlan::new(&p, 2e-3, method).unwrap();
        let index = CavityIndex::new(plan.h0_basis());
        let mut worst = f64::INFINITY;
        let mut obs = |_k: usize, _t: f64, s: &tavis_core::StateVector| {
            let snap = Snapshot::take(s, &index, plan.jz()).unwrap();
            worst = worst.min(snap.lambda_minus * snap.lambda_plus);
        };
        propagate(&plan, plan.ground_state(), 0.0, 300, Some(&mut obs)).unwrap();
        prop_assert!(worst >= 1.0 / 16.0 - 1e-8, "product {}", worst);
    }
}
