use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use soundcone::bounds::{bound_grid, hastings_koma, matexp_bound, BoundKind, HKParams};
use soundcone::channel::{
    lower_bound_probability, signal_probability, validity_horizon, ChannelSpec,
};
use soundcone::hopping::{correlation_grid, mutual_information_grid, occupation, HoppingModel};
use soundcone::lattice::{hopping_interactions, Boundary, InteractionMatrix, LatticeSpec};
use soundcone::numerics::RealSymmetricMatrix;

fn on_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn grids_do_not_depend_on_thread_count() {
    let deltas: Vec<usize> = (1..=30).collect();
    let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    let model = HoppingModel::new(60, 1.3).unwrap();
    let kind = BoundKind::Matexp {
        interactions: hopping_interactions(60, 2.0).unwrap(),
        source: 0,
    };
    let run = || {
        (
            bound_grid(&kind, &deltas, &times).unwrap(),
            correlation_grid(&model, &deltas, &times).unwrap(),
            mutual_information_grid(&model, &deltas, &times).unwrap(),
        )
    };
    assert_eq!(on_threads(1, run), on_threads(4, run));
}

#[test]
fn matexp_bound_is_symmetric_and_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 9;
    let m =
        RealSymmetricMatrix::from_upper(n, |i, j| if i == j { 0.0 } else { rng.random::<f64>() })
            .unwrap();
    let j =
        InteractionMatrix::from_entries(LatticeSpec::chain(n, Boundary::Open).unwrap(), m).unwrap();
    for t in [0.0, 0.3, 1.7] {
        for a in 0..n {
            for b in 0..n {
                let x = matexp_bound(&j, t, a, b).unwrap();
                let y = matexp_bound(&j, t, b, a).unwrap();
                assert!(x >= -1e-12);
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }
}

proptest! {
    #[test]
    fn hk_grows_in_time_and_decays_in_distance(
        c in 0.1f64..10.0,
        v in 0.1f64..5.0,
        alpha in 1.01f64..6.0,
        d in 0usize..200,
        t in 0.01f64..5.0,
    ) {
        let p = HKParams::new(c, v, alpha, 1, 1, 1).unwrap();
        prop_assert!(hastings_koma(&p, d, t) > hastings_koma(&p, d + 1, t));
        prop_assert!(hastings_koma(&p, d, t * 1.1) > hastings_koma(&p, d, t));
        prop_assert_eq!(hastings_koma(&p, d, 0.0), 0.0);
    }

    #[test]
    fn occupations_stay_physical(n_half in 2usize..40, alpha in 0.0f64..5.0, t in 0.0f64..50.0) {
        let model = HoppingModel::new(2 * n_half, alpha).unwrap();
        for j in 0..model.n() {
            let x = occupation(&model, j, t);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&x));
        }
    }

    #[test]
    fn lower_bound_sits_below_exact_probability(
        n in 4usize..60,
        alpha in 1.05f64..5.0,
        frac in 0.0f64..1.0,
    ) {
        let spec = ChannelSpec::power_law(n, alpha).unwrap();
        let t = frac * validity_horizon(alpha, n).unwrap();
        let exact = signal_probability(&spec, t);
        let lower = lower_bound_probability(alpha, n, t).unwrap().value().unwrap();
        prop_assert!((0.0..=1.0).contains(&exact));
        prop_assert!(lower <= exact + 1e-12, "lower {} exact {}", lower, exact);
    }
}
