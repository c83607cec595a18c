// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use proptest::prelude::*;
use qcontrol::policy::*;

fn obs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, OBS_DIM)
}

fn scheme() -> impl Strategy<Value = InitScheme> {
    prop_oneof![
        (0.1f64..8.0).prop_map(|gain| InitScheme::XavierNormal { gain }),
        Just(InitScheme::KaimingNormal { nonlinearity: Nonlinearity::Tanh }),
        Just(InitScheme::KaimingNormal {
            nonlinearity: Nonlinearity::LeakyRelu { negative_slope: 0.0 }
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn head_respects_bounds(s in scheme(), seed in 0u64..1000, x in obs()) {
        let p = init(&default_dims(), s, seed).unwrap();
        let out = forward(&p, &x).unwrap();
        prop_assert_eq!(out, forward(&p, &x).unwrap());
        for k in 0..2 {
            prop_assert!(out.mean[k].abs() <= MEAN_SCALE);
            prop_assert!((VARIANCE_MIN..=VARIANCE_MAX).contains(&out.variance[k]));
        }
        prop_assert!(log_prob(&out, out.mean).is_finite());
    }

    #[test]
    fn adam_is_bit_deterministic(seed in 0u64..1000, lr in 1e-6f64..1e-2, wd in 0.0f64..0.5) {
        let p = common::moderate_policy(seed);
        let g = grad_log_prob(&p, &[0.25; OBS_DIM], [1.0, -1.0]).unwrap();
        let step = |mut s: AdamState| {
            let once = s.update(&p, &g, lr, wd).unwrap();
            s.update(&once, &g, lr, wd).unwrap()
        };
        prop_assert_eq!(step(AdamState::new(&p)), step(AdamState::new(&p)));
    }
}

#[test]
fn score_matches_finite_differences() {
    let worst = common::gradient_gate(10, 6, 17);
    assert!(worst < 1e-4, "worst relative error {worst:e}");
}

#[test]
fn saved_weights_reload_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.bin");
    let p = init(&default_dims(), InitScheme::XavierNormal { gain: 5.0 }, 3).unwrap();
    save_weights(&p, &path).unwrap();
    let q = load_weights(&path).unwrap();
    assert_eq!(p, q);
    let x = [0.7; OBS_DIM];
    assert_eq!(forward(&p, &x).unwrap(), forward(&q, &x).unwrap());
}
