//! Seeded property suites shared by the `properties` and `acceptance` targets.

use bubbles::configuration::compute_constants;
use bubbles::dynamics::{
    decompose, prepare_data, vector_field, Forcing, ForcingModel, ReducedState, ShootingVariables,
};
use bubbles::interaction::{b_coefficients, grad_v, potential_v, PointConfig};
use bubbles::profiles::{
    big_f, f, remainder_ratio, taylor1_terms, taylor2_terms, w, ScalingAction, TAYLOR_CONSTANT,
};
use proptest::prelude::*;
use proptest::test_runner::{RngSeed, TestRunner};

pub const CASES: u32 = 100;
pub const SEED: u64 = 20_240_501;
const NU: f64 = 0.618;

type Outcome = Result<(), String>;

pub const SUITES: [(&str, fn() -> Outcome); 10] = [
    ("h1_scaling_coherence", h1_scaling_coherence),
    ("nonlinearity_symmetry", nonlinearity_symmetry),
    ("taylor_ratio_bounded", taylor_ratio_bounded),
    (
        "b_is_homogeneous_of_degree_two",
        b_is_homogeneous_of_degree_two,
    ),
    (
        "b_equals_scaled_gradient_of_v",
        b_equals_scaled_gradient_of_v,
    ),
    ("b_is_permutation_equivariant", b_is_permutation_equivariant),
    ("constants_scale_like_cube", constants_scale_like_cube),
    (
        "constants_are_deterministic_and_equivariant",
        constants_are_deterministic_and_equivariant,
    ),
    (
        "flow_is_permutation_equivariant",
        flow_is_permutation_equivariant,
    ),
    (
        "prepared_data_sit_on_the_alpha_sphere",
        prepared_data_sit_on_the_alpha_sphere,
    ),
];

fn runner() -> TestRunner {
    TestRunner::new(ProptestConfig {
        cases: CASES,
        rng_seed: RngSeed::Fixed(SEED),
        failure_persistence: None,
        ..ProptestConfig::default()
    })
}

fn check<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome
where
    S::Value: std::fmt::Debug,
{
    runner().run(&strategy, test).map_err(|e| e.to_string())
}

fn site() -> impl Strategy<Value = [f64; 5]> {
    prop::array::uniform5(-3.0..3.0f64)
}

fn distinct_sites(k: usize) -> impl Strategy<Value = PointConfig> {
    prop::collection::vec(site(), k).prop_filter_map("sites too close", |z| {
        let c = PointConfig::new(z).ok()?;
        (c.d > 0.2).then_some(c)
    })
}

fn shuffled3() -> impl Strategy<Value = [usize; 3]> {
    Just([0usize, 1, 2]).prop_shuffle()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn h1_scaling_coherence() -> Outcome {
    check((1e-3..1e3f64, 0.0..1e3f64), |(lambda, r)| {
        let s = ScalingAction::centered(lambda).unwrap();
        prop_assert!(close(
            s.h1_radial(w, lambda * r),
            lambda.powf(-1.5) * w(r),
            1e-15
        ));
        prop_assert!(close(
            s.l2_radial(w, lambda * r),
            lambda.powf(-2.5) * w(r),
            1e-15
        ));
        Ok(())
    })
}

pub fn nonlinearity_symmetry() -> Outcome {
    check(-1e3..1e3f64, |u| {
        prop_assert_eq!(f(-u), -f(u));
        prop_assert_eq!(big_f(-u), big_f(u));
        Ok(())
    })
}

pub fn taylor_ratio_bounded() -> Outcome {
    check(
        (-10.0..10.0f64, prop::collection::vec(-10.0..10.0f64, 1..5)),
        |(u, vs)| {
            prop_assert!(remainder_ratio(taylor1_terms(u, vs[0])) <= TAYLOR_CONSTANT);
            if vs.len() > 1 {
                prop_assert!(remainder_ratio(taylor2_terms(u, &vs)) <= TAYLOR_CONSTANT);
            }
            Ok(())
        },
    )
}

pub fn b_is_homogeneous_of_degree_two() -> Outcome {
    check(
        (
            distinct_sites(3),
            prop::array::uniform3(1e-3..1.0f64),
            1e-2..1e2f64,
        ),
        |(cfg, l, s)| {
            let b1 = b_coefficients(&cfg, &l).unwrap();
            let ls: Vec<f64> = l.iter().map(|x| s * x).collect();
            let b2 = b_coefficients(&cfg, &ls).unwrap();
            for (x, y) in b1.iter().zip(&b2) {
                prop_assert!(close(s * s * x, *y, 1e-13));
            }
            Ok(())
        },
    )
}

pub fn b_equals_scaled_gradient_of_v() -> Outcome {
    check(
        (
            distinct_sites(4),
            prop::array::uniform4(0.01..1.0f64),
            1e-3..10.0f64,
        ),
        |(cfg, dir, r)| {
            let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            let theta: Vec<f64> = dir.iter().map(|x| x / n).collect();
            let lam: Vec<f64> = theta.iter().map(|x| r * x).collect();
            let b = b_coefficients(&cfg, &lam).unwrap();
            let g = grad_v(&cfg, &theta);
            let bn = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            let diff = b
                .iter()
                .zip(&g)
                .map(|(x, y)| (x - r * r * y).powi(2))
                .sum::<f64>()
                .sqrt();
            prop_assert!(diff <= 1e-12 * bn);
            prop_assert!(potential_v(&cfg, &theta) < 0.0);
            prop_assert!(-theta.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() > 0.0);
            Ok(())
        },
    )
}

pub fn b_is_permutation_equivariant() -> Outcome {
    check(
        (
            distinct_sites(3),
            prop::array::uniform3(1e-3..1.0f64),
            shuffled3(),
        ),
        |(cfg, l, perm)| {
            let pc = cfg.permuted(&perm).unwrap();
            let lp: Vec<f64> = perm.iter().map(|&j| l[j]).collect();
            let b = b_coefficients(&cfg, &l).unwrap();
            let bp = b_coefficients(&pc, &lp).unwrap();
            for (i, &j) in perm.iter().enumerate() {
                prop_assert!(close(bp[i], b[j], 1e-14));
            }
            Ok(())
        },
    )
}

pub fn constants_scale_like_cube() -> Outcome {
    check((distinct_sites(3), 0.5..3.0f64), |(cfg, s)| {
        let a = compute_constants(&cfg, 8, 11).unwrap();
        let b = compute_constants(&cfg.scaled(s).unwrap(), 8, 11).unwrap();
        for (x, y) in a.c.iter().zip(&b.c) {
            prop_assert!(close(s.powi(3) * x, *y, 1e-8));
        }
        Ok(())
    })
}

pub fn constants_are_deterministic_and_equivariant() -> Outcome {
    check((distinct_sites(3), shuffled3()), |(cfg, perm)| {
        let a = compute_constants(&cfg, 8, 5).unwrap();
        prop_assert_eq!(&a, &compute_constants(&cfg, 8, 5).unwrap());
        let p = compute_constants(&cfg.permuted(&perm).unwrap(), 8, 5).unwrap();
        for (i, &j) in perm.iter().enumerate() {
            prop_assert!(close(p.c[i], a.c[j], 1e-8));
        }
        Ok(())
    })
}

pub fn flow_is_permutation_equivariant() -> Outcome {
    let states = (
        distinct_sites(3),
        prop::array::uniform3(1e-3..1.0f64),
        prop::array::uniform3(-1.0..1.0f64),
        prop::array::uniform3(-1.0..1.0f64),
        shuffled3(),
    );
    check(states, |(cfg, l, b, a, perm)| {
        let s = ReducedState::new(
            2.0,
            l.to_vec(),
            b.to_vec(),
            a.to_vec(),
            a.iter().map(|x| -x).collect(),
        )
        .unwrap();
        let forcing = Forcing::new(ForcingModel::WorstCase { amplitude: 1.0 }, 3).unwrap();
        let d = vector_field(&cfg, &s, NU, &forcing).unwrap();
        let dp = vector_field(
            &cfg.permuted(&perm).unwrap(),
            &s.permuted(&perm),
            NU,
            &forcing,
        )
        .unwrap();
        for (i, &j) in perm.iter().enumerate() {
            prop_assert!(close(dp.b[i], d.b[j], 1e-14));
            prop_assert_eq!(dp.lambda[i], d.lambda[j]);
            prop_assert_eq!(dp.a_plus[i], d.a_plus[j]);
            prop_assert_eq!(dp.a_minus[i], d.a_minus[j]);
        }
        Ok(())
    })
}

pub fn prepared_data_sit_on_the_alpha_sphere() -> Outcome {
    let cfg = PointConfig::pair(1.0).unwrap();
    let cs = compute_constants(&cfg, 4, 1).unwrap();
    check(
        (prop::array::uniform3(-1.0..1.0f64), 20.0..1e3f64),
        |(dir, t)| {
            let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assume!(n > 1e-3);
            let alpha: Vec<f64> = dir.iter().map(|x| x / n).collect();
            let s = prepare_data(&cs, t, &alpha).unwrap();
            let v = ShootingVariables::of(&s, &cs);
            prop_assert!((v.a_tilde0 - alpha[0]).abs() < 1e-9);
            prop_assert!((v.norm_sq() - 1.0).abs() < 1e-9);
            let d = decompose(&s).unwrap();
            let dot: f64 = d
                .b_perp
                .iter()
                .zip(&d.theta.theta)
                .map(|(a, b)| a * b)
                .sum();
            prop_assert!(dot.abs() <= 1e-12 * d.rho.abs());
            Ok(())
        },
    )
}
