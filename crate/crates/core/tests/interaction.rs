use bubbles::interaction::{
    energy_derivative_check, pair_integral, PairKind, PairMethod, PointConfig, FD_RELATIVE_STEP,
};

const ALL: [PairKind; 5] = [
    PairKind::L2Mass,
    PairKind::Gradient,
    PairKind::FiveThirds,
    PairKind::ProductNorm,
    PairKind::GeneratorProduct,
];

fn bipolar(kind: PairKind, lj: f64, lk: f64, d: f64) -> f64 {
    pair_integral(kind, lj, lk, d, PairMethod::Bipolar)
        .unwrap()
        .value
}

#[test]
fn pair_integrals_are_invariant_under_joint_dilation() {
    // every kind is built from H¹-critical bubbles with matching weights
    for kind in ALL {
        let base = bipolar(kind, 0.03, 0.05, 1.0);
        for s in [0.5, 4.0] {
            let v = bipolar(kind, 0.03 * s, 0.05 * s, s);
            assert!(
                ((v - base) / base).abs() <= 1e-8,
                "{kind:?} s={s}: {v} vs {base}"
            );
        }
    }
}

#[test]
fn symmetric_kinds_do_not_depend_on_order() {
    for kind in [
        PairKind::L2Mass,
        PairKind::Gradient,
        PairKind::FiveThirds,
        PairKind::GeneratorProduct,
    ] {
        let a = bipolar(kind, 0.02, 0.07, 1.3);
        let b = bipolar(kind, 0.07, 0.02, 1.3);
        assert!(((a - b) / a).abs() <= 1e-9, "{kind:?}: {a} vs {b}");
    }
}

#[test]
fn bipolar_agrees_with_monte_carlo() {
    for (i, kind) in ALL.into_iter().enumerate() {
        let b = bipolar(kind, 0.1, 0.2, 1.0);
        let m = pair_integral(
            kind,
            0.1,
            0.2,
            1.0,
            PairMethod::MonteCarlo {
                samples: 1_000_000,
                seed: 100 + i as u64,
            },
        )
        .unwrap();
        let z = (b - m.value) / m.std_error.unwrap();
        assert!(z.abs() <= 4.0, "{kind:?}: z = {z}");
    }
}

#[test]
fn monte_carlo_is_reproducible() {
    let method = PairMethod::MonteCarlo {
        samples: 100_000,
        seed: 9,
    };
    let a = pair_integral(PairKind::L2Mass, 0.1, 0.1, 1.0, method).unwrap();
    let b = pair_integral(PairKind::L2Mass, 0.1, 0.1, 1.0, method).unwrap();
    assert_eq!(a, b);
}

#[test]
fn energy_derivatives_follow_the_modulation_law() {
    let config = PointConfig::pair(1.0).unwrap();
    let errs: Vec<f64> = [50.0, 100.0]
        .iter()
        .map(|&t| {
            let r = energy_derivative_check(&config, t, FD_RELATIVE_STEP).unwrap();
            assert!(r.db_relative_error <= 0.1);
            r.dlambda_relative_error
        })
        .collect();
    assert!(errs[1] < errs[0] && errs[1] < 1e-3, "{errs:?}");
}
