use bubbles::configuration::{
    compute_constants, BlowupConstants, DEFAULT_MULTISTART, DEFAULT_SEED,
};
use bubbles::dynamics::*;
use bubbles::interaction::PointConfig;
use bubbles::numerics::fit::fit_line;
use bubbles::profiles::DIM;
use bubbles::Error;

const NU: f64 = 0.618_076_878_429;

fn setup(config: PointConfig) -> (PointConfig, BlowupConstants) {
    let c = compute_constants(&config, DEFAULT_MULTISTART, DEFAULT_SEED).unwrap();
    (config, c)
}

fn pair(sep: f64) -> (PointConfig, BlowupConstants) {
    setup(PointConfig::pair(sep).unwrap())
}

fn quiet() -> SimulationOptions {
    SimulationOptions {
        stop_on_exit: false,
        ..SimulationOptions::default()
    }
}

fn tight() -> SimulationOptions {
    let mut o = quiet();
    o.tolerances.rtol = 1e-13;
    o.tolerances.atol = 1e-16;
    o
}

#[test]
fn regime_is_an_exact_solution() {
    for config in [
        PointConfig::pair(1.0).unwrap(),
        PointConfig::equilateral(1.0).unwrap(),
    ] {
        let (config, c) = setup(config);
        let data = ReducedState::regime(&c, 100.0).unwrap();
        let tr = simulate(
            &config,
            &c,
            &data,
            10.0,
            Direction::Backward,
            ForcingModel::None,
            NU,
            &SimulationOptions::default(),
        )
        .unwrap();
        assert_eq!(tr.exit, ExitReason::ReachedEnd);
        for s in &tr.samples {
            let t = s.t;
            for k in 0..config.k() {
                assert!(t.powf(7.0 / 3.0) * (s.lambda[k] - c.c[k] * t.powi(-2)).abs() <= 1e-6);
                assert!(t.powf(10.0 / 3.0) * (s.b[k] - 2.0 * c.c[k] * t.powi(-3)).abs() <= 1e-6);
            }
            let d = decompose(s).unwrap();
            let g = lyapunov_g(&c, &d);
            assert!(
                g.abs() <= 1e-12 * c.c_norm().powi(2) * t.powi(-6),
                "G = {g:e} at {t}"
            );
            assert!((lyapunov_f(&config, &d) - c.v_min).abs() <= 1e-10 * c.v_min.abs());
        }
        let law = first_order_law_check(&tr, &c, 1e-6).unwrap();
        assert!(law.pass, "{}", law.summary_line());
    }
}

#[test]
fn single_bubble_has_constant_velocity() {
    let config = PointConfig::new(vec![[0.0; DIM]]).unwrap();
    let s = ReducedState::new(2.0, vec![0.3], vec![0.7], vec![0.0], vec![0.0]).unwrap();
    let d = vector_field(
        &config,
        &s,
        NU,
        &Forcing::new(ForcingModel::None, 1).unwrap(),
    )
    .unwrap();
    assert_eq!(d.b, vec![0.0]);
    assert_eq!(d.lambda, vec![-0.7]);
}

#[test]
fn field_matches_trajectory_differences() {
    let (config, c) = pair(1.0);
    let mut s = ReducedState::regime(&c, 2.0).unwrap();
    s.lambda[0] *= 1.01;
    s.a_plus[1] = 1e-7;
    s.a_minus[0] = -2e-7;
    let f = Forcing::new(ForcingModel::None, 2).unwrap();
    let opts = SimulationOptions {
        samples: 2,
        ..tight()
    };
    let mut errs = Vec::new();
    for h in [2e-3, 1e-3] {
        let fwd = simulate(
            &config,
            &c,
            &s,
            s.t + h,
            Direction::Forward,
            ForcingModel::None,
            NU,
            &opts,
        )
        .unwrap();
        let bwd = simulate(
            &config,
            &c,
            &s,
            s.t - h,
            Direction::Backward,
            ForcingModel::None,
            NU,
            &opts,
        )
        .unwrap();
        let (p, m) = (fwd.samples.last().unwrap(), bwd.samples.last().unwrap());
        let d = vector_field(&config, &s, NU, &f).unwrap();
        let rel = |a: &[f64], b: &[f64], v: &[f64]| -> f64 {
            let scale = v.iter().fold(0.0_f64, |m, z| m.max(z.abs()));
            a.iter()
                .zip(b)
                .zip(v)
                .map(|((x, y), z)| ((x - y) / (2.0 * h) - z).abs() / scale)
                .fold(0.0, f64::max)
        };
        errs.push(
            rel(&p.lambda, &m.lambda, &d.lambda)
                .max(rel(&p.b, &m.b, &d.b))
                .max(rel(&p.a_plus, &m.a_plus, &d.a_plus))
                .max(rel(&p.a_minus, &m.a_minus, &d.a_minus)),
        );
    }
    assert!(errs[0] < 1e-3, "{errs:?}");
    assert!(errs[1] < 0.3 * errs[0], "{errs:?}");
}

#[test]
fn channels_follow_closed_forms_on_the_regime() {
    // λ_k = c_k t^{-2} gives a^±(t) = a^±(t₁) exp(±ν(t³ - t₁³)/(3c_k))
    let (config, c) = pair(4.0);
    let t1 = 12.0;
    let mut s = ReducedState::regime(&c, t1).unwrap();
    s.a_plus = vec![1e-9, -2e-9];
    let back = simulate(
        &config,
        &c,
        &s,
        10.0,
        Direction::Backward,
        ForcingModel::None,
        NU,
        &tight(),
    )
    .unwrap();
    let mut s = ReducedState::regime(&c, 10.0).unwrap();
    s.a_minus = vec![3e-5, -1e-5];
    let fwd = simulate(
        &config,
        &c,
        &s,
        t1,
        Direction::Forward,
        ForcingModel::None,
        NU,
        &tight(),
    )
    .unwrap();
    for (tr, plus) in [(&back, true), (&fwd, false)] {
        let start = &tr.samples[0];
        for x in &tr.samples {
            for k in 0..2 {
                let e = NU * (x.t.powi(3) - start.t.powi(3)) / (3.0 * c.c[k]);
                let (got, init, g) = if plus {
                    (x.a_plus[k], start.a_plus[k], e)
                } else {
                    (x.a_minus[k], start.a_minus[k], -e)
                };
                let want = init * g.exp();
                assert!(
                    (got - want).abs() <= 1e-6 * want.abs(),
                    "{got:e} vs {want:e}"
                );
            }
        }
    }
}

#[test]
fn unstable_channel_exits_backward() {
    let (config, c) = pair(4.0);
    let data = prepare_data(&c, 12.0, &[0.0, 0.5, 0.0]).unwrap();
    let tr = simulate(
        &config,
        &c,
        &data,
        10.0,
        Direction::Backward,
        ForcingModel::None,
        NU,
        &SimulationOptions::default(),
    )
    .unwrap();
    assert_eq!(tr.exit, ExitReason::BrouwerBoot);
    assert!(tr.exit_time.unwrap() > 10.0);
}

#[test]
fn positive_alpha0_blows_up_at_the_predicted_time() {
    // prepared data lie on G = 0, where r = |c|(t - t₀)^{-2}
    let (config, c) = pair(1.0);
    let t_big = 100.0;
    let data = prepare_data(&c, t_big, &[1.0, 0.0, 0.0]).unwrap();
    let r = c.c_norm() * t_big.powi(-2) + t_big.powf(-12.0 / 5.0);
    let d = decompose(&data).unwrap();
    assert!(((d.r - r) / r).abs() <= 1e-14);
    assert!(lyapunov_g(&c, &d).abs() <= 1e-12 * d.rho * d.rho);
    let t_star = t_big - (c.c_norm() / r).sqrt();
    match simulate(
        &config,
        &c,
        &data,
        1.0,
        Direction::Backward,
        ForcingModel::None,
        NU,
        &quiet(),
    ) {
        Err(Error::Divergence { t, .. }) | Err(Error::StepLimit { t, .. }) => {
            assert!(((t - t_star) / t_star).abs() <= 1e-3, "{t} vs {t_star}")
        }
        other => panic!("expected divergence, got {other:?}"),
    }
    let tr = simulate(
        &config,
        &c,
        &data,
        10.0,
        Direction::Backward,
        ForcingModel::None,
        NU,
        &SimulationOptions::default(),
    )
    .unwrap();
    assert_ne!(tr.exit, ExitReason::ReachedEnd);
    assert!(tr.exit_time.unwrap() > t_star);
}

#[test]
fn prepared_data_validation() {
    let (_, c) = pair(1.0);
    assert!(prepare_data(&c, 10.0, &[0.8, 0.7, 0.0]).is_err());
    assert!(prepare_data(&c, 10.0, &[0.5, 0.5]).is_err());
    let s = prepare_data(&c, 10.0, &[0.0, 0.6, -0.8]).unwrap();
    let v = ShootingVariables::of(&s, &c);
    assert!(v.a_tilde0.abs() <= 1e-12);
    assert!((v.norm_sq() - 1.0).abs() <= 1e-12);
}

#[test]
fn regime_exponents() {
    let (config, c) = pair(1.0);
    let ex = linearize_about_regime(&config, &c, 10.0, 100.0).unwrap();
    let radial: Vec<f64> = ex
        .iter()
        .filter(|e| e.block == Block::Radial)
        .map(|e| e.re)
        .collect();
    assert!(radial.iter().any(|&r| (r - 6.0).abs() <= 0.3), "{ex:?}");
    assert!(radial.iter().any(|&r| (r + 1.0).abs() <= 0.1), "{ex:?}");
    for e in ex.iter().filter(|e| e.block == Block::Tangent) {
        assert!(e.re <= 6.0);
        // 5/2 ± i√(12 - 25/4) from the Euler equation of the tangent block
        assert!(
            (e.re - 2.5).abs() <= 1e-6 && (e.im.abs() - 5.75f64.sqrt()).abs() <= 1e-6,
            "{e:?}"
        );
    }
}

fn shooting_time(c: &BlowupConstants, e: f64, t0: f64) -> f64 {
    (3.0 * c.c[0] * e / NU + t0.powi(3)).cbrt()
}

#[test]
fn shooting_without_forcing_selects_zero() {
    let (config, c) = pair(4.0);
    let t = shooting_time(&c, 8.0, 10.0);
    let r = shoot_channels(
        &config,
        &c,
        t,
        10.0,
        0,
        ForcingModel::None,
        NU,
        &SimulationOptions::default(),
    )
    .unwrap();
    assert!(r.success);
    assert!(r.alpha.abs() <= 1e-12, "{}", r.alpha);
    assert!(*r.bracket_widths.last().unwrap() <= 2.0 * BRACKET_REDUCTION);
    assert!(r
        .bracket_widths
        .windows(2)
        .all(|w| w[1] <= 0.5 * w[0] + 1e-300));
    assert!(!r.transversality.is_empty() && r.transversality.iter().all(|&x| x < 0.0));
}

#[test]
fn shooting_with_forcing_succeeds() {
    let (config, c) = pair(4.0);
    let t = shooting_time(&c, 8.0, 10.0);
    let f = ForcingModel::WorstCase {
        amplitude: DEFAULT_FORCING_AMPLITUDE,
    };
    let r = shoot_channels(
        &config,
        &c,
        t,
        10.0,
        1,
        f,
        NU,
        &SimulationOptions::default(),
    )
    .unwrap();
    assert!(r.success);
    assert!(r.alpha.abs() > 1e-3 && r.alpha.abs() < 1.0);
    assert!(r.transversality.iter().all(|&x| x < 0.0));
    let rnd = ForcingModel::RandomBounded {
        amplitude: 1.0,
        seed: 7,
    };
    assert!(
        shoot_channels(
            &config,
            &c,
            t,
            10.0,
            0,
            rnd,
            NU,
            &SimulationOptions::default()
        )
        .unwrap()
        .success
    );
}

#[test]
fn success_width_shrinks_exponentially() {
    // width ~ exp(-ν(T³ - T0³)/(3c_k))
    let (config, c) = pair(4.0);
    let t0 = 10.0;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for e in [4.0, 8.0, 12.0] {
        let t = shooting_time(&c, e, t0);
        let r = shoot_channels(
            &config,
            &c,
            t,
            t0,
            0,
            ForcingModel::None,
            NU,
            &SimulationOptions::default(),
        )
        .unwrap();
        let w = success_width(
            &config,
            &c,
            t,
            t0,
            0,
            r.alpha,
            ForcingModel::None,
            NU,
            &SimulationOptions::default(),
        )
        .unwrap();
        x.push(t.powi(3));
        y.push(w.ln());
    }
    let slope = fit_line(&x, &y).unwrap().slope;
    let expected = -NU / (3.0 * c.c[0]);
    assert!(
        ((slope - expected) / expected).abs() <= 0.1,
        "{slope} vs {expected}"
    );
}

#[test]
fn invalid_requests_are_rejected() {
    let (config, c) = pair(1.0);
    let data = ReducedState::regime(&c, 10.0).unwrap();
    assert!(simulate(
        &config,
        &c,
        &data,
        20.0,
        Direction::Backward,
        ForcingModel::None,
        NU,
        &quiet()
    )
    .is_err());
    assert!(simulate(
        &config,
        &c,
        &data,
        5.0,
        Direction::Backward,
        ForcingModel::None,
        -1.0,
        &quiet()
    )
    .is_err());
    assert!(shoot_channels(&config, &c, 10.0, 12.0, 0, ForcingModel::None, NU, &quiet()).is_err());
    assert!(shoot_channels(&config, &c, 12.0, 10.0, 2, ForcingModel::None, NU, &quiet()).is_err());
    let bad = ReducedState::new(
        10.0,
        vec![1.0, -1.0],
        vec![0.0; 2],
        vec![0.0; 2],
        vec![0.0; 2],
    );
    assert!(bad.is_err());
}
