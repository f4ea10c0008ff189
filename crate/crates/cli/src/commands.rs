use std::path::Path;

use bubbles::configuration::{certify_fixed_point, compute_constants, BlowupConstants};
use bubbles::dynamics::{
    decompose, lyapunov_f, lyapunov_g, prepare_data, shoot_channels, simulate, Direction,
    ExitReason, ShootingResult, ShootingVariables, Trajectory,
};
use bubbles::interaction::{
    b_coefficients, grad_v, kappa, kappa_quadrature, pair_integral, PairKind, PairMethod,
    PointConfig,
};
use bubbles::numerics::fit::loglog_slope;
use bubbles::numerics::quadrature::{inner, quad_radial, RadialGrid};
use bubbles::numerics::report::CheckReport;
use bubbles::profiles::{
    dw, lambda_w, potential, taylor_remainder_check, ulambda_lambda_w, verify_ground_state, w, DIM,
};
use bubbles::spectral::{
    build_sector, coer0_constraints, coercivity_constant, ground_eigenpair, sector_bottom,
    shooting_nu, solve_correctors, CoercivityMode, CorrectorGrid, FeMesh, CORRECTOR_COEFFICIENT,
    CORRECTOR_RESIDUAL_TOL, SOLVABILITY_TOL,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::output::{Csv, OutDir};
use crate::CliError;

/// What a command hands back to `main`: the checks it ran.
pub type Checks = Vec<CheckReport>;

const NU_AGREEMENT: f64 = 1e-4;
const SHOOTING_XTOL: f64 = 1e-12;
const TAIL_TOL: f64 = 0.1;
const DECAY_SLACK: f64 = 0.2;
const FIVE_THIRDS_SPREAD: f64 = 2.0;
const MC_SIGMAS: f64 = 3.0;
pub const SPECTRUM_FILE: &str = "spectrum.json";

fn sites(cfg: &RunConfig) -> Result<PointConfig, CliError> {
    if cfg.points.len() < 2 {
        return Err(CliError::Usage(format!(
            "at least two points are required, got {}",
            cfg.points.len()
        )));
    }
    Ok(PointConfig::new(cfg.points.clone())?)
}

fn constants_for(cfg: &RunConfig, config: &PointConfig) -> Result<BlowupConstants, CliError> {
    Ok(compute_constants(config, cfg.multistart, cfg.seed)?)
}

/// `--nu-override`, then the configuration, then `spectrum.json` in the
/// output directory.
pub fn resolve_nu(over: Option<f64>, cfg: &RunConfig, out: &OutDir) -> Result<f64, CliError> {
    let nu = match over.or(cfg.nu) {
        Some(nu) => nu,
        None => read_spectrum_nu(&out.path(SPECTRUM_FILE))?,
    };
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(CliError::Usage(format!("ν must be positive, got {nu}")));
    }
    Ok(nu)
}

fn read_spectrum_nu(path: &Path) -> Result<f64, CliError> {
    let hint = "run `bubbles spectrum` with the same --out, set \"nu\" in the configuration, or pass --nu-override";
    let text = std::fs::read_to_string(path)
        .map_err(|_| CliError::Usage(format!("no spectral data at {}; {hint}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| {
        CliError::Usage(format!(
            "{} is not valid JSON ({e}); {hint}",
            path.display()
        ))
    })?;
    v.get("nu")
        .and_then(Value::as_f64)
        .ok_or_else(|| CliError::Usage(format!("{} has no \"nu\" field; {hint}", path.display())))
}

pub fn configure(cfg: &RunConfig, out: &OutDir) -> Result<Checks, CliError> {
    let config = sites(cfg)?;
    let c = constants_for(cfg, &config)?;
    out.write_json("constants.json", &c)?;
    Ok(vec![certify_fixed_point(&config, &c.c)?])
}

fn log_radii(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 10f64.powf(-3.0 + 7.0 * i as f64 / (n - 1) as f64))
        .collect()
}

pub fn verify(cfg: &RunConfig, out: &OutDir) -> Result<Checks, CliError> {
    let grid = RadialGrid::default();
    let norm = inner(lambda_w, lambda_w, &grid)?;
    let q = inner(
        |r| CORRECTOR_COEFFICIENT * potential(r) + lambda_w(r),
        lambda_w,
        &grid,
    )?;
    let s = inner(ulambda_lambda_w, lambda_w, &grid)?;
    let form = quad_radial(|r| dw(r).powi(2) - potential(r) * w(r).powi(2), &grid)?;
    let w103 = quad_radial(|r| w(r).powf(10.0 / 3.0), &grid)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (config, theta, r) = loop {
        let z: Vec<[f64; DIM]> = (0..3)
            .map(|_| std::array::from_fn(|_| rng.random_range(-2.0..2.0)))
            .collect();
        if let Ok(c) = PointConfig::new(z) {
            if c.d > 0.25 {
                let dir: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..1.0)).collect();
                let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                break (
                    c,
                    dir.iter().map(|x| x / n).collect::<Vec<_>>(),
                    rng.random_range(0.1..10.0),
                );
            }
        }
    };
    let lam: Vec<f64> = theta.iter().map(|x| r * x).collect();
    let b = b_coefficients(&config, &lam)?;
    let g = grad_v(&config, &theta);
    let bn = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let gap = b
        .iter()
        .zip(&g)
        .map(|(x, y)| (x - r * r * y).powi(2))
        .sum::<f64>()
        .sqrt()
        / bn;

    let checks = vec![
        CheckReport::absolute("kappa", kappa(), 22.5428, 5e-5),
        CheckReport::relative("kappa_quadrature", kappa_quadrature(&grid)?, kappa(), 1e-8),
        verify_ground_state(&log_radii(50))?,
        CheckReport::at_most(
            "corrector_orthogonality_Q",
            (q / norm).abs(),
            SOLVABILITY_TOL,
        ),
        CheckReport::at_most(
            "lambda_w_ulambda_lambda_w_orthogonality",
            (s / norm).abs(),
            SOLVABILITY_TOL,
        ),
        CheckReport::relative("ground_state_quadratic_form", form, -4.0 / 3.0 * w103, 1e-8),
        CheckReport::at_most("b_equals_r2_grad_v", gap, 1e-12),
        taylor_remainder_check(1000, cfg.seed)?,
    ];
    out.write_json("verify.json", &checks)?;
    Ok(checks)
}

fn trajectory_csv(
    traj: &Trajectory,
    config: &PointConfig,
    c: &BlowupConstants,
) -> Result<Csv, CliError> {
    let k = config.k();
    let mut header = vec!["t".to_string()];
    for name in ["lambda", "b", "a_plus", "a_minus"] {
        header.extend((1..=k).map(|i| format!("{name}_{i}")));
    }
    header.extend(["r", "rho", "F", "G", "a_tilde_0"].map(String::from));
    header.extend((1..=k).map(|i| format!("a_tilde_{i}")));
    let mut csv = Csv::new(header);
    for s in &traj.samples {
        let d = decompose(s)?;
        let v = ShootingVariables::of(s, c);
        let mut row = vec![s.t];
        row.extend(
            s.lambda
                .iter()
                .chain(&s.b)
                .chain(&s.a_plus)
                .chain(&s.a_minus),
        );
        row.extend([
            d.r,
            d.rho,
            lyapunov_f(config, &d),
            lyapunov_g(c, &d),
            v.a_tilde0,
        ]);
        row.extend(&v.a_tilde_k);
        csv.push_numbers(row);
    }
    Ok(csv)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TrajectorySummary<'a> {
    exit: ExitReason,
    exit_time: Option<f64>,
    accepted_steps: usize,
    metadata: &'a bubbles::dynamics::TrajectoryMetadata,
    final_monitors: Option<&'a bubbles::dynamics::BootstrapMonitors>,
}

pub fn simulate_cmd(cfg: &RunConfig, out: &OutDir, nu: f64) -> Result<Checks, CliError> {
    let config = sites(cfg)?;
    let c = constants_for(cfg, &config)?;
    let alpha = cfg
        .alpha
        .clone()
        .unwrap_or_else(|| vec![0.0; config.k() + 1]);
    let data = prepare_data(&c, cfg.t, &alpha)?;
    let traj = simulate(
        &config,
        &c,
        &data,
        cfg.t0,
        cfg.direction,
        cfg.forcing,
        nu,
        &cfg.simulation_options(),
    )?;
    out.write(
        "trajectory.csv",
        &trajectory_csv(&traj, &config, &c)?.render(),
    )?;
    out.write_json(
        "trajectory.json",
        &TrajectorySummary {
            exit: traj.exit,
            exit_time: traj.exit_time,
            accepted_steps: traj.accepted_steps,
            metadata: &traj.metadata,
            final_monitors: traj.monitors.last(),
        },
    )?;
    let mut checks = vec![CheckReport::at_most(
        "bootstrap_exits",
        f64::from(u8::from(traj.exit != ExitReason::ReachedEnd)),
        0.0,
    )];
    if traj.exit == ExitReason::ReachedEnd {
        let last = traj.samples.last().map_or(f64::NAN, |s| s.t);
        checks.push(CheckReport::absolute(
            "final_time",
            last,
            cfg.t0,
            1e-9 * cfg.t0,
        ));
    }
    Ok(checks)
}

pub fn shoot(cfg: &RunConfig, out: &OutDir, nu: f64) -> Result<Checks, CliError> {
    let config = sites(cfg)?;
    let c = constants_for(cfg, &config)?;
    if cfg.direction != Direction::Backward {
        return Err(CliError::Usage(
            "shooting integrates backward from T to T0".into(),
        ));
    }
    let channels: Vec<usize> = match cfg.channel {
        Some(ch) => vec![ch],
        None => (0..config.k()).collect(),
    };
    let opts = cfg.simulation_options();
    let results: Vec<ShootingResult> = channels
        .iter()
        .map(|&ch| shoot_channels(&config, &c, cfg.t, cfg.t0, ch, cfg.forcing, nu, &opts))
        .collect::<Result<_, _>>()?;
    out.write_json("shooting.json", &results)?;
    let mut checks = Vec::new();
    for r in &results {
        let worst = r
            .transversality
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(CheckReport::at_most(
            format!("channel_{}_transversality", r.channel + 1),
            worst,
            0.0,
        ));
        checks.push(CheckReport::at_least(
            format!("channel_{}_success", r.channel + 1),
            f64::from(u8::from(r.success)),
            1.0,
        ));
    }
    Ok(checks)
}

#[derive(Serialize)]
struct SpectrumOutput {
    nu: f64,
    nu_shooting: f64,
    decay_rate: f64,
    kernel_residual_lambda_w: f64,
    kernel_residual_grad_w: f64,
    coercivity_l0: f64,
    coercivity_l1: f64,
    sector_bottoms: Vec<f64>,
    grid: crate::config::SpectralGrid,
}

pub fn spectrum(cfg: &RunConfig, out: &OutDir) -> Result<Checks, CliError> {
    let g = cfg.spectral;
    let mesh = FeMesh::sinh(g.scale, g.r_max, g.elements)?;
    let op0 = build_sector(0, &mesh)?;
    let op1 = build_sector(1, &mesh)?;
    let data = ground_eigenpair(&op0)?;
    let nu_shooting = shooting_nu(SHOOTING_XTOL)?;
    let c0 = coercivity_constant(
        &op0,
        &coer0_constraints(&op0, &data)?,
        CoercivityMode::Global,
    )?;
    let c1 = coercivity_constant(
        &op1,
        &coer0_constraints(&op1, &data)?,
        CoercivityMode::Global,
    )?;
    let mut sector_bottoms = vec![sector_bottom(&op0)?, sector_bottom(&op1)?];
    for ell in 2..4 {
        sector_bottoms.push(sector_bottom(&build_sector(ell, &mesh)?)?);
    }
    let report = SpectrumOutput {
        nu: data.nu,
        nu_shooting,
        decay_rate: data.decay_rate,
        kernel_residual_lambda_w: op0.kernel_residual(lambda_w)?,
        kernel_residual_grad_w: op1.kernel_residual(dw)?,
        coercivity_l0: c0.measured,
        coercivity_l1: c1.measured,
        sector_bottoms,
        grid: g,
    };
    let mut csv = Csv::new(["r", "Y"]);
    for (r, y) in data.y.nodes.iter().zip(&data.y.values) {
        csv.push_numbers([*r, *y]);
    }
    out.write("eigenfunction.csv", &csv.render())?;
    out.write_json(SPECTRUM_FILE, &report)?;
    let mut c0 = c0;
    c0.name = "coercivity_l0".into();
    let mut c1 = c1;
    c1.name = "coercivity_l1".into();
    Ok(vec![
        CheckReport::at_least("negative_eigenvalue", data.nu, 0.0),
        CheckReport::absolute("nu_grid_vs_shooting", data.nu, nu_shooting, NU_AGREEMENT),
        CheckReport::at_most(
            "eigenfunction_sign_changes",
            data.y.sign_changes() as f64,
            0.0,
        ),
        c0,
        c1,
    ])
}

#[derive(Serialize)]
struct CorrectorSummary {
    #[serde(rename = "residual_Q")]
    residual_q: f64,
    #[serde(rename = "residual_S")]
    residual_s: f64,
    #[serde(rename = "tail_Q")]
    tail_q: f64,
    #[serde(rename = "tail_S")]
    tail_s: f64,
    solvability_q: f64,
    solvability_s: f64,
    grid: crate::config::CorrectorSettings,
}

pub fn correctors(cfg: &RunConfig, out: &OutDir) -> Result<Checks, CliError> {
    let grid: CorrectorGrid = cfg.correctors.into();
    let p = solve_correctors(&grid)?;
    let mut csv = Csv::new(["r", "Q", "S"]);
    for i in 0..p.q.nodes.len() {
        csv.push_numbers([p.q.nodes[i], p.q.values[i], p.s.values[i]]);
    }
    out.write("correctors.csv", &csv.render())?;
    out.write_json(
        "correctors.json",
        &CorrectorSummary {
            residual_q: p.residual_q,
            residual_s: p.residual_s,
            tail_q: p.tail_q,
            tail_s: p.tail_s,
            solvability_q: p.solvability_q,
            solvability_s: p.solvability_s,
            grid: cfg.correctors,
        },
    )?;
    Ok(vec![
        CheckReport::at_most("residual_Q", p.residual_q, CORRECTOR_RESIDUAL_TOL),
        CheckReport::at_most("residual_S", p.residual_s, CORRECTOR_RESIDUAL_TOL),
        CheckReport::absolute("tail_Q", p.tail_q, -1.0, TAIL_TOL),
        CheckReport::absolute("tail_S", p.tail_s, -1.0, TAIL_TOL),
        CheckReport::at_most("solvability_Q", p.solvability_q.abs(), SOLVABILITY_TOL),
        CheckReport::at_most("solvability_S", p.solvability_s.abs(), SOLVABILITY_TOL),
    ])
}

#[derive(Serialize)]
struct McComparison {
    kind: PairKind,
    t: f64,
    bipolar: f64,
    monte_carlo: f64,
    std_error: f64,
    z: f64,
}

pub fn interactions(cfg: &RunConfig, out: &OutDir) -> Result<Checks, CliError> {
    let config = sites(cfg)?;
    let c = constants_for(cfg, &config)?;
    let times = &cfg.interactions.times;
    if times.len() < 2 || times.iter().any(|t| !(*t > 0.0)) {
        return Err(CliError::Usage(
            "interactions need at least two positive times".into(),
        ));
    }
    let sep = config.dist[0][1];
    let scales = |t: f64| (c.c[0] * t.powi(-2), c.c[1] * t.powi(-2));
    let mut csv = Csv::new([
        "kind",
        "t",
        "lambda_j",
        "lambda_k",
        "value",
        "fitted_exponent",
    ]);
    let mut checks = Vec::new();
    for kind in PairKind::SCALING {
        let values: Vec<f64> = times
            .iter()
            .map(|&t| {
                let (lj, lk) = scales(t);
                pair_integral(kind, lj, lk, sep, PairMethod::Bipolar).map(|p| p.value)
            })
            .collect::<Result<_, _>>()?;
        let exponent = loglog_slope(times, &values)?;
        for (t, v) in times.iter().zip(&values) {
            let (lj, lk) = scales(*t);
            let mut row = vec![kind.name().to_string()];
            row.extend([*t, lj, lk, *v, exponent].map(crate::output::fmt_f64));
            csv.push(row);
        }
        match kind {
            PairKind::L2Mass => checks.push(CheckReport::at_least(
                "l2_mass_decay",
                -exponent,
                2.0 - DECAY_SLACK,
            )),
            PairKind::Gradient => checks.push(CheckReport::at_least(
                "gradient_decay",
                -exponent,
                6.0 - DECAY_SLACK,
            )),
            PairKind::ProductNorm => checks.push(CheckReport::at_least(
                "product_norm_decay",
                -exponent,
                6.0 - DECAY_SLACK,
            )),
            _ => {
                let norm: Vec<f64> = times
                    .iter()
                    .zip(&values)
                    .map(|(t, v)| v * t.powi(10) / t.ln())
                    .collect();
                let hi = norm.iter().copied().fold(0.0, f64::max);
                let lo = norm.iter().copied().fold(f64::INFINITY, f64::min);
                checks.push(CheckReport::at_most(
                    "five_thirds_normalized_spread",
                    hi / lo,
                    FIVE_THIRDS_SPREAD,
                ));
            }
        }
    }
    out.write("interactions.csv", &csv.render())?;
    if cfg.interactions.mc_samples > 0 {
        let t = times[0];
        let (lj, lk) = scales(t);
        let mut rows = Vec::new();
        for (i, kind) in PairKind::SCALING.into_iter().enumerate() {
            let b = pair_integral(kind, lj, lk, sep, PairMethod::Bipolar)?;
            let m = pair_integral(
                kind,
                lj,
                lk,
                sep,
                PairMethod::MonteCarlo {
                    samples: cfg.interactions.mc_samples,
                    seed: cfg.seed + i as u64,
                },
            )?;
            let se = m.std_error.unwrap_or(f64::NAN);
            rows.push(McComparison {
                kind,
                t,
                bipolar: b.value,
                monte_carlo: m.value,
                std_error: se,
                z: (b.value - m.value) / se,
            });
        }
        let worst = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
        checks.push(CheckReport::at_most(
            "bipolar_vs_monte_carlo_z",
            worst,
            MC_SIGMAS,
        ));
        out.write_json("interactions_mc.json", &rows)?;
    }
    Ok(checks)
}
