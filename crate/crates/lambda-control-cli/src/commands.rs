//! Subcommand implementations: each one runs a pipeline step, writes its
//! file outputs under the configured output directory, and returns the JSON
//! report printed to stdout.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use lambda_control::bounds::{cost_bracket, h9_bound, pnorm_bounds, CostBracket, ParamBox};
use lambda_control::dynamics::{
    closed_form_sampled, evaluate_cost, integrate, DynamicsError, ExtremalSeed,
};
use lambda_control::sweep::{
    seed_from_angles, stage1_sweep, stage2_sweep, stage3_refine, write_records_csv, SweepConfig,
    SweepRecord, SweepSurface,
};
use lambda_control::zero_occupancy::{
    solve_zero_occupancy, ChosenCase, Parity, SolverError, ZeroOccupancySolution,
};

use crate::config::ProblemConfig;
use crate::CliError;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::validation(format!("output dir {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::validation(format!("writing {}: {e}", path.display())))?;
    Ok(())
}

fn seed_json(seed: &ExtremalSeed) -> Value {
    let p = seed.control_matrix();
    let m = p.matrix();
    let rows: Vec<Vec<[f64; 2]>> = (0..3)
        .map(|i| (0..3).map(|j| [m.e[i][j].re, m.e[i][j].im]).collect())
        .collect();
    json!({
        "p": seed.p(),
        "b": seed.b(),
        "d": seed.d(),
        "h9": seed.h9(),
        "h9_tilde": seed.h9_tilde(),
        "p_norm": seed.p_norm(),
        "P_matrix": rows,
        "u0": seed.initial_control().u,
    })
}

fn solution_json(sol: &ZeroOccupancySolution) -> Value {
    json!({
        "case1": {
            "k": sol.case1.k,
            "m": sol.case1.m,
            "l": sol.case1.l,
            "r_hat_sq": sol.case1.r_hat_sq.map(|r| json!({"num": *r.numer(), "den": *r.denom()})),
            "r2": sol.case1.r_squared,
        },
        "case2": sol.case2.map(|c2| json!({
            "parity": match c2.parity { Parity::Odd => "odd", Parity::Even => "even" },
            "k": c2.k,
            "l": c2.l,
            "a_param": c2.a_param,
            "r2": c2.r_squared,
        })),
        "chosen": match sol.chosen { ChosenCase::Case1 => "case1", ChosenCase::Case2 => "case2" },
        "seed": seed_json(&sol.seed),
        "h9": sol.seed.h9(),
        "J": sol.cost.total,
        "occupancy_integral": sol.cost.occupancy_integral,
        "verification_error": sol.verification_error,
        "proven_tight": sol.proven_tight,
    })
}

/// `zero-occupancy`: the analytic minimum-energy solution plus its
/// closed-form trajectory samples.
pub fn cmd_zero_occupancy(cfg: &ProblemConfig) -> Result<Value, CliError> {
    let sol = solve_zero_occupancy(&cfg.spec)?;
    let report = solution_json(&sol);
    let traj = closed_form_sampled(&cfg.spec.rho0(), &sol.seed, 2000).map_err(solver_dyn)?;
    let mut csv = Vec::new();
    traj.write_csv(&mut csv)
        .map_err(|e| CliError::validation(format!("trajectory csv: {e}")))?;
    write_file(&cfg.output_dir, "zero_occupancy_trajectory.csv", &csv)?;
    write_file(
        &cfg.output_dir,
        "zero_occupancy.json",
        serde_json::to_string_pretty(&report).unwrap().as_bytes(),
    )?;
    Ok(report)
}

fn solver_dyn(e: DynamicsError) -> CliError {
    CliError::from(SolverError::from(e))
}

/// The bounds pipeline: zero-penalty baseline -> cost bracket -> `‖P‖` box
/// -> `|h₉|` cap.  Returns `(bracket, box, report)`.
pub fn compute_bounds(
    cfg: &ProblemConfig,
) -> Result<(CostBracket, ParamBox, Value), CliError> {
    let sol = solve_zero_occupancy(&cfg.spec)?;
    let bracket = cost_bracket(
        sol.cost.total,
        sol.cost.occupancy_integral,
        cfg.gamma0,
        cfg.spec.a(),
    )?;
    let (pnorm_min, pnorm_max) = pnorm_bounds(&bracket, cfg.gamma0, cfg.spec.a());
    let h9_abs_max = h9_bound(
        pnorm_max,
        cfg.gamma0,
        cfg.spec.a(),
        &cfg.spec.rho0(),
        &cfg.spec.rho1(),
    )?;
    let pbox = ParamBox {
        pnorm_min,
        pnorm_max,
        h9_abs_max,
        h9_tilde_abs_max: h9_abs_max / SQRT_2,
    };
    let report = json!({
        "B_L": bracket.lower,
        "B_U": bracket.upper,
        "B_U_loose": bracket.upper_loose,
        "gamma0": bracket.gamma0,
        "baseline_occupancy_integral": sol.cost.occupancy_integral,
        "pnorm_min": pbox.pnorm_min,
        "pnorm_max": pbox.pnorm_max,
        "h9_abs_max": pbox.h9_abs_max,
        "h9_tilde_abs_max": pbox.h9_tilde_abs_max,
        "note": "B_U is evaluated from its defining expression B_L + gamma0 * \
                 (baseline occupancy integral); the 6.4692 sometimes quoted for \
                 the benchmark transfer lies below B_L = 3*pi^2/4 and is \
                 inconsistent with the bracket, so it is treated as an erratum \
                 and never used.",
    });
    Ok((bracket, pbox, report))
}

/// `bounds`: print and persist the search box.
pub fn cmd_bounds(cfg: &ProblemConfig) -> Result<Value, CliError> {
    let (_, _, report) = compute_bounds(cfg)?;
    write_file(
        &cfg.output_dir,
        "bounds.json",
        serde_json::to_string_pretty(&report).unwrap().as_bytes(),
    )?;
    Ok(report)
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum SweepStage {
    One,
    Two,
    Three,
    All,
}

fn surface_csv(cfg: &ProblemConfig, name: &str, surface: &SweepSurface) -> Result<(), CliError> {
    let mut buf = Vec::new();
    surface
        .write_csv(&mut buf)
        .map_err(|e| CliError::validation(format!("surface csv: {e}")))?;
    write_file(&cfg.output_dir, name, &buf)
}

fn surface_json(surface: &SweepSurface) -> Value {
    let (at, err) = surface.min_sample();
    json!({
        "axis": surface.axis.label(),
        "samples": surface.samples.len(),
        "argmin": at,
        "min_error_sq": err,
    })
}

fn record_json(rec: &SweepRecord) -> Value {
    let u0 = seed_from_angles(rec.pnorm, rec.theta1, rec.theta2, SQRT_2 * rec.h9_tilde)
        .map(|s| s.initial_control().u)
        .unwrap_or([f64::NAN; 4]);
    json!({
        "h9_tilde": rec.h9_tilde,
        "pnorm": rec.pnorm,
        "theta1": rec.theta1,
        "theta2": rec.theta2,
        "final_error_sq": rec.final_error_sq,
        "cost": rec.cost,
        "u0": u0,
        "u0_magnitudes": [u0[0].abs(), u0[1].abs(), u0[2].abs(), u0[3].abs()],
    })
}

/// `sweep`: run the requested stage(s).  `all` chains 1 → 2 → 3 with
/// automatic box narrowing around each stage's argmin; `pinned_boxes`
/// (used by `reproduce-paper`) skips the narrowing and uses the benchmark
/// windows `[3.18, 3.3] × [3.7839, 3.8539]`.
pub fn cmd_sweep(
    cfg: &ProblemConfig,
    stage: SweepStage,
    tail: bool,
    pinned_boxes: bool,
) -> Result<Value, CliError> {
    let (_, pbox, bounds_report) = compute_bounds(cfg)?;
    let (plo, phi) = (pbox.pnorm_min, pbox.pnorm_max);
    let mut report = json!({ "bounds": bounds_report });

    let stage1_cfg = cfg
        .sweep
        .apply(SweepConfig::stage1(cfg.gamma0, plo, phi));

    if tail {
        let mut tail_cfg = stage1_cfg;
        tail_cfg.h9_tilde_range = (80.0, cfg.sweep.tail_h9_max.unwrap_or(pbox.h9_tilde_abs_max));
        tail_cfg.h9_step = cfg.sweep.tail_h9_step.unwrap_or(50.0);
        tail_cfg.theta_steps = cfg.sweep.tail_theta_steps.unwrap_or(4);
        let surface = stage1_sweep(&cfg.spec, &tail_cfg)?;
        surface_csv(cfg, "tail_surface.csv", &surface)?;
        report["tail"] = surface_json(&surface);
    }

    let run1 = matches!(stage, SweepStage::One | SweepStage::All);
    let run2 = matches!(stage, SweepStage::Two | SweepStage::All);
    let run3 = matches!(stage, SweepStage::Three | SweepStage::All);

    let mut h9_window = (3.18, 3.30);
    if run1 {
        eprintln!(
            "stage 1: {} x {} x {} x {} grid points",
            stage1_cfg.h9_tilde_grid().len(),
            stage1_cfg.pnorm_grid().len(),
            stage1_cfg.theta1_grid().len(),
            stage1_cfg.theta2_grid().len()
        );
        let surface = stage1_sweep(&cfg.spec, &stage1_cfg)?;
        surface_csv(cfg, "stage1_surface.csv", &surface)?;
        report["stage1"] = surface_json(&surface);
        if !pinned_boxes {
            h9_window = surface.narrowed_interval(
                cfg.sweep.narrow_h9_width.unwrap_or(0.12),
                stage1_cfg.h9_tilde_range,
            );
        }
    }

    let chained = matches!(stage, SweepStage::All);
    let mut pnorm_window = (3.7839, 3.8539);
    if run2 {
        let stage2_cfg = cfg
            .sweep
            .apply_with_ranges(SweepConfig::stage2(cfg.gamma0, h9_window, plo, phi), !chained);
        eprintln!(
            "stage 2: {} x {} x {} x {} grid points",
            stage2_cfg.h9_tilde_grid().len(),
            stage2_cfg.pnorm_grid().len(),
            stage2_cfg.theta1_grid().len(),
            stage2_cfg.theta2_grid().len()
        );
        let surface = stage2_sweep(&cfg.spec, &stage2_cfg)?;
        surface_csv(cfg, "stage2_surface.csv", &surface)?;
        report["stage2"] = surface_json(&surface);
        if !pinned_boxes {
            pnorm_window = surface.narrowed_interval(
                cfg.sweep.narrow_pnorm_width.unwrap_or(0.07),
                stage2_cfg.pnorm_range,
            );
        }
    }

    if run3 {
        let mut stage3_cfg = SweepConfig::stage3(cfg.gamma0);
        stage3_cfg.h9_tilde_range = h9_window;
        stage3_cfg.pnorm_range = pnorm_window;
        let stage3_cfg = cfg.sweep.apply_with_ranges(stage3_cfg, !chained);
        eprintln!(
            "stage 3: {} x {} x {} x {} grid points",
            stage3_cfg.h9_tilde_grid().len(),
            stage3_cfg.pnorm_grid().len(),
            stage3_cfg.theta1_grid().len(),
            stage3_cfg.theta2_grid().len()
        );
        let (best, all) = stage3_refine(&cfg.spec, &stage3_cfg)?;
        let mut buf = Vec::new();
        write_records_csv(&all, &mut buf)
            .map_err(|e| CliError::validation(format!("records csv: {e}")))?;
        write_file(&cfg.output_dir, "stage3_candidates.csv", &buf)?;
        report["stage3"] = json!({
            "candidates": all.len(),
            "best": record_json(&best),
        });
        write_file(
            &cfg.output_dir,
            "best.json",
            serde_json::to_string_pretty(&record_json(&best)).unwrap().as_bytes(),
        )?;
    }

    write_file(
        &cfg.output_dir,
        "sweep.json",
        serde_json::to_string_pretty(&report).unwrap().as_bytes(),
    )?;
    Ok(report)
}

/// `integrate`: time series for an explicit seed (the stage-3 best, a
/// solver output, or anything else).
pub fn cmd_integrate(cfg: &ProblemConfig, seed: &ExtremalSeed) -> Result<Value, CliError> {
    let traj = integrate(&cfg.spec.rho0(), seed, cfg.gamma0, cfg.integrator_steps)
        .map_err(solver_dyn)?;
    let cost = evaluate_cost(&traj, cfg.gamma0).map_err(solver_dyn)?;
    let mut csv = Vec::new();
    traj.write_csv(&mut csv)
        .map_err(|e| CliError::validation(format!("trajectory csv: {e}")))?;
    write_file(&cfg.output_dir, "trajectory.csv", &csv)?;
    let target = cfg.spec.rho1();
    let err = (*traj.final_rho().matrix() - *target.matrix()).frobenius_norm();
    let ham = traj.hamiltonian();
    let ham0 = ham[0];
    let ham_drift = ham.iter().map(|h| (h - ham0).abs()).fold(0.0, f64::max);
    let report = json!({
        "seed": seed_json(seed),
        "gamma0": cfg.gamma0,
        "steps": cfg.integrator_steps,
        "cost": cost,
        "final_error": err,
        "final_error_sq": err * err,
        "hamiltonian_drift": ham_drift,
        "final_rho_coords": traj.final_rho().coords(),
    });
    write_file(
        &cfg.output_dir,
        "integrate.json",
        serde_json::to_string_pretty(&report).unwrap().as_bytes(),
    )?;
    Ok(report)
}

/// `reproduce-paper`: the full benchmark pipeline with the published
/// windows pinned: zero-occupancy → bounds → staged sweep → integrate the
/// best candidate.
pub fn cmd_reproduce(cfg: &ProblemConfig, tail: bool) -> Result<Value, CliError> {
    eprintln!("[1/4] zero-occupancy analytic solve");
    let zero = cmd_zero_occupancy(cfg)?;
    eprintln!("[2/4] analytic bounds");
    let bounds = cmd_bounds(cfg)?;
    eprintln!("[3/4] staged sweep (this is the long step)");
    let sweep = cmd_sweep(cfg, SweepStage::All, tail, true)?;
    eprintln!("[4/4] integrating the best candidate");
    let best = &sweep["stage3"]["best"];
    let seed = seed_from_angles(
        best["pnorm"].as_f64().unwrap(),
        best["theta1"].as_f64().unwrap(),
        best["theta2"].as_f64().unwrap(),
        SQRT_2 * best["h9_tilde"].as_f64().unwrap(),
    )?;
    let integ = cmd_integrate(cfg, &seed)?;
    let report = json!({
        "zero_occupancy": zero,
        "bounds": bounds,
        "sweep": sweep,
        "integrate": integ,
    });
    write_file(
        &cfg.output_dir,
        "reproduction.json",
        serde_json::to_string_pretty(&report).unwrap().as_bytes(),
    )?;
    Ok(report)
}
