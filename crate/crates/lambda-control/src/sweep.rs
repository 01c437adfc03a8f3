//! Staged deterministic grid search for the occupancy-penalized problem.
//!
//! The seed matrix for a fixed norm is parametrized by two angles,
//!
//! ```text
//! R = ‖P‖/√2,  p = R cos θ₁,  b = R sin θ₁ cos θ₂,  d = R sin θ₁ sin θ₂,
//! θ₁ ∈ [0, π/2], θ₂ ∈ [0, π],
//! ```
//!
//! which enforces the symmetry reductions `p, d ≥ 0` (and `u₄(0) = 0`) by
//! construction.  The search sweeps `(h̃₉, ‖P‖, θ₁, θ₂)` inside the analytic
//! box from [`crate::bounds`]:
//!
//! 1. **Stage 1** scans the full `h̃₉` range and records the minimum final
//!    squared error per `h̃₉` value (a 1-d surface with ceiling
//!    `‖ρ₀-ρ₁‖²`); the transfer window shows up as a deep minimum.
//! 2. **Stage 2** restricts `h̃₉` to the window around that minimum and
//!    produces the same surface over `‖P‖`, narrowing its interval.
//! 3. **Stage 3** collects every grid point whose final squared error at
//!    `t = 1` falls below a threshold, re-verifies the candidates at higher
//!    step count, and ranks them by the cost
//!    `J = ½‖P‖² + 2γ₀ ∫⟨G₁,ρ⟩dt`.
//!
//! Grids are generated as `lo + i·step` (no accumulation) and every grid
//! point is an independent task; the parallel map preserves index order, so
//! results are bit-identical for any worker count.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{fmt_f64, integrate_final_state, ControlField, DynamicsError, ExtremalSeed};
use crate::zero_occupancy::TransferSpec;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("empty grid: {axis} range [{lo}, {hi}] with step {step}")]
    EmptyGrid { axis: &'static str, lo: f64, hi: f64, step: f64 },
    #[error("{name} = {value} must be positive")]
    NonPositive { name: &'static str, value: f64 },
    #[error("angle {name} = {value} outside its reduced domain [0, {max}]")]
    AngleOutOfRange { name: &'static str, value: f64, max: f64 },
    #[error("pnorm = {0} must be nonnegative")]
    NegativePNorm(f64),
    #[error(
        "no grid point reached final squared error below {threshold:.3e}; \
         loosen the threshold or refine the grid"
    )]
    NoCandidates { threshold: f64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Grid-search configuration.  `theta_steps` is the number of subdivisions
/// of `[0, π/2]` for `θ₁`; `θ₂` uses twice as many on `[0, π]` so both axes
/// share the angular step `π/(2·theta_steps)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepConfig {
    pub gamma0: f64,
    pub h9_tilde_range: (f64, f64),
    pub h9_step: f64,
    pub pnorm_range: (f64, f64),
    pub pnorm_step: f64,
    pub theta_steps: usize,
    pub error_threshold: f64,
    /// RK4 steps for error-only evaluation.
    pub integrator_steps: usize,
    /// RK4 steps for candidate re-verification and cost evaluation.
    pub verify_steps: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        for (axis, (lo, hi), step) in [
            ("h9_tilde", self.h9_tilde_range, self.h9_step),
            ("pnorm", self.pnorm_range, self.pnorm_step),
        ] {
            if step <= 0.0 {
                return Err(SweepError::NonPositive { name: "step", value: step });
            }
            if hi < lo {
                return Err(SweepError::EmptyGrid { axis, lo, hi, step });
            }
        }
        if self.error_threshold <= 0.0 {
            return Err(SweepError::NonPositive {
                name: "error_threshold",
                value: self.error_threshold,
            });
        }
        for (name, v) in [
            ("theta_steps", self.theta_steps),
            ("integrator_steps", self.integrator_steps),
            ("verify_steps", self.verify_steps),
        ] {
            if v == 0 {
                return Err(SweepError::NonPositive { name, value: 0.0 });
            }
        }
        Ok(())
    }

    /// Stage-1 defaults: the full `h̃₉ ∈ [0, 80]` scan at `Δ_h = 0.03`, the
    /// analytic `‖P‖` box in 100 steps, and a coarse angle grid.
    pub fn stage1(gamma0: f64, pnorm_lo: f64, pnorm_hi: f64) -> SweepConfig {
        SweepConfig {
            gamma0,
            h9_tilde_range: (0.0, 80.0),
            h9_step: 0.03,
            pnorm_range: (pnorm_lo, pnorm_hi),
            pnorm_step: (pnorm_hi - pnorm_lo) / 100.0,
            theta_steps: 10,
            error_threshold: 5e-5,
            integrator_steps: 10_000,
            verify_steps: 100_000,
        }
    }

    /// Stage-2 defaults: `h̃₉` narrowed to a window, full `‖P‖` box at
    /// `Δ_P = 0.01`, fine angles (`π/100`).
    pub fn stage2(gamma0: f64, h9_window: (f64, f64), pnorm_lo: f64, pnorm_hi: f64) -> SweepConfig {
        SweepConfig {
            gamma0,
            h9_tilde_range: h9_window,
            h9_step: 0.01,
            pnorm_range: (pnorm_lo, pnorm_hi),
            pnorm_step: 0.01,
            theta_steps: 50,
            error_threshold: 5e-5,
            integrator_steps: 10_000,
            verify_steps: 100_000,
        }
    }

    /// Stage-3 defaults: the benchmark final box
    /// `[3.18, 3.3] × [3.7839, 3.8539]` at steps `0.01/0.01` and `π/100`
    /// angles with threshold `5e-5`.
    pub fn stage3(gamma0: f64) -> SweepConfig {
        SweepConfig {
            gamma0,
            h9_tilde_range: (3.18, 3.30),
            h9_step: 0.01,
            pnorm_range: (3.7839, 3.8539),
            pnorm_step: 0.01,
            theta_steps: 50,
            error_threshold: 5e-5,
            integrator_steps: 10_000,
            verify_steps: 100_000,
        }
    }

    pub fn h9_tilde_grid(&self) -> Vec<f64> {
        grid(self.h9_tilde_range.0, self.h9_tilde_range.1, self.h9_step)
    }

    pub fn pnorm_grid(&self) -> Vec<f64> {
        grid(self.pnorm_range.0, self.pnorm_range.1, self.pnorm_step)
    }

    pub fn theta1_grid(&self) -> Vec<f64> {
        let step = FRAC_PI_2 / self.theta_steps as f64;
        (0..=self.theta_steps).map(|i| i as f64 * step).collect()
    }

    pub fn theta2_grid(&self) -> Vec<f64> {
        let step = FRAC_PI_2 / self.theta_steps as f64;
        (0..=2 * self.theta_steps).map(|i| i as f64 * step).collect()
    }
}

/// Closed-interval grid `lo + i·step`, inclusive of `hi` when on-grid.
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// One grid point: parameters, terminal squared error and (for candidates)
/// the cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub h9_tilde: f64,
    pub pnorm: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// `‖ρ(1) - ρ₁‖²`; `+∞` for non-finite trajectories.
    pub final_error_sq: f64,
    /// `½‖P‖² + 2γ₀∫⟨G₁,ρ⟩dt`; only evaluated for sub-threshold candidates.
    pub cost: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceAxis {
    H9Tilde,
    PNorm,
}

impl SurfaceAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SurfaceAxis::H9Tilde => "h9_tilde",
            SurfaceAxis::PNorm => "pnorm",
        }
    }
}

/// Minimum final squared error as a function of one swept axis.
#[derive(Debug, Clone)]
pub struct SweepSurface {
    pub axis: SurfaceAxis,
    /// `(axis_value, min_error_sq)`, axis values ascending.
    pub samples: Vec<(f64, f64)>,
}

impl SweepSurface {
    pub fn min_sample(&self) -> (f64, f64) {
        self.samples
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
            .expect("surface is never empty")
    }

    /// `[argmin - width/2, argmin + width/2]`, clamped to `limits`.
    pub fn narrowed_interval(&self, width: f64, limits: (f64, f64)) -> (f64, f64) {
        let (at, _) = self.min_sample();
        ((at - width / 2.0).max(limits.0), (at + width / 2.0).min(limits.1))
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "axis_value,min_error_sq")?;
        for (x, e) in &self.samples {
            writeln!(w, "{},{}", fmt_f64(*x), fmt_f64(*e))?;
        }
        Ok(())
    }
}

/// Seed from the two-angle parametrization at fixed norm; guarantees
/// `‖P‖ = pnorm` exactly and the `p ≥ 0`, `d ≥ 0`, `u₄(0) = 0` reductions.
pub fn seed_from_angles(
    pnorm: f64,
    theta1: f64,
    theta2: f64,
    h9: f64,
) -> Result<ExtremalSeed, SweepError> {
    if pnorm < 0.0 {
        return Err(SweepError::NegativePNorm(pnorm));
    }
    if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta1) {
        return Err(SweepError::AngleOutOfRange { name: "theta1", value: theta1, max: FRAC_PI_2 });
    }
    if !(0.0..=PI + 1e-12).contains(&theta2) {
        return Err(SweepError::AngleOutOfRange { name: "theta2", value: theta2, max: PI });
    }
    let r = pnorm / SQRT_2;
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    Ok(ExtremalSeed::new(r * c1, r * s1 * c2, r * s1 * s2, h9)?)
}

#[inline]
fn control_at(pnorm: f64, theta1: f64, theta2: f64) -> ControlField {
    let r = pnorm / SQRT_2;
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    // u(0) = (0, -sqrt2 p, sqrt2 d, -sqrt2 b)
    ControlField::new([
        0.0,
        -SQRT_2 * r * c1,
        SQRT_2 * r * s1 * s2,
        -SQRT_2 * r * s1 * c2,
    ])
}

struct Target {
    rho0: crate::dynamics::DensityMatrix3,
    rho1_coords: [f64; 9],
}

impl Target {
    fn of(spec: &TransferSpec) -> Target {
        Target { rho0: spec.rho0(), rho1_coords: spec.rho1().coords() }
    }

    #[inline]
    fn error_sq(&self, cfg: &SweepConfig, h9t: f64, pnorm: f64, t1: f64, t2: f64) -> f64 {
        let u0 = control_at(pnorm, t1, t2);
        let fin =
            integrate_final_state(&self.rho0, &u0, SQRT_2 * h9t, cfg.gamma0, cfg.integrator_steps);
        if fin.is_finite() {
            fin.error_sq_to(&self.rho1_coords)
        } else {
            f64::INFINITY
        }
    }
}

/// Stage 1: the minimum-error surface over `h̃₉` (the full-range scan whose
/// ceiling is `‖ρ₀-ρ₁‖²` and whose deep minimum locates the transfer
/// window).
pub fn stage1_sweep(spec: &TransferSpec, cfg: &SweepConfig) -> Result<SweepSurface, SweepError> {
    cfg.validate()?;
    let target = Target::of(spec);
    let h9s = cfg.h9_tilde_grid();
    let pnorms = cfg.pnorm_grid();
    let t1s = cfg.theta1_grid();
    let t2s = cfg.theta2_grid();
    let samples: Vec<(f64, f64)> = h9s
        .par_iter()
        .map(|&h9t| {
            let mut best = f64::INFINITY;
            for &pn in &pnorms {
                for &t1 in &t1s {
                    for &t2 in &t2s {
                        let e = target.error_sq(cfg, h9t, pn, t1, t2);
                        if e < best {
                            best = e;
                        }
                    }
                }
            }
            (h9t, best)
        })
        .collect();
    Ok(SweepSurface { axis: SurfaceAxis::H9Tilde, samples })
}

/// Stage 2: the minimum-error surface over `‖P‖` for a narrowed `h̃₉`
/// window.
pub fn stage2_sweep(spec: &TransferSpec, cfg: &SweepConfig) -> Result<SweepSurface, SweepError> {
    cfg.validate()?;
    let target = Target::of(spec);
    let h9s = cfg.h9_tilde_grid();
    let pnorms = cfg.pnorm_grid();
    let t1s = cfg.theta1_grid();
    let t2s = cfg.theta2_grid();
    let samples: Vec<(f64, f64)> = pnorms
        .par_iter()
        .map(|&pn| {
            let mut best = f64::INFINITY;
            for &h9t in &h9s {
                for &t1 in &t1s {
                    for &t2 in &t2s {
                        let e = target.error_sq(cfg, h9t, pn, t1, t2);
                        if e < best {
                            best = e;
                        }
                    }
                }
            }
            (pn, best)
        })
        .collect();
    Ok(SweepSurface { axis: SurfaceAxis::PNorm, samples })
}

/// Stage 3: collect every sub-threshold record, re-verify candidates at
/// `verify_steps`, rank by cost.  Returns `(best, all_candidates)` with the
/// candidate list sorted by ascending cost (ties in grid order).
pub fn stage3_refine(
    spec: &TransferSpec,
    cfg: &SweepConfig,
) -> Result<(SweepRecord, Vec<SweepRecord>), SweepError> {
    cfg.validate()?;
    let target = Target::of(spec);
    let h9s = cfg.h9_tilde_grid();
    let pnorms = cfg.pnorm_grid();
    let t1s = cfg.theta1_grid();
    let t2s = cfg.theta2_grid();

    // outer tasks: (h9, pnorm) pairs in lexicographic order
    let pairs: Vec<(f64, f64)> = h9s
        .iter()
        .flat_map(|&h| pnorms.iter().map(move |&p| (h, p)))
        .collect();
    let candidate_lists: Vec<Vec<SweepRecord>> = pairs
        .par_iter()
        .map(|&(h9t, pn)| {
            let mut out = Vec::new();
            for &t1 in &t1s {
                for &t2 in &t2s {
                    let e = target.error_sq(cfg, h9t, pn, t1, t2);
                    if e < cfg.error_threshold {
                        out.push(SweepRecord {
                            h9_tilde: h9t,
                            pnorm: pn,
                            theta1: t1,
                            theta2: t2,
                            final_error_sq: e,
                            cost: None,
                        });
                    }
                }
            }
            out
        })
        .collect();

    // re-verify candidates at the high step count and attach costs
    let mut candidates: Vec<SweepRecord> = candidate_lists
        .into_iter()
        .flatten()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|rec| {
            let u0 = control_at(rec.pnorm, rec.theta1, rec.theta2);
            let fin = integrate_final_state(
                &target.rho0,
                &u0,
                SQRT_2 * rec.h9_tilde,
                cfg.gamma0,
                cfg.verify_steps,
            );
            let e = if fin.is_finite() {
                fin.error_sq_to(&target.rho1_coords)
            } else {
                f64::INFINITY
            };
            let cost = 0.5 * rec.pnorm * rec.pnorm
                + 2.0 * cfg.gamma0 * fin.occupancy_integral;
            SweepRecord { final_error_sq: e, cost: Some(cost), ..*rec }
        })
        .filter(|rec| rec.final_error_sq < cfg.error_threshold)
        .collect();
    candidates.sort_by(|a, b| {
        a.cost
            .unwrap_or(f64::INFINITY)
            .total_cmp(&b.cost.unwrap_or(f64::INFINITY))
    });
    let best = *candidates
        .first()
        .ok_or(SweepError::NoCandidates { threshold: cfg.error_threshold })?;
    Ok((best, candidates))
}

/// Record CSV: `h9_tilde,pnorm,theta1,theta2,final_error_sq,cost`, the cost
/// field left blank above threshold.
pub fn write_records_csv<W: Write>(records: &[SweepRecord], w: &mut W) -> io::Result<()> {
    writeln!(w, "h9_tilde,pnorm,theta1,theta2,final_error_sq,cost")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(r.h9_tilde),
            fmt_f64(r.pnorm),
            fmt_f64(r.theta1),
            fmt_f64(r.theta2),
            fmt_f64(r.final_error_sq),
            r.cost.map(fmt_f64).unwrap_or_default(),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn tiny_cfg() -> SweepConfig {
        SweepConfig {
            gamma0: 0.0,
            h9_tilde_range: (PI, PI),
            h9_step: 0.01,
            pnorm_range: ((1.5 * PI * PI).sqrt(), (1.5 * PI * PI).sqrt()),
            pnorm_step: 0.01,
            theta_steps: 4,
            error_threshold: 1e-15,
            integrator_steps: 10_000,
            verify_steps: 20_000,
        }
    }

    #[test]
    fn grid_semantics() {
        let gv = grid(3.7839, 3.8539, 0.01);
        assert_eq!(gv.len(), 8);
        assert_eq!(gv[0], 3.7839);
        assert_eq!(gv[7], 3.7839 + 7.0 * 0.01);
        let g2 = grid(0.0, 80.0, 0.03);
        assert_eq!(g2.len(), 2667);
        assert_eq!(g2[2666], 2666.0 * 0.03);
        assert_eq!(grid(1.0, 1.0, 0.5), vec![1.0]);
    }

    #[test]
    fn config_validation() {
        let mut cfg = tiny_cfg();
        cfg.h9_tilde_range = (2.0, 1.0);
        assert!(matches!(cfg.validate(), Err(SweepError::EmptyGrid { .. })));
        let mut cfg = tiny_cfg();
        cfg.error_threshold = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = tiny_cfg();
        cfg.theta_steps = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn angles_parametrize_the_reduced_family() {
        // theta1 = 0: P real with only the (1,2) pair, d = 0, u6(0) = 0
        let s = seed_from_angles(2.0, 0.0, 1.0, 0.0).unwrap();
        assert!((s.p() - 2.0 / SQRT_2).abs() < 1e-15);
        assert_eq!(s.b(), 0.0);
        assert_eq!(s.d(), 0.0);
        assert_eq!(s.initial_control().u[2], 0.0);

        // norm preservation for random angles
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let pn = rng.gen_range(0.0..6.0);
            let t1 = rng.gen_range(0.0..FRAC_PI_2);
            let t2 = rng.gen_range(0.0..PI);
            let s = seed_from_angles(pn, t1, t2, 1.0).unwrap();
            assert!((s.p_norm() - pn).abs() < 1e-12);
            assert!(s.p() >= 0.0 && s.d() >= 0.0);
        }

        // the zero-penalty optimum sits at (theta1, theta2) = (pi/4, pi/2)
        let v = 3f64.sqrt() * PI / (2.0 * SQRT_2);
        let s = seed_from_angles((1.5 * PI * PI).sqrt(), PI / 4.0, PI / 2.0, SQRT_2 * PI).unwrap();
        assert!((s.p() - v).abs() < 1e-12);
        assert!(s.b().abs() < 1e-12);
        assert!((s.d() - v).abs() < 1e-12);

        assert!(seed_from_angles(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(seed_from_angles(1.0, 2.0, 0.0, 0.0).is_err());
        assert!(seed_from_angles(1.0, 0.0, 4.0, 0.0).is_err());
    }

    #[test]
    fn stage3_finds_the_zero_penalty_optimum_on_grid() {
        let spec = TransferSpec::case_study();
        let (best, all) = stage3_refine(&spec, &tiny_cfg()).unwrap();
        assert!(!all.is_empty());
        assert!((best.h9_tilde - PI).abs() < 1e-12);
        assert!((best.theta1 - PI / 4.0).abs() < 1e-12);
        assert!((best.theta2 - PI / 2.0).abs() < 1e-12);
        assert!((best.cost.unwrap() - 0.75 * PI * PI).abs() < 1e-6);
        assert!(best.final_error_sq < 1e-15);
    }

    #[test]
    fn stage3_empty_candidates_is_an_error() {
        let spec = TransferSpec::case_study();
        let mut cfg = tiny_cfg();
        cfg.h9_tilde_range = (0.1, 0.1); // far from any transfer
        cfg.error_threshold = 1e-12;
        assert!(matches!(
            stage3_refine(&spec, &cfg),
            Err(SweepError::NoCandidates { .. })
        ));
    }

    #[test]
    fn infinite_threshold_keeps_whole_grid() {
        let spec = TransferSpec::case_study();
        let mut cfg = tiny_cfg();
        cfg.error_threshold = f64::INFINITY;
        cfg.theta_steps = 2;
        let (_, all) = stage3_refine(&spec, &cfg).unwrap();
        assert_eq!(all.len(), 1 * 1 * 3 * 5);
    }

    #[test]
    fn surfaces_are_sorted_and_capped() {
        let spec = TransferSpec::case_study();
        let mut cfg = tiny_cfg();
        cfg.h9_tilde_range = (60.0, 62.0);
        cfg.h9_step = 1.0;
        cfg.theta_steps = 2;
        cfg.integrator_steps = 4000;
        let s = stage1_sweep(&spec, &cfg).unwrap();
        assert_eq!(s.samples.len(), 3);
        assert!(s.samples.windows(2).all(|w| w[0].0 < w[1].0));
        // far from the transfer window the error stays near the ceiling 1/9
        for (_, e) in &s.samples {
            assert!(*e > 0.05, "err {e}");
        }
    }

    #[test]
    fn surface_narrowing() {
        let surf = SweepSurface {
            axis: SurfaceAxis::H9Tilde,
            samples: vec![(1.0, 0.5), (2.0, 0.1), (3.0, 0.4)],
        };
        assert_eq!(surf.min_sample(), (2.0, 0.1));
        assert_eq!(surf.narrowed_interval(1.0, (0.0, 10.0)), (1.5, 2.5));
        assert_eq!(surf.narrowed_interval(10.0, (1.0, 3.0)), (1.0, 3.0));
    }

    #[test]
    fn determinism_across_worker_counts() {
        let spec = TransferSpec::case_study();
        let mut cfg = tiny_cfg();
        cfg.h9_tilde_range = (3.1, 3.2);
        cfg.h9_step = 0.05;
        cfg.pnorm_range = (3.8, 3.86);
        cfg.pnorm_step = 0.03;
        cfg.theta_steps = 3;
        cfg.integrator_steps = 2000;
        cfg.verify_steps = 4000;
        cfg.error_threshold = f64::INFINITY;
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    let (_, all) = stage3_refine(&spec, &cfg).unwrap();
                    let surf = stage1_sweep(&spec, &cfg).unwrap();
                    (all, surf.samples)
                })
        };
        let (a1, s1) = run(1);
        let (a2, s2) = run(2);
        let (a3, s3) = run(4);
        assert_eq!(a1, a2);
        assert_eq!(a1, a3);
        assert_eq!(s1, s2);
        assert_eq!(s1, s3);
    }

    #[test]
    fn csv_formats() {
        let recs = vec![
            SweepRecord {
                h9_tilde: 3.25,
                pnorm: 3.8,
                theta1: 0.5,
                theta2: 1.0,
                final_error_sq: 1e-6,
                cost: Some(7.6),
            },
            SweepRecord {
                h9_tilde: 3.26,
                pnorm: 3.8,
                theta1: 0.5,
                theta2: 1.0,
                final_error_sq: 1e-3,
                cost: None,
            },
        ];
        let mut buf = Vec::new();
        write_records_csv(&recs, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "h9_tilde,pnorm,theta1,theta2,final_error_sq,cost");
        assert!(lines[1].ends_with(&fmt_f64(7.6)));
        assert!(lines[2].ends_with(','));
    }
}
