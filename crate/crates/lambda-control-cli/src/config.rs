//! TOML run configuration.  Unknown keys are hard errors so a typo in a
//! sweep range cannot silently fall back to defaults.

use serde::Deserialize;
use std::path::PathBuf;

use lambda_control::sweep::SweepConfig;
use lambda_control::zero_occupancy::{SolverError, TransferSpec};

/// Top-level configuration; every field optional, defaults reproduce the
/// Hadamard-like benchmark transfer at `γ₀ = 1`.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub n: Option<f64>,
    pub gamma0: Option<f64>,
    pub integrator_steps: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub sweep: Option<SweepFileConfig>,
}

/// `[sweep]` section: overrides applied on top of the per-stage defaults.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepFileConfig {
    pub h9_tilde_range: Option<[f64; 2]>,
    pub h9_step: Option<f64>,
    pub pnorm_range: Option<[f64; 2]>,
    pub pnorm_step: Option<f64>,
    pub theta_steps: Option<usize>,
    pub error_threshold: Option<f64>,
    pub integrator_steps: Option<usize>,
    pub verify_steps: Option<usize>,
    /// Width of the `h̃₉` window handed from stage 1 to stage 2 in `all`
    /// mode.
    pub narrow_h9_width: Option<f64>,
    /// Width of the `‖P‖` interval handed from stage 2 to stage 3.
    pub narrow_pnorm_width: Option<f64>,
    /// Upper end of the optional coarse tail scan (`--tail-sweep`).
    pub tail_h9_max: Option<f64>,
    pub tail_h9_step: Option<f64>,
    pub tail_theta_steps: Option<usize>,
}

impl SweepFileConfig {
    /// Applies the file overrides onto a stage-default configuration.  In
    /// chained (`all`) mode the range overrides are skipped for stages 2
    /// and 3 so that the narrowing handed down from the previous stage
    /// stays in effect.
    pub fn apply(&self, cfg: SweepConfig) -> SweepConfig {
        self.apply_with_ranges(cfg, true)
    }

    pub fn apply_with_ranges(&self, mut cfg: SweepConfig, include_ranges: bool) -> SweepConfig {
        if include_ranges {
            if let Some(r) = self.h9_tilde_range {
                cfg.h9_tilde_range = (r[0], r[1]);
            }
            if let Some(r) = self.pnorm_range {
                cfg.pnorm_range = (r[0], r[1]);
            }
        }
        if let Some(v) = self.h9_step {
            cfg.h9_step = v;
        }
        if let Some(v) = self.pnorm_step {
            cfg.pnorm_step = v;
        }
        if let Some(v) = self.theta_steps {
            cfg.theta_steps = v;
        }
        if let Some(v) = self.error_threshold {
            cfg.error_threshold = v;
        }
        if let Some(v) = self.integrator_steps {
            cfg.integrator_steps = v;
        }
        if let Some(v) = self.verify_steps {
            cfg.verify_steps = v;
        }
        cfg
    }
}

/// Resolved problem configuration.
#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub spec: TransferSpec,
    pub gamma0: f64,
    pub integrator_steps: usize,
    pub output_dir: PathBuf,
    pub sweep: SweepFileConfig,
    pub workers: Option<usize>,
}

impl ProblemConfig {
    pub fn resolve(file: FileConfig) -> Result<ProblemConfig, SolverError> {
        let a = file.a.unwrap_or(2.0 / 3.0);
        let b = file.b.unwrap_or(0.5);
        let n = file.n.unwrap_or(-1.0 / 6.0);
        let spec = TransferSpec::new(a, b, n)?;
        Ok(ProblemConfig {
            spec,
            gamma0: file.gamma0.unwrap_or(1.0),
            integrator_steps: file.integrator_steps.unwrap_or(100_000),
            output_dir: file.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            sweep: file.sweep.unwrap_or_default(),
            workers: file.workers,
        })
    }
}
