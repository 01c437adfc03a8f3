//! State/control dynamics of the Lambda system, the reduced extremal ODE
//! system, cost evaluation, and a fixed-step RK4 integrator with a
//! closed-form cross-check.
//!
//! The reduced extremal system on the unit interval is
//!
//! ```text
//! ρ̇ = [U, ρ],                       ρ(0) = ρ₀,
//! U̇ = h₉ [iG₉, U] + γ₀ [G₁, ρ],     U(0) = P,
//! ```
//!
//! with `U` confined to `span{iG₄..iG₇}` and `P` reduced by symmetry to
//!
//! ```text
//! P = [[0, p, b+id], [-p, 0, 0], [-b+id, 0, 0]],   p ≥ 0, d ≥ 0.
//! ```
//!
//! Along any solution `Ĥ = ½‖U‖² - γ₀⟨G₁,ρ⟩` is a first integral (so
//! `½‖U(t)‖² = ½‖P‖² + γ₀⟨G₁,ρ(t)⟩`), which both stabilizes and
//! cross-checks the integration.  For `γ₀ = 0` the solution is known in
//! closed form: with `A = i h₉ G₉`,
//!
//! ```text
//! U(t) = e^{At} P e^{-At},
//! ρ(t) = e^{At} e^{(-A+P)t} ρ₀ e^{(A-P)t} e^{-At}.
//! ```
//!
//! Problems on a horizon `[0, T]` reduce to the unit interval through
//! `J(1, γ₀) = T · J(T, γ₀/T²)`; see [`cost_on_horizon`].

use std::f64::consts::SQRT_2;
use std::io::{self, Write};

use thiserror::Error;

use crate::su3::{
    commutator, expm, g, Hermitian3, Mat3, SkewHermitian3, Su3Error, C64,
};

/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Positivity slack for density-matrix eigenvalues.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Su3(#[from] Su3Error),
    #[error("trace {0} is not 1 within 1e-10")]
    InvalidTrace(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("seed parameter {name} = {value} must be nonnegative")]
    NegativeSeedParameter { name: &'static str, value: f64 },
    #[error("control matrix has support outside span{{iG4..iG7}} (defect {0:.3e})")]
    ControlSupport(f64),
    #[error("state blew up to non-finite values at step {step} (t = {time})")]
    BlowUp { step: usize, time: f64 },
    #[error("integration requires at least one step")]
    NoSteps,
    #[error("trajectory has fewer than two samples")]
    EmptyTrajectory,
    #[error(
        "degenerate final state: N = 0 reduces to a population-inversion \
         problem for pure states and is not handled by this solver"
    )]
    DegenerateFinalState,
}

const IG9: Mat3 = Mat3 {
    e: [
        [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0)],
        [C64::new(0.0, 0.0), C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0), C64::new(0.0, 0.0)],
    ],
};

/// A density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix3 {
    h: Hermitian3,
}

impl DensityMatrix3 {
    pub fn new(h: Hermitian3) -> Result<DensityMatrix3, DynamicsError> {
        let tr = h.matrix().trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(DynamicsError::InvalidTrace(tr));
        }
        let eigs = h.eigenvalues();
        if eigs[2] < -PSD_TOL {
            return Err(DynamicsError::NotPositive(eigs[2]));
        }
        Ok(DensityMatrix3 { h })
    }

    /// `diag(0, a, 1-a)`: the diagonal initial state with the lossy level
    /// empty and `a` the larger logical population.
    pub fn diagonal_initial(a: f64) -> Result<DensityMatrix3, DynamicsError> {
        DensityMatrix3::new(Hermitian3::new(Mat3::diag(0.0, a, 1.0 - a))?)
    }

    /// The real final state `[[0,0,0],[0,b,n],[0,n,1-b]]`.  `n = 0` is
    /// rejected: that case degenerates to a pure-state problem.
    pub fn real_final(b: f64, n: f64) -> Result<DensityMatrix3, DynamicsError> {
        if n == 0.0 {
            return Err(DynamicsError::DegenerateFinalState);
        }
        let mut m = Mat3::diag(0.0, b, 1.0 - b);
        m.e[1][2] = C64::new(n, 0.0);
        m.e[2][1] = C64::new(n, 0.0);
        DensityMatrix3::new(Hermitian3::new(m)?)
    }

    pub(crate) fn trusted(m: Mat3) -> DensityMatrix3 {
        DensityMatrix3 { h: Hermitian3::trusted(m) }
    }

    pub fn hermitian(&self) -> &Hermitian3 {
        &self.h
    }

    pub fn matrix(&self) -> &Mat3 {
        self.h.matrix()
    }

    pub fn coords(&self) -> [f64; 9] {
        self.h.coords()
    }

    /// Population of the lossy level, `⟨G₁, ρ⟩`.
    pub fn occupancy(&self) -> f64 {
        self.matrix().e[0][0].re
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        self.h.eigenvalues()
    }
}

/// The control 4-vector `(u₄, u₅, u₆, u₇)`, i.e. `U = Σ u_j iG_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlField {
    pub u: [f64; 4],
}

impl ControlField {
    pub fn new(u: [f64; 4]) -> ControlField {
        ControlField { u }
    }

    /// `U = Σ_{j=4..7} u_j iG_j` as an explicit matrix.
    pub fn to_matrix(&self) -> SkewHermitian3 {
        SkewHermitian3::trusted(control_matrix_from_components(&self.u))
    }

    /// Extracts `(u₄..u₇)` from a control matrix, requiring the matrix to
    /// lie in `span{iG₄..iG₇}` up to `1e-10`.
    pub fn from_matrix(m: &SkewHermitian3) -> Result<ControlField, DynamicsError> {
        let u = control_components(m.matrix());
        let defect = (*m.matrix() - control_matrix_from_components(&u)).max_abs();
        if defect > 1e-10 {
            return Err(DynamicsError::ControlSupport(defect));
        }
        Ok(ControlField { u })
    }

    pub fn norm_sq(&self) -> f64 {
        self.u.iter().map(|x| x * x).sum()
    }
}

fn control_matrix_from_components(u: &[f64; 4]) -> Mat3 {
    // U(0,1) = (i u4 - u5)/sqrt2, U(0,2) = (i u6 - u7)/sqrt2, skew-Hermitian.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = Mat3::ZERO;
    m.e[0][1] = C64::new(-u[1] * h, u[0] * h);
    m.e[1][0] = C64::new(u[1] * h, u[0] * h);
    m.e[0][2] = C64::new(-u[3] * h, u[2] * h);
    m.e[2][0] = C64::new(u[3] * h, u[2] * h);
    m
}

fn control_components(m: &Mat3) -> [f64; 4] {
    [
        SQRT_2 * m.e[0][1].im,
        -SQRT_2 * m.e[0][1].re,
        SQRT_2 * m.e[0][2].im,
        -SQRT_2 * m.e[0][2].re,
    ]
}

/// The free parameters of an extremal: the seed matrix `P` (via `p, b, d`)
/// and the costate constant `h₉`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalSeed {
    p: f64,
    b: f64,
    d: f64,
    h9: f64,
}

impl ExtremalSeed {
    /// `p ≥ 0` and `d ≥ 0` are required; the symmetry transforms make other
    /// sign choices redundant.
    pub fn new(p: f64, b: f64, d: f64, h9: f64) -> Result<ExtremalSeed, DynamicsError> {
        if p < 0.0 {
            return Err(DynamicsError::NegativeSeedParameter { name: "p", value: p });
        }
        if d < 0.0 {
            return Err(DynamicsError::NegativeSeedParameter { name: "d", value: d });
        }
        Ok(ExtremalSeed { p, b, d, h9 })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn h9(&self) -> f64 {
        self.h9
    }

    pub fn h9_tilde(&self) -> f64 {
        self.h9 / SQRT_2
    }

    /// Assembles `P = [[0, p, b+id], [-p, 0, 0], [-b+id, 0, 0]]`.
    pub fn control_matrix(&self) -> SkewHermitian3 {
        let mut m = Mat3::ZERO;
        m.e[0][1] = C64::new(self.p, 0.0);
        m.e[1][0] = C64::new(-self.p, 0.0);
        m.e[0][2] = C64::new(self.b, self.d);
        m.e[2][0] = C64::new(-self.b, self.d);
        SkewHermitian3::trusted(m)
    }

    /// The equivalent initial control 4-vector,
    /// `u(0) = (0, -√2 p, √2 d, -√2 b)`.
    pub fn initial_control(&self) -> ControlField {
        ControlField::new([0.0, -SQRT_2 * self.p, SQRT_2 * self.d, -SQRT_2 * self.b])
    }

    /// `‖P‖² = 2(p² + b² + d²)`.
    pub fn p_norm_sq(&self) -> f64 {
        2.0 * (self.p * self.p + self.b * self.b + self.d * self.d)
    }

    pub fn p_norm(&self) -> f64 {
        self.p_norm_sq().sqrt()
    }
}

/// Time-sampled solution of the extremal system with derived scalars.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    rho: Vec<DensityMatrix3>,
    control: Vec<ControlField>,
    hamiltonian: Vec<f64>,
    occupancy: Vec<f64>,
    /// Largest `‖U - Σ u_j iG_j‖` seen while sampling: how far the control
    /// matrix ever strayed from `span{iG₄..iG₇}`.
    support_defect: f64,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rho(&self) -> &[DensityMatrix3] {
        &self.rho
    }

    pub fn control(&self) -> &[ControlField] {
        &self.control
    }

    /// `Ĥ(t_i) = ½‖U‖² - γ₀⟨G₁,ρ⟩`, constant along extremals.
    pub fn hamiltonian(&self) -> &[f64] {
        &self.hamiltonian
    }

    /// `⟨G₁, ρ(t_i)⟩`.
    pub fn occupancy(&self) -> &[f64] {
        &self.occupancy
    }

    /// Max deviation of the control matrix from `span{iG₄..iG₇}` over all
    /// samples.
    pub fn control_support_defect(&self) -> f64 {
        self.support_defect
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_rho(&self) -> &DensityMatrix3 {
        self.rho.last().expect("trajectory is never empty")
    }

    pub fn final_control(&self) -> &ControlField {
        self.control.last().expect("trajectory is never empty")
    }

    /// Applies one of the cost-preserving symmetry transforms sample-wise.
    pub fn apply_symmetry(&self, transform: SymmetryTransform) -> Trajectory {
        match transform {
            SymmetryTransform::Phase(phi) => {
                let dmat = phase_matrix(phi);
                let dadj = dmat.adjoint();
                let rho = self
                    .rho
                    .iter()
                    .map(|r| DensityMatrix3::trusted(dmat * *r.matrix() * dadj))
                    .collect();
                let control = self
                    .control
                    .iter()
                    .map(|c| ControlField::new(control_components(&(dmat * *c.to_matrix().matrix() * dadj))))
                    .collect();
                Trajectory {
                    times: self.times.clone(),
                    rho,
                    control,
                    hamiltonian: self.hamiltonian.clone(),
                    occupancy: self.occupancy.clone(),
                    support_defect: self.support_defect,
                }
            }
            SymmetryTransform::Conjugation => {
                let rho = self
                    .rho
                    .iter()
                    .map(|r| DensityMatrix3::trusted(r.matrix().conj()))
                    .collect();
                let control = self
                    .control
                    .iter()
                    .map(|c| ControlField::new([-c.u[0], c.u[1], -c.u[2], c.u[3]]))
                    .collect();
                Trajectory {
                    times: self.times.clone(),
                    rho,
                    control,
                    hamiltonian: self.hamiltonian.clone(),
                    occupancy: self.occupancy.clone(),
                    support_defect: self.support_defect,
                }
            }
            SymmetryTransform::TimeReversal => {
                let n = self.len();
                let rev = |k: usize| n - 1 - k;
                Trajectory {
                    support_defect: self.support_defect,
                    times: self.times.clone(),
                    rho: (0..n).map(|k| self.rho[rev(k)]).collect(),
                    control: (0..n)
                        .map(|k| {
                            let u = self.control[rev(k)].u;
                            ControlField::new([-u[0], -u[1], -u[2], -u[3]])
                        })
                        .collect(),
                    hamiltonian: (0..n).map(|k| self.hamiltonian[rev(k)]).collect(),
                    occupancy: (0..n).map(|k| self.occupancy[rev(k)]).collect(),
                }
            }
        }
    }

    /// CSV export: `t,u4,u5,u6,u7,rho_1..rho_9,occupancy,hamiltonian`,
    /// floats at 13 significant digits.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(
            w,
            "t,u4,u5,u6,u7,rho_1,rho_2,rho_3,rho_4,rho_5,rho_6,rho_7,rho_8,rho_9,occupancy,hamiltonian"
        )?;
        for i in 0..self.len() {
            let mut fields: Vec<String> = Vec::with_capacity(16);
            fields.push(fmt_f64(self.times[i]));
            for v in self.control[i].u {
                fields.push(fmt_f64(v));
            }
            for v in self.rho[i].coords() {
                fields.push(fmt_f64(v));
            }
            fields.push(fmt_f64(self.occupancy[i]));
            fields.push(fmt_f64(self.hamiltonian[i]));
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// Fixed-precision float formatting shared by all CSV writers (13
/// significant digits, locale-independent).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.12e}")
}

/// Right-hand side of the extremal system:
/// `ρ̇ = [U, ρ]` and `U̇ = h₉[iG₉, U] + γ₀[G₁, ρ]`.
pub fn extremal_rhs(rho: &Mat3, u: &Mat3, h9: f64, gamma0: f64) -> (Mat3, Mat3) {
    let rho_dot = commutator(u, rho);
    let u_dot = commutator(&IG9, u).scale(h9) + commutator(g(1), rho).scale(gamma0);
    (rho_dot, u_dot)
}

/// The conserved scalar `Ĥ = ½‖U‖² - γ₀⟨G₁,ρ⟩`; along any extremal it
/// equals `½‖P‖²` since the initial state has empty lossy level.
pub fn control_hamiltonian(rho: &DensityMatrix3, u: &SkewHermitian3, gamma0: f64) -> f64 {
    0.5 * u.frobenius_norm().powi(2) - gamma0 * rho.occupancy()
}

/// Classical fixed-step 4th-order integration of the extremal system on
/// `[0, 1]` from an arbitrary initial control matrix, sampling every step.
/// After each step `ρ` is re-Hermitized to `(ρ+ρ†)/2` and `U` to `(U-U†)/2`
/// to suppress drift.
pub fn integrate_from(
    rho0: &DensityMatrix3,
    p: &SkewHermitian3,
    h9: f64,
    gamma0: f64,
    steps: usize,
) -> Result<Trajectory, DynamicsError> {
    if steps == 0 {
        return Err(DynamicsError::NoSteps);
    }
    let h = 1.0 / steps as f64;
    let mut rho = *rho0.matrix();
    let mut u = *p.matrix();

    let n = steps + 1;
    let mut traj = Trajectory {
        times: Vec::with_capacity(n),
        rho: Vec::with_capacity(n),
        control: Vec::with_capacity(n),
        hamiltonian: Vec::with_capacity(n),
        occupancy: Vec::with_capacity(n),
        support_defect: 0.0,
    };
    let record = |traj: &mut Trajectory, t: f64, rho: &Mat3, u: &Mat3| {
        let dm = DensityMatrix3::trusted(*rho);
        let cf = ControlField::new(control_components(u));
        let defect = (*u - control_matrix_from_components(&cf.u)).max_abs();
        if defect > traj.support_defect {
            traj.support_defect = defect;
        }
        let ham = 0.5 * u.frobenius_norm().powi(2) - gamma0 * dm.occupancy();
        let occ = dm.occupancy();
        traj.times.push(t);
        traj.rho.push(dm);
        traj.control.push(cf);
        traj.hamiltonian.push(ham);
        traj.occupancy.push(occ);
    };
    record(&mut traj, 0.0, &rho, &u);

    for step in 0..steps {
        let (k1r, k1u) = extremal_rhs(&rho, &u, h9, gamma0);
        let (k2r, k2u) = extremal_rhs(
            &(rho + k1r.scale(0.5 * h)),
            &(u + k1u.scale(0.5 * h)),
            h9,
            gamma0,
        );
        let (k3r, k3u) = extremal_rhs(
            &(rho + k2r.scale(0.5 * h)),
            &(u + k2u.scale(0.5 * h)),
            h9,
            gamma0,
        );
        let (k4r, k4u) = extremal_rhs(&(rho + k3r.scale(h)), &(u + k3u.scale(h)), h9, gamma0);
        rho = rho + (k1r + (k2r + k3r).scale(2.0) + k4r).scale(h / 6.0);
        u = u + (k1u + (k2u + k3u).scale(2.0) + k4u).scale(h / 6.0);
        rho = (rho + rho.adjoint()).scale(0.5);
        u = (u - u.adjoint()).scale(0.5);
        let t = (step + 1) as f64 * h;
        if !rho.is_finite() || !u.is_finite() {
            return Err(DynamicsError::BlowUp { step: step + 1, time: t });
        }
        record(&mut traj, t, &rho, &u);
    }
    Ok(traj)
}

/// [`integrate_from`] with the seed's reduced `P` as the initial control.
pub fn integrate(
    rho0: &DensityMatrix3,
    seed: &ExtremalSeed,
    gamma0: f64,
    steps: usize,
) -> Result<Trajectory, DynamicsError> {
    integrate_from(rho0, &seed.control_matrix(), seed.h9(), gamma0, steps)
}

/// Exact solution of the extremal system at `γ₀ = 0`: with `A = i h₉ G₉`,
/// `U(t) = e^{At} P e^{-At}` and
/// `ρ(t) = e^{At} e^{(-A+P)t} ρ₀ e^{(A-P)t} e^{-At}`.
///
/// Only the zero-penalty system has this solution; it is the oracle the
/// integrator is checked against.
pub fn closed_form_trajectory(
    rho0: &DensityMatrix3,
    seed: &ExtremalSeed,
    t: f64,
) -> Result<(SkewHermitian3, DensityMatrix3), DynamicsError> {
    let a = IG9.scale(seed.h9());
    let p = *seed.control_matrix().matrix();
    let eat = expm(&a.scale(t))?;
    let eat_inv = eat.adjoint();
    let x = expm(&(p - a).scale(t))?;
    let u = eat * p * eat_inv;
    let rho = eat * x * *rho0.matrix() * x.adjoint() * eat_inv;
    Ok((
        SkewHermitian3::trusted(u),
        DensityMatrix3::trusted(rho),
    ))
}

/// Samples [`closed_form_trajectory`] on a uniform grid into a full
/// [`Trajectory`] (zero-penalty flow, so the recorded Hamiltonian uses
/// `γ₀ = 0`).
pub fn closed_form_sampled(
    rho0: &DensityMatrix3,
    seed: &ExtremalSeed,
    samples: usize,
) -> Result<Trajectory, DynamicsError> {
    if samples == 0 {
        return Err(DynamicsError::NoSteps);
    }
    let n = samples + 1;
    let mut traj = Trajectory {
        times: Vec::with_capacity(n),
        rho: Vec::with_capacity(n),
        control: Vec::with_capacity(n),
        hamiltonian: Vec::with_capacity(n),
        occupancy: Vec::with_capacity(n),
        support_defect: 0.0,
    };
    for k in 0..n {
        let t = k as f64 / samples as f64;
        let (u, rho) = closed_form_trajectory(rho0, seed, t)?;
        let cf = ControlField::from_matrix(&u)?;
        traj.times.push(t);
        traj.hamiltonian.push(0.5 * cf.norm_sq());
        traj.occupancy.push(rho.occupancy());
        traj.control.push(cf);
        traj.rho.push(rho);
    }
    Ok(traj)
}

/// Energy, occupancy and total cost of a sampled trajectory.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CostBreakdown {
    /// `∫ ½‖U‖² dt`.
    pub energy: f64,
    /// `∫ ⟨G₁, ρ⟩ dt`.
    pub occupancy_integral: f64,
    /// `energy + γ₀ · occupancy_integral`.
    pub total: f64,
    /// `½‖U(0)‖² + 2 γ₀ ∫⟨G₁,ρ⟩ dt`; equals `total` up to quadrature error
    /// by conservation of `Ĥ`.
    pub shortcut_total: f64,
    /// `|total - shortcut_total|`, a quality metric for the integration.
    pub identity_gap: f64,
}

/// Composite-quadrature cost of a uniformly sampled trajectory (Simpson on
/// even interval counts, trapezoid on a trailing odd interval).
pub fn evaluate_cost(traj: &Trajectory, gamma0: f64) -> Result<CostBreakdown, DynamicsError> {
    if traj.len() < 2 {
        return Err(DynamicsError::EmptyTrajectory);
    }
    let h = traj.times[1] - traj.times[0];
    let energy_series: Vec<f64> = traj.control.iter().map(|c| 0.5 * c.norm_sq()).collect();
    let energy = composite_quadrature(&energy_series, h);
    let occupancy_integral = composite_quadrature(&traj.occupancy, h);
    let total = energy + gamma0 * occupancy_integral;
    let shortcut_total = 0.5 * traj.control[0].norm_sq() + 2.0 * gamma0 * occupancy_integral;
    Ok(CostBreakdown {
        energy,
        occupancy_integral,
        total,
        shortcut_total,
        identity_gap: (total - shortcut_total).abs(),
    })
}

fn composite_quadrature(y: &[f64], h: f64) -> f64 {
    let n = y.len() - 1; // number of intervals
    let simpson_intervals = if n % 2 == 0 { n } else { n - 1 };
    let mut acc = 0.0;
    let mut i = 0;
    while i + 2 <= simpson_intervals {
        acc += h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
        i += 2;
    }
    if simpson_intervals < n {
        acc += 0.5 * h * (y[n - 1] + y[n]);
    }
    acc
}

/// The redundancy-eliminating transforms: any of them maps extremal
/// trajectories to extremal trajectories of transformed data with the same
/// cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymmetryTransform {
    /// `ρ ↦ DρD†`, `U ↦ DUD†` with `D = diag(e^{2iφ}, e^{-iφ}, e^{-iφ})`;
    /// fixes the seed family's phase freedom (`u₄(0) = 0`).
    Phase(f64),
    /// `(U, ρ) ↦ (Ū, ρ̄)`; justifies the `d ≥ 0` reduction.
    Conjugation,
    /// `u(t) ↦ -u(1-t)` with endpoints swapped; drives the final state back
    /// to the initial one with the same cost and `h₉ ↦ -h₉`.
    TimeReversal,
}

/// `D = diag(e^{2iφ}, e^{-iφ}, e^{-iφ})`.
pub fn phase_matrix(phi: f64) -> Mat3 {
    let mut m = Mat3::ZERO;
    m.e[0][0] = C64::from_polar(1.0, 2.0 * phi);
    m.e[1][1] = C64::from_polar(1.0, -phi);
    m.e[2][2] = C64::from_polar(1.0, -phi);
    m
}

/// `P ↦ D P D†`: the phase transform on an initial control matrix.
pub fn phase_transform_control(p: &SkewHermitian3, phi: f64) -> SkewHermitian3 {
    let d = phase_matrix(phi);
    SkewHermitian3::trusted(d * *p.matrix() * d.adjoint())
}

/// `J(T, γ₀/T²) = J(1, γ₀)/T`: maps a unit-interval optimal cost to the
/// horizon-`T` problem with rescaled occupancy penalty.
pub fn cost_on_horizon(j_unit: f64, horizon: f64) -> f64 {
    j_unit / horizon
}

/// The occupancy penalty that the horizon-`T` problem must use for the
/// unit-interval solution with penalty `γ₀` to rescale onto it.
pub fn penalty_on_horizon(gamma0_unit: f64, horizon: f64) -> f64 {
    gamma0_unit / (horizon * horizon)
}

/// Final state of a single extremal integration in basis coordinates, plus
/// the accumulated occupancy integral.  This is the same RK4 scheme as
/// [`integrate_from`], expressed in the (exactly equivalent) real coordinate
/// basis and keeping no trajectory history; the grid sweeps run on it.
#[derive(Debug, Clone, Copy)]
pub struct FinalState {
    pub rho_coords: [f64; 9],
    pub control: [f64; 4],
    /// `∫₀¹ ⟨G₁, ρ⟩ dt`, integrated as an auxiliary RK4 state.
    pub occupancy_integral: f64,
}

impl FinalState {
    pub fn is_finite(&self) -> bool {
        self.rho_coords.iter().all(|v| v.is_finite())
            && self.control.iter().all(|v| v.is_finite())
            && self.occupancy_integral.is_finite()
    }

    /// Squared Frobenius distance to a target state given in coordinates.
    pub fn error_sq_to(&self, target: &[f64; 9]) -> f64 {
        self.rho_coords
            .iter()
            .zip(target.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

#[inline]
fn coord_rhs(r: &[f64; 9], u: &[f64; 4], ht9: f64, g0: f64) -> ([f64; 9], [f64; 4]) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let dr = [
        u[0] * r[4] - u[1] * r[3] + u[2] * r[6] - u[3] * r[5],
        -u[0] * r[4] + u[1] * r[3],
        -u[2] * r[6] + u[3] * r[5],
        u[1] * (r[0] - r[1]) + s * (u[2] * r[8] - u[3] * r[7]),
        u[0] * (r[1] - r[0]) + s * (u[2] * r[7] + u[3] * r[8]),
        u[3] * (r[0] - r[2]) - s * (u[0] * r[8] + u[1] * r[7]),
        u[2] * (r[2] - r[0]) + s * (u[0] * r[7] - u[1] * r[8]),
        s * (-u[0] * r[6] + u[1] * r[5] - u[2] * r[4] + u[3] * r[3]),
        s * (u[0] * r[5] + u[1] * r[6] - u[2] * r[3] - u[3] * r[4]),
    ];
    let du = [
        -ht9 * u[2] + g0 * r[4],
        -ht9 * u[3] - g0 * r[3],
        ht9 * u[0] + g0 * r[6],
        ht9 * u[1] - g0 * r[5],
    ];
    (dr, du)
}

/// RK4 integration to `t = 1` in coordinates; see [`FinalState`].
pub fn integrate_final_state(
    rho0: &DensityMatrix3,
    u0: &ControlField,
    h9: f64,
    gamma0: f64,
    steps: usize,
) -> FinalState {
    let ht9 = h9 / SQRT_2;
    let mut r = rho0.coords();
    let mut u = u0.u;
    let mut occ = 0.0f64;
    let h = 1.0 / steps as f64;
    for _ in 0..steps {
        let (k1r, k1u) = coord_rhs(&r, &u, ht9, gamma0);
        let mut tr = [0.0; 9];
        let mut tu = [0.0; 4];
        for i in 0..9 {
            tr[i] = r[i] + 0.5 * h * k1r[i];
        }
        for i in 0..4 {
            tu[i] = u[i] + 0.5 * h * k1u[i];
        }
        let (k2r, k2u) = coord_rhs(&tr, &tu, ht9, gamma0);
        for i in 0..9 {
            tr[i] = r[i] + 0.5 * h * k2r[i];
        }
        for i in 0..4 {
            tu[i] = u[i] + 0.5 * h * k2u[i];
        }
        let (k3r, k3u) = coord_rhs(&tr, &tu, ht9, gamma0);
        for i in 0..9 {
            tr[i] = r[i] + h * k3r[i];
        }
        for i in 0..4 {
            tu[i] = u[i] + h * k3u[i];
        }
        let (k4r, k4u) = coord_rhs(&tr, &tu, ht9, gamma0);
        // occupancy integral: auxiliary state I with I' = r[0]; its RK4
        // stage values are r[0], r[0]+h/2 k1, r[0]+h/2 k2, r[0]+h k3.
        occ += h / 6.0
            * (r[0]
                + 2.0 * (r[0] + 0.5 * h * k1r[0])
                + 2.0 * (r[0] + 0.5 * h * k2r[0])
                + (r[0] + h * k3r[0]));
        for i in 0..9 {
            r[i] += h / 6.0 * (k1r[i] + 2.0 * (k2r[i] + k3r[i]) + k4r[i]);
        }
        for i in 0..4 {
            u[i] += h / 6.0 * (k1u[i] + 2.0 * (k2u[i] + k3u[i]) + k4u[i]);
        }
    }
    FinalState { rho_coords: r, control: u, occupancy_integral: occ }
}
