//! A-priori bounds that confine the extremal parameter search to a box.
//!
//! Three ingredients:
//!
//! 1. The optimal cost is nondecreasing in `γ₀` and grows at most linearly,
//!    `J_{γ₁} ≤ J_{γ₂} ≤ J_{γ₁} + a(γ₂-γ₁)`, with the tight upper form
//!    `J_{γ₁} + (γ₂-γ₁)∫⟨G₁,ρ̃⟩dt` evaluated on the `γ₁`-optimal
//!    trajectory.  With the analytic `γ = 0` optimum as baseline this gives
//!    a cost bracket `[B_L, B_U]`.
//! 2. Conservation of `Ĥ` turns the cost bracket into a bracket for the
//!    initial control norm:
//!    `√max{0, 2B_L - 4γ₀a} ≤ ‖P‖ ≤ √(2 B_U)`.
//! 3. An averaging/Grönwall estimate rules out large `|h₉|`: a highly
//!    oscillatory control cannot move the state, so
//!    `|h₉| ≤ (2√2 a ‖P‖ / ‖ρ₁-ρ₀‖) · e^{√2‖P‖ + γ₀√(a²+(1-a)²)}`.
//!
//! The periodic integral entering the averaging estimate,
//! `∫₀^τ [e^{iG₉s} P e^{-iG₉s}, ρ₀] ds`, has period `2√2 π` in `τ` and a
//! closed antiderivative; [`periodic_integral`] evaluates it and its norm
//! bound `2√2 a ‖P‖`.

use thiserror::Error;

use crate::dynamics::{DensityMatrix3, ExtremalSeed};
use crate::su3::{Hermitian3, Mat3, C64};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("{name} = {value} must be nonnegative")]
    NegativeInput { name: &'static str, value: f64 },
    #[error("trivial transfer: rho1 = rho0, the h9 bound degenerates")]
    TrivialTransfer,
}

/// Bracket `[lower, upper]` for the optimal cost at `gamma0`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CostBracket {
    /// `B_L`: the `γ = 0` optimal cost.
    pub lower: f64,
    /// `B_U = B_L + γ₀ ∫⟨G₁,ρ̃⟩dt` on the `γ = 0` optimal trajectory.
    pub upper: f64,
    /// The loose linear-growth form `B_L + a·γ₀`.
    pub upper_loose: f64,
    pub gamma0: f64,
}

/// Search box for `(‖P‖, h₉)`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ParamBox {
    pub pnorm_min: f64,
    pub pnorm_max: f64,
    pub h9_abs_max: f64,
    /// `h̃₉ = h₉/√2` form of the same bound.
    pub h9_tilde_abs_max: f64,
}

/// Cost bracket from the zero-penalty baseline: `B_L = J₀` and
/// `B_U = J₀ + γ₀ · ∫⟨G₁,ρ̃⟩dt` with the integral taken along the
/// zero-penalty optimal trajectory (the tight form; the loose form
/// `B_L + a·γ₀` is also reported).
pub fn cost_bracket(
    j_baseline: f64,
    occupancy_integral_of_baseline: f64,
    gamma0: f64,
    a: f64,
) -> Result<CostBracket, BoundsError> {
    for (name, value) in [
        ("j_baseline", j_baseline),
        ("occupancy_integral", occupancy_integral_of_baseline),
        ("gamma0", gamma0),
        ("a", a),
    ] {
        if value < 0.0 {
            return Err(BoundsError::NegativeInput { name, value });
        }
    }
    Ok(CostBracket {
        lower: j_baseline,
        upper: j_baseline + gamma0 * occupancy_integral_of_baseline,
        upper_loose: j_baseline + a * gamma0,
        gamma0,
    })
}

/// `√max{0, 2B_L - 4γ₀a} ≤ ‖P‖ ≤ √(2 B_U)`.
pub fn pnorm_bounds(bracket: &CostBracket, gamma0: f64, a: f64) -> (f64, f64) {
    let lo = (2.0 * bracket.lower - 4.0 * gamma0 * a).max(0.0).sqrt();
    let hi = (2.0 * bracket.upper).sqrt();
    (lo, hi)
}

/// The averaging/Grönwall bound
/// `|h₉| ≤ (2√2 a‖P‖/‖ρ₁-ρ₀‖) e^{√2‖P‖ + γ₀√(a²+(1-a)²)}`;
/// monotone increasing in `‖P‖`, so plugging the upper `‖P‖` bound is valid.
pub fn h9_bound(
    pnorm: f64,
    gamma0: f64,
    a: f64,
    rho0: &DensityMatrix3,
    rho1: &DensityMatrix3,
) -> Result<f64, BoundsError> {
    let dist = (*rho1.matrix() - *rho0.matrix()).frobenius_norm();
    if dist == 0.0 {
        return Err(BoundsError::TrivialTransfer);
    }
    let amp = 2.0 * std::f64::consts::SQRT_2 * a * pnorm / dist;
    let exponent = std::f64::consts::SQRT_2 * pnorm
        + gamma0 * (a * a + (1.0 - a) * (1.0 - a)).sqrt();
    Ok(amp * exponent.exp())
}

/// Closed form of `∫₀^τ [e^{iG₉s} P e^{-iG₉s}, ρ₀] ds` for a reduced seed
/// matrix `P(p, b, d)` and `ρ₀ = diag(0, a, 1-a)`, together with its
/// Frobenius norm.  With `β = b + id` and `x = τ/√2`:
///
/// ```text
/// result = √2 [[0, z, w], [z̄, 0, 0], [w̄, 0, 0]],
/// z = a   (p sin x - β (1-cos x)),
/// w = (1-a)(p (1-cos x) + β sin x).
/// ```
pub fn periodic_integral(tau: f64, seed: &ExtremalSeed, a: f64) -> (Hermitian3, f64) {
    let x = tau / std::f64::consts::SQRT_2;
    let (sin, cos) = x.sin_cos();
    let beta = C64::new(seed.b(), seed.d());
    let z = (C64::new(seed.p() * sin, 0.0) - beta * (1.0 - cos)) * a;
    let w = (C64::new(seed.p() * (1.0 - cos), 0.0) + beta * sin) * (1.0 - a);
    let mut m = Mat3::ZERO;
    m.e[0][1] = z;
    m.e[1][0] = z.conj();
    m.e[0][2] = w;
    m.e[2][0] = w.conj();
    let m = m.scale(std::f64::consts::SQRT_2);
    let norm = 2.0 * (z.norm_sqr() + w.norm_sqr()).sqrt();
    (Hermitian3::new(m).expect("construction is Hermitian"), norm)
}

/// The norm cap `2√2 a ‖P‖` that [`periodic_integral`] never exceeds.
pub fn periodic_integral_norm_cap(seed: &ExtremalSeed, a: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 * a * seed.p_norm()
}
