//! Optimal state transfer for a three-level Lambda system in the
//! density-matrix formulation.
//!
//! The control task: drive a density matrix `rho` with spectrum `{0, a, 1-a}`
//! from a diagonal initial state to an isospectral real final state, using
//! four control fields that couple the two logical levels only through the
//! highest (lossy) level, while minimizing
//!
//! ```text
//! J = ∫₀¹ ½‖U(t)‖² + γ₀ ⟨G₁, ρ(t)⟩ dt
//! ```
//!
//! i.e. a compromise between control energy and the average occupancy of the
//! lossy level.  Candidate optima solve a reduced two-matrix extremal system
//!
//! ```text
//! ρ̇ = [U, ρ],            ρ(0) = ρ₀,
//! U̇ = h₉ [iG₉, U] + γ₀ [G₁, ρ],   U(0) = P,
//! ```
//!
//! parametrized by a seed matrix `P` (three real numbers) and a scalar `h₉`.
//! The crate provides:
//!
//! - [`su3`]: the orthonormal Hermitian basis `G₁..G₉`, commutators,
//!   vectorization and small dense matrix exponentials;
//! - [`dynamics`]: the extremal ODE system, a fixed-step RK4 integrator with
//!   a closed-form cross-check for `γ₀ = 0`, cost evaluation and the symmetry
//!   transforms that cut the search space;
//! - [`bounds`]: a-priori brackets on the optimal cost, on `‖P‖` and on
//!   `|h₉|` that confine the parameter search to a box;
//! - [`zero_occupancy`]: the analytic `γ₀ = 0` (minimum-energy) solution via
//!   a constrained integer optimization over spectral conditions;
//! - [`sweep`]: the staged, deterministic, parallel grid search for `γ₀ > 0`.

pub mod bounds;
pub mod dynamics;
pub mod su3;
pub mod sweep;
pub mod zero_occupancy;

pub use su3::{BasisIndex, Hermitian3, Mat3, SkewHermitian3, C64};
