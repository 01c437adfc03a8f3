//! Analytic solution of the zero-penalty (`γ₀ = 0`, minimum-energy) problem.
//!
//! At `γ₀ = 0` the extremal flow is known in closed form and the transfer
//! condition becomes algebraic: with `A = i h₉ G₉`,
//!
//! ```text
//! e^{A} e^{-A+P} ρ₀ e^{A-P} e^{-A} = ρ₁ ,
//! ```
//!
//! and `X_f = e^{A} e^{-A+P}` must be block-diagonal.  Writing
//! `P = r [[0, cosθ, sinθ e^{iψ}], [-cosθ, 0, 0], [-sinθ e^{-iψ}, 0, 0]]`
//! and `A = [[0,0,0],[0,0,α],[0,-α,0]]` (so `h₉ = -√2 α`), the cost is
//! `J = ½‖P‖² = r²` and two mutually exclusive regimes remain:
//!
//! * **Case 1** — `e^{-A+P}` is scalar.  Then `ρ₁ = e^{A} ρ₀ e^{-A}`, which
//!   pins `α` to the transfer angle modulo `π`, and the scalar condition
//!   forces the eigenvalues of `i(-A+P)` into the lattice
//!   `λ₁ = 2kπ/3`, `λ₂ = λ₁ + 2mπ`, `λ₃ = -(λ₁+λ₂)`.  Minimizing `r²`
//!   becomes a constrained integer optimization over `(k, m, l)`, solved
//!   here exactly in rational arithmetic (in units of `(2π)²`).
//! * **Case 2** — `e^{-A+P}` block-diagonal but non-scalar, which requires
//!   `|cosθ| = |sinθ| = 1/√2` and `ψ = ±π/2`.  A `2×2` reduction gives
//!   `√(4r² + α²)/2 = lπ` with `α` pinned per parity of `l`; direct
//!   minimization over integers decides the winner.
//!
//! For the quarter-turn (Hadamard-like) transfer family the global optimum
//! is Case 2 with `r² = 3π²/4`, `h₉ = √2 π`; Case 1 yields `15π²/16`.
//! Every returned seed is forward-verified against the closed-form flow.

use num_rational::Ratio;
use num_traits::Signed;
use thiserror::Error;

use crate::dynamics::{
    closed_form_trajectory, CostBreakdown, DensityMatrix3, DynamicsError, ExtremalSeed,
};


use std::f64::consts::{PI, SQRT_2};

type Rat = Ratio<i64>;

/// Forward-verification tolerance on `‖ρ(1) - ρ₁‖`.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("population parameter a = {0} must lie in (1/2, 1]")]
    AOutOfRange(f64),
    #[error("final population b = {0} must lie in [0, 1]")]
    BOutOfRange(f64),
    #[error(
        "degenerate final state: N = 0 reduces to a population-inversion \
         problem for pure states and is not handled by this solver"
    )]
    DegenerateFinalState,
    #[error("N = {0} must be negative (the sign of N is a free convention)")]
    PositiveN(f64),
    #[error("not isospectral: b(1-b) - N^2 - a(1-a) = {defect:.3e}")]
    NotIsospectral { defect: f64 },
    #[error(
        "transfer angle {theta:.6} rad is outside the quarter-turn family; \
         the block-diagonal (case-2) matching is derived only for \
         cos(2θ) = 0"
    )]
    TransferFamilyNotCovered { theta: f64 },
    #[error("no admissible integer triple up to k_max = {k_max} (k_max must be >= 3)")]
    EmptyEnumeration { k_max: i64 },
    #[error(
        "forward verification failed: ‖ρ(1) - ρ₁‖ = {error:.3e} exceeds {tolerance:.1e} \
         for seed (p={p:.6}, b={b:.6}, d={d:.6}, h9={h9:.6})"
    )]
    VerificationFailed { error: f64, tolerance: f64, p: f64, b: f64, d: f64, h9: f64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// A validated isospectral transfer `diag(0,a,1-a) → [[0,0,0],[0,b,N],[0,N,1-b]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferSpec {
    a: f64,
    b: f64,
    n: f64,
}

impl TransferSpec {
    pub fn new(a: f64, b: f64, n: f64) -> Result<TransferSpec, SolverError> {
        if !(a > 0.5 && a <= 1.0) {
            return Err(SolverError::AOutOfRange(a));
        }
        if !(0.0..=1.0).contains(&b) {
            return Err(SolverError::BOutOfRange(b));
        }
        if n == 0.0 {
            return Err(SolverError::DegenerateFinalState);
        }
        if n > 0.0 {
            return Err(SolverError::PositiveN(n));
        }
        let defect = b * (1.0 - b) - n * n - a * (1.0 - a);
        if defect.abs() > 1e-12 {
            return Err(SolverError::NotIsospectral { defect });
        }
        Ok(TransferSpec { a, b, n })
    }

    /// The Hadamard-like benchmark transfer: `a = 2/3, b = 1/2, N = -1/6`.
    pub fn case_study() -> TransferSpec {
        TransferSpec { a: 2.0 / 3.0, b: 0.5, n: -1.0 / 6.0 }
    }

    /// Builds an isospectral spec from a population `a` and rotation angle
    /// `θ ∈ (0, π/2)`: `b = ½ - ½(1-2a)cos 2θ`, `N = ½(1-2a) sin 2θ`.
    pub fn from_angle(a: f64, theta: f64) -> Result<TransferSpec, SolverError> {
        let b = 0.5 - 0.5 * (1.0 - 2.0 * a) * (2.0 * theta).cos();
        let n = 0.5 * (1.0 - 2.0 * a) * (2.0 * theta).sin();
        TransferSpec::new(a, b, n)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn rho0(&self) -> DensityMatrix3 {
        DensityMatrix3::diagonal_initial(self.a).expect("validated")
    }

    pub fn rho1(&self) -> DensityMatrix3 {
        DensityMatrix3::real_final(self.b, self.n).expect("validated")
    }

    /// The rotation angle `θ` (principal value) with
    /// `½ - ½(1-2a)cos 2θ = b` and `½(1-2a) sin 2θ = N`.
    pub fn transfer_angle(&self) -> f64 {
        let cos2 = (1.0 - 2.0 * self.b) / (1.0 - 2.0 * self.a);
        let sin2 = 2.0 * self.n / (1.0 - 2.0 * self.a);
        f64::atan2(sin2, cos2) / 2.0
    }

    /// Whether the transfer angle lies in the quarter-turn class
    /// (`cos 2θ = 0`), the family covered by the case-2 analysis.
    pub fn is_quarter_turn(&self) -> bool {
        (2.0 * self.transfer_angle()).cos().abs() < 1e-9
    }
}

/// Winner of the Case-1 (scalar `e^{-A+P}`) integer optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case1Solution {
    pub k: i64,
    pub m: i64,
    pub l: i64,
    /// `r̂² = r²/(2π)²` as an exact reduced fraction; present for the
    /// quarter-turn family, where the admissible `φ̂` values are odd
    /// multiples of `1/8`.
    pub r_hat_sq: Option<Rat>,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

/// Winner of the Case-2 (block-diagonal `e^{-A+P}`) minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case2Solution {
    pub parity: Parity,
    pub k: i64,
    pub l: i64,
    /// The `A`-matrix entry `α` (in radians); `h₉ = -√2 α`.
    pub a_param: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChosenCase {
    Case1,
    Case2,
}

/// Complete zero-penalty solution with its provenance and verification.
#[derive(Debug, Clone)]
pub struct ZeroOccupancySolution {
    pub seed: ExtremalSeed,
    pub cost: CostBreakdown,
    pub case1: Case1Solution,
    /// `None` outside the quarter-turn transfer family.
    pub case2: Option<Case2Solution>,
    pub chosen: ChosenCase,
    /// `‖ρ(1) - ρ₁‖` of the returned seed under the closed-form flow.
    pub verification_error: f64,
    /// `false` when only the Case-1 route applies (non-quarter-turn
    /// transfers), where the result is an upper bound not proven tight.
    pub proven_tight: bool,
}

// -- Case 1: exact rational enumeration ------------------------------------

/// `λ̂₁ = k/3`, `λ̂₂ = k/3 + m` for a candidate `(k, m)`.
fn lambda_hats(k: i64, m: i64) -> (Rat, Rat) {
    let l1 = Rat::new(k, 3);
    (l1, l1 + Rat::from_integer(m))
}

/// `r̂² = λ̂₁² + λ̂₂² + λ̂₁λ̂₂ - φ̂²`.
fn r_hat_sq(k: i64, m: i64, phi: Rat) -> Rat {
    let (l1, l2) = lambda_hats(k, m);
    l1 * l1 + l2 * l2 + l1 * l2 - phi * phi
}

/// The six-branch maximizer of `φ̂ = |1/8 + l/2|` over the admissible region
/// `|λ̂₂| < φ̂ < min{λ̂₁, λ̂₁+λ̂₂}` for `k = 3j + s`, `m ∈ (-k/2, 0)`:
/// wide-`m` branch (`m ≥ -k/3`, cap `k/3`) and narrow-`m` branch
/// (`m < -k/3`, cap `2k/3 + m`), three residues each.
fn max_phi_branch(k: i64, m: i64) -> (i64, Rat) {
    let j = k / 3;
    let s = k % 3;
    if 3 * m >= -k {
        match s {
            0 => (-2 * j, Rat::from_integer(j) - Rat::new(1, 8)),
            1 => (2 * j, Rat::from_integer(j) + Rat::new(1, 8)),
            _ => (2 * j + 1, Rat::from_integer(j) + Rat::new(5, 8)),
        }
    } else {
        let m_rat = Rat::from_integer(m);
        match s {
            0 => (-4 * j - 2 * m, m_rat + Rat::from_integer(2 * j) - Rat::new(1, 8)),
            1 => (4 * j + 2 * m + 1, m_rat + Rat::from_integer(2 * j) + Rat::new(5, 8)),
            _ => (4 * j + 2 * m + 2, m_rat + Rat::from_integer(2 * j) + Rat::new(9, 8)),
        }
    }
}

/// Exhaustive minimization of `r̂²` over `k ∈ [1, search_k_max]`, admissible
/// `m ∈ (-k/2, 0)` and the branch-maximized `l`, in exact rational
/// arithmetic.  Ties break toward smallest `|k|`, then `|m|`, then `|l|`.
pub fn case1_minimize(search_k_max: i64) -> Result<Case1Solution, SolverError> {
    let mut best: Option<(Rat, i64, i64, i64)> = None;
    for k in 1..=search_k_max {
        for m in -((k - 1) / 2)..0 {
            // m in (-k/2, 0) as exact integers
            if 2 * m <= -k {
                continue;
            }
            let (l, phi) = max_phi_branch(k, m);
            let (l1, l2) = lambda_hats(k, m);
            let cap = l1.min(l1 + l2);
            debug_assert!(phi < cap && phi > l2.abs());
            let r2 = r_hat_sq(k, m, phi);
            debug_assert!(r2 > Rat::from_integer(0));
            let better = match &best {
                None => true,
                Some((br2, bk, bm, bl)) => {
                    (r2, k.abs(), m.abs(), l.abs()) < (*br2, bk.abs(), bm.abs(), bl.abs())
                }
            };
            if better {
                best = Some((r2, k, m, l));
            }
        }
    }
    let (r2, k, m, l) = best.ok_or(SolverError::EmptyEnumeration { k_max: search_k_max })?;
    let r_squared = ratio_to_f64(r2) * 4.0 * PI * PI;
    Ok(Case1Solution { k, m, l, r_hat_sq: Some(r2), r_squared })
}

fn ratio_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Case-1 enumeration for an arbitrary transfer angle `θ*`:
/// `φ = |θ* + lπ|` replaces the odd-eighths lattice.  Floating-point
/// comparisons with a small guard; used as the general-transfer fallback.
pub fn case1_minimize_for_angle(
    theta_star: f64,
    search_k_max: i64,
) -> Result<Case1Solution, SolverError> {
    let th_hat = theta_star / (2.0 * PI);
    let mut best: Option<(f64, i64, i64, i64)> = None;
    for k in 1..=search_k_max {
        for m in -((k - 1) / 2)..0 {
            if 2 * m <= -k {
                continue;
            }
            let l1 = k as f64 / 3.0;
            let l2 = l1 + m as f64;
            let cap = l1.min(l1 + l2);
            // maximize |th_hat + l/2| strictly below cap
            let mut cand: Option<(f64, i64)> = None;
            for l in -(2 * k + 4)..=(2 * k + 4) {
                let phi = (th_hat + l as f64 / 2.0).abs();
                if phi > l2.abs() + 1e-12 && phi < cap - 1e-12 {
                    let better = match cand {
                        None => true,
                        Some((cphi, cl)) => {
                            phi > cphi + 1e-15 || ((phi - cphi).abs() <= 1e-15 && l.abs() < cl.abs())
                        }
                    };
                    if better {
                        cand = Some((phi, l));
                    }
                }
            }
            if let Some((phi, l)) = cand {
                let r2 = l1 * l1 + l2 * l2 + l1 * l2 - phi * phi;
                let better = match &best {
                    None => true,
                    Some((br2, bk, bm, bl)) => {
                        (r2 < br2 - 1e-12)
                            || ((r2 - br2).abs() <= 1e-12
                                && (k.abs(), m.abs(), l.abs()) < (bk.abs(), bm.abs(), bl.abs()))
                    }
                };
                if better {
                    best = Some((r2, k, m, l));
                }
            }
        }
    }
    let (r2, k, m, l) = best.ok_or(SolverError::EmptyEnumeration { k_max: search_k_max })?;
    Ok(Case1Solution { k, m, l, r_hat_sq: None, r_squared: r2 * 4.0 * PI * PI })
}

// -- Case 2 -----------------------------------------------------------------

/// Minimization over both parities of `l`:
/// odd `l` pairs with `α = (4k-1)π`, even `l` with `α = (4k+1)π`, both under
/// `4r² = (4l² - (α/π)²)π² > 0`.  Requires the quarter-turn transfer family.
pub fn case2_minimize(spec: &TransferSpec, k_range: i64) -> Result<Case2Solution, SolverError> {
    if !spec.is_quarter_turn() {
        return Err(SolverError::TransferFamilyNotCovered { theta: spec.transfer_angle() });
    }
    // key: (4l^2 - aa^2, |k|, l, parity rank); value carries signed k and aa
    let mut best: Option<((i64, i64, i64, i64), (i64, i64, Parity))> = None;
    for k in -k_range..=k_range {
        for (parity, aa) in [(Parity::Odd, 4 * k - 1), (Parity::Even, 4 * k + 1)] {
            // smallest positive l of the right parity with 2l > |aa|
            let mut l = aa.abs() / 2 + 1;
            let want_odd = parity == Parity::Odd;
            if (l % 2 == 1) != want_odd {
                l += 1;
            }
            let val = 4 * l * l - aa * aa;
            debug_assert!(val > 0);
            let key = (val, k.abs(), l, if want_odd { 0 } else { 1 });
            if best.map_or(true, |(bk, _)| key < bk) {
                best = Some((key, (k, aa, parity)));
            }
        }
    }
    let ((val, _, l, _), (k, aa, parity)) = best.expect("k_range >= 0 always yields candidates");
    Ok(Case2Solution {
        parity,
        k,
        l,
        a_param: aa as f64 * PI,
        r_squared: val as f64 * PI * PI / 4.0,
    })
}

// -- assembly and verification ----------------------------------------------

fn seed_from_case2(c2: &Case2Solution) -> Result<ExtremalSeed, SolverError> {
    let r = c2.r_squared.sqrt();
    let h9 = -SQRT_2 * c2.a_param;
    Ok(ExtremalSeed::new(r / SQRT_2, 0.0, r / SQRT_2, h9)?)
}

/// Builds the seed for a Case-1 winner: `α = θ* + lπ`, `r² = Q - α²`, and
/// `P` with internal angles solving `sin 2θ_P sin ψ = λ₁λ₂(λ₁+λ₂)/(α r²)`;
/// the sign of that product folds away under conjugation, so the reduced
/// representative uses `ψ = π/2` and `θ_P = ½ arcsin|q|`.
fn seed_from_case1(theta_star: f64, c1: &Case1Solution) -> Result<ExtremalSeed, SolverError> {
    let lam1 = 2.0 * PI * c1.k as f64 / 3.0;
    let lam2 = lam1 + 2.0 * PI * c1.m as f64;
    let alpha = theta_star + c1.l as f64 * PI;
    let r2 = lam1 * lam1 + lam2 * lam2 + lam1 * lam2 - alpha * alpha;
    let r = r2.sqrt();
    let q = lam1 * lam2 * (lam1 + lam2) / (alpha * r2);
    let theta_p = 0.5 * q.abs().min(1.0).asin();
    let h9 = -SQRT_2 * alpha;
    Ok(ExtremalSeed::new(r * theta_p.cos(), 0.0, r * theta_p.sin(), h9)?)
}

fn verify_seed(
    spec: &TransferSpec,
    seed: &ExtremalSeed,
) -> Result<(f64, f64), SolverError> {
    let rho0 = spec.rho0();
    let rho1 = spec.rho1();
    let (_, rho_final) = closed_form_trajectory(&rho0, seed, 1.0)?;
    let err = (*rho_final.matrix() - *rho1.matrix()).frobenius_norm();
    if err > VERIFY_TOL {
        return Err(SolverError::VerificationFailed {
            error: err,
            tolerance: VERIFY_TOL,
            p: seed.p(),
            b: seed.b(),
            d: seed.d(),
            h9: seed.h9(),
        });
    }
    // occupancy integral along the closed-form trajectory (Simpson) -- the
    // ingredient the gamma > 0 cost bracket needs.
    let n = 4000usize;
    let h = 1.0 / n as f64;
    let occ = |t: f64| -> Result<f64, SolverError> {
        let (_, rho) = closed_form_trajectory(&rho0, seed, t)?;
        Ok(rho.occupancy())
    };
    let mut acc = 0.0;
    let mut k = 0;
    while k < n {
        let f0 = occ(k as f64 * h)?;
        let f1 = occ((k + 1) as f64 * h)?;
        let f2 = occ((k + 2) as f64 * h)?;
        acc += h / 3.0 * (f0 + 4.0 * f1 + f2);
        k += 2;
    }
    Ok((err, acc))
}

/// Default enumeration depth: the per-residue closed forms grow at least
/// linearly in `k/3`, so the global minimum sits at small `k`; 30 leaves a
/// wide margin (cross-checked by brute force in the tests).
pub const DEFAULT_K_MAX: i64 = 30;
/// Default Case-2 enumeration half-range for `k`.
pub const DEFAULT_K_RANGE: i64 = 8;

/// Full zero-penalty solve: runs both cases where applicable, picks the
/// cheaper seed, and forward-verifies it against the closed-form flow.
pub fn solve_zero_occupancy(spec: &TransferSpec) -> Result<ZeroOccupancySolution, SolverError> {
    let theta = spec.transfer_angle();
    if spec.is_quarter_turn() {
        let case1 = case1_minimize(DEFAULT_K_MAX)?;
        let case2 = case2_minimize(spec, DEFAULT_K_RANGE)?;
        let (chosen, seed) = if case2.r_squared < case1.r_squared {
            (ChosenCase::Case2, seed_from_case2(&case2)?)
        } else {
            (ChosenCase::Case1, seed_from_case1(theta, &case1)?)
        };
        let (verification_error, occupancy_integral) = verify_seed(spec, &seed)?;
        let energy = 0.5 * seed.p_norm_sq();
        Ok(ZeroOccupancySolution {
            seed,
            cost: CostBreakdown {
                energy,
                occupancy_integral,
                total: energy,
                shortcut_total: energy,
                identity_gap: 0.0,
            },
            case1,
            case2: Some(case2),
            chosen,
            verification_error,
            proven_tight: true,
        })
    } else {
        let case1 = case1_minimize_for_angle(theta, DEFAULT_K_MAX)?;
        let seed = seed_from_case1(theta, &case1)?;
        let (verification_error, occupancy_integral) = verify_seed(spec, &seed)?;
        let energy = 0.5 * seed.p_norm_sq();
        Ok(ZeroOccupancySolution {
            seed,
            cost: CostBreakdown {
                energy,
                occupancy_integral,
                total: energy,
                shortcut_total: energy,
                identity_gap: 0.0,
            },
            case1,
            case2: None,
            chosen: ChosenCase::Case1,
            verification_error,
            proven_tight: false,
        })
    }
}
