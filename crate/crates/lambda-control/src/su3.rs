//! Structured linear algebra for the nine-element orthonormal Hermitian basis
//! of `iu(3)`.
//!
//! `G₁, G₂, G₃` are the diagonal level projectors; `G₄, G₅` couple levels
//! 1–2, `G₆, G₇` couple levels 1–3 and `G₈, G₉` couple levels 2–3, each pair
//! normalized so that `⟨G_j, G_k⟩ = δ_jk` under the Frobenius inner product
//! `⟨A, B⟩ = Tr(A B†)`.  A Hermitian matrix `M` and its real coordinate
//! vector `(⟨G₁,M⟩, …, ⟨G₉,M⟩)` are used interchangeably throughout the
//! crate; the conversions here are exact up to rounding.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Hermiticity / skewness tolerance on constructing validated wrappers.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Tolerance for exact structural identities (basis conversions, tables).
pub const EXACT_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum Su3Error {
    #[error("basis index {0} out of range 1..=9")]
    IndexOutOfRange(usize),
    #[error("matrix is not Hermitian (max |M - M†| = {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not skew-Hermitian (max |M + M†| = {0:.3e})")]
    NotSkewHermitian(f64),
    #[error("matrix trace {0:.3e} is not zero")]
    NonzeroTrace(f64),
    #[error("matrix has non-finite entries")]
    NonFinite,
}

/// Dense 3×3 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3 {
    pub e: [[C64; 3]; 3],
}

const C0: C64 = C64::new(0.0, 0.0);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3 { e: [[C0; 3]; 3] };

    pub fn identity() -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            m.e[i][i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: [[C64; 3]; 3]) -> Mat3 {
        Mat3 { e: rows }
    }

    pub fn diag(d0: f64, d1: f64, d2: f64) -> Mat3 {
        let mut m = Mat3::ZERO;
        m.e[0][0] = C64::new(d0, 0.0);
        m.e[1][1] = C64::new(d1, 0.0);
        m.e[2][2] = C64::new(d2, 0.0);
        m
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.e[i][j] = self.e[j][i].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Mat3 {
        let mut m = *self;
        for row in m.e.iter_mut() {
            for v in row.iter_mut() {
                *v = v.conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        self.e[0][0] + self.e[1][1] + self.e[2][2]
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut m = *self;
        for row in m.e.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.e
            .iter()
            .flatten()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entrywise absolute value.
    pub fn max_abs(&self) -> f64 {
        self.e
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.e
            .iter()
            .flatten()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Deviation from Hermiticity, `max |M - M†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }

    /// Deviation from skew-Hermiticity, `max |M + M†|`.
    pub fn skewness_defect(&self) -> f64 {
        (*self + self.adjoint()).max_abs()
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, rhs: Mat3) -> Mat3 {
        let mut m = self;
        for i in 0..3 {
            for j in 0..3 {
                m.e[i][j] += rhs.e[i][j];
            }
        }
        m
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, rhs: Mat3) -> Mat3 {
        let mut m = self;
        for i in 0..3 {
            for j in 0..3 {
                m.e[i][j] -= rhs.e[i][j];
            }
        }
        m
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self.scale(-1.0)
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for k in 0..3 {
                let a = self.e[i][k];
                for j in 0..3 {
                    m.e[i][j] += a * rhs.e[k][j];
                }
            }
        }
        m
    }
}

impl Mul<C64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: C64) -> Mat3 {
        let mut m = self;
        for row in m.e.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        m
    }
}

/// `AB - BA`.
pub fn commutator(a: &Mat3, b: &Mat3) -> Mat3 {
    *a * *b - *b * *a
}

/// Frobenius inner product `Tr(A B†)`; real when both arguments are
/// Hermitian or both skew-Hermitian.
pub fn frobenius_inner(a: &Mat3, b: &Mat3) -> C64 {
    let mut s = C0;
    for i in 0..3 {
        for j in 0..3 {
            s += a.e[i][j] * b.e[i][j].conj();
        }
    }
    s
}

/// Index into the orthonormal basis, `1..=9`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisIndex(usize);

impl BasisIndex {
    pub fn new(j: usize) -> Result<BasisIndex, Su3Error> {
        if (1..=9).contains(&j) {
            Ok(BasisIndex(j))
        } else {
            Err(Su3Error::IndexOutOfRange(j))
        }
    }

    pub fn get(&self) -> usize {
        self.0
    }
}

const H: f64 = FRAC_1_SQRT_2;
const CH: C64 = C64::new(H, 0.0);
const CHI: C64 = C64::new(0.0, H);
const C1: C64 = C64::new(1.0, 0.0);

/// The nine basis matrices, `BASIS[j-1] = G_j`.
pub static BASIS: [Mat3; 9] = [
    Mat3 { e: [[C1, C0, C0], [C0, C0, C0], [C0, C0, C0]] },
    Mat3 { e: [[C0, C0, C0], [C0, C1, C0], [C0, C0, C0]] },
    Mat3 { e: [[C0, C0, C0], [C0, C0, C0], [C0, C0, C1]] },
    Mat3 { e: [[C0, CH, C0], [CH, C0, C0], [C0, C0, C0]] },
    Mat3 { e: [[C0, CHI, C0], [C64::new(0.0, -H), C0, C0], [C0, C0, C0]] },
    Mat3 { e: [[C0, C0, CH], [C0, C0, C0], [CH, C0, C0]] },
    Mat3 { e: [[C0, C0, CHI], [C0, C0, C0], [C64::new(0.0, -H), C0, C0]] },
    Mat3 { e: [[C0, C0, C0], [C0, C0, CH], [C0, CH, C0]] },
    Mat3 { e: [[C0, C0, C0], [C0, C0, CHI], [C0, C64::new(0.0, -H), C0]] },
];

/// The basis matrix `G_j`.
pub fn basis_matrix(j: BasisIndex) -> Hermitian3 {
    Hermitian3 { m: BASIS[j.get() - 1] }
}

/// `G_j` as a raw matrix, `j` in `1..=9`.  Panics on an invalid index; use
/// [`basis_matrix`] for checked access.
pub fn g(j: usize) -> &'static Mat3 {
    &BASIS[j - 1]
}

/// A validated Hermitian 3×3 matrix with its real 9-vector of basis
/// coordinates available on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hermitian3 {
    m: Mat3,
}

impl Hermitian3 {
    /// Wraps `m`, requiring `max |m - m†| ≤ 1e-12`.  The stored matrix is
    /// symmetrized to `(m + m†)/2` so that coordinate round-trips are exact.
    pub fn new(m: Mat3) -> Result<Hermitian3, Su3Error> {
        if !m.is_finite() {
            return Err(Su3Error::NonFinite);
        }
        let defect = m.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(Su3Error::NotHermitian(defect));
        }
        Ok(Hermitian3 { m: (m + m.adjoint()).scale(0.5) })
    }

    /// Wraps a matrix already known to be Hermitian (integrator output is
    /// re-Hermitized every step).
    pub(crate) fn trusted(m: Mat3) -> Hermitian3 {
        Hermitian3 { m }
    }

    /// Reconstructs the matrix from basis coordinates: `M = Σ c_j G_j`.
    pub fn from_coords(c: &[f64; 9]) -> Hermitian3 {
        let mut m = Mat3::ZERO;
        for (j, cj) in c.iter().enumerate() {
            m = m + BASIS[j].scale(*cj);
        }
        Hermitian3 { m }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    /// Basis coordinates `c_j = ⟨G_j, M⟩` (real by Hermiticity).
    pub fn coords(&self) -> [f64; 9] {
        let m = &self.m;
        [
            m.e[0][0].re,
            m.e[1][1].re,
            m.e[2][2].re,
            H * (m.e[0][1].re + m.e[1][0].re),
            H * (m.e[0][1].im - m.e[1][0].im),
            H * (m.e[0][2].re + m.e[2][0].re),
            H * (m.e[0][2].im - m.e[2][0].im),
            H * (m.e[1][2].re + m.e[2][1].re),
            H * (m.e[1][2].im - m.e[2][1].im),
        ]
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        hermitian_eigenvalues(&self.m)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.frobenius_norm()
    }
}

/// A validated traceless skew-Hermitian 3×3 matrix (an `su(3)` element).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewHermitian3 {
    m: Mat3,
}

impl SkewHermitian3 {
    pub(crate) fn trusted(m: Mat3) -> SkewHermitian3 {
        SkewHermitian3 { m }
    }

    pub fn new(m: Mat3) -> Result<SkewHermitian3, Su3Error> {
        if !m.is_finite() {
            return Err(Su3Error::NonFinite);
        }
        let defect = m.skewness_defect();
        if defect > HERMITICITY_TOL {
            return Err(Su3Error::NotSkewHermitian(defect));
        }
        let tr = m.trace().norm();
        if tr > HERMITICITY_TOL {
            return Err(Su3Error::NonzeroTrace(tr));
        }
        Ok(SkewHermitian3 { m: (m - m.adjoint()).scale(0.5) })
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.frobenius_norm()
    }
}

/// Matrix exponential of a skew-Hermitian (more generally, normal) 3×3
/// matrix by scaling-and-squaring with a Taylor core; the result of a
/// skew-Hermitian argument is unitary to better than 1e-12.
pub fn expm(a: &Mat3) -> Result<Mat3, Su3Error> {
    if !a.is_finite() {
        return Err(Su3Error::NonFinite);
    }
    let norm = a.frobenius_norm();
    // Scale so the Taylor argument is small; 14 terms at ‖B‖ ≤ 1/4 leave a
    // truncation error below 1e-21.
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let b = a.scale(0.5f64.powi(squarings as i32));
    let mut term = Mat3::identity();
    let mut sum = Mat3::identity();
    for k in 1..=14u32 {
        term = (term * b).scale(1.0 / k as f64);
        sum = sum + term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    Ok(sum)
}

/// Eigenvalues of a Hermitian 3×3 matrix, descending, by the trigonometric
/// solution of the characteristic cubic.
pub fn hermitian_eigenvalues(m: &Mat3) -> [f64; 3] {
    let a11 = m.e[0][0].re;
    let a22 = m.e[1][1].re;
    let a33 = m.e[2][2].re;
    let p1 = m.e[0][1].norm_sqr() + m.e[0][2].norm_sqr() + m.e[1][2].norm_sqr();
    if p1 == 0.0 {
        let mut d = [a11, a22, a33];
        d.sort_by(|x, y| y.partial_cmp(x).unwrap());
        return d;
    }
    let q = (a11 + a22 + a33) / 3.0;
    let p2 = (a11 - q).powi(2) + (a22 - q).powi(2) + (a33 - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = *m;
    for i in 0..3 {
        b.e[i][i] -= C64::new(q, 0.0);
    }
    let b = b.scale(1.0 / p);
    let det = det3(&b).re;
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e1, e2, e3]
}

fn det3(m: &Mat3) -> C64 {
    let e = &m.e;
    e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
        - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
        + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rand_c64(rng: &mut ChaCha8Rng) -> C64 {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    fn rand_mat(rng: &mut ChaCha8Rng) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.e[i][j] = rand_c64(rng);
            }
        }
        m
    }

    fn rand_hermitian(rng: &mut ChaCha8Rng) -> Mat3 {
        let m = rand_mat(rng);
        (m + m.adjoint()).scale(0.5)
    }

    fn rand_skew(rng: &mut ChaCha8Rng) -> Mat3 {
        let m = rand_mat(rng);
        let mut s = (m - m.adjoint()).scale(0.5);
        let t = s.trace() / C64::new(3.0, 0.0);
        for i in 0..3 {
            s.e[i][i] -= t;
        }
        s
    }

    #[test]
    fn basis_matches_definition() {
        assert_eq!(g(1), &Mat3::diag(1.0, 0.0, 0.0));
        let g4 = g(4);
        assert_eq!(g4.e[0][1], C64::new(H, 0.0));
        assert_eq!(g4.e[1][0], C64::new(H, 0.0));
        assert_eq!(g4.e[2][2], C0);
        assert!(BasisIndex::new(0).is_err());
        assert!(BasisIndex::new(10).is_err());
        assert_eq!(
            basis_matrix(BasisIndex::new(4).unwrap()).matrix(),
            g(4)
        );
    }

    #[test]
    fn basis_is_orthonormal() {
        for j in 1..=9 {
            for k in 1..=9 {
                let v = frobenius_inner(g(j), g(k));
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((v.re - want).abs() < EXACT_TOL && v.im.abs() < EXACT_TOL, "({j},{k})");
            }
        }
    }

    /// Full commutator table: every `[iG_j, iG_k]` for `j < k`, entrywise.
    #[test]
    fn commutator_table() {
        let ig = |j: usize| *g(j) * C64::i();
        // (j, k) -> list of (m, coefficient) with [iG_j, iG_k] = sum coeff * iG_m
        let table: &[((usize, usize), &[(usize, f64)])] = &[
            ((1, 4), &[(5, 1.0)]),
            ((1, 5), &[(4, -1.0)]),
            ((1, 6), &[(7, 1.0)]),
            ((1, 7), &[(6, -1.0)]),
            ((2, 4), &[(5, -1.0)]),
            ((2, 5), &[(4, 1.0)]),
            ((2, 8), &[(9, 1.0)]),
            ((2, 9), &[(8, -1.0)]),
            ((3, 6), &[(7, -1.0)]),
            ((3, 7), &[(6, 1.0)]),
            ((3, 8), &[(9, -1.0)]),
            ((3, 9), &[(8, 1.0)]),
            ((4, 5), &[(1, 1.0), (2, -1.0)]),
            ((4, 6), &[(9, H)]),
            ((4, 7), &[(8, -H)]),
            ((4, 8), &[(7, H)]),
            ((4, 9), &[(6, -H)]),
            ((5, 6), &[(8, H)]),
            ((5, 7), &[(9, H)]),
            ((5, 8), &[(6, -H)]),
            ((5, 9), &[(7, -H)]),
            ((6, 7), &[(1, 1.0), (3, -1.0)]),
            ((6, 8), &[(5, H)]),
            ((6, 9), &[(4, H)]),
            ((7, 8), &[(4, -H)]),
            ((7, 9), &[(5, H)]),
            ((8, 9), &[(2, 1.0), (3, -1.0)]),
        ];
        let mut checked = 0;
        for j in 1..=9 {
            for k in (j + 1)..=9 {
                let got = commutator(&ig(j), &ig(k));
                let mut want = Mat3::ZERO;
                if let Some((_, terms)) = table.iter().find(|(jk, _)| *jk == (j, k)) {
                    for (m, c) in terms.iter() {
                        want = want + ig(*m).scale(*c);
                    }
                }
                assert!(
                    (got - want).max_abs() < EXACT_TOL,
                    "[iG{j}, iG{k}] mismatch: defect {}",
                    (got - want).max_abs()
                );
                checked += 1;
            }
        }
        assert_eq!(checked, 36);
    }

    #[test]
    fn self_commutator_vanishes() {
        let ig4 = *g(4) * C64::i();
        assert_eq!(commutator(&ig4, &ig4).max_abs(), 0.0);
    }

    #[test]
    fn inner_product_examples() {
        // <G1, rho0(a=2/3)> = 0: the top-left entry of rho0 is zero.
        let rho0 = Mat3::diag(0.0, 2.0 / 3.0, 1.0 / 3.0);
        assert_eq!(frobenius_inner(g(1), &rho0).re, 0.0);
        // <G4, iG5> checked against the direct entrywise sum (both vanish:
        // iG5 is real antisymmetric, G4 real symmetric).
        let ig5 = *g(5) * C64::i();
        let direct = frobenius_inner(g(4), &ig5);
        let mut entrywise = C0;
        for i in 0..3 {
            for j in 0..3 {
                entrywise += g(4).e[i][j] * ig5.e[i][j].conj();
            }
        }
        assert!((direct - entrywise).norm() < EXACT_TOL);
        // and a nonzero cross-check: <G4, iG4> = -i
        let ig4 = *g(4) * C64::i();
        let v = frobenius_inner(g(4), &ig4);
        assert!(v.re.abs() < EXACT_TOL && (v.im + 1.0).abs() < EXACT_TOL);
    }

    #[test]
    fn vectorization_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let m = Hermitian3::new(rand_hermitian(&mut rng)).unwrap();
            let back = Hermitian3::from_coords(&m.coords());
            assert!((*back.matrix() - *m.matrix()).max_abs() < EXACT_TOL);
        }
    }

    #[test]
    fn hermitian_validation() {
        let mut bad = Mat3::identity();
        bad.e[0][1] = C64::new(0.0, 1.0);
        assert!(matches!(Hermitian3::new(bad), Err(Su3Error::NotHermitian(_))));
        let mut skew_bad = Mat3::ZERO;
        skew_bad.e[0][0] = C64::new(0.0, 1.0); // skew-Hermitian but traceful
        assert!(matches!(
            SkewHermitian3::new(skew_bad),
            Err(Su3Error::NonzeroTrace(_))
        ));
    }

    #[test]
    fn bottcher_wenzel_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let a = rand_mat(&mut rng);
            let b = rand_mat(&mut rng);
            let lhs = commutator(&a, &b).frobenius_norm();
            let rhs = 2f64.sqrt() * a.frobenius_norm() * b.frobenius_norm();
            assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }

    #[test]
    fn expm_identity_and_rotation() {
        let id = expm(&Mat3::ZERO).unwrap();
        assert!((id - Mat3::identity()).max_abs() < 1e-15);
        // exp(i h9 G9 t) with h9 t = sqrt(2) pi rotates the (2,3) plane by pi.
        let arg = (*g(9) * C64::i()).scale(2f64.sqrt() * std::f64::consts::PI);
        let got = expm(&arg).unwrap();
        let want = Mat3::diag(1.0, -1.0, -1.0);
        assert!((got - want).max_abs() < 1e-13);
    }

    #[test]
    fn expm_inverse_identity_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let s = rand_skew(&mut rng).scale(rng.gen_range(0.1..20.0));
            let e = expm(&s).unwrap();
            let einv = expm(&s.scale(-1.0)).unwrap();
            assert!((e * einv - Mat3::identity()).max_abs() < 1e-12);
            assert!((e * e.adjoint() - Mat3::identity()).max_abs() < 1e-12);
        }
    }

    #[test]
    fn expm_rejects_non_finite() {
        let mut m = Mat3::ZERO;
        m.e[1][2] = C64::new(f64::NAN, 0.0);
        assert!(matches!(expm(&m), Err(Su3Error::NonFinite)));
    }

    #[test]
    fn eigenvalues_of_diagonal_and_random() {
        let m = Mat3::diag(0.0, 2.0 / 3.0, 1.0 / 3.0);
        let e = hermitian_eigenvalues(&m);
        assert!((e[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((e[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(e[2].abs() < 1e-15);
        // spectral consistency: trace and Frobenius norm match eigenvalue sums
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let m = rand_hermitian(&mut rng);
            let e = hermitian_eigenvalues(&m);
            let tr: f64 = e.iter().sum();
            assert!((tr - m.trace().re).abs() < 1e-12);
            let n2: f64 = e.iter().map(|x| x * x).sum();
            assert!((n2 - m.frobenius_norm().powi(2)).abs() < 1e-11);
        }
    }
}
