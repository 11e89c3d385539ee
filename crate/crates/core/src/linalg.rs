//! Fixed-size dense linear algebra for the 2x2 and 4x4 real matrices that
//! appear in two-mode covariance dynamics.
//!
//! Everything here is a plain value type; no allocation happens on any path.
//! The only larger objects are the 8x8 real embeddings of 4x4 Hermitian
//! matrices and the 16x16 vectorised Lyapunov operator.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Series order used by [`expm4`].
pub const EXPM_SERIES_ORDER: usize = 16;

/// Inputs with a larger 1-norm are refused by [`expm4`]; `e^700` is close to
/// the largest finite `f64`.
pub const EXPM_NORM_LIMIT: f64 = 700.0;

/// Relative symmetry tolerance accepted by [`sym_eig4`].
pub const SYMMETRY_TOL: f64 = 1e-12;

const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// A 2x2 real matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

/// A 4x4 real matrix stored row-major.
///
/// When used as a covariance matrix the ordering is `(x, p_x, y, p_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [[f64; 4]; 4]);

impl Mat2 {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub const fn zeros() -> Self {
        Mat2([[0.0; 2]; 2])
    }

    pub const fn identity() -> Self {
        Mat2([[1.0, 0.0], [0.0, 1.0]])
    }

    /// The symplectic form `[[0, 1], [-1, 0]]`.
    pub const fn symplectic() -> Self {
        Mat2([[0.0, 1.0], [-1.0, 0.0]])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        det2(self)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

/// `ad - bc`.
pub fn det2(m: &Mat2) -> f64 {
    let [[a, b], [c, d]] = m.0;
    a.mul_add(d, -(b * c))
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let mut out = Mat2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = self.0[i][0] * rhs.0[0][j] + self.0[i][1] * rhs.0[1][j];
            }
        }
        out
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, k: f64) -> Mat2 {
        Mat2(self.0.map(|row| row.map(|v| v * k)))
    }
}

impl Mat4 {
    pub const fn zeros() -> Self {
        Mat4([[0.0; 4]; 4])
    }

    pub const fn identity() -> Self {
        Mat4([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ])
    }

    pub fn diag(d: [f64; 4]) -> Self {
        let mut m = Mat4::zeros();
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    /// Builds `[[a, c], [c^T, b]]`.
    pub fn from_blocks(a: &Mat2, b: &Mat2, c: &Mat2) -> Self {
        let mut m = Mat4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = a.0[i][j];
                m.0[i + 2][j + 2] = b.0[i][j];
                m.0[i][j + 2] = c.0[i][j];
                m.0[i + 2][j] = c.0[j][i];
            }
        }
        m
    }

    pub fn block_diag(a: &Mat2, b: &Mat2) -> Self {
        Mat4::from_blocks(a, b, &Mat2::zeros())
    }

    /// The 2x2 sub-block at block row `bi`, block column `bj`.
    pub fn block(&self, bi: usize, bj: usize) -> Mat2 {
        let (r, c) = (2 * bi, 2 * bj);
        Mat2([
            [self.0[r][c], self.0[r][c + 1]],
            [self.0[r + 1][c], self.0[r + 1][c + 1]],
        ])
    }

    pub fn transpose(&self) -> Self {
        let mut out = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = self.0[j][i];
            }
        }
        out
    }

    pub fn symmetrize(&self) -> Self {
        let mut out = *self;
        for i in 0..4 {
            for j in (i + 1)..4 {
                let v = 0.5 * (self.0[i][j] + self.0[j][i]);
                out.0[i][j] = v;
                out.0[j][i] = v;
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..4)
            .map(|j| (0..4).map(|i| self.0[i][j].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest `|m_ij - m_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in (i + 1)..4 {
                worst = worst.max((self.0[i][j] - self.0[j][i]).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn det(&self) -> f64 {
        det4(self)
    }

    /// Row-major flattening.
    pub fn to_array(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for i in 0..4 {
            out[4 * i..4 * i + 4].copy_from_slice(&self.0[i]);
        }
        out
    }

    pub fn from_array(v: &[f64; 16]) -> Self {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            m.0[i].copy_from_slice(&v[4 * i..4 * i + 4]);
        }
        m
    }
}

impl Index<(usize, usize)> for Mat4 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, rhs: Mat4) -> Mat4 {
        let mut out = self;
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, rhs: Mat4) -> Mat4 {
        let mut out = self;
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }
}

impl Neg for Mat4 {
    type Output = Mat4;
    fn neg(self) -> Mat4 {
        self * -1.0
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        let mut out = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += self.0[i][k] * rhs.0[k][j];
                }
                out.0[i][j] = acc;
            }
        }
        out
    }
}

impl Mul<f64> for Mat4 {
    type Output = Mat4;
    fn mul(self, k: f64) -> Mat4 {
        Mat4(self.0.map(|row| row.map(|v| v * k)))
    }
}

/// LU factorisation with partial pivoting, in place. Returns the row
/// permutation parity and the pivots in elimination order.
fn lu_in_place<const N: usize>(a: &mut [[f64; N]; N], perm: &mut [usize; N]) -> (f64, [f64; N]) {
    let mut sign = 1.0;
    let mut pivots = [0.0; N];
    for (i, p) in perm.iter_mut().enumerate() {
        *p = i;
    }
    for col in 0..N {
        let (piv_row, _) = (col..N).fold((col, -1.0), |(best, best_abs), r| {
            let v = a[r][col].abs();
            if v > best_abs {
                (r, v)
            } else {
                (best, best_abs)
            }
        });
        if piv_row != col {
            a.swap(piv_row, col);
            perm.swap(piv_row, col);
            sign = -sign;
        }
        let pivot = a[col][col];
        pivots[col] = pivot;
        if pivot == 0.0 {
            continue;
        }
        for r in (col + 1)..N {
            let factor = a[r][col] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[r][col] = factor;
            for c in (col + 1)..N {
                a[r][c] -= factor * a[col][c];
            }
        }
    }
    (sign, pivots)
}

/// Determinant by LU with partial pivoting.
pub fn det4(m: &Mat4) -> f64 {
    let mut a = m.0;
    let mut perm = [0usize; 4];
    let (sign, pivots) = lu_in_place(&mut a, &mut perm);
    sign * pivots.iter().product::<f64>()
}

/// Solves the dense 16x16 system `coeff * x = rhs`.
///
/// A pivot below `1e-14 * max|coeff|` is treated as singular and the error
/// carries the smallest pivot magnitude seen.
pub fn solve16(coeff: &[[f64; 16]; 16], rhs: &[f64; 16]) -> Result<[f64; 16]> {
    if !coeff.iter().flatten().chain(rhs.iter()).all(|v| v.is_finite()) {
        return Err(Error::NonFinite { what: "linear system" });
    }
    let scale = coeff.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let mut a = *coeff;
    let mut perm = [0usize; 16];
    let (_, pivots) = lu_in_place(&mut a, &mut perm);
    let smallest = pivots.iter().fold(f64::INFINITY, |acc, p| acc.min(p.abs()));
    if scale == 0.0 || smallest <= 1e-14 * scale {
        return Err(Error::Singular { pivot: smallest });
    }

    let mut x = [0.0; 16];
    for i in 0..16 {
        let mut acc = rhs[perm[i]];
        for j in 0..i {
            acc -= a[i][j] * x[j];
        }
        x[i] = acc;
    }
    for i in (0..16).rev() {
        let mut acc = x[i];
        for j in (i + 1)..16 {
            acc -= a[i][j] * x[j];
        }
        x[i] = acc / a[i][i];
    }
    Ok(x)
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues come back ascending; column `k` of the vector matrix is the
/// eigenvector for eigenvalue `k`. The input is not checked for symmetry;
/// only its upper triangle is effectively used after the first rotation.
pub fn jacobi_eigen<const N: usize>(m: &[[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let mut a = *m;
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let total: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_OFF_TOL * total || off == 0.0 {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.map(|i| a[i][i]);
    let mut vectors = [[0.0; N]; N];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..N {
            vectors[row][new_col] = v[row][old_col];
        }
    }
    (values, vectors)
}

/// Ascending eigenvalues of a symmetric 4x4 matrix.
///
/// The input is symmetrised first; an asymmetry above
/// `SYMMETRY_TOL * max(1, max|m|)` is rejected.
pub fn sym_eig4(m: &Mat4) -> Result<[f64; 4]> {
    if !m.is_finite() {
        return Err(Error::NonFinite { what: "matrix" });
    }
    let dev = m.asymmetry();
    if dev > SYMMETRY_TOL * m.max_abs().max(1.0) {
        return Err(Error::Asymmetric { max_deviation: dev });
    }
    Ok(jacobi_eigen(&m.symmetrize().0).0)
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// The argument is halved until its 1-norm is at most 1/2, the series is
/// summed in Horner form to order [`EXPM_SERIES_ORDER`], and the result is
/// squared back up.
pub fn expm4(m: &Mat4) -> Result<Mat4> {
    if !m.is_finite() {
        return Err(Error::NonFinite { what: "matrix" });
    }
    let norm = m.norm_one();
    if norm > EXPM_NORM_LIMIT {
        return Err(Error::NormTooLarge {
            norm,
            limit: EXPM_NORM_LIMIT,
        });
    }
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.5 {
        scaled_norm *= 0.5;
        squarings += 1;
    }
    let a = *m * 0.5_f64.powi(squarings as i32);

    let id = Mat4::identity();
    let mut r = id;
    for j in (1..=EXPM_SERIES_ORDER).rev() {
        r = id + (a * r) * (1.0 / j as f64);
    }
    for _ in 0..squarings {
        r = r * r;
    }
    Ok(r)
}

/// Coefficients `[c1, c2, c3, c4]` of `det(xI - m) = x^4 + c1 x^3 + c2 x^2 + c3 x + c4`
/// (Faddeev-LeVerrier).
pub fn char_poly4(m: &Mat4) -> [f64; 4] {
    let id = Mat4::identity();
    let mut coeffs = [0.0; 4];
    let mut mk = Mat4::zeros();
    let mut prev = 1.0;
    for k in 1..=4 {
        mk = *m * mk + id * prev;
        let c = -(*m * mk).trace() / k as f64;
        coeffs[k - 1] = c;
        prev = c;
    }
    coeffs
}

/// Routh-Hurwitz test: every eigenvalue of `m` has strictly negative real part.
pub fn is_hurwitz(m: &Mat4) -> bool {
    let [a1, a2, a3, a4] = char_poly4(m);
    a1 > 0.0 && a3 > 0.0 && a4 > 0.0 && a1 * a2 > a3 && a1 * a2 * a3 > a3 * a3 + a1 * a1 * a4
}

/// `a ⊗ b` for 4x4 factors, indexed so that it acts on row-major vectorised
/// matrices.
pub fn kron4(a: &Mat4, b: &Mat4) -> [[f64; 16]; 16] {
    let mut out = [[0.0; 16]; 16];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    out[4 * i + k][4 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    out
}

/// Smallest eigenvalue of a 4x4 Hermitian matrix `re + i im`, with the
/// tolerance it will be judged against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianCheck {
    pub min_eigenvalue: f64,
    pub tolerance: f64,
}

impl HermitianCheck {
    pub fn passes(&self) -> bool {
        self.min_eigenvalue >= -self.tolerance
    }
}

/// Minimum eigenvalue of the Hermitian matrix `re + i im` (`re` symmetric,
/// `im` antisymmetric), computed through the real symmetric embedding
/// `[[re, -im], [im, re]]`, whose spectrum is that of `re + i im` doubled.
pub fn hermitian_min_eigenvalue(re: &Mat4, im: &Mat4, tolerance: f64) -> HermitianCheck {
    assert!(tolerance > 0.0, "tolerance must be positive");
    let mut big = [[0.0; 8]; 8];
    for i in 0..4 {
        for j in 0..4 {
            big[i][j] = re.0[i][j];
            big[i + 4][j + 4] = re.0[i][j];
            big[i][j + 4] = -im.0[i][j];
            big[i + 4][j] = im.0[i][j];
        }
    }
    let (values, _) = jacobi_eigen(&big);
    HermitianCheck {
        min_eigenvalue: values[0],
        tolerance,
    }
}
