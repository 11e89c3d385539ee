//! Two-mode Gaussian states described by their covariance matrix.
//!
//! Convention: ordering `(x, p_x, y, p_y)`, vacuum covariance `I/2`.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_min_eigenvalue, Mat2, Mat4};

/// Minimum eigenvalue of `σ + (i/2)Ω` accepted for raw input.
pub const PHYSICALITY_TOL: f64 = 1e-10;

/// Symmetry tolerance for raw input.
pub const RAW_SYMMETRY_TOL: f64 = 1e-9;

/// `Ω = J ⊕ J`.
pub fn omega() -> Mat4 {
    Mat4::block_diag(&Mat2::symplectic(), &Mat2::symplectic())
}

/// A covariance matrix together with its uncertainty-relation certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceState {
    sigma: Mat4,
    residual: f64,
}

/// `σ = [[A, C], [Cᵀ, B]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockDecomp {
    pub a: Mat2,
    pub b: Mat2,
    pub c: Mat2,
}

impl BlockDecomp {
    pub fn assemble(&self) -> Mat4 {
        Mat4::from_blocks(&self.a, &self.b, &self.c)
    }
}

impl CovarianceState {
    /// Two-mode vacuum, `I/2`.
    pub fn vacuum() -> Self {
        Self::certified(Mat4::identity() * 0.5)
    }

    /// Product of two single-mode squeezed vacua, each
    /// `(1/2)[[cosh r, sinh r], [sinh r, cosh r]]`.
    pub fn single_mode_squeezed(r: f64) -> Self {
        let (c, s) = (0.5 * r.cosh(), 0.5 * r.sinh());
        let block = Mat2::new(c, s, s, c);
        Self::certified(Mat4::block_diag(&block, &block))
    }

    /// Two-mode squeezed vacuum: `A = B = (cosh r / 2) I`,
    /// `C = (sinh r / 2) diag(1, -1)`.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let (c, s) = (0.5 * r.cosh(), 0.5 * r.sinh());
        let a = Mat2::new(c, 0.0, 0.0, c);
        let corr = Mat2::new(s, 0.0, 0.0, -s);
        Self::certified(Mat4::from_blocks(&a, &a, &corr))
    }

    /// Validates an arbitrary covariance matrix: finite, symmetric within
    /// [`RAW_SYMMETRY_TOL`], and satisfying the uncertainty relation within
    /// [`PHYSICALITY_TOL`].
    pub fn from_raw(sigma: Mat4) -> Result<Self> {
        Self::with_tolerance(sigma, PHYSICALITY_TOL)
    }

    /// As [`CovarianceState::from_raw`] with a caller-chosen physicality floor.
    pub fn with_tolerance(sigma: Mat4, tolerance: f64) -> Result<Self> {
        if !sigma.is_finite() {
            return Err(Error::NonFinite {
                what: "covariance matrix",
            });
        }
        let dev = sigma.asymmetry();
        if dev > RAW_SYMMETRY_TOL {
            return Err(Error::Asymmetric { max_deviation: dev });
        }
        let sigma = sigma.symmetrize();
        let residual = uncertainty_residual(&sigma);
        if residual < -tolerance {
            return Err(Error::Unphysical { residual });
        }
        Ok(CovarianceState { sigma, residual })
    }

    fn certified(sigma: Mat4) -> Self {
        let residual = uncertainty_residual(&sigma);
        CovarianceState { sigma, residual }
    }

    pub fn sigma(&self) -> &Mat4 {
        &self.sigma
    }

    /// Smallest eigenvalue of `σ + (i/2)Ω`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn blocks(&self) -> BlockDecomp {
        blocks(&self.sigma)
    }
}

/// Exact extraction of the `A`, `B`, `C` blocks.
pub fn blocks(sigma: &Mat4) -> BlockDecomp {
    BlockDecomp {
        a: sigma.block(0, 0),
        b: sigma.block(1, 1),
        c: sigma.block(0, 1),
    }
}

/// Smallest eigenvalue of the Hermitian matrix `σ + (i/2)Ω`, via its real
/// 8x8 embedding `[[σ, -Ω/2], [Ω/2, σ]]`. Non-negative iff `σ` is a
/// physical covariance matrix.
pub fn uncertainty_residual(sigma: &Mat4) -> f64 {
    hermitian_min_eigenvalue(sigma, &(omega() * 0.5), PHYSICALITY_TOL).min_eigenvalue
}
