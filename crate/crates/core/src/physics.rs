//! Physical parameterisation of two uncoupled oscillators in a common
//! thermal bath: the drift matrix, the thermal diffusion matrix, and the
//! complete-positivity constraints a diffusion matrix has to satisfy.
//!
//! Units are natural (ħ = k = 1). Matrices use the ordering `(x, p_x, y, p_y)`.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_min_eigenvalue, Mat2, Mat4};

/// Residual floor for the pairwise Cauchy-Schwarz inequalities.
pub const CP_TOLERANCE: f64 = 1e-12;

/// Mass, mode frequencies, dissipation constant and bath temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    pub mass: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub lambda: f64,
    pub temperature: f64,
}

impl PhysParams {
    /// Validated parameters with unit mass.
    pub fn new(omega1: f64, omega2: f64, lambda: f64, temperature: f64) -> Result<Self> {
        Self::with_mass(1.0, omega1, omega2, lambda, temperature)
    }

    pub fn with_mass(mass: f64, omega1: f64, omega2: f64, lambda: f64, temperature: f64) -> Result<Self> {
        let p = PhysParams {
            mass,
            omega1,
            omega2,
            lambda,
            temperature,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same parameters at a different bath temperature.
    pub fn at_temperature(&self, temperature: f64) -> Result<Self> {
        let p = PhysParams { temperature, ..*self };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("lambda", self.lambda),
        ];
        for (name, value) in positive {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
            if value <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be strictly positive",
                });
            }
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(Error::InvalidParameter {
                name: "temperature",
                value: self.temperature,
                reason: "must be finite and non-negative",
            });
        }
        Ok(())
    }

    /// `coth(ω / 2T)` for a mode of frequency `omega`, exactly 1 at `T = 0`.
    pub fn thermal_factor(&self, omega: f64) -> f64 {
        if self.temperature == 0.0 {
            1.0
        } else {
            coth_stable(omega / (2.0 * self.temperature)).unwrap_or(1.0)
        }
    }

    /// `coth²(ω / 2T) - 1`, exactly 0 at `T = 0`.
    pub fn thermal_excess(&self, omega: f64) -> f64 {
        if self.temperature == 0.0 {
            0.0
        } else {
            coth_sq_minus_one(omega / (2.0 * self.temperature))
        }
    }
}

/// Drift `Y` and diffusion `D` of the covariance equation, plus the `λ`
/// entering the complete-positivity constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvMatrices {
    pub drift: Mat4,
    pub diffusion: Mat4,
    pub lambda: f64,
}

impl EnvMatrices {
    pub fn thermal(p: &PhysParams) -> Result<Self> {
        p.validate()?;
        Ok(EnvMatrices {
            drift: build_drift(p),
            diffusion: build_thermal_diffusion(p),
            lambda: p.lambda,
        })
    }

    pub fn cp_report(&self) -> CpReport {
        validate_cp(&self.diffusion, self.lambda)
    }
}

fn oscillator_block(p: &PhysParams, omega: f64) -> Mat2 {
    Mat2::new(-p.lambda, 1.0 / p.mass, -p.mass * omega * omega, -p.lambda)
}

/// Block-diagonal drift matrix with blocks `[[-λ, 1/m], [-mω², -λ]]`.
pub fn build_drift(p: &PhysParams) -> Mat4 {
    Mat4::block_diag(&oscillator_block(p, p.omega1), &oscillator_block(p, p.omega2))
}

/// `coth(x)` for `x > 0`, accurate to a few ulps over the whole range.
pub fn coth_stable(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "x",
            value: x,
            reason: "coth is evaluated only for x > 0",
        });
    }
    Ok(if x >= 20.0 {
        1.0 + 2.0 * (-2.0 * x).exp()
    } else if x >= 1e-2 {
        1.0 + 2.0 / (2.0 * x).exp_m1()
    } else {
        let x2 = x * x;
        1.0 / x + x / 3.0 - x * x2 / 45.0
    })
}

/// `coth²(x) - 1 = 1/sinh²(x)` without the cancellation of the naive form.
pub fn coth_sq_minus_one(x: f64) -> f64 {
    if x >= 20.0 {
        4.0 * (-2.0 * x).exp()
    } else {
        let s = x.sinh();
        1.0 / (s * s)
    }
}

/// Thermal diffusion matrix: `mω D_xx = D_pp / (mω) = (λ/2) coth(ω/2T)` per
/// mode, every cross coefficient zero.
pub fn build_thermal_diffusion(p: &PhysParams) -> Mat4 {
    let mode = |omega: f64| {
        let half = 0.5 * p.lambda * p.thermal_factor(omega);
        let mw = p.mass * omega;
        (half / mw, half * mw)
    };
    let (dxx, dpx) = mode(p.omega1);
    let (dyy, dpy) = mode(p.omega2);
    Mat4::diag([dxx, dpx, dyy, dpy])
}

/// One pairwise Cauchy-Schwarz inequality, reported as `lhs - rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct CpResidual {
    pub name: &'static str,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CpReport {
    pub residuals: Vec<CpResidual>,
    /// Minimum eigenvalue of the full Hermitian coefficient matrix, present
    /// only in strict mode.
    pub strict_min_eigenvalue: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CpMode {
    /// The six pairwise inequalities.
    #[default]
    Pairwise,
    /// Pairwise inequalities plus positive semi-definiteness of the full
    /// 4x4 Hermitian coefficient matrix.
    Strict,
}

/// Checks the six pairwise complete-positivity inequalities on `d`.
pub fn validate_cp(d: &Mat4, lambda: f64) -> CpReport {
    validate_cp_with(d, lambda, CpMode::Pairwise)
}

pub fn validate_cp_with(d: &Mat4, lambda: f64, mode: CpMode) -> CpReport {
    const X: usize = 0;
    const PX: usize = 1;
    const Y: usize = 2;
    const PY: usize = 3;
    let e = |i: usize, j: usize| d.0[i][j];
    let quarter = 0.25 * lambda * lambda;
    let pairs: [(&'static str, usize, usize, f64); 6] = [
        ("Dxx*Dpxpx - Dxpx^2 >= lambda^2/4", X, PX, quarter),
        ("Dyy*Dpypy - Dypy^2 >= lambda^2/4", Y, PY, quarter),
        ("Dxx*Dyy - Dxy^2 >= 0", X, Y, 0.0),
        ("Dpxpx*Dpypy - Dpxpy^2 >= 0", PX, PY, 0.0),
        ("Dxx*Dpypy - Dxpy^2 >= 0", X, PY, 0.0),
        ("Dyy*Dpxpx - Dypx^2 >= 0", Y, PX, 0.0),
    ];
    let residuals: Vec<CpResidual> = pairs
        .iter()
        .map(|&(name, i, j, rhs)| {
            let residual = e(i, i) * e(j, j) - e(i, j) * e(i, j) - rhs;
            CpResidual {
                name,
                residual,
                pass: residual >= -CP_TOLERANCE,
            }
        })
        .collect();
    let mut pass = residuals.iter().all(|r| r.pass);

    let strict_min_eigenvalue = match mode {
        CpMode::Pairwise => None,
        CpMode::Strict => {
            // Coefficient matrix over (a_x, b_x, a_y, b_y): real part S D S with
            // S = diag(1, -1, 1, -1), imaginary part -(λ/2) Ω.
            let signs = [1.0, -1.0, 1.0, -1.0];
            let mut re = Mat4::zeros();
            for i in 0..4 {
                for j in 0..4 {
                    re.0[i][j] = signs[i] * signs[j] * d.0[i][j];
                }
            }
            let omega = Mat4::block_diag(&Mat2::symplectic(), &Mat2::symplectic());
            let check = hermitian_min_eigenvalue(&re, &(omega * (-0.5 * lambda)), CP_TOLERANCE);
            pass &= check.passes();
            Some(check.min_eigenvalue)
        }
    };

    CpReport {
        residuals,
        strict_min_eigenvalue,
        pass,
    }
}
