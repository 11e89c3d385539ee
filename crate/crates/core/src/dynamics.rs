//! Covariance evolution `dσ/dt = Yσ + σYᵀ + 2D`.
//!
//! The production path is the closed-form solution
//! `σ(t) = M(t)[σ(0) - σ(∞)]M(t)ᵀ + σ(∞)` with `M(t) = exp(Yt)` taken from the
//! block structure of the drift and `σ(∞)` from the vectorised Lyapunov
//! equation. A fixed-step RK4 integrator of the same ODE is kept alongside as
//! an independent check.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{is_hurwitz, kron4, solve16, Mat2, Mat4};
use crate::physics::{EnvMatrices, PhysParams};
use crate::states::CovarianceState;

/// Physicality floor for propagated states.
pub const TRAJECTORY_TOL: f64 = 1e-8;

/// Default RK4 step.
pub const DEFAULT_RK4_DT: f64 = 1e-3;

/// Upper bound on the number of RK4 steps in one call.
pub const MAX_RK4_STEPS: f64 = 1e7;

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "time must be finite and non-negative",
        });
    }
    Ok(())
}

/// `exp(Yt)` in closed form: per mode
/// `e^{-λt} [[cos ωt, sin ωt/(mω)], [-mω sin ωt, cos ωt]]`.
pub fn block_expm(p: &PhysParams, t: f64) -> Mat4 {
    let damp = (-p.lambda * t).exp();
    let mode = |omega: f64| {
        let (s, c) = (omega * t).sin_cos();
        let mw = p.mass * omega;
        Mat2::new(c, s / mw, -mw * s, c) * damp
    };
    Mat4::block_diag(&mode(p.omega1), &mode(p.omega2))
}

/// The 16x16 operator `Y ⊗ I + I ⊗ Y` acting on row-major `vec(σ)`, so that
/// it maps `σ` to `Yσ + σYᵀ`.
pub fn lyapunov_operator(y: &Mat4) -> [[f64; 16]; 16] {
    let id = Mat4::identity();
    let left = kron4(y, &id);
    let right = kron4(&id, y);
    let mut out = [[0.0; 16]; 16];
    for i in 0..16 {
        for j in 0..16 {
            out[i][j] = left[i][j] + right[i][j];
        }
    }
    out
}

/// Solves `Yσ + σYᵀ = -2D` for the steady-state covariance.
pub fn steady_state(y: &Mat4, d: &Mat4) -> Result<Mat4> {
    if !y.is_finite() || !d.is_finite() {
        return Err(Error::NonFinite {
            what: "drift or diffusion",
        });
    }
    if !is_hurwitz(y) {
        return Err(Error::UnstableDrift);
    }
    let rhs = (*d * -2.0).to_array();
    let x = solve16(&lyapunov_operator(y), &rhs)?;
    Ok(Mat4::from_array(&x).symmetrize())
}

/// `‖Yσ + σYᵀ + 2D‖_max`.
pub fn lyapunov_residual(y: &Mat4, d: &Mat4, sigma: &Mat4) -> f64 {
    (*y * *sigma + *sigma * y.transpose() + *d * 2.0).max_abs()
}

/// Everything needed to evaluate the closed-form solution for one parameter
/// set: drift, diffusion and the steady state, computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evolution {
    params: PhysParams,
    env: EnvMatrices,
    steady: Mat4,
}

impl Evolution {
    pub fn new(params: &PhysParams) -> Result<Self> {
        let env = EnvMatrices::thermal(params)?;
        let steady = steady_state(&env.drift, &env.diffusion)?;
        Ok(Evolution {
            params: *params,
            env,
            steady,
        })
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn env(&self) -> &EnvMatrices {
        &self.env
    }

    /// `σ(∞)`.
    pub fn steady(&self) -> &Mat4 {
        &self.steady
    }

    pub fn propagator(&self, t: f64) -> Mat4 {
        block_expm(&self.params, t)
    }

    /// `σ(t) - σ(∞) = M(t)[σ(0) - σ(∞)]M(t)ᵀ`, computed without adding the
    /// steady state back so it keeps full relative precision as it decays.
    pub fn excess_at(&self, s0: &CovarianceState, t: f64) -> Mat4 {
        let m = self.propagator(t);
        (m * (*s0.sigma() - self.steady) * m.transpose()).symmetrize()
    }

    /// Closed-form `σ(t)`; returns `σ(0)` bit-for-bit at `t = 0`.
    pub fn covariance_at(&self, s0: &CovarianceState, t: f64) -> Mat4 {
        if t == 0.0 {
            return *s0.sigma();
        }
        (self.excess_at(s0, t) + self.steady).symmetrize()
    }

    pub fn state_at(&self, s0: &CovarianceState, t: f64) -> Result<CovarianceState> {
        check_time(t)?;
        if t == 0.0 {
            return Ok(*s0);
        }
        CovarianceState::with_tolerance(self.covariance_at(s0, t), TRAJECTORY_TOL)
    }
}

/// `σ(t)` for the thermal model with parameters `p`.
pub fn propagate(s0: &CovarianceState, p: &PhysParams, t: f64) -> Result<CovarianceState> {
    check_time(t)?;
    Evolution::new(p)?.state_at(s0, t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: CovarianceState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: PhysParams,
    pub steady: Mat4,
    pub samples: Vec<Sample>,
}

/// Propagates `s0` to every point of a strictly increasing, non-negative grid.
pub fn sample_trajectory(s0: &CovarianceState, p: &PhysParams, grid: &[f64]) -> Result<Trajectory> {
    validate_grid(grid)?;
    let evo = Evolution::new(p)?;
    let samples = grid
        .par_iter()
        .map(|&t| evo.state_at(s0, t).map(|state| Sample { t, state }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        params: *p,
        steady: *evo.steady(),
        samples,
    })
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid {
            reason: "grid is empty",
        });
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidGrid {
            reason: "grid points must be finite and non-negative",
        });
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid {
            reason: "grid must be strictly increasing",
        });
    }
    Ok(())
}

fn covariance_rhs(y: &Mat4, yt: &Mat4, d2: &Mat4, sigma: &Mat4) -> Mat4 {
    *y * *sigma + *sigma * *yt + *d2
}

fn rk4_segment(sigma: Mat4, y: &Mat4, d: &Mat4, span: f64, dt: f64) -> Mat4 {
    if span == 0.0 {
        return sigma;
    }
    let steps = (span / dt).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let yt = y.transpose();
    let d2 = *d * 2.0;
    let f = |s: &Mat4| covariance_rhs(y, &yt, &d2, s);
    let mut s = sigma;
    for _ in 0..steps {
        let k1 = f(&s);
        let k2 = f(&(s + k1 * (0.5 * h)));
        let k3 = f(&(s + k2 * (0.5 * h)));
        let k4 = f(&(s + k3 * h));
        s = (s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)).symmetrize();
    }
    s
}

fn check_rk4(span: f64, dt: f64) -> Result<()> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "step must be positive",
        });
    }
    let steps = (span / dt).ceil();
    if steps > MAX_RK4_STEPS {
        return Err(Error::TooManySteps {
            steps,
            limit: MAX_RK4_STEPS,
        });
    }
    Ok(())
}

/// Integrates the covariance ODE from `s0` to time `t` with classical RK4.
///
/// The step is shrunk so that a whole number of steps lands exactly on `t`.
pub fn rk4_oracle(s0: &CovarianceState, y: &Mat4, d: &Mat4, t: f64, dt: f64) -> Result<Mat4> {
    check_time(t)?;
    check_rk4(t, dt)?;
    Ok(rk4_segment(*s0.sigma(), y, d, t, dt))
}

/// RK4 solution at every point of an increasing grid, integrating once
/// through the whole grid.
pub fn rk4_samples(s0: &CovarianceState, y: &Mat4, d: &Mat4, grid: &[f64], dt: f64) -> Result<Vec<Mat4>> {
    validate_grid(grid)?;
    check_rk4(*grid.last().unwrap_or(&0.0), dt)?;
    let mut out = Vec::with_capacity(grid.len());
    let mut sigma = *s0.sigma();
    let mut now = 0.0;
    for &t in grid {
        sigma = rk4_segment(sigma, y, d, t - now, dt);
        now = t;
        out.push(sigma);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm4;
    use crate::physics::build_drift;
    use std::f64::consts::FRAC_PI_2;

    fn scenario(t: f64) -> PhysParams {
        PhysParams::new(1.0, 3.0, 0.1, t).unwrap()
    }

    #[test]
    fn propagator_at_zero_is_identity() {
        assert_eq!(block_expm(&scenario(1.0), 0.0), Mat4::identity());
    }

    #[test]
    fn quarter_period_rotation() {
        let p = PhysParams {
            mass: 1.0,
            omega1: 1.0,
            omega2: 1.0,
            lambda: 0.0,
            temperature: 0.0,
        };
        let m = block_expm(&p, FRAC_PI_2).block(0, 0);
        let want = Mat2::symplectic();
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.0[i][j] - want.0[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn closed_form_matches_series() {
        let p = scenario(0.0);
        let y = build_drift(&p);
        for t in [0.1, 1.0, 7.3, 25.0, 50.0] {
            let closed = block_expm(&p, t);
            let series = expm4(&(y * t)).unwrap();
            assert!((closed - series).max_abs() <= 1e-12, "t = {t}");
        }
    }

    #[test]
    fn thermal_steady_state_matches_closed_form() {
        let p = scenario(1.0);
        let evo = Evolution::new(&p).unwrap();
        let s = evo.steady();
        let want = [
            1.081_976_706_869_326_4,
            1.081_976_706_869_326_4,
            0.184_131_898_830_418_65,
            1.657_187_089_473_768,
        ];
        for i in 0..4 {
            assert!((s.0[i][i] - want[i]).abs() <= 1e-9);
            for j in 0..4 {
                if i != j {
                    assert!(s.0[i][j].abs() <= 1e-10);
                }
            }
        }
        assert!(lyapunov_residual(&evo.env().drift, &evo.env().diffusion, s) <= 1e-10);
    }

    #[test]
    fn zero_temperature_steady_state_is_vacuum_of_each_oscillator() {
        let s = *Evolution::new(&scenario(0.0)).unwrap().steady();
        assert!((s.0[0][0] - 0.5).abs() < 1e-14);
        assert!((s.0[1][1] - 0.5).abs() < 1e-14);
        assert!((s.0[2][2] - 1.0 / 6.0).abs() < 1e-14);
        assert!((s.0[3][3] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn steady_state_cross_block_is_exactly_zero() {
        let s = *Evolution::new(&scenario(0.7)).unwrap().steady();
        for i in 0..2 {
            for j in 2..4 {
                assert_eq!(s.0[i][j], 0.0);
            }
        }
    }

    #[test]
    fn undamped_drift_has_no_steady_state() {
        let p = PhysParams {
            mass: 1.0,
            omega1: 1.0,
            omega2: 3.0,
            lambda: 0.0,
            temperature: 0.0,
        };
        let y = build_drift(&p);
        assert_eq!(steady_state(&y, &Mat4::identity()), Err(Error::UnstableDrift));
    }

    #[test]
    fn propagate_endpoints() {
        let p = scenario(1.0);
        let s0 = CovarianceState::two_mode_squeezed(2.0);
        assert_eq!(propagate(&s0, &p, 0.0).unwrap(), s0);
        let late = propagate(&s0, &p, 200.0 / p.lambda).unwrap();
        let steady = *Evolution::new(&p).unwrap().steady();
        assert!((*late.sigma() - steady).max_abs() <= 1e-10);
        assert!(propagate(&s0, &p, -1.0).is_err());
    }

    #[test]
    fn rk4_free_rotation_keeps_vacuum() {
        let p = PhysParams {
            mass: 1.0,
            omega1: 1.0,
            omega2: 1.0,
            lambda: 0.0,
            temperature: 0.0,
        };
        let y = build_drift(&p);
        let vac = CovarianceState::vacuum();
        let s = rk4_oracle(&vac, &y, &Mat4::zeros(), 1.0, 1e-3).unwrap();
        assert!((s - *vac.sigma()).max_abs() < 1e-13);
        assert_eq!(rk4_oracle(&vac, &y, &Mat4::zeros(), 0.0, 1e-3).unwrap(), *vac.sigma());
    }

    #[test]
    fn rk4_matches_closed_form_at_t5() {
        let p = scenario(1.0);
        let evo = Evolution::new(&p).unwrap();
        let s0 = CovarianceState::two_mode_squeezed(2.0);
        let rk = rk4_oracle(&s0, &evo.env().drift, &evo.env().diffusion, 5.0, 1e-3).unwrap();
        assert!((rk - evo.covariance_at(&s0, 5.0)).max_abs() <= 1e-6);
    }

    #[test]
    fn rk4_step_limits() {
        let y = build_drift(&scenario(0.0));
        let vac = CovarianceState::vacuum();
        assert!(matches!(
            rk4_oracle(&vac, &y, &Mat4::zeros(), 1e5, 1e-3),
            Err(Error::TooManySteps { .. })
        ));
        assert!(rk4_oracle(&vac, &y, &Mat4::zeros(), 1.0, 0.0).is_err());
    }

    #[test]
    fn trajectory_grid_handling() {
        let p = scenario(1.0);
        let s0 = CovarianceState::single_mode_squeezed(0.5);
        let one = sample_trajectory(&s0, &p, &[0.0]).unwrap();
        assert_eq!(one.samples.len(), 1);
        assert_eq!(one.samples[0].state, s0);
        assert!(sample_trajectory(&s0, &p, &[1.0, 1.0]).is_err());
        assert!(sample_trajectory(&s0, &p, &[]).is_err());
        assert!(sample_trajectory(&s0, &p, &[-1.0, 1.0]).is_err());
    }

    #[test]
    fn trajectory_fig1_all_physical_and_converges() {
        let p = scenario(1.0);
        let s0 = CovarianceState::single_mode_squeezed(0.5);
        let mut grid: Vec<f64> = (0..100).map(|k| 25.0 * k as f64 / 99.0).collect();
        grid.push(500.0);
        let traj = sample_trajectory(&s0, &p, &grid).unwrap();
        assert!(traj.samples.iter().all(|s| s.state.residual() >= -TRAJECTORY_TOL));
        let last = traj.samples.last().unwrap();
        assert!((*last.state.sigma() - traj.steady).max_abs() <= 1e-9);
    }
}
