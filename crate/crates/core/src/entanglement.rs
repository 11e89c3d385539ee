//! Separability and entanglement of two-mode Gaussian states.
//!
//! Two quantities are provided: the Simon function `S` (PPT criterion,
//! separable iff `S >= 0`) and the logarithmic negativity `E_N = -log₂(2ν̃₋)`
//! built from the symplectic spectrum of the partially transposed covariance.
//! The symplectic spectrum has two independent implementations, the seralian
//! formula and explicit partial transposition followed by symplectic
//! diagonalisation.

use rayon::prelude::*;

use crate::dynamics::Evolution;
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, Mat2, Mat4};
use crate::physics::PhysParams;
use crate::states::{blocks, omega, BlockDecomp, CovarianceState};

/// Tolerance below which a negative symplectic discriminant is clamped to 0.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

/// Default number of coarse scan points for crossing detection.
pub const DEFAULT_SCAN_POINTS: usize = 2000;

/// The Simon function together with the invariants it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimonValue {
    pub s: f64,
    pub det_a: f64,
    pub det_b: f64,
    pub det_c: f64,
    /// `Tr[A J C J B J Cᵀ J]`.
    pub trace_term: f64,
}

impl SimonValue {
    /// `S` from the reduced purity excesses `det A - 1/4`, `det B - 1/4`.
    ///
    /// `det A det B + (1/4 - |det C|)² - (det A + det B)/4` equals
    /// `(det A - 1/4)(det B - 1/4) + det C² - |det C|/2`, which keeps relative
    /// precision when both reduced states are close to pure.
    fn from_excess(a_excess: f64, b_excess: f64, det_c: f64, trace_term: f64) -> Self {
        let s = a_excess * b_excess + det_c * det_c - 0.5 * det_c.abs() - trace_term;
        SimonValue {
            s,
            det_a: 0.25 + a_excess,
            det_b: 0.25 + b_excess,
            det_c,
            trace_term,
        }
    }

    /// `S` recomputed literally from the stored invariants.
    pub fn recompute(&self) -> f64 {
        let q = 0.25 - self.det_c.abs();
        self.det_a * self.det_b + q * q - self.trace_term - 0.25 * (self.det_a + self.det_b)
    }

    pub fn is_separable(&self) -> bool {
        self.s >= 0.0
    }
}

fn det_minus_quarter(m: &Mat2) -> f64 {
    m.0[0][0].mul_add(m.0[1][1], -0.25) - m.0[0][1] * m.0[1][0]
}

/// `Tr[A J C J B J Cᵀ J]`.
pub fn simon_trace_term(b: &BlockDecomp) -> f64 {
    let j = Mat2::symplectic();
    (b.a * j * b.c * j * b.b * j * b.c.transpose() * j).trace()
}

/// Simon separability function of a state.
pub fn simon_function(s: &CovarianceState) -> SimonValue {
    simon_of_matrix(s.sigma())
}

/// Simon function of a bare covariance matrix, without physicality checks.
pub fn simon_of_matrix(sigma: &Mat4) -> SimonValue {
    let b = blocks(sigma);
    SimonValue::from_excess(
        det_minus_quarter(&b.a),
        det_minus_quarter(&b.b),
        b.c.det(),
        simon_trace_term(&b),
    )
}

/// `det(X + δ) - det X` for symmetric-or-not 2x2 `X`, exact in `δ`.
fn det_shift(x: &Mat2, d: &Mat2) -> f64 {
    x.0[0][0] * d.0[1][1] + x.0[1][1] * d.0[0][0] - x.0[0][1] * d.0[1][0] - x.0[1][0] * d.0[0][1] + d.det()
}

/// `S(σ(t))` for the thermal evolution of `s0`.
///
/// The state is handled as `σ(∞) + Δ(t)`. The reduced purity excesses of
/// `σ(∞)` are the model's `(coth²(ω/2T) - 1)/4`, and the decaying part `Δ(t)`
/// enters only through products, so the result keeps relative accuracy even
/// when `S` itself is many orders of magnitude below `‖σ‖ · ε_machine`.
pub fn simon_at(evo: &Evolution, s0: &CovarianceState, t: f64) -> SimonValue {
    if t == 0.0 {
        return simon_function(s0);
    }
    let p = evo.params();
    let steady = blocks(evo.steady());
    let delta = blocks(&evo.excess_at(s0, t));
    let a_excess = 0.25 * p.thermal_excess(p.omega1) + det_shift(&steady.a, &delta.a);
    let b_excess = 0.25 * p.thermal_excess(p.omega2) + det_shift(&steady.b, &delta.b);
    let full = BlockDecomp {
        a: steady.a + delta.a,
        b: steady.b + delta.b,
        c: steady.c + delta.c,
    };
    SimonValue::from_excess(a_excess, b_excess, full.c.det(), simon_trace_term(&full))
}

/// Symplectic eigenvalues `ν̃₋ <= ν̃₊` of the partially transposed covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticSpectrum {
    pub nu_minus: f64,
    pub nu_plus: f64,
    /// `det A + det B - 2 det C`.
    pub seralian: f64,
    pub det_sigma: f64,
}

/// Seralian route: `2ν̃∓² = Δ̃ ∓ sqrt(Δ̃² - 4 det σ)`.
pub fn symplectic_spectrum_pt(s: &CovarianceState) -> Result<SymplecticSpectrum> {
    spectrum_of_matrix(s.sigma())
}

fn spectrum_of_matrix(sigma: &Mat4) -> Result<SymplecticSpectrum> {
    let b = blocks(sigma);
    let seralian = b.a.det() + b.b.det() - 2.0 * b.c.det();
    let det_sigma = sigma.det();
    let mut disc = seralian * seralian - 4.0 * det_sigma;
    if disc < -DISCRIMINANT_TOL {
        return Err(Error::SpectrumInconsistent { residual: disc });
    }
    disc = disc.max(0.0);
    let root = disc.sqrt();
    let upper = seralian + root;
    if upper <= 0.0 || det_sigma < 0.0 {
        return Err(Error::SpectrumInconsistent {
            residual: upper.min(det_sigma),
        });
    }
    // (Δ̃ - root)(Δ̃ + root) = 4 det σ, which avoids cancelling Δ̃ - root.
    let nu_minus_sq = 2.0 * det_sigma / upper;
    Ok(SymplecticSpectrum {
        nu_minus: nu_minus_sq.sqrt(),
        nu_plus: (0.5 * upper).sqrt(),
        seralian,
        det_sigma,
    })
}

/// `σ ↦ PσP` with `P = diag(1, 1, 1, -1)`: time reversal `p_y → -p_y`.
pub fn partial_transpose(sigma: &Mat4) -> Mat4 {
    let mut out = *sigma;
    for k in 0..4 {
        if k != 3 {
            out.0[k][3] = -out.0[k][3];
            out.0[3][k] = -out.0[3][k];
        }
    }
    out
}

/// Symplectic eigenvalues `[ν₋, ν₊]` of a positive definite covariance.
///
/// They are the moduli of the eigenvalues of the Hermitian matrix
/// `i σ^{1/2} Ω σ^{1/2}`, obtained here from its real 8x8 embedding.
pub fn symplectic_eigenvalues(sigma: &Mat4) -> Result<[f64; 2]> {
    let (vals, vecs) = jacobi_eigen(&sigma.symmetrize().0);
    if vals[0] <= 0.0 {
        return Err(Error::Unphysical { residual: vals[0] });
    }
    let mut root = Mat4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            root.0[i][j] = (0..4).map(|k| vecs[i][k] * vals[k].sqrt() * vecs[j][k]).sum();
        }
    }
    let k = root * omega() * root;
    let mut big = [[0.0; 8]; 8];
    for i in 0..4 {
        for j in 0..4 {
            big[i][j + 4] = -k.0[i][j];
            big[i + 4][j] = k.0[i][j];
        }
    }
    let (spec, _) = jacobi_eigen(&big);
    // ascending: -ν₊, -ν₊, -ν₋, -ν₋, ν₋, ν₋, ν₊, ν₊
    Ok([spec[4].abs(), spec[6].abs()])
}

/// Partial transposition followed by symplectic diagonalisation.
pub fn symplectic_spectrum_explicit(s: &CovarianceState) -> Result<[f64; 2]> {
    symplectic_eigenvalues(&partial_transpose(s.sigma()))
}

/// `E_N = -log₂(2ν̃₋)`, unclamped: negative values measure the distance
/// from the separability boundary on the separable side.
pub fn log_negativity(s: &CovarianceState) -> Result<f64> {
    log_negativity_of(&symplectic_spectrum_pt(s)?)
}

pub fn log_negativity_of(spec: &SymplecticSpectrum) -> Result<f64> {
    if spec.nu_minus <= 0.0 {
        return Err(Error::InfiniteNegativity);
    }
    Ok(-(2.0 * spec.nu_minus).log2())
}

pub fn is_entangled(log_neg: f64) -> bool {
    log_neg > 0.0
}

/// `S(∞) = (coth²(ω₁/2T) - 1)(coth²(ω₂/2T) - 1) / 16`.
pub fn asymptotic_simon(p: &PhysParams) -> f64 {
    p.thermal_excess(p.omega1) * p.thermal_excess(p.omega2) / 16.0
}

/// `E_N(∞) = -log₂ coth(ω_max / 2T)`, where `ω_max` is the larger frequency.
pub fn asymptotic_log_negativity(p: &PhysParams) -> f64 {
    let omega = p.omega1.max(p.omega2);
    -p.thermal_factor(omega).log2()
}

/// One refined zero crossing of a scanned function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub time: f64,
    /// `(lo, hi)` with `f(lo) < 0 <= f(hi)` and `hi - lo <= tolerance`.
    pub bracket: (f64, f64),
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub grid_points: usize,
    pub tolerance: f64,
    /// Refine every crossing instead of stopping at the first one.
    pub all_crossings: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            grid_points: DEFAULT_SCAN_POINTS,
            tolerance: 1e-9,
            all_crossings: false,
        }
    }
}

/// Scans `f` on a uniform grid over `[0, t_max]` for sign changes from
/// negative to non-negative and bisects each bracket down to the tolerance.
pub fn find_crossings<F>(f: F, t_max: f64, opts: &ScanOptions) -> Result<Vec<Crossing>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "t_max",
            value: t_max,
            reason: "horizon must be positive",
        });
    }
    if opts.tolerance.is_nan() || opts.tolerance <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tolerance",
            value: opts.tolerance,
            reason: "must be positive",
        });
    }
    if opts.grid_points < 2 {
        return Err(Error::InvalidGrid {
            reason: "scan needs at least two points",
        });
    }
    let n = opts.grid_points;
    let grid: Vec<f64> = (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect();
    let values = grid.par_iter().map(|&t| f(t)).collect::<Result<Vec<f64>>>()?;

    let mut out = Vec::new();
    for k in 1..n {
        if values[k - 1] < 0.0 && values[k] >= 0.0 {
            let (mut lo, mut hi) = (grid[k - 1], grid[k]);
            let mut iterations = 0;
            while hi - lo > opts.tolerance {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                iterations += 1;
            }
            out.push(Crossing {
                time: 0.5 * (lo + hi),
                bracket: (lo, hi),
                iterations,
            });
            if !opts.all_crossings {
                break;
            }
        }
    }
    Ok(out)
}

/// Entanglement-sudden-death search result.
#[derive(Debug, Clone, PartialEq)]
pub struct EsdResult {
    /// First time at which `S` reaches zero, if it does within the horizon.
    pub esd_time: Option<f64>,
    pub bracket: Option<(f64, f64)>,
    pub iterations: usize,
    /// Every negative-to-non-negative crossing found; only populated beyond the
    /// first one when requested.
    pub crossings: Vec<Crossing>,
}

/// First time `S(t)` of the thermal evolution of `s0` becomes non-negative.
pub fn esd_time(s0: &CovarianceState, p: &PhysParams, t_max: f64, tol: f64) -> Result<EsdResult> {
    let evo = Evolution::new(p)?;
    let opts = ScanOptions {
        tolerance: tol,
        ..ScanOptions::default()
    };
    esd_time_with(&evo, s0, t_max, &opts)
}

pub fn esd_time_with(evo: &Evolution, s0: &CovarianceState, t_max: f64, opts: &ScanOptions) -> Result<EsdResult> {
    let initial = simon_function(s0).s;
    if initial >= 0.0 {
        return Err(Error::NotEntangled { simon: initial });
    }
    let crossings = find_crossings(|t| Ok(simon_at(evo, s0, t).s), t_max, opts)?;
    let first = crossings.first().copied();
    Ok(EsdResult {
        esd_time: first.map(|c| c.time),
        bracket: first.map(|c| c.bracket),
        iterations: first.map_or(0, |c| c.iterations),
        crossings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn vacuum_is_on_the_boundary() {
        let v = CovarianceState::vacuum();
        let s = simon_function(&v);
        assert_eq!(s.s, 0.0);
        let spec = symplectic_spectrum_pt(&v).unwrap();
        assert!(close(spec.nu_minus, 0.5, 1e-15) && close(spec.nu_plus, 0.5, 1e-15));
        assert!(log_negativity(&v).unwrap().abs() < 1e-15);
    }

    #[test]
    fn single_mode_squeezed_sits_on_boundary() {
        for r in [0.5, 1.0, 2.0, -1.3] {
            let s = simon_function(&CovarianceState::single_mode_squeezed(r));
            assert!(s.s.abs() <= 1e-12, "r = {r}: {}", s.s);
        }
    }

    #[test]
    fn two_mode_squeezed_simon() {
        let cases = [(0.5, -0.067_885_079_351_905_47), (2.0, -3.288_529_104_502_061)];
        for (r, want) in cases {
            let s = simon_function(&CovarianceState::two_mode_squeezed(r));
            assert!(close(s.s, want, 1e-10), "r = {r}: {}", s.s);
            assert!(close(s.recompute(), s.s, 1e-12));
        }
    }

    #[test]
    fn two_mode_squeezed_spectrum() {
        let s = CovarianceState::two_mode_squeezed(2.0);
        let spec = symplectic_spectrum_pt(&s).unwrap();
        assert!(close(spec.nu_minus, 0.067_667_641_618_306_35, 1e-12));
        assert!(close(log_negativity(&s).unwrap(), 2.885_390_081_777_926_8, 1e-10));
        let [lo, hi] = symplectic_spectrum_explicit(&s).unwrap();
        assert!(close(lo, spec.nu_minus, 1e-10));
        assert!(close(hi, spec.nu_plus, 1e-10));
    }

    #[test]
    fn spectrum_rejects_inconsistent_input() {
        // A = I, B = 2I, C = 2I: discriminant (a-b)²((a+b)² - 4c²) = -7
        let m = Mat4::from_blocks(&Mat2::identity(), &(Mat2::identity() * 2.0), &(Mat2::identity() * 2.0));
        match spectrum_of_matrix(&m) {
            Err(Error::SpectrumInconsistent { residual }) => assert!(close(residual, -7.0, 1e-12)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn thermal_asymptotics() {
        let p = PhysParams::new(1.0, 3.0, 0.1, 1.0).unwrap();
        assert!(close(asymptotic_simon(&p), 0.050_766_867_723_813_01, 1e-12));
        assert!(close(asymptotic_log_negativity(&p), -0.143_773_985_253_662_98, 1e-12));
        let swapped = PhysParams::new(3.0, 1.0, 0.1, 1.0).unwrap();
        assert_eq!(asymptotic_log_negativity(&swapped), asymptotic_log_negativity(&p));
        let cold = p.at_temperature(0.0).unwrap();
        assert_eq!(asymptotic_simon(&cold), 0.0);
        assert_eq!(asymptotic_log_negativity(&cold), 0.0);
    }

    #[test]
    fn simon_at_agrees_with_direct_evaluation() {
        let p = PhysParams::new(1.0, 3.0, 0.1, 1.0).unwrap();
        let evo = Evolution::new(&p).unwrap();
        let s0 = CovarianceState::two_mode_squeezed(2.0);
        for t in [0.0, 0.7, 5.0, 20.0] {
            let direct = simon_of_matrix(&evo.covariance_at(&s0, t)).s;
            let split = simon_at(&evo, &s0, t).s;
            assert!(close(direct, split, 1e-12), "t = {t}: {direct} vs {split}");
        }
    }

    #[test]
    fn esd_refuses_separable_start() {
        let p = PhysParams::new(1.0, 3.0, 0.1, 1.0).unwrap();
        let err = esd_time(&CovarianceState::vacuum(), &p, 10.0, 1e-6).unwrap_err();
        assert!(matches!(err, Error::NotEntangled { .. }));
    }

    #[test]
    fn esd_at_zero_temperature_is_absent() {
        let p = PhysParams::new(1.0, 3.0, 0.1, 0.0).unwrap();
        let res = esd_time(&CovarianceState::two_mode_squeezed(2.0), &p, 100.0, 1e-6).unwrap();
        assert_eq!(res.esd_time, None);
    }

    #[test]
    fn esd_bracket_invariant() {
        let p = PhysParams::new(1.0, 3.0, 0.1, 1.0).unwrap();
        let s0 = CovarianceState::two_mode_squeezed(2.0);
        let tol = 1e-8;
        let res = esd_time(&s0, &p, 100.0, tol).unwrap();
        let t = res.esd_time.expect("finite ESD time");
        let (lo, hi) = res.bracket.unwrap();
        assert!(hi - lo <= tol);
        let evo = Evolution::new(&p).unwrap();
        assert!(simon_at(&evo, &s0, t - 10.0 * tol).s < 0.0);
        assert!(simon_at(&evo, &s0, t + 10.0 * tol).s >= 0.0);
    }

    #[test]
    fn crossing_finder_lists_all_when_asked() {
        let f = |t: f64| Ok((t).sin());
        let opts = ScanOptions {
            grid_points: 1000,
            tolerance: 1e-10,
            all_crossings: true,
        };
        // sin goes from negative to non-negative at 2π and 4π
        let c = find_crossings(f, 13.0, &opts).unwrap();
        assert_eq!(c.len(), 2);
        assert!(close(c[0].time, 2.0 * std::f64::consts::PI, 1e-9));
        assert!(close(c[1].time, 4.0 * std::f64::consts::PI, 1e-9));
        let first = find_crossings(
            f,
            13.0,
            &ScanOptions {
                all_crossings: false,
                ..opts
            },
        )
        .unwrap();
        assert_eq!(first.len(), 1);
    }
}
