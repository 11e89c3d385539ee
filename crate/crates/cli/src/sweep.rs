use std::io::{self, Write};

use gaussentangle::dynamics::rk4_samples;
use gaussentangle::entanglement::{log_negativity_of, simon_of_matrix};
use gaussentangle::{is_entangled, simon_at, symplectic_spectrum_pt, CovarianceState, Evolution};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::CliError;

pub const CSV_HEADER: &str = "t,T,S,nu_minus,E_N,uncertainty_residual,is_entangled";

/// Largest tolerated `|S_closed - S_rk4|` over a sweep.
pub const RK4_S_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRecord {
    pub t: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
    #[serde(rename = "S")]
    pub simon: f64,
    pub nu_minus: f64,
    #[serde(rename = "E_N")]
    pub log_negativity: f64,
    pub uncertainty_residual: f64,
    pub is_entangled: bool,
}

fn evolutions(cfg: &ScenarioConfig) -> Result<Vec<Evolution>, CliError> {
    cfg.temperatures
        .iter()
        .map(|&temp| Ok(Evolution::new(&cfg.params_at(temp)?)?))
        .collect()
}

fn record(evo: &Evolution, s0: &CovarianceState, t: f64) -> gaussentangle::Result<SweepRecord> {
    let state = evo.state_at(s0, t)?;
    let spec = symplectic_spectrum_pt(&state)?;
    let e_n = log_negativity_of(&spec)?;
    Ok(SweepRecord {
        t,
        temperature: evo.params().temperature,
        simon: simon_at(evo, s0, t).s,
        nu_minus: spec.nu_minus,
        log_negativity: e_n,
        uncertainty_residual: state.residual(),
        is_entangled: is_entangled(e_n),
    })
}

/// Evaluates the scenario on its `t x T` grid, ordered by temperature and then time.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<Vec<SweepRecord>, CliError> {
    let s0 = cfg.initial_state()?;
    let evos = evolutions(cfg)?;
    let grid = cfg.time_grid();
    let points: Vec<(usize, f64)> = (0..evos.len())
        .flat_map(|i| grid.iter().map(move |&t| (i, t)))
        .collect();
    let records = points
        .par_iter()
        .map(|&(i, t)| record(&evos[i], &s0, t))
        .collect::<gaussentangle::Result<Vec<_>>>()?;
    Ok(records)
}

/// Max `|S_closed - S_rk4|` over the sweep grid, integrating with step `cfg.rk4_dt`.
pub fn rk4_discrepancy(cfg: &ScenarioConfig) -> Result<f64, CliError> {
    let s0 = cfg.initial_state()?;
    let evos = evolutions(cfg)?;
    let grid = cfg.time_grid();
    let per_temp = evos
        .par_iter()
        .map(|evo| {
            let env = evo.env();
            let rk = rk4_samples(&s0, &env.drift, &env.diffusion, &grid, cfg.rk4_dt)?;
            Ok(grid
                .iter()
                .zip(&rk)
                .map(|(&t, sigma)| (simon_at(evo, &s0, t).s - simon_of_matrix(sigma).s).abs())
                .fold(0.0, f64::max))
        })
        .collect::<gaussentangle::Result<Vec<f64>>>()?;
    let worst = per_temp.into_iter().fold(0.0, f64::max);
    if !worst.is_finite() {
        return Err(gaussentangle::Error::NonFinite {
            what: "rk4 cross-check",
        }
        .into());
    }
    Ok(worst)
}

/// Fixed 12-significant-digit scientific notation; `-0` prints as `0`.
pub fn format_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

pub fn write_csv<W: Write>(records: &[SweepRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            format_float(r.t),
            format_float(r.temperature),
            format_float(r.simon),
            format_float(r.nu_minus),
            format_float(r.log_negativity),
            format_float(r.uncertainty_residual),
            r.is_entangled
        )?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed_width() {
        assert_eq!(format_float(1.0), "1.00000000000e0");
        assert_eq!(format_float(-0.0), "0.00000000000e0");
        assert_eq!(format_float(-3.2885291045e-3), "-3.28852910450e-3");
        assert_eq!(format_float(123456.789012345), "1.23456789012e5");
    }

    #[test]
    fn csv_layout() {
        let rec = SweepRecord {
            t: 0.5,
            temperature: 1.0,
            simon: -0.25,
            nu_minus: 0.125,
            log_negativity: 2.0,
            uncertainty_residual: 0.0,
            is_entangled: true,
        };
        let mut buf = Vec::new();
        write_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(
            lines.next(),
            Some("5.00000000000e-1,1.00000000000e0,-2.50000000000e-1,1.25000000000e-1,2.00000000000e0,0.00000000000e0,true")
        );
        assert_eq!(lines.next(), None);
    }
}
