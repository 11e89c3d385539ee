use gaussentangle::entanglement::esd_time_with;
use gaussentangle::physics::{validate_cp_with, CpMode};
use gaussentangle::{
    asymptotic_log_negativity, asymptotic_simon, log_negativity, simon_function, CovarianceState, Evolution,
};
use serde::Serialize;

use crate::config::{ScenarioConfig, SCHEMA_VERSION};
use crate::error::CliError;
use crate::sweep::SweepRecord;

pub const NO_CROSSING: &str = "none within horizon";

/// JSON envelope shared by every report.
#[derive(Debug, Clone, Serialize)]
pub struct Report<R> {
    pub schema: u32,
    pub scenario: ScenarioConfig,
    pub results: Vec<R>,
}

impl<R: Serialize> Report<R> {
    fn new(cfg: &ScenarioConfig, results: Vec<R>) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            scenario: cfg.clone(),
            results,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report values are finite");
        text.push('\n');
        text
    }
}

pub fn sweep_report(cfg: &ScenarioConfig, records: Vec<SweepRecord>) -> Report<SweepRecord> {
    Report::new(cfg, records)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EsdEntry {
    #[serde(rename = "T")]
    pub temperature: f64,
    pub lambda: f64,
    pub horizon: f64,
    pub esd_time: Option<f64>,
    pub bracket: Option<[f64; 2]>,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub crossings: Vec<f64>,
}

/// Entanglement-sudden-death time per temperature.
pub fn run_esd(cfg: &ScenarioConfig) -> Result<Report<EsdEntry>, CliError> {
    let s0 = cfg.initial_state()?;
    let horizon = cfg.esd_horizon();
    let opts = cfg.scan_options();
    let mut results = Vec::with_capacity(cfg.temperatures.len());
    for &temp in &cfg.temperatures {
        let evo = Evolution::new(&cfg.params_at(temp)?)?;
        let esd = esd_time_with(&evo, &s0, horizon, &opts)?;
        results.push(EsdEntry {
            temperature: temp,
            lambda: cfg.lambda,
            horizon,
            esd_time: esd.esd_time,
            bracket: esd.bracket.map(|(lo, hi)| [lo, hi]),
            status: if esd.esd_time.is_some() {
                "crossing"
            } else {
                NO_CROSSING
            },
            crossings: if opts.all_crossings {
                esd.crossings.iter().map(|c| c.time).collect()
            } else {
                Vec::new()
            },
        });
    }
    Ok(Report::new(cfg, results))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoteEntry {
    #[serde(rename = "T")]
    pub temperature: f64,
    pub lambda: f64,
    pub sigma_inf: [[f64; 4]; 4],
    #[serde(rename = "S_inf")]
    pub simon: f64,
    #[serde(rename = "E_N_inf")]
    pub log_negativity: f64,
    /// The same two quantities evaluated on the numerical steady state.
    #[serde(rename = "S_inf_steady")]
    pub simon_steady: f64,
    #[serde(rename = "E_N_inf_steady")]
    pub log_negativity_steady: f64,
    pub separable: bool,
}

/// Steady state, `S(∞)` and `E_N(∞)` per temperature.
pub fn run_asymptote(cfg: &ScenarioConfig) -> Result<Report<AsymptoteEntry>, CliError> {
    let mut results = Vec::with_capacity(cfg.temperatures.len());
    for &temp in &cfg.temperatures {
        let p = cfg.params_at(temp)?;
        let evo = Evolution::new(&p)?;
        let steady = CovarianceState::from_raw(*evo.steady())?;
        let simon = asymptotic_simon(&p);
        let log_neg = asymptotic_log_negativity(&p);
        results.push(AsymptoteEntry {
            temperature: temp,
            lambda: p.lambda,
            sigma_inf: steady.sigma().0.map(|row| row.map(|x| x + 0.0)),
            simon,
            log_negativity: log_neg,
            simon_steady: simon_function(&steady).s,
            log_negativity_steady: log_negativity(&steady)?,
            separable: simon >= 0.0 && log_neg <= 0.0,
        });
    }
    Ok(Report::new(cfg, results))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpInequality {
    pub name: &'static str,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpEntry {
    #[serde(rename = "T")]
    pub temperature: f64,
    pub diffusion_diagonal: [f64; 4],
    pub inequalities: Vec<CpInequality>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict_min_eigenvalue: Option<f64>,
    pub pass: bool,
}

/// Complete-positivity report of the diffusion matrix per temperature.
pub fn run_validate(cfg: &ScenarioConfig, strict: bool) -> Result<Report<CpEntry>, CliError> {
    let mode = if strict { CpMode::Strict } else { CpMode::Pairwise };
    let mut results = Vec::with_capacity(cfg.temperatures.len());
    for &temp in &cfg.temperatures {
        let evo = Evolution::new(&cfg.params_at(temp)?)?;
        let d = evo.env().diffusion;
        let report = validate_cp_with(&d, evo.env().lambda, mode);
        results.push(CpEntry {
            temperature: temp,
            diffusion_diagonal: [d.0[0][0], d.0[1][1], d.0[2][2], d.0[3][3]],
            inequalities: report
                .residuals
                .iter()
                .map(|r| CpInequality {
                    name: r.name,
                    residual: r.residual,
                    pass: r.pass,
                })
                .collect(),
            strict_min_eigenvalue: report.strict_min_eigenvalue,
            pass: report.pass,
        });
    }
    Ok(Report::new(cfg, results))
}

/// First temperature whose report failed, if any.
pub fn first_cp_failure(report: &Report<CpEntry>) -> Option<CliError> {
    report.results.iter().find(|e| !e.pass).map(|e| CliError::CpViolation {
        temperature: e.temperature,
    })
}
