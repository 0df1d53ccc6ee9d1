//! Declarative run configuration: one JSON file with a section per
//! subcommand, every field defaulted, command-line flags overriding on top.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use dpskit::operators::BsConfig;
use dpskit::protocol_sim::{Backend, ProtocolParams};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub keyrate_curve: KeyrateCurveConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub fock_check: FockCheckConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct KeyrateCurveConfig {
    pub e_bit: f64,
    /// Half-widths to sweep; the first entry is the ratio baseline.
    pub deltas: Vec<f64>,
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_points: usize,
}

impl Default for KeyrateCurveConfig {
    fn default() -> Self {
        KeyrateCurveConfig {
            e_bit: 0.01,
            deltas: vec![0.0, 0.005, 0.01],
            eta_min: 1e-3,
            eta_max: 1.0,
            eta_points: 31,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Grid points per axis for the weight-1 inequality suite.
    pub lemma1_grid: usize,
    /// Interferometer half-widths to certify.
    pub deltas: Vec<f64>,
    /// Scales the amplification coefficient in the weight-1 suite; values
    /// below 1 must make the suite fail (harness self-check).
    pub lemma1_lambda_scale: f64,
    /// Grid points per axis for the norm-bound suite.
    pub mb_grid: usize,
    pub mono_points: usize,
    pub mono_eta_lo: f64,
    pub mono_eta_hi: f64,
    pub mono_lambdas: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            lemma1_grid: 11,
            deltas: vec![0.0, 0.005, 0.01],
            lemma1_lambda_scale: 1.0,
            mb_grid: 50,
            mono_points: 101,
            mono_eta_lo: 0.01,
            mono_eta_hi: 0.99,
            mono_lambdas: vec![1.0, 5.24, 10.0],
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct FockCheckConfig {
    pub n_max: u32,
    pub random_states: usize,
    /// Transmittance grid points per axis for the POVM comparison.
    pub povm_grid: usize,
    pub seed: u64,
}

impl Default for FockCheckConfig {
    fn default() -> Self {
        FockCheckConfig {
            n_max: 4,
            random_states: 20,
            povm_grid: 5,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    Pnr,
    Threshold,
}

impl From<BackendChoice> for Backend {
    fn from(choice: BackendChoice) -> Backend {
        match choice {
            BackendChoice::Pnr => Backend::Pnr,
            BackendChoice::Threshold => Backend::Threshold,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct BsSection {
    pub eta1: f64,
    pub eta2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub eta3: Option<f64>,
    pub eta4: Option<f64>,
    pub delta3: Option<f64>,
    pub delta4: Option<f64>,
}

impl Default for BsSection {
    fn default() -> Self {
        BsSection {
            eta1: 0.5,
            eta2: 0.5,
            delta1: 0.005,
            delta2: 0.005,
            eta3: None,
            eta4: None,
            delta3: None,
            delta4: None,
        }
    }
}

impl BsSection {
    pub fn to_bs_config(&self) -> Result<BsConfig<f64>> {
        let mut bs = BsConfig::new(self.eta1, self.eta2, self.delta1, self.delta2)?;
        if let (Some(e3), Some(e4)) = (self.eta3, self.eta4) {
            bs = bs.with_threshold(
                e3,
                e4,
                self.delta3.unwrap_or(0.0),
                self.delta4.unwrap_or(0.0),
            )?;
        }
        Ok(bs)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub n_em: u64,
    pub mu: f64,
    pub channel_eta: f64,
    pub eta_det: f64,
    pub dark_prob: f64,
    pub t_prob: f64,
    pub backend: BackendChoice,
    pub seed: u64,
    pub bs: BsSection,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            n_em: 1_000_000,
            mu: 0.01,
            channel_eta: 1.0,
            eta_det: 1.0,
            dark_prob: 0.0,
            t_prob: 0.5,
            backend: BackendChoice::Pnr,
            seed: 1,
            bs: BsSection::default(),
        }
    }
}

impl SimulateConfig {
    pub fn to_params(&self) -> Result<ProtocolParams> {
        let params = ProtocolParams {
            n_em: self.n_em,
            mu: self.mu,
            channel_eta: self.channel_eta,
            eta_det: self.eta_det,
            dark_prob: self.dark_prob,
            bs: self.bs.to_bs_config()?,
            t_prob: self.t_prob,
            backend: self.backend.into(),
            seed: self.seed,
        };
        params.validate()?;
        Ok(params)
    }
}
