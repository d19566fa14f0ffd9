use serde::Deserialize;

use orbitweave::measures::{LocalObservable, MarkovMeasure, Measure};
use orbitweave::systems::SystemSpec;
use orbitweave::weaving::WeaveConfig;
use orbitweave::{Interval, State};

use crate::error::{config, Result};

/// Largest observable depth the spectrum command accepts.
pub const MAX_SPECTRUM_DEPTH: usize = 3;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    /// Used when `--seed` is not given.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Size of the cylinder test family.
    #[serde(rename = "N", default = "default_family_size")]
    pub family_size: usize,
    pub spectrum: Option<SpectrumSection>,
    pub weave: Option<WeaveSection>,
    pub shadow: Option<ShadowSection>,
    pub katok: Option<KatokSection>,
    pub shrink: Option<ShrinkSection>,
}

fn default_family_size() -> usize {
    16
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    Frequency { frequency: u8 },
    Table { depth: usize, values: Vec<f64> },
}

impl ObservableSpec {
    pub fn build(&self, alphabet: usize) -> Result<LocalObservable> {
        Ok(match self {
            ObservableSpec::Frequency { frequency } => LocalObservable::frequency(alphabet, *frequency)?,
            ObservableSpec::Table { depth, values } => LocalObservable::new(alphabet, *depth, values.clone())?,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub observable: ObservableSpec,
    pub constraint: Interval,
    pub alpha_grid: Vec<f64>,
    /// Word length for the level-set count; `null` skips counting.
    #[serde(default = "default_count_n")]
    pub count_n: Option<usize>,
}

fn default_count_n() -> Option<usize> {
    Some(20)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeaveSection {
    pub target: Measure,
    /// Exit 0 only if the final distance is at most this.
    #[serde(default = "default_bound")]
    pub bound: f64,
    pub k_max: Option<usize>,
    pub t1: Option<usize>,
    pub gamma: Option<f64>,
    pub q: Option<u32>,
    pub budget: Option<usize>,
    pub denominator_cap: Option<u64>,
    pub length_cap: Option<u64>,
}

fn default_bound() -> f64 {
    0.05
}

impl WeaveSection {
    pub fn params(&self, family_size: usize, seed: u64) -> WeaveConfig {
        let d = WeaveConfig::default();
        WeaveConfig {
            k_max: self.k_max.unwrap_or(d.k_max),
            t1: self.t1.unwrap_or(d.t1),
            gamma: self.gamma.unwrap_or(d.gamma),
            q: self.q.unwrap_or(d.q),
            budget: self.budget.unwrap_or(d.budget),
            family_size,
            denominator_cap: self.denominator_cap.unwrap_or(d.denominator_cap),
            length_cap: self.length_cap.unwrap_or(d.length_cap),
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShadowMode {
    #[default]
    Single,
    Modulus,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowSection {
    #[serde(default)]
    pub mode: ShadowMode,
    /// Start of the pseudo-orbit; drawn from the seed when absent.
    pub x0: Option<State>,
    pub length: usize,
    /// Step error of the single-shot pseudo-orbit.
    pub delta: Option<f64>,
    /// Shadowing tolerance; required for interval maps and for the modulus.
    pub epsilon: Option<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub cap: Option<usize>,
}

fn default_trials() -> usize {
    100
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KatokSection {
    pub measure: MarkovMeasure,
    pub q: u32,
    pub delta: f64,
    pub n_grid: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShrinkSection {
    pub center: MarkovMeasure,
    pub delta_grid: Vec<f64>,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_budget() -> usize {
    2000
}

pub fn parse(text: &str) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| config(e.to_string()))
}

pub fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T> {
    section.as_ref().ok_or_else(|| config(format!("missing \"{name}\" section")))
}
