//! Experiment configuration: a JSON document mirroring the struct fields
//! below, with CLI flags overriding file values.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gpd_lme::LmeConfig;
use crate::heavy_tail::InnovationSpec;
use crate::linear_process::{ArmaSpec, MaCoefficients};
use crate::tail_measure::ScaleFunctions;

/// Innovation law parameters (`pi1`/`pi2` are the right/left tail weights).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnovationConfig {
    pub gamma: f64,
    #[serde(default = "default_half")]
    pub pi1: f64,
    #[serde(default = "default_half")]
    pub pi2: f64,
    #[serde(default = "default_one")]
    pub x_min: f64,
}

impl InnovationConfig {
    pub fn to_spec(&self) -> Result<InnovationSpec<f64>> {
        InnovationSpec::new(self.gamma, self.pi1, self.pi2, self.x_min)
    }
}

/// ARMA coefficients; both vectors empty means i.i.d. innovations.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmaConfig {
    #[serde(default)]
    pub phi: Vec<f64>,
    #[serde(default)]
    pub theta: Vec<f64>,
}

impl ArmaConfig {
    pub fn to_spec(&self) -> Result<ArmaSpec<f64>> {
        ArmaSpec::new(self.phi.clone(), self.theta.clone())
    }
}

/// How the number of excesses is chosen for each sample size.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRule {
    /// `k = floor(n^a)` with `a` in (0, 1).
    Power { a: f64 },
    /// One explicit `k` per entry of `n_grid`.
    Explicit { k: Vec<usize> },
}

impl KRule {
    /// Resolves the rule against a sample-size grid.
    pub fn resolve(&self, n_grid: &[usize]) -> Result<Vec<usize>> {
        match self {
            KRule::Power { a } => {
                if !(*a > 0.0 && *a < 1.0) {
                    return Err(Error::Config(format!(
                        "k_rule power exponent must lie in (0, 1), got {a}"
                    )));
                }
                Ok(n_grid
                    .iter()
                    .map(|&n| ((n as f64).powf(*a).floor() as usize).max(1))
                    .collect())
            }
            KRule::Explicit { k } => {
                if k.len() != n_grid.len() {
                    return Err(Error::Config(format!(
                        "explicit k list has {} entries for {} sample sizes",
                        k.len(),
                        n_grid.len()
                    )));
                }
                Ok(k.clone())
            }
        }
    }
}

/// Which diagnostic grids to evaluate.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticFlags {
    #[serde(default)]
    pub lemma1: bool,
    #[serde(default)]
    pub lemma2: bool,
    #[serde(default)]
    pub lemma3: bool,
}

impl DiagnosticFlags {
    pub fn any(&self) -> bool {
        self.lemma1 || self.lemma2 || self.lemma3
    }
}

/// Full experiment description. See the repository README for the JSON
/// schema and defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub innovation: InnovationConfig,
    #[serde(default)]
    pub arma: ArmaConfig,
    pub n_grid: Vec<usize>,
    pub k_rule: KRule,
    #[serde(default = "default_r")]
    pub r: f64,
    pub replications: usize,
    pub root_seed: u64,
    #[serde(default)]
    pub diagnostics: DiagnosticFlags,
    #[serde(default = "default_z_grid")]
    pub z_grid: Vec<f64>,
    #[serde(default = "default_x_grid")]
    pub x_grid: Vec<f64>,
}

fn default_half() -> f64 {
    0.5
}

fn default_one() -> f64 {
    1.0
}

fn default_r() -> f64 {
    -1.0
}

fn default_z_grid() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0]
}

fn default_x_grid() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

/// A validated configuration with all derived objects built.
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub innovation: InnovationSpec<f64>,
    pub coefficients: MaCoefficients<f64>,
    pub scales: ScaleFunctions<f64>,
    /// `(n, k)` pairs in `n_grid` order.
    pub pairs: Vec<(usize, usize)>,
    pub lme: LmeConfig<f64>,
    pub replications: usize,
    pub root_seed: u64,
    pub diagnostics: DiagnosticFlags,
    pub z_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
}

impl ExperimentConfig {
    /// Reads a configuration from a JSON file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        Ok(serde_json::from_reader(reader)?)
    }

    /// Validates the configuration and builds the simulation objects.
    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid must not be empty".into()));
        }
        if self.replications < 1 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        let ks = self.k_rule.resolve(&self.n_grid)?;
        let pairs: Vec<(usize, usize)> = self.n_grid.iter().copied().zip(ks).collect();
        for &(n, k) in &pairs {
            if k < 1 || k >= n {
                return Err(Error::Config(format!(
                    "requires 1 <= k < n, got k={k} for n={n}"
                )));
            }
            // Intermediate-sequence sanity bound.
            if 4 * k > n {
                return Err(Error::Config(format!(
                    "k/n must not exceed 0.25, got k={k} for n={n}"
                )));
            }
        }
        if self.z_grid.iter().any(|&z| !z.is_finite() || z <= 0.0) {
            return Err(Error::Config("z_grid entries must be positive".into()));
        }
        if self.x_grid.iter().any(|&x| !x.is_finite() || x <= 0.0) {
            return Err(Error::Config("x_grid entries must be positive".into()));
        }

        let innovation = self.innovation.to_spec()?;
        let arma = self.arma.to_spec()?;
        let coefficients = MaCoefficients::from_arma_auto(&arma, innovation.gamma())?;
        let scales = ScaleFunctions::new(&innovation, &coefficients)?;
        let lme = LmeConfig::with_r(self.r);
        lme.validate()?;

        Ok(ResolvedExperiment {
            innovation,
            coefficients,
            scales,
            pairs,
            lme,
            replications: self.replications,
            root_seed: self.root_seed,
            diagnostics: self.diagnostics,
            z_grid: self.z_grid.clone(),
            x_grid: self.x_grid.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> serde_json::Value {
        serde_json::json!({
            "innovation": {"gamma": 1.0},
            "n_grid": [1000, 10000],
            "k_rule": {"power": {"a": 0.6}},
            "replications": 3,
            "root_seed": 7
        })
    }

    #[test]
    fn parses_with_defaults() {
        let config: ExperimentConfig = serde_json::from_value(minimal_json()).unwrap();
        assert_eq!(config.r, -1.0);
        assert_eq!(config.innovation.pi1, 0.5);
        assert_eq!(config.innovation.x_min, 1.0);
        assert!(config.arma.phi.is_empty());
        assert!(!config.diagnostics.any());
        assert_eq!(config.z_grid, vec![0.5, 1.0, 2.0, 4.0]);
        let resolved = config.resolve().unwrap();
        assert_eq!(resolved.pairs, vec![(1000, 63), (10000, 251)]);
    }

    #[test]
    fn explicit_k_rule_checks_length() {
        let mut value = minimal_json();
        value["k_rule"] = serde_json::json!({"explicit": {"k": [50]}});
        let config: ExperimentConfig = serde_json::from_value(value).unwrap();
        assert!(matches!(config.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_bad_k_fraction() {
        let mut value = minimal_json();
        value["k_rule"] = serde_json::json!({"explicit": {"k": [500, 2000]}});
        let config: ExperimentConfig = serde_json::from_value(value).unwrap();
        // k = 500 for n = 1000 violates k/n <= 0.25.
        assert!(matches!(config.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_unknown_fields_and_bad_power() {
        let mut value = minimal_json();
        value["typo_field"] = serde_json::json!(1);
        assert!(serde_json::from_value::<ExperimentConfig>(value).is_err());

        let mut value = minimal_json();
        value["k_rule"] = serde_json::json!({"power": {"a": 1.5}});
        let config: ExperimentConfig = serde_json::from_value(value).unwrap();
        assert!(config.resolve().is_err());
    }

    #[test]
    fn rejects_noncausal_arma() {
        let mut value = minimal_json();
        value["arma"] = serde_json::json!({"phi": [1.05]});
        let config: ExperimentConfig = serde_json::from_value(value).unwrap();
        assert!(matches!(config.resolve(), Err(Error::NonCausal { .. })));
    }

    #[test]
    fn round_trips_through_json() {
        let config: ExperimentConfig = serde_json::from_value(minimal_json()).unwrap();
        let text = serde_json::to_string(&config).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.n_grid, config.n_grid);
        assert_eq!(back.root_seed, config.root_seed);
    }
}
