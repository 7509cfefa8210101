use anyhow::{bail, Context, Result};
use geocume_core::estat::GammaParams;
use geocume_core::pointproc::{GibbsSpec, GridParams, KernelSpec, McmcParams};
use geocume_core::scores::{ScoreModel, TestFunction};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Point-process half of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProcessSpec {
    Poisson {
        intensity: f64,
    },
    Dpp {
        kernel: KernelSpec,
        grid: GridParams,
    },
    AlphaDpp {
        kernel: KernelSpec,
        m: usize,
        grid: GridParams,
    },
    Gibbs {
        spec: GibbsSpec,
        mcmc: McmcParams,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Clt,
    Variance,
    CumulantGrowth,
    Concentration,
    Slln,
    ClusterDecay,
}

/// Calibration constants for the pass rules, recorded with every output
/// (the estimators implement exactly these defaults).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Var/n agreement between the two largest n.
    pub stabilization: f64,
    /// Max/min bound for cumulant ratios.
    pub ratio_bound: f64,
    /// Standard-error multiplier for MC comparisons.
    pub stderr_mult: f64,
    /// KS noise-floor multiplier.
    pub ks_floor_mult: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            stabilization: 0.10,
            ratio_bound: 3.0,
            stderr_mult: 3.0,
            ks_floor_mult: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub d: usize,
    pub process: ProcessSpec,
    pub score: ScoreModel,
    pub test_function: TestFunction,
    /// Window volumes, strictly increasing.
    pub n_grid: Vec<f64>,
    pub replicates: usize,
    pub kmax: usize,
    pub seed: u64,
    /// Attach uniform marks to every replicate (required for RSA).
    #[serde(default)]
    pub marks: bool,
    pub checks: Vec<CheckKind>,
    /// EDC/score parameters for γ; required by concentration.
    #[serde(default)]
    pub gamma: Option<GammaParams>,
    #[serde(default = "default_s_grid")]
    pub s_grid: Vec<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Pair-distance bin edges for the cluster-decay check.
    #[serde(default)]
    pub cluster_bins: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_s_grid() -> Vec<f64> {
    vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
}

fn default_epsilon() -> f64 {
    0.5
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            bail!("d must be >= 1");
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            bail!("n_grid must be non-empty and strictly increasing");
        }
        if matches!(self.score, ScoreModel::Rsa { .. }) && !self.marks {
            bail!("rsa score requires marks: true");
        }
        if !(1..=6).contains(&self.kmax) {
            bail!("kmax must lie in 1..=6");
        }
        let mut need = 2usize;
        for check in &self.checks {
            need = need.max(match check {
                CheckKind::Clt => 200,
                CheckKind::Concentration => 500,
                CheckKind::CumulantGrowth => 10 * self.kmax.min(4),
                CheckKind::ClusterDecay => 30,
                CheckKind::Variance | CheckKind::Slln => 2,
            });
        }
        if self.replicates < need {
            bail!(
                "requested checks need at least {need} replicates, config has {}",
                self.replicates
            );
        }
        if self.checks.contains(&CheckKind::Concentration) && self.gamma.is_none() {
            bail!("concentration check needs the gamma parameter block");
        }
        if self.checks.contains(&CheckKind::Slln) && self.n_grid.len() < 5 {
            bail!("slln check needs an n_grid with at least 5 points");
        }
        if self.checks.contains(&CheckKind::Variance) && self.n_grid.len() < 3 {
            bail!("variance check needs an n_grid with at least 3 points");
        }
        if self.checks.contains(&CheckKind::ClusterDecay)
            && (self.cluster_bins.len() < 2 || self.cluster_bins[0] <= 0.0)
        {
            bail!("cluster_decay check needs positive cluster_bins edges");
        }
        Ok(())
    }

    /// Stable digest of the canonical (recursively key-sorted) JSON form.
    pub fn digest(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical_json(&value));
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Canonical serialization: objects with sorted keys, no whitespace.
pub fn canonical_json(value: &serde_json::Value) -> String {
    match value {
        serde_json::Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let body: Vec<String> = keys
                .iter()
                .map(|k| {
                    format!(
                        "{}:{}",
                        serde_json::to_string(k).unwrap(),
                        canonical_json(&map[*k])
                    )
                })
                .collect();
            format!("{{{}}}", body.join(","))
        }
        serde_json::Value::Array(items) => {
            let body: Vec<String> = items.iter().map(canonical_json).collect();
            format!("[{}]", body.join(","))
        }
        other => serde_json::to_string(other).unwrap(),
    }
}

/// Applies `--set key.path=value` overrides to the raw JSON config.
pub fn apply_overrides(value: &mut serde_json::Value, overrides: &[String]) -> Result<()> {
    for entry in overrides {
        let (path, raw) = entry
            .split_once('=')
            .with_context(|| format!("override `{entry}` is not key.path=value"))?;
        let parsed: serde_json::Value = serde_json::from_str(raw)
            .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        let parts: Vec<&str> = path.split('.').collect();
        let (leaf, intermediate) = parts.split_last().unwrap();
        let mut cursor = &mut *value;
        for part in intermediate {
            cursor = cursor
                .as_object_mut()
                .with_context(|| format!("override path `{path}` crosses a non-object"))?
                .entry(part.to_string())
                .or_insert_with(|| serde_json::json!({}));
        }
        cursor
            .as_object_mut()
            .with_context(|| format!("override path `{path}` crosses a non-object"))?
            .insert(leaf.to_string(), parsed);
    }
    Ok(())
}

pub fn load_config(
    path: &std::path::Path,
    seed_override: Option<u64>,
    overrides: &[String],
) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut value: serde_json::Value = serde_json::from_str(&text).context("parsing config")?;
    apply_overrides(&mut value, overrides)?;
    if let Some(seed) = seed_override {
        value["seed"] = serde_json::json!(seed);
    }
    let config: ExperimentConfig =
        serde_json::from_value(value).context("config does not match the schema")?;
    config.validate()?;
    Ok(config)
}
