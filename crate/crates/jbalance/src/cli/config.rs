use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::flows::ComparisonConfig;
use crate::geometry::{polytope_from_json, DelzantPolytope, DEFAULT_RESOLUTION};
use crate::quantisation::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `‖μ⁰‖_op` at which the fixed-point iteration stops
    pub balance: f64,
    /// relative defect of `tr(Hilb_χ(FS(H))·H⁻¹) = N+1`
    pub trace: f64,
    /// slack allowed in monotonicity checks
    pub monotone: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { balance: 1e-9, trace: 1e-6, monotone: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    #[default]
    Identity,
    /// diagonal with log-uniform entries in `[e⁻¹, e]`, drawn from the seed
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySettings {
    /// test configurations use `r = 1..=r_max`
    pub r_max: i64,
    /// facet divisor blown up in the deformation to the normal cone
    pub facet: usize,
    /// further `L₂` classes (facet coefficients) whose verdicts are reported
    pub l2_rays: Vec<Vec<i64>>,
}

impl Default for StabilitySettings {
    fn default() -> Self {
        StabilitySettings { r_max: 10, facet: 0, l2_rays: Vec::new() }
    }
}

/// One batch run, read from JSON.  Exactly one of `preset` and `polytope` is set;
/// `polytope` names a JSON polytope file and then needs `l2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub polytope: Option<PathBuf>,
    #[serde(default)]
    pub l2: Option<Vec<i64>>,
    #[serde(default = "default_k_list")]
    pub k_list: Vec<u32>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub start: Start,
    #[serde(default)]
    pub flow: ComparisonConfig,
    #[serde(default)]
    pub stability: StabilitySettings,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_k_list() -> Vec<u32> {
    vec![2, 3, 4]
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

fn default_max_iterations() -> usize {
    500
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn for_preset(name: &str) -> Self {
        ExperimentConfig {
            preset: Some(name.to_string()),
            polytope: None,
            l2: None,
            k_list: default_k_list(),
            resolution: default_resolution(),
            tolerances: Tolerances::default(),
            max_iterations: default_max_iterations(),
            start: Start::default(),
            flow: ComparisonConfig::default(),
            stability: StabilitySettings::default(),
            out_dir: default_out_dir(),
            seed: 0,
        }
    }

    /// Parses and validates; a relative `polytope` path is taken relative to `base`.
    pub fn from_json(text: &str, base: Option<&Path>) -> Result<Self, CliError> {
        let mut cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        if let (Some(p), Some(b)) = (&cfg.polytope, base) {
            if p.is_relative() {
                cfg.polytope = Some(b.join(p));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, path.parent())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Usage(m.to_string()));
        match (&self.preset, &self.polytope, &self.l2) {
            (Some(_), None, None) | (None, Some(_), Some(_)) => {}
            (None, None, _) => return bad("config names no problem: set `preset` or `polytope` with `l2`"),
            (Some(_), Some(_), _) => return bad("`preset` and `polytope` are exclusive"),
            (Some(_), None, Some(_)) => return bad("`l2` is fixed by the preset"),
            (None, Some(_), None) => return bad("`polytope` needs `l2`"),
        }
        if self.k_list.is_empty() || self.k_list[0] == 0 {
            return bad("k_list must be non-empty with k ≥ 1");
        }
        if self.k_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad("k_list must be strictly ascending");
        }
        let t = &self.tolerances;
        if [t.balance, t.trace, t.monotone].iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("all tolerances must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        let f = &self.flow;
        if !(f.t_end > 0.0 && f.t_end.is_finite()) || !(f.dt_quantum > 0.0) || f.grid_nodes < 5 {
            return bad("flow needs t_end > 0, dt_quantum > 0 and grid_nodes ≥ 5");
        }
        if self.stability.r_max < 1 {
            return bad("stability.r_max must be at least 1");
        }
        Ok(())
    }

    /// Polytope of `L₁` and facet coefficients of `L₂`.
    pub fn classes(&self) -> Result<(DelzantPolytope, Vec<i64>), CliError> {
        if let Some(name) = &self.preset {
            return Problem::preset_classes(name).map_err(|e| CliError::Usage(e.to_string()));
        }
        let path = self.polytope.as_ref().ok_or_else(|| CliError::Usage("no polytope".into()))?;
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let p = polytope_from_json(&text).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok((p, self.l2.clone().unwrap_or_default()))
    }

    pub fn problem(&self) -> Result<Problem, CliError> {
        let (p, l2) = self.classes()?;
        let mut pr = Problem::toric(p, &l2, self.resolution)?;
        if let Some(name) = &self.preset {
            pr.name = name.clone();
        }
        Ok(pr)
    }
}
