//! Pipeline configuration: defaults, overridden by a TOML file, overridden
//! by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qkrec::complexity::FeatureMode;
use qkrec::evaluator::{LabelMode, DEFAULT_EPSILON};
use qkrec::metalearn::Strategy;
use serde::{Deserialize, Serialize};

pub const DEFAULT_GLOBAL_SEED: u64 = 20_240_601;

/// Which feature modes the leave-one-out grid covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoocvGrid {
    /// ALL-IN and every SINGLE-IN mode.
    #[serde(rename = "full")]
    Full,
    #[serde(rename = "all-in")]
    AllIn,
}

impl LoocvGrid {
    pub fn modes(self) -> Vec<FeatureMode> {
        match self {
            LoocvGrid::Full => FeatureMode::all(),
            LoocvGrid::AllIn => vec![FeatureMode::AllIn],
        }
    }
}

impl std::str::FromStr for LoocvGrid {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(LoocvGrid::Full),
            "all-in" | "all_in" | "allin" => Ok(LoocvGrid::AllIn),
            _ => bail!("unknown LOOCV grid `{s}` (expected `full` or `all-in`)"),
        }
    }
}

/// Every setting the pipeline reads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub global_seed: u64,
    pub manifest: PathBuf,
    pub epsilon: f64,
    pub labeling_mode: LabelMode,
    pub feature_mode: FeatureMode,
    pub strategy: Strategy,
    pub runs: usize,
    pub k: usize,
    pub output_dir: PathBuf,
    /// Worker threads; 0 lets the pool pick.
    pub threads: usize,
    pub loocv_grid: LoocvGrid,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            global_seed: DEFAULT_GLOBAL_SEED,
            manifest: PathBuf::from("data/manifest.toml"),
            epsilon: DEFAULT_EPSILON,
            labeling_mode: LabelMode::Tied,
            feature_mode: FeatureMode::AllIn,
            strategy: Strategy::Mv,
            runs: 10,
            k: 3,
            output_dir: PathBuf::from("out"),
            threads: 0,
            loocv_grid: LoocvGrid::Full,
        }
    }
}

/// Optional settings as they appear in a config file or on the command line.
#[derive(Debug, Clone, Default, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Seed from which every other seed is derived
    #[arg(long)]
    pub global_seed: Option<u64>,
    /// Dataset manifest (TOML)
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Tie margin for TIED-BEST-OUT labels
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// SINGLE-BEST-OUT or TIED-BEST-OUT
    #[arg(long)]
    pub labeling_mode: Option<String>,
    /// ALL-IN or SINGLE-IN(<metric>)
    #[arg(long)]
    pub feature_mode: Option<String>,
    /// MV or LOOCV
    #[arg(long)]
    pub strategy: Option<String>,
    /// Majority-vote evaluation runs
    #[arg(long)]
    pub runs: Option<usize>,
    /// Length of recommended lists
    #[arg(long)]
    pub k: Option<usize>,
    /// Directory for every artifact
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    /// `full` or `all-in`
    #[arg(long)]
    pub loocv_grid: Option<String>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    fn apply(self, c: &mut PipelineConfig) -> Result<()> {
        if let Some(v) = self.global_seed {
            c.global_seed = v;
        }
        if let Some(v) = self.manifest {
            c.manifest = v;
        }
        if let Some(v) = self.epsilon {
            c.epsilon = v;
        }
        if let Some(v) = self.labeling_mode {
            c.labeling_mode = v.parse()?;
        }
        if let Some(v) = self.feature_mode {
            c.feature_mode = v.parse()?;
        }
        if let Some(v) = self.strategy {
            c.strategy = v.parse()?;
        }
        if let Some(v) = self.runs {
            c.runs = v;
        }
        if let Some(v) = self.k {
            c.k = v;
        }
        if let Some(v) = self.output_dir {
            c.output_dir = v;
        }
        if let Some(v) = self.threads {
            c.threads = v;
        }
        if let Some(v) = self.loocv_grid {
            c.loocv_grid = v.parse()?;
        }
        Ok(())
    }
}

impl PipelineConfig {
    /// Defaults, then the file, then the flags.
    pub fn resolve(file: Option<&Path>, flags: Overrides) -> Result<Self> {
        let mut c = PipelineConfig::default();
        if let Some(path) = file {
            Overrides::from_file(path)?.apply(&mut c)?;
        }
        flags.apply(&mut c)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            bail!("epsilon must be >= 0, got {}", self.epsilon);
        }
        if !(1..=9).contains(&self.k) {
            bail!("k must lie in [1, 9], got {}", self.k);
        }
        if self.runs == 0 {
            bail!("runs must be at least 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qkrec::complexity::MetricId;

    #[test]
    fn flags_override_file_override_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "runs = 4\nk = 2\nfeature_mode = \"SINGLE-IN(N4)\"\n").unwrap();
        let flags = Overrides {
            k: Some(1),
            ..Default::default()
        };
        let c = PipelineConfig::resolve(Some(&path), flags).unwrap();
        assert_eq!(c.runs, 4);
        assert_eq!(c.k, 1);
        assert_eq!(c.feature_mode, FeatureMode::SingleIn(MetricId::N4));
        assert_eq!(c.epsilon, DEFAULT_EPSILON);
    }

    #[test]
    fn rejects_bad_values() {
        let bad_k = Overrides {
            k: Some(10),
            ..Default::default()
        };
        assert!(PipelineConfig::resolve(None, bad_k).is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "unknown_key = 1\n").unwrap();
        assert!(PipelineConfig::resolve(Some(&path), Overrides::default()).is_err());
    }
}
