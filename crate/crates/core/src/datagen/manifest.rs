//! The dataset manifest: a TOML file that pins every generator config,
//! sample size, seed and real-data binarization used to build the
//! meta-dataset. Key names are documented in the repository README.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::generators::{generate_synthetic, Family, SyntheticConfig};
use super::real::{load_real, Binarization, CsvSchema};
use super::LabeledDataset;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub synthetic_sizes: Vec<usize>,
    #[serde(default)]
    pub synthetic: Vec<SyntheticGroup>,
    #[serde(default)]
    pub real: Vec<RealGroup>,
    #[serde(default)]
    pub holdout: Vec<HoldoutEntry>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticGroup {
    pub family: Family,
    /// Seed of the first dataset; config `c`, size index `s` uses
    /// `seed + 100 c + s`.
    pub seed: u64,
    pub configs: Vec<SyntheticConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealGroup {
    pub name: String,
    /// Relative to the manifest's directory.
    pub path: PathBuf,
    pub n_features: usize,
    #[serde(default)]
    pub label: Option<String>,
    pub configs: Vec<RealConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealConfig {
    pub n_samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub negative: Option<String>,
    #[serde(default)]
    pub positive: Option<String>,
    #[serde(default)]
    pub threshold: Option<f64>,
}

/// A dataset kept out of the meta-dataset for recommender verification.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoldoutEntry {
    pub name: String,
    pub n_samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub family: Option<Family>,
    #[serde(default)]
    pub config: SyntheticConfig,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub n_features: Option<usize>,
    #[serde(default)]
    pub negative: Option<String>,
    #[serde(default)]
    pub positive: Option<String>,
    #[serde(default)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Synthetic {
        family: Family,
        config: SyntheticConfig,
        n_samples: usize,
        seed: u64,
    },
    Real {
        path: PathBuf,
        schema: CsvSchema,
        binarization: Binarization,
        n_samples: usize,
        seed: u64,
    },
}

/// One fully pinned dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub name: String,
    /// Inventory group: the family name or the real dataset's name.
    pub group: String,
    pub synthetic: bool,
    pub source: DatasetSource,
}

fn rule_from(
    negative: &Option<String>,
    positive: &Option<String>,
    threshold: Option<f64>,
    context: &str,
) -> Result<Binarization> {
    match (negative, positive, threshold) {
        (Some(n), Some(p), None) => Ok(Binarization::ClassPair {
            negative: n.clone(),
            positive: p.clone(),
        }),
        (None, None, Some(t)) => Ok(Binarization::Threshold { threshold: t }),
        _ => Err(Error::Format(format!(
            "{context}: give either `negative` + `positive` or `threshold`"
        ))),
    }
}

impl DatasetManifest {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest = Self::from_toml(&text).map_err(|e| match e {
            Error::Format(reason) => Error::Parse {
                path: path.display().to_string(),
                reason,
            },
            other => other,
        })?;
        manifest.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(manifest)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let manifest: DatasetManifest =
            toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if manifest.format_version != 1 {
            return Err(Error::Format(format!(
                "unsupported manifest format_version {}",
                manifest.format_version
            )));
        }
        Ok(manifest)
    }

    /// Every meta-dataset entry, synthetic first, in manifest order.
    pub fn entries(&self) -> Result<Vec<DatasetSpec>> {
        let mut out = Vec::new();
        for group in &self.synthetic {
            for (c, config) in group.configs.iter().enumerate() {
                for (s, &n) in self.synthetic_sizes.iter().enumerate() {
                    out.push(DatasetSpec {
                        name: format!("{}_c{:02}_n{}", group.family, c, n),
                        group: group.family.to_string(),
                        synthetic: true,
                        source: DatasetSource::Synthetic {
                            family: group.family,
                            config: config.clone(),
                            n_samples: n,
                            seed: group.seed + 100 * c as u64 + s as u64,
                        },
                    });
                }
            }
        }
        for group in &self.real {
            let schema = CsvSchema {
                n_features: group.n_features,
                label: group.label.clone(),
            };
            for (c, cfg) in group.configs.iter().enumerate() {
                let context = format!("real dataset `{}` config {c}", group.name);
                out.push(DatasetSpec {
                    name: format!("{}_c{:02}_n{}", group.name, c, cfg.n_samples),
                    group: group.name.clone(),
                    synthetic: false,
                    source: DatasetSource::Real {
                        path: self.base_dir.join(&group.path),
                        schema: schema.clone(),
                        binarization: rule_from(&cfg.negative, &cfg.positive, cfg.threshold, &context)?,
                        n_samples: cfg.n_samples,
                        seed: cfg.seed,
                    },
                });
            }
        }
        let mut names: Vec<&str> = out.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Format(format!("duplicate dataset name `{}`", w[0])));
        }
        Ok(out)
    }

    pub fn holdout_entries(&self) -> Result<Vec<DatasetSpec>> {
        self.holdout
            .iter()
            .map(|h| {
                let source = match (&h.family, &h.path) {
                    (Some(family), None) => DatasetSource::Synthetic {
                        family: *family,
                        config: h.config.clone(),
                        n_samples: h.n_samples,
                        seed: h.seed,
                    },
                    (None, Some(path)) => DatasetSource::Real {
                        path: self.base_dir.join(path),
                        schema: CsvSchema {
                            n_features: h.n_features.ok_or_else(|| {
                                Error::Format(format!("holdout `{}` needs n_features", h.name))
                            })?,
                            label: None,
                        },
                        binarization: rule_from(
                            &h.negative,
                            &h.positive,
                            h.threshold,
                            &format!("holdout `{}`", h.name),
                        )?,
                        n_samples: h.n_samples,
                        seed: h.seed,
                    },
                    _ => {
                        return Err(Error::Format(format!(
                            "holdout `{}` needs exactly one of `family` or `path`",
                            h.name
                        )))
                    }
                };
                Ok(DatasetSpec {
                    name: h.name.clone(),
                    group: "holdout".into(),
                    synthetic: h.family.is_some(),
                    source,
                })
            })
            .collect()
    }
}

impl DatasetSpec {
    pub fn n_samples(&self) -> usize {
        match &self.source {
            DatasetSource::Synthetic { n_samples, .. } | DatasetSource::Real { n_samples, .. } => {
                *n_samples
            }
        }
    }

    pub fn materialize(&self) -> Result<LabeledDataset> {
        let mut d = match &self.source {
            DatasetSource::Synthetic {
                family,
                config,
                n_samples,
                seed,
            } => generate_synthetic(*family, config, *n_samples, *seed)?,
            DatasetSource::Real {
                path,
                schema,
                binarization,
                n_samples,
                seed,
            } => load_real(path, schema, binarization, *n_samples, *seed)?,
        };
        d.name = self.name.clone();
        Ok(d)
    }
}
