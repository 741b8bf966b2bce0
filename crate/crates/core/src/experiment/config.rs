use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use super::ConfigError;
use crate::graph::SyntheticKind;
use crate::trainer::{Seeds, TrainConfig, Variant};

/// Keys accepted in each section, with defaults (`None`: no default).
const SCHEMA: &[(&str, Option<&str>)] = &[
    ("data.synthetic", Some("barabasi_albert")),
    ("data.n", Some("500")),
    ("data.m", Some("3")),
    ("data.p", Some("0.05")),
    ("data.blocks", None),
    ("data.p_in", Some("0.1")),
    ("data.p_out", Some("0.01")),
    ("data.feature_dim", Some("32")),
    ("data.edges", None),
    ("data.features", None),
    ("train.num_parts", Some("4")),
    ("train.alpha", Some("0.15")),
    ("train.fanouts", Some("25,10,5")),
    ("train.batch_size", Some("256")),
    ("train.lr", Some("0.001")),
    ("train.epochs", Some("10")),
    ("train.sync_mode", Some("model_avg")),
    ("train.sync_period", Some("1")),
    ("train.architecture", Some("sage")),
    ("train.predictor", Some("mlp")),
    ("train.hidden_dim", Some("256")),
    ("train.num_miniclusters", Some("64")),
    ("train.use_edge_weights", Some("true")),
    ("train.exclude_target_edges", Some("true")),
    ("train.degree_source", Some("local")),
    ("train.eval_every", Some("1")),
    ("train.eval_k", None),
    ("experiment.variants", Some("splpg")),
    ("experiment.alpha_sweep", None),
    ("experiment.parts_sweep", None),
    ("experiment.seed", Some("0")),
    ("experiment.output", Some("lpsim-out")),
    ("experiment.scalar", Some("f64")),
    ("experiment.parallel", Some("false")),
];

/// Keys that do not influence any result.
const UNHASHED: &[&str] = &["experiment.output", "experiment.parallel"];

/// Where the graph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic { kind: SyntheticKind, feature_dim: usize },
    Files { edges: PathBuf, features: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    F32,
    F64,
}

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub train: TrainConfig,
    pub variants: Vec<Variant>,
    pub alpha_sweep: Vec<f64>,
    pub parts_sweep: Vec<usize>,
    pub seed: u64,
    pub output: PathBuf,
    pub scalar: ScalarKind,
    pub parallel: bool,
    resolved: BTreeMap<String, String>,
}

/// Raw `section.key → value` pairs, before typing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    /// Parses `[section]` headers and `key = value` lines; `#` and `;`
    /// start comments.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut section = String::new();
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            let key = if section.is_empty() {
                k.trim().to_string()
            } else {
                format!("{section}.{}", k.trim())
            };
            check_known(&key)?;
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    /// Applies a `section.key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: 0,
            text: assignment.to_string(),
        })?;
        let key = k.trim().to_string();
        check_known(&key)?;
        self.values.insert(key, v.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Every schema key with its effective value (explicit or default).
    fn effective(&self) -> BTreeMap<String, String> {
        SCHEMA
            .iter()
            .filter_map(|&(k, d)| {
                self.values
                    .get(k)
                    .cloned()
                    .or_else(|| d.map(str::to_string))
                    .map(|v| (k.to_string(), v))
            })
            .collect()
    }

    pub fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let eff = self.effective();
        let v = |k: &str| eff.get(k).map(String::as_str);
        let req = |k: &'static str| v(k).ok_or(ConfigError::Missing(k));

        let data = match (v("data.edges"), v("data.features")) {
            (Some(e), Some(f)) => DataSource::Files {
                edges: PathBuf::from(e),
                features: PathBuf::from(f),
            },
            (Some(_), None) => return Err(ConfigError::Missing("data.features")),
            (None, Some(_)) => return Err(ConfigError::Missing("data.edges")),
            (None, None) => {
                let kind = match req("data.synthetic")? {
                    "erdos_renyi" => SyntheticKind::ErdosRenyi {
                        n: typed(&eff, "data.n")?,
                        p: typed(&eff, "data.p")?,
                    },
                    "barabasi_albert" => SyntheticKind::BarabasiAlbert {
                        n: typed(&eff, "data.n")?,
                        m: typed(&eff, "data.m")?,
                    },
                    "sbm" => SyntheticKind::Sbm {
                        block_sizes: list(&eff, "data.blocks")?
                            .ok_or(ConfigError::Missing("data.blocks"))?,
                        p_in: typed(&eff, "data.p_in")?,
                        p_out: typed(&eff, "data.p_out")?,
                    },
                    other => {
                        return Err(ConfigError::Invalid {
                            key: "data.synthetic".into(),
                            reason: format!("unknown generator {other:?}"),
                        })
                    }
                };
                DataSource::Synthetic {
                    kind,
                    feature_dim: typed(&eff, "data.feature_dim")?,
                }
            }
        };

        let seed: u64 = typed(&eff, "experiment.seed")?;
        let mut train = TrainConfig {
            num_parts: typed(&eff, "train.num_parts")?,
            alpha: typed(&eff, "train.alpha")?,
            fanouts: list(&eff, "train.fanouts")?.unwrap_or_default(),
            batch_size: typed(&eff, "train.batch_size")?,
            epochs: typed(&eff, "train.epochs")?,
            sync_mode: typed(&eff, "train.sync_mode")?,
            sync_period: typed(&eff, "train.sync_period")?,
            architecture: typed(&eff, "train.architecture")?,
            predictor: typed(&eff, "train.predictor")?,
            hidden_dim: typed(&eff, "train.hidden_dim")?,
            num_miniclusters: typed(&eff, "train.num_miniclusters")?,
            use_edge_weights: typed(&eff, "train.use_edge_weights")?,
            exclude_target_edges: typed(&eff, "train.exclude_target_edges")?,
            eval_every: typed(&eff, "train.eval_every")?,
            eval_k: match v("train.eval_k") {
                Some(_) => Some(typed(&eff, "train.eval_k")?),
                None => None,
            },
            seeds: Seeds::from_base(seed),
            ..TrainConfig::default()
        };
        train.adam.lr = typed(&eff, "train.lr")?;
        train.degree_source = match req("train.degree_source")? {
            "local" => crate::sparsify::DegreeSource::Local,
            "global" => crate::sparsify::DegreeSource::Global,
            other => {
                return Err(ConfigError::Invalid {
                    key: "train.degree_source".into(),
                    reason: format!("expected local or global, got {other:?}"),
                })
            }
        };
        train.validate().map_err(|e| match e {
            crate::trainer::TrainError::Config { key, reason } => ConfigError::Invalid {
                key: format!("train.{key}"),
                reason,
            },
            other => ConfigError::Invalid {
                key: "train".into(),
                reason: other.to_string(),
            },
        })?;

        let variants: Vec<Variant> = req("experiment.variants")?
            .split(',')
            .map(|s| {
                s.trim().parse().map_err(|reason| ConfigError::Invalid {
                    key: "experiment.variants".into(),
                    reason,
                })
            })
            .collect::<Result<_, _>>()?;
        if variants.is_empty() {
            return Err(ConfigError::Invalid {
                key: "experiment.variants".into(),
                reason: "empty list".into(),
            });
        }
        let alpha_sweep = list(&eff, "experiment.alpha_sweep")?.unwrap_or_else(|| vec![train.alpha]);
        let parts_sweep = list(&eff, "experiment.parts_sweep")?.unwrap_or_else(|| vec![train.num_parts]);
        for &a in &alpha_sweep {
            if !(a > 0.0 && a <= 1.0) {
                return Err(ConfigError::Invalid {
                    key: "experiment.alpha_sweep".into(),
                    reason: format!("alpha {a} outside (0, 1]"),
                });
            }
        }
        if parts_sweep.contains(&0) {
            return Err(ConfigError::Invalid {
                key: "experiment.parts_sweep".into(),
                reason: "part counts must be positive".into(),
            });
        }
        let scalar = match req("experiment.scalar")? {
            "f32" => ScalarKind::F32,
            "f64" => ScalarKind::F64,
            other => {
                return Err(ConfigError::Invalid {
                    key: "experiment.scalar".into(),
                    reason: format!("expected f32 or f64, got {other:?}"),
                })
            }
        };
        Ok(ExperimentConfig {
            data,
            train,
            variants,
            alpha_sweep,
            parts_sweep,
            seed,
            output: PathBuf::from(req("experiment.output")?),
            scalar,
            parallel: typed(&eff, "experiment.parallel")?,
            resolved: eff,
        })
    }
}

fn check_known(key: &str) -> Result<(), ConfigError> {
    if SCHEMA.iter().any(|&(k, _)| k == key) {
        Ok(())
    } else {
        Err(ConfigError::UnknownKey(key.to_string()))
    }
}

fn typed<T: FromStr>(eff: &BTreeMap<String, String>, key: &'static str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    let raw = eff.get(key).ok_or(ConfigError::Missing(key))?;
    raw.parse().map_err(|e: T::Err| ConfigError::Invalid {
        key: key.into(),
        reason: format!("{raw:?}: {e}"),
    })
}

fn list<T: FromStr>(eff: &BTreeMap<String, String>, key: &'static str) -> Result<Option<Vec<T>>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    let Some(raw) = eff.get(key) else {
        return Ok(None);
    };
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim().parse().map_err(|e: T::Err| ConfigError::Invalid {
                key: key.into(),
                reason: format!("{s:?}: {e}"),
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        RawConfig::parse(text)?.resolve()
    }

    /// `key = value` for every resolved key, sorted.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.resolved {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// SHA-256 over the resolved keys that can change results, hex encoded.
    /// The output directory and the parallel flag are left out.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.resolved {
            if !UNHASHED.contains(&k.as_str()) {
                h.update(format!("{k} = {v}\n").as_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}
