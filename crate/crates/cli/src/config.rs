use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use handlescope_core::similarity::VarianceModel;
use handlescope_core::{Error, FeatureLayout, Result, SynthConfig};
use serde::{Deserialize, Serialize};

pub const RESOLVED_CONFIG: &str = "config.resolved.toml";

/// Every setting a run can take. Values come from the defaults, then the
/// `--config` file, then command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; 0 lets the runtime decide.
    pub jobs: usize,
    pub layout: FeatureLayout,
    pub standardize: bool,
    pub input: Option<PathBuf>,
    pub lexicon_positive: Option<PathBuf>,
    pub lexicon_negative: Option<PathBuf>,
    /// Filter rule file, one `feature op threshold` per line.
    pub rules: Option<PathBuf>,
    /// Inline filter rules, applied after the file's.
    pub filters: Vec<String>,
    pub folds: usize,
    pub alpha: f64,
    pub case_insensitive: bool,
    pub variance: VarianceModel,
    pub learners: Vec<String>,
    pub learner: String,
    pub model: Option<PathBuf>,
    pub synth: SynthConfig,
    /// Per-learner hyperparameter overrides, keyed by learner name.
    pub hyperparameters: BTreeMap<String, toml::Table>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out: PathBuf::from("handlescope-out"),
            jobs: 0,
            layout: FeatureLayout::Handle5,
            standardize: true,
            input: None,
            lexicon_positive: None,
            lexicon_negative: None,
            rules: None,
            filters: Vec::new(),
            folds: 10,
            alpha: 0.01,
            case_insensitive: true,
            variance: VarianceModel::Welch,
            learners: Vec::new(),
            learner: "svm".into(),
            model: None,
            synth: SynthConfig::default(),
            hyperparameters: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Writes the resolved configuration into the output directory.
    pub fn echo(&self) -> Result<()> {
        let path = self.out.join(RESOLVED_CONFIG);
        std::fs::write(&path, self.to_toml_string()?).map_err(|e| Error::io(&path, e))
    }
}
