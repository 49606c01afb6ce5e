//! Learner names, hyperparameter specs and fitted-model checkpoints.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    AdaBoost, AdaBoostParams, AffinityKernel, CoTraining, CoTrainingParams, GaussianNb, Knn, KnnParams,
    LabelSpreading, LabelSpreadingParams, LaplacianSvm, LaplacianSvmParams, LinearSvm, LogRegParams,
    LogisticRegression, Model, RandomForest, RandomForestParams, SvmParams,
};
use crate::charlstm::{CharLstm, CharLstmParams};
use crate::error::{Error, Result};
use crate::features::{Dataset, FeatureLayout, Samples, Standardizer};

pub const MODEL_FORMAT: &str = "handlescope-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    Svm,
    Knn,
    GaussianNb,
    Logreg,
    Adaboost,
    RandomForest,
    LabelSpreadingRbf,
    LabelSpreadingKnn,
    LaplacianSvm,
    CoTraining,
    CharLstm,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 11] = [
        LearnerKind::Svm,
        LearnerKind::Knn,
        LearnerKind::GaussianNb,
        LearnerKind::Logreg,
        LearnerKind::Adaboost,
        LearnerKind::RandomForest,
        LearnerKind::LabelSpreadingRbf,
        LearnerKind::LabelSpreadingKnn,
        LearnerKind::LaplacianSvm,
        LearnerKind::CoTraining,
        LearnerKind::CharLstm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Svm => "svm",
            LearnerKind::Knn => "knn",
            LearnerKind::GaussianNb => "gaussian-nb",
            LearnerKind::Logreg => "logreg",
            LearnerKind::Adaboost => "adaboost",
            LearnerKind::RandomForest => "random-forest",
            LearnerKind::LabelSpreadingRbf => "label-spreading-rbf",
            LearnerKind::LabelSpreadingKnn => "label-spreading-knn",
            LearnerKind::LaplacianSvm => "laplacian-svm",
            LearnerKind::CoTraining => "co-training",
            LearnerKind::CharLstm => "char-lstm",
        }
    }

    /// Name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            LearnerKind::Svm => "SVM",
            LearnerKind::Knn => "KNN",
            LearnerKind::GaussianNb => "Gaussian NB",
            LearnerKind::Logreg => "Logistic Regression",
            LearnerKind::Adaboost => "AdaBoost",
            LearnerKind::RandomForest => "Random Forest",
            LearnerKind::LabelSpreadingRbf => "LabelSpreading (RBF)",
            LearnerKind::LabelSpreadingKnn => "LabelSpreading (KNN)",
            LearnerKind::LaplacianSvm => "Laplacian SVM",
            LearnerKind::CoTraining => "Co-Training (SVM)",
            LearnerKind::CharLstm => "Char-LSTM",
        }
    }

    pub fn registered() -> String {
        Self::ALL.iter().map(|k| k.name()).collect::<Vec<_>>().join(", ")
    }

    pub fn is_semi_supervised(self) -> bool {
        matches!(
            self,
            LearnerKind::LabelSpreadingRbf
                | LearnerKind::LabelSpreadingKnn
                | LearnerKind::LaplacianSvm
                | LearnerKind::CoTraining
        )
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        Self::ALL
            .into_iter()
            .find(|k| k.name() == t)
            .ok_or_else(|| Error::UnknownLearner {
                name: t.to_string(),
                registered: Self::registered(),
            })
    }
}

/// A learner together with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", content = "params", rename_all = "kebab-case")]
pub enum LearnerSpec {
    Svm(SvmParams),
    Knn(KnnParams),
    GaussianNb,
    Logreg(LogRegParams),
    Adaboost(AdaBoostParams),
    RandomForest(RandomForestParams),
    LabelSpreadingRbf(LabelSpreadingParams),
    LabelSpreadingKnn(LabelSpreadingParams),
    LaplacianSvm(LaplacianSvmParams),
    CoTraining(CoTrainingParams),
    CharLstm(CharLstmParams),
}

impl LearnerSpec {
    pub fn default_for(kind: LearnerKind) -> Self {
        match kind {
            LearnerKind::Svm => LearnerSpec::Svm(SvmParams::default()),
            LearnerKind::Knn => LearnerSpec::Knn(KnnParams::default()),
            LearnerKind::GaussianNb => LearnerSpec::GaussianNb,
            LearnerKind::Logreg => LearnerSpec::Logreg(LogRegParams::default()),
            LearnerKind::Adaboost => LearnerSpec::Adaboost(AdaBoostParams::default()),
            LearnerKind::RandomForest => LearnerSpec::RandomForest(RandomForestParams::default()),
            LearnerKind::LabelSpreadingRbf => LearnerSpec::LabelSpreadingRbf(LabelSpreadingParams::default()),
            LearnerKind::LabelSpreadingKnn => LearnerSpec::LabelSpreadingKnn(LabelSpreadingParams {
                kernel: AffinityKernel::Knn { k: 5 },
                ..Default::default()
            }),
            LearnerKind::LaplacianSvm => LearnerSpec::LaplacianSvm(LaplacianSvmParams::default()),
            LearnerKind::CoTraining => LearnerSpec::CoTraining(CoTrainingParams::default()),
            LearnerKind::CharLstm => LearnerSpec::CharLstm(CharLstmParams::default()),
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Ok(Self::default_for(name.parse()?))
    }

    pub fn kind(&self) -> LearnerKind {
        match self {
            LearnerSpec::Svm(_) => LearnerKind::Svm,
            LearnerSpec::Knn(_) => LearnerKind::Knn,
            LearnerSpec::GaussianNb => LearnerKind::GaussianNb,
            LearnerSpec::Logreg(_) => LearnerKind::Logreg,
            LearnerSpec::Adaboost(_) => LearnerKind::Adaboost,
            LearnerSpec::RandomForest(_) => LearnerKind::RandomForest,
            LearnerSpec::LabelSpreadingRbf(_) => LearnerKind::LabelSpreadingRbf,
            LearnerSpec::LabelSpreadingKnn(_) => LearnerKind::LabelSpreadingKnn,
            LearnerSpec::LaplacianSvm(_) => LearnerKind::LaplacianSvm,
            LearnerSpec::CoTraining(_) => LearnerKind::CoTraining,
            LearnerSpec::CharLstm(_) => LearnerKind::CharLstm,
        }
    }

    /// Replaces the listed hyperparameters; unknown keys are rejected.
    pub fn with_overrides(&self, overrides: &toml::Table) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let kind = self.kind();
        let bad = |e: String| Error::Config(format!("learner {kind}: {e}"));
        let value = serde_json::to_value(self)?;
        let mut params = match value.get("params") {
            Some(serde_json::Value::Object(m)) => m.clone(),
            _ => serde_json::Map::new(),
        };
        for (k, v) in overrides {
            if !params.contains_key(k) {
                return Err(bad(format!("unknown hyperparameter {k:?}")));
            }
            params.insert(k.clone(), serde_json::to_value(v)?);
        }
        let merged = serde_json::json!({ "learner": kind.name(), "params": params });
        serde_json::from_value(merged).map_err(|e| bad(e.to_string()))
    }

    /// Sets the seed of learners that draw random numbers.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut s = self.clone();
        match &mut s {
            LearnerSpec::RandomForest(p) => p.seed = seed,
            LearnerSpec::CharLstm(p) => p.seed = seed,
            _ => {}
        }
        s
    }

    pub fn build(&self) -> Learner {
        match self {
            LearnerSpec::Svm(p) => Learner::Svm(LinearSvm::new(*p)),
            LearnerSpec::Knn(p) => Learner::Knn(Knn::new(*p)),
            LearnerSpec::GaussianNb => Learner::GaussianNb(GaussianNb::new()),
            LearnerSpec::Logreg(p) => Learner::Logreg(LogisticRegression::new(*p)),
            LearnerSpec::Adaboost(p) => Learner::Adaboost(AdaBoost::new(*p)),
            LearnerSpec::RandomForest(p) => Learner::RandomForest(RandomForest::new(*p)),
            LearnerSpec::LabelSpreadingRbf(p) | LearnerSpec::LabelSpreadingKnn(p) => {
                Learner::LabelSpreading(LabelSpreading::new(*p))
            }
            LearnerSpec::LaplacianSvm(p) => Learner::LaplacianSvm(LaplacianSvm::new(*p)),
            LearnerSpec::CoTraining(p) => Learner::CoTraining(CoTraining::new(p.clone())),
            LearnerSpec::CharLstm(p) => Learner::CharLstm(CharLstm::new(*p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Learner {
    Svm(LinearSvm),
    Knn(Knn),
    GaussianNb(GaussianNb),
    Logreg(LogisticRegression),
    Adaboost(AdaBoost),
    RandomForest(RandomForest),
    LabelSpreading(LabelSpreading),
    LaplacianSvm(LaplacianSvm),
    CoTraining(CoTraining),
    CharLstm(CharLstm),
}

macro_rules! dispatch {
    ($self:expr, $m:ident => $body:expr) => {
        match $self {
            Learner::Svm($m) => $body,
            Learner::Knn($m) => $body,
            Learner::GaussianNb($m) => $body,
            Learner::Logreg($m) => $body,
            Learner::Adaboost($m) => $body,
            Learner::RandomForest($m) => $body,
            Learner::LabelSpreading($m) => $body,
            Learner::LaplacianSvm($m) => $body,
            Learner::CoTraining($m) => $body,
            Learner::CharLstm($m) => $body,
        }
    };
}

impl Model for Learner {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        dispatch!(self, m => m.fit(data))
    }

    fn decision(&self, x: &Samples) -> Result<Vec<f64>> {
        dispatch!(self, m => m.decision(x))
    }

    fn is_semi_supervised(&self) -> bool {
        dispatch!(self, m => m.is_semi_supervised())
    }
}

fn standardize_samples(s: &Samples, st: &Option<Standardizer>) -> Samples {
    match st {
        Some(st) => Samples {
            features: st.transform(&s.features),
            handles: s.handles.clone(),
        },
        None => s.clone(),
    }
}

/// A trained learner plus the column scaling fitted on its labeled rows.
/// Serializes to a versioned JSON checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub format: String,
    pub version: u32,
    pub spec: LearnerSpec,
    pub layout: FeatureLayout,
    pub standardizer: Option<Standardizer>,
    pub learner: Learner,
}

impl FittedModel {
    /// Fits `spec` on `data`. Semi-supervised learners see the unlabeled
    /// pool, supervised ones only the labeled rows.
    pub fn fit(spec: &LearnerSpec, data: &Dataset, standardize: bool) -> Result<Self> {
        let standardizer = standardize.then(|| Standardizer::fit(&data.labeled.features));
        let mut learner = spec.build();
        let unlabeled = if learner.is_semi_supervised() {
            standardize_samples(&data.unlabeled, &standardizer)
        } else {
            Samples::empty(data.dim())
        };
        let scaled = Dataset::new(
            data.layout,
            standardize_samples(&data.labeled, &standardizer),
            data.labels.clone(),
            unlabeled,
        );
        learner.fit(&scaled)?;
        Ok(FittedModel {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_FORMAT_VERSION,
            spec: spec.clone(),
            layout: data.layout,
            standardizer,
            learner,
        })
    }

    pub fn kind(&self) -> LearnerKind {
        self.spec.kind()
    }

    pub fn decision(&self, x: &Samples) -> Result<Vec<f64>> {
        self.learner.decision(&standardize_samples(x, &self.standardizer))
    }

    pub fn predict(&self, x: &Samples) -> Result<Vec<i8>> {
        self.learner.predict(&standardize_samples(x, &self.standardizer))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Checkpoint(format!("not JSON: {e}")))?;
        let format = value.get("format").and_then(|v| v.as_str());
        if format != Some(MODEL_FORMAT) {
            return Err(Error::Checkpoint(format!("expected format {MODEL_FORMAT:?}, found {format:?}")));
        }
        let version = value.get("version").and_then(|v| v.as_u64());
        if version != Some(MODEL_FORMAT_VERSION as u64) {
            return Err(Error::Checkpoint(format!(
                "expected version {MODEL_FORMAT_VERSION}, found {version:?}"
            )));
        }
        serde_json::from_value(value).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn toy() -> Dataset {
        let rows: Vec<[f64; 5]> = (0..20)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                [10.0 + s + 0.1 * i as f64, 3.0 * s, 2.0, s * 0.5, (i % 3) as f64]
            })
            .collect();
        let y = (0..20).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        Dataset::supervised(Matrix::from_rows(&rows, 5), y)
    }

    #[test]
    fn names_round_trip() {
        for k in LearnerKind::ALL {
            assert_eq!(k.name().parse::<LearnerKind>().unwrap(), k);
            assert_eq!(LearnerSpec::default_for(k).kind(), k);
        }
        let err = "svn".parse::<LearnerKind>().unwrap_err();
        assert!(err.to_string().contains("label-spreading-rbf"));
    }

    #[test]
    fn overrides_apply_and_reject_typos() {
        let base = LearnerSpec::from_name("svm").unwrap();
        let t: toml::Table = toml::from_str("c = 0.5").unwrap();
        assert_eq!(base.with_overrides(&t).unwrap(), LearnerSpec::Svm(SvmParams { c: 0.5, ..Default::default() }));
        let typo: toml::Table = toml::from_str("cc = 0.5").unwrap();
        assert!(matches!(base.with_overrides(&typo), Err(Error::Config(_))));
        let views: toml::Table = toml::from_str("views = [[0, 1], [2, 3]]").unwrap();
        let ct = LearnerSpec::from_name("co-training").unwrap().with_overrides(&views).unwrap();
        let LearnerSpec::CoTraining(p) = ct else { panic!() };
        assert_eq!(p.views, Some((vec![0, 1], vec![2, 3])));
    }

    #[test]
    fn every_learner_round_trips_through_json() {
        let data = toy();
        for k in LearnerKind::ALL {
            let mut spec = LearnerSpec::default_for(k);
            if let LearnerSpec::CharLstm(p) = &mut spec {
                p.epochs = 2;
            }
            if let LearnerSpec::RandomForest(p) = &mut spec {
                p.n_trees = 7;
            }
            let fitted = FittedModel::fit(&spec, &data, true).unwrap();
            let back = FittedModel::from_json(&fitted.to_json().unwrap()).unwrap();
            assert_eq!(
                back.decision(&data.labeled).unwrap(),
                fitted.decision(&data.labeled).unwrap(),
                "{k}"
            );
        }
    }

    #[test]
    fn checkpoint_header_is_checked() {
        let fitted = FittedModel::fit(&LearnerSpec::from_name("svm").unwrap(), &toy(), false).unwrap();
        let json = fitted.to_json().unwrap();
        let wrong = json.replace("\"version\":1", "\"version\":99");
        assert!(matches!(FittedModel::from_json(&wrong), Err(Error::Checkpoint(_))));
        assert!(matches!(FittedModel::from_json("{}"), Err(Error::Checkpoint(_))));
    }
}
