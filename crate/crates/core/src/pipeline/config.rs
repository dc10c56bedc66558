use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{files, PipelineError, Result};
use crate::homology::{FeatureConventions, Threshold, MAX_HOMOLOGY_DIM};
use crate::learning::{CvConfig, Grouping, LabelRule, ModelKind, ModelParams, Protocol};
use crate::pointcloud::TsneParams;
use crate::preprocessing::FilterSpec;
use crate::seed;
use crate::signal_io::{CohortSpec, FormsSpec, RecordingMeta};

/// Recordings on disk plus the questionnaire file the labels come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordingsInput {
    /// Directory of recording CSVs carrying the schema line.
    pub dir: PathBuf,
    pub forms: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSource {
    Cohort(CohortSpec),
    Recordings(RecordingsInput),
}

impl Default for InputSource {
    fn default() -> Self {
        InputSource::Cohort(CohortSpec::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    /// Median split of the questionnaire stress index.
    #[default]
    Forms,
    /// The synthetic generator's own class assignment.
    Generator,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelConfig {
    pub source: LabelSource,
    pub rule: LabelRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub models: Vec<ModelKind>,
    pub protocol: Protocol,
    pub k: usize,
    pub grouping: Grouping,
    pub test_fraction: f64,
    pub params: ModelParams,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            models: ModelKind::ALL.to_vec(),
            protocol: Protocol::Cv5,
            k: 5,
            grouping: Grouping::BySubject,
            test_fraction: 0.2,
            params: ModelParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputOptions {
    /// Raw and filtered recordings as CSV (large).
    pub recordings: bool,
    pub pointclouds: bool,
    pub plots: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions { recordings: false, pointclouds: true, plots: true }
    }
}

fn default_window_s() -> f64 {
    10.0
}

fn default_embedding_dim() -> usize {
    3
}

fn default_max_dim() -> usize {
    2
}

/// Everything a run depends on. Outputs are a pure function of this value.
///
/// `seed` is mandatory. The seeds inside the cohort, forms and t-SNE
/// sections are ignored: each stage derives its stream from `seed` by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub input: InputSource,
    #[serde(default)]
    pub forms: FormsSpec,
    #[serde(default)]
    pub labels: LabelConfig,
    #[serde(default)]
    pub filter: FilterSpec,
    #[serde(default = "default_window_s")]
    pub window_s: f64,
    #[serde(default = "default_embedding_dim")]
    pub embedding_dim: usize,
    #[serde(default)]
    pub threshold: Threshold,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default)]
    pub features: FeatureConventions,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub tsne: TsneParams,
    #[serde(default)]
    pub outputs: OutputOptions,
}

impl PipelineConfig {
    /// Defaults everywhere, with the given root seed.
    pub fn with_seed(seed: u64) -> Self {
        serde_json::from_value(serde_json::json!({ "seed": seed })).expect("defaults deserialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| PipelineError::config(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON with the output location blanked, so
    /// the same study hashes identically wherever it is written.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        files::hex(&Sha256::digest(&bytes))
    }

    pub fn output_dir(&self) -> Result<&PathBuf> {
        self.output_dir.as_ref().ok_or_else(|| PipelineError::config("no output directory given"))
    }

    pub fn cohort(&self) -> Option<CohortSpec> {
        match &self.input {
            InputSource::Cohort(spec) => {
                Some(CohortSpec { rng_seed: seed::derive(self.seed, "synth"), ..spec.clone() })
            }
            InputSource::Recordings(_) => None,
        }
    }

    pub fn forms_spec(&self) -> FormsSpec {
        FormsSpec { rng_seed: seed::derive(self.seed, "forms"), ..self.forms.clone() }
    }

    pub fn cv_config(&self) -> CvConfig {
        let e = &self.evaluation;
        CvConfig {
            k: e.k,
            grouping: e.grouping,
            seed: seed::derive(self.seed, "evaluate"),
            test_fraction: e.test_fraction,
            params: e.params.clone(),
        }
    }

    pub fn tsne_params(&self) -> TsneParams {
        TsneParams { seed: seed::derive(self.seed, "tsne"), ..self.tsne.clone() }
    }

    /// Sample rate and channel count the filters and embedding will see.
    /// For recordings on disk this reads only the schema lines and headers.
    fn signal_shape(&self) -> Result<(f64, usize, Option<f64>)> {
        match &self.input {
            InputSource::Cohort(spec) => Ok((spec.sample_rate_hz, spec.n_channels, Some(spec.segment_duration_s))),
            InputSource::Recordings(r) => {
                if !r.forms.is_file() {
                    return Err(PipelineError::config(format!("forms file {} does not exist", r.forms.display())));
                }
                let found = files::recording_files(&r.dir)
                    .map_err(|e| PipelineError::config(format!("recordings directory {}: {e}", r.dir.display())))?;
                let (path, _) = found
                    .first()
                    .ok_or_else(|| PipelineError::config(format!("no recording CSVs in {}", r.dir.display())))?;
                let meta = RecordingMeta::sniff(path)
                    .map_err(|e| PipelineError::config(e.to_string()))?
                    .ok_or_else(|| PipelineError::config(format!("{} has no schema line", path.display())))?;
                let channels = files::csv_header_width(path).map_err(|e| PipelineError::config(e.to_string()))?;
                Ok((meta.sample_rate_hz, channels, None))
            }
        }
    }

    /// Checks every invariant that can be checked without touching the
    /// output directory. Any failure maps to exit code 2.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PipelineError::config(m));
        self.output_dir()?;
        if let InputSource::Cohort(spec) = &self.input {
            spec.validate().map_err(|e| PipelineError::config(e.to_string()))?;
            if self.evaluation.grouping == Grouping::BySubject
                && self.evaluation.protocol == Protocol::Cv5
                && self.evaluation.k > spec.n_subjects
            {
                return bad(format!("k = {} folds but only {} subjects", self.evaluation.k, spec.n_subjects));
            }
        }
        if let (InputSource::Recordings(_), LabelSource::Generator) = (&self.input, self.labels.source) {
            return bad("generator labels need a synthetic cohort input".into());
        }
        let (fs, channels, duration) = self.signal_shape()?;
        self.filter.validate(fs).map_err(|e| PipelineError::config(e.to_string()))?;
        if !(self.window_s.is_finite() && self.window_s > 0.0) {
            return bad(format!("window_s must be positive, got {}", self.window_s));
        }
        if let Some(d) = duration {
            if self.window_s > d {
                return bad(format!("window_s = {} exceeds the {d} s segment", self.window_s));
            }
        }
        if self.embedding_dim == 0 || self.embedding_dim > channels {
            return bad(format!("embedding_dim = {} outside 1..={channels}", self.embedding_dim));
        }
        if self.max_dim > MAX_HOMOLOGY_DIM {
            return bad(format!("max_dim = {} exceeds {MAX_HOMOLOGY_DIM}", self.max_dim));
        }
        if let Threshold::Value(v) = self.threshold {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("threshold must be positive, got {v}"));
            }
        }
        let w = &self.labels.rule;
        if w.weights.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || w.weights.iter().sum::<f64>() <= 0.0 {
            return bad(format!("label weights {:?}", w.weights));
        }
        if !(0.0..=1.0).contains(&w.threshold_quantile) {
            return bad(format!("label threshold_quantile = {}", w.threshold_quantile));
        }
        let e = &self.evaluation;
        if e.models.is_empty() {
            return bad("no models to evaluate".into());
        }
        if e.k < 2 {
            return bad(format!("k = {} (need at least 2)", e.k));
        }
        if !(e.test_fraction > 0.0 && e.test_fraction < 1.0) {
            return bad(format!("test_fraction = {}", e.test_fraction));
        }
        let t = &self.tsne;
        if t.perplexity.is_some_and(|p| !(p.is_finite() && p > 0.0))
            || !(t.learning_rate.is_finite() && t.learning_rate > 0.0)
            || t.iters == 0
        {
            return bad(format!("t-SNE parameters {t:?}"));
        }
        if !(self.forms.noise_sd.is_finite() && self.forms.noise_sd >= 0.0) {
            return bad(format!("forms noise_sd = {}", self.forms.noise_sd));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn valid() -> PipelineConfig {
        let mut c = PipelineConfig::with_seed(7);
        c.output_dir = Some("out".into());
        c
    }

    #[test]
    fn seed_is_required() {
        assert!(PipelineConfig::from_json("{}").is_err());
        let c = PipelineConfig::from_json(r#"{"seed": 3, "output_dir": "x"}"#).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.window_s, 10.0);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(PipelineConfig::from_json(r#"{"seed": 3, "sed": 4}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"seed": 3, "filter": {"f_hi": 4}}"#).is_err());
    }

    #[test]
    fn nyquist_violation_is_a_config_error() {
        let mut c = valid();
        c.filter.f_high_hz = 300.0;
        let e = c.validate().unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.message.contains("Nyquist"), "{e}");
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = valid();
        let mut b = valid();
        b.output_dir = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 8;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn json_round_trip() {
        let mut c = valid();
        c.threshold = Threshold::TwiceMinDistance;
        c.evaluation.models = vec![ModelKind::RF];
        assert_eq!(PipelineConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn stage_seeds_are_derived() {
        let c = valid();
        assert_ne!(c.cohort().unwrap().rng_seed, c.forms_spec().rng_seed);
        assert_ne!(c.cv_config().seed, c.tsne_params().seed);
    }
}
