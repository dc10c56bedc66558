//! Stage computations and their standalone file-to-file commands.
//!
//! `run` calls the same computations on in-memory values and the same
//! writers, and every on-disk format round-trips floats exactly, so a chain
//! of stage commands reproduces `run`'s files byte for byte.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use super::config::{InputSource, LabelSource, PipelineConfig};
use super::files::{self, TsneRow};
use super::{plots, AtStage, PipelineError, Result, Stage};
use crate::homology::plot::{barcode_svg, diagram_svg};
use crate::homology::{compute_persistence, rips_filtration, PersistenceDiagram};
use crate::learning::{
    assemble_features, forms_significance, label_from_forms, EvalReport, FormsComparison, Provenance, StandardScaler,
    StudyDataset,
};
use crate::pointcloud::{distance_matrix, pca_embed, tsne_embed, PointCloud};
use crate::preprocessing::{preprocess, segment_trials};
use crate::signal_io::{
    cohort_labels, load_recording, read_forms_csv, synth_forms, synth_subject, write_forms_csv, write_recording, Label,
    Recording, Segment, SignalError, SubjectForms,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageName {
    Synth,
    Preprocess,
    Embed,
    Persist,
    Features,
    Evaluate,
    Tsne,
    Plot,
}

impl StageName {
    pub const ALL: [StageName; 8] = [
        StageName::Synth,
        StageName::Preprocess,
        StageName::Embed,
        StageName::Persist,
        StageName::Features,
        StageName::Evaluate,
        StageName::Tsne,
        StageName::Plot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StageName::Synth => "synth",
            StageName::Preprocess => "preprocess",
            StageName::Embed => "embed",
            StageName::Persist => "persist",
            StageName::Features => "features",
            StageName::Evaluate => "evaluate",
            StageName::Tsne => "tsne",
            StageName::Plot => "plot",
        }
    }
}

impl fmt::Display for StageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StageName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        StageName::ALL.into_iter().find(|n| n.as_str() == s).ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

fn input_err(stage: Stage, message: impl Into<String>) -> PipelineError {
    PipelineError::new(stage, super::ErrorKind::Input, message)
}

// ---- computations -------------------------------------------------------

/// `(subject_id, generator label)` for every synthetic subject.
pub(crate) fn truth_labels(cfg: &PipelineConfig) -> Result<Vec<(String, Label)>> {
    let spec = cfg.cohort().ok_or_else(|| PipelineError::config("synthetic labels need a cohort input"))?;
    let labels = cohort_labels(&spec).at(Stage::Synth)?;
    Ok(labels.into_iter().enumerate().map(|(i, l)| (spec.subject_id(i), l)).collect())
}

pub(crate) fn make_forms(cfg: &PipelineConfig, truth: &[(String, Label)]) -> Vec<SubjectForms> {
    synth_forms(truth, &cfg.forms_spec())
}

pub(crate) fn preprocess_recording(cfg: &PipelineConfig, rec: &Recording) -> Result<Recording> {
    preprocess(rec, &cfg.filter).at(Stage::Preprocess)
}

/// Windows a filtered recording and embeds every trial.
pub(crate) fn embed_recording(cfg: &PipelineConfig, rec: &Recording) -> Result<Vec<(Provenance, PointCloud)>> {
    let trials = segment_trials(rec, cfg.window_s).at(Stage::Embed)?;
    trials
        .par_iter()
        .map(|t| {
            let pc = pca_embed(t, cfg.embedding_dim).at(Stage::Embed)?;
            let prov = Provenance { subject_id: t.subject_id.clone(), segment: t.segment, trial_index: t.trial_index };
            Ok((prov, pc))
        })
        .collect()
}

pub(crate) fn persist_cloud(cfg: &PipelineConfig, pc: &PointCloud) -> Result<PersistenceDiagram> {
    let dm = distance_matrix(pc);
    let f = rips_filtration(&dm, cfg.max_dim, cfg.threshold).at(Stage::Persist)?;
    compute_persistence(&f).at(Stage::Persist)
}

pub(crate) fn resolve_labels(
    cfg: &PipelineConfig,
    forms: &[SubjectForms],
    truth: Option<&[(String, Label)]>,
) -> Result<Vec<(String, Label)>> {
    match cfg.labels.source {
        LabelSource::Forms => label_from_forms(forms, &cfg.labels.rule).at(Stage::Features),
        LabelSource::Generator => {
            truth.map(<[_]>::to_vec).ok_or_else(|| input_err(Stage::Features, "generator labels are unavailable"))
        }
    }
}

pub(crate) fn significance(forms: &[SubjectForms]) -> Result<Vec<FormsComparison>> {
    forms_significance(forms).at(Stage::Features)
}

pub(crate) fn build_dataset(
    cfg: &PipelineConfig,
    diagrams: &[(Provenance, PersistenceDiagram)],
    labels: &[(String, Label)],
) -> Result<StudyDataset> {
    let mut rows = Vec::with_capacity(diagrams.len());
    let mut ys = Vec::with_capacity(diagrams.len());
    for (prov, pd) in diagrams {
        let label = labels
            .iter()
            .find(|(s, _)| *s == prov.subject_id)
            .map(|(_, l)| *l)
            .ok_or_else(|| input_err(Stage::Features, format!("no label for subject {}", prov.subject_id)))?;
        rows.push(assemble_features(pd, prov.clone(), &cfg.features));
        ys.push(label);
    }
    StudyDataset::new(rows, ys).at(Stage::Features)
}

pub(crate) fn evaluate(cfg: &PipelineConfig, ds: &StudyDataset) -> Result<EvalReport> {
    EvalReport::evaluate(ds, &cfg.evaluation.models, cfg.evaluation.protocol, &cfg.cv_config()).at(Stage::Evaluate)
}

pub(crate) struct TsneSegment {
    pub segment: Segment,
    pub perplexity: f64,
    pub kl: f64,
    pub rows: Vec<TsneRow>,
}

/// One embedding per segment, on features z-scored within the segment.
pub(crate) fn tsne_segments(cfg: &PipelineConfig, ds: &StudyDataset) -> Result<Vec<TsneSegment>> {
    let params = cfg.tsne_params();
    Segment::ALL
        .iter()
        .map(|&segment| (segment, ds.segment(segment)))
        .filter(|(_, part)| !part.is_empty())
        .map(|(segment, part)| {
            let x = part.x();
            let z = StandardScaler::fit(&x).transform(&x);
            let seg_params = crate::pointcloud::TsneParams {
                seed: crate::seed::derive(params.seed, segment.as_str()),
                ..params.clone()
            };
            let r = tsne_embed(&z, &seg_params).at(Stage::Tsne)?;
            let rows = part
                .rows
                .iter()
                .zip(&part.labels)
                .zip(&r.embedding)
                .map(|((fv, l), p)| (fv.provenance.clone(), *l, *p))
                .collect();
            Ok(TsneSegment { segment, perplexity: r.perplexity, kl: r.kl_final, rows })
        })
        .collect()
}

// ---- writers ------------------------------------------------------------

pub(crate) fn write_raw(out: &Path, dir: &str, rec: &Recording, stage: Stage) -> Result<()> {
    let path = out.join(dir).join(files::recording_name(&rec.subject_id, rec.segment));
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).at(stage)?;
    }
    write_recording(&path, rec).at(stage)
}

pub(crate) fn write_synth_tables(out: &Path, forms: &[SubjectForms], truth: &[(String, Label)]) -> Result<()> {
    files::write_with(&out.join(files::FORMS_FILE), |w| write_forms_csv(w, forms)).at(Stage::Synth)?;
    files::write_with(&out.join(files::TRUTH_FILE), |w| files::write_labels(w, truth)).at(Stage::Synth)
}

pub(crate) fn write_pointcloud(out: &Path, prov: &Provenance, pc: &PointCloud) -> Result<()> {
    let stem = files::trial_stem(&prov.subject_id, prov.segment, prov.trial_index);
    files::write_with(&out.join(files::POINTCLOUD_DIR).join(format!("{stem}.csv")), |w| pc.write_csv(w))
        .at(Stage::Embed)
}

pub(crate) fn write_diagram(out: &Path, prov: &Provenance, pd: &PersistenceDiagram) -> Result<()> {
    let stem = files::trial_stem(&prov.subject_id, prov.segment, prov.trial_index);
    files::write_with(&out.join(files::DIAGRAM_DIR).join(format!("{stem}.csv")), |w| pd.write_csv(w)).at(Stage::Persist)
}

pub(crate) fn write_diagram_plots(out: &Path, prov: &Provenance, pd: &PersistenceDiagram) -> Result<()> {
    let stem = files::trial_stem(&prov.subject_id, prov.segment, prov.trial_index);
    let title = format!("{} {} trial {}", prov.subject_id, prov.segment, prov.trial_index);
    let plots = out.join(files::PLOT_DIR);
    files::write_file(&plots.join("diagrams").join(format!("{stem}.svg")), diagram_svg(pd, &title).as_bytes())
        .at(Stage::Plot)?;
    files::write_file(&plots.join("barcodes").join(format!("{stem}.svg")), barcode_svg(pd, &title).as_bytes())
        .at(Stage::Plot)
}

pub(crate) fn write_feature_tables(
    out: &Path,
    labels: &[(String, Label)],
    tests: &[FormsComparison],
    ds: &StudyDataset,
) -> Result<()> {
    files::write_with(&out.join(files::LABELS_FILE), |w| files::write_labels(w, labels)).at(Stage::Features)?;
    files::write_with(&out.join(files::SIGNIFICANCE_FILE), |w| files::write_significance(w, tests))
        .at(Stage::Features)?;
    files::write_with(&out.join(files::FEATURES_FILE), |w| ds.write_csv(w)).at(Stage::Features)
}

pub(crate) fn write_eval(out: &Path, report: &EvalReport) -> Result<()> {
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    files::write_file(&out.join(files::EVAL_JSON), json.as_bytes()).at(Stage::Evaluate)?;
    files::write_with(&out.join(files::EVAL_CSV), |w| report.write_csv(w)).at(Stage::Evaluate)
}

pub(crate) fn write_tsne(out: &Path, t: &TsneSegment) -> Result<()> {
    let path = out.join(files::TSNE_DIR).join(format!("{}.csv", t.segment));
    files::write_with(&path, |w| files::write_tsne(w, t.segment, t.perplexity, t.kl, &t.rows)).at(Stage::Tsne)
}

pub(crate) fn write_tsne_plot(out: &Path, segment: Segment, rows: &[TsneRow]) -> Result<()> {
    let path = out.join(files::PLOT_DIR).join(format!("tsne_{segment}.svg"));
    files::write_file(&path, plots::tsne_svg(segment, rows).as_bytes()).at(Stage::Plot)
}

// ---- readers ------------------------------------------------------------

fn load_recordings(dir: &Path, stage: Stage) -> Result<Vec<Recording>> {
    let found = files::recording_files(dir).at(stage)?;
    if found.is_empty() {
        return Err(input_err(stage, format!("no recordings in {}", dir.display())));
    }
    found.par_iter().map(|(path, meta)| load_recording(path, meta).at(stage)).collect()
}

fn read_diagrams(input: &Path, stage: Stage) -> Result<Vec<(Provenance, PersistenceDiagram)>> {
    let dir = input.join(files::DIAGRAM_DIR);
    let found = files::trial_files(&dir).at(stage)?;
    if found.is_empty() {
        return Err(input_err(stage, format!("no diagrams in {}", dir.display())));
    }
    found
        .par_iter()
        .map(|(prov, path)| {
            let text = files::read_text(path).at(stage)?;
            let pd = PersistenceDiagram::read_csv(&text).at(stage)?;
            Ok((prov.clone(), pd))
        })
        .collect()
}

fn read_dataset(input: &Path, stage: Stage) -> Result<StudyDataset> {
    let text = files::read_text(&input.join(files::FEATURES_FILE)).at(stage)?;
    StudyDataset::read_csv(&text).map_err(|e| input_err(stage, e))
}

fn read_forms(cfg: &PipelineConfig, input: &Path, stage: Stage) -> Result<Vec<SubjectForms>> {
    let path = match &cfg.input {
        InputSource::Recordings(r) => r.forms.clone(),
        InputSource::Cohort(_) => input.join(files::FORMS_FILE),
    };
    let text = files::read_text(&path).at(stage)?;
    read_forms_csv(&text).map_err(|e: SignalError| input_err(stage, format!("{}: {e}", path.display())))
}

fn clear(out: &Path, rel: &str, stage: Stage) -> Result<()> {
    files::remove_if_exists(&out.join(rel)).at(stage)
}

// ---- stage commands -----------------------------------------------------

/// Raw synthetic recordings plus the questionnaire and ground-truth tables.
pub fn stage_synth(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let spec = cfg.cohort().ok_or_else(|| PipelineError::config("synth needs a cohort input"))?;
    clear(out, files::RAW_DIR, Stage::Synth)?;
    let truth = truth_labels(cfg)?;
    (0..spec.n_subjects).into_par_iter().try_for_each(|i| {
        let subject = synth_subject(&spec, i).at(Stage::Synth)?;
        subject.recordings.iter().try_for_each(|rec| write_raw(out, files::RAW_DIR, rec, Stage::Synth))
    })?;
    write_synth_tables(out, &make_forms(cfg, &truth), &truth)
}

pub fn stage_preprocess(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let raw_dir = match &cfg.input {
        InputSource::Recordings(r) => r.dir.clone(),
        InputSource::Cohort(_) => input.join(files::RAW_DIR),
    };
    let found = files::recording_files(&raw_dir).at(Stage::Preprocess)?;
    if found.is_empty() {
        return Err(input_err(Stage::Preprocess, format!("no recordings in {}", raw_dir.display())));
    }
    clear(out, files::CLEAN_DIR, Stage::Preprocess)?;
    found.par_iter().try_for_each(|(path, meta)| {
        let rec = load_recording(path, meta).at(Stage::Preprocess)?;
        write_raw(out, files::CLEAN_DIR, &preprocess_recording(cfg, &rec)?, Stage::Preprocess)
    })
}

pub fn stage_embed(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let recs = load_recordings(&input.join(files::CLEAN_DIR), Stage::Embed)?;
    clear(out, files::POINTCLOUD_DIR, Stage::Embed)?;
    recs.par_iter().try_for_each(|rec| {
        embed_recording(cfg, rec)?.iter().try_for_each(|(prov, pc)| write_pointcloud(out, prov, pc))
    })
}

pub fn stage_persist(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let dir = input.join(files::POINTCLOUD_DIR);
    let found = files::trial_files(&dir).at(Stage::Persist)?;
    if found.is_empty() {
        return Err(input_err(Stage::Persist, format!("no point clouds in {}", dir.display())));
    }
    clear(out, files::DIAGRAM_DIR, Stage::Persist)?;
    found.par_iter().try_for_each(|(prov, path)| {
        let text = files::read_text(path).at(Stage::Persist)?;
        let pc = PointCloud::read_csv(&text).at(Stage::Persist)?;
        write_diagram(out, prov, &persist_cloud(cfg, &pc)?)
    })
}

pub fn stage_features(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let diagrams = read_diagrams(input, Stage::Features)?;
    let forms = read_forms(cfg, input, Stage::Features)?;
    let truth = match cfg.labels.source {
        LabelSource::Generator => {
            let text = files::read_text(&input.join(files::TRUTH_FILE)).at(Stage::Features)?;
            Some(files::read_labels(&text).map_err(|e| input_err(Stage::Features, e))?)
        }
        LabelSource::Forms => None,
    };
    let labels = resolve_labels(cfg, &forms, truth.as_deref())?;
    let tests = significance(&forms)?;
    let ds = build_dataset(cfg, &diagrams, &labels)?;
    write_feature_tables(out, &labels, &tests, &ds)
}

pub fn stage_evaluate(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let ds = read_dataset(input, Stage::Evaluate)?;
    write_eval(out, &evaluate(cfg, &ds)?)
}

pub fn stage_tsne(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let ds = read_dataset(input, Stage::Tsne)?;
    let segments = tsne_segments(cfg, &ds)?;
    clear(out, files::TSNE_DIR, Stage::Tsne)?;
    segments.iter().try_for_each(|t| write_tsne(out, t))
}

/// SVGs for every diagram and, when present, every t-SNE table.
pub fn stage_plot(_cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let diagrams = read_diagrams(input, Stage::Plot)?;
    clear(out, files::PLOT_DIR, Stage::Plot)?;
    diagrams.par_iter().try_for_each(|(prov, pd)| write_diagram_plots(out, prov, pd))?;
    let tsne_dir = input.join(files::TSNE_DIR);
    if tsne_dir.is_dir() {
        for path in files::csv_files(&tsne_dir).at(Stage::Plot)? {
            let text = files::read_text(&path).at(Stage::Plot)?;
            let (segment, rows) = files::read_tsne(&text).map_err(|e| input_err(Stage::Plot, e))?;
            write_tsne_plot(out, segment, &rows)?;
        }
    }
    Ok(())
}

/// Validates `cfg` and runs one stage, reading from `input` and writing to
/// `out` (both default to the configured output directory).
pub fn cmd_stage(stage: StageName, cfg: &PipelineConfig, input: Option<&Path>, out: Option<&Path>) -> Result<()> {
    cfg.validate()?;
    let default = cfg.output_dir()?.as_path();
    let input = input.unwrap_or(default);
    let out = out.unwrap_or(default);
    std::fs::create_dir_all(out).at(Stage::Config)?;
    match stage {
        StageName::Synth => stage_synth(cfg, out),
        StageName::Preprocess => stage_preprocess(cfg, input, out),
        StageName::Embed => stage_embed(cfg, input, out),
        StageName::Persist => stage_persist(cfg, input, out),
        StageName::Features => stage_features(cfg, input, out),
        StageName::Evaluate => stage_evaluate(cfg, input, out),
        StageName::Tsne => stage_tsne(cfg, input, out),
        StageName::Plot => stage_plot(cfg, input, out),
    }
}
