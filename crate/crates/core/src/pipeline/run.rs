use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{InputSource, PipelineConfig};
use super::stages::{self, TsneSegment};
use super::{files, AtStage, PipelineError, Result, Stage};
use crate::homology::PersistenceDiagram;
use crate::learning::{EvalReport, Provenance};
use crate::signal_io::{load_recording, read_forms_csv, synth_subject, Label, Recording, SubjectForms};

/// What a successful run produced, for the caller to report.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub n_subjects: usize,
    pub n_trials: usize,
    pub report: EvalReport,
    pub config_hash: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: &'static str,
    package: &'static str,
    version: &'static str,
    seed: u64,
    config_sha256: &'a str,
    subjects: usize,
    trials: usize,
    files: std::collections::BTreeMap<String, String>,
}

#[derive(Serialize)]
struct FailureMarker<'a> {
    schema: &'static str,
    stage: String,
    exit_code: i32,
    message: &'a str,
}

/// Filter, embed and persist one recording, writing the per-trial files.
fn process_recording(
    cfg: &PipelineConfig,
    out: &Path,
    rec: &Recording,
) -> Result<Vec<(Provenance, PersistenceDiagram)>> {
    if cfg.outputs.recordings {
        stages::write_raw(out, files::RAW_DIR, rec, Stage::Synth)?;
    }
    let clean = stages::preprocess_recording(cfg, rec)?;
    if cfg.outputs.recordings {
        stages::write_raw(out, files::CLEAN_DIR, &clean, Stage::Preprocess)?;
    }
    let clouds = stages::embed_recording(cfg, &clean)?;
    drop(clean);
    clouds
        .par_iter()
        .map(|(prov, pc)| {
            if cfg.outputs.pointclouds {
                stages::write_pointcloud(out, prov, pc)?;
            }
            let pd = stages::persist_cloud(cfg, pc)?;
            stages::write_diagram(out, prov, &pd)?;
            if cfg.outputs.plots {
                stages::write_diagram_plots(out, prov, &pd)?;
            }
            Ok((prov.clone(), pd))
        })
        .collect()
}

fn run_body(cfg: &PipelineConfig, out: &Path) -> Result<RunSummary> {
    let config_hash = cfg.hash();
    let mut config_json = cfg.to_json();
    config_json.push('\n');
    files::write_file(&out.join(files::CONFIG_FILE), config_json.as_bytes()).at(Stage::Manifest)?;

    // Signals are generated or loaded one subject at a time and dropped as
    // soon as their diagrams exist; a full cohort never sits in memory.
    let (forms, truth, mut diagrams): (Vec<SubjectForms>, Option<Vec<(String, Label)>>, Vec<_>) = match &cfg.input {
        InputSource::Cohort(_) => {
            let spec = cfg.cohort().expect("cohort input");
            let truth = stages::truth_labels(cfg)?;
            let forms = stages::make_forms(cfg, &truth);
            stages::write_synth_tables(out, &forms, &truth)?;
            let per_subject = (0..spec.n_subjects)
                .into_par_iter()
                .map(|i| {
                    let subject = synth_subject(&spec, i).at(Stage::Synth)?;
                    let mut all = Vec::new();
                    for rec in &subject.recordings {
                        all.extend(process_recording(cfg, out, rec)?);
                    }
                    Ok(all)
                })
                .collect::<Result<Vec<_>>>()?;
            (forms, Some(truth), per_subject.into_iter().flatten().collect())
        }
        InputSource::Recordings(r) => {
            let text = files::read_text(&r.forms).at(Stage::Load)?;
            let forms = read_forms_csv(&text).at(Stage::Load)?;
            let found = files::recording_files(&r.dir).at(Stage::Load)?;
            let per_file = found
                .par_iter()
                .map(|(path, meta)| process_recording(cfg, out, &load_recording(path, meta).at(Stage::Load)?))
                .collect::<Result<Vec<_>>>()?;
            (forms, None, per_file.into_iter().flatten().collect())
        }
    };
    diagrams.sort_by_key(|(p, _)| files::provenance_key(p));

    let labels = stages::resolve_labels(cfg, &forms, truth.as_deref())?;
    let tests = stages::significance(&forms)?;
    let ds = stages::build_dataset(cfg, &diagrams, &labels)?;
    drop(diagrams);
    stages::write_feature_tables(out, &labels, &tests, &ds)?;

    let report = stages::evaluate(cfg, &ds)?;
    stages::write_eval(out, &report)?;

    let tsne: Vec<TsneSegment> = stages::tsne_segments(cfg, &ds)?;
    for t in &tsne {
        stages::write_tsne(out, t)?;
        if cfg.outputs.plots {
            stages::write_tsne_plot(out, t.segment, &t.rows)?;
        }
    }

    let n_subjects = labels.len();
    let n_trials = ds.len();
    let manifest = Manifest {
        schema: "eegtda-manifest/1",
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        config_sha256: &config_hash,
        subjects: n_subjects,
        trials: n_trials,
        files: files::tree_digest(out, &[files::MANIFEST_FILE]).at(Stage::Manifest)?,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    files::write_file(&out.join(files::MANIFEST_FILE), json.as_bytes()).at(Stage::Manifest)?;
    Ok(RunSummary { n_subjects, n_trials, report, config_hash })
}

/// Validates the config, then runs every stage in memory and writes the
/// output tree. An invalid config writes nothing. A failure after that
/// leaves the partial tree plus `failed/error.json`; a later successful run
/// clears both.
pub fn cmd_run(cfg: &PipelineConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let out = cfg.output_dir()?.clone();
    std::fs::create_dir_all(&out).at(Stage::Config)?;
    for rel in files::MANAGED {
        files::remove_if_exists(&out.join(rel)).at(Stage::Config)?;
    }
    run_body(cfg, &out).inspect_err(|e: &PipelineError| {
        let marker = FailureMarker {
            schema: "eegtda-failure/1",
            stage: e.stage.to_string(),
            exit_code: e.exit_code(),
            message: &e.message,
        };
        let json = serde_json::to_string_pretty(&marker).expect("marker serializes");
        // Best effort: the original error is what the caller needs.
        let _ = files::write_file(&out.join(files::FAILED_DIR).join("error.json"), json.as_bytes());
    })
}
