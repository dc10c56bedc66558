//! Output tree layout and the small CSV formats owned by the pipeline.
//!
//! ```text
//! out/
//!   manifest.json config.json          run only
//!   forms.csv  truth.csv               synth (cohort input)
//!   recordings/raw/<subj>_<seg>.csv    synth
//!   recordings/clean/<subj>_<seg>.csv  preprocess
//!   pointclouds/<subj>_<seg>_<tt>.csv  embed
//!   diagrams/<subj>_<seg>_<tt>.csv     persist
//!   labels.csv significance.csv features.csv      features
//!   eval.json eval.csv                 evaluate
//!   tsne/<seg>.csv                     tsne
//!   plots/{diagrams,barcodes}/<stem>.svg, plots/tsne_<seg>.svg   plot
//!   failed/error.json                  only after a failed run
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::learning::{FormsComparison, Provenance};
use crate::signal_io::{Label, RecordingMeta, Segment};

pub const RAW_DIR: &str = "recordings/raw";
pub const CLEAN_DIR: &str = "recordings/clean";
pub const POINTCLOUD_DIR: &str = "pointclouds";
pub const DIAGRAM_DIR: &str = "diagrams";
pub const TSNE_DIR: &str = "tsne";
pub const PLOT_DIR: &str = "plots";
pub const FAILED_DIR: &str = "failed";
pub const FORMS_FILE: &str = "forms.csv";
pub const TRUTH_FILE: &str = "truth.csv";
pub const LABELS_FILE: &str = "labels.csv";
pub const SIGNIFICANCE_FILE: &str = "significance.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const EVAL_JSON: &str = "eval.json";
pub const EVAL_CSV: &str = "eval.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.json";

/// Everything `run` may have written, removed before a fresh run.
pub const MANAGED: [&str; 15] = [
    "recordings",
    POINTCLOUD_DIR,
    DIAGRAM_DIR,
    TSNE_DIR,
    PLOT_DIR,
    FAILED_DIR,
    FORMS_FILE,
    TRUTH_FILE,
    LABELS_FILE,
    SIGNIFICANCE_FILE,
    FEATURES_FILE,
    EVAL_JSON,
    EVAL_CSV,
    MANIFEST_FILE,
    CONFIG_FILE,
];

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn recording_name(subject: &str, segment: Segment) -> String {
    format!("{subject}_{segment}.csv")
}

/// `S01_pre-task_03`
pub fn trial_stem(subject: &str, segment: Segment, trial: usize) -> String {
    format!("{subject}_{segment}_{trial:02}")
}

/// Inverse of [`trial_stem`]; subject ids may themselves contain `_`.
pub fn parse_trial_stem(stem: &str) -> Option<Provenance> {
    let mut parts = stem.rsplitn(3, '_');
    let trial_index = parts.next()?.parse().ok()?;
    let segment = parts.next()?.parse().ok()?;
    let subject_id = parts.next().filter(|s| !s.is_empty())?.to_string();
    Some(Provenance { subject_id, segment, trial_index })
}

pub fn provenance_key(p: &Provenance) -> (String, Segment, usize) {
    (p.subject_id.clone(), p.segment, p.trial_index)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes)
}

pub fn write_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> io::Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    write_file(path, &buf)
}

pub fn read_text(path: &Path) -> io::Result<String> {
    fs::read_to_string(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn remove_if_exists(path: &Path) -> io::Result<()> {
    if path.is_dir() {
        fs::remove_dir_all(path)
    } else if path.exists() {
        fs::remove_file(path)
    } else {
        Ok(())
    }
}

/// `*.csv` files in `dir` (not recursive), sorted by name.
pub fn csv_files(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", dir.display())))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "csv") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Recording CSVs in `dir` with their schema metadata, sorted by subject
/// then segment.
pub fn recording_files(dir: &Path) -> io::Result<Vec<(PathBuf, RecordingMeta)>> {
    let mut out = Vec::new();
    for path in csv_files(dir)? {
        let meta = RecordingMeta::sniff(&path)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?
            .ok_or_else(|| {
                io::Error::new(io::ErrorKind::InvalidData, format!("{} lacks a recording schema line", path.display()))
            })?;
        out.push((path, meta));
    }
    out.sort_by(|a, b| (&a.1.subject_id, a.1.segment).cmp(&(&b.1.subject_id, b.1.segment)));
    Ok(out)
}

/// Number of columns in the first non-comment line.
pub fn csv_header_width(path: &Path) -> io::Result<usize> {
    let reader = BufReader::new(fs::File::open(path)?);
    for line in reader.lines() {
        let line = line?;
        if !line.trim_start().starts_with('#') && !line.trim().is_empty() {
            return Ok(line.split(',').count());
        }
    }
    Err(io::Error::new(io::ErrorKind::InvalidData, format!("{} has no header", path.display())))
}

/// Stems of the `*.csv` files in `dir` parsed as trial provenance, in
/// provenance order.
pub fn trial_files(dir: &Path) -> io::Result<Vec<(Provenance, PathBuf)>> {
    let mut out = Vec::new();
    for path in csv_files(dir)? {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let prov = parse_trial_stem(stem).ok_or_else(|| {
            io::Error::new(
                io::ErrorKind::InvalidData,
                format!("{} is not named <subject>_<segment>_<trial>", path.display()),
            )
        })?;
        out.push((prov, path));
    }
    out.sort_by_key(|(p, _)| provenance_key(p));
    Ok(out)
}

pub fn write_labels<W: Write>(w: &mut W, labels: &[(String, Label)]) -> io::Result<()> {
    writeln!(w, "# eegtda-labels/1")?;
    writeln!(w, "subject,label")?;
    for (s, l) in labels {
        writeln!(w, "{s},{l}")?;
    }
    Ok(())
}

pub fn read_labels(text: &str) -> Result<Vec<(String, Label)>, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if !lines.next().is_some_and(|l| l.starts_with("# eegtda-labels/1")) {
        return Err("labels file lacks its `# eegtda-labels/1` line".into());
    }
    if lines.next().map(str::trim) != Some("subject,label") {
        return Err("labels header must be `subject,label`".into());
    }
    lines
        .map(|l| {
            let (s, lab) = l.split_once(',').ok_or_else(|| format!("malformed label row `{l}`"))?;
            Ok((s.trim().to_string(), lab.trim().parse::<Label>().map_err(|e| e.to_string())?))
        })
        .collect()
}

pub fn write_significance<W: Write>(w: &mut W, tests: &[FormsComparison]) -> io::Result<()> {
    writeln!(w, "# eegtda-significance/1 test=paired-t two-tailed")?;
    writeln!(w, "first,second,t,df,p,mean_difference")?;
    for c in tests {
        writeln!(w, "{},{},{},{},{},{}", c.first, c.second, c.test.t, c.test.df, c.test.p, c.test.mean_difference)?;
    }
    Ok(())
}

/// One t-SNE row: provenance, label and the 2-D position.
pub type TsneRow = (Provenance, Label, [f64; 2]);

pub fn write_tsne<W: Write>(w: &mut W, segment: Segment, perplexity: f64, kl: f64, rows: &[TsneRow]) -> io::Result<()> {
    writeln!(w, "# eegtda-tsne/1 segment={segment} input=features perplexity={perplexity} kl={kl}")?;
    writeln!(w, "subject,segment,trial,label,x,y")?;
    for (p, l, [x, y]) in rows {
        writeln!(w, "{},{},{},{l},{x},{y}", p.subject_id, p.segment, p.trial_index)?;
    }
    Ok(())
}

pub fn read_tsne(text: &str) -> Result<(Segment, Vec<TsneRow>), String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let schema = lines.next().unwrap_or_default();
    let segment = schema
        .strip_prefix("# eegtda-tsne/1")
        .and_then(|rest| rest.split_whitespace().find_map(|t| t.strip_prefix("segment=")))
        .ok_or("t-SNE file lacks its `# eegtda-tsne/1 segment=...` line")?
        .parse::<Segment>()
        .map_err(|e| e.to_string())?;
    if lines.next().map(str::trim) != Some("subject,segment,trial,label,x,y") {
        return Err("t-SNE header must be `subject,segment,trial,label,x,y`".into());
    }
    let rows = lines
        .map(|l| {
            let c: Vec<&str> = l.split(',').map(str::trim).collect();
            if c.len() != 6 {
                return Err(format!("malformed t-SNE row `{l}`"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number `{s}`"));
            Ok((
                Provenance {
                    subject_id: c[0].to_string(),
                    segment: c[1].parse().map_err(|e: crate::signal_io::SignalError| e.to_string())?,
                    trial_index: c[2].parse().map_err(|_| format!("bad trial `{}`", c[2]))?,
                },
                c[3].parse::<Label>().map_err(|e| e.to_string())?,
                [num(c[4])?, num(c[5])?],
            ))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok((segment, rows))
}

/// Relative path → SHA-256 of every file under `root`, skipping `skip`.
pub fn tree_digest(root: &Path, skip: &[&str]) -> io::Result<BTreeMap<String, String>> {
    fn walk(root: &Path, dir: &Path, skip: &[&str], out: &mut BTreeMap<String, String>) -> io::Result<()> {
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            let rel = path.strip_prefix(root).expect("under root").to_string_lossy().replace('\\', "/");
            if skip.contains(&rel.as_str()) {
                continue;
            }
            if path.is_dir() {
                walk(root, &path, skip, out)?;
            } else {
                out.insert(rel, hex(&Sha256::digest(fs::read(&path)?)));
            }
        }
        Ok(())
    }
    let mut out = BTreeMap::new();
    walk(root, root, skip, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems_round_trip() {
        let stem = trial_stem("sub_7", Segment::PostTask, 4);
        assert_eq!(stem, "sub_7_post-task_04");
        let p = parse_trial_stem(&stem).unwrap();
        assert_eq!((p.subject_id.as_str(), p.segment, p.trial_index), ("sub_7", Segment::PostTask, 4));
        assert!(parse_trial_stem("S01_during_00").is_none());
        assert!(parse_trial_stem("_task_00").is_none());
    }

    #[test]
    fn labels_round_trip() {
        let labels = vec![("S01".to_string(), Label::Stress), ("S02".to_string(), Label::Normal)];
        let mut buf = Vec::new();
        write_labels(&mut buf, &labels).unwrap();
        assert_eq!(read_labels(std::str::from_utf8(&buf).unwrap()).unwrap(), labels);
    }

    #[test]
    fn tsne_round_trip() {
        let rows = vec![(
            Provenance { subject_id: "S03".into(), segment: Segment::Task, trial_index: 2 },
            Label::Normal,
            [0.1 + 0.2, -3.5e-7],
        )];
        let mut buf = Vec::new();
        write_tsne(&mut buf, Segment::Task, 30.0, 0.5, &rows).unwrap();
        assert_eq!(read_tsne(std::str::from_utf8(&buf).unwrap()).unwrap(), (Segment::Task, rows));
    }

    #[test]
    fn hex_digits() {
        assert_eq!(hex(&[0, 15, 255]), "000fff");
    }
}
