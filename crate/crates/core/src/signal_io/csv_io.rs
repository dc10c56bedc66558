//! Recording CSV: one header row of channel names, then one row per time
//! sample. Lines starting with `#` are comments; the writer emits a single
//! schema line carrying the recording metadata.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Recording, Result, Segment, SignalError};

pub const RECORDING_SCHEMA: &str = "eegtda-recording/1";

/// Metadata a CSV file cannot carry by itself.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordingMeta {
    pub subject_id: String,
    pub segment: Segment,
    pub sample_rate_hz: f64,
}

impl RecordingMeta {
    /// Recovers metadata from the schema comment written by [`write_recording`].
    pub fn sniff(path: &Path) -> Result<Option<RecordingMeta>> {
        let file = File::open(path).map_err(|source| SignalError::Io { path: path.into(), source })?;
        let mut line = String::new();
        BufReader::new(file).read_line(&mut line).map_err(|source| SignalError::Io { path: path.into(), source })?;
        let Some(rest) = line.trim().strip_prefix('#') else {
            return Ok(None);
        };
        let mut subject = None;
        let mut segment = None;
        let mut fs = None;
        for token in rest.split_whitespace() {
            if let Some((k, v)) = token.split_once('=') {
                match k {
                    "subject" => subject = Some(v.to_string()),
                    "segment" => segment = Some(v.parse::<Segment>()?),
                    "fs" => fs = v.parse::<f64>().ok(),
                    _ => {}
                }
            }
        }
        Ok(match (subject, segment, fs) {
            (Some(subject_id), Some(segment), Some(sample_rate_hz)) => {
                Some(RecordingMeta { subject_id, segment, sample_rate_hz })
            }
            _ => None,
        })
    }
}

/// Loads a samples-as-rows CSV file and transposes it to channels × samples.
pub fn load_recording(path: impl AsRef<Path>, meta: &RecordingMeta) -> Result<Recording> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| SignalError::Io { path: path.into(), source })?;
    read_recording(BufReader::new(file), meta)
}

pub fn read_recording<R: Read>(reader: R, meta: &RecordingMeta) -> Result<Recording> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(SignalError::Empty);
    }
    let c = header.len();
    let mut data: Vec<Vec<f64>> = vec![Vec::new(); c];
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() != c {
            return Err(SignalError::Ragged { row, expected: c, found: record.len() });
        }
        for (column, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| SignalError::NonNumeric {
                row,
                column: column + 1,
                value: cell.to_string(),
            })?;
            data[column].push(v);
        }
    }
    if data[0].is_empty() {
        return Err(SignalError::Empty);
    }
    Recording::new(meta.subject_id.clone(), meta.segment, header, meta.sample_rate_hz, data)
}

pub fn write_recording(path: impl AsRef<Path>, rec: &Recording) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| SignalError::Io { path: path.into(), source })?;
    let mut w = BufWriter::new(file);
    write_recording_to(&mut w, rec)
        .and_then(|_| w.flush())
        .map_err(|source| SignalError::Io { path: path.into(), source })
}

/// Writes the CSV form of `rec`; floats use the shortest representation that
/// parses back to the same value.
pub fn write_recording_to<W: Write>(w: &mut W, rec: &Recording) -> std::io::Result<()> {
    writeln!(w, "# {RECORDING_SCHEMA} subject={} segment={} fs={}", rec.subject_id, rec.segment, rec.sample_rate_hz)?;
    writeln!(w, "{}", rec.channel_names.join(","))?;
    let mut line = String::new();
    for t in 0..rec.n_samples() {
        line.clear();
        for (ch, row) in rec.data.iter().enumerate() {
            if ch > 0 {
                line.push(',');
            }
            line.push_str(&row[t].to_string());
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
