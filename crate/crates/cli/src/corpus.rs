//! Corpus ingestion: one JSON record per line, each naming its source
//! frames exactly one way — inline values, a file reference, or a
//! seeded synthetic generator spec — plus an optional reference text.

use crate::error::{data_error, CliResult};
use segstream::{synthetic_frames, Mat};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    /// Stream length in frames.
    pub length: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusRecord {
    pub id: String,
    /// Inline frame matrix, row per frame.
    #[serde(default)]
    pub frames: Option<Vec<Vec<f32>>>,
    /// Path to a JSON file holding the frame matrix, relative to the
    /// corpus file.
    #[serde(default)]
    pub file: Option<PathBuf>,
    /// Seeded uniform noise source.
    #[serde(default)]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(default)]
    pub reference: Option<String>,
}

impl CorpusRecord {
    fn source_forms(&self) -> usize {
        usize::from(self.frames.is_some())
            + usize::from(self.file.is_some())
            + usize::from(self.synthetic.is_some())
    }

    /// Produce the frame matrix, `input_dim` columns.
    pub fn materialize(&self, corpus_dir: &Path, input_dim: usize) -> CliResult<Mat> {
        let rows = if let Some(rows) = &self.frames {
            rows.clone()
        } else if let Some(file) = &self.file {
            let path = corpus_dir.join(file);
            let text = std::fs::read_to_string(&path).map_err(|e| {
                data_error(format!(
                    "record {}: cannot read frames file {}: {e}",
                    self.id,
                    path.display()
                ))
            })?;
            serde_json::from_str::<Vec<Vec<f32>>>(&text).map_err(|e| {
                data_error(format!(
                    "record {}: frames file {} is not a JSON matrix: {e}",
                    self.id,
                    path.display()
                ))
            })?
        } else if let Some(spec) = &self.synthetic {
            return Ok(synthetic_frames(spec.length, input_dim, spec.seed));
        } else {
            unreachable!("validated on load");
        };
        if rows.is_empty() {
            return Err(data_error(format!("record {}: no frames", self.id)));
        }
        if rows.iter().any(|r| r.len() != input_dim) {
            return Err(data_error(format!(
                "record {}: every frame must have {input_dim} values",
                self.id
            )));
        }
        Ok(Mat::from_rows(&rows))
    }
}

/// Load and validate a JSONL corpus: parseable lines, exactly one
/// source form per record, unique ids.
pub fn load_corpus(path: &Path) -> CliResult<Vec<CorpusRecord>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| data_error(format!("cannot read corpus {}: {e}", path.display())))?;
    let mut records = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let record: CorpusRecord = serde_json::from_str(line).map_err(|e| {
            data_error(format!("{}:{}: bad record: {e}", path.display(), number + 1))
        })?;
        if record.source_forms() != 1 {
            return Err(data_error(format!(
                "{}:{}: record {} must name its source exactly one way \
                 (frames, file, or synthetic)",
                path.display(),
                number + 1,
                record.id
            )));
        }
        if !seen.insert(record.id.clone()) {
            return Err(data_error(format!(
                "{}:{}: duplicate record id {}",
                path.display(),
                number + 1,
                record.id
            )));
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(data_error(format!(
            "corpus {} holds no records",
            path.display()
        )));
    }
    Ok(records)
}
