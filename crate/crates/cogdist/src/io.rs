//! Corpus files: annotated JSONL/CSV input, adjudicated JSONL, fold files.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cogdist_core::corpus::{AnnotatedPassage, Annotation, LabeledPassage};
use cogdist_core::{DistortionLabel, TaskLabel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, LoadError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guesses the format from the file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" | "json" => Some(CorpusFormat::Jsonl),
            "csv" => Some(CorpusFormat::Csv),
            _ => None,
        }
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads an annotated corpus. `format` falls back to the file extension.
pub fn load_corpus(path: &Path, format: Option<CorpusFormat>) -> Result<Vec<AnnotatedPassage>, LoadError> {
    let format = format
        .or_else(|| CorpusFormat::from_path(path))
        .ok_or_else(|| LoadError::UnknownFormat(path.to_path_buf()))?;
    let data = read_to_string(path)?;
    match format {
        CorpusFormat::Jsonl => parse_jsonl(&data),
        CorpusFormat::Csv => parse_csv(&data),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnnotation {
    annotator: String,
    labels: Vec<String>,
}

#[derive(Deserialize)]
struct RawPassage {
    id: String,
    text: String,
    annotations: Vec<RawAnnotation>,
}

fn parse_labels<'a>(labels: impl IntoIterator<Item = &'a str>, line: u64) -> Result<Vec<DistortionLabel>, LoadError> {
    labels
        .into_iter()
        .map(|s| {
            s.parse::<DistortionLabel>().map_err(|_| LoadError::UnknownLabel {
                line,
                label: s.to_string(),
            })
        })
        .collect()
}

fn check(passage: &AnnotatedPassage, line: u64, seen: &mut HashMap<String, u64>) -> Result<(), LoadError> {
    passage
        .validate()
        .map_err(|source| LoadError::Invalid { line, source })?;
    if passage.annotations.is_empty() {
        return Err(LoadError::Invalid {
            line,
            source: cogdist_core::Error::NoAnnotations(passage.id.clone()),
        });
    }
    if seen.insert(passage.id.clone(), line).is_some() {
        return Err(LoadError::Invalid {
            line,
            source: cogdist_core::Error::DuplicateId(passage.id.clone()),
        });
    }
    Ok(())
}

/// One JSON object per non-blank line.
pub fn parse_jsonl(data: &str) -> Result<Vec<AnnotatedPassage>, LoadError> {
    let mut out = Vec::new();
    let mut seen = HashMap::new();
    for (i, raw_line) in data.lines().enumerate() {
        let line = i as u64 + 1;
        if raw_line.trim().is_empty() {
            continue;
        }
        let raw: RawPassage = serde_json::from_str(raw_line).map_err(|e| LoadError::Malformed {
            line,
            message: e.to_string(),
        })?;
        let mut annotations = Vec::with_capacity(raw.annotations.len());
        for a in raw.annotations {
            let labels = parse_labels(a.labels.iter().map(String::as_str), line)?;
            annotations.push(Annotation::new(a.annotator, labels));
        }
        let passage = AnnotatedPassage {
            id: raw.id,
            text: raw.text,
            annotations,
        };
        check(&passage, line, &mut seen)?;
        out.push(passage);
    }
    Ok(out)
}

#[derive(Deserialize)]
struct CsvRow {
    id: String,
    text: String,
    annotator: String,
    labels: String,
}

/// Columns `id,text,annotator,labels`; labels are `;`-separated and rows
/// sharing an id merge into one passage in first-appearance order.
pub fn parse_csv(data: &str) -> Result<Vec<AnnotatedPassage>, LoadError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(data.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| LoadError::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut passages: Vec<AnnotatedPassage> = Vec::new();
    let mut first_line: Vec<u64> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for result in reader.records() {
        let malformed = |e: csv::Error, fallback: u64| LoadError::Malformed {
            line: e.position().map_or(fallback, |p| p.line()),
            message: e.to_string(),
        };
        let record = result.map_err(|e| malformed(e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        let row: CsvRow = record.deserialize(Some(&headers)).map_err(|e| malformed(e, line))?;
        let labels = parse_labels(row.labels.split(';').map(str::trim).filter(|s| !s.is_empty()), line)?;
        let annotation = Annotation::new(row.annotator, labels);
        match index.get(&row.id) {
            Some(&i) => {
                if passages[i].text != row.text {
                    return Err(LoadError::Malformed {
                        line,
                        message: format!("text of passage {:?} differs from its first row", row.id),
                    });
                }
                passages[i].annotations.push(annotation);
            }
            None => {
                index.insert(row.id.clone(), passages.len());
                first_line.push(line);
                passages.push(AnnotatedPassage {
                    id: row.id,
                    text: row.text,
                    annotations: vec![annotation],
                });
            }
        }
    }
    let mut seen = HashMap::new();
    for (p, &line) in passages.iter().zip(&first_line) {
        check(p, line, &mut seen)?;
    }
    Ok(passages)
}

#[derive(Deserialize)]
struct RawLabeled {
    id: String,
    text: String,
    label: String,
}

/// Reads adjudicated JSONL records `{"id", "text", "label"}`.
pub fn load_labeled(path: &Path) -> Result<Vec<LabeledPassage>, LoadError> {
    let data = read_to_string(path)?;
    let mut out = Vec::new();
    let mut seen = HashMap::new();
    for (i, raw_line) in data.lines().enumerate() {
        let line = i as u64 + 1;
        if raw_line.trim().is_empty() {
            continue;
        }
        let raw: RawLabeled = serde_json::from_str(raw_line).map_err(|e| LoadError::Malformed {
            line,
            message: e.to_string(),
        })?;
        let label = TaskLabel::parse_any(&raw.label).map_err(|_| LoadError::UnknownLabel { line, label: raw.label })?;
        let p = LabeledPassage::new(raw.id, raw.text, label);
        if p.id.is_empty() {
            return Err(LoadError::Invalid {
                line,
                source: cogdist_core::Error::EmptyId,
            });
        }
        if seen.insert(p.id.clone(), line).is_some() {
            return Err(LoadError::Invalid {
                line,
                source: cogdist_core::Error::DuplicateId(p.id),
            });
        }
        out.push(p);
    }
    Ok(out)
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `items` one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(write_err(path))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| write_err(path)(e.into()))?;
        w.write_all(b"\n").map_err(write_err(path))?;
    }
    w.flush().map_err(write_err(path))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| write_err(path)(e.into()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(write_err(path))
}

/// Creates `dir` (and parents) and returns the path of `name` inside it.
pub fn output_path(dir: &Path, name: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(write_err(dir))?;
    Ok(dir.join(name))
}
