use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dataset {
    Hitom,
    Tom4Ood,
    Tomi,
    ExploretomStruct,
    ExploretomInfilled,
    Custom,
}

impl Dataset {
    pub fn as_str(self) -> &'static str {
        match self {
            Dataset::Hitom => "hitom",
            Dataset::Tom4Ood => "tom4_ood",
            Dataset::Tomi => "tomi",
            Dataset::ExploretomStruct => "exploretom_struct",
            Dataset::ExploretomInfilled => "exploretom_infilled",
            Dataset::Custom => "custom",
        }
    }

    fn requires_order(self) -> bool {
        matches!(self, Dataset::Hitom | Dataset::Tom4Ood)
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// One JSONL dataset row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub dataset: Dataset,
    pub story: String,
    pub question: String,
    pub answer: String,
    pub order: Option<u8>,
    pub split: Split,
}

/// Anything carrying a ground-truth answer string.
pub trait Answered {
    fn answer(&self) -> &str;
}

impl Answered for SampleRecord {
    fn answer(&self) -> &str {
        &self.answer
    }
}

fn is_binary(answer: &str) -> bool {
    let a = answer.trim().to_lowercase();
    a == "yes" || a == "no"
}

/// Drops samples whose answer is "yes" or "no" (case-insensitive).
pub fn filter_binary_answers<T: Answered>(samples: Vec<T>) -> Vec<T> {
    samples.into_iter().filter(|s| !is_binary(s.answer())).collect()
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("schema error at line {line}, field `{field}`: {reason}")]
    Schema {
        line: usize,
        field: String,
        reason: String,
    },
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    /// One JSON object per line.
    #[default]
    Jsonl,
    /// A single JSON array of objects.
    Json,
}

const FIELDS: [&str; 7] = ["id", "dataset", "story", "question", "answer", "order", "split"];

fn schema(line: usize, field: &str, reason: impl Into<String>) -> DatasetError {
    DatasetError::Schema {
        line,
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// Validates one decoded row. `line` is 1-based and used only for errors.
pub fn validate_record(value: &Value, line: usize) -> Result<SampleRecord, DatasetError> {
    let obj: &Map<String, Value> = value
        .as_object()
        .ok_or_else(|| schema(line, "<row>", "expected a JSON object"))?;
    if let Some(unknown) = obj.keys().find(|k| !FIELDS.contains(&k.as_str())) {
        return Err(schema(line, unknown, "unknown field"));
    }
    let string = |field: &str| -> Result<String, DatasetError> {
        match obj.get(field) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(schema(line, field, "expected a string")),
            None => Err(schema(line, field, "missing")),
        }
    };
    let enumerated = |field: &str| -> Result<Value, DatasetError> {
        obj.get(field)
            .cloned()
            .ok_or_else(|| schema(line, field, "missing"))
    };

    let id = string("id")?;
    let dataset: Dataset = serde_json::from_value(enumerated("dataset")?)
        .map_err(|e| schema(line, "dataset", e.to_string()))?;
    let story = string("story")?;
    let question = string("question")?;
    let answer = string("answer")?;
    if answer.trim().is_empty() {
        return Err(schema(line, "answer", "must be non-empty"));
    }
    let order = match obj.get("order") {
        None | Some(Value::Null) => None,
        Some(Value::Number(n)) => match n.as_u64() {
            Some(k) if k <= 4 => Some(k as u8),
            _ => return Err(schema(line, "order", "expected an integer in 0..=4")),
        },
        Some(_) => return Err(schema(line, "order", "expected an integer or null")),
    };
    if order.is_none() && dataset.requires_order() {
        return Err(schema(line, "order", format!("required for {dataset}")));
    }
    let split: Split = serde_json::from_value(enumerated("split")?)
        .map_err(|e| schema(line, "split", e.to_string()))?;
    Ok(SampleRecord {
        id,
        dataset,
        story,
        question,
        answer,
        order,
        split,
    })
}

/// Parses JSONL text; blank lines are skipped.
pub fn parse_jsonl(text: &str) -> Result<Vec<SampleRecord>, DatasetError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(raw).map_err(|e| schema(i + 1, "<row>", e.to_string()))?;
        out.push(validate_record(&value, i + 1)?);
    }
    Ok(out)
}

fn parse_json_array(text: &str) -> Result<Vec<SampleRecord>, DatasetError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let value: Value = serde_json::from_str(text).map_err(|e| schema(1, "<root>", e.to_string()))?;
    let rows = value
        .as_array()
        .ok_or_else(|| schema(1, "<root>", "expected a JSON array"))?;
    rows.iter()
        .enumerate()
        .map(|(i, v)| validate_record(v, i + 1))
        .collect()
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Vec<SampleRecord>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    match format {
        DatasetFormat::Jsonl => parse_jsonl(&text),
        DatasetFormat::Json => parse_json_array(&text),
    }
}

/// Serializes records as JSONL, one compact object per line.
pub fn to_jsonl<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r).expect("serializable row"));
        out.push('\n');
    }
    out
}
