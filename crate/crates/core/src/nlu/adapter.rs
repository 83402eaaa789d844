use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ClassificationTemplate;
use crate::pipeline::sha256_hex;
use crate::verbalizer::lcfirst;

pub const GLUE_AX_ADAPTER: &str = include_str!("../../data/adapters/glue_ax.json");
pub const SNLI_ADAPTER: &str = include_str!("../../data/adapters/snli.json");
pub const ARC_ADAPTER: &str = include_str!("../../data/adapters/arc.json");
pub const LOGIQA_ADAPTER: &str = include_str!("../../data/adapters/logiqa.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BenchmarkKind {
    #[serde(rename = "GLUE_AX")]
    GlueAx,
    #[serde(rename = "SNLI")]
    Snli,
    #[serde(rename = "ARC")]
    Arc,
    #[serde(rename = "LOGIQA")]
    Logiqa,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 4] = [
        BenchmarkKind::GlueAx,
        BenchmarkKind::Snli,
        BenchmarkKind::Arc,
        BenchmarkKind::Logiqa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BenchmarkKind::GlueAx => "GLUE_AX",
            BenchmarkKind::Snli => "SNLI",
            BenchmarkKind::Arc => "ARC",
            BenchmarkKind::Logiqa => "LOGIQA",
        }
    }

    /// Number of prompts and completions per item.
    pub fn shape(self) -> (usize, usize) {
        match self {
            BenchmarkKind::GlueAx | BenchmarkKind::Snli => (3, 1),
            BenchmarkKind::Arc => (1, 2),
            BenchmarkKind::Logiqa => (1, 4),
        }
    }
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BenchmarkKind {
    type Err = AdapterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_uppercase().replace('-', "_");
        BenchmarkKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| AdapterError::Config(format!("unknown benchmark kind {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    Jsonl,
    Tsv,
}

#[derive(Debug, thiserror::Error)]
pub enum AdapterError {
    #[error("adapter config: {0}")]
    Config(String),
    #[error("adapter config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: missing field {field:?}")]
    Missing { line: usize, field: String },
    #[error("line {line}: label {label:?} is not a category of this benchmark")]
    UnknownLabel { line: usize, label: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One dataset row with its 1-based source line; JSON arrays are flattened
/// to `key.0`, `key.1`, ...
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawRecord {
    pub line: usize,
    pub values: BTreeMap<String, String>,
}

/// Field mapping and prompt/completion templates for one benchmark.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Adapter {
    pub kind: BenchmarkKind,
    pub format: DataFormat,
    #[serde(default)]
    pub id_field: Option<String>,
    /// Template variable -> source column or key.
    pub fields: BTreeMap<String, String>,
    pub label_field: String,
    /// Raw gold value -> class (1-based).
    pub labels: BTreeMap<String, usize>,
    /// Raw gold values marking unlabeled rows, which are left out.
    #[serde(default)]
    pub skip_labels: Vec<String>,
    pub category_names: Vec<String>,
    pub prompts: Vec<String>,
    pub completions: Vec<String>,
    #[serde(skip)]
    pub hash: String,
}

/// A benchmark entry ready for classification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkItem {
    pub kind: BenchmarkKind,
    pub id: String,
    pub fields: BTreeMap<String, String>,
    pub gold: usize,
}

fn placeholders(template: &str) -> Result<Vec<(String, Vec<String>)>, String> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let close = rest[open..]
            .find('}')
            .ok_or_else(|| format!("unclosed placeholder in {template:?}"))?;
        let mut parts = rest[open + 1..open + close].split('|').map(str::trim);
        let name = parts.next().unwrap_or("").to_string();
        out.push((name, parts.map(String::from).collect()));
        rest = &rest[open + close + 1..];
    }
    Ok(out)
}

fn apply_filter(value: String, filter: &str) -> Result<String, String> {
    Ok(match filter {
        "lcfirst" => lcfirst(&value),
        "period" => {
            let v = value.trim_end().to_string();
            if v.ends_with(['.', '!', '?']) {
                v
            } else {
                format!("{v}.")
            }
        }
        "strip_period" => value.trim_end().trim_end_matches('.').to_string(),
        "trim" => value.trim().to_string(),
        other => return Err(format!("unknown filter {other:?}")),
    })
}

/// Fills `{name|filter|...}` placeholders from `values`.
pub fn render(template: &str, values: &BTreeMap<String, String>) -> Result<String, String> {
    let mut out = String::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = rest[open..]
            .find('}')
            .ok_or_else(|| format!("unclosed placeholder in {template:?}"))?;
        let mut parts = rest[open + 1..open + close].split('|').map(str::trim);
        let name = parts.next().unwrap_or("");
        let mut v = values.get(name).cloned().ok_or_else(|| name.to_string())?;
        for f in parts {
            v = apply_filter(v, f)?;
        }
        out.push_str(&v);
        rest = &rest[open + close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

impl Adapter {
    pub fn from_json(text: &str) -> Result<Self, AdapterError> {
        let mut a: Adapter = serde_json::from_str(text)?;
        a.hash = sha256_hex(text.as_bytes());
        a.validate()?;
        Ok(a)
    }

    pub fn from_file(path: &Path) -> Result<Self, AdapterError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn shipped(kind: BenchmarkKind) -> Self {
        let text = match kind {
            BenchmarkKind::GlueAx => GLUE_AX_ADAPTER,
            BenchmarkKind::Snli => SNLI_ADAPTER,
            BenchmarkKind::Arc => ARC_ADAPTER,
            BenchmarkKind::Logiqa => LOGIQA_ADAPTER,
        };
        Self::from_json(text).expect("shipped adapters are valid")
    }

    pub fn classes(&self) -> usize {
        self.prompts.len() * self.completions.len()
    }

    fn validate(&self) -> Result<(), AdapterError> {
        let bad = |m: String| Err(AdapterError::Config(m));
        if (self.prompts.len(), self.completions.len()) != self.kind.shape() {
            return bad(format!(
                "{} needs {:?} prompts x completions, adapter has {} x {}",
                self.kind,
                self.kind.shape(),
                self.prompts.len(),
                self.completions.len()
            ));
        }
        let n = self.classes();
        if self.category_names.len() != n {
            return bad(format!("{} category names for {n} classes", self.category_names.len()));
        }
        if let Some((raw, c)) = self.labels.iter().find(|(_, c)| **c == 0 || **c > n) {
            return bad(format!("label {raw:?} maps to class {c} outside 1..={n}"));
        }
        for t in self.prompts.iter().chain(&self.completions) {
            for (name, filters) in placeholders(t).map_err(AdapterError::Config)? {
                if !self.fields.contains_key(&name) {
                    return bad(format!("template {t:?} uses undeclared field {name:?}"));
                }
                for f in filters {
                    apply_filter(String::new(), &f).map_err(AdapterError::Config)?;
                }
            }
        }
        Ok(())
    }

    /// Turns a raw row into a benchmark item and its template; `None` for
    /// rows carrying a skip label.
    pub fn adapt(
        &self,
        raw: &RawRecord,
        index: usize,
    ) -> Result<Option<(BenchmarkItem, ClassificationTemplate)>, AdapterError> {
        let line = raw.line;
        let get = |key: &str| {
            raw.values.get(key).cloned().ok_or_else(|| AdapterError::Missing {
                line,
                field: key.to_string(),
            })
        };
        let label = get(&self.label_field)?.trim().to_string();
        if self.skip_labels.contains(&label) {
            return Ok(None);
        }
        let gold = *self.labels.get(&label).ok_or_else(|| AdapterError::UnknownLabel {
            line,
            label: label.clone(),
        })?;
        let mut fields = BTreeMap::new();
        for (name, key) in &self.fields {
            fields.insert(name.clone(), get(key)?);
        }
        let fill = |t: &String| {
            render(t, &fields).map_err(|m| AdapterError::Malformed {
                line,
                msg: format!("template {t:?}: {m}"),
            })
        };
        let prompts = self.prompts.iter().map(fill).collect::<Result<Vec<_>, _>>()?;
        let completions = self.completions.iter().map(fill).collect::<Result<Vec<_>, _>>()?;
        let id = match &self.id_field {
            Some(f) => get(f)?,
            None => format!("{}-{index:06}", self.kind.as_str().to_lowercase()),
        };
        Ok(Some((
            BenchmarkItem {
                kind: self.kind,
                id,
                fields,
                gold,
            },
            ClassificationTemplate::row_major(prompts, completions),
        )))
    }
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut BTreeMap<String, String>) {
    match v {
        serde_json::Value::String(s) => {
            out.insert(prefix.to_string(), s.clone());
        }
        serde_json::Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        serde_json::Value::Null => {}
        other => {
            out.insert(prefix.to_string(), other.to_string());
        }
    }
}

/// Parses a dataset text in the adapter's format.
pub fn parse_dataset(format: DataFormat, text: &str) -> Result<Vec<RawRecord>, AdapterError> {
    let mut out = Vec::new();
    match format {
        DataFormat::Jsonl => {
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let v: serde_json::Value = serde_json::from_str(line).map_err(|e| AdapterError::Malformed {
                    line: i + 1,
                    msg: e.to_string(),
                })?;
                let obj = v.as_object().ok_or_else(|| AdapterError::Malformed {
                    line: i + 1,
                    msg: "not a JSON object".into(),
                })?;
                let mut values = BTreeMap::new();
                for (k, x) in obj {
                    flatten(k, x, &mut values);
                }
                out.push(RawRecord { line: i + 1, values });
            }
        }
        DataFormat::Tsv => {
            let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
            let Some((_, header)) = lines.next() else {
                return Ok(out);
            };
            let columns: Vec<&str> = header.split('\t').map(str::trim).collect();
            for (i, line) in lines {
                let cells: Vec<&str> = line.split('\t').collect();
                if cells.len() > columns.len() {
                    return Err(AdapterError::Malformed {
                        line: i + 1,
                        msg: format!("{} cells for {} columns", cells.len(), columns.len()),
                    });
                }
                let values = columns
                    .iter()
                    .zip(cells)
                    .map(|(c, v)| (c.to_string(), v.trim().to_string()))
                    .collect();
                out.push(RawRecord { line: i + 1, values });
            }
        }
    }
    Ok(out)
}

pub fn load_dataset(format: DataFormat, path: &Path) -> Result<Vec<RawRecord>, AdapterError> {
    parse_dataset(format, &std::fs::read_to_string(path)?)
}
