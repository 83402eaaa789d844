use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{ArgumentItem, PipelineError};

pub fn write_jsonl(mut out: impl Write, items: &[ArgumentItem]) -> Result<(), PipelineError> {
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads one item per non-empty line; errors carry the 1-based line number.
pub fn read_jsonl(input: impl Read) -> Result<Vec<ArgumentItem>, PipelineError> {
    let mut items = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|source| PipelineError::Malformed { line: i + 1, source })?;
        items.push(item);
    }
    Ok(items)
}

pub fn write_jsonl_file(path: &Path, items: &[ArgumentItem]) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_jsonl(BufWriter::new(File::create(path)?), items)
}

pub fn read_jsonl_file(path: &Path) -> Result<Vec<ArgumentItem>, PipelineError> {
    read_jsonl(File::open(path)?)
}
