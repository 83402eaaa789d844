use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{fail, Failure, OrExit, CONFIG};

/// Prints the hash of the effective configuration and the master seed.
pub fn log_run(verb: &str, config: &impl Serialize, master_seed: Option<u64>) {
    let json = serde_json::to_string(config).expect("config serializes");
    eprintln!(
        "aac {verb}: config sha256 {}, master seed {}",
        aac::pipeline::sha256_hex(json.as_bytes()),
        master_seed.map_or_else(|| "none".to_string(), |s| s.to_string())
    );
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).or_exit_with(CONFIG, || format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| fail(CONFIG, format!("{}: {e}", path.display())))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path, code: u8) -> Result<Vec<T>, Failure> {
    let file = File::open(path).or_exit_with(CONFIG, || format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.or_exit_with(CONFIG, || format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let value =
            serde_json::from_str(&line).map_err(|e| fail(code, format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(value);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), Failure> {
    let ctx = || format!("writing {}", path.display());
    let mut w = BufWriter::new(File::create(path).or_exit_with(CONFIG, ctx)?);
    for row in rows {
        serde_json::to_writer(&mut w, row).or_exit_with(CONFIG, ctx)?;
        w.write_all(b"\n").or_exit_with(CONFIG, ctx)?;
    }
    w.flush().or_exit_with(CONFIG, ctx)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).or_exit_with(CONFIG, || format!("writing {}", path.display()))
}
