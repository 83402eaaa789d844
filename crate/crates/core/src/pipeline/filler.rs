use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{derive_seed, PipelineError};

/// Paragraph snippets of a plain text: blocks separated by blank lines,
/// with inner line breaks collapsed.
pub fn snippets_from_text(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            if !current.is_empty() {
                out.push(current.join(" "));
                current.clear();
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        out.push(current.join(" "));
    }
    out
}

pub fn load_snippets(paths: &[PathBuf]) -> Result<Vec<String>, PipelineError> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(snippets_from_text(&std::fs::read_to_string(p)?));
    }
    Ok(out)
}

/// Interleaves `round(ratio * |arguments|)` filler snippets with the
/// argument texts in a seeded shuffle.
pub fn mix_filler(
    arguments: &[String],
    filler: &[String],
    ratio: f64,
    master_seed: u64,
) -> Result<Vec<String>, PipelineError> {
    if !ratio.is_finite() || ratio < 0.0 {
        return Err(PipelineError::BadRatio(ratio));
    }
    let need = (ratio * arguments.len() as f64).round() as usize;
    if need == 0 {
        return Ok(arguments.to_vec());
    }
    if filler.len() < need {
        return Err(PipelineError::InsufficientFiller {
            need,
            have: filler.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[
        &master_seed.to_string(),
        "filler",
        &arguments.len().to_string(),
    ]));
    let mut snippets: Vec<&String> = filler.iter().collect();
    snippets.shuffle(&mut rng);
    let mut mixed: Vec<String> = arguments.to_vec();
    mixed.extend(snippets.into_iter().take(need).cloned());
    mixed.shuffle(&mut rng);
    Ok(mixed)
}

/// Training file for LM consumption: one paragraph per blank-line block.
pub fn training_text(paragraphs: &[String]) -> String {
    let mut out = paragraphs.join("\n\n");
    out.push('\n');
    out
}
