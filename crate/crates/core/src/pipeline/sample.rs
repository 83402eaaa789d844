use std::collections::HashMap;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{derive_seed, ArgumentItem, PipelineError};
use crate::catalog::{scheme_group, Catalog, TrainSet};

/// Items per scheme when `size` is spread over `schemes` in order: the
/// quotient each, one more for the first `size % n`.
pub fn allocation(size: usize, schemes: &[&str]) -> Vec<(String, usize)> {
    let n = schemes.len();
    if n == 0 {
        return Vec::new();
    }
    let (q, r) = (size / n, size % n);
    schemes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.to_string(), q + usize::from(i < r)))
        .collect()
}

/// One sampled training set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainingSample {
    pub set: TrainSet,
    pub size: usize,
    pub items: Vec<ArgumentItem>,
}

/// Samples `size` items of the schemes in `set`, uniformly allocated over
/// schemes, then shuffled.
pub fn sample_training_set(
    train: &[ArgumentItem],
    catalog: &Catalog,
    set: TrainSet,
    size: usize,
    master_seed: u64,
) -> Result<TrainingSample, PipelineError> {
    let mut by_scheme: HashMap<&str, Vec<&ArgumentItem>> = HashMap::new();
    for item in train {
        by_scheme.entry(item.scheme_id.as_str()).or_default().push(item);
    }
    let ids: Vec<&str> = scheme_group(catalog, set).iter().map(|s| s.id.as_str()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[
        &master_seed.to_string(),
        set.as_str(),
        &size.to_string(),
    ]));
    let mut items = Vec::with_capacity(size);
    for (scheme, need) in allocation(size, &ids) {
        let pool = by_scheme.get(scheme.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        if pool.len() < need {
            return Err(PipelineError::InsufficientItems {
                scheme,
                need,
                have: pool.len(),
            });
        }
        let mut picked = index::sample(&mut rng, pool.len(), need).into_vec();
        picked.sort_unstable();
        items.extend(picked.into_iter().map(|i| pool[i].clone()));
    }
    items.shuffle(&mut rng);
    Ok(TrainingSample { set, size, items })
}

/// Every training set at every size.
pub fn sample_training_sets(
    train: &[ArgumentItem],
    catalog: &Catalog,
    sizes: &[usize],
    master_seed: u64,
) -> Result<Vec<TrainingSample>, PipelineError> {
    let mut out = Vec::new();
    for set in TrainSet::ALL {
        for &size in sizes {
            out.push(sample_training_set(train, catalog, set, size, master_seed)?);
        }
    }
    Ok(out)
}
