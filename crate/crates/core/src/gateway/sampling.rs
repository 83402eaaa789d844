use rand::Rng;

const EPS: f64 = 1e-12;

/// Indices of the smallest most-probable prefix whose mass reaches `top_p`,
/// in descending probability order; ties keep their original order.
pub fn nucleus_indices(probs: &[f64], top_p: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] > 0.0).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
    let mut mass = 0.0;
    let mut keep = 0;
    for &i in &order {
        mass += probs[i];
        keep += 1;
        if mass + EPS >= top_p {
            break;
        }
    }
    order.truncate(keep);
    order
}

/// Samples an index from the renormalized nucleus of `probs`.
pub fn nucleus_sample(probs: &[f64], top_p: f64, rng: &mut impl Rng) -> Option<usize> {
    let nucleus = nucleus_indices(probs, top_p);
    let total: f64 = nucleus.iter().map(|&i| probs[i]).sum();
    if nucleus.is_empty() || total <= 0.0 {
        return None;
    }
    let mut x = rng.random::<f64>() * total;
    for &i in &nucleus {
        x -= probs[i];
        if x < 0.0 {
            return Some(i);
        }
    }
    nucleus.last().copied()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nucleus_cuts_the_tail() {
        assert_eq!(nucleus_indices(&[0.05, 0.6, 0.3, 0.05], 0.9), vec![1, 2]);
        assert_eq!(nucleus_indices(&[0.05, 0.6, 0.3, 0.05], 0.91), vec![1, 2, 0]);
        assert_eq!(nucleus_indices(&[0.95, 0.05], 0.9), vec![0]);
        assert_eq!(nucleus_indices(&[0.25; 4], 1.0), vec![0, 1, 2, 3]);
    }

    #[test]
    fn sampling_stays_in_nucleus() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let i = nucleus_sample(&[0.05, 0.6, 0.3, 0.05], 0.9, &mut rng).unwrap();
            assert!(i == 1 || i == 2);
        }
    }
}
