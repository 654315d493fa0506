use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::GossConfig;
use crate::error::{Error, Result};

/// Row subset chosen by one-side sampling, with compensating weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GossSample {
    pub indices: Vec<u32>,
    pub weights: Vec<f64>,
}

/// Keeps the `ceil(a n)` rows of largest |gradient| (ties by lower index)
/// with weight 1, and draws `ceil(b n)` of the remaining rows uniformly
/// without replacement with weight `(1 - a) / b`.
pub fn goss_sample(
    gradients: &[f64],
    top_fraction: f64,
    rest_fraction: f64,
    seed: u64,
) -> Result<GossSample> {
    GossConfig {
        top_fraction,
        rest_fraction,
    }
    .validate()?;
    let n = gradients.len();
    if n == 0 {
        return Err(Error::EmptyInput("gradients"));
    }
    let n_top = ((top_fraction * n as f64).ceil() as usize).min(n);
    let n_rest = (rest_fraction * n as f64).ceil() as usize;

    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&i, &j| {
        gradients[j as usize]
            .abs()
            .total_cmp(&gradients[i as usize].abs())
    });
    let (top, rest) = order.split_at(n_top);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_rest = n_rest.min(rest.len());
    let mut drawn: Vec<u32> = index::sample(&mut rng, rest.len(), n_rest)
        .into_iter()
        .map(|k| rest[k])
        .collect();
    drawn.sort_unstable();

    let rest_weight = (1.0 - top_fraction) / rest_fraction;
    let mut picked: Vec<(u32, f64)> = top
        .iter()
        .map(|&i| (i, 1.0))
        .chain(drawn.into_iter().map(|i| (i, rest_weight)))
        .collect();
    picked.sort_unstable_by_key(|p| p.0);

    let mut weights = vec![0.0; n];
    for &(i, w) in &picked {
        weights[i as usize] = w;
    }
    Ok(GossSample {
        indices: picked.into_iter().map(|p| p.0).collect(),
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keep_all_when_top_covers_everything() {
        let g: Vec<f64> = (0..10).map(|i| i as f64 - 4.5).collect();
        let s = goss_sample(&g, 0.95, 0.05, 3).unwrap();
        assert_eq!(s.indices, (0..10).collect::<Vec<u32>>());
        assert!(s.weights.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn ten_rows_two_top_two_sampled() {
        let g = [0.1, -5.0, 0.2, 0.3, 4.0, -0.1, 0.05, 0.2, -0.3, 0.0];
        let s = goss_sample(&g, 0.2, 0.2, 11).unwrap();
        assert_eq!(s.indices.len(), 4);
        assert_eq!(s.weights[1], 1.0);
        assert_eq!(s.weights[4], 1.0);
        let sampled: Vec<u32> = s
            .indices
            .iter()
            .copied()
            .filter(|&i| i != 1 && i != 4)
            .collect();
        assert_eq!(sampled.len(), 2);
        for i in sampled {
            assert_eq!(s.weights[i as usize], 4.0);
        }
    }

    #[test]
    fn equal_gradients_keep_lowest_indices_on_top() {
        let s = goss_sample(&[1.0; 10], 0.2, 0.2, 5).unwrap();
        assert_eq!((s.weights[0], s.weights[1]), (1.0, 1.0));
        assert_eq!(s.weights.iter().filter(|&&w| w == 4.0).count(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(goss_sample(&[], 0.2, 0.2, 0).is_err());
        assert!(goss_sample(&[1.0], 0.7, 0.4, 0).is_err());
        assert!(goss_sample(&[1.0], 0.0, 0.4, 0).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let g: Vec<f64> = (0..100).map(|i| ((i * 37) % 17) as f64 - 8.0).collect();
        assert_eq!(
            goss_sample(&g, 0.1, 0.3, 9).unwrap(),
            goss_sample(&g, 0.1, 0.3, 9).unwrap()
        );
    }
}
