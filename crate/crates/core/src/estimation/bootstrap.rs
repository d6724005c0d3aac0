//! Moving-block bootstrap for dependent series.

use rand::Rng;
use rayon::prelude::*;

use crate::rng;

/// Evaluates `statistic` on `replicates` moving-block resamples of `data`.
///
/// Each resample has the length of `data` and is assembled from blocks of
/// `block_len` consecutive observations with uniformly drawn start indices.
/// Replicate `r` draws from its own stream, so the output does not depend on
/// thread scheduling.
pub fn block_bootstrap<T, F>(data: &[f64], block_len: usize, replicates: usize, seed: u64, statistic: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    let n = data.len();
    let block = block_len.clamp(1, n.max(1));
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(rng::member_seed(seed, r as u64), 0);
            let mut sample = Vec::with_capacity(n);
            while sample.len() < n {
                let start = rng.random_range(0..=n - block);
                let take = block.min(n - sample.len());
                sample.extend_from_slice(&data[start..start + take]);
            }
            statistic(&sample)
        })
        .collect()
}

/// Sample standard deviation of bootstrap replicates, ignoring non-finite
/// entries.
pub fn standard_error(values: &[f64]) -> f64 {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 2 {
        return f64::NAN;
    }
    let n = finite.len() as f64;
    let mean = finite.iter().sum::<f64>() / n;
    (finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn mean(x: &[f64]) -> f64 {
        x.iter().sum::<f64>() / x.len() as f64
    }

    #[test]
    fn iid_mean_standard_error() {
        let mut rng = rng::stream(1, 0);
        let data: Vec<f64> = (0..4000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let reps = block_bootstrap(&data, 1, 400, 2, mean);
        let se = standard_error(&reps);
        let expected = 1.0 / (4000f64).sqrt();
        assert!((se / expected - 1.0).abs() < 0.15, "{se} vs {expected}");
    }

    #[test]
    fn blocks_capture_dependence() {
        // AR(1) with coefficient 0.9: long-run sd of the mean is sqrt((1+a)/(1-a)) times the iid value.
        let mut rng = rng::stream(3, 0);
        let mut x = 0.0;
        let data: Vec<f64> = (0..20_000)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                x = 0.9 * x + z;
                x
            })
            .collect();
        let iid_se = standard_error(&block_bootstrap(&data, 1, 300, 4, mean));
        let block_se = standard_error(&block_bootstrap(&data, 200, 300, 4, mean));
        assert!(block_se > 3.0 * iid_se);
    }

    #[test]
    fn deterministic() {
        let data: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        assert_eq!(block_bootstrap(&data, 7, 20, 9, mean), block_bootstrap(&data, 7, 20, 9, mean));
    }
}
