//! Shared input builders for the benchmarks. Sizes are scaled-down stand-ins
//! for the real workloads: full-rate frame streams and the 19-dim joint
//! vectors the regression trains on.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use palmsense::types::{TactileFrame, CHANNEL_COUNT};
use palmsense::wire::encode_frame;

pub fn random_frames(count: usize, seed: u64) -> Vec<TactileFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let mut channels = [0u16; CHANNEL_COUNT];
            for c in &mut channels {
                *c = rng.random_range(0..=4095);
            }
            TactileFrame::sampled(i as u64, channels).unwrap()
        })
        .collect()
}

pub fn encoded_stream(count: usize, seed: u64) -> Vec<u8> {
    random_frames(count, seed)
        .iter()
        .flat_map(|f| encode_frame(f).unwrap())
        .collect()
}

/// Draws `per_cluster` points around each of `clusters` separated centres.
pub fn clustered_rows(clusters: usize, per_cluster: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(clusters * per_cluster);
    for c in 0..clusters {
        let centre = (c as f64) * 8.0;
        for _ in 0..per_cluster {
            rows.push(
                (0..dim)
                    .map(|_| centre + rng.random::<f64>() - 0.5)
                    .collect(),
            );
        }
    }
    rows
}
