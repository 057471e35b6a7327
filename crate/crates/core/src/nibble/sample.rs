use rand::distributions::{Distribution as _, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, VertexId};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Exactly `K` independent draws proportional to degree (with repetition).
    ExactK,
    /// Each vertex joins independently with probability `min(1, K deg(v) / Vol(V))`.
    ExpectedK,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot sample by degree from a graph with no edges")]
pub struct ZeroVolume;

/// Degree-proportional sample, returned in draw order (exact-K) or id order
/// (expected-K).
pub fn sample_by_degree(
    g: &Graph,
    k: u64,
    rng: &mut Stream,
    mode: SampleMode,
) -> Result<Vec<VertexId>, ZeroVolume> {
    if g.m() == 0 {
        return Err(ZeroVolume);
    }
    Ok(match mode {
        SampleMode::ExactK => {
            let weights: Vec<usize> = (0..g.n()).map(|v| g.degree(v)).collect();
            let dist = WeightedIndex::new(&weights).expect("positive total weight");
            (0..k).map(|_| dist.sample(rng)).collect()
        }
        SampleMode::ExpectedK => {
            let vol = g.total_volume() as f64;
            (0..g.n())
                .filter(|&v| {
                    let p = (k as f64 * g.degree(v) as f64 / vol).min(1.0);
                    rng.gen::<f64>() < p
                })
                .collect()
        }
    })
}
