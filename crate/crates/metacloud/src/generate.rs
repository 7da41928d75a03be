//! Chunked parallel sampling.
//!
//! Draw `i` of a run always comes from chunk `i / CHUNK`, whose generator is
//! ChaCha8 seeded with the run seed on stream `i / CHUNK`. Chunks are
//! gathered in index order, so the output does not depend on the number of
//! threads.

use metacloud_core::cloud::SampleCloud;
use metacloud_core::marginal::ScalingSchedule;
use metacloud_core::partition::Space;
use metacloud_core::perturb::Model;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const CHUNK: usize = 1 << 16;

/// Worker count from `METACLOUD_THREADS`, else the available parallelism.
pub fn thread_count() -> Result<usize> {
    match std::env::var("METACLOUD_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| Error::Usage(format!("METACLOUD_THREADS={v:?} is not a positive integer"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Draws `n` points and hands each chunk (row-major, at most `CHUNK` rows)
/// to `reduce`; results come back in chunk order.
pub fn map_chunks<T, F>(model: &Model, n: usize, seed: u64, reduce: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, Vec<f64>) -> Result<T> + Sync,
{
    let d = model.dim();
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let rows = CHUNK.min(n - c * CHUNK);
            let mut rng = chunk_rng(seed, c);
            let mut pts = vec![0.0; rows * d];
            for row in pts.chunks_exact_mut(d) {
                model.sample_into(&mut rng, row)?;
            }
            reduce(c, pts)
        })
        .collect()
}

/// `n` raw draws of `model` in draw order.
pub fn sample(model: &Model, n: usize, seed: u64) -> Result<Vec<f64>> {
    let parts = map_chunks(model, n, seed, |_, pts| Ok(pts))?;
    Ok(parts.concat())
}

/// A scaled cloud: raw draws divided by the schedule's scale at `n`.
pub fn cloud(
    model: &Model,
    n: usize,
    scaling: &ScalingSchedule,
    seed: u64,
    model_id: &str,
    space: Space,
) -> Result<SampleCloud> {
    let scale = scaling
        .scale_at(n as u64)
        .ok_or_else(|| Error::Usage(format!("no scale for n = {n}")))?;
    let raw = sample(model, n, seed)?;
    Ok(SampleCloud::from_raw(
        raw,
        model.dim(),
        scale,
        model_id.into(),
        seed,
        space,
    )?)
}
