//! Browser bindings for the walk toolkit. Three operations back the demo
//! page in `www/`: path sampling, the exact small-horizon law, and the
//! convergence of the scaled martingale coefficient to its gamma limit.
//!
//! Every export wraps a plain-Rust inner function so native tests can run
//! without a JS host. Build the bundle with `wasm-pack build --target web`.

use wasm_bindgen::prelude::*;

use erw::analysis::{gamma_fn, ScalingSequence};
use erw::oracle::exact_distribution;
use erw::rng::Streams;
use erw::walk::{sample_trajectory, SampleMode, UniformMemory, WalkParams};

fn sample_paths_inner(
    p: f64,
    r: f64,
    steps: u32,
    n_paths: u32,
    seed: u32,
) -> erw::Result<Vec<f64>> {
    let params = WalkParams::new(p, r)?;
    let streams = Streams::new(u64::from(seed));
    let mut flat = Vec::with_capacity(steps as usize * n_paths as usize);
    for i in 0..u64::from(n_paths) {
        let mut rng = streams.stream(i);
        let path = sample_trajectory(
            &params,
            u64::from(steps),
            SampleMode::Marginal,
            &UniformMemory,
            &mut rng,
        )?;
        flat.extend(path.positions().map(|x| x as f64));
    }
    Ok(flat)
}

/// Positions of `n_paths` independent walks, flattened row-major as an
/// `n_paths x steps` matrix. Path `i` always uses the same substream, so a
/// fixed seed redraws identical paths.
#[wasm_bindgen]
pub fn sample_paths(
    p: f64,
    r: f64,
    steps: u32,
    n_paths: u32,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    sample_paths_inner(p, r, steps, n_paths, seed).map_err(|e| JsError::new(&e.to_string()))
}

fn exact_pmf_inner(p: f64, r: f64, n: u32) -> erw::Result<Vec<f64>> {
    let params = WalkParams::new(p, r)?;
    Ok(exact_distribution(&params, u64::from(n))?.masses().to_vec())
}

/// Exact law of the position after `n` steps (n <= 20): mass at
/// x = 2i - n for index i. Computed by path enumeration, not sampling.
#[wasm_bindgen]
pub fn exact_pmf(p: f64, r: f64, n: u32) -> Result<Vec<f64>, JsError> {
    exact_pmf_inner(p, r, n).map_err(|e| JsError::new(&e.to_string()))
}

fn scaling_convergence_inner(p: f64, n_max: u32) -> erw::Result<Vec<f64>> {
    let seq = ScalingSequence::compute(p, u64::from(n_max))?;
    // log-spaced sample so the early transient and the plateau both show
    let points = 400.min(n_max);
    let mut flat = Vec::with_capacity(2 * points as usize);
    let mut last = 0u64;
    for k in 0..points {
        let frac = f64::from(k) / f64::from(points - 1).max(1.0);
        let n = (f64::from(n_max).powf(frac).round() as u64).clamp(1, u64::from(n_max));
        if n == last {
            continue;
        }
        last = n;
        flat.push(n as f64);
        flat.push(seq.scaled(n));
    }
    Ok(flat)
}

/// Interleaved (n, n^(2p-1) a_n) pairs at log-spaced n up to `n_max`,
/// showing the drift toward the gamma limit.
#[wasm_bindgen]
pub fn scaling_convergence(p: f64, n_max: u32) -> Result<Vec<f64>, JsError> {
    scaling_convergence_inner(p, n_max).map_err(|e| JsError::new(&e.to_string()))
}

fn gamma_target_inner(p: f64) -> erw::Result<f64> {
    gamma_fn(2.0 * p)
}

/// The limit value gamma(2p) the scaled sequence converges to.
#[wasm_bindgen]
pub fn gamma_target(p: f64) -> Result<f64, JsError> {
    gamma_target_inner(p).map_err(|e| JsError::new(&e.to_string()))
}
