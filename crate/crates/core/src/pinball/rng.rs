//! Counter-addressed noise: the words used at `(seed, path, step)` sit at a fixed offset of
//! the ChaCha stream selected by `path`, so any step can be regenerated on its own.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream bit reserved for the rare retry draws after a failed projection.
const RETRY_STREAM: u64 = 1 << 63;
const MAX_RETRIES: u64 = 16;

pub struct PathRng {
    rng: ChaCha8Rng,
    seed: u64,
    path: u64,
    dim: usize,
    step: u64,
}

/// Words consumed per step: Box-Muller pairs for `dim` normals (an odd `dim` discards the
/// last partner) plus one uniform.
pub fn words_per_step(dim: usize) -> u128 {
    (4 * dim.div_ceil(2) + 2) as u128
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    // (0, 1]: never zero, so logarithms stay finite
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn fill_normals(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    let mut k = 0;
    while k < out.len() {
        let (u1, u2) = (uniform(rng), uniform(rng));
        let rad = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        out[k] = rad * c;
        if k + 1 < out.len() {
            out[k + 1] = rad * s;
        }
        k += 2;
    }
}

impl PathRng {
    pub fn new(seed: u64, path: u64, dim: usize) -> Self {
        Self::at(seed, path, dim, 0)
    }

    /// Generator positioned at the start of `step`.
    pub fn at(seed: u64, path: u64, dim: usize, step: u64) -> Self {
        assert!(path < RETRY_STREAM, "path index too large");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        rng.set_word_pos(step as u128 * words_per_step(dim));
        PathRng {
            rng,
            seed,
            path,
            dim,
            step,
        }
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    /// Normals into `xi` (length `dim`) and one uniform in (0, 1]; advances one step.
    pub fn next_step(&mut self, xi: &mut [f64]) -> f64 {
        debug_assert_eq!(xi.len(), self.dim);
        fill_normals(&mut self.rng, xi);
        let u = uniform(&mut self.rng);
        self.step += 1;
        u
    }

    /// Fresh normals for retry `attempt` of the step just taken.
    pub fn retry_normals(&self, attempt: u64, xi: &mut [f64]) {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(RETRY_STREAM | self.path);
        r.set_word_pos(((self.step - 1) * MAX_RETRIES + attempt) as u128 * words_per_step(self.dim));
        fill_normals(&mut r, xi);
    }
}
