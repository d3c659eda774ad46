//! Deterministic stream derivation for parallel Monte Carlo.
//!
//! Every variate in the crate is determined by a `(seed, stream, counter)`
//! triple: a base ChaCha12 generator is keyed from the seed once, and each
//! unit of parallel work (a sample chunk, a path, a component) clones it and
//! selects its own 64-bit stream.  Results are therefore identical for any
//! worker count or scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Number of samples per deterministic work chunk in sample-parallel loops.
pub const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone)]
pub struct StreamFactory {
    base: ChaCha12Rng,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// Generator for the given stream id.
    pub fn stream(&self, id: u64) -> ChaCha12Rng {
        let mut rng = self.base.clone();
        rng.set_stream(id.into());
        rng
    }

    /// Generator for a (component, chunk) pair; component ids occupy the high
    /// bits so path chunks never collide across components.
    pub fn component_chunk(&self, component: u32, chunk: u64) -> ChaCha12Rng {
        debug_assert!(chunk < 1 << 40);
        self.stream(((component as u64) << 40) | chunk)
    }
}

/// Splits `n` into `CHUNK`-sized pieces: returns `(chunk_index, offset, len)`.
pub fn chunks(n: usize) -> Vec<(u64, usize, usize)> {
    let mut out = Vec::with_capacity(n.div_ceil(CHUNK));
    let mut off = 0usize;
    let mut idx = 0u64;
    while off < n {
        let len = CHUNK.min(n - off);
        out.push((idx, off, len));
        off += len;
        idx += 1;
    }
    out
}
