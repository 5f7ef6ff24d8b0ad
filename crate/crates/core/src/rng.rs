//! Deterministic substream random numbers.
//!
//! Every stochastic routine draws from a ChaCha stream keyed by the master
//! seed and the coordinates of the work unit (domain, node, path). A draw
//! therefore depends only on those coordinates — never on thread count or
//! scheduling — so a fixed `(seed, config)` reproduces results bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Disjoint stream families. Distinct engines never share draws even under a
/// common master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamDomain {
    /// Spectral pricer: one stream per (quadrature node, variance path).
    Bridge = 1,
    /// Sequential pricer: one stream per variance path.
    Sequential = 2,
    /// Euler reference scheme: one stream per path.
    Euler = 3,
}

const NODE_BITS: u32 = 20;
const PATH_BITS: u32 = 36;

/// One work unit's private generator.
#[derive(Debug, Clone)]
pub struct SubstreamRng {
    inner: ChaCha8Rng,
}

impl SubstreamRng {
    /// Stream for the given coordinates. `node < 2^20`, `path < 2^36`.
    pub fn new(seed: u64, domain: StreamDomain, node: u64, path: u64) -> Self {
        assert!(node < 1 << NODE_BITS, "node index {node} out of range");
        assert!(path < 1 << PATH_BITS, "path index {path} out of range");
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(((domain as u64) << (NODE_BITS + PATH_BITS)) | (node << PATH_BITS) | path);
        Self { inner }
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.standard_normal();
        }
    }
}
