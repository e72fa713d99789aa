//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream addressed by
//! `(seed, chain, purpose)`. ChaCha is counter based: the key is derived from
//! the seed, the 64-bit stream id selects the chain and purpose, and the block
//! counter advances with each step. A chain's draws therefore do not depend on
//! how many other chains exist or which worker runs them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for. Separate purposes keep, e.g., the Brownian
/// increments of a chain identical whether or not minibatches are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Noise = 0,
    Batch = 1,
    Init = 2,
    Data = 3,
    Reference = 4,
    Split = 5,
    Sweep = 6,
}

const PURPOSES: u64 = 8;

/// The stream for `(seed, chain, purpose)`.
pub fn stream(seed: u64, chain: u64, purpose: Purpose) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain.wrapping_mul(PURPOSES).wrapping_add(purpose as u64));
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn draws(mut rng: StreamRng) -> Vec<u64> {
        (0..8).map(|_| rng.random()).collect()
    }

    #[test]
    fn same_key_same_stream() {
        assert_eq!(
            draws(stream(7, 3, Purpose::Noise)),
            draws(stream(7, 3, Purpose::Noise))
        );
    }

    #[test]
    fn keys_are_separated() {
        let base = draws(stream(7, 3, Purpose::Noise));
        assert_ne!(base, draws(stream(8, 3, Purpose::Noise)));
        assert_ne!(base, draws(stream(7, 4, Purpose::Noise)));
        assert_ne!(base, draws(stream(7, 3, Purpose::Batch)));
    }
}
