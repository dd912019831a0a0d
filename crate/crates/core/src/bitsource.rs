//! Seeded, index-addressable `+1/-1` variables `d_{kj}`.
//!
//! Generation is counter based: the sign for a cell is a keyed hash of its
//! breadth-first index, so a walk can be deepened or evaluated at a single
//! point without generating sibling cells, and shallow levels never change
//! when deeper ones are requested.

use std::collections::HashMap;
use std::sync::Arc;

use crate::dyadic::{DyadicIndex, Sign};

/// Anything that assigns a sign to every dyadic cell.
pub trait SignSource {
    fn sign(&self, idx: DyadicIndex) -> Sign;
}

impl<S: SignSource + ?Sized> SignSource for &S {
    #[inline]
    fn sign(&self, idx: DyadicIndex) -> Sign {
        (**self).sign(idx)
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 step: advance by the golden gamma, then finalize.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BitSource {
    seed: u64,
    key: u64,
}

impl BitSource {
    pub fn new(seed: u64) -> Self {
        BitSource {
            seed,
            key: mix64(seed ^ 0x5851_F42D_4C95_7F2D),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `d_{kj}`: the top bit of output number `linear(k, j)` of the
    /// splitmix64 sequence started at `key`, so any cell is reachable in O(1).
    #[inline]
    pub fn bit(&self, idx: DyadicIndex) -> Sign {
        Sign::from_bit(
            mix64(
                self.key
                    .wrapping_add(idx.linear().wrapping_mul(GOLDEN_GAMMA)),
            ) >> 63,
        )
    }

    /// Independent child stream `i`, used to hand one stream to each Monte
    /// Carlo sample.
    pub fn split(&self, i: u64) -> BitSource {
        BitSource::new(mix64(self.key.wrapping_add(mix64(i))))
    }
}

impl SignSource for BitSource {
    #[inline]
    fn sign(&self, idx: DyadicIndex) -> Sign {
        self.bit(idx)
    }
}

/// Every cell gets the same sign.
#[derive(Clone, Copy, Debug)]
pub struct ConstantSigns(pub Sign);

impl SignSource for ConstantSigns {
    #[inline]
    fn sign(&self, _idx: DyadicIndex) -> Sign {
        self.0
    }
}

/// Global sign flip of another source.
#[derive(Clone, Copy, Debug)]
pub struct Flipped<S>(pub S);

impl<S: SignSource> SignSource for Flipped<S> {
    #[inline]
    fn sign(&self, idx: DyadicIndex) -> Sign {
        -self.0.sign(idx)
    }
}

/// A source with some cells forced to given values.
#[derive(Clone, Debug)]
pub struct PinnedSigns<S> {
    base: S,
    pins: Arc<HashMap<DyadicIndex, Sign>>,
}

impl<S: SignSource> PinnedSigns<S> {
    pub fn new(base: S, pins: HashMap<DyadicIndex, Sign>) -> Self {
        PinnedSigns {
            base,
            pins: Arc::new(pins),
        }
    }

    /// Same pins over a different base; the pin map is shared, not copied.
    pub fn with_base<T: SignSource>(&self, base: T) -> PinnedSigns<T> {
        PinnedSigns {
            base,
            pins: self.pins.clone(),
        }
    }

    pub fn pins(&self) -> &HashMap<DyadicIndex, Sign> {
        &self.pins
    }
}

impl<S: SignSource> SignSource for PinnedSigns<S> {
    #[inline]
    fn sign(&self, idx: DyadicIndex) -> Sign {
        match self.pins.get(&idx) {
            Some(&s) => s,
            None => self.base.sign(idx),
        }
    }
}
