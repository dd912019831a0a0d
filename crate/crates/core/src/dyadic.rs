//! Rademacher functions and the dyadic intervals `I_{kj}`.
//!
//! Inputs are treated as exact binary doubles. Digits are read off
//! `floor(t * 2^k)` with integer arithmetic, so there is no drift at any
//! level. At a dyadic rational `t < 1` the terminating expansion is used,
//! which makes every function here right-continuous. At `t = 1` the
//! expansion `0.111...` is used, so `t = 1` falls in the closed last
//! interval of every level.

use std::ops::Neg;

use crate::error::{Error, Result};

/// Deepest supported level. Keeps `2^k` and the linearized cell index in `u64`.
pub const MAX_LEVEL: u32 = 62;

/// A `+1` / `-1` value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    #[inline]
    pub fn from_bit(bit: u64) -> Sign {
        if bit & 1 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Neg for Sign {
    type Output = Sign;

    #[inline]
    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    #[inline]
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Level/position pair addressing `I_{kj}`, the `j`-th of the `2^(k-1)`
/// equal subintervals of `[0, 1]`. Both indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicIndex {
    k: u32,
    j: u64,
}

impl DyadicIndex {
    pub fn new(k: u32, j: u64) -> Result<Self> {
        check_level(k)?;
        let count = 1u64 << (k - 1);
        if j < 1 || j > count {
            return Err(Error::Domain(format!(
                "position j = {j} outside 1..={count} at level {k}"
            )));
        }
        Ok(DyadicIndex { k, j })
    }

    /// No range checks; callers guarantee `1 <= k <= MAX_LEVEL` and `j` in range.
    #[inline]
    pub(crate) fn new_unchecked(k: u32, j: u64) -> Self {
        DyadicIndex { k, j }
    }

    #[inline]
    pub fn level(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn position(&self) -> u64 {
        self.j
    }

    /// Breadth-first index `2^(k-1) - 1 + (j - 1)`; level 1 maps to 0.
    #[inline]
    pub fn linear(&self) -> u64 {
        (1u64 << (self.k - 1)) - 1 + (self.j - 1)
    }

    /// Closed-open bounds of the interval (the last one is closed on the right).
    pub fn bounds(&self) -> (f64, f64) {
        let width = (-((self.k - 1) as f64)).exp2();
        ((self.j - 1) as f64 * width, self.j as f64 * width)
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.bounds();
        if self.j == 1u64 << (self.k - 1) {
            lo <= t && t <= hi
        } else {
            lo <= t && t < hi
        }
    }
}

fn check_level(k: u32) -> Result<()> {
    if k < 1 {
        return Err(Error::Domain("level k must be >= 1".into()));
    }
    if k > MAX_LEVEL {
        return Err(Error::Depth(format!(
            "level {k} exceeds the supported maximum {MAX_LEVEL}"
        )));
    }
    Ok(())
}

fn check_unit(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
    }
    Ok(())
}

/// `floor(t * 2^bits)` for `t` in `[0, 1)`; exact because scaling by a
/// power of two is exact in binary floating point.
#[inline]
pub(crate) fn dyadic_floor(t: f64, bits: u32) -> u64 {
    (t * (bits as f64).exp2()).floor() as u64
}

/// Unchecked Rademacher value for `t` in `[0, 1]`, `1 <= k <= MAX_LEVEL`.
#[inline]
pub(crate) fn rademacher_unchecked(k: u32, t: f64) -> Sign {
    if t >= 1.0 {
        Sign::Minus
    } else {
        Sign::from_bit(dyadic_floor(t, k))
    }
}

/// Unchecked 1-based interval position at level `k`.
#[inline]
pub(crate) fn position_unchecked(k: u32, t: f64) -> u64 {
    if t >= 1.0 {
        1u64 << (k - 1)
    } else {
        dyadic_floor(t, k - 1) + 1
    }
}

/// `r_k(t) = 1 - 2 * (k-th binary digit of t)`.
pub fn rademacher(k: u32, t: f64) -> Result<Sign> {
    check_level(k)?;
    check_unit(t)?;
    Ok(rademacher_unchecked(k, t))
}

/// The unique `I_{kj}` containing `t`.
pub fn interval_index(k: u32, t: f64) -> Result<DyadicIndex> {
    check_level(k)?;
    check_unit(t)?;
    Ok(DyadicIndex {
        k,
        j: position_unchecked(k, t),
    })
}

/// Number of leading binary digits shared by `s` and `t`, capped at `max`.
pub fn common_prefix_len(s: f64, t: f64, max: u32) -> Result<u32> {
    check_unit(s)?;
    check_unit(t)?;
    let max = max.min(MAX_LEVEL);
    let mut l = 0;
    while l < max && rademacher_unchecked(l + 1, s) == rademacher_unchecked(l + 1, t) {
        l += 1;
    }
    Ok(l)
}
