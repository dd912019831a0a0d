//! The depth-`n` truncation of the chord random walk.
//!
//! At level `k` every constant piece of speed `sqrt(c_{k-1})` is split in
//! half and the halves are turned by `+phi_k` and `-phi_k` (order chosen by
//! `d_{kj}`) while the speed grows to `sqrt(c_k)`. Since
//! `cos(phi_k) = sqrt(c_{k-1} / c_k)`, the two halves average back to the
//! parent piece, so every truncation integrates to the same vector.
//!
//! For a point `t` the accumulated turn is
//! `theta_n(t) = sum_{k <= n} r_k(t) d_{k, j(k,t)} phi_k`, one cell per level.

use crate::bitsource::SignSource;
use crate::dyadic::{self, DyadicIndex, MAX_LEVEL};
use crate::error::{Error, Result};
use crate::schedule::RadiusSchedule;
use crate::vec::{pairwise_sum, PlaneVec};

/// Direction and scale of the starting vector `alpha_0`.
///
/// `alpha_n = gain * sqrt(c_n) * exp(i (base_angle + theta_n))`. With
/// `gain = |alpha_0| / sqrt(c_0)` this is the walk started at `alpha_0`; for
/// `c_0 = 0` the direction is free and `gain` is 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Heading {
    pub base_angle: f64,
    pub gain: f64,
}

impl Heading {
    pub fn from_angle(base_angle: f64) -> Self {
        Heading {
            base_angle,
            gain: 1.0,
        }
    }

    /// Starts the walk at `alpha0`. Needs `c_0 > 0` and `alpha0 != 0`.
    pub fn from_alpha0(alpha0: PlaneVec, schedule: &RadiusSchedule) -> Result<Self> {
        let r = alpha0.norm();
        if !(r > 0.0) || !alpha0.is_finite() {
            return Err(Error::Config(
                "starting vector must be finite and nonzero".into(),
            ));
        }
        if schedule.c0() <= 0.0 {
            return Err(Error::Config(
                "a nonzero starting vector needs c_0 > 0".into(),
            ));
        }
        Ok(Heading {
            base_angle: alpha0.angle(),
            gain: r / schedule.c0().sqrt(),
        })
    }

    /// `alpha_0` itself.
    pub fn alpha0(&self, schedule: &RadiusSchedule) -> PlaneVec {
        PlaneVec::from_polar(self.gain * schedule.speed(0), self.base_angle)
    }
}

impl Default for Heading {
    fn default() -> Self {
        Heading::from_angle(0.0)
    }
}

/// Deepest walk [`step_path`] will materialize (`2^24` pieces).
pub const MAX_TABLE_DEPTH: usize = 24;

/// Trailing levels of [`step_path`] applied as rotations.
const ROTATED_LEVELS: usize = 4;

fn check_depth(n: usize) -> Result<()> {
    if n > MAX_LEVEL as usize {
        return Err(Error::Depth(format!(
            "depth {n} exceeds the supported maximum {MAX_LEVEL}"
        )));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
    }
    Ok(())
}

/// `theta_n(t)`: the accumulated turn at `t` after `n` levels.
pub fn theta<S: SignSource>(t: f64, src: &S, sch: &RadiusSchedule, n: usize) -> Result<f64> {
    check_t(t)?;
    check_depth(n)?;
    Ok(theta_unchecked(t, src, sch, n))
}

/// Only the `n` cells on the spine of `t` are consulted.
pub(crate) fn theta_unchecked<S: SignSource>(
    t: f64,
    src: &S,
    sch: &RadiusSchedule,
    n: usize,
) -> f64 {
    let mut acc = 0.0;
    for k in 1..=n as u32 {
        let r = dyadic::rademacher_unchecked(k, t);
        let j = dyadic::position_unchecked(k, t);
        let d = src.sign(DyadicIndex::new(k, j).expect("validated depth"));
        acc += (r * d).value() * sch.angle(k as usize);
    }
    acc
}

/// `alpha_n(t)`.
pub fn alpha_n<S: SignSource>(
    t: f64,
    src: &S,
    sch: &RadiusSchedule,
    n: usize,
    heading: Heading,
) -> Result<PlaneVec> {
    let th = theta(t, src, sch, n)?;
    Ok(PlaneVec::from_polar(
        heading.gain * sch.speed(n),
        heading.base_angle + th,
    ))
}

/// Certified bound on `|alpha(t) - alpha_n(t)|`: radius error plus angle
/// error, and never more than the diameter of the disk both lie in.
pub fn truncation_bound(sch: &RadiusSchedule, n: usize, gain: f64) -> f64 {
    let split = sch.speed_deficit(n) + sch.tail_angle(n);
    gain * split.min(1.0 + sch.speed(n))
}

/// Smallest depth whose certified bound is within `eps`.
pub fn depth_for_tolerance(sch: &RadiusSchedule, eps: f64, gain: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("tolerance {eps} must be positive")));
    }
    (0..=MAX_LEVEL as usize)
        .find(|&n| truncation_bound(sch, n, gain) <= eps)
        .ok_or_else(|| {
            Error::Depth(format!(
                "tolerance {eps:e} not reachable by depth {MAX_LEVEL}; best bound {:e}",
                truncation_bound(sch, MAX_LEVEL as usize, gain)
            ))
        })
}

/// A truncation used as an approximation of the limit `alpha(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitValue {
    pub value: PlaneVec,
    pub depth: usize,
    pub bound: f64,
}

/// `alpha(t)` to within `eps`, with the certified bound actually achieved.
pub fn alpha_limit<S: SignSource>(
    t: f64,
    src: &S,
    sch: &RadiusSchedule,
    eps: f64,
    heading: Heading,
) -> Result<LimitValue> {
    let depth = depth_for_tolerance(sch, eps, heading.gain)?;
    Ok(LimitValue {
        value: alpha_n(t, src, sch, depth, heading)?,
        depth,
        bound: truncation_bound(sch, depth, heading.gain),
    })
}

/// The full table of `alpha_n`: `2^n` constant pieces, piece `m` covering
/// `[m / 2^n, (m + 1) / 2^n)`.
#[derive(Clone, Debug)]
pub struct StepPath {
    depth: usize,
    values: Vec<PlaneVec>,
    schedule: RadiusSchedule,
    heading: Heading,
    seed: Option<u64>,
}

impl StepPath {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[PlaneVec] {
        &self.values
    }

    pub fn schedule(&self) -> &RadiusSchedule {
        &self.schedule
    }

    pub fn heading(&self) -> Heading {
        self.heading
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn alpha0(&self) -> PlaneVec {
        self.heading.alpha0(&self.schedule)
    }

    /// Value of the piece containing `t`.
    pub fn value_at(&self, t: f64) -> Result<PlaneVec> {
        check_t(t)?;
        let m = if t >= 1.0 {
            self.values.len() - 1
        } else {
            dyadic::dyadic_floor(t, self.depth as u32) as usize
        };
        Ok(self.values[m])
    }

    /// `int_0^1 alpha_n dt`.
    pub fn mean(&self) -> PlaneVec {
        pairwise_sum(&self.values) * (-(self.depth as f64)).exp2()
    }

    /// Averages sibling pairs, giving the piece values one level up.
    pub fn coarsened(&self) -> Option<Vec<PlaneVec>> {
        if self.depth == 0 {
            return None;
        }
        Some(
            self.values
                .chunks_exact(2)
                .map(|p| PlaneVec::midpoint(p[0], p[1]))
                .collect(),
        )
    }
}

/// Materializes `alpha_n` on all `2^n` pieces by splitting level by level.
///
/// Angles are accumulated exactly down to `ROTATED_LEVELS` above the leaves;
/// the last levels rotate vectors by `e^{+-i phi_k}` instead of calling
/// `sin_cos` per piece. Pieces agree with pointwise [`alpha_n`] to a few ulp.
pub fn step_path<S: SignSource>(
    src: &S,
    sch: &RadiusSchedule,
    n: usize,
    heading: Heading,
) -> Result<StepPath> {
    check_depth(n)?;
    if n > MAX_TABLE_DEPTH {
        return Err(Error::Depth(format!(
            "refusing to materialize 2^{n} pieces; evaluate pointwise instead"
        )));
    }
    let exact = n.saturating_sub(ROTATED_LEVELS);
    let mut turns = vec![0.0f64; 1 << exact];
    for k in 1..=exact as u32 {
        let phi = sch.angle(k as usize);
        // expand in place, back to front, so parents are read before overwritten
        for p in (0..1usize << (k - 1)).rev() {
            let turn = turns[p];
            let d = src.sign(DyadicIndex::new_unchecked(k, p as u64 + 1));
            // left half has r_k = +1, right half r_k = -1
            turns[2 * p] = turn + d.value() * phi;
            turns[2 * p + 1] = turn + (-d).value() * phi;
        }
    }
    let radius = heading.gain * sch.speed(n);
    let mut values = vec![PlaneVec::ZERO; 1 << n];
    for (v, &th) in values.iter_mut().zip(&turns) {
        *v = PlaneVec::from_polar(radius, heading.base_angle + th);
    }
    for k in exact as u32 + 1..=n as u32 {
        let (sin, cos) = sch.angle(k as usize).sin_cos();
        for p in (0..1usize << (k - 1)).rev() {
            let v = values[p];
            let d = src.sign(DyadicIndex::new_unchecked(k, p as u64 + 1));
            let s = d.value() * sin;
            values[2 * p] = PlaneVec::new(v.x * cos - v.y * s, v.x * s + v.y * cos);
            values[2 * p + 1] = PlaneVec::new(v.x * cos + v.y * s, v.y * cos - v.x * s);
        }
    }
    Ok(StepPath {
        depth: n,
        values,
        schedule: sch.clone(),
        heading,
        seed: None,
    })
}
