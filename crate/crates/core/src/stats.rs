//! Monte Carlo checks of the distributional properties of the walk under
//! the uniform-angle schedule (`phi_k = 2^-k`):
//!
//! * `theta(t)` is uniform on `[-1, 1]` for every fixed `t`,
//! * the direction of `f'(t)` is uniform on the unit-circle arc
//!   `e^{i(base + [-1, 1])}`, so an arc `C` has probability `|C| / 2`,
//! * conditioned on `theta(t1) = x1`, `theta(t2)` is uniform on an interval
//!   of half-width `2^-(l+1)`, `l` the number of binary digits `t1` and `t2`
//!   share.
//!
//! At depth `n`, `theta_n(t)` is uniform on the `2^n` centers of equal
//! subintervals of `[-1, 1]`, so KS statistics carry a deterministic floor
//! of `2^-(n+1)` on top of the sampling noise. Conditioning is exact: the
//! bits on `t1`'s spine are recovered from `x1` and pinned, the rest drawn.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::bitsource::{BitSource, PinnedSigns, SignSource};
use crate::dyadic::{self, DyadicIndex, Sign};
use crate::error::{Error, Result};
use crate::schedule::RadiusSchedule;
use crate::vec::PlaneVec;
use crate::walk::{self, Heading};

/// Asymptotic 99% critical value of `sqrt(N) * D_N`.
pub const KS_CRITICAL_99: f64 = 1.63;
pub const MIN_SAMPLES: usize = 1000;
/// Deepest lattice `decode_angle_bits` handles exactly in `f64`.
pub const MAX_DECODE_DEPTH: usize = 52;

/// One-sample KS statistic of `sorted` against Uniform[`lo`, `hi`].
/// Ties are handled by comparing both one-sided gaps at every sample.
pub fn ks_uniform(sorted: &[f64], lo: f64, hi: f64) -> f64 {
    let n = sorted.len() as f64;
    let width = hi - lo;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = ((x - lo) / width).clamp(0.0, 1.0);
            let above = (i as f64 + 1.0) / n - cdf;
            let below = cdf - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// `1.63 / sqrt(N) + 2^-(levels + 1)`.
pub fn ks_threshold(samples: usize, lattice_levels: usize) -> f64 {
    KS_CRITICAL_99 / (samples as f64).sqrt() + (-((lattice_levels + 1) as f64)).exp2()
}

#[derive(Clone, Debug)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
    lo: f64,
    hi: f64,
    ks: f64,
    histogram: Vec<u64>,
}

impl EmpiricalDistribution {
    /// Summarizes `samples` against Uniform[`lo`, `hi`].
    pub fn against_uniform(mut samples: Vec<f64>, lo: f64, hi: f64, bins: usize) -> Self {
        assert!(!samples.is_empty(), "empty sample");
        assert!(hi > lo && bins > 0);
        samples.sort_by(f64::total_cmp);
        let ks = ks_uniform(&samples, lo, hi);
        let mut histogram = vec![0u64; bins];
        for &x in &samples {
            let b = ((x - lo) / (hi - lo) * bins as f64).floor();
            if b >= 0.0 && b < bins as f64 {
                histogram[b as usize] += 1;
            } else if x == hi {
                histogram[bins - 1] += 1;
            }
        }
        EmpiricalDistribution {
            sorted: samples,
            lo,
            hi,
            ks,
            histogram,
        }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn ks_statistic(&self) -> f64 {
        self.ks
    }

    pub fn histogram(&self) -> &[u64] {
        &self.histogram
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }

    /// Samples strictly outside the closed reference interval.
    pub fn outside(&self) -> usize {
        self.sorted
            .iter()
            .filter(|&&x| x < self.lo || x > self.hi)
            .count()
    }
}

/// A checked claim, serialized as one entry of a validation report.
#[derive(Clone, Debug, Serialize)]
pub struct ClaimReport {
    pub claim: String,
    pub parameters: serde_json::Value,
    #[serde(rename = "N")]
    pub samples: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn require_uniform_angle(sch: &RadiusSchedule) -> Result<()> {
    if !sch.is_uniform_angle() {
        return Err(Error::Config(format!(
            "this check needs the uniform-angle schedule, got {}",
            sch.descriptor()
        )));
    }
    Ok(())
}

fn require_samples(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::Config(format!(
            "at least {MIN_SAMPLES} samples required, got {n}"
        )));
    }
    Ok(())
}

/// `t` must not be a dyadic rational of level `<= depth`.
fn require_generic_point(t: f64, depth: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
    }
    if depth > dyadic::MAX_LEVEL as usize {
        return Err(Error::Depth(format!("depth {depth} too large")));
    }
    if (t * (depth as f64).exp2()).fract() == 0.0 {
        return Err(Error::Config(format!(
            "t = {t} is a dyadic rational of level <= {depth}"
        )));
    }
    Ok(())
}

/// `theta_depth(t)` for `count` independent streams split off `seed`.
pub fn theta_samples(
    t: f64,
    count: usize,
    depth: usize,
    seed: u64,
    sch: &RadiusSchedule,
) -> Result<Vec<f64>> {
    walk::theta(t, &BitSource::new(seed), sch, depth)?;
    let root = BitSource::new(seed);
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| walk::theta_unchecked(t, &root.split(i), sch, depth))
        .collect())
}

#[derive(Clone, Debug)]
pub struct UniformityCheck {
    pub t: f64,
    pub depth: usize,
    pub distribution: EmpiricalDistribution,
    pub threshold: f64,
}

impl UniformityCheck {
    pub fn pass(&self) -> bool {
        self.distribution.ks_statistic() <= self.threshold
    }

    pub fn report(&self, seed: u64) -> ClaimReport {
        ClaimReport {
            claim: "theta(t) ~ Uniform[-1, 1]".into(),
            parameters: serde_json::json!({ "t": self.t, "depth": self.depth, "seed": seed }),
            samples: self.distribution.len(),
            statistic: self.distribution.ks_statistic(),
            threshold: self.threshold,
            pass: self.pass(),
        }
    }
}

/// KS test of `theta_depth(t)` against Uniform[-1, 1].
pub fn theta_uniformity(
    t: f64,
    samples: usize,
    depth: usize,
    seed: u64,
    sch: &RadiusSchedule,
) -> Result<UniformityCheck> {
    require_uniform_angle(sch)?;
    require_samples(samples)?;
    require_generic_point(t, depth)?;
    let draws = theta_samples(t, samples, depth, seed, sch)?;
    Ok(UniformityCheck {
        t,
        depth,
        distribution: EmpiricalDistribution::against_uniform(draws, -1.0, 1.0, 32),
        threshold: ks_threshold(samples, depth),
    })
}

/// Angles of `alpha_depth(t)`, measured from the positive x axis.
pub fn derivative_directions(
    t: f64,
    count: usize,
    depth: usize,
    seed: u64,
    sch: &RadiusSchedule,
    base_angle: f64,
) -> Result<Vec<f64>> {
    Ok(theta_samples(t, count, depth, seed, sch)?
        .into_iter()
        .map(|th| base_angle + th)
        .collect())
}

#[derive(Clone, Debug)]
pub struct ArcCheck {
    pub t: f64,
    pub arc: (f64, f64),
    pub samples: usize,
    pub hits: usize,
    pub expected: f64,
}

impl ArcCheck {
    pub fn probability(&self) -> f64 {
        self.hits as f64 / self.samples as f64
    }

    /// `4 sqrt(p (1 - p) / N)`.
    pub fn tolerance(&self) -> f64 {
        let p = self.expected;
        4.0 * (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    pub fn pass(&self) -> bool {
        (self.probability() - self.expected).abs() <= self.tolerance()
    }

    pub fn report(&self, depth: usize, seed: u64) -> ClaimReport {
        ClaimReport {
            claim: "P{f'(t) in arc} = |arc| / 2".into(),
            parameters: serde_json::json!({
                "t": self.t,
                "arc": [self.arc.0, self.arc.1],
                "depth": depth,
                "seed": seed,
                "expected": self.expected,
                "probability": self.probability(),
            }),
            samples: self.samples,
            statistic: (self.probability() - self.expected).abs(),
            threshold: self.tolerance(),
            pass: self.pass(),
        }
    }
}

/// Fraction of sampled `f'(t)` whose direction, measured from the walk's
/// base direction `z_0`, lies in the closed arc `[lo, hi]` (radians).
pub fn derivative_arc_probability(
    t: f64,
    arc: (f64, f64),
    samples: usize,
    depth: usize,
    seed: u64,
    sch: &RadiusSchedule,
    base_angle: f64,
) -> Result<ArcCheck> {
    require_uniform_angle(sch)?;
    require_samples(samples)?;
    require_generic_point(t, depth)?;
    let (lo, hi) = arc;
    if !(-1.0..=1.0).contains(&lo) || !(-1.0..=1.0).contains(&hi) || lo > hi {
        return Err(Error::Config(format!(
            "arc [{lo}, {hi}] not inside [-1, 1]"
        )));
    }
    let root = BitSource::new(seed);
    let heading = Heading::from_angle(base_angle);
    let z0 = PlaneVec::from_polar(1.0, base_angle);
    let hits = (0..samples as u64)
        .into_par_iter()
        .filter(|&i| {
            let v = walk::alpha_n(t, &root.split(i), sch, depth, heading).expect("validated");
            // angle of v relative to z0: arg(v * conj(z0))
            let rel = PlaneVec::new(v.x * z0.x + v.y * z0.y, v.y * z0.x - v.x * z0.y).angle();
            // |theta_n| <= 1 - 2^-n; absorb atan2 rounding at the ends of [-1, 1]
            let rel = if (rel.abs() - 1.0).abs() < 1e-12 {
                rel.signum()
            } else {
                rel
            };
            lo <= rel && rel <= hi
        })
        .count();
    Ok(ArcCheck {
        t,
        arc,
        samples,
        hits,
        expected: (hi - lo) / 2.0,
    })
}

/// Signs `d_k` on the spine of `t1` that make `theta_n(t1) = x1`.
///
/// Under the uniform-angle schedule `theta_n(t1) = sum_k s_k 2^-k` with
/// `s_k = r_k(t1) d_k`, so `x1` must be an odd multiple of `2^-n` in
/// `(-1, 1)`. The `s_k` are read off greedily and `d_k = s_k r_k(t1)`.
pub fn decode_angle_bits(t1: f64, x1: f64, depth: usize) -> Result<Vec<Sign>> {
    if !(0.0..=1.0).contains(&t1) {
        return Err(Error::Domain(format!("t1 = {t1} outside [0, 1]")));
    }
    if depth > MAX_DECODE_DEPTH {
        return Err(Error::Depth(format!(
            "lattice depth {depth} exceeds {MAX_DECODE_DEPTH}"
        )));
    }
    let scaled = x1 * (depth as f64).exp2();
    let on_lattice =
        x1.abs() < 1.0 && scaled.fract() == 0.0 && (depth == 0 || scaled.rem_euclid(2.0) == 1.0);
    if !on_lattice {
        return Err(Error::Representation(format!(
            "{x1} is not a sum of +-2^-k over k = 1..={depth}"
        )));
    }
    let mut residual = x1;
    let mut bits = Vec::with_capacity(depth);
    for k in 1..=depth as u32 {
        let s = if residual > 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        };
        residual -= s.value() * (-(k as f64)).exp2();
        bits.push(s * dyadic::rademacher_unchecked(k, t1));
    }
    if residual != 0.0 {
        return Err(Error::Representation(format!(
            "residual {residual:e} left after {depth} levels"
        )));
    }
    Ok(bits)
}

/// Cells on the spine of `t` mapped to `bits[k - 1]`.
pub fn spine_pins(t: f64, bits: &[Sign]) -> HashMap<DyadicIndex, Sign> {
    bits.iter()
        .enumerate()
        .map(|(i, &d)| {
            let k = i as u32 + 1;
            (dyadic::interval_index(k, t).expect("valid level"), d)
        })
        .collect()
}

/// Conditioning `theta(t2)` on `theta(t1) = x1` at a finite depth.
///
/// With `l` shared leading digits, `t2` shares the cells of `t1` at levels
/// `1..=l+1`. Levels up to `l` contribute identically to both angles. At
/// level `l + 1` the cell is shared but `r_{l+1}` differs, so that term is
/// also fixed, with the opposite sign. The remaining levels are free and
/// contribute a uniform spread of half-width `2^-(l+1)`.
#[derive(Clone, Debug)]
pub struct ConditionalSpec {
    pub t1: f64,
    pub t2: f64,
    pub x1: f64,
    pub depth: usize,
    /// Shared leading binary digits of `t1` and `t2`.
    pub level: usize,
    /// `d_k` on the spine of `t1`.
    pub bits: Vec<Sign>,
    /// Fixed part of `theta(t2)`: `sum_{k <= l+1} r_k(t2) d_k 2^-k`.
    pub center: f64,
    /// `sum_{k <= l} r_k(t1) d_k 2^-k`, the prefix shared with `theta(t1)`.
    pub shared_prefix: f64,
    /// `2^-(l+1)` when free levels remain, else 0.
    pub half_width: f64,
}

impl ConditionalSpec {
    pub fn new(t1: f64, t2: f64, x1: f64, depth: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&t1) || !(0.0..=1.0).contains(&t2) || !(t1 < t2) {
            return Err(Error::Config(format!(
                "need 0 <= t1 < t2 <= 1, got t1 = {t1}, t2 = {t2}"
            )));
        }
        if !(x1.abs() < 1.0) {
            return Err(Error::Config(format!("|x1| = {} must be < 1", x1.abs())));
        }
        require_generic_point(t1, depth)?;
        require_generic_point(t2, depth)?;
        let bits = decode_angle_bits(t1, x1, depth)?;
        let level = dyadic::common_prefix_len(t1, t2, depth as u32)? as usize;
        let term = |k: usize, t: f64| {
            (dyadic::rademacher_unchecked(k as u32, t) * bits[k - 1]).value() * (-(k as f64)).exp2()
        };
        let shared_prefix: f64 = (1..=level).map(|k| term(k, t1)).sum();
        let fixed = (level + 1).min(depth);
        let center = shared_prefix + (level + 1..=fixed).map(|k| term(k, t2)).sum::<f64>();
        let half_width = if fixed < depth {
            (-((level + 1) as f64)).exp2()
        } else {
            0.0
        };
        Ok(ConditionalSpec {
            t1,
            t2,
            x1,
            depth,
            level,
            bits,
            center,
            shared_prefix,
            half_width,
        })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    /// The interval `shared_prefix +- 2^-(l+1)`, which leaves out the fixed
    /// level-`(l+1)` term.
    pub fn prefix_interval(&self) -> (f64, f64) {
        let w = (-((self.level + 1) as f64)).exp2();
        (self.shared_prefix - w, self.shared_prefix + w)
    }

    /// Number of free levels below the fixed ones.
    pub fn free_levels(&self) -> usize {
        self.depth.saturating_sub(self.level + 1)
    }

    pub fn pins(&self) -> HashMap<DyadicIndex, Sign> {
        spine_pins(self.t1, &self.bits)
    }
}

#[derive(Clone, Debug)]
pub struct MarkovCheck {
    pub spec: ConditionalSpec,
    /// Samples of `theta(t2)`, compared with the uniform law on the
    /// predicted interval.
    pub distribution: Option<EmpiricalDistribution>,
    pub samples: Vec<f64>,
    pub outside: usize,
    pub outside_prefix_interval: usize,
    pub threshold: f64,
}

impl MarkovCheck {
    pub fn ks_statistic(&self) -> f64 {
        self.distribution.as_ref().map_or(0.0, |d| d.ks_statistic())
    }

    pub fn pass(&self) -> bool {
        match &self.distribution {
            Some(d) => self.outside == 0 && d.ks_statistic() <= self.threshold,
            // no free levels: a point mass at the center
            None => self.samples.iter().all(|&x| x == self.spec.center),
        }
    }

    pub fn report(&self, seed: u64) -> ClaimReport {
        let s = &self.spec;
        let (lo, hi) = s.interval();
        let (plo, phi) = s.prefix_interval();
        ClaimReport {
            claim: "theta(t2) | theta(t1) = x1 ~ Uniform[center - 2^-(l+1), center + 2^-(l+1)]"
                .into(),
            parameters: serde_json::json!({
                "t1": s.t1,
                "t2": s.t2,
                "x1": s.x1,
                "depth": s.depth,
                "seed": seed,
                "level": s.level,
                "center": s.center,
                "interval": [lo, hi],
                "outside": self.outside,
                "shared_prefix": s.shared_prefix,
                "prefix_interval": [plo, phi],
                "outside_prefix_interval": self.outside_prefix_interval,
            }),
            samples: self.samples.len(),
            statistic: self.ks_statistic(),
            threshold: self.threshold,
            pass: self.pass(),
        }
    }
}

/// Pins the bits of `t1`'s spine decoded from `x1`, draws everything else
/// from streams split off `seed`, and compares `theta(t2)` with the
/// predicted conditional law.
pub fn markov_conditional_check(
    spec: &ConditionalSpec,
    samples: usize,
    seed: u64,
    sch: &RadiusSchedule,
) -> Result<MarkovCheck> {
    require_uniform_angle(sch)?;
    require_samples(samples)?;
    let root = BitSource::new(seed);
    let pinned = PinnedSigns::new(root, spec.pins());
    // theta(t1) is pinned to x1 regardless of the free bits
    debug_assert_eq!(
        walk::theta_unchecked(spec.t1, &pinned, sch, spec.depth),
        spec.x1
    );
    let draws: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| walk::theta_unchecked(spec.t2, &pinned.with_base(root.split(i)), sch, spec.depth))
        .collect();
    let (lo, hi) = spec.interval();
    let outside = draws.iter().filter(|&&x| x < lo || x > hi).count();
    let (plo, phi) = spec.prefix_interval();
    let outside_prefix_interval = draws.iter().filter(|&&x| x < plo || x > phi).count();
    let distribution = (spec.half_width > 0.0)
        .then(|| EmpiricalDistribution::against_uniform(draws.clone(), lo, hi, 16));
    // the free part lives on a lattice of 2^m points over the interval
    let threshold = ks_threshold(samples, spec.free_levels());
    Ok(MarkovCheck {
        spec: spec.clone(),
        distribution,
        samples: draws,
        outside,
        outside_prefix_interval,
        threshold,
    })
}

/// Checks that every `theta_n` value is on the depth-`n` lattice.
pub fn on_theta_lattice(x: f64, depth: usize) -> bool {
    let scaled = x * (depth as f64).exp2();
    x.abs() < 1.0 && scaled.fract() == 0.0 && (depth == 0 || scaled.rem_euclid(2.0) == 1.0)
}

/// Source with the given signs on `t`'s spine and `fallback` elsewhere.
pub fn pinned_source<S: SignSource>(t: f64, bits: &[Sign], fallback: S) -> PinnedSigns<S> {
    PinnedSigns::new(fallback, spine_pins(t, bits))
}
