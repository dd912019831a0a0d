//! Endpoint-pinned unit-speed curves: `f(t) = a + int_0^t alpha`.
//!
//! The depth-`n` approximant `f_n` integrates the step path `alpha_n`
//! exactly, so it is a polygon with `2^n` equal segments of length
//! `sqrt(c_n) / 2^n`. Every truncation of the walk integrates to
//! `alpha_0 = b - a`, hence `f_n(1) = b` at every depth, not only in the limit.

use crate::bitsource::BitSource;
use crate::error::{Error, Result};
use crate::schedule::RadiusSchedule;
use crate::vec::PlaneVec;
use crate::walk::{self, Heading, StepPath};

/// Largest accepted mismatch between `c_0` and `|b - a|^2`.
pub const C0_TOLERANCE: f64 = 1e-9;

/// How deep to run the walk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Resolution {
    /// Smallest depth whose certified sup-norm error is at most this.
    Tolerance(f64),
    Depth(usize),
}

/// Polygonal approximant `f_n` with vertices at `t = m / 2^n`.
#[derive(Clone, Debug)]
pub struct IsometricPath {
    depth: usize,
    vertices: Vec<PlaneVec>,
    start: PlaneVec,
    end: PlaneVec,
    sup_error: f64,
    speed: f64,
    schedule: String,
    seed: Option<u64>,
}

impl IsometricPath {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn vertices(&self) -> &[PlaneVec] {
        &self.vertices
    }

    pub fn start(&self) -> PlaneVec {
        self.start
    }

    /// Requested end point (`a + alpha_0`).
    pub fn end(&self) -> PlaneVec {
        self.end
    }

    /// Certified bound on `sup_t |f(t) - f_n(t)|` for the limit curve `f`.
    pub fn sup_error(&self) -> f64 {
        self.sup_error
    }

    /// Speed of every segment, `gain * sqrt(c_n)`.
    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn schedule_descriptor(&self) -> &str {
        &self.schedule
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Distance between the last vertex and the requested end point.
    pub fn endpoint_defect(&self) -> f64 {
        self.vertices.last().unwrap().distance(self.end)
    }

    /// Distance between the first and last vertex.
    pub fn closure_defect(&self) -> f64 {
        self.vertices.last().unwrap().distance(self.vertices[0])
    }

    /// Dyadic parameter of vertex `m`, exact in binary floating point.
    pub fn param(&self, m: usize) -> f64 {
        m as f64 * (-(self.depth as f64)).exp2()
    }

    pub fn params(&self) -> Vec<f64> {
        (0..self.vertices.len()).map(|m| self.param(m)).collect()
    }

    pub fn segment_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.vertices.windows(2).map(|w| w[0].distance(w[1]))
    }

    /// Polygonal length.
    pub fn length(&self) -> f64 {
        self.segment_lengths().sum()
    }

    /// `f_n(t)` by linear interpolation between vertices.
    pub fn eval(&self, t: f64) -> Result<PlaneVec> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
        }
        let segments = self.vertices.len() - 1;
        let x = t * segments as f64;
        let m = (x.floor() as usize).min(segments - 1);
        let frac = x - m as f64;
        let (p, q) = (self.vertices[m], self.vertices[m + 1]);
        Ok(p + (q - p) * frac)
    }
}

/// `f_n(m / 2^n) = a + 2^-n sum_{i < m} alpha_n[i]`.
///
/// Block sums are formed pairwise and vertices placed top-down from block
/// boundaries, so rounding grows with the depth rather than with `2^n`.
pub fn integrate(p: &StepPath, a: PlaneVec) -> IsometricPath {
    let n = p.depth();
    let h = (-(n as f64)).exp2();
    // sums[l - 1][b] is the sum of block b of 2^l pieces
    let mut sums: Vec<Vec<PlaneVec>> = Vec::with_capacity(n);
    for level in 0..n {
        let prev = if level == 0 {
            p.values()
        } else {
            &sums[level - 1]
        };
        let next = prev.chunks_exact(2).map(|c| c[0] + c[1]).collect();
        sums.push(next);
    }
    let block_sums = |level: usize| -> &[PlaneVec] {
        if level == 0 {
            p.values()
        } else {
            &sums[level - 1]
        }
    };
    let pieces = 1usize << n;
    let mut vertices = vec![PlaneVec::ZERO; pieces + 1];
    vertices[0] = a;
    vertices[pieces] = a + block_sums(n)[0] * h;
    for level in (1..=n).rev() {
        let block = 1usize << level;
        let half = block / 2;
        for (b, left) in block_sums(level - 1).iter().step_by(2).enumerate() {
            let i0 = b * block;
            vertices[i0 + half] = vertices[i0] + *left * h;
        }
    }
    let sch = p.schedule();
    let heading = p.heading();
    IsometricPath {
        depth: n,
        vertices,
        start: a,
        end: a + p.alpha0(),
        sup_error: walk::truncation_bound(sch, n, heading.gain),
        speed: heading.gain * sch.speed(n),
        schedule: sch.descriptor().to_string(),
        seed: p.seed(),
    }
}

fn resolve_depth(sch: &RadiusSchedule, res: Resolution, gain: f64) -> Result<usize> {
    match res {
        Resolution::Depth(n) => Ok(n),
        Resolution::Tolerance(eps) => walk::depth_for_tolerance(sch, eps, gain),
    }
}

/// A random unit-speed curve from `a` to `b`; needs `|b - a| < 1` and
/// `c_0 = |b - a|^2`. `a = b` is handed to [`sample_closed`].
pub fn sample_open(
    a: PlaneVec,
    b: PlaneVec,
    sch: &RadiusSchedule,
    res: Resolution,
    seed: u64,
) -> Result<IsometricPath> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain("endpoints must be finite".into()));
    }
    let chord = b - a;
    let len = chord.norm();
    if !(len < 1.0) {
        return Err(Error::NotStrictlyShort(len));
    }
    if len == 0.0 {
        return sample_closed(a, sch, res, seed, 0.0);
    }
    let c0 = sch.c0();
    if (c0 - len * len).abs() > C0_TOLERANCE {
        return Err(Error::Config(format!(
            "schedule has c_0 = {c0} but |b - a|^2 = {}",
            len * len
        )));
    }
    let heading = Heading::from_alpha0(chord, sch)?;
    let depth = resolve_depth(sch, res, heading.gain)?;
    let steps = walk::step_path(&BitSource::new(seed), sch, depth, heading)?.with_seed(seed);
    let mut path = integrate(&steps, a);
    path.end = b;
    Ok(path)
}

/// A random closed unit-speed curve through `a`; needs `c_0 = 0`. The
/// initial direction `base_angle` only rotates the result about `a`.
pub fn sample_closed(
    a: PlaneVec,
    sch: &RadiusSchedule,
    res: Resolution,
    seed: u64,
    base_angle: f64,
) -> Result<IsometricPath> {
    if !a.is_finite() {
        return Err(Error::Domain("base point must be finite".into()));
    }
    if sch.c0() != 0.0 {
        return Err(Error::Config(format!(
            "closed curves need c_0 = 0, schedule has c_0 = {}",
            sch.c0()
        )));
    }
    let heading = Heading::from_angle(base_angle);
    let depth = resolve_depth(sch, res, heading.gain)?;
    let steps = walk::step_path(&BitSource::new(seed), sch, depth, heading)?.with_seed(seed);
    let mut path = integrate(&steps, a);
    path.end = a;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitsource::ConstantSigns;
    use crate::dyadic::Sign;

    fn geo0() -> RadiusSchedule {
        RadiusSchedule::geometric(0.0, 0.5).unwrap()
    }

    #[test]
    fn depth_zero_is_straight_segment() {
        let a = PlaneVec::new(1.0, 2.0);
        let b = PlaneVec::new(1.3, 2.4);
        let sch = RadiusSchedule::geometric(0.25, 0.5).unwrap();
        let p = sample_open(a, b, &sch, Resolution::Depth(0), 3).unwrap();
        assert_eq!(p.vertices().len(), 2);
        assert_eq!(p.vertices()[0], a);
        assert!(p.vertices()[1].distance(b) < 1e-15);
        assert!(p.eval(0.5).unwrap().distance(PlaneVec::new(1.15, 2.2)) < 1e-15);
    }

    #[test]
    fn out_and_back_loop() {
        let sch = geo0();
        let steps =
            walk::step_path(&ConstantSigns(Sign::Plus), &sch, 1, Heading::default()).unwrap();
        let p = integrate(&steps, PlaneVec::ZERO);
        // Riemann sum of alpha_1 = sqrt(c_1) exp(i r_1(t) pi / 2) over halves
        let c1 = sch.c(1).sqrt();
        let oracle = [PlaneVec::ZERO, PlaneVec::new(0.0, c1 / 2.0), PlaneVec::ZERO];
        for (v, o) in p.vertices().iter().zip(oracle) {
            assert!(v.distance(o) < 1e-15, "{v:?} {o:?}");
        }
        assert!(p.closure_defect() < 1e-15);
    }

    #[test]
    fn open_endpoint_exact_at_every_depth() {
        let sch = RadiusSchedule::geometric(0.64, 0.5).unwrap();
        let a = PlaneVec::new(-0.3, 0.1);
        let b = a + PlaneVec::new(0.8 * 0.6, -0.8 * 0.8);
        for seed in 0..50 {
            for n in 0..=16 {
                let p = sample_open(a, b, &sch, Resolution::Depth(n), seed).unwrap();
                assert_eq!(p.vertices()[0], a);
                assert!(p.endpoint_defect() <= 1e-12);
            }
        }
    }

    #[test]
    fn segments_equal_and_lipschitz() {
        let sch = RadiusSchedule::uniform_angle();
        let a = PlaneVec::ZERO;
        let b = PlaneVec::new(1f64.sin(), 0.0);
        for seed in 0..5 {
            let p = sample_open(a, b, &sch, Resolution::Depth(10), seed).unwrap();
            let seg = p.speed() * (-10f64).exp2();
            for l in p.segment_lengths() {
                assert!((l - seg).abs() <= 1e-12);
            }
            let params = p.params();
            let v = p.vertices();
            let mut worst = 0.0f64;
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    worst = worst.max(v[i].distance(v[j]) / (params[j] - params[i]));
                }
            }
            assert!(worst <= 1.0 + 1e-12, "{worst}");
        }
    }

    #[test]
    fn uniform_angle_open_example() {
        let sch = RadiusSchedule::uniform_angle();
        let b = PlaneVec::new(1f64.sin(), 0.0);
        let p = sample_open(PlaneVec::ZERO, b, &sch, Resolution::Tolerance(0.01), 11).unwrap();
        assert!(p.sup_error() <= 0.01);
        assert!((p.length() - sch.speed(p.depth())).abs() < 1e-12);
        assert!(p.endpoint_defect() < 1e-12);
    }

    #[test]
    fn halving_tolerance_never_reduces_depth() {
        let sch = RadiusSchedule::geometric(0.09, 0.4).unwrap();
        let b = PlaneVec::new(0.3, 0.0);
        let mut last = 0;
        let mut eps = 1.0;
        for _ in 0..8 {
            let p = sample_open(PlaneVec::ZERO, b, &sch, Resolution::Tolerance(eps), 1).unwrap();
            assert!(p.depth() >= last);
            assert!(p.sup_error() <= eps);
            last = p.depth();
            eps /= 2.0;
        }
    }

    #[test]
    fn nested_depths_agree_on_coarse_grid() {
        let sch = RadiusSchedule::geometric(0.25, 0.3).unwrap();
        let b = PlaneVec::new(0.0, 0.5);
        for seed in 0..10 {
            for n in 0..14 {
                let p = sample_open(PlaneVec::ZERO, b, &sch, Resolution::Depth(n), seed).unwrap();
                let q =
                    sample_open(PlaneVec::ZERO, b, &sch, Resolution::Depth(n + 1), seed).unwrap();
                let allowed = (-((n + 1) as f64)).exp2() * 2.0 * sch.increment(n + 1).sqrt();
                for (m, v) in p.vertices().iter().enumerate() {
                    let d = v.distance(q.vertices()[2 * m]);
                    assert!(d <= 1e-12 && d <= allowed + 1e-15);
                }
            }
        }
    }

    #[test]
    fn distinct_seeds_distinct_paths() {
        let sch = RadiusSchedule::geometric(0.25, 0.5).unwrap();
        let b = PlaneVec::new(0.5, 0.0);
        let paths: Vec<_> = (0..50)
            .map(|s| sample_open(PlaneVec::ZERO, b, &sch, Resolution::Depth(8), s).unwrap())
            .collect();
        for i in 0..paths.len() {
            for j in i + 1..paths.len() {
                assert!(paths[i].vertices() != paths[j].vertices());
            }
        }
    }

    #[test]
    fn closed_curves() {
        let sch = geo0();
        let a = PlaneVec::new(2.0, -1.0);
        for seed in 0..30 {
            for n in 0..=14 {
                let p = sample_closed(a, &sch, Resolution::Depth(n), seed, 0.0).unwrap();
                assert!(p.closure_defect() <= 1e-12);
                assert!(p.endpoint_defect() <= 1e-12);
            }
        }
        let p = sample_open(a, a, &sch, Resolution::Depth(6), 4).unwrap();
        assert!(p.closure_defect() <= 1e-12);
    }

    #[test]
    fn closed_rotation_equivariance() {
        let sch = geo0();
        let a = PlaneVec::new(0.5, 0.5);
        let rho = 0.7;
        let p = sample_closed(a, &sch, Resolution::Depth(9), 21, 0.0).unwrap();
        let q = sample_closed(a, &sch, Resolution::Depth(9), 21, rho).unwrap();
        for (u, v) in p.vertices().iter().zip(q.vertices()) {
            let rotated = a + (*u - a).rotate(rho);
            assert!(rotated.distance(*v) < 1e-13);
        }
    }

    #[test]
    fn errors() {
        let sch = RadiusSchedule::geometric(0.25, 0.5).unwrap();
        let o = PlaneVec::ZERO;
        assert!(matches!(
            sample_open(o, PlaneVec::new(1.0, 0.0), &sch, Resolution::Depth(3), 0),
            Err(Error::NotStrictlyShort(_))
        ));
        assert!(matches!(
            sample_open(o, PlaneVec::new(0.4, 0.0), &sch, Resolution::Depth(3), 0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            sample_open(o, o, &sch, Resolution::Depth(3), 0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            sample_closed(o, &sch, Resolution::Depth(3), 0, 0.0),
            Err(Error::Config(_))
        ));
        assert!(sample_open(o, PlaneVec::new(0.5, 1e-10), &sch, Resolution::Depth(3), 0).is_ok());
    }
}
