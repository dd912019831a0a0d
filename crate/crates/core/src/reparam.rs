//! Reduction of `|f'(t)| = g(t)` on `[x0, x1]` to unit speed on `[0, 1]`.
//!
//! `psi(t) = (1/c) int_{x0}^t g` with `c = int_{x0}^{x1} g` is a strictly
//! increasing map onto `[0, 1]`, and `phi = psi^{-1}`. If `F` has constant
//! speed `c` on `[0, 1]` then `F o psi` has speed `g`, and conversely.

use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::path::IsometricPath;
use crate::vec::PlaneVec;

/// Absolute accuracy of `psi`.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Required `|psi(phi(s)) - s|`.
pub const INVERSE_TOL: f64 = 1e-9;

const FN_PANELS: usize = 256;
const FN_PROBES: usize = 1024;

type SpeedFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Source {
    /// Piecewise-linear interpolation of samples; knots are the sample points.
    Sampled {
        g: Vec<f64>,
    },
    Function(SpeedFn),
}

/// A positive speed `g` on `[x0, x1]`. The speed may vanish at the two
/// end points only.
#[derive(Clone)]
pub struct SpeedProfile {
    source: Source,
    knots: Vec<f64>,
    /// `prefix[i] = int_{x0}^{knots[i]} g`.
    prefix: Vec<f64>,
}

impl std::fmt::Debug for SpeedProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpeedProfile")
            .field("domain", &self.domain())
            .field("total", &self.total())
            .field("knots", &self.knots.len())
            .finish()
    }
}

impl SpeedProfile {
    pub fn constant(x0: f64, x1: f64, value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::Domain(format!(
                "constant speed {value} must be positive"
            )));
        }
        Self::from_samples(vec![x0, x1], vec![value, value])
    }

    /// Samples `(t_i, g_i)`, interpolated linearly.
    pub fn from_samples(t: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if t.len() != g.len() || t.len() < 2 {
            return Err(Error::Config(
                "a sampled profile needs at least two (t, g) pairs".into(),
            ));
        }
        for w in t.windows(2) {
            if !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite() {
                return Err(Error::Config(format!(
                    "profile abscissae must be finite and strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        let last = g.len() - 1;
        for (i, &v) in g.iter().enumerate() {
            check_speed(t[i], v, i == 0 || i == last)?;
        }
        let mut prefix = Vec::with_capacity(t.len());
        let mut acc = 0.0;
        prefix.push(0.0);
        for i in 0..last {
            acc += 0.5 * (g[i] + g[i + 1]) * (t[i + 1] - t[i]);
            prefix.push(acc);
        }
        Self::finish(Source::Sampled { g }, t, prefix)
    }

    /// A closed-form speed on `[x0, x1]`, integrated by adaptive Simpson.
    pub fn from_fn<F>(x0: f64, x1: f64, g: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(x1 > x0) || !x0.is_finite() || !x1.is_finite() {
            return Err(Error::Config(format!("bad profile domain [{x0}, {x1}]")));
        }
        for i in 0..=FN_PROBES {
            let x = lerp(x0, x1, i as f64 / FN_PROBES as f64);
            check_speed(x, g(x), i == 0 || i == FN_PROBES)?;
        }
        let knots: Vec<f64> = (0..=FN_PANELS)
            .map(|i| lerp(x0, x1, i as f64 / FN_PANELS as f64))
            .collect();
        let panel_tol = QUADRATURE_TOL * 1e-3 / FN_PANELS as f64;
        let mut prefix = vec![0.0];
        let mut acc = 0.0;
        for w in knots.windows(2) {
            acc += adaptive_simpson(&g, w[0], w[1], panel_tol);
            prefix.push(acc);
        }
        Self::finish(Source::Function(Arc::new(g)), knots, prefix)
    }

    /// CSV with header `t,g`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let parse_err = |line: u64, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| parse_err(1, e.to_string()))?;
        let header = rdr
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .clone();
        if header.len() != 2 || &header[0] != "t" || &header[1] != "g" {
            return Err(parse_err(
                1,
                format!(
                    "expected header t,g, got {:?}",
                    header.iter().collect::<Vec<_>>()
                ),
            ));
        }
        let mut rows: Vec<(u64, f64, f64)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                parse_err(line, e.to_string())
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let field = |i: usize| -> Result<f64> {
                rec[i]
                    .parse()
                    .map_err(|_| parse_err(line, format!("cannot parse {:?} as a number", &rec[i])))
            };
            rows.push((line, field(0)?, field(1)?));
        }
        if rows.len() < 2 {
            return Err(parse_err(
                rows.first().map_or(2, |r| r.0),
                "need at least two rows".into(),
            ));
        }
        let last = rows.len() - 1;
        for (i, &(line, t, g)) in rows.iter().enumerate() {
            if i > 0 && !(t > rows[i - 1].1) || !t.is_finite() {
                return Err(parse_err(
                    line,
                    format!("t = {t} does not increase strictly"),
                ));
            }
            check_speed(t, g, i == 0 || i == last).map_err(|e| parse_err(line, e.to_string()))?;
        }
        Self::from_samples(
            rows.iter().map(|r| r.1).collect(),
            rows.iter().map(|r| r.2).collect(),
        )
    }

    fn finish(source: Source, knots: Vec<f64>, prefix: Vec<f64>) -> Result<Self> {
        let total = *prefix.last().unwrap();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Domain(format!(
                "total length {total} must be positive"
            )));
        }
        Ok(SpeedProfile {
            source,
            knots,
            prefix,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    /// `c = int_{x0}^{x1} g`.
    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    pub fn speed(&self, t: f64) -> f64 {
        match &self.source {
            Source::Function(f) => f(t),
            Source::Sampled { g } => {
                let i = self.panel(t);
                let (a, b) = (self.knots[i], self.knots[i + 1]);
                lerp(g[i], g[i + 1], (t - a) / (b - a))
            }
        }
    }

    /// Index `i` of the panel `[knots[i], knots[i+1]]` containing `t`.
    fn panel(&self, t: f64) -> usize {
        let i = self.knots.partition_point(|&k| k <= t);
        i.clamp(1, self.knots.len() - 1) - 1
    }

    fn integral_to(&self, t: f64) -> f64 {
        let i = self.panel(t);
        let a = self.knots[i];
        let partial = match &self.source {
            Source::Sampled { g } => {
                let h = self.knots[i + 1] - a;
                let s = t - a;
                g[i] * s + (g[i + 1] - g[i]) * s * s / (2.0 * h)
            }
            Source::Function(f) => {
                let tol = QUADRATURE_TOL * 1e-3 / FN_PANELS as f64;
                adaptive_simpson(f.as_ref(), a, t, tol)
            }
        };
        self.prefix[i] + partial
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let (x0, x1) = self.domain();
        if !(x0..=x1).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [{x0}, {x1}]")));
        }
        Ok(())
    }

    /// `psi(t)`.
    pub fn cumulative(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok((self.integral_to(t) / self.total()).clamp(0.0, 1.0))
    }

    /// `phi(s) = psi^{-1}(s)`.
    pub fn inverse_cumulative(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Domain(format!("s = {s} outside [0, 1]")));
        }
        let (x0, x1) = self.domain();
        if s == 0.0 {
            return Ok(x0);
        }
        if s == 1.0 {
            return Ok(x1);
        }
        let target = s * self.total();
        let i = (self.prefix.partition_point(|&p| p <= target)).clamp(1, self.knots.len() - 1) - 1;
        let (lo, hi) = (self.knots[i], self.knots[i + 1]);
        let rem = target - self.prefix[i];
        let x = match &self.source {
            Source::Sampled { g } => {
                // g_i u + (g_{i+1} - g_i) u^2 / (2h) = rem, solved without cancellation
                let h = hi - lo;
                let a = (g[i + 1] - g[i]) / (2.0 * h);
                let b = g[i];
                let u = if a == 0.0 {
                    rem / b
                } else {
                    2.0 * rem / (b + (b * b + 4.0 * a * rem).max(0.0).sqrt())
                };
                (lo + u).clamp(lo, hi)
            }
            Source::Function(f) => self.solve_panel(f.as_ref(), lo, hi, target),
        };
        Ok(x)
    }

    /// Safeguarded Newton on `int g = target` inside one panel.
    fn solve_panel(&self, g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, target: f64) -> f64 {
        let c = self.total();
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let r = self.integral_to(x) - target;
            if (r / c).abs() <= 1e-13 {
                break;
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let slope = g(x);
            let newton = x - r / slope;
            x = if slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
                break;
            }
        }
        x
    }

    /// `h(phi(s))`: turns a curve with `|h'| = g` into one of constant
    /// speed `c` on `[0, 1]`.
    pub fn pull_back<H: Fn(f64) -> PlaneVec>(&self, h: H, s: f64) -> Result<PlaneVec> {
        Ok(h(self.inverse_cumulative(s)?))
    }
}

fn check_speed(t: f64, v: f64, endpoint: bool) -> Result<()> {
    let ok = v.is_finite() && (v > 0.0 || (endpoint && v == 0.0));
    if !ok {
        return Err(Error::Domain(format!("speed g({t}) = {v} is not positive")));
    }
    Ok(())
}

#[inline]
fn lerp(a: f64, b: f64, u: f64) -> f64 {
    a + (b - a) * u
}

fn adaptive_simpson<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// A unit-speed curve carried onto the domain of a speed profile.
#[derive(Clone, Debug)]
pub struct Transported {
    profile: SpeedProfile,
    /// Source parameters in `[0, 1]` and source points.
    source_params: Vec<f64>,
    source_points: Vec<PlaneVec>,
    anchor: PlaneVec,
    /// Preimages `phi(s_m)` of the source vertices, and the image points.
    params: Vec<f64>,
    points: Vec<PlaneVec>,
}

impl Transported {
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn points(&self) -> &[PlaneVec] {
        &self.points
    }

    pub fn profile(&self) -> &SpeedProfile {
        &self.profile
    }

    pub fn closure_defect(&self) -> f64 {
        self.points[0].distance(*self.points.last().unwrap())
    }

    /// `h(t) = F(psi(t))`.
    pub fn eval(&self, t: f64) -> Result<PlaneVec> {
        let s = self.profile.cumulative(t)?;
        let i = self
            .source_params
            .partition_point(|&p| p <= s)
            .clamp(1, self.source_params.len() - 1)
            - 1;
        let (s0, s1) = (self.source_params[i], self.source_params[i + 1]);
        let (p, q) = (self.source_points[i], self.source_points[i + 1]);
        let f = p + (q - p) * ((s - s0) / (s1 - s0));
        Ok(self.anchor + (f - self.anchor) * self.profile.total())
    }

    /// Compares the secant speed of the vertex segment containing each
    /// probe with `g` at the probe.
    pub fn speed_check(&self, probes: &[f64]) -> SpeedReport {
        let mut max_abs = 0.0f64;
        let mut max_g = 0.0f64;
        for &t in probes {
            let i = self
                .params
                .partition_point(|&p| p <= t)
                .clamp(1, self.params.len() - 1)
                - 1;
            let dt = self.params[i + 1] - self.params[i];
            if dt <= 0.0 {
                continue;
            }
            let fd = self.points[i].distance(self.points[i + 1]) / dt;
            let g = self.profile.speed(t);
            max_abs = max_abs.max((fd - g).abs());
            max_g = max_g.max(g);
        }
        SpeedReport {
            probes: probes.len(),
            max_abs_deviation: max_abs,
            max_speed: max_g,
        }
    }

    /// [`Self::speed_check`] at `count` evenly spaced interior probes.
    pub fn speed_check_grid(&self, count: usize) -> SpeedReport {
        let (x0, x1) = self.profile.domain();
        let probes: Vec<f64> = (0..count)
            .map(|i| lerp(x0, x1, (i as f64 + 0.5) / count as f64))
            .collect();
        self.speed_check(&probes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpeedReport {
    pub probes: usize,
    pub max_abs_deviation: f64,
    pub max_speed: f64,
}

impl SpeedReport {
    /// Largest deviation as a fraction of `max g`.
    pub fn relative(&self) -> f64 {
        if self.max_speed > 0.0 {
            self.max_abs_deviation / self.max_speed
        } else {
            0.0
        }
    }
}

/// Carries a curve parametrized on `[0, 1]` onto the profile's domain:
/// `h = F o psi` with `F = p_0 + c (f - p_0)`, so a unit-speed `f` gives
/// `|h'| = g`. Vertices of `f` map to the points `phi(s_m)`.
pub fn transport_polyline(
    sp: &SpeedProfile,
    params: &[f64],
    points: &[PlaneVec],
) -> Result<Transported> {
    if params.len() != points.len() || params.len() < 2 {
        return Err(Error::Config("curve needs at least two vertices".into()));
    }
    if params[0] != 0.0 || *params.last().unwrap() != 1.0 {
        return Err(Error::Config(format!(
            "curve must be parametrized on [0, 1], got [{}, {}]",
            params[0],
            params.last().unwrap()
        )));
    }
    if params.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(
            "curve parameters must increase strictly".into(),
        ));
    }
    let c = sp.total();
    let anchor = points[0];
    let mapped = params
        .iter()
        .map(|&s| sp.inverse_cumulative(s))
        .collect::<Result<Vec<_>>>()?;
    let image = points.iter().map(|&p| anchor + (p - anchor) * c).collect();
    Ok(Transported {
        profile: sp.clone(),
        source_params: params.to_vec(),
        source_points: points.to_vec(),
        anchor,
        params: mapped,
        points: image,
    })
}

pub fn transport(sp: &SpeedProfile, f: &IsometricPath) -> Result<Transported> {
    transport_polyline(sp, &f.params(), f.vertices())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{sample_closed, sample_open, Resolution};
    use crate::schedule::RadiusSchedule;

    fn ramp_fn() -> SpeedProfile {
        SpeedProfile::from_fn(0.0, 1.0, |t| 2.0 * t).unwrap()
    }

    fn ramp_samples(n: usize) -> SpeedProfile {
        let t: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let g = t.iter().map(|x| 2.0 * x).collect();
        SpeedProfile::from_samples(t, g).unwrap()
    }

    #[test]
    fn constant_profile_is_affine() {
        for kappa in [0.3, 1.0, 7.0] {
            let sp = SpeedProfile::constant(0.0, 1.0, kappa).unwrap();
            for i in 0..=100 {
                let t = i as f64 / 100.0;
                assert!((sp.cumulative(t).unwrap() - t).abs() < 1e-15);
                assert!((sp.inverse_cumulative(t).unwrap() - t).abs() < 1e-15);
            }
        }
        let sp = SpeedProfile::from_fn(2.0, 5.0, |_| 0.5).unwrap();
        assert!((sp.total() - 1.5).abs() < 1e-14);
        assert!((sp.inverse_cumulative(0.25).unwrap() - 2.75).abs() < 1e-12);
    }

    #[test]
    fn ramp_closed_forms() {
        for sp in [ramp_fn(), ramp_samples(1000), ramp_samples(2)] {
            assert!((sp.total() - 1.0).abs() < 1e-12);
            for i in 0..=1000 {
                let t = i as f64 / 1000.0;
                assert!((sp.cumulative(t).unwrap() - t * t).abs() <= QUADRATURE_TOL);
                assert!((sp.inverse_cumulative(t).unwrap() - t.sqrt()).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn round_trip_and_monotone() {
        let profiles = [
            ramp_fn(),
            SpeedProfile::from_fn(-1.0, 2.0, |t| 1.0 + t * t).unwrap(),
            SpeedProfile::from_fn(0.0, 3.0, |t| 2.0 + (5.0 * t).sin()).unwrap(),
            SpeedProfile::from_samples(vec![0.0, 0.1, 0.5, 2.0], vec![1.0, 3.0, 0.2, 4.0]).unwrap(),
        ];
        for sp in &profiles {
            let (x0, x1) = sp.domain();
            let mut prev = -1.0;
            for i in 0..=1000 {
                let s = i as f64 / 1000.0;
                let x = sp.inverse_cumulative(s).unwrap();
                assert!((sp.cumulative(x).unwrap() - s).abs() <= INVERSE_TOL);
                let t = x0 + (x1 - x0) * s;
                let psi = sp.cumulative(t).unwrap();
                assert!(psi > prev || (i == 0 && psi == 0.0));
                prev = psi;
            }
            assert!(sp.cumulative(x0).unwrap().abs() < 1e-15);
            assert!((sp.cumulative(x1).unwrap() - 1.0).abs() <= QUADRATURE_TOL);
        }
    }

    #[test]
    fn random_polynomial_profiles_integrate_to_one() {
        let mut state = 7u64;
        let mut uniform = || {
            state = crate::bitsource::mix64(state);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let coef: Vec<f64> = (0..4).map(|_| 0.1 + uniform()).collect();
            let c2 = coef.clone();
            let sp = SpeedProfile::from_fn(0.0, 2.0, move |t| {
                c2.iter().rev().fold(0.0, |acc, a| acc * t + a)
            })
            .unwrap();
            // exact antiderivative as oracle
            let exact: f64 = coef
                .iter()
                .enumerate()
                .map(|(i, a)| a * 2f64.powi(i as i32 + 1) / (i as f64 + 1.0))
                .sum();
            assert!((sp.total() - exact).abs() < 1e-10 * exact);
            assert!((sp.cumulative(2.0).unwrap() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn rejects_non_positive_speeds() {
        assert!(SpeedProfile::from_samples(vec![0.0, 0.5, 1.0], vec![1.0, 0.0, 1.0]).is_err());
        assert!(SpeedProfile::from_samples(vec![0.0, 1.0], vec![-1.0, 1.0]).is_err());
        assert!(SpeedProfile::from_samples(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(SpeedProfile::from_samples(vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(SpeedProfile::from_fn(0.0, 1.0, |t| t - 0.5).is_err());
        assert!(SpeedProfile::constant(0.0, 1.0, 0.0).is_err());
        assert!(SpeedProfile::from_fn(1.0, 0.0, |_| 1.0).is_err());
    }

    #[test]
    fn identity_transport_leaves_curve_alone() {
        let sch = RadiusSchedule::geometric(0.25, 0.5).unwrap();
        let f = sample_open(
            PlaneVec::ZERO,
            PlaneVec::new(0.5, 0.0),
            &sch,
            Resolution::Depth(8),
            2,
        )
        .unwrap();
        let sp = SpeedProfile::constant(0.0, 1.0, 1.0).unwrap();
        let h = transport(&sp, &f).unwrap();
        for (p, q) in h.points().iter().zip(f.vertices()) {
            assert!(p.distance(*q) < 1e-15);
        }
        for (a, b) in h.params().iter().zip(f.params()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(h.eval(0.37).unwrap().distance(f.eval(0.37).unwrap()) < 1e-15);
    }

    #[test]
    fn ramp_speed_law() {
        let sch = RadiusSchedule::geometric(0.25, 0.5).unwrap();
        let f = sample_open(
            PlaneVec::ZERO,
            PlaneVec::new(0.3, 0.4),
            &sch,
            Resolution::Depth(16),
            9,
        )
        .unwrap();
        for sp in [ramp_fn(), ramp_samples(1000)] {
            let h = transport(&sp, &f).unwrap();
            let report = h.speed_check_grid(1000);
            assert!(report.relative() < 0.01, "{report:?}");
            // vertex images are exact evaluations
            for m in (0..f.vertices().len()).step_by(997) {
                let t = h.params()[m];
                assert!(h.eval(t).unwrap().distance(h.points()[m]) < 1e-9);
            }
        }
    }

    #[test]
    fn closed_stays_closed() {
        let sch = RadiusSchedule::geometric(0.0, 0.5).unwrap();
        let f =
            sample_closed(PlaneVec::new(1.0, 1.0), &sch, Resolution::Depth(12), 3, 0.4).unwrap();
        let sp = SpeedProfile::from_fn(0.0, 4.0, |t| 1.0 + t).unwrap();
        let h = transport(&sp, &f).unwrap();
        assert!(h.closure_defect() <= 1e-9);
        assert_eq!(h.params()[0], 0.0);
        assert_eq!(*h.params().last().unwrap(), 4.0);
    }

    #[test]
    fn pull_back_gives_constant_speed() {
        // h(t) = (t^2, 0) has |h'| = 2t
        let sp = ramp_fn();
        let h = |t: f64| PlaneVec::new(t * t, 0.0);
        for i in 0..100 {
            let s = i as f64 / 100.0;
            let ds = 1e-4;
            let a = sp.pull_back(h, s).unwrap();
            let b = sp.pull_back(h, s + ds).unwrap();
            assert!((a.distance(b) / ds - sp.total()).abs() < 1e-4);
        }
    }

    #[test]
    fn domain_mismatch() {
        let sp = ramp_fn();
        let pts = [PlaneVec::ZERO, PlaneVec::new(1.0, 0.0)];
        assert!(matches!(
            transport_polyline(&sp, &[0.0, 0.5], &pts),
            Err(Error::Config(_))
        ));
        assert!(sp.cumulative(1.5).is_err());
        assert!(sp.inverse_cumulative(-0.1).is_err());
    }

    #[test]
    fn csv_profiles() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        std::fs::write(&p, "t,g\n0,1\n0.5,2\n1,1\n").unwrap();
        let sp = SpeedProfile::from_csv(&p).unwrap();
        assert!((sp.total() - 1.5).abs() < 1e-15);
        std::fs::write(&p, "t,g\n0,1\n0.5,x\n1,1\n").unwrap();
        match SpeedProfile::from_csv(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        std::fs::write(&p, "time,speed\n0,1\n").unwrap();
        assert!(matches!(
            SpeedProfile::from_csv(&p),
            Err(Error::Parse { line: 1, .. })
        ));
        std::fs::write(&p, "t,g\n0,1\n0.5,-2\n1,1\n").unwrap();
        assert!(matches!(
            SpeedProfile::from_csv(&p),
            Err(Error::Parse { line: 3, .. })
        ));
        std::fs::write(&p, "t,g\n0,1\n0.5,2\n0.4,1\n").unwrap();
        assert!(matches!(
            SpeedProfile::from_csv(&p),
            Err(Error::Parse { line: 4, .. })
        ));
    }
}
