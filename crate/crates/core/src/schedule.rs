//! Radius schedules `c_0 < c_1 < ... -> 1` with square-root-summable
//! increments.
//!
//! Values are stored as complements `1 - c_k`. Near the limit `c_k` itself
//! rounds to 1 long before the increments stop mattering, while the
//! complement keeps full relative precision at every level.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Levels kept in the precomputed tables. Walk depth is capped well below this.
pub const TABLE_DEPTH: usize = 64;

/// Summation stops once a term drops below this fraction of the partial sum.
const TAIL_STOP: f64 = 1e-17;
const TAIL_ACCEPT: f64 = 1e-12;
const TAIL_MAX_TERMS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleKind {
    /// `c_n = c_{n-1} + ratio * (1 - c_{n-1})`.
    Geometric { ratio: f64 },
    /// Per-step angle exactly `2^-k`; forces `c_0 = sin^2(1)`.
    UniformAngle,
    /// Explicit prefix `c_0..=c_N`, continued geometrically with `tail_ratio`.
    Custom { tail_ratio: f64 },
}

#[derive(Clone, Debug)]
pub struct RadiusSchedule {
    kind: ScheduleKind,
    /// `c_0` as given; `1 - (1 - c_0)` loses relative precision when `c_0` is small.
    c0: f64,
    /// `1 - c_k` for `k = 0..=max(TABLE_DEPTH, prefix length)`.
    complements: Vec<f64>,
    /// `angles[k] = arcsin sqrt((c_k - c_{k-1}) / c_k)`; `angles[0]` is unused.
    angles: Vec<f64>,
    /// `tails[n] = sum_{k > n} angles[k]`.
    tails: Vec<f64>,
    descriptor: String,
}

impl RadiusSchedule {
    pub fn geometric(c0: f64, ratio: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&c0) {
            return Err(Error::Domain(format!("c0 = {c0} outside [0, 1)")));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Domain(format!("ratio = {ratio} outside (0, 1)")));
        }
        let mut complements = Vec::with_capacity(TABLE_DEPTH + 1);
        let mut g = 1.0 - c0;
        complements.push(g);
        for _ in 0..TABLE_DEPTH {
            g *= 1.0 - ratio;
            complements.push(g);
        }
        let mut s = Self::build(
            ScheduleKind::Geometric { ratio },
            complements,
            format!("geometric:{c0}:{ratio}"),
        )?;
        s.c0 = c0;
        Ok(s)
    }

    pub fn uniform_angle() -> Self {
        let complements = (0..=TABLE_DEPTH)
            .map(|k| uniform_angle_complement(k as i32))
            .collect();
        Self::build(
            ScheduleKind::UniformAngle,
            complements,
            "uniform-angle".into(),
        )
        .expect("uniform-angle tail is geometric")
    }

    /// A finite prefix `c_0..=c_N` (`N >= 1`). Past `N` the sequence continues
    /// with `c_n = c_{n-1} + r (1 - c_{n-1})`; `r` defaults to the ratio of the
    /// last observed step.
    pub fn custom(values: &[f64], tail_ratio: Option<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Config(
                "custom schedule needs at least c_0 and c_1".into(),
            ));
        }
        if !(0.0..1.0).contains(&values[0]) {
            return Err(Error::Domain(format!("c_0 = {} outside [0, 1)", values[0])));
        }
        for (k, w) in values.windows(2).enumerate() {
            if !(w[1] > w[0] && w[1] < 1.0) {
                return Err(Error::Config(format!(
                    "custom schedule must satisfy c_{} < c_{} < 1 (got {} then {})",
                    k,
                    k + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        let n = values.len() - 1;
        let ratio = match tail_ratio {
            Some(r) => r,
            None => (values[n] - values[n - 1]) / (1.0 - values[n - 1]),
        };
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Domain(format!(
                "tail ratio = {ratio} outside (0, 1)"
            )));
        }
        let mut complements: Vec<f64> = values.iter().map(|c| 1.0 - c).collect();
        while complements.len() <= TABLE_DEPTH {
            let last = *complements.last().unwrap();
            complements.push(last * (1.0 - ratio));
        }
        let mut s = Self::build(
            ScheduleKind::Custom { tail_ratio: ratio },
            complements,
            format!("custom[{} values, tail {}]", values.len(), ratio),
        )?;
        s.c0 = values[0];
        Ok(s)
    }

    /// Parses `geometric:<c0>:<alpha>`, `uniform-angle` or `custom:<csv>`.
    pub fn from_descriptor(desc: &str) -> Result<Self> {
        let desc = desc.trim();
        if desc == "uniform-angle" {
            return Ok(Self::uniform_angle());
        }
        if let Some(rest) = desc.strip_prefix("geometric:") {
            let mut parts = rest.split(':');
            let (Some(c0), Some(ratio), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Config(format!(
                    "expected geometric:<c0>:<alpha>, got {desc:?}"
                )));
            };
            let c0 = parse_f64(c0, "c0")?;
            let ratio = parse_f64(ratio, "alpha")?;
            let mut s = Self::geometric(c0, ratio)?;
            s.descriptor = desc.to_string();
            return Ok(s);
        }
        if let Some(path) = desc.strip_prefix("custom:") {
            let values = read_custom_csv(Path::new(path))?;
            let mut s = Self::custom(&values, None)?;
            s.descriptor = desc.to_string();
            return Ok(s);
        }
        Err(Error::Config(format!(
            "unknown schedule descriptor {desc:?}"
        )))
    }

    fn build(kind: ScheduleKind, complements: Vec<f64>, descriptor: String) -> Result<Self> {
        let mut s = RadiusSchedule {
            kind,
            c0: 1.0 - complements[0],
            complements,
            angles: Vec::new(),
            tails: Vec::new(),
            descriptor,
        };
        let depth = s.complements.len() - 1;
        s.angles = std::iter::once(0.0)
            .chain((1..=depth).map(|k| s.compute_angle(k)))
            .collect();
        let far_tail = match s.kind {
            ScheduleKind::UniformAngle => (-(depth as f64)).exp2(),
            _ => s.sum_angles_from(depth + 1)?,
        };
        let mut tails = vec![0.0; depth + 1];
        tails[depth] = far_tail;
        for n in (0..depth).rev() {
            tails[n] = match s.kind {
                ScheduleKind::UniformAngle => (-(n as f64)).exp2(),
                _ => tails[n + 1] + s.angles[n + 1],
            };
        }
        s.tails = tails;
        Ok(s)
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn is_uniform_angle(&self) -> bool {
        self.kind == ScheduleKind::UniformAngle
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// `c_k`.
    pub fn c(&self, k: usize) -> f64 {
        if k == 0 {
            self.c0
        } else {
            1.0 - self.complement(k)
        }
    }

    /// `1 - c_k`, accurate to full relative precision.
    pub fn complement(&self, k: usize) -> f64 {
        if let Some(&g) = self.complements.get(k) {
            return g;
        }
        let last = self.complements.len() - 1;
        match self.kind {
            ScheduleKind::Geometric { ratio } | ScheduleKind::Custom { tail_ratio: ratio } => {
                self.complements[last] * (1.0 - ratio).powi((k - last) as i32)
            }
            ScheduleKind::UniformAngle => uniform_angle_complement(k as i32),
        }
    }

    /// `sqrt(c_k)`, the speed of the depth-`k` walk.
    pub fn speed(&self, k: usize) -> f64 {
        self.c(k).sqrt()
    }

    /// `1 - sqrt(c_k)` without cancellation.
    pub fn speed_deficit(&self, k: usize) -> f64 {
        let g = self.complement(k);
        g / (1.0 + (1.0 - g).sqrt())
    }

    /// `c_k - c_{k-1}` for `k >= 1`.
    pub fn increment(&self, k: usize) -> f64 {
        assert!(k >= 1, "increments start at k = 1");
        match self.kind {
            ScheduleKind::Geometric { ratio } => ratio * self.complement(k - 1),
            _ => self.complement(k - 1) - self.complement(k),
        }
    }

    /// `phi_k = arcsin sqrt((c_k - c_{k-1}) / c_k)` for `k >= 1`.
    pub fn angle(&self, k: usize) -> f64 {
        assert!(k >= 1, "angles start at k = 1");
        match self.angles.get(k) {
            Some(&a) => a,
            None => self.compute_angle(k),
        }
    }

    /// `T_n = sum_{k > n} phi_k`, the largest possible change of the angle
    /// process after level `n`.
    pub fn tail_angle(&self, n: usize) -> f64 {
        if let Some(&t) = self.tails.get(n) {
            return t;
        }
        match self.kind {
            ScheduleKind::UniformAngle => (-(n as f64)).exp2(),
            _ => self
                .sum_angles_from(n + 1)
                .expect("tail converged at construction"),
        }
    }

    fn compute_angle(&self, k: usize) -> f64 {
        match self.kind {
            ScheduleKind::UniformAngle => (-(k as f64)).exp2(),
            _ => {
                // c_k = c_{k-1} + inc keeps phi_1 = pi/2 exact when c_0 = 0
                let inc = self.increment(k);
                let s2 = inc / ((1.0 - self.complement(k - 1)) + inc);
                if s2 >= 1.0 {
                    FRAC_PI_2
                } else {
                    s2.sqrt().asin()
                }
            }
        }
    }

    fn sum_angles_from(&self, start: usize) -> Result<f64> {
        let mut sum = 0.0;
        let mut term = f64::INFINITY;
        for k in start..start + TAIL_MAX_TERMS {
            term = self.compute_angle(k);
            sum += term;
            if term <= TAIL_STOP * sum || term < f64::MIN_POSITIVE {
                return Ok(sum);
            }
        }
        if term < TAIL_ACCEPT {
            Ok(sum)
        } else {
            Err(Error::Divergent(format!(
                "angle terms still {term:e} after {TAIL_MAX_TERMS} levels"
            )))
        }
    }
}

impl fmt::Display for RadiusSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor)
    }
}

/// `1 - (sin x / x)^2` at `x = 2^-k`. With `phi_i = 2^-i` and `c_k -> 1`,
/// `c_k = prod_{i > k} cos^2(2^-i) = (sin x / x)^2`.
fn uniform_angle_complement(k: i32) -> f64 {
    let x = (-(k as f64)).exp2();
    // x - sin x by its alternating series; x <= 1 so 12 terms is plenty.
    let x2 = x * x;
    let mut term = x * x2 / 6.0;
    let mut x_minus_sin = 0.0;
    for m in 1..12 {
        x_minus_sin += term;
        let a = (2 * m + 2) as f64;
        let b = (2 * m + 3) as f64;
        term *= -x2 / (a * b);
    }
    let one_minus_s = x_minus_sin / x;
    one_minus_s * (2.0 - one_minus_s)
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {what} from {s:?}")))
}

fn read_custom_csv(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            path: PathBuf::from(path),
            line: i as u64 + 1,
            message: format!("expected a number, got {line:?}"),
        })?;
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn geometric_half_from_zero() {
        let s = RadiusSchedule::geometric(0.0, 0.5).unwrap();
        let expect = [0.0, 0.5, 0.75, 0.875, 0.9375];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(s.c(k), *e);
        }
        // iterated recurrence as oracle
        let mut c = 0.0f64;
        for n in 0..=50 {
            assert!(rel(s.complement(n), (-(n as f64)).exp2()) < 1e-15);
            assert!((s.c(n) - c).abs() <= 1e-15);
            c += 0.5 * (1.0 - c);
        }
    }

    #[test]
    fn geometric_near_one() {
        for ratio in [0.1, 0.5, 0.9] {
            let s = RadiusSchedule::geometric(0.99, ratio).unwrap();
            assert!((s.c(1) - (0.99 + ratio * 0.01)).abs() < 1e-15);
        }
    }

    #[test]
    fn geometric_closed_form() {
        for (c0, ratio) in [(0.0, 0.5), (0.3, 0.25), (0.81, 0.7), (0.5, 0.01)] {
            let s = RadiusSchedule::geometric(c0, ratio).unwrap();
            for n in 0..=60 {
                let expect = (1.0 - ratio).powi(n as i32) * (1.0 - c0);
                assert!(
                    rel(s.complement(n), expect) < 1e-14,
                    "c0={c0} ratio={ratio} n={n}"
                );
            }
        }
    }

    #[test]
    fn geometric_rejects_bad_parameters() {
        assert!(RadiusSchedule::geometric(1.0, 0.5).is_err());
        assert!(RadiusSchedule::geometric(-0.1, 0.5).is_err());
        assert!(RadiusSchedule::geometric(0.2, 0.0).is_err());
        assert!(RadiusSchedule::geometric(0.2, 1.0).is_err());
        assert!(RadiusSchedule::geometric(0.2, f64::NAN).is_err());
    }

    #[test]
    fn slow_geometric_is_rejected_as_divergent() {
        let err = RadiusSchedule::geometric(0.0, 1e-7).unwrap_err();
        assert!(matches!(err, Error::Divergent(_)), "{err}");
    }

    #[test]
    fn uniform_angle_constants() {
        // oracle: partial products of cos^2(2^-k)
        let prod: f64 = (1..=40)
            .map(|k| (-(k as f64)).exp2().cos().powi(2))
            .product();
        let s = RadiusSchedule::uniform_angle();
        assert!((prod - 1f64.sin().powi(2)).abs() < 1e-12);
        assert!((s.c0() - prod).abs() < 1e-12);
        assert!((s.c0() - 0.7080734183).abs() < 1e-10);
        let c1 = prod / 0.5f64.cos().powi(2);
        assert!((s.c(1) - c1).abs() < 1e-12);
        assert!((s.c(1) - 0.9193953883).abs() < 1e-10);
    }

    #[test]
    fn uniform_angle_recurrence_and_limit() {
        let s = RadiusSchedule::uniform_angle();
        for n in 1..=TABLE_DEPTH {
            let via = s.c(n - 1) / (-(n as f64)).exp2().cos().powi(2);
            assert!((s.c(n) - via).abs() <= 1e-15, "n={n}");
            assert_eq!(s.angle(n), (-(n as f64)).exp2());
            // angle recovered from the radii agrees with the defining angle
            let from_radii = (s.increment(n) / s.c(n)).sqrt().asin();
            assert!(
                (from_radii - s.angle(n)).abs() <= 1e-15 + 1e-6 * s.angle(n),
                "n={n}"
            );
        }
        assert!((s.c(40) - 1.0).abs() <= 1e-12);
        assert_eq!(s.tail_angle(5), 0.03125);
    }

    #[test]
    fn angles_in_range_and_first_is_right_angle_only_from_zero() {
        for (c0, ratio) in [(0.0, 0.5), (0.0, 0.3), (0.2, 0.5), (0.64, 0.9)] {
            let s = RadiusSchedule::geometric(c0, ratio).unwrap();
            for k in 1..=80 {
                let a = s.angle(k);
                assert!(a > 0.0 && a <= FRAC_PI_2, "k={k} a={a}");
            }
            assert_eq!(s.angle(1) == FRAC_PI_2, c0 == 0.0);
        }
        let u = RadiusSchedule::uniform_angle();
        assert!(u.angle(1) < FRAC_PI_2);
    }

    #[test]
    fn tail_matches_direct_summation() {
        let s = RadiusSchedule::geometric(0.0, 0.5).unwrap();
        let mut prev = f64::INFINITY;
        for n in 0..=70 {
            // 10^4-term direct oracle using the textbook formula
            let direct: f64 = (n + 1..n + 10_001)
                .map(|k| {
                    let ck = 1.0 - (-(k as f64)).exp2();
                    let inc = (-(k as f64)).exp2();
                    (inc / ck).sqrt().asin()
                })
                .sum();
            let t = s.tail_angle(n);
            assert!(
                (t - direct).abs() <= 1e-13 * direct.max(1e-300) + 1e-300,
                "n={n} {t} {direct}"
            );
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn tails_monotone_for_all_kinds() {
        let schedules = [
            RadiusSchedule::geometric(0.3, 0.2).unwrap(),
            RadiusSchedule::uniform_angle(),
            RadiusSchedule::custom(&[0.1, 0.4, 0.6, 0.7], None).unwrap(),
        ];
        for s in &schedules {
            for n in 0..100 {
                assert!(s.tail_angle(n) >= s.tail_angle(n + 1));
                assert!(s.tail_angle(n + 1) >= 0.0);
            }
            assert!(s.tail_angle(400) < 1e-9);
        }
    }

    #[test]
    fn sqrt_increments_are_summable() {
        for s in [
            RadiusSchedule::geometric(0.0, 0.5).unwrap(),
            RadiusSchedule::uniform_angle(),
        ] {
            let mut settled = None;
            for k in 1..=200 {
                if s.increment(k).sqrt() < 1e-12 {
                    settled = Some(k);
                    break;
                }
            }
            let n = settled.expect("increments fall below 1e-12");
            assert!(n <= 200);
            for k in n..n + 50 {
                assert!(s.increment(k).sqrt() < 1e-12);
            }
        }
    }

    #[test]
    fn custom_validation_and_tail() {
        assert!(RadiusSchedule::custom(&[0.5], None).is_err());
        assert!(RadiusSchedule::custom(&[0.5, 0.4], None).is_err());
        assert!(RadiusSchedule::custom(&[0.5, 1.0], None).is_err());
        assert!(RadiusSchedule::custom(&[1.0, 1.5], None).is_err());
        let s = RadiusSchedule::custom(&[0.0, 0.5, 0.75], None).unwrap();
        let g = RadiusSchedule::geometric(0.0, 0.5).unwrap();
        for k in 0..=70 {
            assert!(rel(s.complement(k), g.complement(k)) < 1e-14);
        }
        assert_eq!(s.kind(), &ScheduleKind::Custom { tail_ratio: 0.5 });
    }

    #[test]
    fn descriptors() {
        let s = RadiusSchedule::from_descriptor("geometric:0.25:0.5").unwrap();
        assert_eq!(s.c0(), 0.25);
        assert_eq!(s.descriptor(), "geometric:0.25:0.5");
        assert!(RadiusSchedule::from_descriptor("uniform-angle")
            .unwrap()
            .is_uniform_angle());
        assert!(RadiusSchedule::from_descriptor("geometric:0.25").is_err());
        assert!(RadiusSchedule::from_descriptor("linear:0.1").is_err());

        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        std::fs::write(&p, "0.0\n0.5\n0.75\n").unwrap();
        let s = RadiusSchedule::from_descriptor(&format!("custom:{}", p.display())).unwrap();
        assert_eq!(s.c(2), 0.75);
        std::fs::write(&p, "0.0\nabc\n").unwrap();
        match RadiusSchedule::from_descriptor(&format!("custom:{}", p.display())) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_c0_is_kept_exactly() {
        let c0 = 1e-3f64 * 1e-3;
        let s = RadiusSchedule::geometric(c0, 0.5).unwrap();
        assert_eq!(s.c0(), c0);
        assert_eq!(s.speed(0), c0.sqrt());
        assert_ne!(1.0 - s.complement(0), c0);
    }
}
