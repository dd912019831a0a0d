use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A vector (or point) in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PlaneVec {
    pub x: f64,
    pub y: f64,
}

impl PlaneVec {
    pub const ZERO: PlaneVec = PlaneVec { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        PlaneVec { x, y }
    }

    #[inline]
    pub fn from_polar(radius: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        PlaneVec::new(radius * c, radius * s)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    #[inline]
    pub fn distance(self, other: PlaneVec) -> f64 {
        (self - other).norm()
    }

    /// Rotation about the origin.
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        PlaneVec::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Midpoint of `a` and `b`.
    #[inline]
    pub fn midpoint(a: PlaneVec, b: PlaneVec) -> PlaneVec {
        PlaneVec::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
    }
}

impl Add for PlaneVec {
    type Output = PlaneVec;
    #[inline]
    fn add(self, o: PlaneVec) -> PlaneVec {
        PlaneVec::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for PlaneVec {
    #[inline]
    fn add_assign(&mut self, o: PlaneVec) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for PlaneVec {
    type Output = PlaneVec;
    #[inline]
    fn sub(self, o: PlaneVec) -> PlaneVec {
        PlaneVec::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for PlaneVec {
    type Output = PlaneVec;
    #[inline]
    fn neg(self) -> PlaneVec {
        PlaneVec::new(-self.x, -self.y)
    }
}

impl Mul<f64> for PlaneVec {
    type Output = PlaneVec;
    #[inline]
    fn mul(self, s: f64) -> PlaneVec {
        PlaneVec::new(self.x * s, self.y * s)
    }
}

/// Pairwise (tree) sum; rounding error grows with `log n` rather than `n`.
pub fn pairwise_sum(v: &[PlaneVec]) -> PlaneVec {
    match v.len() {
        0 => PlaneVec::ZERO,
        1 => v[0],
        n if n <= 8 => v.iter().fold(PlaneVec::ZERO, |acc, &p| acc + p),
        n => {
            let (l, r) = v.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}
