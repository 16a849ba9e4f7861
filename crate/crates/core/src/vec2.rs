//! Minimal 2-D vector / matrix helpers used throughout the crate.
//!
//! Everything here is `f64`-valued and `Copy`; the crate deliberately avoids a
//! full linear-algebra dependency because only a handful of 2x2 operations are
//! needed.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A point or vector in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Counterclockwise quarter turn: `J v = (-v_y, v_x)`.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    #[inline]
    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        self.scale(s)
    }
}

/// Real 2x2 matrix, row-major: `m[i][j]` is row `i`, column `j`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0; 2]; 2]);

    #[inline]
    pub fn apply(self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.0[0][0] * v.x + self.0[0][1] * v.y,
            self.0[1][0] * v.x + self.0[1][1] * v.y,
        )
    }

    #[inline]
    pub fn transpose(self) -> Mat2 {
        Mat2([
            [self.0[0][0], self.0[1][0]],
            [self.0[0][1], self.0[1][1]],
        ])
    }

    /// Rank-one product `a b^T`.
    #[inline]
    pub fn outer(a: Vec2, b: Vec2) -> Mat2 {
        Mat2([[a.x * b.x, a.x * b.y], [a.y * b.x, a.y * b.y]])
    }

    #[inline]
    pub fn sub(self, o: Mat2) -> Mat2 {
        let mut m = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = self.0[i][j] - o.0[i][j];
            }
        }
        m
    }

    /// Quadratic form `v . (M v)`.
    #[inline]
    pub fn quad_form(self, v: Vec2) -> f64 {
        v.dot(self.apply(v))
    }
}

/// Planar rotation `R_theta = [[cos, sin], [-sin, cos]]`; it maps the unit
/// normal of the moving frame onto `e_2` (so `R_theta` turns the lab frame
/// *clockwise* by `theta`).
#[inline]
pub fn rotation(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2([[c, s], [-s, c]])
}
