//! Magnetic vector potentials `A` and the induced field `B = curl A`.
//!
//! Presets cover the scenarios exercised by the experiments: constant field in
//! a half-plane gauge, constant field in the gauge adapted to a circular
//! interface, an idealized flux line (zero field away from a mollified core),
//! and three spatially varying fields (tanh ramp, transverse linear gradient,
//! periodic modulation along the interface).

use std::sync::Arc;

use crate::geometry::{fd_step, DomainWall};
use crate::vec2::{Mat2, Vec2};

type ScalarFn = dyn Fn(Vec2) -> f64 + Send + Sync;
type VectorFn = dyn Fn(Vec2) -> Vec2 + Send + Sync;
type MatrixFn = dyn Fn(Vec2) -> Mat2 + Send + Sync;

/// Vector potential with optional analytic derivatives.
///
/// `grad_a(p)[i][j]` is `d A_j / d x_i`; the field is
/// `B = d A_2/d x_1 - d A_1/d x_2`. Missing derivatives fall back to centered
/// finite differences with the geometric step `1e-5 (1 + |p|)`.
#[derive(Clone)]
pub struct MagneticPotential {
    a: Arc<VectorFn>,
    grad_a: Option<Arc<MatrixFn>>,
    b: Option<Arc<ScalarFn>>,
    grad_b: Option<Arc<VectorFn>>,
}

impl MagneticPotential {
    pub fn from_fn(a: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static) -> Self {
        MagneticPotential {
            a: Arc::new(a),
            grad_a: None,
            b: None,
            grad_b: None,
        }
    }

    pub fn with_derivatives(
        a: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static,
        grad_a: impl Fn(Vec2) -> Mat2 + Send + Sync + 'static,
        b: impl Fn(Vec2) -> f64 + Send + Sync + 'static,
        grad_b: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static,
    ) -> Self {
        MagneticPotential {
            a: Arc::new(a),
            grad_a: Some(Arc::new(grad_a)),
            b: Some(Arc::new(b)),
            grad_b: Some(Arc::new(grad_b)),
        }
    }

    /// No magnetic field at all.
    pub fn zero() -> Self {
        Self::with_derivatives(|_| Vec2::ZERO, |_| Mat2::ZERO, |_| 0.0, |_| Vec2::ZERO)
    }

    /// Constant field `B = b0` in the Landau gauge `A = -b0 x_2 e_1`, which
    /// vanishes on a flat interface along the x-axis.
    pub fn constant(b0: f64) -> Self {
        Self::with_derivatives(
            move |p| Vec2::new(-b0 * p.y, 0.0),
            move |_| Mat2([[0.0, 0.0], [-b0, 0.0]]),
            move |_| b0,
            |_| Vec2::ZERO,
        )
    }

    /// Constant field `B = b0` in the gauge `A = b0 x_1 e_2`, convenient for
    /// circular interfaces (the flux through radius `r` is `pi r^2 b0`).
    pub fn circle_constant(b0: f64) -> Self {
        Self::with_derivatives(
            move |p| Vec2::new(0.0, b0 * p.x),
            move |_| Mat2([[0.0, b0], [0.0, 0.0]]),
            move |_| b0,
            |_| Vec2::ZERO,
        )
    }

    /// Potential aligned with the wall: `A = b0 kappa tau`, which vanishes on
    /// the interface for any wall shape. Derivatives via finite differences.
    pub fn tilted(wall: &DomainWall, b0: f64) -> Self {
        let wall = wall.clone();
        Self::from_fn(move |p| {
            let (_, tau) = wall
                .unit_fields(p)
                .unwrap_or((Vec2::new(0.0, 1.0), Vec2::new(-1.0, 0.0)));
            tau.scale(b0 * wall.kappa(p))
        })
    }

    /// Idealized flux line carrying total flux `phi`, mollified inside radius
    /// `core`: outside, `A = phi/(2 pi r^2) (-x_2, x_1)` and `B = 0`; inside,
    /// the profile is polynomial with a C^1 match at `r = core` and the flux
    /// through every loop enclosing the core is still exactly `phi`.
    pub fn flux_line(phi: f64, core: f64) -> Self {
        assert!(core > 0.0, "flux line needs a positive mollification radius");
        let c2 = core * core;
        let c4 = c2 * c2;
        let k = phi / std::f64::consts::TAU;
        // Write A = h(r^2) (-x_2, x_1). Outside: h = k / r^2; inside:
        // h = (k/c^2) (2 - r^2/c^2), matched in value and derivative at r = c.
        let h = move |r2: f64| -> f64 {
            if r2 >= c2 {
                k / r2
            } else {
                (k / c2) * (2.0 - r2 / c2)
            }
        };
        let dh = move |r2: f64| -> f64 {
            if r2 >= c2 {
                -k / (r2 * r2)
            } else {
                -k / c4
            }
        };
        let a = move |p: Vec2| p.perp().scale(h(p.norm_sq()));
        let grad_a = move |p: Vec2| {
            let r2 = p.norm_sq();
            let (hv, dv) = (h(r2), dh(r2));
            // d/dx_i [h(r^2) (-x_2, x_1)]: product rule with d r^2/d x_i = 2 x_i.
            Mat2([
                [-2.0 * p.x * p.y * dv, hv + 2.0 * p.x * p.x * dv],
                [-hv - 2.0 * p.y * p.y * dv, 2.0 * p.x * p.y * dv],
            ])
        };
        // B = 2 h + 2 r^2 h' vanishes outside the core.
        let b = move |p: Vec2| {
            let r2 = p.norm_sq();
            2.0 * h(r2) + 2.0 * r2 * dh(r2)
        };
        let grad_b = move |p: Vec2| {
            let r2 = p.norm_sq();
            if r2 >= c2 {
                Vec2::ZERO
            } else {
                // B = (k/c^2)(4 - 4 r^2/c^2) inside, so grad B = -8 k x / c^4.
                p.scale(-8.0 * k / c4)
            }
        };
        Self::with_derivatives(a, grad_a, b, grad_b)
    }

    /// Tanh ramp along a flat interface: `B = b0 (1 - tanh(x_1 - x_c))`, in the
    /// gauge `A = -b0 x_2 (1 - tanh(x_1 - x_c)) e_1`.
    pub fn tanh_ramp(b0: f64, x_c: f64) -> Self {
        let f = move |x: f64| 1.0 - (x - x_c).tanh();
        let df = move |x: f64| -(1.0 / (x - x_c).cosh().powi(2));
        Self::with_derivatives(
            move |p| Vec2::new(-b0 * p.y * f(p.x), 0.0),
            move |p| Mat2([[-b0 * p.y * df(p.x), 0.0], [-b0 * f(p.x), 0.0]]),
            move |p| b0 * f(p.x),
            move |p| Vec2::new(b0 * df(p.x), 0.0),
        )
    }

    /// Linear transverse gradient on a flat interface:
    /// `B = b0 + 4 b2 x_2` via `A = -(b0 + 2 b2 x_2) x_2 e_1`.
    pub fn transverse_linear(b0: f64, b2: f64) -> Self {
        Self::with_derivatives(
            move |p| Vec2::new(-(b0 + 2.0 * b2 * p.y) * p.y, 0.0),
            move |p| Mat2([[0.0, 0.0], [-(b0 + 4.0 * b2 * p.y), 0.0]]),
            move |p| b0 + 4.0 * b2 * p.y,
            move |_| Vec2::new(0.0, 4.0 * b2),
        )
    }

    /// Periodic modulation along a flat interface:
    /// `B = b0 + 4 b1 cos(2 pi x_1 / period) x_2` via
    /// `A = -(b0 + 2 b1 cos(2 pi x_1 / period) x_2) x_2 e_1`.
    pub fn periodic(b0: f64, b1: f64, period: f64) -> Self {
        let w = std::f64::consts::TAU / period;
        Self::with_derivatives(
            move |p| Vec2::new(-(b0 + 2.0 * b1 * (w * p.x).cos() * p.y) * p.y, 0.0),
            move |p| {
                Mat2([
                    [2.0 * b1 * w * (w * p.x).sin() * p.y * p.y, 0.0],
                    [-(b0 + 4.0 * b1 * (w * p.x).cos() * p.y), 0.0],
                ])
            },
            move |p| b0 + 4.0 * b1 * (w * p.x).cos() * p.y,
            move |p| {
                Vec2::new(
                    -4.0 * b1 * w * (w * p.x).sin() * p.y,
                    4.0 * b1 * (w * p.x).cos(),
                )
            },
        )
    }

    #[inline]
    pub fn a(&self, p: Vec2) -> Vec2 {
        (self.a)(p)
    }

    pub fn grad_a(&self, p: Vec2) -> Mat2 {
        match &self.grad_a {
            Some(g) => g(p),
            None => {
                let h = fd_step(p);
                let ex = Vec2::new(h, 0.0);
                let ey = Vec2::new(0.0, h);
                let dx = ((self.a)(p + ex) - (self.a)(p - ex)).scale(1.0 / (2.0 * h));
                let dy = ((self.a)(p + ey) - (self.a)(p - ey)).scale(1.0 / (2.0 * h));
                Mat2([[dx.x, dx.y], [dy.x, dy.y]])
            }
        }
    }

    /// Field strength `B = d A_2/d x_1 - d A_1/d x_2`.
    pub fn b(&self, p: Vec2) -> f64 {
        match &self.b {
            Some(b) => b(p),
            None => {
                let g = self.grad_a(p);
                g.0[0][1] - g.0[1][0]
            }
        }
    }

    pub fn grad_b(&self, p: Vec2) -> Vec2 {
        match &self.grad_b {
            Some(g) => g(p),
            None => {
                let h = fd_step(p);
                let ex = Vec2::new(h, 0.0);
                let ey = Vec2::new(0.0, h);
                Vec2::new(
                    (self.b(p + ex) - self.b(p - ex)) / (2.0 * h),
                    (self.b(p + ey) - self.b(p - ey)) / (2.0 * h),
                )
            }
        }
    }
}
