//! Envelope dynamics in the co-moving frame.
//!
//! The leading-order profile factorizes as `a0(t, xi, zeta) = f(t, xi)
//! phi_t(zeta)` where `phi_t` is the transverse ground state
//! `phi_t(zeta) = (rho_t / 4 pi)^(1/4) exp(-rho_t zeta^2 / 2) (1, -1)^T`
//! (unit L2 norm in `zeta`) and `f` obeys a transported Schroedinger-type law
//! whose closed-form solution is
//!
//! `f(t, xi) = exp(i lambda_t + i (nu_t/2) (e^{mu_t} xi)^2) e^{mu_t/2}
//!  fhat(e^{mu_t} xi)`.
//!
//! In the shifted physical frame the envelope is the oscillatory integral
//!
//! `E_t(z) = (2 pi)^{-1/2} int e^{i z_1 xi} f(t, xi) phi_t(z_2 + gamma_t xi)
//!  dxi`,
//!
//! evaluated here both by direct quadrature (the oracle) and, for Gaussian
//! initial data, in closed form. The accumulated dispersion `nu_t` makes the
//! peak amplitude decay like `|nu_t|^{-1/2}`.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::coefficients::{CoefficientSample, CoefficientTrack};
use crate::error::{CoreError, Result};
use crate::spin::Spinor;
use crate::vec2::Vec2;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Initial frequency profile `fhat` of the wavepacket.
#[derive(Clone, Debug)]
pub enum Profile {
    /// `fhat(xi) = exp(-sigma xi^2 / 2)`, `sigma > 0`.
    Gaussian { sigma: f64 },
    /// Values on a uniform `xi` grid, zero outside; evaluated by cubic
    /// (Catmull-Rom) interpolation.
    Sampled { xi: Vec<f64>, values: Vec<C64> },
}

impl Profile {
    pub fn gaussian(sigma: f64) -> Self {
        assert!(sigma > 0.0, "Gaussian profile needs sigma > 0");
        Profile::Gaussian { sigma }
    }

    /// Evaluate `fhat(xi)`.
    pub fn fhat(&self, xi: f64) -> C64 {
        match self {
            Profile::Gaussian { sigma } => C64::new((-0.5 * sigma * xi * xi).exp(), 0.0),
            Profile::Sampled { xi: grid, values } => {
                let n = grid.len();
                if n < 2 {
                    return C64::new(0.0, 0.0);
                }
                let h = grid[1] - grid[0];
                let pos = (xi - grid[0]) / h;
                if pos < 0.0 || pos > (n - 1) as f64 {
                    return C64::new(0.0, 0.0);
                }
                let i = (pos.floor() as usize).min(n - 2);
                let u = pos - i as f64;
                // Catmull-Rom with clamped end points (zero beyond the grid).
                let get = |k: isize| -> C64 {
                    if k < 0 || k as usize >= n {
                        C64::new(0.0, 0.0)
                    } else {
                        values[k as usize]
                    }
                };
                let (p0, p1, p2, p3) = (
                    get(i as isize - 1),
                    get(i as isize),
                    get(i as isize + 1),
                    get(i as isize + 2),
                );
                let u2 = u * u;
                let u3 = u2 * u;
                (p1 * 2.0
                    + (p2 - p0) * u
                    + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * u2
                    + (p3 - p0 + (p1 - p2) * 3.0) * u3)
                    * 0.5
            }
        }
    }

    /// Half-width of the support needed so that `|fhat| < 1e-16` outside.
    fn xi_half_width(&self) -> f64 {
        match self {
            Profile::Gaussian { sigma } => (2.0 * 37.0 / sigma).sqrt(),
            Profile::Sampled { xi, .. } => xi
                .first()
                .map(|a| a.abs())
                .unwrap_or(0.0)
                .max(xi.last().map(|a| a.abs()).unwrap_or(0.0)),
        }
    }

    /// `int |fhat| dxi` (closed form for Gaussians, quadrature otherwise).
    pub fn fhat_l1(&self) -> f64 {
        match self {
            Profile::Gaussian { sigma } => (std::f64::consts::TAU / sigma).sqrt(),
            Profile::Sampled { xi, values } => {
                if xi.len() < 2 {
                    return 0.0;
                }
                let h = xi[1] - xi[0];
                let sum: f64 = values.iter().map(|v| v.norm()).sum();
                let ends = 0.5 * (values[0].norm() + values[values.len() - 1].norm());
                (sum - ends) * h
            }
        }
    }

    /// `int |f| dz` for the position-side profile (unitary inverse transform
    /// of `fhat`). Closed form for Gaussians: `sqrt(2 pi)` independent of
    /// `sigma`.
    pub fn f_l1(&self) -> Result<f64> {
        match self {
            Profile::Gaussian { .. } => Ok((std::f64::consts::TAU).sqrt()),
            Profile::Sampled { .. } => Err(CoreError::GridResolution(
                "L1 norm of a sampled profile's position-side transform is not provided; \
                 compute it from the sampled data directly"
                    .into(),
            )),
        }
    }

    /// `(int |fhat|^2 dxi)^(1/2)`; the L2 norm of the full wavepacket.
    pub fn l2_norm(&self) -> f64 {
        match self {
            Profile::Gaussian { sigma } => (std::f64::consts::PI / sigma).sqrt().sqrt(),
            Profile::Sampled { xi, values } => {
                if xi.len() < 2 {
                    return 0.0;
                }
                let h = xi[1] - xi[0];
                let sum: f64 = values.iter().map(|v| v.norm_sqr()).sum();
                let ends = 0.5 * (values[0].norm_sqr() + values[values.len() - 1].norm_sqr());
                ((sum - ends) * h).sqrt()
            }
        }
    }
}

/// Semiclassical wavepacket specification: scale, launch point and profile.
#[derive(Clone, Debug)]
pub struct WavepacketSpec {
    pub epsilon: f64,
    pub y0: Vec2,
    pub profile: Profile,
}

/// Transverse ground state `phi(zeta) = (rho/4 pi)^{1/4} e^{-rho zeta^2/2}
/// (1, -1)^T`, normalized to unit L2 norm (as a two-spinor) in `zeta`.
pub fn hermite_ground(rho: f64, zeta: f64) -> Spinor {
    let amp = hermite_ground_scalar(rho, zeta);
    [C64::new(amp, 0.0), C64::new(-amp, 0.0)]
}

#[inline]
pub(crate) fn hermite_ground_scalar(rho: f64, zeta: f64) -> f64 {
    (rho / (4.0 * std::f64::consts::PI)).powf(0.25) * (-0.5 * rho * zeta * zeta).exp()
}

/// Transported frequency profile
/// `f(t, xi) = exp(i lambda + i (nu/2)(e^mu xi)^2) e^{mu/2} fhat(e^mu xi)`.
pub fn transport_profile(profile: &Profile, s: &CoefficientSample, xi: f64) -> C64 {
    let em = s.mu.exp();
    let scaled = em * xi;
    let phase = s.lambda + 0.5 * s.nu * scaled * scaled;
    C64::from_polar(em.sqrt(), phase) * profile.fhat(scaled)
}

/// Fourth-order finite-difference stencils for a first derivative on a uniform
/// grid of at least 5 points; `offset` is the evaluation index within the
/// 5-point window `base..base+5`.
fn fd4_weights(offset: usize) -> [f64; 5] {
    match offset {
        0 => [-25.0, 48.0, -36.0, 16.0, -3.0],
        1 => [-3.0, -10.0, 18.0, -6.0, 1.0],
        2 => [1.0, -8.0, 0.0, 8.0, -1.0],
        3 => [-1.0, 6.0, -18.0, 10.0, 3.0],
        4 => [3.0, -16.0, 36.0, -48.0, 25.0],
        _ => unreachable!(),
    }
}

fn fd4_derivative(values: &[C64], idx: usize, h: f64) -> C64 {
    let n = values.len();
    debug_assert!(n >= 5);
    let base = idx.saturating_sub(2).min(n - 5);
    let w = fd4_weights(idx - base);
    let mut acc = C64::new(0.0, 0.0);
    for (k, wk) in w.iter().enumerate() {
        acc += values[base + k] * *wk;
    }
    acc / (12.0 * h)
}

/// Max-norm residual of the transported profile under the envelope transport
/// operator
///
/// `T = D_t - k/(2 rho) - j gamma (xi D_xi + D_xi xi)/2
///      - (theta_dot gamma + k gamma^2) xi^2`,   `D = -i d`.
///
/// The closed-form `f` solves `T f = 0` exactly; the returned residual is pure
/// discretization error of the fourth-order stencils (in `t` across track
/// samples and in `xi` across `xi_grid`) plus the quadrature error of the
/// track integrals, and shrinks by at least ~4x when both steps are halved.
pub fn transport_residual(
    profile: &Profile,
    track: &CoefficientTrack,
    t: f64,
    xi_grid: &[f64],
) -> Result<f64> {
    let n_t = track.samples.len();
    if n_t < 5 {
        return Err(CoreError::TooFewSamples {
            what: "transport residual (time stencil)",
            got: n_t,
            need: 5,
        });
    }
    let n_xi = xi_grid.len();
    if n_xi < 5 {
        return Err(CoreError::TooFewSamples {
            what: "transport residual (xi stencil)",
            got: n_xi,
            need: 5,
        });
    }
    let h_xi = xi_grid[1] - xi_grid[0];
    let idx = track.index_at(t)?;
    let t_base = idx.saturating_sub(2).min(n_t - 5);

    // f on the 5-sample time window, for every xi.
    let window: Vec<Vec<C64>> = (t_base..t_base + 5)
        .map(|ti| {
            let s = &track.samples[ti];
            xi_grid
                .iter()
                .map(|&xi| transport_profile(profile, s, xi))
                .collect()
        })
        .collect();

    let s = &track.samples[idx];
    let w_t = fd4_weights(idx - t_base);
    let i = C64::new(0.0, 1.0);
    let f_here = &window[idx - t_base];

    let mut worst = 0.0f64;
    for (m, &xi) in xi_grid.iter().enumerate() {
        let mut df_dt = C64::new(0.0, 0.0);
        for (k, wk) in w_t.iter().enumerate() {
            df_dt += window[k][m] * *wk;
        }
        df_dt /= 12.0 * track.dt;

        let f = f_here[m];
        let dxi_f = fd4_derivative(f_here, m, h_xi);

        // (xi D_xi + D_xi xi)/2 f = xi D_xi f - (i/2) f.
        let d_t = -i * df_dt;
        let d_xi = -i * dxi_f;
        let sym = d_xi * xi - i * f * 0.5;
        let rate = s.theta_dot * s.gamma + s.k * s.gamma * s.gamma;
        let residual = d_t - f * (s.k / (2.0 * s.rho)) - sym * (s.j * s.gamma)
            - f * (rate * xi * xi);
        worst = worst.max(residual.norm());
    }
    Ok(worst)
}

/// Shifted-frame envelope evaluator, shared by the quadrature oracle and the
/// sampled-profile assembly path.
///
/// Precomputes `f(t, xi)` on a trapezoid grid wide and fine enough for the
/// requested evaluation region, then evaluates
/// `E_t(z) = (2 pi)^{-1/2} int e^{i z_1 xi} f(t, xi) phi_t(z_2 + gamma xi) dxi`
/// at arbitrary `z`.
pub struct NumericEnvelope {
    xi: Vec<f64>,
    f0: Vec<C64>,
    rho: f64,
    gamma: f64,
}

impl NumericEnvelope {
    /// `z1_max` bounds `|z_1|` over the evaluation region; it sets the fastest
    /// oscillation the quadrature has to resolve (Nyquist check).
    pub fn new(profile: &Profile, s: &CoefficientSample, z1_max: f64) -> Result<Self> {
        let half = profile.xi_half_width() * (-s.mu).exp();
        if !(half > 0.0) || !half.is_finite() {
            return Err(CoreError::GridResolution(
                "profile support is empty or unbounded".into(),
            ));
        }
        // Fastest phase rate in xi: the e^{i z1 xi} factor plus the chirp
        // accumulated through nu; real Gaussian factors add a resolution
        // scale but no oscillation.
        let em2 = (2.0 * s.mu).exp();
        let phase_rate = z1_max.abs() + s.nu.abs() * em2 * half;
        // Structure scales of the integrand envelope.
        let width_scales = [
            1.0 / (s.gamma.abs() * s.rho.sqrt() + 1e-30),
            match profile {
                Profile::Gaussian { sigma } => 1.0 / (sigma * em2).sqrt(),
                Profile::Sampled { xi, .. } => {
                    if xi.len() > 1 {
                        xi[1] - xi[0]
                    } else {
                        half
                    }
                }
            },
        ];
        let mut dxi = (0.3 / (phase_rate + 1e-30))
            .min(0.2 * width_scales[0])
            .min(0.2 * width_scales[1])
            .min(half / 100.0);
        let mut n = (2.0 * half / dxi).ceil() as usize + 1;
        if n < 201 {
            n = 201;
        }
        if n > 2_000_001 {
            return Err(CoreError::GridResolution(format!(
                "envelope quadrature would need {n} nodes; the requested state oscillates too fast for this evaluator"
            )));
        }
        dxi = 2.0 * half / (n - 1) as f64;
        let xi: Vec<f64> = (0..n).map(|k| -half + k as f64 * dxi).collect();
        let f0: Vec<C64> = xi
            .iter()
            .map(|&x| transport_profile(profile, s, x))
            .collect();
        Ok(NumericEnvelope {
            xi,
            f0,
            rho: s.rho,
            gamma: s.gamma,
        })
    }

    /// Scalar envelope value at `z`; the spinor is this value times `(1, -1)`.
    pub fn value(&self, z: Vec2) -> C64 {
        let h = self.xi[1] - self.xi[0];
        let mut acc = C64::new(0.0, 0.0);
        let n = self.xi.len();
        for (k, (&xi, f)) in self.xi.iter().zip(&self.f0).enumerate() {
            let g = hermite_ground_scalar(self.rho, z.y + self.gamma * xi);
            let mut term = *f * C64::from_polar(g, z.x * xi);
            if k == 0 || k == n - 1 {
                term *= 0.5;
            }
            acc += term;
        }
        acc * h * FRAC_1_SQRT_2PI
    }

    pub fn value_spinor(&self, z: Vec2) -> Spinor {
        let v = self.value(z);
        [v, -v]
    }
}

/// Quadrature oracle for the shifted-frame envelope at a single point.
pub fn envelope_numeric(profile: &Profile, s: &CoefficientSample, z: Vec2) -> Result<C64> {
    Ok(NumericEnvelope::new(profile, s, z.x.abs())?.value(z))
}

/// Closed-form shifted-frame envelope for Gaussian initial data
/// `fhat = exp(-sigma xi^2/2)`:
///
/// `E_t(z) = (rho/4 pi)^{1/4} e^{mu/2} Q^{-1/2} e^{i lambda}
///           exp(-rho z_2^2/2) exp(-(z_1 + i s z_2)^2 / (2 Q))`,
/// with `Q = e^{2 mu} sigma + s gamma - i e^{2 mu} nu` (principal square
/// root; `Re Q >= e^{2 mu} sigma > 0`).
pub fn gaussian_envelope_closed_form(sigma: f64, s: &CoefficientSample, z: Vec2) -> C64 {
    let em2 = (2.0 * s.mu).exp();
    let q = C64::new(em2 * sigma + s.s * s.gamma, -em2 * s.nu);
    let w = C64::new(z.x, s.s * z.y);
    let exponent = C64::new(-0.5 * s.rho * z.y * z.y, s.lambda) - w * w / (2.0 * q);
    (s.rho / (4.0 * std::f64::consts::PI)).powf(0.25) * (0.5 * s.mu).exp() / q.sqrt()
        * exponent.exp()
}

/// Upper bound for the peak amplitude `sup_z |E_t(z)|`, the smaller of the
/// dispersive branch `(rho/4 pi)^{1/4} e^{-mu/2} (2 pi)^{-1/2} |Q|^{-1/2}
/// ||f||_L1` with `Q = rho gamma^2 e^{-2 mu} - i nu` (which decays like
/// `|nu|^{-1/2}`) and the plain branch
/// `(rho/4 pi)^{1/4} e^{-mu/2} (2 pi)^{-1/2} ||fhat||_L1`.
pub fn sup_amplitude_bound(s: &CoefficientSample, f_l1: f64, fhat_l1: f64) -> f64 {
    let pref = (s.rho / (4.0 * std::f64::consts::PI)).powf(0.25)
        * (-0.5 * s.mu).exp()
        * FRAC_1_SQRT_2PI;
    let q_abs = C64::new(s.rho * s.gamma * s.gamma * (-2.0 * s.mu).exp(), -s.nu).norm();
    let plain = pref * fhat_l1;
    if q_abs <= f64::EPSILON {
        return plain;
    }
    plain.min(pref * f_l1 / q_abs.sqrt())
}

/// Relative L2 residual of the leading-order profile under the frozen model
/// operator
///
/// `T0 = c (1 + sigma_1) xi + D_zeta sigma_2 + rho zeta sigma_3`.
///
/// `a0 = f(t, xi) phi_t(zeta)` lies in the kernel of `T0` analytically; the
/// residual is evaluated on a tensor grid with the `zeta` derivative taken
/// spectrally (FFT), so it should sit at round-off level for well-resolved
/// grids.
pub fn model_kernel_residual(
    profile: &Profile,
    s: &CoefficientSample,
    xi_grid: &[f64],
    n_zeta: usize,
    zeta_half_width: f64,
) -> Result<f64> {
    if n_zeta < 8 || xi_grid.is_empty() {
        return Err(CoreError::TooFewSamples {
            what: "model kernel residual",
            got: n_zeta.min(xi_grid.len()),
            need: 8,
        });
    }
    let l = 2.0 * zeta_half_width;
    let h = l / n_zeta as f64;
    let zeta: Vec<f64> = (0..n_zeta)
        .map(|k| -zeta_half_width + k as f64 * h)
        .collect();

    // Transverse profile and its spectral derivative (shared across xi).
    let g: Vec<f64> = zeta
        .iter()
        .map(|&z| hermite_ground_scalar(s.rho, z))
        .collect();
    let mut buf: Vec<C64> = g.iter().map(|&v| C64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n_zeta);
    let ifft = planner.plan_fft_inverse(n_zeta);
    fft.process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let freq = if k <= n_zeta / 2 {
            k as f64
        } else {
            k as f64 - n_zeta as f64
        };
        let wavenum = std::f64::consts::TAU * freq / l;
        *v *= C64::new(0.0, wavenum) / n_zeta as f64;
    }
    ifft.process(&mut buf);
    let dg = buf;

    let i = C64::new(0.0, 1.0);
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for &xi in xi_grid {
        let f = transport_profile(profile, s, xi);
        for m in 0..n_zeta {
            let spin: Spinor = [f * g[m], -f * g[m]];
            den += spin[0].norm_sqr() + spin[1].norm_sqr();

            // c (1 + sigma_1) xi a0: (1 + sigma_1)(1, -1)^T = 0, but keep the
            // full expression so the test exercises the operator as written.
            let one_plus_s1 = [spin[0] + spin[1], spin[1] + spin[0]];
            let term1 = [
                one_plus_s1[0] * (s.c * xi),
                one_plus_s1[1] * (s.c * xi),
            ];
            // D_zeta sigma_2 a0 with D = -i d/dzeta.
            let dspin = [f * dg[m], -(f * dg[m])];
            let term2 = [-i * (-i * dspin[1]), -i * (i * dspin[0])];
            // rho zeta sigma_3 a0.
            let term3 = [
                spin[0] * (s.rho * zeta[m]),
                -spin[1] * (s.rho * zeta[m]),
            ];
            let r0 = term1[0] + term2[0] + term3[0];
            let r1 = term1[1] + term2[1] + term3[1];
            num += r0.norm_sqr() + r1.norm_sqr();
        }
    }
    if den <= 0.0 {
        return Err(CoreError::ZeroNorm);
    }
    Ok((num / den).sqrt())
}
