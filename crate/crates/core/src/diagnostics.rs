//! Observables extracted from evolving states: center of mass, propagation
//! speed, center phase winding, L2 errors and power-law fits.

use std::io::Write;

use crate::error::{CoreError, Result};
use crate::grid::SpinorGrid;
use crate::vec2::Vec2;

/// Density-weighted center of mass `sum x |psi|^2 / sum |psi|^2`.
pub fn center_of_mass(grid: &SpinorGrid) -> Result<Vec2> {
    let mut total = 0.0f64;
    let mut acc = Vec2::ZERO;
    for iy in 0..grid.params.ny {
        for ix in 0..grid.params.nx {
            let v = grid.at(ix, iy);
            let w = v[0].norm_sqr() + v[1].norm_sqr();
            total += w;
            acc += grid.params.point(ix, iy) * w;
        }
    }
    if total <= 0.0 || !total.is_finite() {
        return Err(CoreError::ZeroNorm);
    }
    Ok(acc * (1.0 / total))
}

/// Phase `arg psi_component` at the grid node nearest to the center of mass.
pub fn phase_at_center(grid: &SpinorGrid, component: usize) -> Result<f64> {
    let com = center_of_mass(grid)?;
    let ix = (((com.x - grid.params.x0) / grid.params.hx()).round() as isize)
        .rem_euclid(grid.params.nx as isize) as usize;
    let iy = (((com.y - grid.params.y0) / grid.params.hy()).round() as isize)
        .rem_euclid(grid.params.ny as isize) as usize;
    let v = grid.at(ix, iy)[component.min(1)];
    if v.norm_sqr() == 0.0 {
        return Err(CoreError::ZeroNorm);
    }
    Ok(v.arg())
}

/// Cell-weighted L2 distance between two states on the same grid.
pub fn l2_error(a: &SpinorGrid, b: &SpinorGrid) -> Result<f64> {
    a.compatible_with(b)?;
    let sum: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(u, v)| (u[0] - v[0]).norm_sqr() + (u[1] - v[1]).norm_sqr())
        .sum();
    Ok((sum * a.params.cell_area()).sqrt())
}

/// Result of a log-log least-squares fit `y ~ prefactor * x^exponent`.
#[derive(Clone, Copy, Debug)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
}

/// Least-squares power-law fit through `(x_i, y_i)`; both must be strictly
/// positive and at least two points are needed.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerLawFit> {
    if x.len() != y.len() {
        return Err(CoreError::GridMismatch(format!(
            "power-law fit needs matching lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(CoreError::TooFewSamples {
            what: "power-law fit",
            got: x.len(),
            need: 2,
        });
    }
    let mut lx = Vec::with_capacity(x.len());
    let mut ly = Vec::with_capacity(y.len());
    for (&a, &b) in x.iter().zip(y) {
        if !(a > 0.0) || !(b > 0.0) {
            return Err(CoreError::NonPositiveData(format!("({a}, {b})")));
        }
        lx.push(a.ln());
        ly.push(b.ln());
    }
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx <= 0.0 {
        return Err(CoreError::NonPositiveData(
            "all abscissae coincide; no slope to fit".into(),
        ));
    }
    let exponent = sxy / sxx;
    Ok(PowerLawFit {
        exponent,
        prefactor: (my - exponent * mx).exp(),
    })
}

/// Time series of scalar observables recorded during an evolution.
#[derive(Clone, Debug, Default)]
pub struct ObservableSeries {
    pub t: Vec<f64>,
    pub com: Vec<Vec2>,
    /// Instantaneous speed `|com_k - com_{k-1}| / (t_k - t_{k-1})` (first
    /// entry copies the second).
    pub speed: Vec<f64>,
    pub max_amp: Vec<f64>,
    /// Phase of the chosen spinor component at the center node, unwrapped
    /// across samples.
    pub phase: Vec<f64>,
    pub l2_norm: Vec<f64>,
    /// L2 distance to a reference state, when one was supplied.
    pub l2_err: Vec<Option<f64>>,
    pub component: usize,
}

impl ObservableSeries {
    pub fn new(component: usize) -> Self {
        ObservableSeries {
            component,
            ..Default::default()
        }
    }

    /// Record one state (and optionally its reference for the error column).
    pub fn push(&mut self, grid: &SpinorGrid, reference: Option<&SpinorGrid>) -> Result<()> {
        let com = center_of_mass(grid)?;
        let mut phase = phase_at_center(grid, self.component)?;
        if let Some(prev) = self.phase.last() {
            phase += ((prev - phase) / std::f64::consts::TAU).round() * std::f64::consts::TAU;
        }
        let err = match reference {
            Some(r) => Some(l2_error(grid, r)?),
            None => None,
        };
        match (self.t.last().copied(), self.com.last().copied()) {
            (Some(pt), Some(pc)) => {
                let dt = grid.t - pt;
                let v = if dt > 0.0 { (com - pc).norm() / dt } else { 0.0 };
                if self.speed.len() == 1 && self.speed[0] == 0.0 {
                    self.speed[0] = v;
                }
                self.speed.push(v);
            }
            _ => self.speed.push(0.0),
        }
        self.t.push(grid.t);
        self.com.push(com);
        self.max_amp.push(grid.max_amplitude());
        self.phase.push(phase);
        self.l2_norm.push(grid.l2_norm());
        self.l2_err.push(err);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Total unwrapped phase change over the whole series.
    pub fn phase_winding(&self) -> f64 {
        match (self.phase.first(), self.phase.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "t,com_x,com_y,speed,max_amp,center_phase_unwrapped,l2_norm,l2_err_vs_asymptotic"
        )?;
        for i in 0..self.len() {
            let err = match self.l2_err[i] {
                Some(e) => e.to_string(),
                None => String::new(),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                self.t[i],
                self.com[i].x,
                self.com[i].y,
                self.speed[i],
                self.max_amp[i],
                self.phase[i],
                self.l2_norm[i],
                err
            )?;
        }
        Ok(())
    }
}

/// Propagation speed over `t in [window.0, window.1]`: the least-squares
/// slope of cumulative arc length against time.
pub fn speed_estimate(series: &ObservableSeries, window: (f64, f64)) -> Result<f64> {
    let mut ts = Vec::new();
    let mut arc = Vec::new();
    let mut s = 0.0f64;
    for i in 0..series.len() {
        if i > 0 {
            s += (series.com[i] - series.com[i - 1]).norm();
        }
        if series.t[i] >= window.0 - 1e-12 && series.t[i] <= window.1 + 1e-12 {
            ts.push(series.t[i]);
            arc.push(s);
        }
    }
    if ts.len() < 2 {
        return Err(CoreError::TooFewSamples {
            what: "speed estimate",
            got: ts.len(),
            need: 2,
        });
    }
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let ma = arc.iter().sum::<f64>() / n;
    let mut stt = 0.0;
    let mut sta = 0.0;
    for (t, a) in ts.iter().zip(&arc) {
        stt += (t - mt) * (t - mt);
        sta += (t - mt) * (a - ma);
    }
    if stt <= 0.0 {
        return Err(CoreError::InvalidStep(
            "speed estimate window has zero time extent".into(),
        ));
    }
    Ok(sta / stt)
}
