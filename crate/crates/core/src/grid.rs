//! Periodic spinor grid and the binary snapshot format.
//!
//! Snapshot layout (all little-endian):
//!   magic `b"DEWP"`, `u32` version (= 1), `u32` nx, `u32` ny,
//!   `f64` x0, x1, y0, y1, t, epsilon,
//!   then `nx * ny * 4` `f64` values, cells in row-major order (the x index
//!   varies fastest) with `(Re psi_1, Im psi_1, Re psi_2, Im psi_2)` per cell.
//! Writing and re-reading a snapshot reproduces the field bit-for-bit.

use std::io::{Read, Write};

use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};
use crate::spin::Spinor;
use crate::vec2::Vec2;

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"DEWP";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Rectangular domain `[x0, x1) x [y0, y1)` with a periodic `nx x ny` grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridParams {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl GridParams {
    pub fn hx(&self) -> f64 {
        (self.x1 - self.x0) / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y1 - self.y0) / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    /// Coordinates of cell `(ix, iy)`.
    pub fn point(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(
            self.x0 + ix as f64 * self.hx(),
            self.y0 + iy as f64 * self.hy(),
        )
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 || !(self.x1 > self.x0) || !(self.y1 > self.y0) {
            return Err(CoreError::GridMismatch(format!(
                "invalid grid: {} x {} on [{}, {}] x [{}, {}]",
                self.nx, self.ny, self.x0, self.x1, self.y0, self.y1
            )));
        }
        Ok(())
    }
}

/// Two-component complex field on a periodic grid, tagged with the physical
/// time and semiclassical scale it represents.
#[derive(Clone, Debug)]
pub struct SpinorGrid {
    pub params: GridParams,
    pub t: f64,
    pub epsilon: f64,
    /// Row-major, x fastest: `values[iy * nx + ix]`.
    pub values: Vec<Spinor>,
}

impl SpinorGrid {
    pub fn zeros(params: GridParams, t: f64, epsilon: f64) -> Result<Self> {
        params.validate()?;
        Ok(SpinorGrid {
            params,
            t,
            epsilon,
            values: vec![[C64::new(0.0, 0.0); 2]; params.len()],
        })
    }

    /// Fill from a function of position.
    pub fn from_fn(
        params: GridParams,
        t: f64,
        epsilon: f64,
        mut f: impl FnMut(Vec2) -> Spinor,
    ) -> Result<Self> {
        let mut g = Self::zeros(params, t, epsilon)?;
        for iy in 0..params.ny {
            for ix in 0..params.nx {
                g.values[iy * params.nx + ix] = f(params.point(ix, iy));
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> Spinor {
        self.values[iy * self.params.nx + ix]
    }

    /// Cell-weighted L2 norm `(sum |psi|^2 hx hy)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self
            .values
            .iter()
            .map(|v| v[0].norm_sqr() + v[1].norm_sqr())
            .sum();
        (sum * self.params.cell_area()).sqrt()
    }

    /// Pointwise maximum of `(|psi_1|^2 + |psi_2|^2)^(1/2)`.
    pub fn max_amplitude(&self) -> f64 {
        self.values
            .iter()
            .map(|v| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn compatible_with(&self, other: &SpinorGrid) -> Result<()> {
        if self.params != other.params {
            return Err(CoreError::GridMismatch(format!(
                "{:?} vs {:?}",
                self.params, other.params
            )));
        }
        Ok(())
    }

    /// Write the snapshot in the fixed binary layout.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&SNAPSHOT_MAGIC)?;
        w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        w.write_all(&(self.params.nx as u32).to_le_bytes())?;
        w.write_all(&(self.params.ny as u32).to_le_bytes())?;
        for v in [
            self.params.x0,
            self.params.x1,
            self.params.y0,
            self.params.y1,
            self.t,
            self.epsilon,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.values.len() * 32);
        for s in &self.values {
            buf.extend_from_slice(&s[0].re.to_le_bytes());
            buf.extend_from_slice(&s[0].im.to_le_bytes());
            buf.extend_from_slice(&s[1].re.to_le_bytes());
            buf.extend_from_slice(&s[1].im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_snapshot<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != SNAPSHOT_MAGIC {
            return Err(CoreError::SnapshotFormat(format!(
                "bad magic {magic:?}, expected {SNAPSHOT_MAGIC:?}"
            )));
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let version = u32::from_le_bytes(u32buf);
        if version != SNAPSHOT_VERSION {
            return Err(CoreError::SnapshotFormat(format!(
                "unsupported version {version}"
            )));
        }
        r.read_exact(&mut u32buf)?;
        let nx = u32::from_le_bytes(u32buf) as usize;
        r.read_exact(&mut u32buf)?;
        let ny = u32::from_le_bytes(u32buf) as usize;
        let mut f64buf = [0u8; 8];
        let mut header = [0.0f64; 6];
        for v in header.iter_mut() {
            r.read_exact(&mut f64buf)?;
            *v = f64::from_le_bytes(f64buf);
        }
        let params = GridParams {
            nx,
            ny,
            x0: header[0],
            x1: header[1],
            y0: header[2],
            y1: header[3],
        };
        params.validate()?;
        let mut values = Vec::with_capacity(nx * ny);
        let mut cell = [0u8; 32];
        for _ in 0..nx * ny {
            r.read_exact(&mut cell)?;
            let f = |o: usize| f64::from_le_bytes(cell[o..o + 8].try_into().unwrap());
            values.push([C64::new(f(0), f(8)), C64::new(f(16), f(24))]);
        }
        Ok(SpinorGrid {
            params,
            t: header[4],
            epsilon: header[5],
            values,
        })
    }
}
