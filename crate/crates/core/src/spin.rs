//! 2x2 spinor algebra: Pauli matrices, rotations about the 2- and 3-axes and
//! exact exponentials `exp(-i a v.sigma)` used by the split-step propagator.

use num_complex::Complex64 as C64;

pub type Spinor = [C64; 2];

/// Dense 2x2 complex matrix, row-major.
#[derive(Clone, Copy, Debug)]
pub struct SpinMat(pub [[C64; 2]; 2]);

impl SpinMat {
    pub fn identity() -> Self {
        SpinMat([
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        ])
    }

    #[inline]
    pub fn apply(&self, v: Spinor) -> Spinor {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn mul(&self, o: &SpinMat) -> SpinMat {
        let mut m = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j];
            }
        }
        SpinMat(m)
    }

    pub fn adjoint(&self) -> SpinMat {
        SpinMat([
            [self.0[0][0].conj(), self.0[1][0].conj()],
            [self.0[0][1].conj(), self.0[1][1].conj()],
        ])
    }
}

#[inline]
pub fn sigma1(v: Spinor) -> Spinor {
    [v[1], v[0]]
}

#[inline]
pub fn sigma2(v: Spinor) -> Spinor {
    let i = C64::new(0.0, 1.0);
    [-i * v[1], i * v[0]]
}

#[inline]
pub fn sigma3(v: Spinor) -> Spinor {
    [v[0], -v[1]]
}

/// Spin rotation about the 2-axis, `U = exp(-i (phi/2) sigma_2)`:
/// `[[cos(phi/2), -sin(phi/2)], [sin(phi/2), cos(phi/2)]]`.
pub fn u2(phi: f64) -> SpinMat {
    let (s, c) = (0.5 * phi).sin_cos();
    SpinMat([
        [C64::new(c, 0.0), C64::new(-s, 0.0)],
        [C64::new(s, 0.0), C64::new(c, 0.0)],
    ])
}

/// Spin rotation about the 3-axis, `U = exp(-i (theta/2) sigma_3)`:
/// `diag(e^{-i theta/2}, e^{i theta/2})`.
pub fn u3(theta: f64) -> SpinMat {
    SpinMat([
        [C64::from_polar(1.0, -0.5 * theta), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::from_polar(1.0, 0.5 * theta)],
    ])
}

/// Exact unitary `exp(-i a (v1 sigma_1 + v2 sigma_2 + v3 sigma_3))`
/// `= cos(a|v|) I - i sin(a|v|) (v.sigma)/|v|`.
pub fn exp_pauli(a: f64, v1: f64, v2: f64, v3: f64) -> SpinMat {
    let norm = (v1 * v1 + v2 * v2 + v3 * v3).sqrt();
    if norm == 0.0 {
        return SpinMat::identity();
    }
    let (s, c) = (a * norm).sin_cos();
    let f = s / norm;
    // v.sigma = [[v3, v1 - i v2], [v1 + i v2, -v3]]
    SpinMat([
        [
            C64::new(c, -f * v3),
            C64::new(-f * v2, -f * v1),
        ],
        [
            C64::new(f * v2, -f * v1),
            C64::new(c, f * v3),
        ],
    ])
}
