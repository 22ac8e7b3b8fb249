//! Dense 2×2 complex matrices.
//!
//! Pauli convention used everywhere in the crate:
//! σx = [[0, 1], [1, 0]], σy = [[0, −i], [i, 0]], σz = diag(1, −1).

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// A complex 2-vector (ket).
pub type Vec2 = [C64; 2];

/// 2×2 complex matrix stored row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix2(pub [[C64; 2]; 2]);

impl fmt::Debug for Matrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.0;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

impl Default for Matrix2 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Matrix2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Matrix2([[a, b], [c, d]])
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    pub fn real_diag(a: f64, d: f64) -> Self {
        Self::diag(C64::new(a, 0.0), C64::new(d, 0.0))
    }

    pub const fn sigma_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub const fn sigma_y() -> Self {
        Self::new(ZERO, C64 { re: 0.0, im: -1.0 }, I, ZERO)
    }

    pub const fn sigma_z() -> Self {
        Self::new(ONE, ZERO, ZERO, C64 { re: -1.0, im: 0.0 })
    }

    /// `a0·𝟙 + a·σ` with complex coefficients.
    pub fn from_pauli(a0: C64, a: [C64; 3]) -> Self {
        let [ax, ay, az] = a;
        Self::new(a0 + az, ax - I * ay, ax + I * ay, a0 - az)
    }

    /// `x·σx + y·σy + z·σz` for a real vector.
    pub fn from_real_vector(v: [f64; 3]) -> Self {
        let [x, y, z] = v;
        Self::new(
            C64::new(z, 0.0),
            C64::new(x, -y),
            C64::new(x, y),
            C64::new(-z, 0.0),
        )
    }

    /// Density matrix ½(𝟙 + b·σ) for a real Bloch vector `b`.
    pub fn from_bloch(b: [f64; 3]) -> Self {
        let [x, y, z] = b;
        Self::new(
            C64::new(0.5 * (1.0 + z), 0.0),
            C64::new(0.5 * x, -0.5 * y),
            C64::new(0.5 * x, 0.5 * y),
            C64::new(0.5 * (1.0 - z), 0.0),
        )
    }

    /// Coefficients (a0, [ax, ay, az]) of the Pauli expansion.
    pub fn pauli_components(&self) -> (C64, [C64; 3]) {
        let [[a, b], [c, d]] = self.0;
        let a0 = 0.5 * (a + d);
        let az = 0.5 * (a - d);
        let ax = 0.5 * (b + c);
        let ay = 0.5 * I * (b - c);
        (a0, [ax, ay, az])
    }

    /// Real Bloch vector b with ρ ≈ ½ Tr(ρ)(𝟙 + b·σ) read off the Hermitian part.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let (_, [x, y, z]) = self.pauli_components();
        [2.0 * x.re, 2.0 * y.re, 2.0 * z.re]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn dagger(&self) -> Self {
        let [[a, b], [c, d]] = self.0;
        Self::new(a.conj(), c.conj(), b.conj(), d.conj())
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        let [[a, b], [c, d]] = self.0;
        a * d - b * c
    }

    pub fn scale(&self, s: C64) -> Self {
        let [[a, b], [c, d]] = self.0;
        Self::new(a * s, b * s, c * s, d * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        let [[a, b], [c, d]] = self.0;
        Self::new(a * s, b * s, c * s, d * s)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn apply(&self, v: &Vec2) -> Vec2 {
        let [[a, b], [c, d]] = self.0;
        [a * v[0] + b * v[1], c * v[0] + d * v[1]]
    }

    /// ⟨u|M|v⟩
    pub fn sandwich(&self, u: &Vec2, v: &Vec2) -> C64 {
        let mv = self.apply(v);
        u[0].conj() * mv[0] + u[1].conj() * mv[1]
    }

    /// |u⟩⟨v|
    pub fn outer(u: &Vec2, v: &Vec2) -> Self {
        Self::new(
            u[0] * v[0].conj(),
            u[0] * v[1].conj(),
            u[1] * v[0].conj(),
            u[1] * v[1].conj(),
        )
    }

    /// (M + M†)/2
    pub fn hermitian_part(&self) -> Self {
        (*self + self.dagger()).scale_real(0.5)
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.dagger()) <= tol
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        (*self + self.dagger()).max_abs() <= tol
    }

    /// Tr(M²); the purity for a density matrix.
    pub fn purity(&self) -> f64 {
        (*self * *self).trace().re
    }

    /// Eigenvalues of a general 2×2 matrix, ordered by decreasing modulus.
    pub fn eigenvalues(&self) -> (C64, C64) {
        let half_tr = 0.5 * self.trace();
        let disc = (half_tr * half_tr - self.det()).sqrt();
        let (a, b) = (half_tr + disc, half_tr - disc);
        if a.norm() >= b.norm() {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Spectral decomposition of a Hermitian matrix: eigenvalues ascending with
    /// orthonormal eigenvectors. Only the Hermitian part of `self` is used.
    pub fn eigh(&self) -> HermitianEigen {
        let (a0, [ax, ay, az]) = self.hermitian_part().pauli_components();
        let v = [ax.re, ay.re, az.re];
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let (lower, upper) = if r > 0.0 {
            let n = [v[0] / r, v[1] / r, v[2] / r];
            (pauli_eigenvector(n, -1.0), pauli_eigenvector(n, 1.0))
        } else {
            ([ONE, ZERO], [ZERO, ONE])
        };
        HermitianEigen {
            values: [a0.re - r, a0.re + r],
            vectors: [lower, upper],
        }
    }

    /// Matrix exponential by Pauli decomposition:
    /// exp(a0 + a·σ) = e^{a0} (cosh s 𝟙 + sinh(s)/s a·σ), s² = a·a.
    pub fn exp(&self) -> Self {
        let (a0, a) = self.pauli_components();
        let s2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
        let s = s2.sqrt();
        let (ch, sh_over_s) = if s.norm() < 1e-6 {
            // Taylor: cosh s = 1 + s²/2 + s⁴/24, sinh(s)/s = 1 + s²/6 + s⁴/120
            (
                ONE + s2 * 0.5 + s2 * s2 / 24.0,
                ONE + s2 / 6.0 + s2 * s2 / 120.0,
            )
        } else {
            (s.cosh(), s.sinh() / s)
        };
        let e0 = a0.exp();
        Self::from_pauli(
            e0 * ch,
            [e0 * sh_over_s * a[0], e0 * sh_over_s * a[1], e0 * sh_over_s * a[2]],
        )
    }
}

/// Eigen-decomposition of a Hermitian 2×2 matrix.
#[derive(Clone, Copy, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: [f64; 2],
    pub vectors: [Vec2; 2],
}

/// Eigenvector of n·σ with eigenvalue `sign` (±1) for a unit vector `n`.
///
/// Gauge: the first component is real and positive; if its modulus is below
/// 1e−8 the second component is made real and positive instead.
pub fn pauli_eigenvector(n: [f64; 3], sign: f64) -> Vec2 {
    let [nx, ny, nz] = n;
    // Two algebraically equivalent candidates; pick the better conditioned.
    let (a, b) = if sign * nz >= 0.0 {
        (C64::new(nz + sign, 0.0), C64::new(nx, ny))
    } else {
        (C64::new(nx, -ny), C64::new(sign - nz, 0.0))
    };
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (a, b) = (a / norm, b / norm);
    let phase = if a.norm() >= 1e-8 {
        a.conj() / a.norm()
    } else {
        b.conj() / b.norm()
    };
    [a * phase, b * phase]
}

pub fn inner(u: &Vec2, v: &Vec2) -> C64 {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, o: Matrix2) -> Matrix2 {
        let ([[a, b], [c, d]], [[e, f], [g, h]]) = (self.0, o.0);
        Matrix2::new(a + e, b + f, c + g, d + h)
    }
}

impl AddAssign for Matrix2 {
    fn add_assign(&mut self, o: Matrix2) {
        *self = *self + o;
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, o: Matrix2) -> Matrix2 {
        let ([[a, b], [c, d]], [[e, f], [g, h]]) = (self.0, o.0);
        Matrix2::new(a - e, b - f, c - g, d - h)
    }
}

impl Neg for Matrix2 {
    type Output = Matrix2;
    fn neg(self) -> Matrix2 {
        self.scale_real(-1.0)
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    #[inline]
    fn mul(self, o: Matrix2) -> Matrix2 {
        let ([[a, b], [c, d]], [[e, f], [g, h]]) = (self.0, o.0);
        Matrix2::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    }
}

impl Mul<f64> for Matrix2 {
    type Output = Matrix2;
    fn mul(self, s: f64) -> Matrix2 {
        self.scale_real(s)
    }
}

impl Mul<C64> for Matrix2 {
    type Output = Matrix2;
    fn mul(self, s: C64) -> Matrix2 {
        self.scale(s)
    }
}
