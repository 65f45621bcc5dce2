//! Dense complex linear algebra on one- and two-qubit objects.
//!
//! Basis order for two-qubit objects is `|OO>, |OT>, |TO>, |TT>` with Alice as
//! the first tensor factor, so index = 2 * alice_bit + bob_bit.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QgameError, Result};

pub type C64 = Complex64;

/// Tolerance for pure linear-algebra identities.
pub const LINALG_TOL: f64 = 1e-12;
/// Tolerance for accepting user-supplied matrices as unitary.
pub const UNITARY_GATE_TOL: f64 = 1e-9;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Measurement outcome of the two-qubit register. `O` is bit 0, `T` is bit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    OO,
    OT,
    TO,
    TT,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [Outcome::OO, Outcome::OT, Outcome::TO, Outcome::TT];

    pub fn index(self) -> usize {
        match self {
            Outcome::OO => 0,
            Outcome::OT => 1,
            Outcome::TO => 2,
            Outcome::TT => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Outcome> {
        Outcome::ALL.get(i).copied()
    }

    /// (Alice bit, Bob bit).
    pub fn bits(self) -> (usize, usize) {
        let i = self.index();
        (i >> 1, i & 1)
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::OO => "OO",
            Outcome::OT => "OT",
            Outcome::TO => "TO",
            Outcome::TT => "TT",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "OO" | "00" => Ok(Outcome::OO),
            "OT" | "01" => Ok(Outcome::OT),
            "TO" | "10" => Ok(Outcome::TO),
            "TT" | "11" => Ok(Outcome::TT),
            _ => Err(format!("unknown outcome '{s}' (expected OO, OT, TO or TT)")),
        }
    }
}

fn check_finite(z: C64, what: &'static str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(QgameError::NonFinite(what))
    }
}

/// 2x2 complex matrix, row-major. Serializes as `[[[re, im], ...], ...]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[[[f64; 2]; 2]; 2]", try_from = "[[[f64; 2]; 2]; 2]")]
pub struct Mat2(pub [[C64; 2]; 2]);

impl From<Mat2> for [[[f64; 2]; 2]; 2] {
    fn from(m: Mat2) -> Self {
        m.entries_re_im()
    }
}

impl TryFrom<[[[f64; 2]; 2]; 2]> for Mat2 {
    type Error = QgameError;

    fn try_from(entries: [[[f64; 2]; 2]; 2]) -> Result<Self> {
        Mat2::from_re_im(entries)
    }
}

impl Mat2 {
    pub fn new(entries: [[C64; 2]; 2]) -> Result<Self> {
        for z in entries.iter().flatten() {
            check_finite(*z, "matrix entry")?;
        }
        Ok(Mat2(entries))
    }

    pub fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn zero() -> Self {
        Mat2([[ZERO; 2]; 2])
    }

    pub fn pauli_x() -> Self {
        Mat2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn pauli_y() -> Self {
        Mat2([[ZERO, -I], [I, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Mat2([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[r][c]
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.0;
        for z in out.iter_mut().flatten() {
            *z *= s;
        }
        Mat2(out)
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() < 1e-300 {
            return None;
        }
        let m = &self.0;
        Some(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    /// Largest entry magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.0.iter().flatten().zip(other.0.iter().flatten()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `max |M^dag M - I|` entrywise.
    pub fn unitarity_deviation(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Mat2::identity())
    }

    pub fn ensure_unitary(&self) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation.is_nan() {
            return Err(QgameError::NonFinite("matrix entry"));
        }
        if deviation > UNITARY_GATE_TOL {
            return Err(QgameError::NonUnitaryInput { deviation });
        }
        Ok(())
    }

    /// Divides out the determinant phase so the result lies in SU(2).
    /// The branch of the square root is the principal one; the result is
    /// defined up to an overall sign.
    pub fn to_special_unitary(&self) -> Self {
        let d = self.det();
        let phase = C64::from_polar(1.0, -0.5 * d.arg());
        self.scale(phase)
    }

    pub fn entries_re_im(&self) -> [[[f64; 2]; 2]; 2] {
        let m = &self.0;
        [[[m[0][0].re, m[0][0].im], [m[0][1].re, m[0][1].im]], [[m[1][0].re, m[1][0].im], [m[1][1].re, m[1][1].im]]]
    }

    pub fn from_re_im(entries: [[[f64; 2]; 2]; 2]) -> Result<Self> {
        let z = |r: usize, c: usize| C64::new(entries[r][c][0], entries[r][c][1]);
        Mat2::new([[z(0, 0), z(0, 1)], [z(1, 0), z(1, 1)]])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, z) in row.iter_mut().enumerate() {
                *z = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

/// 4x4 complex matrix, row-major in the `|OO>, |OT>, |TO>, |TT>` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [[C64; 4]; 4]);

impl Mat4 {
    pub fn identity() -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = ONE;
        }
        Mat4(m)
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[r][c]
    }

    pub fn dagger(&self) -> Self {
        let mut out = [[ZERO; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, z) in row.iter_mut().enumerate() {
                *z = self.0[c][r].conj();
            }
        }
        Mat4(out)
    }

    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        self.0.iter().flatten().zip(other.0.iter().flatten()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn unitarity_deviation(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Mat4::identity())
    }

    pub fn ensure_unitary(&self) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation.is_nan() {
            return Err(QgameError::NonFinite("matrix entry"));
        }
        if deviation > UNITARY_GATE_TOL {
            return Err(QgameError::NonUnitaryInput { deviation });
        }
        Ok(())
    }

    pub(crate) fn apply_unchecked(&self, v: &State4) -> State4 {
        let mut out = [ZERO; 4];
        for (r, z) in out.iter_mut().enumerate() {
            *z = (0..4).map(|c| self.0[r][c] * v.0[c]).sum();
        }
        State4(out)
    }
}

impl Mul for Mat4 {
    type Output = Mat4;

    fn mul(self, rhs: Mat4) -> Mat4 {
        let mut out = [[ZERO; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, z) in row.iter_mut().enumerate() {
                *z = (0..4).map(|k| self.0[r][k] * rhs.0[k][c]).sum();
            }
        }
        Mat4(out)
    }
}

/// Two-qubit pure state, amplitudes in `|OO>, |OT>, |TO>, |TT>` order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State4(pub [C64; 4]);

impl State4 {
    pub fn new(amplitudes: [C64; 4]) -> Result<Self> {
        for z in &amplitudes {
            check_finite(*z, "state amplitude")?;
        }
        Ok(State4(amplitudes))
    }

    pub fn basis(outcome: Outcome) -> Self {
        let mut amp = [ZERO; 4];
        amp[outcome.index()] = ONE;
        State4(amp)
    }

    pub fn amplitude(&self, outcome: Outcome) -> C64 {
        self.0[outcome.index()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        State4(self.0.map(|z| z * s))
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &State4) -> C64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn probabilities(&self) -> [f64; 4] {
        self.0.map(|z| z.norm_sqr())
    }

    /// Coefficient matrix `C` with `|psi> = sum C[s][t] |s t>`.
    pub fn coefficient_matrix(&self) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0], a[1]], [a[2], a[3]]])
    }

    pub fn from_coefficient_matrix(c: &Mat2) -> Self {
        State4([c.0[0][0], c.0[0][1], c.0[1][0], c.0[1][1]])
    }
}

/// Kronecker product `a ⊗ b`, Alice (`a`) as the first factor.
pub fn tensor(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, z) in row.iter_mut().enumerate() {
            *z = a.0[r >> 1][c >> 1] * b.0[r & 1][c & 1];
        }
    }
    Mat4(out)
}

/// Applies a unitary to a state. The result is not renormalized.
pub fn apply(m: &Mat4, v: &State4) -> Result<State4> {
    m.ensure_unitary()?;
    Ok(m.apply_unchecked(v))
}

pub fn overlap_probability(target: Outcome, v: &State4) -> f64 {
    v.amplitude(target).norm_sqr()
}

/// Fidelity `|<u|v>|`; 1 means the states agree up to a global phase.
pub fn same_up_to_global_phase(u: &State4, v: &State4) -> f64 {
    u.inner(v).norm().min(1.0)
}
