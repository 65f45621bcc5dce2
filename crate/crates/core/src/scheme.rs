//! The entangling-gate quantization scheme.
//!
//! Both players start in `|OO>`. The shared gate `J(delta)` entangles the
//! register, Alice and Bob each apply a local SU(2) move, `J^dag` undoes the
//! entangling step and the register is measured in the computational basis.
//!
//! `J(delta) = exp(i (delta/2) X⊗X) = cos(delta/2) I + i sin(delta/2) X⊗X`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QgameError, Result};
use crate::qlinalg::{apply, tensor, Mat2, Mat4, Outcome, State4, C64, I, ZERO};

/// Maps an angle into `(-pi, pi]`.
pub fn normalize_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategySpace {
    /// theta only; phi = psi = 0.
    Classical,
    /// theta and phi with psi = phi.
    Restricted,
    /// theta, phi, psi independent.
    #[serde(rename = "full")]
    FullSU2,
}

impl StrategySpace {
    /// Number of free angles a player controls.
    pub fn dimension(self) -> usize {
        match self {
            StrategySpace::Classical => 1,
            StrategySpace::Restricted => 2,
            StrategySpace::FullSU2 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StrategySpace::Classical => "classical",
            StrategySpace::Restricted => "restricted",
            StrategySpace::FullSU2 => "full",
        }
    }
}

impl fmt::Display for StrategySpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for StrategySpace {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "classical" => Ok(StrategySpace::Classical),
            "restricted" => Ok(StrategySpace::Restricted),
            "full" | "fullsu2" | "su2" => Ok(StrategySpace::FullSU2),
            _ => Err(format!("unknown strategy space '{s}' (expected classical, restricted or full)")),
        }
    }
}

#[derive(Deserialize)]
struct RawParams {
    theta: f64,
    #[serde(default)]
    phi: f64,
    #[serde(default)]
    psi: f64,
    space: StrategySpace,
}

/// Angles of a player's move together with the space they were drawn from.
///
/// Angles are kept in `(-pi, pi]`. The space tag constrains the free angles:
/// classical moves have `phi = psi = 0`, restricted moves have `psi = phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct StrategyParams {
    theta: f64,
    phi: f64,
    psi: f64,
    space: StrategySpace,
}

impl TryFrom<RawParams> for StrategyParams {
    type Error = QgameError;

    fn try_from(raw: RawParams) -> Result<Self> {
        match raw.space {
            StrategySpace::Classical if raw.phi != 0.0 || raw.psi != 0.0 => {
                Err(QgameError::InvalidConfig("classical strategies must have phi = psi = 0".into()))
            }
            StrategySpace::Restricted if normalize_angle(raw.phi) != normalize_angle(raw.psi) => {
                Err(QgameError::InvalidConfig("restricted strategies must have psi = phi".into()))
            }
            space => StrategyParams::with_space(space, raw.theta, raw.phi, raw.psi),
        }
    }
}

fn finite(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(QgameError::NonFinite(what))
    }
}

impl StrategyParams {
    pub fn classical(theta: f64) -> Result<Self> {
        Ok(StrategyParams {
            theta: normalize_angle(finite(theta, "theta")?),
            phi: 0.0,
            psi: 0.0,
            space: StrategySpace::Classical,
        })
    }

    pub fn restricted(theta: f64, phi: f64) -> Result<Self> {
        let phi = normalize_angle(finite(phi, "phi")?);
        Ok(StrategyParams {
            theta: normalize_angle(finite(theta, "theta")?),
            phi,
            psi: phi,
            space: StrategySpace::Restricted,
        })
    }

    pub fn full(theta: f64, phi: f64, psi: f64) -> Result<Self> {
        Ok(StrategyParams {
            theta: normalize_angle(finite(theta, "theta")?),
            phi: normalize_angle(finite(phi, "phi")?),
            psi: normalize_angle(finite(psi, "psi")?),
            space: StrategySpace::FullSU2,
        })
    }

    /// Builds params in `space`, projecting away the angles the space does
    /// not control (phi and psi for classical, psi for restricted).
    pub fn with_space(space: StrategySpace, theta: f64, phi: f64, psi: f64) -> Result<Self> {
        match space {
            StrategySpace::Classical => StrategyParams::classical(theta),
            StrategySpace::Restricted => StrategyParams::restricted(theta, phi),
            StrategySpace::FullSU2 => StrategyParams::full(theta, phi, psi),
        }
    }

    /// Builds params from the free coordinates of `space` in `(theta, phi, psi)` order.
    pub fn from_coords(space: StrategySpace, coords: &[f64]) -> Result<Self> {
        if coords.len() != space.dimension() {
            return Err(QgameError::InvalidConfig(format!(
                "{space} strategies take {} angles, got {}",
                space.dimension(),
                coords.len()
            )));
        }
        let at = |i: usize| coords.get(i).copied().unwrap_or(0.0);
        match space {
            StrategySpace::Classical => StrategyParams::classical(at(0)),
            StrategySpace::Restricted => StrategyParams::restricted(at(0), at(1)),
            StrategySpace::FullSU2 => StrategyParams::full(at(0), at(1), at(2)),
        }
    }

    /// Free coordinates of this move within its space.
    pub fn coords(&self) -> Vec<f64> {
        match self.space {
            StrategySpace::Classical => vec![self.theta],
            StrategySpace::Restricted => vec![self.theta, self.phi],
            StrategySpace::FullSU2 => vec![self.theta, self.phi, self.psi],
        }
    }

    /// Reinterprets the move in a larger (or equal) space. Fails if the move
    /// is not representable in `space`.
    pub fn embed(&self, space: StrategySpace) -> Result<Self> {
        match space {
            StrategySpace::Classical if self.phi != 0.0 || self.psi != 0.0 => {
                Err(QgameError::InvalidConfig("move is not classical".into()))
            }
            StrategySpace::Restricted if self.phi != self.psi => {
                Err(QgameError::InvalidConfig("move does not satisfy psi = phi".into()))
            }
            _ => Ok(StrategyParams { space, ..*self }),
        }
    }

    /// Recovers full-SU(2) angles from a unitary. Any U(2) input is first
    /// projected to SU(2); the result reproduces `u` up to a global phase.
    pub fn from_unitary(u: &Mat2) -> Result<Self> {
        u.ensure_unitary()?;
        let m = u.to_special_unitary();
        let c = m.get(0, 0).norm();
        let s = m.get(0, 1).norm();
        let theta = 2.0 * s.atan2(c);
        // a vanishing entry leaves its half-angle combination unobservable
        let sum_half = if c > 1e-15 { m.get(0, 0).arg() } else { 0.0 };
        let diff_half = if s > 1e-15 { (m.get(0, 1) * -I).arg() } else { 0.0 };
        StrategyParams::full(theta, sum_half + diff_half, sum_half - diff_half)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn space(&self) -> StrategySpace {
        self.space
    }
}

impl fmt::Display for StrategyParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.space {
            StrategySpace::Classical => write!(f, "theta={}", self.theta),
            StrategySpace::Restricted => write!(f, "theta={},phi={}", self.theta, self.phi),
            StrategySpace::FullSU2 => {
                write!(f, "theta={},phi={},psi={}", self.theta, self.phi, self.psi)
            }
        }
    }
}

/// `U(theta, phi, psi)`: a unit-determinant unitary.
pub fn strategy_matrix(p: &StrategyParams) -> Mat2 {
    let (s, c) = (p.theta / 2.0).sin_cos();
    let plus = (p.phi + p.psi) / 2.0;
    let minus = (p.phi - p.psi) / 2.0;
    let e = |x: f64| C64::from_polar(1.0, x);
    Mat2([[e(plus) * c, I * e(minus) * s], [I * e(-minus) * s, e(-plus) * c]])
}

/// Entanglement strength `delta` in `[0, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct EntanglementParam(f64);

impl EntanglementParam {
    pub const NONE: EntanglementParam = EntanglementParam(0.0);
    pub const MAX: EntanglementParam = EntanglementParam(FRAC_PI_2);

    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(QgameError::NonFinite("delta"));
        }
        if !(0.0..=FRAC_PI_2 + 1e-12).contains(&delta) {
            return Err(QgameError::InvalidDelta(delta));
        }
        Ok(EntanglementParam(delta.min(FRAC_PI_2)))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_max(self) -> bool {
        (self.0 - FRAC_PI_2).abs() <= 1e-12
    }
}

impl<'de> Deserialize<'de> for EntanglementParam {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        EntanglementParam::new(v).map_err(serde::de::Error::custom)
    }
}

/// `J(delta)` as an explicit 4x4 matrix.
pub fn entangling_gate(d: EntanglementParam) -> Mat4 {
    let (s, c) = (d.0 / 2.0).sin_cos();
    let mut m = Mat4::identity();
    for k in 0..4 {
        m.0[k][k] = C64::new(c, 0.0);
        // X⊗X flips both bits: |k> -> |3 - k>
        m.0[k][3 - k] = I * s;
    }
    m
}

/// Measurement statistics of the final register.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub p_oo: f64,
    pub p_ot: f64,
    pub p_to: f64,
    pub p_tt: f64,
}

impl OutcomeDistribution {
    pub fn from_array(p: [f64; 4]) -> Self {
        OutcomeDistribution { p_oo: p[0], p_ot: p[1], p_to: p[2], p_tt: p[3] }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p_oo, self.p_ot, self.p_to, self.p_tt]
    }

    pub fn get(&self, o: Outcome) -> f64 {
        self.as_array()[o.index()]
    }

    pub fn total(&self) -> f64 {
        self.as_array().iter().sum()
    }

    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        self.as_array().iter().zip(other.as_array()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `J^dag (ua ⊗ ub) J |OO>` built from explicit 4x4 operators.
pub fn final_state(d: EntanglementParam, ua: &Mat2, ub: &Mat2) -> Result<State4> {
    ua.ensure_unitary()?;
    ub.ensure_unitary()?;
    let j = entangling_gate(d);
    let prepared = apply(&j, &State4::basis(Outcome::OO))?;
    let played = apply(&tensor(ua, ub), &prepared)?;
    apply(&j.dagger(), &played)
}

pub fn outcome_distribution(d: EntanglementParam, ua: &Mat2, ub: &Mat2) -> Result<OutcomeDistribution> {
    Ok(OutcomeDistribution::from_array(final_state(d, ua, ub)?.probabilities()))
}

/// Convenience: outcome distribution straight from both players' angles.
pub fn play(d: EntanglementParam, alice: &StrategyParams, bob: &StrategyParams) -> OutcomeDistribution {
    Circuit::new(d).distribution(&strategy_matrix(alice), &strategy_matrix(bob))
}

/// Fast evaluator for a fixed `delta`, used in inner loops.
///
/// Works on the coefficient matrix of the entangled state: `(A ⊗ B)|psi>`
/// has coefficient matrix `A C B^T` when `|psi>` has coefficient matrix `C`.
/// Inputs are assumed unitary.
#[derive(Debug, Clone, Copy)]
pub struct Circuit {
    cos: f64,
    sin: f64,
    prepared: Mat2,
}

impl Circuit {
    pub fn new(d: EntanglementParam) -> Self {
        let (sin, cos) = (d.0 / 2.0).sin_cos();
        Circuit { cos, sin, prepared: Mat2::diag(C64::new(cos, 0.0), I * sin) }
    }

    pub fn final_state(&self, ua: &Mat2, ub: &Mat2) -> State4 {
        let played = *ua * self.prepared * ub.transpose();
        let v = State4::from_coefficient_matrix(&played).0;
        let (c, s) = (C64::new(self.cos, 0.0), I * self.sin);
        State4([c * v[0] - s * v[3], c * v[1] - s * v[2], c * v[2] - s * v[1], c * v[3] - s * v[0]])
    }

    pub fn distribution(&self, ua: &Mat2, ub: &Mat2) -> OutcomeDistribution {
        OutcomeDistribution::from_array(self.final_state(ua, ub).probabilities())
    }
}

/// Outcome probabilities with no entanglement; depends on the thetas only.
pub fn closed_form_unentangled(pa: &StrategyParams, pb: &StrategyParams) -> OutcomeDistribution {
    let (sa, ca) = (pa.theta / 2.0).sin_cos();
    let (sb, cb) = (pb.theta / 2.0).sin_cos();
    let (ca2, sa2, cb2, sb2) = (ca * ca, sa * sa, cb * cb, sb * sb);
    OutcomeDistribution { p_oo: ca2 * cb2, p_ot: ca2 * sb2, p_to: sa2 * cb2, p_tt: sa2 * sb2 }
}

/// `(P_OO, P_TT)` at maximal entanglement for moves with `psi = phi`.
pub fn closed_form_max_entangled(pa: &StrategyParams, pb: &StrategyParams) -> Result<(f64, f64)> {
    if pa.space == StrategySpace::FullSU2 || pb.space == StrategySpace::FullSU2 {
        return Err(QgameError::WrongSpace);
    }
    let (sa, ca) = (pa.theta / 2.0).sin_cos();
    let (sb, cb) = (pb.theta / 2.0).sin_cos();
    let (sp, cp) = (pa.phi + pb.phi).sin_cos();
    let p_oo = (ca * cb * cp).powi(2);
    let p_tt = (sa * sb - ca * cb * sp).powi(2);
    Ok((p_oo, p_tt))
}

/// The entangled state `J(pi/2)|OO> = (|OO> + i|TT>)/sqrt(2)` as a
/// coefficient matrix.
pub(crate) fn max_entangled_coefficients(target: Outcome) -> Mat2 {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let ih = I * std::f64::consts::FRAC_1_SQRT_2;
    // J|k> = (|k> + i|3-k>)/sqrt(2)
    let mut amp = [ZERO; 4];
    amp[target.index()] = h;
    amp[3 - target.index()] = ih;
    State4(amp).coefficient_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::ONE;
    use crate::qlinalg::{same_up_to_global_phase, LINALG_TOL};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn normalization_is_half_open() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
        assert_eq!(normalize_angle(0.25), 0.25);
    }

    #[test]
    fn space_constraints_are_enforced() {
        let r = StrategyParams::restricted(1.0, 0.4).unwrap();
        assert_eq!(r.psi(), r.phi());
        let c = StrategyParams::classical(1.0).unwrap();
        assert_eq!((c.phi(), c.psi()), (0.0, 0.0));
        assert!(StrategyParams::classical(f64::NAN).is_err());
        let bad: std::result::Result<StrategyParams, _> =
            serde_json::from_str(r#"{"theta":1.0,"phi":0.2,"psi":0.3,"space":"restricted"}"#);
        assert!(bad.is_err());
        let ok: StrategyParams =
            serde_json::from_str(r#"{"theta":7.0,"phi":0.2,"psi":0.2,"space":"restricted"}"#).unwrap();
        assert!((ok.theta() - (7.0 - TAU)).abs() < 1e-15);
    }

    #[test]
    fn strategy_matrix_examples() {
        let id = strategy_matrix(&StrategyParams::classical(0.0).unwrap());
        assert!(id.max_abs_diff(&Mat2::identity()) < LINALG_TOL);

        let flip = strategy_matrix(&StrategyParams::restricted(PI, 0.0).unwrap());
        assert!(flip.max_abs_diff(&Mat2::pauli_x().scale(I)) < LINALG_TOL);

        let phase = strategy_matrix(&StrategyParams::restricted(0.0, FRAC_PI_2).unwrap());
        assert!(phase.max_abs_diff(&Mat2::diag(I, -I)) < LINALG_TOL);
    }

    #[test]
    fn restricted_matrix_matches_reduced_form() {
        // psi = phi collapses the off-diagonal phases
        let (theta, phi) = (1.3_f64, -0.8_f64);
        let u = strategy_matrix(&StrategyParams::restricted(theta, phi).unwrap());
        let (s, c) = (theta / 2.0).sin_cos();
        let expected = Mat2([[C64::from_polar(c, phi), I * s], [I * s, C64::from_polar(c, -phi)]]);
        assert!(u.max_abs_diff(&expected) < LINALG_TOL);
    }

    #[test]
    fn entangling_gate_examples() {
        assert!(entangling_gate(EntanglementParam::NONE).max_abs_diff(&Mat4::identity()) < LINALG_TOL);
        let j = entangling_gate(EntanglementParam::MAX);
        assert!(j.unitarity_deviation() < LINALG_TOL);
        let out = apply(&j, &State4::basis(Outcome::OO)).unwrap();
        let expected = State4([C64::new(FRAC_1_SQRT_2, 0.0), ZERO, ZERO, I * FRAC_1_SQRT_2]);
        for k in 0..4 {
            assert!((out.0[k] - expected.0[k]).norm() < LINALG_TOL);
        }
        // reduced single-player statistics are maximally mixed
        let p = out.probabilities();
        assert!((p[0] + p[1] - 0.5).abs() < LINALG_TOL);
        assert!((p[0] + p[2] - 0.5).abs() < LINALG_TOL);
        let off_diag = out.0[0] * out.0[2].conj() + out.0[1] * out.0[3].conj();
        assert!(off_diag.norm() < LINALG_TOL);
    }

    #[test]
    fn delta_range_is_checked() {
        assert!(EntanglementParam::new(-0.1).is_err());
        assert!(EntanglementParam::new(2.0).is_err());
        assert!(EntanglementParam::new(f64::INFINITY).is_err());
        assert!(EntanglementParam::new(FRAC_PI_2).unwrap().is_max());
    }

    #[test]
    fn final_state_examples() {
        let id = Mat2::identity();
        for delta in [0.0, 0.4, FRAC_PI_2] {
            let d = EntanglementParam::new(delta).unwrap();
            let out = final_state(d, &id, &id).unwrap();
            assert!((same_up_to_global_phase(&out, &State4::basis(Outcome::OO)) - 1.0).abs() < LINALG_TOL);
        }
        let out = final_state(EntanglementParam::MAX, &id, &Mat2::diag(I, -I)).unwrap();
        assert!((same_up_to_global_phase(&out, &State4::basis(Outcome::TT)) - 1.0).abs() < LINALG_TOL);

        let flip = Mat2::pauli_x().scale(I);
        let out = final_state(EntanglementParam::NONE, &flip, &flip).unwrap();
        assert!((same_up_to_global_phase(&out, &State4::basis(Outcome::TT)) - 1.0).abs() < LINALG_TOL);

        let mut bad = Mat2::identity();
        bad.0[0][1] = ONE;
        assert!(matches!(final_state(EntanglementParam::MAX, &bad, &id), Err(QgameError::NonUnitaryInput { .. })));
    }

    #[test]
    fn outcome_distribution_examples() {
        let id = Mat2::identity();
        let d = outcome_distribution(EntanglementParam::MAX, &id, &id).unwrap();
        assert!(d.max_abs_diff(&OutcomeDistribution::from_array([1.0, 0.0, 0.0, 0.0])) < LINALG_TOL);

        let a = strategy_matrix(&StrategyParams::restricted(PI, FRAC_PI_2).unwrap());
        let b = strategy_matrix(&StrategyParams::restricted(PI, 0.0).unwrap());
        let d = outcome_distribution(EntanglementParam::MAX, &a, &b).unwrap();
        assert!(d.max_abs_diff(&OutcomeDistribution::from_array([0.0, 0.0, 0.0, 1.0])) < LINALG_TOL);

        let h = strategy_matrix(&StrategyParams::classical(FRAC_PI_2).unwrap());
        let d = outcome_distribution(EntanglementParam::NONE, &h, &h).unwrap();
        assert!(d.max_abs_diff(&OutcomeDistribution::from_array([0.25; 4])) < LINALG_TOL);
    }

    #[test]
    fn closed_form_examples() {
        let zero = StrategyParams::classical(0.0).unwrap();
        let flip = StrategyParams::classical(PI).unwrap();
        assert_eq!(closed_form_unentangled(&zero, &zero).as_array(), [1.0, 0.0, 0.0, 0.0]);
        let d = closed_form_unentangled(&flip, &zero);
        assert!(d.max_abs_diff(&OutcomeDistribution::from_array([0.0, 0.0, 1.0, 0.0])) < LINALG_TOL);

        let (oo, tt) = closed_form_max_entangled(&zero, &zero).unwrap();
        assert_eq!((oo, tt), (1.0, 0.0));
        let quarter = StrategyParams::restricted(0.0, FRAC_PI_2).unwrap();
        let (oo, tt) = closed_form_max_entangled(&zero.embed(StrategySpace::Restricted).unwrap(), &quarter).unwrap();
        assert!(oo.abs() < LINALG_TOL && (tt - 1.0).abs() < LINALG_TOL);

        let full = StrategyParams::full(0.1, 0.2, 0.3).unwrap();
        assert_eq!(closed_form_max_entangled(&full, &zero), Err(QgameError::WrongSpace));
    }

    #[test]
    fn fast_circuit_matches_explicit_operators() {
        let a = strategy_matrix(&StrategyParams::full(0.7, -2.2, 1.9).unwrap());
        let b = strategy_matrix(&StrategyParams::full(-2.6, 0.3, -0.4).unwrap());
        for delta in [0.0, 0.3, 1.1, FRAC_PI_2] {
            let d = EntanglementParam::new(delta).unwrap();
            let slow = final_state(d, &a, &b).unwrap();
            let fast = Circuit::new(d).final_state(&a, &b);
            for k in 0..4 {
                assert!((slow.0[k] - fast.0[k]).norm() < LINALG_TOL);
            }
        }
    }

    #[test]
    fn from_unitary_recovers_move() {
        for (t, f, s) in [(0.7, -2.2, 1.9), (0.0, 1.0, 0.5), (PI, 0.4, -1.0), (2.5, 3.0, 3.0)] {
            let u = strategy_matrix(&StrategyParams::full(t, f, s).unwrap());
            let back = strategy_matrix(&StrategyParams::from_unitary(&u).unwrap());
            let tr = (back.dagger() * u).0;
            // equal up to a global phase <=> |tr(back^dag u)| = 2
            assert!(((tr[0][0] + tr[1][1]).norm() - 2.0).abs() < 1e-12);
        }
    }
}
