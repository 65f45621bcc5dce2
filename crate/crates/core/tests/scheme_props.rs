use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use qgame_core::game::{bos_matrix, expected_payoffs, reduced_payoffs_max_entangled, BosParams};
use qgame_core::qlinalg::{apply, tensor, Mat2, Mat4, State4, C64, LINALG_TOL};
use qgame_core::scheme::{
    closed_form_max_entangled, closed_form_unentangled, entangling_gate, outcome_distribution, strategy_matrix,
    EntanglementParam, OutcomeDistribution, StrategyParams, StrategySpace,
};

fn angle() -> impl Strategy<Value = f64> {
    -PI..PI
}

fn full_move() -> impl Strategy<Value = StrategyParams> {
    (angle(), angle(), angle()).prop_map(|(t, f, s)| StrategyParams::full(t, f, s).unwrap())
}

fn restricted_move() -> impl Strategy<Value = StrategyParams> {
    (angle(), angle()).prop_map(|(t, f)| StrategyParams::restricted(t, f).unwrap())
}

/// A U(2) element: SU(2) times an arbitrary phase.
fn unitary() -> impl Strategy<Value = Mat2> {
    (full_move(), angle()).prop_map(|(p, g)| strategy_matrix(&p).scale(C64::from_polar(1.0, g)))
}

fn delta() -> impl Strategy<Value = EntanglementParam> {
    (0.0..=FRAC_PI_2).prop_map(|d| EntanglementParam::new(d).unwrap())
}

fn xx() -> Mat4 {
    tensor(&Mat2::pauli_x(), &Mat2::pauli_x())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tensor_is_multiplicative(a in unitary(), b in unitary(), c in unitary(), d in unitary()) {
        let lhs = tensor(&a, &b) * tensor(&c, &d);
        let rhs = tensor(&(a * c), &(b * d));
        prop_assert!(lhs.max_abs_diff(&rhs) < LINALG_TOL);
    }

    #[test]
    fn dagger_is_an_involution(a in unitary(), b in unitary()) {
        let m = tensor(&a, &b);
        prop_assert_eq!(m.dagger().dagger(), m);
        prop_assert_eq!(a.dagger().dagger(), a);
    }

    #[test]
    fn apply_preserves_norm(a in unitary(), b in unitary(), c in unitary()) {
        let v = State4::from_coefficient_matrix(&c.scale(C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)));
        prop_assert!((v.norm_sqr() - 1.0).abs() < LINALG_TOL);
        let out = apply(&tensor(&a, &b), &v).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < LINALG_TOL);
        let total: f64 = out.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < LINALG_TOL);
    }

    #[test]
    fn strategy_matrix_is_special_unitary(p in full_move()) {
        let u = strategy_matrix(&p);
        prop_assert!(u.unitarity_deviation() <= LINALG_TOL);
        prop_assert!((u.det() - C64::new(1.0, 0.0)).norm() <= LINALG_TOL);
    }

    #[test]
    fn gate_commutes_with_xx(d in delta()) {
        let j = entangling_gate(d);
        prop_assert!((j * xx()).max_abs_diff(&(xx() * j)) < LINALG_TOL);
        prop_assert!(j.unitarity_deviation() < LINALG_TOL);
    }

    #[test]
    fn distribution_is_normalized(d in delta(), a in full_move(), b in full_move()) {
        let dist = outcome_distribution(d, &strategy_matrix(&a), &strategy_matrix(&b)).unwrap();
        prop_assert!((dist.total() - 1.0).abs() < LINALG_TOL);
        prop_assert!(dist.as_array().iter().all(|p| (0.0..=1.0 + LINALG_TOL).contains(p)));
    }

    #[test]
    fn unentangled_play_ignores_phases(a in full_move(), b in full_move()) {
        let d = outcome_distribution(EntanglementParam::NONE, &strategy_matrix(&a), &strategy_matrix(&b)).unwrap();
        let a0 = StrategyParams::classical(a.theta()).unwrap();
        let b0 = StrategyParams::classical(b.theta()).unwrap();
        let d0 = outcome_distribution(EntanglementParam::NONE, &strategy_matrix(&a0), &strategy_matrix(&b0)).unwrap();
        prop_assert!(d.max_abs_diff(&d0) < LINALG_TOL);
    }

    #[test]
    fn max_entangled_closed_form_leaves_off_diagonal_mass(a in restricted_move(), b in restricted_move()) {
        let (oo, tt) = closed_form_max_entangled(&a, &b).unwrap();
        let d = outcome_distribution(EntanglementParam::MAX, &strategy_matrix(&a), &strategy_matrix(&b)).unwrap();
        prop_assert!((d.p_ot + d.p_to - (1.0 - (oo + tt))).abs() < LINALG_TOL);
    }

    #[test]
    fn payoffs_are_linear_in_distribution(w in 0.0..=1.0f64, a in full_move(), b in full_move(), c in full_move()) {
        let m = bos_matrix(&BosParams::default()).unwrap();
        let d1 = outcome_distribution(EntanglementParam::MAX, &strategy_matrix(&a), &strategy_matrix(&b)).unwrap();
        let d2 = outcome_distribution(EntanglementParam::NONE, &strategy_matrix(&c), &strategy_matrix(&a)).unwrap();
        let p1 = d1.as_array();
        let p2 = d2.as_array();
        let mix = OutcomeDistribution::from_array(std::array::from_fn(|k| w * p1[k] + (1.0 - w) * p2[k]));
        let (e1, e2, em) = (expected_payoffs(&d1, &m), expected_payoffs(&d2, &m), expected_payoffs(&mix, &m));
        prop_assert!((em.alice - (w * e1.alice + (1.0 - w) * e2.alice)).abs() < LINALG_TOL);
        prop_assert!((em.bob - (w * e1.bob + (1.0 - w) * e2.bob)).abs() < LINALG_TOL);
        let (lo, hi) = m.span();
        prop_assert!(em.alice >= lo - LINALG_TOL && em.alice <= hi + LINALG_TOL);
    }

    #[test]
    fn reduced_payoffs_agree_with_any_off_diagonal_split(oo in 0.0..=1.0f64, frac_tt in 0.0..=1.0f64, split in 0.0..=1.0f64) {
        let p = BosParams::default();
        let tt = (1.0 - oo) * frac_tt;
        let rest = 1.0 - oo - tt;
        let dist = OutcomeDistribution::from_array([oo, rest * split, rest * (1.0 - split), tt]);
        let full = expected_payoffs(&dist, &bos_matrix(&p).unwrap());
        let reduced = reduced_payoffs_max_entangled(oo, tt, &p).unwrap();
        prop_assert!(full.max_abs_diff(&reduced) < LINALG_TOL);
    }

    #[test]
    fn spaces_nest_by_embedding(t in angle(), f in angle()) {
        let c = StrategyParams::classical(t).unwrap();
        let r = c.embed(StrategySpace::Restricted).unwrap();
        let full = r.embed(StrategySpace::FullSU2).unwrap();
        prop_assert!(strategy_matrix(&c).max_abs_diff(&strategy_matrix(&full)) == 0.0);
        let r2 = StrategyParams::restricted(t, f).unwrap();
        let f2 = StrategyParams::full(t, f, f).unwrap();
        prop_assert!(strategy_matrix(&r2).max_abs_diff(&strategy_matrix(&f2)) < LINALG_TOL);
    }
}

#[test]
fn unentangled_closed_form_matches_circuit() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let a = StrategyParams::full(rng.random_range(-PI..PI), rng.random_range(-PI..PI), rng.random_range(-PI..PI))
            .unwrap();
        let b = StrategyParams::full(rng.random_range(-PI..PI), rng.random_range(-PI..PI), rng.random_range(-PI..PI))
            .unwrap();
        let circuit =
            outcome_distribution(EntanglementParam::NONE, &strategy_matrix(&a), &strategy_matrix(&b)).unwrap();
        assert!(closed_form_unentangled(&a, &b).max_abs_diff(&circuit) < LINALG_TOL);
    }
}

#[test]
fn max_entangled_closed_form_matches_circuit() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let a = StrategyParams::restricted(rng.random_range(-PI..PI), rng.random_range(-PI..PI)).unwrap();
        let b = StrategyParams::restricted(rng.random_range(-PI..PI), rng.random_range(-PI..PI)).unwrap();
        let circuit = outcome_distribution(EntanglementParam::MAX, &strategy_matrix(&a), &strategy_matrix(&b)).unwrap();
        let (oo, tt) = closed_form_max_entangled(&a, &b).unwrap();
        assert!((oo - circuit.p_oo).abs() < LINALG_TOL, "{a:?} {b:?}");
        assert!((tt - circuit.p_tt).abs() < LINALG_TOL, "{a:?} {b:?}");
    }
}

#[test]
fn classical_moves_stay_classical_at_any_entanglement() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1000 {
        let d = EntanglementParam::new(rng.random_range(0.0..=FRAC_PI_2)).unwrap();
        let a = strategy_matrix(&StrategyParams::classical(rng.random_range(-PI..PI)).unwrap());
        let b = strategy_matrix(&StrategyParams::classical(rng.random_range(-PI..PI)).unwrap());
        let entangled = outcome_distribution(d, &a, &b).unwrap();
        let plain = outcome_distribution(EntanglementParam::NONE, &a, &b).unwrap();
        assert!(entangled.max_abs_diff(&plain) < LINALG_TOL);
    }
}
