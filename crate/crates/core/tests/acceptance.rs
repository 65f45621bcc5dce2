//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any failed.

use std::f64::consts::{FRAC_PI_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use num_complex::Complex64;
use qgame_core::cli::{cmd_no_ne_cert, to_json, GameFile};
use qgame_core::equilibrium::{best_response, search_ne, verify_ne, Profile, SearchConfig};
use qgame_core::fullspace::{counter_strategy, no_ne_certificate};
use qgame_core::game::{bos_matrix, classical_mixed_payoff, BosParams, PayoffMatrix, Player, QuantumGame};
use qgame_core::qlinalg::{same_up_to_global_phase, Mat2};
use qgame_core::scheme::{
    closed_form_max_entangled, closed_form_unentangled, final_state, outcome_distribution, strategy_matrix,
    EntanglementParam, StrategyParams, StrategySpace,
};
use qgame_core::QgameError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn bos() -> PayoffMatrix {
    bos_matrix(&BosParams::default()).unwrap()
}

fn angle(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-PI..PI)
}

fn restricted(rng: &mut ChaCha8Rng) -> StrategyParams {
    StrategyParams::restricted(angle(rng), angle(rng)).unwrap()
}

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst0: f64 = 0.0;
    let mut worst1: f64 = 0.0;
    for _ in 0..10_000 {
        let (a, b) = (restricted(&mut rng), restricted(&mut rng));
        let (ua, ub) = (strategy_matrix(&a), strategy_matrix(&b));
        let circuit = outcome_distribution(EntanglementParam::NONE, &ua, &ub).unwrap();
        worst0 = worst0.max(closed_form_unentangled(&a, &b).max_abs_diff(&circuit));
        let circuit = outcome_distribution(EntanglementParam::MAX, &ua, &ub).unwrap();
        let (oo, tt) = closed_form_max_entangled(&a, &b).unwrap();
        worst1 = worst1.max((oo - circuit.p_oo).abs()).max((tt - circuit.p_tt).abs());
    }
    ensure(worst0 <= 1e-12 && worst1 <= 1e-12, format!("worst errors {worst0:e} (delta=0), {worst1:e} (delta=pi/2)"))?;
    Ok(format!("10000 pairs, worst error {worst0:e} at delta=0 and {worst1:e} at delta=pi/2"))
}

fn criterion_2() -> Check {
    let game = QuantumGame::new(EntanglementParam::NONE, bos());
    let cfg = SearchConfig { epsilon: 1e-9, ..SearchConfig::for_space(StrategySpace::Classical) };
    let mixed = classical_mixed_payoff(&BosParams::default());
    ensure((mixed - 14.0 / 6.0).abs() <= 1e-12, format!("mixed payoff formula gives {mixed}"))?;
    let cases = [
        (0.0, 0.0, (5.0, 3.0)),
        (PI, PI, (3.0, 5.0)),
        (2.0 * (2.0f64 / 6.0).sqrt().asin(), 2.0 * (4.0f64 / 6.0).sqrt().asin(), (14.0 / 6.0, 14.0 / 6.0)),
    ];
    let mut worst: f64 = 0.0;
    for (ta, tb, (pa, pb)) in cases {
        let profile =
            Profile::new(StrategyParams::classical(ta).unwrap(), StrategyParams::classical(tb).unwrap()).unwrap();
        let cert = verify_ne(&game, &profile, &cfg).unwrap();
        ensure(cert.is_equilibrium(), format!("({ta}, {tb}) rejected with gap {:e}", cert.max_gap()))?;
        let err = (cert.payoffs.alice - pa).abs().max((cert.payoffs.bob - pb).abs());
        ensure(err <= 1e-9, format!("({ta}, {tb}) pays {:?}", cert.payoffs))?;
        worst = worst.max(cert.max_gap());
    }
    Ok(format!("3 classical equilibria verified, largest gap {worst:e}"))
}

fn criterion_3() -> Check {
    let game = QuantumGame::new(EntanglementParam::MAX, bos());
    let cfg = SearchConfig::for_space(StrategySpace::Restricted);
    let zero = StrategyParams::restricted(0.0, 0.0).unwrap();
    let cert = verify_ne(&game, &Profile::new(zero, zero).unwrap(), &cfg).unwrap();
    ensure(!cert.is_equilibrium(), "identity profile accepted")?;
    ensure((cert.gap_bob - 2.0).abs() <= 1e-9, format!("gap_bob = {}", cert.gap_bob))?;
    let w = cert.witness_bob.ok_or("no witness")?;
    let p_tt = outcome_distribution(EntanglementParam::MAX, &Mat2::identity(), &strategy_matrix(&w)).unwrap().p_tt;
    ensure(p_tt >= 1.0 - 1e-12, format!("witness P_TT = {p_tt}"))?;
    Ok(format!("gap_bob = {}, witness {w} gives P_TT = {p_tt}", cert.gap_bob))
}

fn criterion_4() -> Check {
    let game = QuantumGame::new(EntanglementParam::MAX, bos());
    let cfg = SearchConfig { epsilon: 1e-9, ..SearchConfig::for_space(StrategySpace::Restricted) };
    let t = 2.0 * (2.0f64 / 4.0).sqrt().asin();
    let rows = [(PI, PI), (-t, t), (t, -t)];
    let mut worst: f64 = 0.0;
    for (i, (ta, tb)) in rows.into_iter().enumerate() {
        let profile = Profile::new(
            StrategyParams::restricted(ta, FRAC_PI_2).unwrap(),
            StrategyParams::restricted(tb, 0.0).unwrap(),
        )
        .unwrap();
        let cert = verify_ne(&game, &profile, &cfg).unwrap();
        ensure(cert.is_equilibrium(), format!("row {} rejected with gap {:e}", i + 1, cert.max_gap()))?;
        let err = (cert.payoffs.alice - 3.0).abs().max((cert.payoffs.bob - 5.0).abs());
        ensure(err <= 1e-9, format!("row {} pays {:?}", i + 1, cert.payoffs))?;
        worst = worst.max(cert.max_gap());
    }
    Ok(format!("3 table profiles verified paying (3, 5), largest gap {worst:e}"))
}

fn criterion_5() -> Check {
    let game = QuantumGame::new(EntanglementParam::MAX, bos());
    let cfg = SearchConfig::for_space(StrategySpace::Restricted);
    let report = search_ne(&game, StrategySpace::Restricted, &cfg).unwrap();
    ensure(report.profiles_scanned >= 49usize.pow(3), format!("only {} profiles scanned", report.profiles_scanned))?;
    ensure(!report.certificates.is_empty(), "no equilibria found")?;
    for c in &report.certificates {
        let err = (c.payoffs.alice - 3.0).abs().max((c.payoffs.bob - 5.0).abs());
        ensure(err <= 1e-6, format!("accepted profile pays {:?}", c.payoffs))?;
    }
    let largest = report.clusters.iter().map(|c| c.size).max().unwrap_or(0);
    ensure(largest >= 5, format!("largest cluster has {largest} members"))?;
    Ok(format!(
        "{} profiles scanned, {} equilibria all paying (3, 5), {} cluster(s), largest {largest}",
        report.profiles_scanned,
        report.certificates.len(),
        report.clusters.len()
    ))
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let id = Mat2::identity();
    let mut worst: f64 = 1.0;
    for _ in 0..1000 {
        let p = StrategyParams::full(angle(&mut rng), angle(&mut rng), angle(&mut rng)).unwrap();
        let phase = Complex64::from_polar(1.0, angle(&mut rng));
        let ua = strategy_matrix(&p).scale(phase);
        let u = counter_strategy(&ua).unwrap();
        let lhs = final_state(EntanglementParam::MAX, &ua, &id).unwrap();
        let rhs = final_state(EntanglementParam::MAX, &id, &u).unwrap();
        worst = worst.min(same_up_to_global_phase(&lhs, &rhs));
    }
    ensure(worst >= 1.0 - 1e-12, format!("worst fidelity {worst}"))?;
    Ok(format!("1000 unitaries, worst fidelity {worst}"))
}

fn criterion_7() -> Check {
    let cfg = SearchConfig { seed: 7, ..SearchConfig::for_space(StrategySpace::FullSU2) };
    let report = no_ne_certificate(&bos(), 100, &cfg).unwrap();
    ensure(report.refuted == 100, format!("{} of 100 refuted", report.refuted))?;
    for r in &report.records {
        let err = (r.alice.payoff_achieved - 5.0).abs().max((r.bob.payoff_achieved - 5.0).abs());
        ensure(
            err <= 1e-9,
            format!("sample {} forced payoffs {} / {}", r.index, r.alice.payoff_achieved, r.bob.payoff_achieved),
        )?;
    }
    let again = no_ne_certificate(&bos(), 100, &cfg).unwrap();
    ensure(to_json(&report) == to_json(&again), "library reports differ between runs")?;
    let file = GameFile { name: "bos".into(), delta: None, bos: Some(BosParams::default()), payoffs: None };
    let first = cmd_no_ne_cert(&file, 100, 7).unwrap();
    ensure(first == cmd_no_ne_cert(&file, 100, 7).unwrap(), "CLI reports differ between runs")?;
    let coordination = PayoffMatrix::from_cells([(2.0, 2.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]).unwrap();
    ensure(
        no_ne_certificate(&coordination, 100, &cfg) == Err(QgameError::TrivialGame),
        "coordination game not rejected",
    )?;
    Ok("100/100 refuted with forced payoff 5, byte-identical reruns, coordination game rejected".into())
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst_phi: f64 = 0.0;
    for _ in 0..1000 {
        let (ta, tb) = (angle(&mut rng), angle(&mut rng));
        let a = StrategyParams::full(ta, angle(&mut rng), angle(&mut rng)).unwrap();
        let b = StrategyParams::full(tb, angle(&mut rng), angle(&mut rng)).unwrap();
        let base = outcome_distribution(
            EntanglementParam::NONE,
            &strategy_matrix(&StrategyParams::classical(ta).unwrap()),
            &strategy_matrix(&StrategyParams::classical(tb).unwrap()),
        )
        .unwrap();
        let d = outcome_distribution(EntanglementParam::NONE, &strategy_matrix(&a), &strategy_matrix(&b)).unwrap();
        worst_phi = worst_phi.max(d.max_abs_diff(&base));
    }
    let mut worst_red: f64 = 0.0;
    for _ in 0..1000 {
        let delta = EntanglementParam::new(rng.random_range(0.0..=FRAC_PI_2)).unwrap();
        let a = StrategyParams::classical(angle(&mut rng)).unwrap();
        let b = StrategyParams::classical(angle(&mut rng)).unwrap();
        let (ua, ub) = (strategy_matrix(&a), strategy_matrix(&b));
        let d = outcome_distribution(delta, &ua, &ub).unwrap();
        let base = outcome_distribution(EntanglementParam::NONE, &ua, &ub).unwrap();
        worst_red = worst_red.max(d.max_abs_diff(&base));
    }
    ensure(worst_phi <= 1e-12 && worst_red <= 1e-12, format!("worst errors {worst_phi:e}, {worst_red:e}"))?;
    Ok(format!("phi-independence worst {worst_phi:e}, classical reduction worst {worst_red:e}"))
}

fn criterion_9() -> Check {
    let game = QuantumGame::new(EntanglementParam::NONE, bos());
    let cfg = SearchConfig::for_space(StrategySpace::Classical);
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let (alpha, beta, gamma) = (5.0, 3.0, 1.0);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let opp = StrategyParams::classical(angle(&mut rng)).unwrap();
        // probability that the opponent ends on O
        let o = (opp.theta() / 2.0).cos().powi(2);
        let (player, analytic) = if i % 2 == 0 {
            (Player::Alice, (alpha * o + gamma * (1.0 - o)).max(gamma * o + beta * (1.0 - o)))
        } else {
            (Player::Bob, (beta * o + gamma * (1.0 - o)).max(gamma * o + alpha * (1.0 - o)))
        };
        let br = best_response(&game, &opp, player, StrategySpace::Classical, &cfg).unwrap();
        worst = worst.max((br.payoff - analytic).abs());
    }
    ensure(worst <= 1e-6, format!("worst deviation {worst:e}"))?;
    Ok(format!("100 opponents, worst deviation from the analytic reply {worst:e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("closed forms match the circuit", criterion_1),
        ("classical-regime equilibria", criterion_2),
        ("identity profile broken under entanglement", criterion_3),
        ("entangled equilibrium table", criterion_4),
        ("restricted search pays (3, 5) in families", criterion_5),
        ("counter-strategy fidelity", criterion_6),
        ("no-equilibrium certificate", criterion_7),
        ("phi-independence and classical reduction", criterion_8),
        ("classical best responses match the analytic reply", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
