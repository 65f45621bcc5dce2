//! Unrestricted SU(2) play at maximal entanglement.
//!
//! On `J(pi/2)|OO> = (|OO> + i|TT>)/sqrt(2)` either player can reproduce any
//! local move of the other: `(A ⊗ I)|psi> = (I ⊗ U)|psi>` for a suitable `U`.
//! Hence each player alone can steer the final register to any basis
//! outcome, and in a nontrivial game no profile survives both players'
//! outcome-forcing deviations.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{Profile, SearchConfig};
use crate::error::{QgameError, Result};
use crate::game::{PayoffMatrix, PayoffPair, Player, QuantumGame};
use crate::qlinalg::{Mat2, Outcome};
use crate::scheme::{max_entangled_coefficients, strategy_matrix, EntanglementParam, StrategyParams};

/// Replay tolerance for forced payoffs.
pub const FORCING_TOL: f64 = 1e-9;

/// `U` with `(ua ⊗ I) J|OO> = (I ⊗ U) J|OO>` at maximal entanglement.
///
/// With `C` the coefficient matrix of `J|OO>`, the left side has
/// coefficients `ua C` and the right side `C U^T`, so `U = (C^-1 ua C)^T`.
pub fn counter_strategy(ua: &Mat2) -> Result<Mat2> {
    ua.ensure_unitary()?;
    let c = max_entangled_coefficients(Outcome::OO);
    let c_inv = c.inverse().expect("maximally entangled coefficients are invertible");
    Ok((c_inv * *ua * c).transpose())
}

/// A unitary move for `player` that, against `opponent`, leaves the
/// register in `|target>` (up to phase) after decoding. Returned in SU(2).
pub fn forcing_deviation(opponent: &Mat2, player: Player, target: Outcome) -> Result<Mat2> {
    opponent.ensure_unitary()?;
    let c = max_entangled_coefficients(Outcome::OO);
    let wanted = max_entangled_coefficients(target);
    let v = match player {
        // V C U_opp^T = C_target
        Player::Alice => {
            let m = (c * opponent.transpose()).inverse().expect("invertible");
            wanted * m
        }
        // U_opp C V^T = C_target
        Player::Bob => {
            let m = (*opponent * c).inverse().expect("invertible");
            (m * wanted).transpose()
        }
    };
    Ok(v.to_special_unitary())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxPayoffs {
    pub alice_max: f64,
    pub bob_max: f64,
}

pub fn max_payoff_entries(m: &PayoffMatrix) -> MaxPayoffs {
    let max = |v: [f64; 4]| v.into_iter().fold(f64::NEG_INFINITY, f64::max);
    MaxPayoffs { alice_max: max(m.alice_entries()), bob_max: max(m.bob_entries()) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nontriviality {
    /// Every cell is strict.
    pub nontrivial: bool,
    /// Cells whose payoff sum falls strictly below `alice_max + bob_max`.
    pub strict_cells: Vec<Outcome>,
}

pub fn nontriviality_check(m: &PayoffMatrix) -> Nontriviality {
    let max = max_payoff_entries(m);
    let bound = max.alice_max + max.bob_max;
    let strict_cells: Vec<Outcome> = Outcome::ALL.into_iter().filter(|&o| m.alice(o) + m.bob(o) < bound).collect();
    Nontriviality { nontrivial: strict_cells.len() == Outcome::ALL.len(), strict_cells }
}

/// One player's outcome-forcing deviation from a sampled profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcedDeviation {
    pub target: Outcome,
    pub deviation: Mat2,
    pub deviation_params: StrategyParams,
    pub payoff_achieved: f64,
    /// `payoff_achieved` minus the payoff at the profile.
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub profile: Profile,
    pub payoffs: PayoffPair,
    pub alice: ForcedDeviation,
    pub bob: ForcedDeviation,
    /// `alice_max + bob_max - (payoff_alice + payoff_bob)`; positive in a nontrivial game.
    pub sum_slack: f64,
    /// At least one player strictly gains by forcing.
    pub refuted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoNeReport {
    pub samples: usize,
    pub seed: u64,
    pub max_payoffs: MaxPayoffs,
    pub nontrivial: bool,
    pub strict_cells: Vec<Outcome>,
    pub refuted: usize,
    /// Every deviation reached its player's maximum within tolerance.
    pub all_forced_to_max: bool,
    pub min_sum_slack: f64,
    pub records: Vec<SampleRecord>,
}

impl NoNeReport {
    pub fn all_refuted(&self) -> bool {
        self.refuted == self.samples && self.all_forced_to_max
    }
}

fn best_cell(m: &PayoffMatrix, player: Player) -> Outcome {
    let value = |o: Outcome| match player {
        Player::Alice => m.alice(o),
        Player::Bob => m.bob(o),
    };
    // first maximal cell in OO, OT, TO, TT order
    Outcome::ALL.into_iter().fold(Outcome::OO, |best, o| if value(o) > value(best) { o } else { best })
}

/// Samples `samples` random full-SU(2) profiles and refutes each one with
/// explicit outcome-forcing deviations for both players.
pub fn no_ne_certificate(m: &PayoffMatrix, samples: usize, cfg: &SearchConfig) -> Result<NoNeReport> {
    let check = nontriviality_check(m);
    if !check.nontrivial {
        return Err(QgameError::TrivialGame);
    }
    let max = max_payoff_entries(m);
    let game = QuantumGame::new(EntanglementParam::MAX, *m);
    let targets = (best_cell(m, Player::Alice), best_cell(m, Player::Bob));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draw = || -> [f64; 3] { std::array::from_fn(|_| rng.random_range(-PI..PI)) };
    let mut profiles = Vec::with_capacity(samples);
    for _ in 0..samples {
        let [t, f, s] = draw();
        let alice = StrategyParams::full(t, f, s)?;
        let [t, f, s] = draw();
        let bob = StrategyParams::full(t, f, s)?;
        profiles.push(Profile::new(alice, bob)?);
    }

    let records: Vec<SampleRecord> = profiles
        .par_iter()
        .enumerate()
        .map(|(index, profile)| refute(&game, &max, targets, index, profile))
        .collect::<Result<_>>()?;

    let refuted = records.iter().filter(|r| r.refuted).count();
    let all_forced_to_max = records.iter().all(|r| {
        (r.alice.payoff_achieved - max.alice_max).abs() <= FORCING_TOL
            && (r.bob.payoff_achieved - max.bob_max).abs() <= FORCING_TOL
    });
    let min_sum_slack = records.iter().map(|r| r.sum_slack).fold(f64::INFINITY, f64::min);
    Ok(NoNeReport {
        samples,
        seed: cfg.seed,
        max_payoffs: max,
        nontrivial: check.nontrivial,
        strict_cells: check.strict_cells,
        refuted,
        all_forced_to_max,
        min_sum_slack,
        records,
    })
}

fn refute(
    game: &QuantumGame,
    max: &MaxPayoffs,
    targets: (Outcome, Outcome),
    index: usize,
    profile: &Profile,
) -> Result<SampleRecord> {
    let ua = strategy_matrix(&profile.alice);
    let ub = strategy_matrix(&profile.bob);
    let payoffs = game.play_matrices(&ua, &ub);

    let dev_a = forcing_deviation(&ub, Player::Alice, targets.0)?;
    let achieved_a = game.play_matrices(&dev_a, &ub).alice;
    let dev_b = forcing_deviation(&ua, Player::Bob, targets.1)?;
    let achieved_b = game.play_matrices(&ua, &dev_b).bob;

    let alice = ForcedDeviation {
        target: targets.0,
        deviation: dev_a,
        deviation_params: StrategyParams::from_unitary(&dev_a)?,
        payoff_achieved: achieved_a,
        gain: achieved_a - payoffs.alice,
    };
    let bob = ForcedDeviation {
        target: targets.1,
        deviation: dev_b,
        deviation_params: StrategyParams::from_unitary(&dev_b)?,
        payoff_achieved: achieved_b,
        gain: achieved_b - payoffs.bob,
    };
    Ok(SampleRecord {
        index,
        profile: *profile,
        payoffs,
        sum_slack: max.alice_max + max.bob_max - (payoffs.alice + payoffs.bob),
        refuted: alice.gain > FORCING_TOL || bob.gain > FORCING_TOL,
        alice,
        bob,
    })
}
