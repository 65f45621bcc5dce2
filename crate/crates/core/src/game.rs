//! Payoff bimatrix and the expected-payoff functionals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{QgameError, Result};
use crate::qlinalg::{Mat2, Outcome};
use crate::scheme::{strategy_matrix, Circuit, EntanglementParam, OutcomeDistribution, StrategyParams};

/// A 2x2 bimatrix indexed by measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "BTreeMap<Outcome, [f64; 2]>", try_from = "BTreeMap<Outcome, [f64; 2]>")]
pub struct PayoffMatrix {
    alice: [f64; 4],
    bob: [f64; 4],
}

impl PayoffMatrix {
    /// Entries in `OO, OT, TO, TT` order.
    pub fn new(alice: [f64; 4], bob: [f64; 4]) -> Result<Self> {
        if alice.iter().chain(bob.iter()).any(|x| !x.is_finite()) {
            return Err(QgameError::NonFinite("payoff entry"));
        }
        Ok(PayoffMatrix { alice, bob })
    }

    pub fn from_cells(cells: [(f64, f64); 4]) -> Result<Self> {
        PayoffMatrix::new(cells.map(|c| c.0), cells.map(|c| c.1))
    }

    pub fn alice(&self, o: Outcome) -> f64 {
        self.alice[o.index()]
    }

    pub fn bob(&self, o: Outcome) -> f64 {
        self.bob[o.index()]
    }

    pub fn cell(&self, o: Outcome) -> (f64, f64) {
        (self.alice(o), self.bob(o))
    }

    pub fn alice_entries(&self) -> [f64; 4] {
        self.alice
    }

    pub fn bob_entries(&self) -> [f64; 4] {
        self.bob
    }

    /// Exchanges the players' roles and relabels each outcome `(s, t)` as `(t', s')`
    /// where `'` flips O and T.
    pub fn swap_roles_and_flip(&self) -> PayoffMatrix {
        let mut alice = [0.0; 4];
        let mut bob = [0.0; 4];
        for o in Outcome::ALL {
            let (a, b) = o.bits();
            let image = Outcome::from_index(2 * (1 - b) + (1 - a)).expect("index in range");
            alice[image.index()] = self.bob(o);
            bob[image.index()] = self.alice(o);
        }
        PayoffMatrix { alice, bob }
    }

    /// Smallest and largest entry over both players.
    pub fn span(&self) -> (f64, f64) {
        self.alice
            .iter()
            .chain(self.bob.iter())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    }
}

impl From<PayoffMatrix> for BTreeMap<Outcome, [f64; 2]> {
    fn from(m: PayoffMatrix) -> Self {
        Outcome::ALL.iter().map(|&o| (o, [m.alice(o), m.bob(o)])).collect()
    }
}

impl TryFrom<BTreeMap<Outcome, [f64; 2]>> for PayoffMatrix {
    type Error = String;

    fn try_from(map: BTreeMap<Outcome, [f64; 2]>) -> std::result::Result<Self, Self::Error> {
        let mut cells = [(0.0, 0.0); 4];
        for o in Outcome::ALL {
            let [a, b] = map.get(&o).ok_or_else(|| format!("payoff table is missing cell {o}"))?;
            cells[o.index()] = (*a, *b);
        }
        PayoffMatrix::from_cells(cells).map_err(|e| e.to_string())
    }
}

/// Battle-of-the-Sexes payoffs, `alpha > beta > gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BosParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl BosParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let p = BosParams { alpha, beta, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let BosParams { alpha, beta, gamma } = *self;
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(QgameError::NonFinite("payoff entry"));
        }
        if !(alpha > beta && beta > gamma) {
            return Err(QgameError::InvalidOrdering { alpha, beta, gamma });
        }
        Ok(())
    }
}

impl Default for BosParams {
    fn default() -> Self {
        BosParams { alpha: 5.0, beta: 3.0, gamma: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffPair {
    pub alice: f64,
    pub bob: f64,
}

impl PayoffPair {
    pub fn new(alice: f64, bob: f64) -> Self {
        PayoffPair { alice, bob }
    }

    pub fn max_abs_diff(&self, other: &PayoffPair) -> f64 {
        (self.alice - other.alice).abs().max((self.bob - other.bob).abs())
    }
}

pub fn bos_matrix(p: &BosParams) -> Result<PayoffMatrix> {
    p.validate()?;
    let BosParams { alpha, beta, gamma } = *p;
    PayoffMatrix::from_cells([(alpha, beta), (gamma, gamma), (gamma, gamma), (beta, alpha)])
}

pub fn expected_payoffs(dist: &OutcomeDistribution, m: &PayoffMatrix) -> PayoffPair {
    let p = dist.as_array();
    let dot = |v: &[f64; 4]| v.iter().zip(p.iter()).map(|(x, w)| x * w).sum();
    PayoffPair { alice: dot(&m.alice), bob: dot(&m.bob) }
}

/// Battle-of-the-Sexes payoffs from the two coordinated masses alone; the
/// off-diagonal cells pay gamma to both so their split is irrelevant.
pub fn reduced_payoffs_max_entangled(p_oo: f64, p_tt: f64, p: &BosParams) -> Result<PayoffPair> {
    if !(p_oo.is_finite() && p_tt.is_finite()) {
        return Err(QgameError::NonFinite("probability"));
    }
    let total = p_oo + p_tt;
    if p_oo < 0.0 || p_tt < 0.0 || total > 1.0 + 1e-12 {
        return Err(QgameError::InvalidMass { total });
    }
    let BosParams { alpha, beta, gamma } = *p;
    Ok(PayoffPair {
        alice: (alpha - gamma) * p_oo + (beta - gamma) * p_tt + gamma,
        bob: (beta - gamma) * p_oo + (alpha - gamma) * p_tt + gamma,
    })
}

/// Common payoff of the interior (mixed) classical equilibrium.
pub fn classical_mixed_payoff(p: &BosParams) -> f64 {
    let BosParams { alpha, beta, gamma } = *p;
    (alpha * beta - gamma * gamma) / (alpha + beta - 2.0 * gamma)
}

/// Equilibrium weights on T for the interior classical equilibrium:
/// `(sin^2(theta_A/2), sin^2(theta_B/2))`.
pub fn classical_mixed_weights(p: &BosParams) -> (f64, f64) {
    let BosParams { alpha, beta, gamma } = *p;
    let denom = alpha + beta - 2.0 * gamma;
    ((beta - gamma) / denom, (alpha - gamma) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Alice,
    Bob,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Alice => Player::Bob,
            Player::Bob => Player::Alice,
        }
    }
}

impl std::fmt::Display for Player {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Player::Alice => "alice",
            Player::Bob => "bob",
        })
    }
}

/// A bimatrix played through the quantum circuit at a fixed entanglement.
#[derive(Debug, Clone, Copy)]
pub struct QuantumGame {
    delta: EntanglementParam,
    payoffs: PayoffMatrix,
    circuit: Circuit,
}

impl QuantumGame {
    pub fn new(delta: EntanglementParam, payoffs: PayoffMatrix) -> Self {
        QuantumGame { delta, payoffs, circuit: Circuit::new(delta) }
    }

    pub fn delta(&self) -> EntanglementParam {
        self.delta
    }

    pub fn payoffs(&self) -> &PayoffMatrix {
        &self.payoffs
    }

    /// Both inputs must be unitary.
    pub fn distribution(&self, alice: &Mat2, bob: &Mat2) -> OutcomeDistribution {
        self.circuit.distribution(alice, bob)
    }

    pub fn play_matrices(&self, alice: &Mat2, bob: &Mat2) -> PayoffPair {
        expected_payoffs(&self.distribution(alice, bob), &self.payoffs)
    }

    pub fn play(&self, alice: &StrategyParams, bob: &StrategyParams) -> PayoffPair {
        self.play_matrices(&strategy_matrix(alice), &strategy_matrix(bob))
    }

    /// Payoff of `player` moving `own` against `opponent`.
    pub(crate) fn payoff_for(&self, player: Player, own: &Mat2, opponent: &Mat2) -> f64 {
        match player {
            Player::Alice => self.play_matrices(own, opponent).alice,
            Player::Bob => self.play_matrices(opponent, own).bob,
        }
    }
}
