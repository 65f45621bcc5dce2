//! Best responses, epsilon-Nash certificates and equilibrium search.
//!
//! Best responses are found by an exhaustive grid over the free angles of a
//! strategy space followed by coordinate-wise golden-section polish from the
//! best grid cell. Search scans a (coarser) grid of profiles, keeps every
//! profile whose best-response gaps are within `epsilon`, optionally refines
//! the most promising near-misses, and groups the survivors into clusters of
//! grid-adjacent profiles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QgameError, Result};
use crate::game::{PayoffPair, Player, QuantumGame};
use crate::optimize::{coordinate_ascent, AxisKind};
use crate::qlinalg::Mat2;
use crate::scheme::{strategy_matrix, StrategyParams, StrategySpace};

/// Grid maxima closer than this are treated as ties (lowest index wins).
const TIE_TOL: f64 = 1e-12;
/// Profiles with more cells than this are rejected up front.
const MAX_PROFILE_CELLS: usize = 8_000_000;
/// Sweep cap for the inner (coarse) best responses used while refining profiles.
const INNER_SWEEPS: usize = 20;
/// Refined profiles closer than this to an accepted one are duplicates.
const DUPLICATE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub alice: StrategyParams,
    pub bob: StrategyParams,
}

impl Profile {
    pub fn new(alice: StrategyParams, bob: StrategyParams) -> Result<Self> {
        if alice.space() != bob.space() {
            return Err(QgameError::MixedSpaces);
        }
        Ok(Profile { alice, bob })
    }

    pub fn space(&self) -> StrategySpace {
        self.alice.space()
    }

    pub fn get(&self, player: Player) -> &StrategyParams {
        match player {
            Player::Alice => &self.alice,
            Player::Bob => &self.bob,
        }
    }

    /// Alice's free angles followed by Bob's.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.alice.coords();
        c.extend(self.bob.coords());
        c
    }

    pub fn from_coords(space: StrategySpace, coords: &[f64]) -> Result<Self> {
        let d = space.dimension();
        if coords.len() != 2 * d {
            return Err(QgameError::InvalidConfig(format!("profile needs {} angles", 2 * d)));
        }
        Profile::new(
            StrategyParams::from_coords(space, &coords[..d])?,
            StrategyParams::from_coords(space, &coords[d..])?,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Points per angle axis for best-response grids (`>= 9`).
    pub grid_points_per_axis: usize,
    /// Points per angle axis for the profile scan in `search_ne`.
    pub profile_grid_points: usize,
    pub refine: bool,
    /// Cap on coordinate sweeps during polish.
    pub refine_iterations: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// How many near-miss grid profiles `search_ne` refines.
    pub refine_candidates: usize,
    /// Near-misses qualify for refinement when their largest gap is at most
    /// this fraction of the payoff span.
    pub refine_gap_fraction: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid_points_per_axis: 97,
            profile_grid_points: 25,
            refine: true,
            refine_iterations: 200,
            epsilon: 1e-6,
            seed: 0,
            refine_candidates: 8,
            refine_gap_fraction: 0.2,
        }
    }
}

impl SearchConfig {
    /// Defaults sized so a search over `space` finishes in seconds.
    pub fn for_space(space: StrategySpace) -> Self {
        let base = SearchConfig::default();
        match space {
            StrategySpace::Classical => SearchConfig { profile_grid_points: 97, ..base },
            StrategySpace::Restricted => base,
            StrategySpace::FullSU2 => SearchConfig { grid_points_per_axis: 17, profile_grid_points: 9, ..base },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points_per_axis < 9 {
            return Err(QgameError::InvalidConfig("grid_points_per_axis must be at least 9".into()));
        }
        if self.profile_grid_points < 3 {
            return Err(QgameError::InvalidConfig("profile_grid_points must be at least 3".into()));
        }
        if self.refine_iterations == 0 {
            return Err(QgameError::InvalidConfig("refine_iterations must be positive".into()));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(QgameError::InvalidConfig("epsilon must be finite and non-negative".into()));
        }
        if !(self.refine_gap_fraction.is_finite() && self.refine_gap_fraction >= 0.0) {
            return Err(QgameError::InvalidConfig("refine_gap_fraction must be non-negative".into()));
        }
        Ok(())
    }
}

pub(crate) fn axes(space: StrategySpace) -> Vec<AxisKind> {
    match space {
        StrategySpace::Classical => vec![AxisKind::HalfTurn],
        StrategySpace::Restricted => vec![AxisKind::Periodic; 2],
        StrategySpace::FullSU2 => vec![AxisKind::Periodic; 3],
    }
}

/// Every move on a uniform angle grid, in lexicographic `(theta, phi, psi)` order.
#[derive(Debug, Clone)]
struct MoveGrid {
    params: Vec<StrategyParams>,
    mats: Vec<Mat2>,
    /// Per-axis grid index of each move.
    indices: Vec<Vec<usize>>,
    axis_len: usize,
    step: f64,
}

impl MoveGrid {
    fn new(space: StrategySpace, points: usize) -> Result<Self> {
        let axes = axes(space);
        let values = axes[0].grid(points);
        let axis_len = values.len();
        let dim = axes.len();
        let total = axis_len.pow(dim as u32);
        let mut params = Vec::with_capacity(total);
        let mut indices = Vec::with_capacity(total);
        for flat in 0..total {
            let mut idx = vec![0; dim];
            let mut rest = flat;
            for slot in idx.iter_mut().rev() {
                *slot = rest % axis_len;
                rest /= axis_len;
            }
            let coords: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
            params.push(StrategyParams::from_coords(space, &coords)?);
            indices.push(idx);
        }
        let mats = params.iter().map(strategy_matrix).collect();
        Ok(MoveGrid { params, mats, indices, axis_len, step: axes[0].step(points) })
    }

    fn len(&self) -> usize {
        self.params.len()
    }
}

/// Result of a best-response computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub strategy: StrategyParams,
    /// Replayed payoff of `strategy`.
    pub payoff: f64,
    /// Best payoff seen on the grid before polish.
    pub grid_payoff: f64,
}

/// Best-response oracle with a precomputed deviation grid.
#[derive(Debug, Clone)]
pub struct BestResponder<'g> {
    game: &'g QuantumGame,
    space: StrategySpace,
    grid: MoveGrid,
    axes: Vec<AxisKind>,
    refine: bool,
    max_sweeps: usize,
}

impl<'g> BestResponder<'g> {
    pub fn new(game: &'g QuantumGame, space: StrategySpace, cfg: &SearchConfig) -> Result<Self> {
        cfg.validate()?;
        Self::with_grid(game, space, cfg.grid_points_per_axis, cfg.refine, cfg.refine_iterations)
    }

    fn with_grid(
        game: &'g QuantumGame,
        space: StrategySpace,
        points: usize,
        refine: bool,
        max_sweeps: usize,
    ) -> Result<Self> {
        Ok(BestResponder { game, space, grid: MoveGrid::new(space, points)?, axes: axes(space), refine, max_sweeps })
    }

    pub fn respond(&self, player: Player, opponent: &Mat2) -> BestResponse {
        let mut best_idx = 0;
        let mut best = f64::NEG_INFINITY;
        for (k, own) in self.grid.mats.iter().enumerate() {
            let v = self.game.payoff_for(player, own, opponent);
            if v > best + TIE_TOL {
                best = v;
                best_idx = k;
            }
        }
        let grid_best = self.grid.params[best_idx];
        let grid_payoff = self.game.payoff_for(player, &self.grid.mats[best_idx], opponent);
        if !self.refine {
            return BestResponse { strategy: grid_best, payoff: grid_payoff, grid_payoff };
        }
        let objective = |coords: &[f64]| match StrategyParams::from_coords(self.space, coords) {
            Ok(p) => self.game.payoff_for(player, &strategy_matrix(&p), opponent),
            Err(_) => f64::NEG_INFINITY,
        };
        let (coords, _) =
            coordinate_ascent(objective, &grid_best.coords(), grid_payoff, &self.axes, self.grid.step, self.max_sweeps);
        let strategy = StrategyParams::from_coords(self.space, &coords).unwrap_or(grid_best);
        let payoff = self.game.payoff_for(player, &strategy_matrix(&strategy), opponent);
        if payoff >= grid_payoff {
            BestResponse { strategy, payoff, grid_payoff }
        } else {
            BestResponse { strategy: grid_best, payoff: grid_payoff, grid_payoff }
        }
    }
}

/// Best reply of `player` to a fixed `opponent` within `space`.
pub fn best_response(
    game: &QuantumGame,
    opponent: &StrategyParams,
    player: Player,
    space: StrategySpace,
    cfg: &SearchConfig,
) -> Result<BestResponse> {
    BestResponder::new(game, space, cfg).map(|r| r.respond(player, &strategy_matrix(opponent)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Equilibrium,
    NotEquilibrium,
}

/// Outcome of checking a profile against unilateral deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    pub profile: Profile,
    pub payoffs: PayoffPair,
    pub gap_alice: f64,
    pub gap_bob: f64,
    pub epsilon: f64,
    pub witness_alice: Option<StrategyParams>,
    pub witness_bob: Option<StrategyParams>,
    /// Replayed payoff of each witness against the other player's profile move.
    pub witness_payoff_alice: Option<f64>,
    pub witness_payoff_bob: Option<f64>,
    pub verdict: Verdict,
}

impl EquilibriumCertificate {
    fn assemble(profile: Profile, payoffs: PayoffPair, alice: &BestResponse, bob: &BestResponse, epsilon: f64) -> Self {
        let gap_alice = (alice.payoff - payoffs.alice).max(0.0);
        let gap_bob = (bob.payoff - payoffs.bob).max(0.0);
        let verdict = if gap_alice.max(gap_bob) <= epsilon { Verdict::Equilibrium } else { Verdict::NotEquilibrium };
        EquilibriumCertificate {
            profile,
            payoffs,
            gap_alice,
            gap_bob,
            epsilon,
            witness_alice: Some(alice.strategy),
            witness_bob: Some(bob.strategy),
            witness_payoff_alice: Some(alice.payoff),
            witness_payoff_bob: Some(bob.payoff),
            verdict,
        }
    }

    pub fn max_gap(&self) -> f64 {
        self.gap_alice.max(self.gap_bob)
    }

    pub fn is_equilibrium(&self) -> bool {
        self.verdict == Verdict::Equilibrium
    }

    /// Largest discrepancy between stored numbers and a fresh replay through
    /// the circuit.
    pub fn replay_error(&self, game: &QuantumGame) -> f64 {
        let payoffs = game.play(&self.profile.alice, &self.profile.bob);
        let mut err = payoffs.max_abs_diff(&self.payoffs);
        if let (Some(w), Some(v)) = (self.witness_alice, self.witness_payoff_alice) {
            let replay = game.play(&w, &self.profile.bob).alice;
            err = err.max((replay - v).abs());
            err = err.max(((replay - payoffs.alice).max(0.0) - self.gap_alice).abs());
        }
        if let (Some(w), Some(v)) = (self.witness_bob, self.witness_payoff_bob) {
            let replay = game.play(&self.profile.alice, &w).bob;
            err = err.max((replay - v).abs());
            err = err.max(((replay - payoffs.bob).max(0.0) - self.gap_bob).abs());
        }
        err
    }
}

/// Checks `profile` for profitable unilateral deviations within its space.
pub fn verify_ne(game: &QuantumGame, profile: &Profile, cfg: &SearchConfig) -> Result<EquilibriumCertificate> {
    let responder = BestResponder::new(game, profile.space(), cfg)?;
    Ok(verify_with(game, &responder, profile, cfg.epsilon))
}

fn verify_with(
    game: &QuantumGame,
    responder: &BestResponder<'_>,
    profile: &Profile,
    epsilon: f64,
) -> EquilibriumCertificate {
    let ua = strategy_matrix(&profile.alice);
    let ub = strategy_matrix(&profile.bob);
    let payoffs = game.play_matrices(&ua, &ub);
    let alice = responder.respond(Player::Alice, &ub);
    let bob = responder.respond(Player::Bob, &ua);
    EquilibriumCertificate::assemble(*profile, payoffs, &alice, &bob, epsilon)
}

/// A connected group of accepted profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyCluster {
    /// Indices into `SearchReport::certificates`.
    pub members: Vec<usize>,
    pub size: usize,
    /// First, middle and last member (deduplicated).
    pub representatives: Vec<Profile>,
    pub payoff_min: PayoffPair,
    pub payoff_max: PayoffPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub space: StrategySpace,
    pub delta: f64,
    pub epsilon: f64,
    pub profiles_scanned: usize,
    pub grid_equilibria: usize,
    pub candidates_refined: usize,
    pub certificates: Vec<EquilibriumCertificate>,
    pub clusters: Vec<FamilyCluster>,
}

/// Scans the profile grid of `space` for epsilon-Nash equilibria.
pub fn search_ne(game: &QuantumGame, space: StrategySpace, cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let moves = MoveGrid::new(space, cfg.profile_grid_points)?;
    let n = moves.len();
    if n.saturating_mul(n) > MAX_PROFILE_CELLS {
        return Err(QgameError::InvalidConfig(format!(
            "profile grid has {} cells (limit {MAX_PROFILE_CELLS}); lower profile_grid_points",
            n.saturating_mul(n)
        )));
    }
    let responder = BestResponder::new(game, space, cfg)?;

    // best reply to every grid move, once per player
    let alice_br: Vec<BestResponse> = moves.mats.par_iter().map(|ub| responder.respond(Player::Alice, ub)).collect();
    let bob_br: Vec<BestResponse> = moves.mats.par_iter().map(|ua| responder.respond(Player::Bob, ua)).collect();

    // profile (i, j) = (alice move i, bob move j), flattened row-major
    let table: Vec<(PayoffPair, f64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (moves, alice_br, bob_br) = (&moves, &alice_br, &bob_br);
            (0..n).map(move |j| {
                let u = game.play_matrices(&moves.mats[i], &moves.mats[j]);
                let gap = (alice_br[j].payoff - u.alice).max(bob_br[i].payoff - u.bob).max(0.0);
                (u, gap)
            })
        })
        .collect();

    let mut certificates: Vec<EquilibriumCertificate> = Vec::new();
    for (flat, (u, gap)) in table.iter().enumerate() {
        if *gap <= cfg.epsilon {
            let (i, j) = (flat / n, flat % n);
            let profile = Profile::new(moves.params[i], moves.params[j])?;
            certificates.push(EquilibriumCertificate::assemble(profile, *u, &alice_br[j], &bob_br[i], cfg.epsilon));
        }
    }
    let grid_equilibria = certificates.len();

    let mut candidates_refined = 0;
    if cfg.refine && cfg.refine_candidates > 0 {
        let (lo, hi) = game.payoffs().span();
        let threshold = cfg.refine_gap_fraction * (hi - lo);
        let candidates = near_miss_candidates(&table, &moves, space, cfg.epsilon, threshold, cfg.refine_candidates);
        candidates_refined = candidates.len();
        let coarse = BestResponder::with_grid(game, space, cfg.profile_grid_points, true, INNER_SWEEPS)?;
        let refined: Vec<Option<EquilibriumCertificate>> = candidates
            .par_iter()
            .map(|&flat| {
                let start = Profile::new(moves.params[flat / n], moves.params[flat % n]).ok()?;
                let polished = polish_profile(game, &coarse, &start, moves.step, cfg.refine_iterations)?;
                let cert = verify_with(game, &responder, &polished, cfg.epsilon);
                cert.is_equilibrium().then_some(cert)
            })
            .collect();
        let profile_axes: Vec<AxisKind> = axes(space).into_iter().chain(axes(space)).collect();
        for cert in refined.into_iter().flatten() {
            let c = cert.profile.coords();
            let duplicate = certificates.iter().any(|other| {
                let o = other.profile.coords();
                profile_axes.iter().zip(c.iter().zip(&o)).all(|(ax, (a, b))| ax.distance(*a, *b) <= DUPLICATE_TOL)
            });
            if !duplicate {
                certificates.push(cert);
            }
        }
    }

    let clusters = cluster(&certificates, space, moves.step);
    Ok(SearchReport {
        space,
        delta: game.delta().value(),
        epsilon: cfg.epsilon,
        profiles_scanned: table.len(),
        grid_equilibria,
        candidates_refined,
        certificates,
        clusters,
    })
}

/// Grid profiles that are local minima of the largest gap, not yet accepted,
/// and within `threshold`; best first, at most `limit`.
fn near_miss_candidates(
    table: &[(PayoffPair, f64)],
    moves: &MoveGrid,
    space: StrategySpace,
    epsilon: f64,
    threshold: f64,
    limit: usize,
) -> Vec<usize> {
    let n = moves.len();
    let len = moves.axis_len;
    let periodic = axes(space)[0] == AxisKind::Periodic;
    let dim = 2 * space.dimension();
    let offsets = 3usize.pow(dim as u32);

    let flat_of = |idx: &[usize]| -> usize {
        let half = dim / 2;
        let to_flat = |part: &[usize]| part.iter().fold(0, |acc, &k| acc * len + k);
        to_flat(&idx[..half]) * n + to_flat(&idx[half..])
    };

    let mut found: Vec<(f64, usize)> = Vec::new();
    for (flat, (_, gap)) in table.iter().enumerate() {
        if *gap <= epsilon || *gap > threshold {
            continue;
        }
        let mut idx = moves.indices[flat / n].clone();
        idx.extend(&moves.indices[flat % n]);
        let mut is_min = true;
        'neighbours: for code in 0..offsets {
            let mut rest = code;
            let mut nb = idx.clone();
            let mut moved = false;
            for slot in nb.iter_mut() {
                let shift = rest % 3;
                rest /= 3;
                match shift {
                    0 => {}
                    1 => {
                        moved = true;
                        *slot = if *slot + 1 < len {
                            *slot + 1
                        } else if periodic {
                            0
                        } else {
                            continue 'neighbours;
                        };
                    }
                    _ => {
                        moved = true;
                        *slot = if *slot > 0 {
                            *slot - 1
                        } else if periodic {
                            len - 1
                        } else {
                            continue 'neighbours;
                        };
                    }
                }
            }
            if !moved {
                continue;
            }
            let other = flat_of(&nb);
            let g = table[other].1;
            if g < *gap || (g == *gap && other < flat) {
                is_min = false;
                break;
            }
        }
        if is_min {
            found.push((*gap, flat));
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    found.into_iter().take(limit).map(|(_, flat)| flat).collect()
}

/// Minimizes the total best-response gap around `start`. The total rather
/// than the largest gap is used because coordinate moves stall on the
/// ridge where the two players' gaps cross.
fn polish_profile(
    game: &QuantumGame,
    coarse: &BestResponder<'_>,
    start: &Profile,
    radius: f64,
    max_sweeps: usize,
) -> Option<Profile> {
    let space = start.space();
    let profile_axes: Vec<AxisKind> = axes(space).into_iter().chain(axes(space)).collect();
    let neg_gap = |coords: &[f64]| match Profile::from_coords(space, coords) {
        Ok(p) => {
            let cert = verify_with(game, coarse, &p, 0.0);
            -(cert.gap_alice + cert.gap_bob)
        }
        Err(_) => f64::NEG_INFINITY,
    };
    let x0 = start.coords();
    let v0 = neg_gap(&x0);
    let (x, _) = coordinate_ascent(neg_gap, &x0, v0, &profile_axes, radius, max_sweeps);
    Profile::from_coords(space, &x).ok()
}

fn cluster(certificates: &[EquilibriumCertificate], space: StrategySpace, step: f64) -> Vec<FamilyCluster> {
    let k = certificates.len();
    let profile_axes: Vec<AxisKind> = axes(space).into_iter().chain(axes(space)).collect();
    let coords: Vec<Vec<f64>> = certificates.iter().map(|c| c.profile.coords()).collect();
    let reach = 1.5 * step + 1e-12;

    let mut parent: Vec<usize> = (0..k).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..k {
        for b in (a + 1)..k {
            let adjacent = profile_axes
                .iter()
                .zip(coords[a].iter().zip(&coords[b]))
                .all(|(ax, (x, y))| ax.distance(*x, *y) <= reach);
            if adjacent {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }

    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..k {
        let r = root(&mut parent, i);
        match groups.iter_mut().find(|(g, _)| *g == r) {
            Some((_, members)) => members.push(i),
            None => groups.push((r, vec![i])),
        }
    }

    groups
        .into_iter()
        .map(|(_, members)| {
            let mut reps: Vec<usize> = vec![members[0], members[members.len() / 2], members[members.len() - 1]];
            reps.dedup();
            let pays = members.iter().map(|&m| certificates[m].payoffs);
            let payoff_min = pays.clone().fold(PayoffPair::new(f64::INFINITY, f64::INFINITY), |acc, p| {
                PayoffPair::new(acc.alice.min(p.alice), acc.bob.min(p.bob))
            });
            let payoff_max = pays.fold(PayoffPair::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |acc, p| {
                PayoffPair::new(acc.alice.max(p.alice), acc.bob.max(p.bob))
            });
            FamilyCluster {
                size: members.len(),
                representatives: reps.iter().map(|&m| certificates[m].profile).collect(),
                members,
                payoff_min,
                payoff_max,
            }
        })
        .collect()
}
