//! The `qgame` command-line tool.
//!
//! Exit codes: 0 success, 1 a demo check failed, 2 invalid input, 3 the game
//! does not meet the hypothesis of the no-equilibrium certificate.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::equilibrium::{search_ne, verify_ne, Profile, SearchConfig};
use crate::error::QgameError;
use crate::fullspace::{counter_strategy, no_ne_certificate};
use crate::game::{
    bos_matrix, classical_mixed_payoff, classical_mixed_weights, expected_payoffs, BosParams, PayoffMatrix, PayoffPair,
    QuantumGame,
};
use crate::qlinalg::{same_up_to_global_phase, Mat2, Outcome};
use crate::scheme::{
    final_state, strategy_matrix, EntanglementParam, OutcomeDistribution, StrategyParams, StrategySpace,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;

/// Most rows a landscape may have.
const MAX_LANDSCAPE_ROWS: usize = 4_000_000;
const DEMO_TOL: f64 = 1e-9;

/// A game definition on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub name: String,
    /// Radians in `[0, pi/2]`; maximal entanglement when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bos: Option<BosParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoffs: Option<PayoffMatrix>,
}

impl GameFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: GameFile = serde_json::from_str(text).map_err(|e| CliError::invalid(format!("game file: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.matrix()?;
        self.entanglement()?;
        Ok(())
    }

    pub fn entanglement(&self) -> Result<EntanglementParam, CliError> {
        Ok(EntanglementParam::new(self.delta.unwrap_or(FRAC_PI_2))?)
    }

    pub fn matrix(&self) -> Result<PayoffMatrix, CliError> {
        match (&self.bos, &self.payoffs) {
            (Some(p), None) => {
                p.validate()?;
                Ok(bos_matrix(p)?)
            }
            (None, Some(m)) => Ok(PayoffMatrix::new(m.alice_entries(), m.bob_entries())?),
            _ => Err(CliError::invalid("game file needs exactly one of `bos` or `payoffs`")),
        }
    }

    pub fn game(&self) -> Result<QuantumGame, CliError> {
        Ok(QuantumGame::new(self.entanglement()?, self.matrix()?))
    }
}

/// Failure of a command, carrying its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INVALID, message: message.into() }
    }
}

impl From<QgameError> for CliError {
    fn from(e: QgameError) -> Self {
        let code = if e == QgameError::TrivialGame { EXIT_HYPOTHESIS } else { EXIT_INVALID };
        CliError { code, message: e.to_string() }
    }
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses and rejects values that are not plain radians.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    if lower.contains('°') || lower.ends_with("deg") || lower.ends_with("degrees") {
        return Err(format!("angle `{t}` looks like degrees; give radians"));
    }
    let x: f64 = t.parse().map_err(|_| format!("`{t}` is not a number"))?;
    if !x.is_finite() {
        return Err(format!("angle `{t}` is not finite"));
    }
    if x.abs() > TAU {
        return Err(format!("angle {t} exceeds 2*pi in magnitude; angles are radians"));
    }
    Ok(x)
}

/// Parses `theta=<r>[,phi=<r>][,psi=<r>]`. Omitted angles are 0; the space
/// is full SU(2) when `psi` is given, restricted when only `phi` is given,
/// classical otherwise.
pub fn parse_strategy(text: &str) -> Result<StrategyParams, String> {
    let mut angles: [Option<f64>; 3] = [None; 3];
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| format!("expected name=value, got `{part}`"))?;
        let slot = match key.trim() {
            "theta" => 0,
            "phi" => 1,
            "psi" => 2,
            other => return Err(format!("unknown angle `{other}` (expected theta, phi or psi)")),
        };
        if angles[slot].is_some() {
            return Err(format!("angle `{}` given twice", key.trim()));
        }
        angles[slot] = Some(parse_angle(value)?);
    }
    let [theta, phi, psi] = angles;
    let (theta, phi_v) = (theta.unwrap_or(0.0), phi.unwrap_or(0.0));
    let params = match psi {
        Some(psi) => StrategyParams::full(theta, phi_v, psi),
        None if phi.is_some() => StrategyParams::restricted(theta, phi_v),
        None => StrategyParams::classical(theta),
    };
    params.map_err(|e| e.to_string())
}

fn strategy_arg(text: &str) -> Result<StrategyParams, String> {
    parse_strategy(text)
}

/// Writes `value` as pretty JSON with every float in plain decimal notation
/// (shortest representation that round-trips).
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, PlainFloats(serde_json::ser::PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    let mut s = String::from_utf8(buf).expect("serde_json emits UTF-8");
    s.push('\n');
    s
}

struct PlainFloats<'a>(serde_json::ser::PrettyFormatter<'a>);

impl serde_json::ser::Formatter for PlainFloats<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value}")
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

#[derive(Debug, Parser)]
#[command(name = "qgame", version, about = "Quantum Battle-of-the-Sexes simulator and Nash-equilibrium engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a game file.
    Init(InitArgs),
    /// Outcome probabilities and payoffs of one profile.
    Payoff {
        game: PathBuf,
        #[arg(long, value_parser = strategy_arg)]
        alice: StrategyParams,
        #[arg(long, value_parser = strategy_arg)]
        bob: StrategyParams,
    },
    /// Check a profile for profitable unilateral deviations.
    Verify {
        game: PathBuf,
        #[arg(long, value_parser = strategy_arg)]
        alice: StrategyParams,
        #[arg(long, value_parser = strategy_arg)]
        bob: StrategyParams,
        /// Defaults to the larger of the two strategies' spaces.
        #[arg(long)]
        space: Option<StrategySpace>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Scan a grid of profiles for equilibria.
    Search {
        game: PathBuf,
        #[arg(long)]
        space: StrategySpace,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Tabulate probabilities and payoffs over one or two swept angles.
    Landscape {
        game: PathBuf,
        /// `axis=start:end:count`, at most twice.
        #[arg(long, required = true)]
        sweep: Vec<String>,
        /// `axis=value[,axis=value...]`.
        #[arg(long)]
        fixed: Vec<String>,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bob's move reproducing Alice's on the maximally entangled state.
    Counter {
        /// Strategy angles, or a JSON matrix of `[re, im]` entries.
        #[arg(long)]
        alice_op: String,
    },
    /// Refute sampled full-SU(2) profiles by outcome forcing.
    NoNeCert {
        game: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Reproduce the headline Battle-of-the-Sexes results.
    Demo {
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        gamma: f64,
    },
}

#[derive(Debug, Args)]
pub struct InitArgs {
    #[arg(long)]
    pub name: String,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Explicit cells `a,b;a,b;a,b;a,b` in OO, OT, TO, TT order.
    #[arg(long, conflicts_with_all = ["alpha", "beta", "gamma"])]
    pub cells: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Points per axis of the best-response grid.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Points per axis of the profile scan.
    #[arg(long)]
    pub profile_grid: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub no_refine: bool,
}

impl SearchArgs {
    fn config(&self, space: StrategySpace) -> SearchConfig {
        let mut cfg = SearchConfig::for_space(space);
        if let Some(g) = self.grid {
            cfg.grid_points_per_axis = g;
        }
        if let Some(g) = self.profile_grid {
            cfg.profile_grid_points = g;
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        cfg.seed = self.seed;
        cfg.refine = !self.no_refine;
        cfg
    }
}

/// Runs the tool on `args` (program name first) and captures its output.
pub fn run<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    CliOutput { code: EXIT_OK, stdout: text, stderr: String::new() }
                }
                _ => CliOutput { code: EXIT_INVALID, stdout: String::new(), stderr: text },
            };
        }
    };
    match execute(cli.command) {
        Ok((code, stdout)) => CliOutput { code, stdout, stderr: String::new() },
        Err(e) => CliOutput { code: e.code, stdout: String::new(), stderr: format!("error: {}\n", e.message) },
    }
}

fn execute(command: Command) -> Result<(i32, String), CliError> {
    match command {
        Command::Init(args) => cmd_init(&args).map(|s| (EXIT_OK, s)),
        Command::Payoff { game, alice, bob } => cmd_payoff(&GameFile::load(&game)?, &alice, &bob).map(|s| (EXIT_OK, s)),
        Command::Verify { game, alice, bob, space, search } => {
            let space = space.unwrap_or(alice.space().max(bob.space()));
            cmd_verify(&GameFile::load(&game)?, &alice, &bob, &search.config(space), space).map(|s| (EXIT_OK, s))
        }
        Command::Search { game, space, search } => {
            cmd_search(&GameFile::load(&game)?, space, &search.config(space)).map(|s| (EXIT_OK, s))
        }
        Command::Landscape { game, sweep, fixed, out } => {
            let csv = cmd_landscape(&GameFile::load(&game)?, &sweep, &fixed)?;
            match out {
                Some(path) => {
                    std::fs::write(&path, &csv)
                        .map_err(|e| CliError::invalid(format!("cannot write {}: {e}", path.display())))?;
                    Ok((EXIT_OK, String::new()))
                }
                None => Ok((EXIT_OK, csv)),
            }
        }
        Command::Counter { alice_op } => cmd_counter(&alice_op).map(|s| (EXIT_OK, s)),
        Command::NoNeCert { game, samples, seed } => {
            cmd_no_ne_cert(&GameFile::load(&game)?, samples, seed).map(|s| (EXIT_OK, s))
        }
        Command::Demo { alpha, beta, gamma } => cmd_demo(alpha, beta, gamma),
    }
}

pub fn cmd_init(args: &InitArgs) -> Result<String, CliError> {
    let (bos, payoffs) = match &args.cells {
        Some(text) => (None, Some(parse_cells(text)?)),
        None => {
            let p = BosParams::default();
            let p = BosParams::new(
                args.alpha.unwrap_or(p.alpha),
                args.beta.unwrap_or(p.beta),
                args.gamma.unwrap_or(p.gamma),
            )?;
            (Some(p), None)
        }
    };
    let file = GameFile { name: args.name.clone(), delta: args.delta, bos, payoffs };
    file.validate()?;
    let json = file.to_json();
    match &args.out {
        Some(path) => {
            std::fs::write(path, &json)
                .map_err(|e| CliError::invalid(format!("cannot write {}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(json),
    }
}

fn parse_cells(text: &str) -> Result<PayoffMatrix, CliError> {
    let cells: Vec<&str> = text.split(';').collect();
    if cells.len() != 4 {
        return Err(CliError::invalid("--cells needs four `a,b` pairs separated by `;`"));
    }
    let mut out = [(0.0, 0.0); 4];
    for (slot, cell) in out.iter_mut().zip(cells) {
        let (a, b) = cell.split_once(',').ok_or_else(|| CliError::invalid(format!("bad cell `{cell}`")))?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| CliError::invalid(format!("bad payoff `{s}`")));
        *slot = (num(a)?, num(b)?);
    }
    Ok(PayoffMatrix::from_cells(out)?)
}

#[derive(Serialize)]
struct PayoffReport<'a> {
    game: &'a str,
    delta: f64,
    alice: StrategyParams,
    bob: StrategyParams,
    distribution: OutcomeDistribution,
    payoffs: PayoffPair,
}

pub fn cmd_payoff(file: &GameFile, alice: &StrategyParams, bob: &StrategyParams) -> Result<String, CliError> {
    let game = file.game()?;
    let distribution = game.distribution(&strategy_matrix(alice), &strategy_matrix(bob));
    let report = PayoffReport {
        game: &file.name,
        delta: game.delta().value(),
        alice: *alice,
        bob: *bob,
        distribution,
        payoffs: expected_payoffs(&distribution, game.payoffs()),
    };
    Ok(to_json(&report))
}

pub fn cmd_verify(
    file: &GameFile,
    alice: &StrategyParams,
    bob: &StrategyParams,
    cfg: &SearchConfig,
    space: StrategySpace,
) -> Result<String, CliError> {
    let game = file.game()?;
    let profile = Profile::new(alice.embed(space)?, bob.embed(space)?)?;
    Ok(to_json(&verify_ne(&game, &profile, cfg)?))
}

pub fn cmd_search(file: &GameFile, space: StrategySpace, cfg: &SearchConfig) -> Result<String, CliError> {
    let game = file.game()?;
    Ok(to_json(&search_ne(&game, space, cfg)?))
}

const AXIS_NAMES: [&str; 6] = ["theta_a", "phi_a", "psi_a", "theta_b", "phi_b", "psi_b"];

fn axis_index(name: &str) -> Result<usize, CliError> {
    AXIS_NAMES.iter().position(|a| *a == name.trim()).ok_or_else(|| {
        CliError::invalid(format!("unknown axis `{}` (expected one of {})", name.trim(), AXIS_NAMES.join(", ")))
    })
}

fn parse_sweep(arg: &str) -> Result<(usize, Vec<f64>), CliError> {
    let (name, range) = arg
        .split_once('=')
        .ok_or_else(|| CliError::invalid(format!("sweep `{arg}`: expected axis=start:end:count")))?;
    let axis = axis_index(name)?;
    let parts: Vec<&str> = range.split(':').collect();
    let [start, end, count] = parts[..] else {
        return Err(CliError::invalid(format!("sweep `{arg}`: expected axis=start:end:count")));
    };
    let start = parse_angle(start).map_err(CliError::invalid)?;
    let end = parse_angle(end).map_err(CliError::invalid)?;
    let count: usize = count.trim().parse().map_err(|_| CliError::invalid(format!("sweep `{arg}`: bad count")))?;
    let values = match count {
        0 => return Err(CliError::invalid(format!("sweep `{arg}`: count must be positive"))),
        1 => vec![start],
        n => (0..n).map(|k| if k == n - 1 { end } else { start + (end - start) * k as f64 / (n - 1) as f64 }).collect(),
    };
    Ok((axis, values))
}

/// Player move from the six landscape axes. A player is classical unless
/// `phi` or `psi` is mentioned, restricted when only `phi` is.
fn landscape_move(values: &[f64; 6], mentioned: &[bool; 6], offset: usize) -> Result<StrategyParams, CliError> {
    let (theta, phi, psi) = (values[offset], values[offset + 1], values[offset + 2]);
    let params = if mentioned[offset + 2] {
        StrategyParams::full(theta, phi, psi)
    } else if mentioned[offset + 1] {
        StrategyParams::restricted(theta, phi)
    } else {
        StrategyParams::classical(theta)
    };
    Ok(params?)
}

/// CSV of outcome probabilities and payoffs over the swept axes, first sweep
/// varying slowest.
pub fn cmd_landscape(file: &GameFile, sweeps: &[String], fixed: &[String]) -> Result<String, CliError> {
    let game = file.game()?;
    if sweeps.is_empty() || sweeps.len() > 2 {
        return Err(CliError::invalid("landscape needs one or two --sweep axes"));
    }
    let mut values = [0.0; 6];
    let mut mentioned = [false; 6];
    let mut axes = Vec::new();
    for arg in sweeps {
        let (axis, grid) = parse_sweep(arg)?;
        if mentioned[axis] {
            return Err(CliError::invalid(format!("axis `{}` given twice", AXIS_NAMES[axis])));
        }
        mentioned[axis] = true;
        axes.push((axis, grid));
    }
    for part in fixed.iter().flat_map(|f| f.split(',')).map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) =
            part.split_once('=').ok_or_else(|| CliError::invalid(format!("fixed `{part}`: expected axis=value")))?;
        let axis = axis_index(name)?;
        if mentioned[axis] {
            return Err(CliError::invalid(format!("axis `{}` given twice", AXIS_NAMES[axis])));
        }
        mentioned[axis] = true;
        values[axis] = parse_angle(value).map_err(CliError::invalid)?;
    }
    let rows: usize = axes.iter().map(|(_, g)| g.len()).product();
    if rows > MAX_LANDSCAPE_ROWS {
        return Err(CliError::invalid(format!("landscape of {rows} rows exceeds the limit of {MAX_LANDSCAPE_ROWS}")));
    }

    let mut out = String::new();
    let header: Vec<&str> = axes
        .iter()
        .map(|(a, _)| AXIS_NAMES[*a])
        .chain(["p_oo", "p_ot", "p_to", "p_tt", "payoff_a", "payoff_b"])
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    let inner_len = axes.get(1).map_or(1, |(_, g)| g.len());
    for row in 0..rows {
        let picks = [row / inner_len, row % inner_len];
        let mut cols = Vec::with_capacity(header.len());
        for ((axis, grid), &k) in axes.iter().zip(&picks) {
            values[*axis] = grid[k];
            cols.push(grid[k]);
        }
        let alice = landscape_move(&values, &mentioned, 0)?;
        let bob = landscape_move(&values, &mentioned, 3)?;
        let dist = game.distribution(&strategy_matrix(&alice), &strategy_matrix(&bob));
        let pay = expected_payoffs(&dist, game.payoffs());
        cols.extend(dist.as_array());
        cols.extend([pay.alice, pay.bob]);
        let line: Vec<String> = cols.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    Ok(out)
}

#[derive(Serialize)]
struct CounterReport {
    input: Mat2,
    counter: Mat2,
    counter_params: StrategyParams,
    /// `|<(A ⊗ I)J|OO> | (I ⊗ U)J|OO>>|` at maximal entanglement.
    fidelity: f64,
}

pub fn cmd_counter(alice_op: &str) -> Result<String, CliError> {
    let ua = if alice_op.trim_start().starts_with('[') {
        let m: Mat2 = serde_json::from_str(alice_op).map_err(|e| CliError::invalid(format!("matrix: {e}")))?;
        m.ensure_unitary()?;
        m
    } else {
        strategy_matrix(&parse_strategy(alice_op).map_err(CliError::invalid)?)
    };
    let u = counter_strategy(&ua)?;
    let id = Mat2::identity();
    let lhs = final_state(EntanglementParam::MAX, &ua, &id)?;
    let rhs = final_state(EntanglementParam::MAX, &id, &u)?;
    let report = CounterReport {
        input: ua,
        counter: u,
        counter_params: StrategyParams::from_unitary(&u)?,
        fidelity: same_up_to_global_phase(&lhs, &rhs),
    };
    Ok(to_json(&report))
}

pub fn cmd_no_ne_cert(file: &GameFile, samples: usize, seed: u64) -> Result<String, CliError> {
    let game = file.game()?;
    if !game.delta().is_max() {
        return Err(CliError::invalid(format!(
            "the certificate needs maximal entanglement (delta = pi/2), game has delta = {}",
            game.delta().value()
        )));
    }
    if samples == 0 {
        return Err(CliError::invalid("--samples must be positive"));
    }
    let cfg = SearchConfig { seed, ..SearchConfig::for_space(StrategySpace::FullSU2) };
    Ok(to_json(&no_ne_certificate(game.payoffs(), samples, &cfg)?))
}

struct Demo {
    text: String,
    failures: usize,
}

impl Demo {
    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn check(&mut self, ok: bool, what: impl AsRef<str>) {
        if !ok {
            self.failures += 1;
        }
        let tag = if ok { "PASS" } else { "FAIL" };
        let _ = writeln!(self.text, "  [{tag}] {}", what.as_ref());
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= DEMO_TOL
}

pub fn cmd_demo(alpha: f64, beta: f64, gamma: f64) -> Result<(i32, String), CliError> {
    let p = BosParams::new(alpha, beta, gamma)?;
    let m = bos_matrix(&p)?;
    let mut d = Demo { text: String::new(), failures: 0 };
    d.line(format!("Battle of the Sexes with alpha={alpha}, beta={beta}, gamma={gamma}"));

    d.line("");
    d.line("== active delta = 0 (no entanglement), classical moves ==");
    let game = QuantumGame::new(EntanglementParam::NONE, m);
    let cfg = SearchConfig { epsilon: DEMO_TOL, ..SearchConfig::for_space(StrategySpace::Classical) };
    let (wa, wb) = classical_mixed_weights(&p);
    let mixed = classical_mixed_payoff(&p);
    let profiles = [
        ("both play O", 0.0, 0.0, (alpha, beta)),
        ("both play T", PI, PI, (beta, alpha)),
        ("mixed", 2.0 * wa.sqrt().asin(), 2.0 * wb.sqrt().asin(), (mixed, mixed)),
    ];
    for (label, ta, tb, (ea, eb)) in profiles {
        let profile = Profile::new(StrategyParams::classical(ta)?, StrategyParams::classical(tb)?)?;
        let cert = verify_ne(&game, &profile, &cfg)?;
        d.check(
            cert.is_equilibrium() && close(cert.payoffs.alice, ea) && close(cert.payoffs.bob, eb),
            format!(
                "{label}: theta_a={ta}, theta_b={tb} pays ({}, {}), max gap {:e}",
                cert.payoffs.alice,
                cert.payoffs.bob,
                cert.max_gap()
            ),
        );
    }
    let report = search_ne(&game, StrategySpace::Classical, &SearchConfig::for_space(StrategySpace::Classical))?;
    d.check(report.clusters.len() == 3, format!("grid search finds {} equilibrium clusters", report.clusters.len()));

    d.line("");
    d.line("== active delta = pi/2 (maximal entanglement), restricted moves ==");
    let game = QuantumGame::new(EntanglementParam::MAX, m);
    let cfg = SearchConfig { epsilon: DEMO_TOL, ..SearchConfig::for_space(StrategySpace::Restricted) };
    let zero = StrategyParams::restricted(0.0, 0.0)?;
    let cert = verify_ne(&game, &Profile::new(zero, zero)?, &cfg)?;
    let witness = cert.witness_bob.expect("certificates carry witnesses");
    let forced = game.distribution(&strategy_matrix(&zero), &strategy_matrix(&witness)).get(Outcome::TT);
    d.check(
        !cert.is_equilibrium() && close(cert.gap_bob, alpha - beta) && forced >= 1.0 - 1e-12,
        format!("both play O is broken: Bob gains {} with {witness} (P_TT = {forced})", cert.gap_bob),
    );
    let t = 2.0 * ((alpha - beta) / (alpha - gamma)).sqrt().asin();
    let table = [(PI, PI, FRAC_PI_2), (-t, t, FRAC_PI_2), (t, -t, FRAC_PI_2)];
    for (i, (ta, tb, big_phi)) in table.into_iter().enumerate() {
        let profile = Profile::new(StrategyParams::restricted(ta, big_phi)?, StrategyParams::restricted(tb, 0.0)?)?;
        let cert = verify_ne(&game, &profile, &cfg)?;
        d.check(
            cert.is_equilibrium() && close(cert.payoffs.alice, beta) && close(cert.payoffs.bob, alpha),
            format!(
                "equilibrium ({}) theta_a={ta}, theta_b={tb}, phi_a+phi_b={big_phi} pays ({}, {}), max gap {:e}",
                i + 1,
                cert.payoffs.alice,
                cert.payoffs.bob,
                cert.max_gap()
            ),
        );
    }

    d.line("");
    d.line("== active delta = pi/2 (maximal entanglement), full SU(2) moves ==");
    let samples = 100;
    match no_ne_certificate(&m, samples, &SearchConfig::for_space(StrategySpace::FullSU2)) {
        Ok(cert) => d.check(
            cert.all_refuted(),
            format!(
                "{}/{} sampled profiles refuted by outcome forcing (max payoffs {}, {}; min slack {})",
                cert.refuted, cert.samples, cert.max_payoffs.alice_max, cert.max_payoffs.bob_max, cert.min_sum_slack
            ),
        ),
        Err(e) => d.check(false, format!("no-equilibrium certificate: {e}")),
    }

    d.line("");
    let code = if d.failures == 0 {
        d.line("all checks passed");
        EXIT_OK
    } else {
        d.line(format!("{} check(s) failed", d.failures));
        EXIT_CHECK_FAILED
    };
    Ok((code, d.text))
}
