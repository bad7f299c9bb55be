//! Trajectory simulation for both column models.

mod skeleton;

pub use skeleton::{extract_skeletons, Skeleton};

use std::collections::HashSet;
use std::io::{self, Write};

use rand_core::RngCore;
use serde::Serialize;
use thiserror::Error;

use crate::environment::{sample_field, ColumnField, ColumnProfile, Model};
use crate::stream::{unit_f64, Purpose, StreamSeed};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkError {
    #[error("walk length must be at least 1")]
    ZeroSteps,
    #[error("checkpoint {m} is outside 1..={n}")]
    CheckpointOutOfRange { m: u64, n: u64 },
    #[error("step {index} ({dx}, {dy}) is not a unit move along one axis")]
    NotUnitStep { index: usize, dx: i64, dy: i64 },
    #[error("range grid exceeds {max} steps per replicate")]
    RangeTooLarge { max: u64 },
}

const DX: [i64; 4] = [1, -1, 0, 0];
const DY: [i64; 4] = [0, 0, 1, -1];
const HORIZONTAL: [u64; 4] = [1, 1, 0, 0];

/// A nearest-neighbour move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[repr(u8)]
pub enum Move {
    East,
    West,
    North,
    South,
}

impl Move {
    pub const ALL: [Move; 4] = [Move::East, Move::West, Move::North, Move::South];

    pub fn delta(self) -> (i64, i64) {
        match self {
            Move::East => (1, 0),
            Move::West => (-1, 0),
            Move::North => (0, 1),
            Move::South => (0, -1),
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Move::East | Move::West)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Position and step counters of a walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct WalkState {
    pub x: i64,
    pub y: i64,
    pub n: u64,
    pub h_count: u64,
    pub v_count: u64,
}

impl WalkState {
    pub fn origin() -> Self {
        WalkState::default()
    }

    // Table driven: the move is random, so branches would mispredict.
    #[inline]
    pub fn advance(&mut self, mv: Move) {
        let i = mv.index();
        self.x += DX[i];
        self.y += DY[i];
        self.n += 1;
        self.h_count += HORIZONTAL[i];
        self.v_count += 1 - HORIZONTAL[i];
    }

    pub fn after(mut self, mv: Move) -> Self {
        self.advance(mv);
        self
    }
}

/// Move drawn at a column with horizontal probability `p` (each direction).
#[inline]
pub fn heyde_move<R: RngCore + ?Sized>(p: f64, rng: &mut R) -> Move {
    let u = unit_f64(rng.next_u64());
    let i = (u >= p) as usize + (u >= 2.0 * p) as usize + (u >= 0.5 + p) as usize;
    Move::ALL[i]
}

/// Move drawn at a column that is (or is not) connected.
#[inline]
pub fn env_move<R: RngCore + ?Sized>(connected: bool, rng: &mut R) -> Move {
    let w = rng.next_u64();
    if connected {
        Move::ALL[(w >> 62) as usize]
    } else if w >> 63 == 0 {
        Move::East
    } else {
        Move::West
    }
}

pub fn heyde_step<R: RngCore + ?Sized>(
    state: &WalkState,
    profile: &ColumnProfile,
    rng: &mut R,
) -> WalkState {
    state.after(heyde_move(profile.column_prob(state.x), rng))
}

pub fn env_step<R: RngCore + ?Sized>(
    state: &WalkState,
    field: &mut ColumnField,
    rng: &mut R,
) -> WalkState {
    state.after(env_move(field.connected(state.x), rng))
}

trait StepRule {
    fn next_move<R: RngCore>(&mut self, x: i64, rng: &mut R) -> Move;
}

// Tracks the column residue itself instead of reducing x every step.
struct HeydeRule {
    thresholds: Vec<[f64; 3]>,
    residue: usize,
}

impl HeydeRule {
    fn new(profile: &ColumnProfile) -> Self {
        let thresholds = profile.probs().iter().map(|&p| [p, 2.0 * p, 0.5 + p]).collect();
        HeydeRule { thresholds, residue: 0 }
    }
}

impl StepRule for HeydeRule {
    #[inline]
    fn next_move<R: RngCore>(&mut self, _x: i64, rng: &mut R) -> Move {
        let u = unit_f64(rng.next_u64());
        let [t1, t2, t3] = self.thresholds[self.residue];
        let i = (u >= t1) as usize + (u >= t2) as usize + (u >= t3) as usize;
        let period = self.thresholds.len();
        let east = if self.residue + 1 == period { 0 } else { self.residue + 1 };
        let west = if self.residue == 0 { period - 1 } else { self.residue - 1 };
        self.residue = [east, west, self.residue, self.residue][i];
        Move::ALL[i]
    }
}

// Consumes two random bits per step out of a buffered word.
struct EnvRule {
    field: ColumnField,
    word: u64,
    left: u32,
}

impl StepRule for EnvRule {
    #[inline]
    fn next_move<R: RngCore>(&mut self, x: i64, rng: &mut R) -> Move {
        if self.left == 0 {
            self.word = rng.next_u64();
            self.left = 32;
        }
        let pair = (self.word >> 62) as usize;
        self.word <<= 2;
        self.left -= 1;
        // Cut columns keep only the high bit: East or West.
        let shift = !self.field.connected(x) as usize;
        Move::ALL[pair >> shift]
    }
}

fn run_rule<S: StepRule, R: RngCore, F: FnMut(&WalkState, Move)>(
    rule: &mut S,
    rng: &mut R,
    n: u64,
    visit: &mut F,
) -> WalkState {
    let mut state = WalkState::origin();
    for _ in 0..n {
        let mv = rule.next_move(state.x, rng);
        state.advance(mv);
        visit(&state, mv);
    }
    state
}

/// Runs `n` steps of `model` from the origin, calling `visit` after each step.
///
/// For the environment model the field is sampled from the replicate's field
/// stream before the walk stream is touched.
pub fn drive<F: FnMut(&WalkState, Move)>(
    model: &Model,
    n: u64,
    seed: StreamSeed,
    mut visit: F,
) -> WalkState {
    let mut rng = seed.rng(Purpose::Walk);
    match model {
        Model::Heyde(profile) => run_rule(&mut HeydeRule::new(profile), &mut rng, n, &mut visit),
        Model::Env(law) => {
            let field_seed = seed.rng(Purpose::Field).next_u64();
            let mut rule = EnvRule {
                field: sample_field(law, field_seed),
                word: 0,
                left: 0,
            };
            run_rule(&mut rule, &mut rng, n, &mut visit)
        }
    }
}

/// Walk state recorded at step index `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Checkpoint {
    pub m: u64,
    pub x: i64,
    pub y: i64,
    pub h_count: u64,
    pub v_count: u64,
}

impl From<&WalkState> for Checkpoint {
    fn from(s: &WalkState) -> Self {
        Checkpoint {
            m: s.n,
            x: s.x,
            y: s.y,
            h_count: s.h_count,
            v_count: s.v_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySummary {
    pub checkpoints: Vec<Checkpoint>,
    pub end: WalkState,
    /// Running maxima of each coordinate over steps `0..=n`.
    pub max_x: i64,
    pub max_y: i64,
    /// `h_count / (m * hfrac) - 1` per checkpoint.
    pub residuals: Vec<f64>,
    pub path: Option<Vec<Move>>,
    pub skeleton: Option<Skeleton>,
}

impl TrajectorySummary {
    pub fn n(&self) -> u64 {
        self.end.n
    }

    /// The recorded state at step `m`; step 0 is the origin.
    pub fn at(&self, m: u64) -> Option<Checkpoint> {
        if m == 0 {
            return Some(Checkpoint::from(&WalkState::origin()));
        }
        self.checkpoints
            .binary_search_by_key(&m, |c| c.m)
            .ok()
            .map(|i| self.checkpoints[i])
    }
}

/// Sorted, deduplicated checkpoint list ending at `n`.
pub fn normalize_checkpoints(n: u64, checkpoints: &[u64]) -> Result<Vec<u64>, WalkError> {
    if n == 0 {
        return Err(WalkError::ZeroSteps);
    }
    if let Some(&m) = checkpoints.iter().find(|&&m| m == 0 || m > n) {
        return Err(WalkError::CheckpointOutOfRange { m, n });
    }
    let mut cps = checkpoints.to_vec();
    cps.push(n);
    cps.sort_unstable();
    cps.dedup();
    Ok(cps)
}

pub fn simulate(
    model: &Model,
    n: u64,
    checkpoints: &[u64],
    seed: StreamSeed,
    record_skeleton: bool,
) -> Result<TrajectorySummary, WalkError> {
    let cps = normalize_checkpoints(n, checkpoints)?;
    let mut recorded = Vec::with_capacity(cps.len());
    let mut next = 0usize;
    let (mut max_x, mut max_y) = (0i64, 0i64);
    let mut path = record_skeleton.then(|| Vec::with_capacity(n as usize));
    let end = drive(model, n, seed, |s, mv| {
        max_x = max_x.max(s.x);
        max_y = max_y.max(s.y);
        if let Some(p) = path.as_mut() {
            p.push(mv);
        }
        if s.n == cps[next] {
            recorded.push(Checkpoint::from(s));
            next = (next + 1).min(cps.len() - 1);
        }
    });
    let hfrac = model.horizontal_fraction();
    let residuals = recorded
        .iter()
        .map(|c| c.h_count as f64 / (c.m as f64 * hfrac) - 1.0)
        .collect();
    let skeleton = match &path {
        Some(p) => {
            let deltas: Vec<(i64, i64)> = p.iter().map(|m| m.delta()).collect();
            Some(extract_skeletons(&deltas)?)
        }
        None => None,
    };
    Ok(TrajectorySummary {
        checkpoints: recorded,
        end,
        max_x,
        max_y,
        residuals,
        path,
        skeleton,
    })
}

/// Final state only; the cheapest way to run a walk.
pub fn endpoint(model: &Model, n: u64, seed: StreamSeed) -> WalkState {
    drive(model, n, seed, |_, _| {})
}

/// Upper bound on walk length for distinct-site counting.
pub const MAX_RANGE_STEPS: u64 = 1_000_000;

/// Number of distinct sites visited in steps `0..=m` for each `m` in `grid`.
pub fn visited_counts(model: &Model, grid: &[u64], seed: StreamSeed) -> Result<Vec<u64>, WalkError> {
    let cps = normalize_checkpoints(*grid.iter().max().unwrap_or(&0), grid)?;
    let n = *cps.last().unwrap();
    if n > MAX_RANGE_STEPS {
        return Err(WalkError::RangeTooLarge { max: MAX_RANGE_STEPS });
    }
    let mut visited: HashSet<(i64, i64)> = HashSet::with_capacity(n as usize + 1);
    visited.insert((0, 0));
    let mut counts = Vec::with_capacity(cps.len());
    let mut next = 0usize;
    drive(model, n, seed, |s, _| {
        visited.insert((s.x, s.y));
        if next < cps.len() && s.n == cps[next] {
            counts.push((s.n, visited.len() as u64));
            next += 1;
        }
    });
    Ok(grid
        .iter()
        .map(|m| counts.iter().find(|(k, _)| k == m).map(|c| c.1).unwrap())
        .collect())
}

/// Writes one CSV row per checkpoint, with a header.
pub fn write_trajectory_csv<W: Write>(summary: &TrajectorySummary, mut out: W) -> io::Result<()> {
    writeln!(out, "m,x,y,h_count,v_count")?;
    for c in &summary.checkpoints {
        writeln!(out, "{},{},{},{},{}", c.m, c.x, c.y, c.h_count, c.v_count)?;
    }
    Ok(())
}
