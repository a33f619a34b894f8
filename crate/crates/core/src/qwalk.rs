//! Matrix-free statevector simulation of the coined quantum Metropolis walk
//! `W = R V^dag B^dag F B V`.
//!
//! Register order, slowest to fastest: system (`K * b` qubits, the flat
//! configuration index), angle select (`ceil(log2 K)` qubits), direction
//! (one qubit when `b >= 2`), coin (one qubit). The move code is
//! `angle << dq | dir`; direction bit 0 is `+1` and 1 is `-1`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cwalk::acceptance;
use crate::error::{Error, Result};
use crate::landscape::{EnergyLandscape, Grid, Move};
use crate::schedule::ScheduleSpec;

pub const DEFAULT_MAX_QUBITS: u32 = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterLayout {
    grid: Grid,
    angle_qubits: u32,
    direction_qubits: u32,
}

impl RegisterLayout {
    pub fn for_grid(grid: Grid) -> Self {
        let angle_qubits = usize::BITS - (grid.n_angles - 1).leading_zeros();
        let direction_qubits = u32::from(grid.bits >= 2);
        RegisterLayout {
            grid,
            angle_qubits,
            direction_qubits,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn system_qubits(&self) -> u32 {
        self.grid.n_angles as u32 * self.grid.bits
    }

    pub fn angle_qubits(&self) -> u32 {
        self.angle_qubits
    }

    pub fn direction_qubits(&self) -> u32 {
        self.direction_qubits
    }

    pub fn move_qubits(&self) -> u32 {
        self.angle_qubits + self.direction_qubits
    }

    pub fn total_qubits(&self) -> u32 {
        self.system_qubits() + self.move_qubits() + 1
    }

    pub fn system_size(&self) -> usize {
        self.grid.space_size()
    }

    /// Number of move codes, valid or not: `2^(a + dq)`.
    pub fn move_dim(&self) -> usize {
        1 << self.move_qubits()
    }

    /// Number of valid moves `N`.
    pub fn n_moves(&self) -> usize {
        self.grid.n_angles << self.direction_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.total_qubits()
    }

    #[inline]
    pub fn index(&self, system: usize, code: usize, coin: usize) -> usize {
        (((system << self.move_qubits()) | code) << 1) | coin
    }

    /// Inverse of [`RegisterLayout::index`]: `(system, move code, coin)`.
    #[inline]
    pub fn decompose(&self, index: usize) -> (usize, usize, usize) {
        let coin = index & 1;
        let rest = index >> 1;
        let code = rest & (self.move_dim() - 1);
        (rest >> self.move_qubits(), code, coin)
    }

    /// The move encoded by `code`, or `None` for padding codes.
    #[inline]
    pub fn move_of_code(&self, code: usize) -> Option<Move> {
        let angle = code >> self.direction_qubits;
        if angle >= self.grid.n_angles {
            return None;
        }
        let dir = code & ((1 << self.direction_qubits) - 1);
        Some(Move {
            angle,
            step: if dir == 0 { 1 } else { -1 },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0>` on every register.
    pub fn zero(layout: RegisterLayout) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); layout.dim()];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { layout, amps }
    }

    /// Panics if the length disagrees with the layout.
    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<Complex64>) -> Self {
        assert_eq!(amps.len(), layout.dim(), "amplitude count does not match layout");
        StateVector { layout, amps }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn block_len(&self) -> usize {
        2 * self.layout.move_dim()
    }

    /// Probability of each system configuration, move and coin traced out.
    pub fn system_marginal(&self) -> Vec<f64> {
        self.amps
            .chunks(self.block_len())
            .map(|block| block.iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }

    pub fn system_probability(&self, system: usize) -> f64 {
        let len = self.block_len();
        self.amps[system * len..(system + 1) * len]
            .iter()
            .map(|a| a.norm_sqr())
            .sum()
    }
}

/// Real orthogonal matrix on the move register whose first column is the
/// uniform superposition over valid move codes.
///
/// Completed as the Householder reflection `I - 2 v v^T / (v^T v)` with
/// `v = e_0 - u`; when `u = e_0` it is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveOperator {
    dim: usize,
    /// Row-major `dim x dim`.
    matrix: Vec<f64>,
}

impl MoveOperator {
    pub fn new(layout: &RegisterLayout) -> Self {
        let dim = layout.move_dim();
        let n = layout.n_moves();
        let amp = 1.0 / (n as f64).sqrt();
        let u: Vec<f64> = (0..dim).map(|c| if c < n { amp } else { 0.0 }).collect();
        let mut v = u.iter().map(|x| -x).collect::<Vec<_>>();
        v[0] += 1.0;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let mut matrix = vec![0.0; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                let id = if r == c { 1.0 } else { 0.0 };
                matrix[r * dim + c] = if vv == 0.0 { id } else { id - 2.0 * v[r] * v[c] / vv };
            }
        }
        MoveOperator { dim, matrix }
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn apply_block(&self, block: &mut [Complex64], transpose: bool, scratch: &mut Vec<Complex64>) {
        let dim = self.dim;
        for coin in 0..2 {
            scratch.clear();
            scratch.extend((0..dim).map(|c| block[2 * c + coin]));
            for r in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, x) in scratch.iter().enumerate() {
                    let m = if transpose {
                        self.matrix[c * dim + r]
                    } else {
                        self.matrix[r * dim + c]
                    };
                    acc += x * m;
                }
                block[2 * r + coin] = acc;
            }
        }
    }
}

/// Per `(system, move)` coin rotation `(cos, sin)` of half-angle
/// `arcsin(sqrt(A))`.
#[derive(Debug, Clone)]
struct CoinTable {
    beta: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

/// A coined walk bound to one landscape: precomputed move operator and
/// neighbor table, reused across steps.
#[derive(Debug, Clone)]
pub struct CoinedWalk<'a> {
    landscape: &'a EnergyLandscape,
    layout: RegisterLayout,
    v: MoveOperator,
    moves: Vec<Move>,
    /// `neighbor[x * N + j]` is the configuration reached from `x` by move `j`.
    neighbor: Vec<usize>,
    coins: Option<CoinTable>,
}

impl<'a> CoinedWalk<'a> {
    pub fn new(landscape: &'a EnergyLandscape) -> Self {
        let grid = landscape.grid();
        let layout = RegisterLayout::for_grid(grid);
        let moves: Vec<Move> = (0..layout.n_moves())
            .map(|c| layout.move_of_code(c).expect("codes below N are valid"))
            .collect();
        let d = grid.space_size();
        let mut neighbor = Vec::with_capacity(d * moves.len());
        for x in 0..d {
            neighbor.extend(moves.iter().map(|&mv| grid.apply_move_flat(x, mv)));
        }
        CoinedWalk {
            landscape,
            layout,
            v: MoveOperator::new(&layout),
            moves,
            neighbor,
            coins: None,
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn move_operator(&self) -> &MoveOperator {
        &self.v
    }

    fn check(&self, state: &StateVector) {
        assert_eq!(state.layout, self.layout, "state layout does not match walk");
    }

    pub fn apply_v(&self, state: &mut StateVector) {
        self.apply_move_op(state, false);
    }

    pub fn apply_v_dagger(&self, state: &mut StateVector) {
        self.apply_move_op(state, true);
    }

    fn apply_move_op(&self, state: &mut StateVector, transpose: bool) {
        self.check(state);
        if self.v.dim == 1 {
            return;
        }
        let len = state.block_len();
        state.amps.par_chunks_mut(len).for_each_init(
            || Vec::with_capacity(self.v.dim),
            |scratch, block| self.v.apply_block(block, transpose, scratch),
        );
    }

    fn coin_table(&mut self, beta: f64) -> &CoinTable {
        let stale = self.coins.as_ref().is_none_or(|t| t.beta.to_bits() != beta.to_bits());
        if stale {
            let n = self.moves.len();
            let energies = self.landscape.energies();
            let mut cos = Vec::with_capacity(self.neighbor.len());
            let mut sin = Vec::with_capacity(self.neighbor.len());
            for (i, &y) in self.neighbor.iter().enumerate() {
                let x = i / n;
                let a = acceptance(beta, energies[x], energies[y]);
                cos.push((1.0 - a).sqrt());
                sin.push(a.sqrt());
            }
            self.coins = Some(CoinTable { beta, cos, sin });
        }
        self.coins.as_ref().expect("just filled")
    }

    pub fn apply_b(&mut self, state: &mut StateVector, beta: f64) {
        self.apply_coin(state, beta, false);
    }

    pub fn apply_b_dagger(&mut self, state: &mut StateVector, beta: f64) {
        self.apply_coin(state, beta, true);
    }

    fn apply_coin(&mut self, state: &mut StateVector, beta: f64, inverse: bool) {
        self.check(state);
        let n = self.moves.len();
        let len = state.block_len();
        let table = self.coin_table(beta);
        state
            .amps
            .par_chunks_mut(len)
            .enumerate()
            .for_each(|(x, block)| {
                for j in 0..n {
                    let c = table.cos[x * n + j];
                    let s = if inverse { -table.sin[x * n + j] } else { table.sin[x * n + j] };
                    let a0 = block[2 * j];
                    let a1 = block[2 * j + 1];
                    block[2 * j] = a0 * c - a1 * s;
                    block[2 * j + 1] = a0 * s + a1 * c;
                }
            });
    }

    /// Moves the system along `z_j` on coin-1 components. Each move shifts one
    /// angle digit cyclically, done in place one line at a time.
    pub fn apply_f(&self, state: &mut StateVector) {
        self.check(state);
        let grid = self.layout.grid;
        let levels = grid.levels();
        let d = grid.space_size();
        let mut line = vec![Complex64::new(0.0, 0.0); levels];
        for (code, mv) in self.moves.iter().enumerate() {
            let stride = grid.stride(mv.angle);
            let shift = (mv.step as isize).rem_euclid(levels as isize) as usize;
            if shift == 0 {
                continue;
            }
            for base in (0..d).filter(|&x| grid.digit(x, mv.angle) == 0) {
                for (m, slot) in line.iter_mut().enumerate() {
                    *slot = state.amps[self.layout.index(base + m * stride, code, 1)];
                }
                for (m, amp) in line.iter().enumerate() {
                    let dest = base + ((m + shift) % levels) * stride;
                    state.amps[self.layout.index(dest, code, 1)] = *amp;
                }
            }
        }
    }

    /// Sign flip on every component with move and coin registers all zero.
    pub fn apply_r(&self, state: &mut StateVector) {
        self.check(state);
        let len = state.block_len();
        state.amps.par_chunks_mut(len).for_each(|block| block[0] = -block[0]);
    }

    /// One step `R V^dag B^dag F B V` at inverse temperature `beta`.
    pub fn step(&mut self, state: &mut StateVector, beta: f64) {
        self.apply_v(state);
        self.apply_b(state, beta);
        self.apply_f(state);
        self.apply_b_dagger(state, beta);
        self.apply_v_dagger(state);
        self.apply_r(state);
    }

    /// Applies one step per entry of `betas`, returning the ground marginal
    /// after each step.
    pub fn run(&mut self, state: &mut StateVector, betas: &[f64]) -> Vec<f64> {
        let ground = self.landscape.ground_index();
        betas
            .iter()
            .map(|&beta| {
                self.step(state, beta);
                state.system_probability(ground).clamp(0.0, 1.0)
            })
            .collect()
    }
}

pub fn op_v(state: &mut StateVector, landscape: &EnergyLandscape) {
    CoinedWalk::new(landscape).apply_v(state);
}

pub fn op_v_dagger(state: &mut StateVector, landscape: &EnergyLandscape) {
    CoinedWalk::new(landscape).apply_v_dagger(state);
}

pub fn op_b(state: &mut StateVector, beta: f64, landscape: &EnergyLandscape) {
    CoinedWalk::new(landscape).apply_b(state, beta);
}

pub fn op_b_dagger(state: &mut StateVector, beta: f64, landscape: &EnergyLandscape) {
    CoinedWalk::new(landscape).apply_b_dagger(state, beta);
}

pub fn op_f(state: &mut StateVector, landscape: &EnergyLandscape) {
    CoinedWalk::new(landscape).apply_f(state);
}

pub fn op_r(state: &mut StateVector, landscape: &EnergyLandscape) {
    CoinedWalk::new(landscape).apply_r(state);
}

pub fn walk_step(state: &mut StateVector, beta: f64, landscape: &EnergyLandscape) {
    CoinedWalk::new(landscape).step(state, beta);
}

/// Fails when the full register exceeds `max_qubits`.
pub fn check_qubits(layout: &RegisterLayout, max_qubits: u32) -> Result<()> {
    let q = layout.total_qubits();
    if q > max_qubits {
        return Err(Error::SizeGuard {
            what: "statevector qubit count",
            size: q as usize,
            limit: max_qubits as usize,
        });
    }
    Ok(())
}

/// Heuristic annealed walk `W_L ... W_1 |pi_0>` with `beta(t)` from the
/// schedule; returns the ground-configuration marginal after each step.
pub fn run_heuristic(
    init: &StateVector,
    landscape: &EnergyLandscape,
    schedule: &ScheduleSpec,
    steps: usize,
) -> Result<Vec<f64>> {
    run_heuristic_guarded(init, landscape, schedule, steps, DEFAULT_MAX_QUBITS)
}

pub fn run_heuristic_guarded(
    init: &StateVector,
    landscape: &EnergyLandscape,
    schedule: &ScheduleSpec,
    steps: usize,
    max_qubits: u32,
) -> Result<Vec<f64>> {
    run_with_betas(init, landscape, &schedule.betas(steps), max_qubits)
}

/// Like [`run_heuristic`] with an explicit per-step inverse temperature list.
pub fn run_with_betas(
    init: &StateVector,
    landscape: &EnergyLandscape,
    betas: &[f64],
    max_qubits: u32,
) -> Result<Vec<f64>> {
    let layout = RegisterLayout::for_grid(landscape.grid());
    check_qubits(&layout, max_qubits)?;
    if init.layout != layout {
        return Err(Error::Domain(
            "initial state layout does not match the landscape".into(),
        ));
    }
    let mut walk = CoinedWalk::new(landscape);
    let mut state = init.clone();
    Ok(walk.run(&mut state, betas))
}

/// Final state after `betas.len()` steps, for callers that need more than the
/// ground marginal.
pub fn evolve(init: &StateVector, landscape: &EnergyLandscape, betas: &[f64]) -> StateVector {
    let mut walk = CoinedWalk::new(landscape);
    let mut state = init.clone();
    for &beta in betas {
        walk.step(&mut state, beta);
    }
    state
}
