//! Classical Metropolis walk: transition matrix, exact propagation, and
//! Monte Carlo trajectories.
//!
//! Matrices use the column-stochastic convention `entries[to][from]`, so one
//! step maps a distribution `p` to `W p`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::init::InitialDistribution;
use crate::landscape::{EnergyLandscape, Move};
use crate::schedule::ScheduleSpec;

/// Largest state count for a dense `d x d` transition matrix.
pub const DEFAULT_MAX_DENSE_DIM: usize = 1 << 12;
/// Largest state count for exact (sparse) propagation.
pub const DEFAULT_MAX_PROPAGATE_DIM: usize = 1 << 16;

/// Metropolis acceptance `min(1, exp(-beta (e_to - e_from)))`.
#[inline]
pub fn acceptance(beta: f64, e_from: f64, e_to: f64) -> f64 {
    let delta = e_to - e_from;
    if delta <= 0.0 || beta == 0.0 {
        1.0
    } else {
        (-beta * delta).exp().min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    beta: f64,
    dim: usize,
    /// Row-major: `entries[to * dim + from]`.
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// Wraps raw entries without checking stochasticity.
    pub fn from_entries(beta: f64, dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Domain(format!(
                "expected {} entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(TransitionMatrix { beta, dim, entries })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Probability of moving `from -> to`.
    #[inline]
    pub fn get(&self, to: usize, from: usize) -> f64 {
        self.entries[to * self.dim + from]
    }

    pub fn set(&mut self, to: usize, from: usize, value: f64) {
        self.entries[to * self.dim + from] = value;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|to| {
                let row = &self.entries[to * self.dim..(to + 1) * self.dim];
                row.iter().zip(p).map(|(w, x)| w * x).sum()
            })
            .collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.dim];
        for to in 0..self.dim {
            for (from, s) in sums.iter_mut().enumerate() {
                *s += self.get(to, from);
            }
        }
        sums
    }
}

pub fn build_transition_matrix(landscape: &EnergyLandscape, beta: f64) -> Result<TransitionMatrix> {
    build_transition_matrix_guarded(landscape, beta, DEFAULT_MAX_DENSE_DIM)
}

pub fn build_transition_matrix_guarded(
    landscape: &EnergyLandscape,
    beta: f64,
    max_dim: usize,
) -> Result<TransitionMatrix> {
    let d = landscape.space_size();
    if d > max_dim {
        return Err(Error::SizeGuard {
            what: "dense transition matrix",
            size: d,
            limit: max_dim,
        });
    }
    let grid = landscape.grid();
    let moves = landscape.move_set();
    let proposal = 1.0 / moves.len() as f64;
    let mut w = TransitionMatrix {
        beta,
        dim: d,
        entries: vec![0.0; d * d],
    };
    for from in 0..d {
        let e_from = landscape.energy(from);
        let mut leave = 0.0;
        for &mv in moves.moves() {
            let to = grid.apply_move_flat(from, mv);
            let p = proposal * acceptance(beta, e_from, landscape.energy(to));
            w.entries[to * d + from] += p;
            leave += p;
        }
        w.entries[from * d + from] += 1.0 - leave;
    }
    Ok(w)
}

/// Sparse single step `p -> W(beta) p` using the move structure directly.
fn step_distribution(landscape: &EnergyLandscape, moves: &[Move], beta: f64, p: &[f64]) -> Vec<f64> {
    let grid = landscape.grid();
    let proposal = 1.0 / moves.len() as f64;
    let mut out = vec![0.0; p.len()];
    for (from, &mass) in p.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let e_from = landscape.energy(from);
        let mut stay = mass;
        for &mv in moves {
            let to = grid.apply_move_flat(from, mv);
            let flow = mass * proposal * acceptance(beta, e_from, landscape.energy(to));
            out[to] += flow;
            stay -= flow;
        }
        out[from] += stay;
    }
    out
}

/// Exact ground-state probability after each of `steps` annealed steps.
pub fn propagate_exact(
    init: &InitialDistribution,
    landscape: &EnergyLandscape,
    schedule: &ScheduleSpec,
    steps: usize,
) -> Result<Vec<f64>> {
    propagate_exact_guarded(init, landscape, schedule, steps, DEFAULT_MAX_PROPAGATE_DIM)
}

pub fn propagate_exact_guarded(
    init: &InitialDistribution,
    landscape: &EnergyLandscape,
    schedule: &ScheduleSpec,
    steps: usize,
    max_dim: usize,
) -> Result<Vec<f64>> {
    let d = landscape.space_size();
    if d > max_dim {
        return Err(Error::SizeGuard {
            what: "exact propagation",
            size: d,
            limit: max_dim,
        });
    }
    check_pmf(init, d)?;
    let moves = landscape.move_set();
    let ground = landscape.ground_index();
    let mut p = init.pmf.clone();
    let mut series = Vec::with_capacity(steps);
    for beta in schedule.betas(steps) {
        p = step_distribution(landscape, moves.moves(), beta, &p);
        series.push(p[ground].clamp(0.0, 1.0));
    }
    Ok(series)
}

fn check_pmf(init: &InitialDistribution, d: usize) -> Result<()> {
    if init.pmf.len() != d {
        return Err(Error::Domain(format!(
            "initial distribution has {} entries, landscape has {d} states",
            init.pmf.len()
        )));
    }
    Ok(())
}

/// Default Monte Carlo trajectory count, `500 * (2^b)^K`.
pub fn default_iterations(landscape: &EnergyLandscape) -> usize {
    500 * landscape.space_size()
}

/// Estimated ground-state probabilities with binomial standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSeries {
    pub iterations: usize,
    pub p: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Runs `iterations` independent trajectories of `steps` Metropolis steps.
///
/// Trajectory `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `i`,
/// so results do not depend on the worker count. Success at step `t` means the
/// walker sits on the ground configuration at that step.
pub fn sample_walks(
    init: &InitialDistribution,
    landscape: &EnergyLandscape,
    schedule: &ScheduleSpec,
    steps: usize,
    iterations: usize,
    seed: u64,
) -> Result<SampledSeries> {
    if iterations < 1 {
        return Err(Error::field("iterations", "must be at least 1"));
    }
    let d = landscape.space_size();
    check_pmf(init, d)?;
    let mut cdf = Vec::with_capacity(d);
    let mut acc = 0.0;
    for &p in &init.pmf {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let betas = schedule.betas(steps);
    let moves = landscape.move_set();
    let moves = moves.moves();
    let grid = landscape.grid();
    let ground = landscape.ground_index();

    let hits = (0..iterations)
        .into_par_iter()
        .fold(
            || vec![0u64; steps],
            |mut hits, traj| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(traj as u64);
                let u = rng.random::<f64>() * total;
                let mut x = cdf.partition_point(|&c| c <= u).min(d - 1);
                for (t, &beta) in betas.iter().enumerate() {
                    let mv = moves[rng.random_range(0..moves.len())];
                    let y = grid.apply_move_flat(x, mv);
                    let a = acceptance(beta, landscape.energy(x), landscape.energy(y));
                    if a >= 1.0 || rng.random::<f64>() < a {
                        x = y;
                    }
                    if x == ground {
                        hits[t] += 1;
                    }
                }
                hits
            },
        )
        .reduce(
            || vec![0u64; steps],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let n = iterations as f64;
    let p: Vec<f64> = hits.iter().map(|&h| h as f64 / n).collect();
    let stderr = p.iter().map(|&q| (q * (1.0 - q) / n).sqrt()).collect();
    Ok(SampledSeries {
        iterations,
        p,
        stderr,
    })
}
