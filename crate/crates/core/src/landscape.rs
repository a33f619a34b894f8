//! Discretized torsion-angle configuration space and its energy landscape.
//!
//! A configuration is a K-tuple of grid indices, one per torsion angle, each in
//! `[0, 2^b)`. Configurations are flattened row-major with angle 0 varying
//! slowest, so the flat index of `(i_0, ..., i_{K-1})` is
//! `sum_k i_k * (2^b)^(K-1-k)`.

use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported `K * b`; the energy table has `2^(K*b)` entries.
pub const MAX_TOTAL_BITS: u32 = 30;

/// Shape of the configuration space: `K` angles discretized with `b` bits each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub n_angles: usize,
    pub bits: u32,
}

impl Grid {
    pub fn new(n_angles: usize, bits: u32) -> Result<Self> {
        if n_angles < 1 {
            return Err(Error::field("n_angles", "must be at least 1"));
        }
        if bits < 1 {
            return Err(Error::field("bits", "must be at least 1"));
        }
        let total = (n_angles as u64).saturating_mul(bits as u64);
        if total > MAX_TOTAL_BITS as u64 {
            return Err(Error::Domain(format!(
                "n_angles * bits = {total} exceeds the supported maximum {MAX_TOTAL_BITS}"
            )));
        }
        Ok(Grid { n_angles, bits })
    }

    /// Grid points per angle, `2^b`.
    #[inline]
    pub fn levels(&self) -> usize {
        1usize << self.bits
    }

    /// Number of configurations, `(2^b)^K`.
    #[inline]
    pub fn space_size(&self) -> usize {
        1usize << (self.bits as usize * self.n_angles)
    }

    /// Stride of angle `k` in the flat index.
    #[inline]
    pub fn stride(&self, k: usize) -> usize {
        1usize << (self.bits as usize * (self.n_angles - 1 - k))
    }

    pub fn to_flat(&self, indices: &[usize]) -> Result<usize> {
        if indices.len() != self.n_angles {
            return Err(Error::Domain(format!(
                "expected {} angle indices, got {}",
                self.n_angles,
                indices.len()
            )));
        }
        let levels = self.levels();
        let mut flat = 0usize;
        for &i in indices {
            if i >= levels {
                return Err(Error::Domain(format!(
                    "angle index {i} out of range [0, {levels})"
                )));
            }
            flat = flat * levels + i;
        }
        Ok(flat)
    }

    pub fn from_flat(&self, flat: usize) -> ConfigIndex {
        let levels = self.levels();
        let mut indices = vec![0; self.n_angles];
        let mut rest = flat;
        for slot in indices.iter_mut().rev() {
            *slot = rest % levels;
            rest /= levels;
        }
        ConfigIndex { indices, flat }
    }

    /// Index of angle `k` within a flat configuration.
    #[inline]
    pub fn digit(&self, flat: usize, k: usize) -> usize {
        (flat / self.stride(k)) & (self.levels() - 1)
    }

    /// Flat index reached from `flat` by applying `mv`.
    #[inline]
    pub fn apply_move_flat(&self, flat: usize, mv: Move) -> usize {
        let stride = self.stride(mv.angle);
        let levels = self.levels();
        let cur = (flat / stride) & (levels - 1);
        let next = (cur as isize + mv.step as isize).rem_euclid(levels as isize) as usize;
        flat - cur * stride + next * stride
    }

    pub fn apply_move(&self, cfg: &ConfigIndex, mv: Move) -> ConfigIndex {
        self.from_flat(self.apply_move_flat(cfg.flat, mv))
    }
}

/// A configuration as both per-angle indices and its flat index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIndex {
    pub indices: Vec<usize>,
    pub flat: usize,
}

/// A single-angle grid step `(k, s)` with `s` in `{+1, -1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub angle: usize,
    pub step: i8,
}

/// The fixed proposal set: every angle stepped by +1 or -1 with periodic
/// wraparound. At one bit per angle the two directions coincide and only `+1`
/// is kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveSet {
    moves: Vec<Move>,
}

impl MoveSet {
    pub fn new(grid: Grid) -> Self {
        let mut moves = Vec::with_capacity(2 * grid.n_angles);
        for angle in 0..grid.n_angles {
            moves.push(Move { angle, step: 1 });
            if grid.bits >= 2 {
                moves.push(Move { angle, step: -1 });
            }
        }
        MoveSet { moves }
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

/// Grid angle in radians for index `idx` at `bits` bits: `idx * 2pi / 2^bits`.
pub fn angle_of_index(idx: usize, bits: u32) -> Result<f64> {
    if bits < 1 || bits >= usize::BITS {
        return Err(Error::field("bits", "must be in [1, 63]"));
    }
    let levels = 1usize << bits;
    if idx >= levels {
        return Err(Error::Domain(format!(
            "angle index {idx} out of range [0, {levels})"
        )));
    }
    Ok(idx as f64 * TAU / levels as f64)
}

/// Discretized energy grid over `K` torsion angles.
///
/// Immutable once built; `ground_index` is the lowest flat index among the
/// minimum-energy configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLandscape {
    name: String,
    grid: Grid,
    energies: Vec<f64>,
    true_angle_indices: Option<Vec<usize>>,
    ground_index: usize,
}

impl EnergyLandscape {
    pub fn new(
        name: impl Into<String>,
        grid: Grid,
        energies: Vec<f64>,
        true_angle_indices: Option<Vec<usize>>,
    ) -> Result<Self> {
        let expected = grid.space_size();
        if energies.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: energies.len(),
            });
        }
        if let Some(index) = energies.iter().position(|e| !e.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if let Some(ref t) = true_angle_indices {
            if t.len() != grid.n_angles {
                return Err(Error::field(
                    "true_angle_indices",
                    format!("expected {} entries, got {}", grid.n_angles, t.len()),
                ));
            }
            if let Some(bad) = t.iter().find(|&&i| i >= grid.levels()) {
                return Err(Error::field(
                    "true_angle_indices",
                    format!("index {bad} out of range [0, {})", grid.levels()),
                ));
            }
        }
        // strict `<` keeps the first (lowest) index on ties
        let mut ground_index = 0;
        for (i, &e) in energies.iter().enumerate() {
            if e < energies[ground_index] {
                ground_index = i;
            }
        }
        Ok(EnergyLandscape {
            name: name.into(),
            grid,
            energies,
            true_angle_indices,
            ground_index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn n_angles(&self) -> usize {
        self.grid.n_angles
    }

    pub fn bits(&self) -> u32 {
        self.grid.bits
    }

    pub fn space_size(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, flat: usize) -> f64 {
        self.energies[flat]
    }

    pub fn true_angle_indices(&self) -> Option<&[usize]> {
        self.true_angle_indices.as_deref()
    }

    pub fn ground_index(&self) -> usize {
        self.ground_index
    }

    pub fn ground_config(&self) -> ConfigIndex {
        self.grid.from_flat(self.ground_index)
    }

    pub fn move_set(&self) -> MoveSet {
        MoveSet::new(self.grid)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: LandscapeFile = serde_json::from_str(text)?;
        raw.validate()
    }

    pub fn to_json_string(&self) -> Result<String> {
        let file = LandscapeFile {
            format_version: 1,
            name: self.name.clone(),
            n_angles: self.grid.n_angles as i64,
            bits: self.grid.bits as i64,
            energies: self.energies.clone(),
            true_angle_indices: self.true_angle_indices.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

/// On-disk landscape schema, version 1.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LandscapeFile {
    format_version: u32,
    name: String,
    n_angles: i64,
    bits: i64,
    energies: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    true_angle_indices: Option<Vec<usize>>,
}

impl LandscapeFile {
    fn validate(self) -> Result<EnergyLandscape> {
        if self.format_version != 1 {
            return Err(Error::field(
                "format_version",
                format!("unsupported version {}", self.format_version),
            ));
        }
        if self.n_angles < 1 {
            return Err(Error::field("n_angles", "must be at least 1"));
        }
        if self.bits < 1 {
            return Err(Error::field("bits", "must be at least 1"));
        }
        let bits = u32::try_from(self.bits).map_err(|_| Error::field("bits", "too large"))?;
        let grid = Grid::new(self.n_angles as usize, bits)?;
        EnergyLandscape::new(self.name, grid, self.energies, self.true_angle_indices)
    }
}

pub fn load_landscape(path: impl AsRef<Path>) -> Result<EnergyLandscape> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    EnergyLandscape::from_json_str(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    UniformRandom,
    DihedralCosine,
}

impl std::str::FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_random" => Ok(SyntheticKind::UniformRandom),
            "dihedral_cosine" => Ok(SyntheticKind::DihedralCosine),
            other => Err(Error::field("kind", format!("unknown synthetic kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SyntheticKind::UniformRandom => "uniform_random",
            SyntheticKind::DihedralCosine => "dihedral_cosine",
        })
    }
}

/// Torsion-style energy `E = sum_k a_k cos(theta_k - mu_k) + sum_{k<l} c_kl cos(theta_k - theta_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DihedralCosine {
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
    /// Upper-triangular couplings in `(0,1), (0,2), ..., (1,2), ...` order.
    pub couplings: Vec<f64>,
}

impl DihedralCosine {
    /// Draws `a_k ~ U[-1, 1)`, `mu_k ~ U[0, 2pi)`, `c_kl ~ U[-0.5, 0.5)` in that order.
    pub fn sample(rng: &mut impl Rng, n_angles: usize) -> Self {
        let amplitudes = (0..n_angles).map(|_| rng.random_range(-1.0..1.0)).collect();
        let phases = (0..n_angles).map(|_| rng.random_range(0.0..TAU)).collect();
        let n_pairs = n_angles * n_angles.saturating_sub(1) / 2;
        let couplings = (0..n_pairs).map(|_| rng.random_range(-0.5..0.5)).collect();
        DihedralCosine {
            amplitudes,
            phases,
            couplings,
        }
    }

    pub fn energies(&self, grid: Grid) -> Vec<f64> {
        let k_count = grid.n_angles;
        let step = TAU / grid.levels() as f64;
        (0..grid.space_size())
            .map(|flat| {
                let theta: Vec<f64> = (0..k_count)
                    .map(|k| grid.digit(flat, k) as f64 * step)
                    .collect();
                let mut e = 0.0;
                for k in 0..k_count {
                    e += self.amplitudes[k] * (theta[k] - self.phases[k]).cos();
                }
                let mut pair = 0;
                for k in 0..k_count {
                    for l in (k + 1)..k_count {
                        e += self.couplings[pair] * (theta[k] - theta[l]).cos();
                        pair += 1;
                    }
                }
                e
            })
            .collect()
    }
}

/// Seeded synthetic landscape. Uses `ChaCha8Rng::seed_from_u64(seed)`.
pub fn generate_synthetic(
    seed: u64,
    n_angles: usize,
    bits: u32,
    kind: SyntheticKind,
) -> Result<EnergyLandscape> {
    let grid = Grid::new(n_angles, bits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let energies = match kind {
        SyntheticKind::UniformRandom => (0..grid.space_size())
            .map(|_| rng.random::<f64>())
            .collect(),
        SyntheticKind::DihedralCosine => DihedralCosine::sample(&mut rng, n_angles).energies(grid),
    };
    let name = format!("synthetic-{kind}-s{seed}-k{n_angles}-b{bits}");
    EnergyLandscape::new(name, grid, energies, None)
}
