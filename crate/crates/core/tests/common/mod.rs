//! Dense reference constructions shared by integration tests.
//!
//! Everything here is built from definitions (Kronecker products, explicit
//! permutations, digit arithmetic) without calling the matrix-free code.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron3(a: &CMat, b: &CMat, c: &CMat) -> CMat {
    a.kronecker(b).kronecker(c)
}

/// Register sizes derived from first principles.
#[derive(Debug, Clone, Copy)]
pub struct Dims {
    pub k: usize,
    pub b: u32,
    pub levels: usize,
    pub space: usize,
    pub angle_qubits: u32,
    pub dir_qubits: u32,
    pub move_dim: usize,
    pub n_moves: usize,
}

impl Dims {
    pub fn new(k: usize, b: u32) -> Self {
        let levels = 1usize << b;
        let mut angle_qubits = 0;
        while (1usize << angle_qubits) < k {
            angle_qubits += 1;
        }
        let dir_qubits = if b >= 2 { 1 } else { 0 };
        Dims {
            k,
            b,
            levels,
            space: levels.pow(k as u32),
            angle_qubits,
            dir_qubits,
            move_dim: 1 << (angle_qubits + dir_qubits),
            n_moves: if b == 1 { k } else { 2 * k },
        }
    }

    pub fn total(&self) -> usize {
        self.space * self.move_dim * 2
    }

    pub fn digits(&self, x: usize) -> Vec<usize> {
        let mut d = vec![0; self.k];
        let mut r = x;
        for slot in d.iter_mut().rev() {
            *slot = r % self.levels;
            r /= self.levels;
        }
        d
    }

    pub fn undigits(&self, d: &[usize]) -> usize {
        d.iter().fold(0, |acc, &v| acc * self.levels + v)
    }

    /// `(angle, step)` of a move code, or `None` for padding.
    pub fn decode(&self, code: usize) -> Option<(usize, i64)> {
        let angle = code >> self.dir_qubits;
        if angle >= self.k {
            return None;
        }
        let dir = if self.dir_qubits == 1 { code & 1 } else { 0 };
        Some((angle, if dir == 0 { 1 } else { -1 }))
    }

    pub fn neighbor(&self, x: usize, angle: usize, step: i64) -> usize {
        let mut d = self.digits(x);
        d[angle] = (d[angle] as i64 + step).rem_euclid(self.levels as i64) as usize;
        self.undigits(&d)
    }
}

/// Householder completion of the uniform valid-move vector.
pub fn move_unitary(dims: &Dims) -> CMat {
    let m = dims.move_dim;
    let amp = 1.0 / (dims.n_moves as f64).sqrt();
    let u: Vec<f64> = (0..m).map(|i| if i < dims.n_moves { amp } else { 0.0 }).collect();
    let mut w: Vec<f64> = u.iter().map(|x| -x).collect();
    w[0] += 1.0;
    let norm2: f64 = w.iter().map(|x| x * x).sum();
    CMat::from_fn(m, m, |r, col| {
        let id = if r == col { 1.0 } else { 0.0 };
        if norm2 == 0.0 {
            c(id)
        } else {
            c(id - 2.0 * w[r] * w[col] / norm2)
        }
    })
}

pub fn ry(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    CMat::from_row_slice(2, 2, &[c(co), c(-s), c(s), c(co)])
}

fn projector(n: usize, i: usize) -> CMat {
    let mut p = CMat::zeros(n, n);
    p[(i, i)] = c(1.0);
    p
}

/// The dense walk operator `R V^dag B^dag F B V`.
pub fn dense_walk(dims: &Dims, energies: &[f64], beta: f64) -> CMat {
    assert_eq!(energies.len(), dims.space);
    let (s, m) = (dims.space, dims.move_dim);
    let v = kron3(&eye(s), &move_unitary(dims), &eye(2));

    let mut b = CMat::zeros(dims.total(), dims.total());
    for x in 0..s {
        for code in 0..m {
            let coin = match dims.decode(code) {
                Some((angle, step)) => {
                    let y = dims.neighbor(x, angle, step);
                    let a = (-beta * (energies[y] - energies[x])).exp().min(1.0);
                    ry(2.0 * a.sqrt().asin())
                }
                None => eye(2),
            };
            b += kron3(&projector(s, x), &projector(m, code), &coin);
        }
    }

    let mut f = kron3(&eye(s), &eye(m), &projector(2, 0));
    for code in 0..m {
        let mut shift = CMat::zeros(s, s);
        for x in 0..s {
            let y = match dims.decode(code) {
                Some((angle, step)) => dims.neighbor(x, angle, step),
                None => x,
            };
            shift[(y, x)] = c(1.0);
        }
        f += kron3(&shift, &projector(m, code), &projector(2, 1));
    }

    let r = kron3(&eye(s), &(eye(2 * m) - projector(2 * m, 0) * c(2.0)), &eye(1));

    &r * v.adjoint() * b.adjoint() * &f * &b * &v
}

/// Metropolis matrix `W[to][from]` from its definition.
pub fn dense_metropolis(dims: &Dims, energies: &[f64], beta: f64) -> Vec<Vec<f64>> {
    let s = dims.space;
    let mut w = vec![vec![0.0; s]; s];
    for x in 0..s {
        let mut leave = 0.0;
        for code in 0..dims.n_moves {
            let (angle, step) = dims.decode(code).expect("valid code");
            let y = dims.neighbor(x, angle, step);
            let a = (-beta * (energies[y] - energies[x])).exp().min(1.0) / dims.n_moves as f64;
            w[y][x] += a;
            leave += a;
        }
        w[x][x] += 1.0 - leave;
    }
    w
}

/// `exp(-beta E) / Z` computed with a shift by the minimum energy.
pub fn boltzmann(energies: &[f64], beta: f64) -> Vec<f64> {
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|x| x / z).collect()
}
