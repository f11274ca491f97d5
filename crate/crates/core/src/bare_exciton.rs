//! Two bare excitons with the hard-core constraint, solved in closed form.
//!
//! The K = 0 relative wave functions are standing waves on half-integer wave
//! vectors κ_μ = 2πμ/(Na), which interlace with the integer k grid.

use std::f64::consts::{PI, SQRT_2};

use faer::Mat;
use serde::Serialize;

use crate::linalg::eigh_real;
use crate::{Error, Result};

/// A half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HalfInt(i64);

impl HalfInt {
    /// From 2μ, which must be odd.
    pub fn from_twice(twice: i64) -> Self {
        assert!(twice.rem_euclid(2) == 1, "2μ = {twice} is not odd");
        Self(twice)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn abs(self) -> Self {
        Self(self.0.abs())
    }
}

/// κ_μ = 2πμ/(Na) for μ = −(N−1)/2, …, (N−1)/2.
#[derive(Clone, Debug)]
pub struct KappaGrid {
    pub n: usize,
    pub a: f64,
    pub mus: Vec<HalfInt>,
    pub values: Vec<f64>,
}

impl KappaGrid {
    pub fn new(n: usize, a: f64) -> Self {
        let top = n as i64 - 1;
        let mus: Vec<HalfInt> = (-top..=top).step_by(2).map(HalfInt::from_twice).collect();
        let values = mus.iter().map(|&m| kappa(m, n, a)).collect();
        Self { n, a, mus, values }
    }

    /// μ > 0 only: one label per distinct K = 0 state.
    pub fn positive(&self) -> impl Iterator<Item = HalfInt> + '_ {
        self.mus.iter().copied().filter(|m| m.0 > 0)
    }
}

pub fn kappa(mu: HalfInt, n: usize, a: f64) -> f64 {
    2.0 * PI * mu.value() / (n as f64 * a)
}

/// a·κ_μ, independent of the lattice constant.
fn phase(mu: HalfInt, n: usize) -> f64 {
    PI * mu.0 as f64 / n as f64
}

/// g_n(μ) = √2·(1 − δ_{n0})·sin(|n|·a|κ_μ|)/√N.
pub fn bare_amplitude(n: i64, mu: HalfInt, n_sites: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    SQRT_2 * ((n.abs() as f64) * phase(mu.abs(), n_sites)).sin() / (n_sites as f64).sqrt()
}

/// 2E0 + 4t·cos(aκ_μ).
pub fn bare_energy(mu: HalfInt, n_sites: usize, e0: f64, t: f64) -> f64 {
    2.0 * e0 + bare_energy_offset(mu, n_sites, t)
}

pub fn bare_energy_offset(mu: HalfInt, n_sites: usize, t: f64) -> f64 {
    4.0 * t * phase(mu, n_sites).cos()
}

/// Unitary Fourier transform of g_n(μ) at k_ν:
/// (√2/N)·sin(a|κ_μ|)/(cos(ak_ν) − cos(aκ_μ)).
pub fn bare_amplitude_momentum(nu: i64, mu: HalfInt, n_sites: usize) -> f64 {
    let ak = 2.0 * PI * nu as f64 / n_sites as f64;
    let am = phase(mu.abs(), n_sites);
    SQRT_2 / n_sites as f64 * am.sin() / (ak.cos() - am.cos())
}

#[derive(Clone, Debug, Serialize)]
pub struct BareOracle {
    pub n: usize,
    /// Full spectrum relative to 2E0, ascending.
    pub offsets: Vec<f64>,
    /// K = 0 spectrum relative to 2E0, ascending.
    pub k0_offsets: Vec<f64>,
    pub e0: f64,
    /// max |H − Hᵀ|.
    pub hermiticity_residual: f64,
    pub dimension: usize,
}

pub const BARE_ORACLE_MAX_N: usize = 64;

/// Unordered exciton pairs {s1 < s2} on the ring.
pub(crate) fn exciton_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|s1| (s1 + 1..n).map(move |s2| (s1, s2))).collect()
}

/// Nearest-neighbour hopping block on hard-core pairs, relative to 2E0.
pub(crate) fn pair_hopping(n: usize, t: f64) -> Mat<f64> {
    let pairs = exciton_pairs(n);
    let index = |a: usize, b: usize| {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        pairs.binary_search(&(lo, hi)).expect("pair exists")
    };
    let dim = pairs.len();
    let mut h = Mat::<f64>::zeros(dim, dim);
    for (row, &(s1, s2)) in pairs.iter().enumerate() {
        for (mover, other) in [(s1, s2), (s2, s1)] {
            for target in [(mover + 1) % n, (mover + n - 1) % n] {
                if target != other {
                    let col = index(target, other);
                    h.write(row, col, h.read(row, col) + t);
                }
            }
        }
    }
    h
}

/// Direct diagonalization of the two-exciton hard-core problem.
pub fn bare_oracle(n: usize, e0: f64, t: f64) -> Result<BareOracle> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidConfig(format!("N must be even and >= 4, got {n}")));
    }
    if n > BARE_ORACLE_MAX_N {
        return Err(Error::DimensionTooLarge { dim: n * (n - 1) / 2, max_n: BARE_ORACLE_MAX_N });
    }
    let pairs = exciton_pairs(n);
    let dim = pairs.len();
    let h = pair_hopping(n, t);
    let mut herm = 0.0_f64;
    for i in 0..dim {
        for j in 0..dim {
            herm = herm.max((h.read(i, j) - h.read(j, i)).abs());
        }
    }
    let (offsets, _) = eigh_real(&h);

    // Translation orbits, labelled by ring distance 1..=N/2.
    let half = n / 2;
    let distance = |(s1, s2): (usize, usize)| (s2 - s1).min(n - (s2 - s1));
    let mut basis = Mat::<f64>::zeros(dim, half);
    let mut sizes = vec![0usize; half];
    for &pr in &pairs {
        sizes[distance(pr) - 1] += 1;
    }
    for (row, &pr) in pairs.iter().enumerate() {
        let d = distance(pr) - 1;
        basis.write(row, d, 1.0 / (sizes[d] as f64).sqrt());
    }
    let block = basis.transpose() * &h * &basis;
    let (k0_offsets, _) = eigh_real(&block);

    Ok(BareOracle { n, offsets, k0_offsets, e0, hermiticity_residual: herm, dimension: dim })
}
