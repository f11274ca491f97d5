//! Photon-pair / photon-exciton (AB) subsystem and its coupling to the
//! hard-core exciton pairs.
//!
//! Without the C block, the first two coupled equations at each k form the
//! 2×2 matrix [[2E_p, √2G], [√2G, E_p + E_e]] whose eigenvectors
//! (X^α, X^β) define the amplitudes p^(i)_ν. The exciton-pair block is
//! expanded in the standing waves g_n(μ), giving amplitudes e_μ, and the two
//! sets couple through Λ_νμ.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::bare_exciton::{bare_amplitude, bare_energy_offset, HalfInt, KappaGrid};
use crate::dispersion::{exciton_offset, photon_offset, polariton_offsets_from, KGrid};
use crate::exact2p::{separations, zero_index, Band, LocalEnergy, TwoPolaritonState};
use crate::numeric::compensated_sum;
use crate::params::ModelParams;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    L,
    U,
}

/// One eigenvector of the AB block. `energy` is relative to 2E0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ABPolariton {
    pub branch: Branch,
    pub energy: f64,
    pub x_alpha: f64,
    pub x_beta: f64,
}

/// E^(p,L), E^(p,U) relative to 2E0 from photon and exciton offsets.
fn ab_offsets_from(ph: f64, ex: f64, big_g: f64) -> (f64, f64) {
    let (l, u) = polariton_offsets_from(ph, ex, SQRT_2 * big_g);
    (ph + l, ph + u)
}

/// E^(p,i) = E_p + [E_e + E_p ∓ √((E_p − E_e)² + 8G²)]/2, absolute.
pub fn ab_energies(k: f64, p: &ModelParams) -> (f64, f64) {
    let (l, u) = ab_offsets(k, p);
    (2.0 * p.e0 + l, 2.0 * p.e0 + u)
}

pub fn ab_offsets(k: f64, p: &ModelParams) -> (f64, f64) {
    ab_offsets_from(photon_offset(k, p), exciton_offset(k, p), p.big_g)
}

/// Signed eigenvector of the AB block for eigenvalue `lambda`: X^α ≥ 0 and
/// X^β carries the sign of λ − E_p − E_e.
fn mixing_for(lambda: f64, ph: f64, ex: f64, big_g: f64) -> (f64, f64) {
    let d = lambda - ph - ex;
    let c = SQRT_2 * big_g;
    let norm = d.hypot(c);
    if norm == 0.0 {
        return (1.0, 0.0);
    }
    (d.abs() / norm, d.signum() * c / norm)
}

fn polaritons_from(ph: f64, ex: f64, big_g: f64) -> (ABPolariton, ABPolariton) {
    let (el, eu) = ab_offsets_from(ph, ex, big_g);
    let make = |branch, energy| {
        let (x_alpha, x_beta) = mixing_for(energy, ph, ex, big_g);
        ABPolariton { branch, energy, x_alpha, x_beta }
    };
    (make(Branch::L, el), make(Branch::U, eu))
}

/// Lower and upper AB eigenvectors at wave vector `k`.
pub fn mixing(k: f64, p: &ModelParams) -> (ABPolariton, ABPolariton) {
    polaritons_from(photon_offset(k, p), exciton_offset(k, p), p.big_g)
}

/// Λ_νμ = ½[cot(π(ν+|μ|)/N) − cot(π(ν−|μ|)/N)].
pub fn lambda_kernel(nu: i64, mu: HalfInt, n: usize) -> f64 {
    let m = mu.abs().value();
    let nf = n as f64;
    let cot = |x: f64| x.cos() / x.sin();
    0.5 * (cot(PI * (nu as f64 + m) / nf) - cot(PI * (nu as f64 - m) / nf))
}

/// F_νν' = N(δ_νν' + δ_ν,−ν') − 2, indices taken modulo N.
pub fn reduced_kernel(nu: i64, nu2: i64, n: usize) -> f64 {
    let nn = n as i64;
    let same = (nu - nu2).rem_euclid(nn) == 0;
    let opposite = (nu + nu2).rem_euclid(nn) == 0;
    n as f64 * (same as u8 + opposite as u8) as f64 - 2.0
}

/// e_μ = ½·Σ_s g_s(μ)·C(s) for every μ on the κ grid, from real-space C(n).
pub fn exciton_projection(c_n: &[f64]) -> Vec<f64> {
    let n = c_n.len();
    let seps = separations(n);
    KappaGrid::new(n, 1.0)
        .mus
        .iter()
        .map(|&mu| {
            0.5 * compensated_sum(seps.iter().zip(c_n).map(|(&s, &c)| bare_amplitude(s, mu, n) * c))
        })
        .collect()
}

/// AB eigenvectors on the full k grid.
fn ab_table(p: &ModelParams) -> (KGrid, Vec<(ABPolariton, ABPolariton)>) {
    let grid = KGrid::for_params(p);
    let table = grid
        .values
        .iter()
        .map(|&k| polaritons_from(photon_offset(k, p), exciton_offset(k, p), p.big_g))
        .collect();
    (grid, table)
}

/// Σ_μ Λ_νμ·e_μ for every ν on the grid.
fn lambda_rows(grid: &KGrid, e_mu: &[f64]) -> Vec<f64> {
    let n = grid.n;
    let kap = KappaGrid::new(n, 1.0);
    (0..n)
        .map(|i| {
            compensated_sum(
                kap.mus.iter().zip(e_mu).map(|(&mu, &e)| lambda_kernel(grid.nu(i), mu, n) * e),
            )
        })
        .collect()
}

fn check_denominators(x: LocalEnergy, table: &[(ABPolariton, ABPolariton)], big_g: f64) -> Result<()> {
    for (l, u) in table {
        for level in [l.energy, u.energy] {
            let dist = x.minus(level).abs();
            if dist < 1e-9 * big_g {
                return Err(Error::NearSingular { offset: x.offset(), distance: dist });
            }
        }
    }
    Ok(())
}

/// A(n = 0) rebuilt from the exciton amplitudes:
/// (2G/(N√N))·Σ_{i,ν} X^α X^β/(E − E^(p,i)_ν)·Σ_μ Λ_νμ e_μ.
pub fn reconstruct_a0(state: &TwoPolaritonState, p: &ModelParams) -> Result<f64> {
    let (grid, table) = ab_table(p);
    check_denominators(state.local, &table, p.big_g)?;
    let e_mu = exciton_projection(&state.c_n);
    let rows = lambda_rows(&grid, &e_mu);
    let n = p.n as f64;
    let sum = compensated_sum(table.iter().zip(&rows).flat_map(|((l, u), &row)| {
        [l, u].map(|b| b.x_alpha * b.x_beta / state.local.minus(b.energy) * row)
    }));
    Ok(2.0 * p.big_g / (n * n.sqrt()) * sum)
}

/// Exciton weight √(Σ|C(k)|²), signed by the overlap with g(ρ − ½).
pub fn excitonic_weight(state: &TwoPolaritonState) -> f64 {
    let n = state.c_k.len();
    let mag = state.c_k.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mu = HalfInt::from_twice(2 * state.rho as i64 - 1);
    let overlap: f64 = separations(n)
        .iter()
        .zip(&state.c_n)
        .map(|(&s, &c)| bare_amplitude(s, mu, n) * c)
        .sum();
    if overlap < 0.0 {
        -mag
    } else {
        mag
    }
}

/// Single-μ estimate of A(0) keeping only |μ| = ρ − ½, with the given
/// exciton weight.
pub fn approx_a0_with(state: &TwoPolaritonState, p: &ModelParams, x_gamma: f64) -> Result<f64> {
    if state.band != Band::LL || state.rho == 0 || state.rho > p.n / 2 {
        return Err(Error::IndexOutOfRange { what: "LL rho", index: state.rho, max: p.n / 2 });
    }
    let (grid, table) = ab_table(p);
    check_denominators(state.local, &table, p.big_g)?;
    let mu = HalfInt::from_twice(2 * state.rho as i64 - 1);
    let n = p.n as f64;
    let sum = compensated_sum((0..p.n).flat_map(|i| {
        let lam = lambda_kernel(grid.nu(i), mu, p.n) + lambda_kernel(grid.nu(i), HalfInt::from_twice(-mu.twice()), p.n);
        let (l, u) = table[i];
        [l, u].map(|b| b.x_alpha * b.x_beta / state.local.minus(b.energy) * lam)
    }));
    Ok(p.big_g * x_gamma / (n * n.sqrt()) * sum)
}

pub fn approx_a0(state: &TwoPolaritonState, p: &ModelParams) -> Result<f64> {
    approx_a0_with(state, p, excitonic_weight(state))
}

/// Amplitudes in the (p^(L), p^(U), e_μ) basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ABCoordinates {
    pub p_lower: Vec<f64>,
    pub p_upper: Vec<f64>,
    pub e_mu: Vec<f64>,
}

pub fn to_ab_coordinates(a_k: &[f64], b_k: &[f64], c_n: &[f64], p: &ModelParams) -> ABCoordinates {
    let (_, table) = ab_table(p);
    let (p_lower, p_upper) = table
        .iter()
        .zip(a_k.iter().zip(b_k))
        .map(|((l, u), (&a, &b))| (l.x_alpha * a + l.x_beta * b, u.x_alpha * a + u.x_beta * b))
        .unzip();
    ABCoordinates { p_lower, p_upper, e_mu: exciton_projection(c_n) }
}

/// Inverse of [`to_ab_coordinates`]: returns (A(k), B(k), C(n)).
pub fn from_ab_coordinates(coords: &ABCoordinates, p: &ModelParams) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (_, table) = ab_table(p);
    let mut a = Vec::with_capacity(p.n);
    let mut b = Vec::with_capacity(p.n);
    for (i, (l, u)) in table.iter().enumerate() {
        a.push(l.x_alpha * coords.p_lower[i] + u.x_alpha * coords.p_upper[i]);
        b.push(l.x_beta * coords.p_lower[i] + u.x_beta * coords.p_upper[i]);
    }
    let kap = KappaGrid::new(p.n, 1.0);
    let c = separations(p.n)
        .iter()
        .map(|&s| {
            compensated_sum(kap.mus.iter().zip(&coords.e_mu).map(|(&mu, &e)| bare_amplitude(s, mu, p.n) * e))
        })
        .collect();
    (a, b, c)
}

/// Relative residuals of the two coupled equations in AB coordinates
/// (photon-pair line, exciton line).
pub fn coupled_residuals(state: &TwoPolaritonState, p: &ModelParams) -> (f64, f64) {
    let (grid, table) = ab_table(p);
    let coords = to_ab_coordinates(&state.a_k, &state.b_k, &state.c_n, p);
    let rows = lambda_rows(&grid, &coords.e_mu);
    let n = p.n as f64;
    let g = p.big_g;
    let x = state.local;
    let mut scale = g.max(x.offset().abs());
    let mut r1 = 0.0;
    for (i, (l, u)) in table.iter().enumerate() {
        for (b, amp) in [(l, coords.p_lower[i]), (u, coords.p_upper[i])] {
            scale = scale.max(b.energy.abs());
            let r = x.minus(b.energy) * amp - 2.0 * g / n * b.x_beta * rows[i];
            r1 += r * r;
        }
    }
    let kap = KappaGrid::new(p.n, 1.0);
    let mut r2 = 0.0;
    for (j, &mu) in kap.mus.iter().enumerate() {
        let rhs = compensated_sum(table.iter().enumerate().flat_map(|(i, (l, u))| {
            let lam = lambda_kernel(grid.nu(i), mu, p.n);
            [l.x_beta * coords.p_lower[i] * lam, u.x_beta * coords.p_upper[i] * lam]
        }));
        let level = bare_energy_offset(mu, p.n, p.t);
        let r = x.minus(level) * coords.e_mu[j] - g / n * rhs;
        r2 += r * r;
    }
    let norm = coords
        .p_lower
        .iter()
        .chain(&coords.p_upper)
        .chain(&coords.e_mu)
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    (r1.sqrt() / (scale * norm), r2.sqrt() / (scale * norm))
}

/// Residual of the photon-only equation obtained by eliminating e_μ (t = 0):
/// (E − E^(p,i)_ν)p^(i)_ν = G²X^(i,β)_ν/(N(E − 2E0))·Σ F_νν' X^(i',β)_ν' p^(i')_ν'.
pub fn reduced_residual(state: &TwoPolaritonState, p: &ModelParams) -> f64 {
    let (grid, table) = ab_table(p);
    let coords = to_ab_coordinates(&state.a_k, &state.b_k, &state.c_n, p);
    let n = p.n;
    let x = state.local;
    let g2 = p.big_g * p.big_g;
    let mut scale = p.big_g.max(x.offset().abs());
    let mut res = 0.0;
    let beta_p: Vec<f64> = table
        .iter()
        .enumerate()
        .map(|(i, (l, u))| l.x_beta * coords.p_lower[i] + u.x_beta * coords.p_upper[i])
        .collect();
    for i in 0..n {
        let coupled = compensated_sum((0..n).map(|j| reduced_kernel(grid.nu(i), grid.nu(j), n) * beta_p[j]));
        let (l, u) = table[i];
        for (b, amp) in [(l, coords.p_lower[i]), (u, coords.p_upper[i])] {
            scale = scale.max(b.energy.abs());
            let r = x.minus(b.energy) * amp - g2 * b.x_beta / (n as f64 * x.offset()) * coupled;
            res += r * r;
        }
    }
    let norm = coords.p_lower.iter().chain(&coords.p_upper).map(|v| v * v).sum::<f64>().sqrt();
    res.sqrt() / (scale * norm)
}

/// Everything the `wavepacket` subcommand reports for one state.
#[derive(Clone, Debug, Serialize)]
pub struct WavepacketReport {
    pub rho: usize,
    pub energy_hz: f64,
    pub energy_minus_2e0_hz: f64,
    pub nu: Vec<i64>,
    pub ab_lower_minus_2e0_hz: Vec<f64>,
    pub ab_upper_minus_2e0_hz: Vec<f64>,
    pub x_alpha_lower: Vec<f64>,
    pub x_beta_lower: Vec<f64>,
    pub x_alpha_upper: Vec<f64>,
    pub x_beta_upper: Vec<f64>,
    pub lambda_row_sums: Vec<f64>,
    pub mu: Vec<f64>,
    pub e_mu: Vec<f64>,
    pub a0_direct: f64,
    pub a0_reconstructed: Option<f64>,
    pub a0_single_mu: Option<f64>,
}

pub fn report(state: &TwoPolaritonState, p: &ModelParams) -> WavepacketReport {
    let (grid, table) = ab_table(p);
    let e_mu = exciton_projection(&state.c_n);
    let rows = lambda_rows(&grid, &e_mu);
    let hz = |w: f64| w / (2.0 * PI);
    WavepacketReport {
        rho: state.rho,
        energy_hz: hz(state.energy),
        energy_minus_2e0_hz: hz(state.offset),
        nu: (0..p.n).map(|i| grid.nu(i)).collect(),
        ab_lower_minus_2e0_hz: table.iter().map(|(l, _)| hz(l.energy)).collect(),
        ab_upper_minus_2e0_hz: table.iter().map(|(_, u)| hz(u.energy)).collect(),
        x_alpha_lower: table.iter().map(|(l, _)| l.x_alpha).collect(),
        x_beta_lower: table.iter().map(|(l, _)| l.x_beta).collect(),
        x_alpha_upper: table.iter().map(|(_, u)| u.x_alpha).collect(),
        x_beta_upper: table.iter().map(|(_, u)| u.x_beta).collect(),
        lambda_row_sums: rows,
        mu: KappaGrid::new(p.n, 1.0).mus.iter().map(|m| m.value()).collect(),
        e_mu,
        a0_direct: state.a_n[zero_index(p.n)],
        a0_reconstructed: reconstruct_a0(state, p).ok(),
        a0_single_mu: approx_a0(state, p).ok(),
    }
}
