//! Single-particle curves and the non-interacting two-polariton bands.
//!
//! Absolute energies sit on a carrier of order 10¹⁵ rad/s, so every function
//! here has an offset twin: single-particle values relative to `E0`,
//! two-particle values relative to `2·E0`. The solvers only use the offsets.

use std::f64::consts::PI;

use serde::Serialize;

use crate::params::{ModelParams, C_LIGHT};

/// Integer wave vectors k_ν = 2πν/(Na), ν ∈ (−N/2, N/2], in ascending ν.
#[derive(Clone, Debug, PartialEq)]
pub struct KGrid {
    pub n: usize,
    pub a: f64,
    pub values: Vec<f64>,
}

impl KGrid {
    pub fn new(n: usize, a: f64) -> Self {
        let values = (0..n).map(|i| Self::k_of(n, a, Self::nu_at(n, i))).collect();
        Self { n, a, values }
    }

    pub fn for_params(p: &ModelParams) -> Self {
        Self::new(p.n, p.a)
    }

    fn k_of(n: usize, a: f64, nu: i64) -> f64 {
        2.0 * PI * nu as f64 / (n as f64 * a)
    }

    fn nu_at(n: usize, i: usize) -> i64 {
        i as i64 - n as i64 / 2 + 1
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn nu(&self, i: usize) -> i64 {
        Self::nu_at(self.n, i)
    }

    pub fn index_of(&self, nu: i64) -> usize {
        let h = self.n as i64 / 2;
        let wrapped = (nu + h - 1).rem_euclid(self.n as i64);
        wrapped as usize
    }

    /// Index of −k (wrapping π/a onto itself).
    pub fn partner(&self, i: usize) -> usize {
        self.index_of(-self.nu(i))
    }

    pub fn zero_index(&self) -> usize {
        self.index_of(0)
    }
}

/// c√(k² + q⊥²).
pub fn photon_energy(k: f64, p: &ModelParams) -> f64 {
    p.e0 + photon_offset(k, p)
}

/// E_p(k) − E0, without cancellation.
pub fn photon_offset(k: f64, p: &ModelParams) -> f64 {
    let q = p.q_perp;
    p.delta + C_LIGHT * k * k / ((k * k + q * q).sqrt() + q)
}

pub fn exciton_energy(k: f64, p: &ModelParams) -> f64 {
    p.e0 + exciton_offset(k, p)
}

pub fn exciton_offset(k: f64, p: &ModelParams) -> f64 {
    2.0 * p.t * (p.a * k).cos()
}

/// Lower and upper polariton offsets relative to E0 for photon offset `ph`
/// and exciton offset `ex`.
pub fn polariton_offsets_from(ph: f64, ex: f64, big_g: f64) -> (f64, f64) {
    let s = ph + ex;
    let r = (ph - ex).hypot(2.0 * big_g);
    let prod = ph * ex - big_g * big_g;
    if s >= 0.0 {
        let up = 0.5 * (s + r);
        if up == 0.0 {
            (0.0, 0.0)
        } else {
            (prod / up, up)
        }
    } else {
        let lo = 0.5 * (s - r);
        (lo, prod / lo)
    }
}

pub fn polariton_offsets(k: f64, p: &ModelParams) -> (f64, f64) {
    polariton_offsets_from(photon_offset(k, p), exciton_offset(k, p), p.big_g)
}

/// (E_L, E_U) in absolute rad/s.
pub fn polariton_energies(k: f64, p: &ModelParams) -> (f64, f64) {
    let (l, u) = polariton_offsets(k, p);
    (p.e0 + l, p.e0 + u)
}

/// Δ(E,k) = [E−2E_L][E−E_L−E_U][E−2E_U] for absolute `e`.
pub fn delta_product(e: f64, k: f64, p: &ModelParams) -> f64 {
    delta_product_offset(e - 2.0 * p.e0, k, p)
}

/// Δ with `x = E − 2E0`.
pub fn delta_product_offset(x: f64, k: f64, p: &ModelParams) -> f64 {
    let (l, u) = polariton_offsets(k, p);
    (x - 2.0 * l) * (x - l - u) * (x - 2.0 * u)
}

/// φ(E,k) = [E−2E_p][E−E_p−E_e] − 2G² for absolute `e`.
pub fn phi_aux(e: f64, k: f64, p: &ModelParams) -> f64 {
    phi_aux_offset(e - 2.0 * p.e0, k, p)
}

pub fn phi_aux_offset(x: f64, k: f64, p: &ModelParams) -> f64 {
    let ph = photon_offset(k, p);
    let ex = exciton_offset(k, p);
    (x - 2.0 * ph) * (x - ph - ex) - 2.0 * p.big_g * p.big_g
}

/// Two-polariton band edges relative to 2E0 (rad/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandEdges {
    pub ll_bottom: f64,
    pub ll_top: f64,
    pub lu_bottom: f64,
    pub lu_top: f64,
    pub uu_bottom: f64,
    pub uu_top: f64,
    /// lu_bottom − ll_top.
    pub gap: f64,
}

/// Edges from the extremes of each branch over the k grid. For t = 0 these
/// are E_LL(π/a), E_LU(0) and E_UU(0).
pub fn band_edges(p: &ModelParams) -> BandEdges {
    let grid = KGrid::for_params(p);
    let mut ll = (f64::INFINITY, f64::NEG_INFINITY);
    let mut lu = ll;
    let mut uu = ll;
    for &k in &grid.values {
        let (l, u) = polariton_offsets(k, p);
        let widen = |r: &mut (f64, f64), v: f64| {
            r.0 = r.0.min(v);
            r.1 = r.1.max(v);
        };
        widen(&mut ll, 2.0 * l);
        widen(&mut lu, l + u);
        widen(&mut uu, 2.0 * u);
    }
    BandEdges {
        ll_bottom: ll.0,
        ll_top: ll.1,
        lu_bottom: lu.0,
        lu_top: lu.1,
        uu_bottom: uu.0,
        uu_top: uu.1,
        gap: lu.0 - ll.1,
    }
}

/// k_SC = 2√(E0·G)/c.
pub fn strong_coupling_k(p: &ModelParams) -> f64 {
    p.k_sc
}
