//! Dense exact diagonalization of the full two-excitation sector.
//!
//! Basis: photon pairs {q1 ≤ q2}, photon + excited atom (q, s), and hard-core
//! exciton pairs {s1 < s2}. Energies are relative to 2E0. Momentum labels come
//! from the translation T that shifts every atom s → s − 1 and multiplies a
//! photon q by e^{iqa}, so a state of total momentum K has ⟨T⟩ = e^{iKa}.

use std::f64::consts::{PI, SQRT_2};

use faer::complex_native::c64;
use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;

use crate::bare_exciton::{exciton_pairs, pair_hopping};
use crate::dispersion::{photon_offset, KGrid};
use crate::exact2p::{bunching_merit_complex, to_real_space, SpectrumK0};
use crate::linalg::{eigh_complex, to_faer};
use crate::params::ModelParams;
use crate::{Error, Result, C64};

pub const ORACLE_MAX_N: usize = 64;
/// Relative eigenvalue spread treated as one degenerate cluster.
const CLUSTER_TOL: f64 = 1e-9;
/// |⟨T⟩| needed to trust a momentum label.
const LABEL_TOL: f64 = 1e-8;
/// Mixing weight of the anti-Hermitian part of T when splitting clusters.
const SPLIT_WEIGHT: f64 = 0.618_033_988_749_895;

#[derive(Clone, Debug)]
pub struct TwoExcitationBasis {
    pub n: usize,
    /// Grid indices (i1 ≤ i2).
    pub photon_pairs: Vec<(usize, usize)>,
    /// Atom pairs (s1 < s2).
    pub exciton_pairs: Vec<(usize, usize)>,
}

impl TwoExcitationBasis {
    pub fn new(n: usize) -> Self {
        let photon_pairs = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        Self { n, photon_pairs, exciton_pairs: exciton_pairs(n) }
    }

    pub fn dim(&self) -> usize {
        self.photon_pairs.len() + self.n * self.n + self.exciton_pairs.len()
    }

    pub fn pp_index(&self, i: usize, j: usize) -> usize {
        pp_lookup(self, i, j)
    }

    pub fn pe_index(&self, q: usize, s: usize) -> usize {
        self.photon_pairs.len() + q * self.n + s
    }

    pub fn ee_index(&self, s1: usize, s2: usize) -> usize {
        let (a, b) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
        let base = self.photon_pairs.len() + self.n * self.n;
        base + self.exciton_pairs.binary_search(&(a, b)).expect("hard-core pair")
    }
}

pub struct OracleHamiltonian {
    pub params: ModelParams,
    pub basis: TwoExcitationBasis,
    pub grid: KGrid,
    pub matrix: Mat<c64>,
}

/// Image of each basis state under T, with its phase.
fn translation_map(basis: &TwoExcitationBasis, grid: &KGrid, a: f64) -> Vec<(usize, C64)> {
    let n = basis.n;
    let phase = |i: usize| C64::from_polar(1.0, grid.values[i] * a);
    let mut map = Vec::with_capacity(basis.dim());
    for &(i, j) in &basis.photon_pairs {
        map.push((pp_lookup(basis, i, j), phase(i) * phase(j)));
    }
    for q in 0..n {
        for s in 0..n {
            map.push((basis.pe_index(q, (s + n - 1) % n), phase(q)));
        }
    }
    for &(s1, s2) in &basis.exciton_pairs {
        map.push((basis.ee_index((s1 + n - 1) % n, (s2 + n - 1) % n), C64::new(1.0, 0.0)));
    }
    map
}

fn pp_lookup(basis: &TwoExcitationBasis, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    basis.photon_pairs.binary_search(&(i, j)).expect("photon pair")
}

pub fn build_hamiltonian(p: &ModelParams) -> Result<OracleHamiltonian> {
    let n = p.n;
    if n > ORACLE_MAX_N {
        return Err(Error::DimensionTooLarge { dim: 2 * n * n, max_n: ORACLE_MAX_N });
    }
    let basis = TwoExcitationBasis::new(n);
    let grid = KGrid::for_params(p);
    let dim = basis.dim();
    let ph: Vec<f64> = grid.values.iter().map(|&k| photon_offset(k, p)).collect();
    let g = p.g;
    let t = p.t;
    let mut h = Mat::<c64>::zeros(dim, dim);
    let mut add = |r: usize, c: usize, v: C64| {
        let cur = h.read(r, c);
        h.write(r, c, cur + to_faer(v));
    };
    let wave = |q: usize, s: usize| C64::from_polar(1.0, grid.values[q] * p.a * s as f64);

    for (row, &(i, j)) in basis.photon_pairs.iter().enumerate() {
        add(row, row, C64::new(ph[i] + ph[j], 0.0));
    }
    for q in 0..n {
        for s in 0..n {
            let row = basis.pe_index(q, s);
            // The atom carries E0, which is the reference.
            add(row, row, C64::new(ph[q], 0.0));
            if t != 0.0 {
                add(row, basis.pe_index(q, (s + 1) % n), C64::new(t, 0.0));
                add(row, basis.pe_index(q, (s + n - 1) % n), C64::new(t, 0.0));
            }
        }
    }
    if t != 0.0 {
        let hop = pair_hopping(n, t);
        let base = basis.ee_index(0, 1);
        for r in 0..basis.exciton_pairs.len() {
            for c in 0..basis.exciton_pairs.len() {
                let v = hop.read(r, c);
                if v != 0.0 {
                    add(base + r, base + c, C64::new(v, 0.0));
                }
            }
        }
    }

    // Photon absorption: ⟨q, s|H|q1, q2⟩ and ⟨{s, s'}|H|q, s⟩, plus conjugates.
    for (col, &(i1, i2)) in basis.photon_pairs.iter().enumerate() {
        let norm = if i1 == i2 { SQRT_2 } else { 1.0 };
        for s in 0..n {
            let mut targets = vec![(i1, i2)];
            if i1 != i2 {
                targets.push((i2, i1));
            }
            for (keep, absorbed) in targets {
                let v = wave(absorbed, s) * (g * if i1 == i2 { 2.0 } else { 1.0 } / norm);
                let row = basis.pe_index(keep, s);
                add(row, col, v);
                add(col, row, v.conj());
            }
        }
    }
    for q in 0..n {
        for s in 0..n {
            let col = basis.pe_index(q, s);
            for s2 in (0..n).filter(|&s2| s2 != s) {
                let row = basis.ee_index(s, s2);
                let v = wave(q, s2) * g;
                add(row, col, v);
                add(col, row, v.conj());
            }
        }
    }
    Ok(OracleHamiltonian { params: p.clone(), basis, grid, matrix: h })
}

impl OracleHamiltonian {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Largest |H_ij|, used as ‖H‖ for relative tolerances.
    pub fn max_norm(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0_f64;
        for j in 0..d {
            for i in 0..d {
                let z = self.matrix.read(i, j);
                m = m.max(z.re.hypot(z.im));
            }
        }
        m
    }

    /// max |H − H†|.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0_f64;
        for j in 0..d {
            for i in 0..=j {
                let a = self.matrix.read(i, j);
                let b = self.matrix.read(j, i);
                m = m.max((a.re - b.re).hypot(a.im + b.im));
            }
        }
        m
    }

    /// max |(HT − TH)_ij|.
    pub fn translation_commutator(&self) -> f64 {
        let map = translation_map(&self.basis, &self.grid, self.params.a);
        let d = self.dim();
        let mut inverse = vec![(0usize, C64::new(0.0, 0.0)); d];
        for (j, &(img, ph)) in map.iter().enumerate() {
            inverse[img] = (j, ph);
        }
        let mut m = 0.0_f64;
        for j in 0..d {
            let (img, phj) = map[j];
            for i in 0..d {
                let hz = self.matrix.read(i, img);
                let ht = C64::new(hz.re, hz.im) * phj;
                let (pre, phi) = inverse[i];
                let tz = self.matrix.read(pre, j);
                let th = C64::new(tz.re, tz.im) * phi;
                m = m.max((ht - th).norm());
            }
        }
        m
    }

    /// Matrix trace (real).
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix.read(i, i).re).sum()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); d];
        for j in 0..d {
            if v[j] == C64::new(0.0, 0.0) {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                let z = self.matrix.read(i, j);
                *o += C64::new(z.re, z.im) * v[j];
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleResult {
    pub params: ModelParams,
    pub n: usize,
    /// Eigenvalues relative to 2E0, ascending.
    pub offsets: Vec<f64>,
    #[serde(skip)]
    pub vectors: Vec<Vec<C64>>,
    /// Total momentum as a grid index ν_K ∈ (−N/2, N/2]; None when unresolved.
    pub k_index: Vec<Option<i64>>,
    /// ΔA of the relative photon-pair amplitude in each state's K sector.
    pub delta_a: Vec<f64>,
    pub h_norm: f64,
    pub hermiticity_residual: f64,
}

impl OracleResult {
    pub fn unresolved(&self) -> Vec<usize> {
        (0..self.offsets.len()).filter(|&i| self.k_index[i].is_none()).collect()
    }

    /// States with total momentum index `nu_k`, ascending in energy.
    pub fn sector(&self, nu_k: i64) -> Vec<usize> {
        (0..self.offsets.len()).filter(|&i| self.k_index[i] == Some(nu_k)).collect()
    }

    pub fn k_value(&self, nu_k: i64) -> f64 {
        2.0 * PI * nu_k as f64 / (self.n as f64 * self.params.a)
    }
}

fn wrap_nu(nu: i64, n: usize) -> i64 {
    let nn = n as i64;
    let h = nn / 2;
    (nu + h - 1).rem_euclid(nn) - h + 1
}

/// ⟨u|T_h|v⟩ with T_h = (T + T†)/2 + γ(T − T†)/(2i), a Hermitian operator
/// whose eigenvalues separate every momentum.
fn split_form(map: &[(usize, C64)], u: &[C64], v: &[C64]) -> C64 {
    let mut t_uv = C64::new(0.0, 0.0);
    let mut t_vu = C64::new(0.0, 0.0);
    for (j, &(img, ph)) in map.iter().enumerate() {
        t_uv += u[img].conj() * ph * v[j];
        t_vu += v[img].conj() * ph * u[j];
    }
    // ⟨u|T†|v⟩ = conj(⟨v|T|u⟩).
    let t_dag = t_vu.conj();
    0.5 * (t_uv + t_dag) + SPLIT_WEIGHT * (t_uv - t_dag) / C64::new(0.0, 2.0)
}

fn expect_t(map: &[(usize, C64)], v: &[C64]) -> C64 {
    map.iter().enumerate().map(|(j, &(img, ph))| v[img].conj() * ph * v[j]).sum()
}

/// Full dense diagonalization with degenerate clusters split by the
/// translation operator. Used to cross-check the sector-blocked solve.
pub fn diagonalize_dense(h: &OracleHamiltonian) -> OracleResult {
    let p = &h.params;
    let n = p.n;
    let h_norm = h.max_norm();
    let (offsets, mut vectors) = eigh_complex(&h.matrix);
    let map = translation_map(&h.basis, &h.grid, p.a);

    // Rotate each near-degenerate cluster onto eigenvectors of T_h.
    let tol = CLUSTER_TOL * h_norm.max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < offsets.len() {
        let mut end = start + 1;
        while end < offsets.len() && offsets[end] - offsets[end - 1] <= tol {
            end += 1;
        }
        let m = end - start;
        if m > 1 {
            let block = Mat::<c64>::from_fn(m, m, |r, c| to_faer(split_form(&map, &vectors[start + r], &vectors[start + c])));
            let (_, rot) = eigh_complex(&block);
            let old: Vec<Vec<C64>> = vectors[start..end].to_vec();
            for (c, coeffs) in rot.iter().enumerate() {
                let mut v = vec![C64::new(0.0, 0.0); old[0].len()];
                for (r, &w) in coeffs.iter().enumerate() {
                    for (x, &y) in v.iter_mut().zip(&old[r]) {
                        *x += y * w;
                    }
                }
                vectors[start + c] = v;
            }
        }
        start = end;
    }

    let k_index: Vec<Option<i64>> = vectors
        .iter()
        .map(|v| {
            let t = expect_t(&map, v);
            (t.norm() > 1.0 - LABEL_TOL)
                .then(|| wrap_nu((t.arg() * n as f64 / (2.0 * PI)).round() as i64, n))
        })
        .collect();

    finish(h, offsets, vectors, k_index)
}

fn finish(h: &OracleHamiltonian, offsets: Vec<f64>, vectors: Vec<Vec<C64>>, k_index: Vec<Option<i64>>) -> OracleResult {
    let grid = &h.grid;
    let delta_a = vectors
        .iter()
        .zip(&k_index)
        .map(|(v, k)| match k {
            Some(nu_k) => bunching_merit_complex(&relative_photon_amplitude(&h.basis, grid, v, *nu_k)),
            None => 0.0,
        })
        .collect();
    OracleResult {
        params: h.params.clone(),
        n: h.params.n,
        offsets,
        vectors,
        k_index,
        delta_a,
        h_norm: h.max_norm(),
        hermiticity_residual: h.hermiticity_residual(),
    }
}

/// Orbits of the basis under T: for each orbit, (index, phase) of T^m|b⟩
/// for m = 0..N−1.
fn translation_orbits(h: &OracleHamiltonian) -> Vec<Vec<(usize, C64)>> {
    let map = translation_map(&h.basis, &h.grid, h.params.a);
    let mut seen = vec![false; map.len()];
    let mut orbits = Vec::new();
    for b in 0..map.len() {
        if seen[b] {
            continue;
        }
        let mut orbit = Vec::with_capacity(h.basis.n);
        let (mut idx, mut ph) = (b, C64::new(1.0, 0.0));
        for _ in 0..h.basis.n {
            seen[idx] = true;
            orbit.push((idx, ph));
            let (next, step) = map[idx];
            ph *= step;
            idx = next;
        }
        orbits.push(orbit);
    }
    orbits
}

/// Orthonormal sparse basis of the total-momentum sector ν_K.
fn sector_basis(orbits: &[Vec<(usize, C64)>], nu_k: i64, n: usize) -> Vec<Vec<(usize, C64)>> {
    let mut cols = Vec::new();
    for orbit in orbits {
        let mut col: Vec<(usize, C64)> = Vec::new();
        for (m, &(idx, ph)) in orbit.iter().enumerate() {
            let w = ph * C64::from_polar(1.0, -2.0 * PI * ((nu_k * m as i64).rem_euclid(n as i64)) as f64 / n as f64);
            match col.iter_mut().find(|(i, _)| *i == idx) {
                Some(entry) => entry.1 += w,
                None => col.push((idx, w)),
            }
        }
        let norm = col.iter().map(|(_, z)| z.norm_sqr()).sum::<f64>().sqrt();
        // Short orbits cancel exactly in the wrong sectors.
        if norm > 1e-6 {
            cols.push(col.into_iter().map(|(i, z)| (i, z / norm)).collect());
        }
    }
    cols
}

/// Diagonalizes H sector by sector in total momentum. Each eigenvalue is
/// refined by its Rayleigh quotient.
pub fn diagonalize(h: &OracleHamiltonian) -> OracleResult {
    let n = h.params.n;
    let dim = h.dim();
    let orbits = translation_orbits(h);
    let nn = n as i64;
    let read = |i: usize, j: usize| {
        let z = h.matrix.read(i, j);
        C64::new(z.re, z.im)
    };
    let sectors: Vec<(i64, Vec<f64>, Vec<Vec<C64>>)> = ((-nn / 2 + 1)..=(nn / 2))
        .into_par_iter()
        .map(|nu_k| {
            let cols = sector_basis(&orbits, nu_k, n);
            let m = cols.len();
            let mut hk = vec![C64::new(0.0, 0.0); m * m];
            for (a, ca) in cols.iter().enumerate() {
                for (b, cb) in cols.iter().enumerate().skip(a) {
                    let mut acc = C64::new(0.0, 0.0);
                    for &(i, vi) in ca {
                        for &(j, vj) in cb {
                            acc += vi.conj() * read(i, j) * vj;
                        }
                    }
                    hk[a * m + b] = acc;
                    hk[b * m + a] = acc.conj();
                }
            }
            let mat = Mat::<c64>::from_fn(m, m, |r, c| to_faer(hk[r * m + c]));
            let (_, us) = eigh_complex(&mat);
            let mut vals = Vec::with_capacity(m);
            let mut vecs = Vec::with_capacity(m);
            for u in us {
                let rq: f64 = (0..m)
                    .map(|r| (u[r].conj() * (0..m).map(|c| hk[r * m + c] * u[c]).sum::<C64>()).re)
                    .sum::<f64>()
                    / u.iter().map(|z| z.norm_sqr()).sum::<f64>();
                let mut v = vec![C64::new(0.0, 0.0); dim];
                for (c, col) in cols.iter().enumerate() {
                    for &(i, w) in col {
                        v[i] += u[c] * w;
                    }
                }
                vals.push(rq);
                vecs.push(v);
            }
            (nu_k, vals, vecs)
        })
        .collect();

    let mut states: Vec<(f64, i64, Vec<C64>)> = sectors
        .into_iter()
        .flat_map(|(k, vals, vecs)| vals.into_iter().zip(vecs).map(move |(e, v)| (e, k, v)))
        .collect();
    states.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let offsets = states.iter().map(|s| s.0).collect();
    let k_index = states.iter().map(|s| Some(s.1)).collect();
    let vectors = states.into_iter().map(|s| s.2).collect();
    finish(h, offsets, vectors, k_index)
}

/// A_K(n) = (1/√N)·Σ_{q1} A(q1, K − q1)·e^{i q1 a n} with ordered-pair
/// amplitudes (c/√2 off the diagonal, c on it).
pub fn relative_photon_amplitude(basis: &TwoExcitationBasis, grid: &KGrid, v: &[C64], nu_k: i64) -> Vec<C64> {
    let n = basis.n;
    let ordered: Vec<C64> = (0..n)
        .map(|i1| {
            let i2 = grid.index_of(nu_k - grid.nu(i1));
            let c = v[pp_lookup(basis, i1, i2)];
            if i1 == i2 {
                c
            } else {
                c / SQRT_2
            }
        })
        .collect();
    to_real_space(&ordered)
}

/// K = 0 amplitudes of one oracle state on the k grid.
#[derive(Clone, Debug)]
pub struct OracleAmplitudes {
    pub a_k: Vec<C64>,
    pub b_k: Vec<C64>,
    pub c_k: Vec<C64>,
}

/// Maps a K = 0 eigenvector onto (A(k), B(k), C(k)), phased so that the
/// largest of A(0), or else the largest component, is real and positive.
pub fn extract_amplitudes(h: &OracleHamiltonian, result: &OracleResult, state: usize) -> Result<OracleAmplitudes> {
    if result.k_index.get(state).copied().flatten() != Some(0) {
        return Err(Error::Numerical(format!("state {state} is not a resolved K = 0 state")));
    }
    let basis = &h.basis;
    let grid = &h.grid;
    let n = basis.n;
    let v = &result.vectors[state];
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let a_k: Vec<C64> = (0..n)
        .map(|i| {
            let j = grid.partner(i);
            let c = v[pp_lookup(basis, i, j)];
            if i == j {
                c
            } else {
                c / SQRT_2
            }
        })
        .collect();
    let b_k: Vec<C64> = (0..n)
        .map(|q| {
            (0..n)
                .map(|s| C64::from_polar(1.0, grid.values[q] * h.params.a * s as f64) * v[basis.pe_index(q, s)])
                .sum::<C64>()
                * inv_sqrt_n
        })
        .collect();
    let seps = crate::exact2p::separations(n);
    let c_n: Vec<C64> = seps
        .iter()
        .map(|&sep| {
            if sep == 0 {
                return C64::new(0.0, 0.0);
            }
            let sum: C64 = (0..n)
                .map(|s| v[basis.ee_index(s, (s as i64 + sep).rem_euclid(n as i64) as usize)])
                .sum();
            sum / (2.0 * n as f64).sqrt()
        })
        .collect();
    let c_k: Vec<C64> = (0..n)
        .map(|i| {
            seps.iter()
                .zip(&c_n)
                .map(|(&sep, &c)| {
                    let ph = 2.0 * PI * ((grid.nu(i) * sep).rem_euclid(n as i64)) as f64 / n as f64;
                    c * C64::from_polar(1.0, -ph)
                })
                .sum::<C64>()
                * inv_sqrt_n
        })
        .collect();

    let zero = grid.zero_index();
    let all = a_k.iter().chain(&b_k).chain(&c_k);
    let reference = if a_k[zero].norm() > 1e-6 {
        a_k[zero]
    } else {
        *all.max_by(|x, y| x.norm().total_cmp(&y.norm())).expect("non-empty")
    };
    let fix = if reference.norm() > 0.0 { reference.conj() / reference.norm() } else { C64::new(1.0, 0.0) };
    let rot = |v: Vec<C64>| v.into_iter().map(|z| z * fix).collect();
    Ok(OracleAmplitudes { a_k: rot(a_k), b_k: rot(b_k), c_k: rot(c_k) })
}

/// Aligns `oracle` to `reference` by their overlap phase and returns the
/// largest componentwise deviation.
pub fn amplitude_deviation(oracle: &OracleAmplitudes, a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let pairs = oracle
        .a_k
        .iter()
        .zip(a)
        .chain(oracle.b_k.iter().zip(b))
        .chain(oracle.c_k.iter().zip(c));
    let overlap: C64 = pairs.clone().map(|(z, &r)| z.conj() * r).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    pairs.map(|(z, &r)| (z * phase - r).norm()).fold(0.0, f64::max)
}

/// One row of the K = 0 comparison with the exact solver.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub position: usize,
    pub exact_offset: f64,
    pub oracle_offset: f64,
    pub relative_error: f64,
    pub amplitude_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub n: usize,
    pub exact_count: usize,
    pub oracle_count: usize,
    pub max_relative_error: f64,
    pub max_amplitude_error: f64,
    pub unresolved_labels: usize,
    pub rows: Vec<ComparisonRow>,
}

/// Relative error in offset coordinates, floored at G.
pub fn relative_energy_error(x: f64, y: f64, big_g: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(big_g)
}

/// Matches the exact K = 0 spectrum (roots and antisymmetric levels) to the
/// oracle K = 0 sector, in energy order.
pub fn compare_k0(h: &OracleHamiltonian, result: &OracleResult, exact: &SpectrumK0) -> ComparisonReport {
    let g = h.params.big_g;
    let oracle_idx = result.sector(0);
    let mut exact_levels: Vec<(f64, Option<usize>)> = exact
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.offset, Some(i)))
        .chain(exact.antisym_levels.iter().map(|l| (l.offset, None)))
        .collect();
    exact_levels.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut rows = Vec::new();
    let mut max_rel = 0.0_f64;
    let mut max_amp = 0.0_f64;
    for (pos, (&(x, state), &oi)) in exact_levels.iter().zip(&oracle_idx).enumerate() {
        let y = result.offsets[oi];
        let rel = relative_energy_error(x, y, g);
        max_rel = max_rel.max(rel);
        let amp = state.and_then(|si| {
            let st = &exact.states[si];
            extract_amplitudes(h, result, oi)
                .ok()
                .map(|oa| amplitude_deviation(&oa, &st.a_k, &st.b_k, &st.c_k))
        });
        if let Some(a) = amp {
            max_amp = max_amp.max(a);
        }
        rows.push(ComparisonRow { position: pos + 1, exact_offset: x, oracle_offset: y, relative_error: rel, amplitude_error: amp });
    }
    if exact_levels.len() != oracle_idx.len() {
        max_rel = f64::INFINITY;
    }
    ComparisonReport {
        n: h.params.n,
        exact_count: exact_levels.len(),
        oracle_count: oracle_idx.len(),
        max_relative_error: max_rel,
        max_amplitude_error: max_amp,
        unresolved_labels: result.unresolved().len(),
        rows,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeritPoint {
    pub nu_k: i64,
    pub k: f64,
    pub offset: f64,
    pub delta_a: f64,
    /// Energy order is ambiguous: a neighbour sits within 1e−6·G.
    pub ambiguous: bool,
}

/// ΔA versus total momentum for the `rank`-th lowest state of each K sector
/// (rank 1 = bottom of the LL band).
pub fn merit_vs_k(result: &OracleResult, rank: usize) -> Vec<MeritPoint> {
    let n = result.n as i64;
    let g = result.params.big_g;
    let mut out = Vec::new();
    for nu_k in (-n / 2 + 1)..=(n / 2) {
        let sector = result.sector(nu_k);
        let Some(&idx) = sector.get(rank.saturating_sub(1)) else { continue };
        let pos = rank - 1;
        let e = result.offsets[idx];
        let near = |j: usize| sector.get(j).is_some_and(|&o| (result.offsets[o] - e).abs() < 1e-6 * g);
        let ambiguous = (pos > 0 && near(pos - 1)) || near(pos + 1);
        out.push(MeritPoint { nu_k, k: result.k_value(nu_k), offset: e, delta_a: result.delta_a[idx], ambiguous });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bare_exciton::bare_oracle;
    use crate::exact2p::solve_spectrum;
    use crate::params::{derive_params, PhysicalConfig};

    fn small(n: usize, g_hz: f64, delta_hz: f64, t_hz: f64) -> ModelParams {
        derive_params(
            &PhysicalConfig::rb_d2()
                .with_n(n)
                .with_coupling_hz(g_hz)
                .with_detuning_hz(delta_hz)
                .with_hopping_hz(t_hz),
        )
        .unwrap()
    }

    #[test]
    fn basis_counts() {
        let b = TwoExcitationBasis::new(6);
        assert_eq!(b.photon_pairs.len(), 21);
        assert_eq!(b.exciton_pairs.len(), 15);
        assert_eq!(b.dim(), 72);
        assert!(b.exciton_pairs.iter().all(|&(a, c)| a < c));
    }

    #[test]
    fn uncoupled_spectrum_is_diagonal() {
        let p = small(6, 0.0, 2e9, 0.0);
        let h = build_hamiltonian(&p).unwrap();
        let r = diagonalize(&h);
        let mut expected: Vec<f64> = Vec::new();
        let ph: Vec<f64> = h.grid.values.iter().map(|&k| photon_offset(k, &p)).collect();
        for &(i, j) in &h.basis.photon_pairs {
            expected.push(ph[i] + ph[j]);
        }
        for q in 0..6 {
            for _ in 0..6 {
                expected.push(ph[q]);
            }
        }
        expected.extend(std::iter::repeat_n(0.0, 15));
        expected.sort_by(f64::total_cmp);
        for (x, y) in r.offsets.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-12 * r.h_norm);
        }
    }

    #[test]
    fn exciton_block_matches_bare_oracle() {
        let p = small(6, 0.0, 2e9, 4e7);
        let h = build_hamiltonian(&p).unwrap();
        let r = diagonalize(&h);
        let bare = bare_oracle(6, p.e0, p.t).unwrap();
        // Remove the photon-containing levels, which sit far above.
        let low: Vec<f64> = r.offsets.iter().copied().filter(|x| x.abs() < 1e9).collect();
        assert_eq!(low.len(), bare.offsets.len());
        for (x, y) in low.iter().zip(&bare.offsets) {
            assert!((x - y).abs() < 1e-9 * p.t.abs());
        }
    }

    #[test]
    fn symmetry_trace_and_labels() {
        let p = small(8, 3e9, -1e9, 3e7);
        let h = build_hamiltonian(&p).unwrap();
        let norm = h.max_norm();
        assert!(h.hermiticity_residual() <= 1e-12 * norm);
        assert!(h.translation_commutator() < 1e-12 * norm);
        let r = diagonalize(&h);
        let sum: f64 = r.offsets.iter().sum();
        assert!((sum - h.trace()).abs() < 1e-10 * h.trace().abs().max(norm));
        assert!(r.unresolved().is_empty());
        let total: usize = (-3..=4).map(|k| r.sector(k).len()).sum();
        assert_eq!(total, 2 * 8 * 8);
        assert_eq!(r.sector(0).len(), 2 * 8 + 1);
        for (e, v) in r.offsets.iter().zip(&r.vectors).step_by(7) {
            let hv = h.apply(v);
            let res: f64 = hv.iter().zip(v).map(|(a, b)| (a - b * e).norm_sqr()).sum::<f64>().sqrt();
            assert!(res < 1e-9 * norm);
        }
        for i in (0..r.vectors.len()).step_by(11) {
            for j in (0..r.vectors.len()).step_by(13) {
                let dot: C64 = r.vectors[i].iter().zip(&r.vectors[j]).map(|(a, b)| a.conj() * b).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn k0_sector_matches_exact_solver() {
        let p = small(8, 4e9, 1.5e9, 0.0);
        let h = build_hamiltonian(&p).unwrap();
        let r = diagonalize(&h);
        let exact = solve_spectrum(&p).unwrap();
        let report = compare_k0(&h, &r, &exact);
        assert_eq!(report.exact_count, report.oracle_count);
        assert!(report.max_relative_error < 1e-9, "{}", report.max_relative_error);
        assert!(report.max_amplitude_error < 1e-7, "{}", report.max_amplitude_error);
        // No two-exciton component on a doubly occupied atom: the basis
        // simply has no such entries.
        assert!(h.basis.exciton_pairs.iter().all(|&(a, b)| a != b));
    }

    #[test]
    fn merit_is_parity_symmetric() {
        let p = small(8, 5e9, 0.0, 0.0);
        let r = diagonalize(&build_hamiltonian(&p).unwrap());
        let pts = merit_vs_k(&r, 2);
        for pt in &pts {
            if pt.nu_k.abs() < 4 {
                let mirror = pts.iter().find(|q| q.nu_k == -pt.nu_k).unwrap();
                assert!((pt.delta_a - mirror.delta_a).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn sector_solve_matches_dense_solve() {
        let p = small(6, 4e9, -2e9, 5e7);
        let h = build_hamiltonian(&p).unwrap();
        let blocked = diagonalize(&h);
        let dense = diagonalize_dense(&h);
        assert!(dense.unresolved().is_empty());
        for (x, y) in blocked.offsets.iter().zip(&dense.offsets) {
            assert!((x - y).abs() < 1e-12 * blocked.h_norm);
        }
        for k in -2..=3 {
            assert_eq!(blocked.sector(k).len(), dense.sector(k).len());
        }
    }

    #[test]
    fn rejects_oversized_problems() {
        let p = small(66, 1e9, 0.0, 0.0);
        assert!(matches!(build_hamiltonian(&p), Err(Error::DimensionTooLarge { .. })));
    }
}
