//! Exact K = 0 two-polariton eigenproblem.
//!
//! For a trial energy x = E − 2E0 the three amplitudes at each k follow from
//! the non-interacting 3×3 block H0(k) and a single constant S enforced by
//! the hard core:
//!
//! ```text
//! A(k) = 2G²·S/Δ,  B(k) = √2·G·(x − 2E_p)·S/Δ,  C(k) = φ·S/Δ
//! ```
//!
//! and Σ_k C(k) = 0 selects the eigenvalues. The secular function
//! F(x) = Σ_k φ/Δ is a sum of simple poles with positive residues, so it
//! decreases monotonically between consecutive poles and has exactly one
//! root in each such interval.
//!
//! Roots close to a pole cannot be represented as a plain offset, so energies
//! are carried as a pole `anchor` plus a small `dx`.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::dispersion::{
    band_edges, exciton_offset, photon_offset, polariton_offsets_from, BandEdges, KGrid,
};
use crate::numeric::compensated_sum;
use crate::params::ModelParams;
use crate::wavepacket;
use crate::{Error, Result, C64};

const MAX_BISECTIONS: usize = 200;
const BISECTION_RTOL: f64 = 1e-13;
/// Distance (in units of G) below which a root counts as sitting on a band edge.
const EDGE_TOL: f64 = 1e-9;

/// An energy x = anchor + dx relative to 2E0, with `anchor` a pole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalEnergy {
    pub anchor: f64,
    pub dx: f64,
}

impl LocalEnergy {
    pub fn plain(x: f64) -> Self {
        Self { anchor: x, dx: 0.0 }
    }

    pub fn offset(&self) -> f64 {
        self.anchor + self.dx
    }

    /// (x − level), computed without losing `dx`.
    pub fn minus(&self, level: f64) -> f64 {
        (self.anchor - level) + self.dx
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Band {
    BelowBand,
    LL,
    Gap,
    LU,
    UU,
}

impl Band {
    pub fn label(self) -> &'static str {
        match self {
            Band::BelowBand => "below-band",
            Band::LL => "LL",
            Band::Gap => "gap",
            Band::LU => "LU",
            Band::UU => "UU",
        }
    }
}

/// One K = 0 eigenstate. Momentum amplitudes are on the full [`KGrid`];
/// real-space ones on n ∈ (−N/2, N/2] with n = 0 at [`zero_index`].
#[derive(Clone, Debug, Serialize)]
pub struct TwoPolaritonState {
    /// 1-based position in the whole symmetric spectrum.
    pub index: usize,
    /// 1-based position within its band.
    pub rho: usize,
    /// Absolute energy (rad/s).
    pub energy: f64,
    /// E − 2E0 (rad/s).
    pub offset: f64,
    #[serde(skip)]
    pub local: LocalEnergy,
    pub a_k: Vec<f64>,
    pub b_k: Vec<f64>,
    pub c_k: Vec<f64>,
    pub a_n: Vec<f64>,
    pub b_n: Vec<f64>,
    pub c_n: Vec<f64>,
    pub k_eff: Option<f64>,
    pub band: Band,
    pub delta_a: f64,
}

/// A K = 0 antisymmetric photon-exciton level, E_p(k) + E_e(k).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AntisymLevel {
    pub nu: i64,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SolverIssue {
    /// No sign change of F inside a pole interval.
    NoSignChange { lower: f64, upper: f64 },
    AmplitudeFailure { offset: f64, message: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumK0 {
    pub params: ModelParams,
    pub edges: BandEdges,
    pub states: Vec<TwoPolaritonState>,
    pub antisym_levels: Vec<AntisymLevel>,
    pub issues: Vec<SolverIssue>,
}

impl SpectrumK0 {
    pub fn band(&self, band: Band) -> impl Iterator<Item = &TwoPolaritonState> {
        self.states.iter().filter(move |s| s.band == band)
    }

    pub fn state(&self, band: Band, rho: usize) -> Option<&TwoPolaritonState> {
        self.band(band).find(|s| s.rho == rho)
    }

    /// All K = 0 energies relative to 2E0, ascending.
    pub fn all_offsets(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .states
            .iter()
            .map(|s| s.offset)
            .chain(self.antisym_levels.iter().map(|l| l.offset))
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Per-k data of the K = 0 problem, all relative to E0 or 2E0.
#[derive(Clone, Debug)]
pub(crate) struct K0Problem {
    pub grid: KGrid,
    pub ph: Vec<f64>,
    pub ex: Vec<f64>,
    pub lo: Vec<f64>,
    pub up: Vec<f64>,
    /// (photon, exciton) content of the lower and upper polariton.
    pub vec_lo: Vec<(f64, f64)>,
    pub vec_up: Vec<(f64, f64)>,
    pub big_g: f64,
}

/// Normalized eigenvector of [[ph, G], [G, ex]] for eigenvalue `lambda`,
/// picking the better conditioned of the two row-derived forms.
fn polariton_vector(lambda: f64, ph: f64, ex: f64, big_g: f64) -> (f64, f64) {
    let first = (big_g, lambda - ph);
    let second = (lambda - ex, big_g);
    let pick = if first.0.hypot(first.1) >= second.0.hypot(second.1) { first } else { second };
    let norm = pick.0.hypot(pick.1);
    if norm == 0.0 {
        return (1.0, 0.0);
    }
    (pick.0 / norm, pick.1 / norm)
}

impl K0Problem {
    pub fn new(p: &ModelParams) -> Self {
        let grid = KGrid::for_params(p);
        let ph: Vec<f64> = grid.values.iter().map(|&k| photon_offset(k, p)).collect();
        let ex: Vec<f64> = grid.values.iter().map(|&k| exciton_offset(k, p)).collect();
        let (lo, up): (Vec<f64>, Vec<f64>) = ph
            .iter()
            .zip(&ex)
            .map(|(&a, &b)| polariton_offsets_from(a, b, p.big_g))
            .unzip();
        let vec_lo = (0..grid.n).map(|i| polariton_vector(lo[i], ph[i], ex[i], p.big_g)).collect();
        let vec_up = (0..grid.n).map(|i| polariton_vector(up[i], ph[i], ex[i], p.big_g)).collect();
        Self { grid, ph, ex, lo, up, vec_lo, vec_up, big_g: p.big_g }
    }

    fn n(&self) -> usize {
        self.grid.n
    }

    /// The three pole energies at grid index i, ascending.
    pub fn poles_at(&self, i: usize) -> [f64; 3] {
        let (l, u) = (self.lo[i], self.up[i]);
        [2.0 * l, l + u, 2.0 * u]
    }

    pub fn distinct_poles(&self) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.n()).flat_map(|i| self.poles_at(i)).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Column (A, B, C) of (x − H0(k))⁻¹ acting on the exciton-pair unit
    /// vector, expanded over the LL, LU and UU eigenvectors of H0(k).
    fn resolvent_column(&self, i: usize, x: LocalEnergy) -> (f64, f64, f64) {
        let (cl, sl) = self.vec_lo[i];
        let (cu, su) = self.vec_up[i];
        let [p1, p2, p3] = self.poles_at(i);
        let (d1, d2, d3) = (x.minus(p1), x.minus(p2), x.minus(p3));
        // Components (photon pair, photon-exciton, exciton pair) of each
        // symmetrized two-polariton state.
        let ll = (cl * cl, SQRT_2 * cl * sl, sl * sl);
        let lu = (SQRT_2 * cl * cu, cl * su + sl * cu, SQRT_2 * sl * su);
        let uu = (cu * cu, SQRT_2 * cu * su, su * su);
        let mut out = (0.0, 0.0, 0.0);
        for (v, d) in [(ll, d1), (lu, d2), (uu, d3)] {
            let w = v.2 / d;
            out.0 += v.0 * w;
            out.1 += v.1 * w;
            out.2 += v.2 * w;
        }
        out
    }

    /// F(x) = Σ_k φ/Δ, written as a sum of poles with non-negative residues.
    pub fn secular(&self, x: LocalEnergy) -> f64 {
        compensated_sum((0..self.n()).flat_map(|i| {
            let (sl, su) = (self.vec_lo[i].1, self.vec_up[i].1);
            let [p1, p2, p3] = self.poles_at(i);
            [
                sl.powi(4) / x.minus(p1),
                2.0 * sl * sl * su * su / x.minus(p2),
                su.powi(4) / x.minus(p3),
            ]
        }))
    }

    /// Unnormalized (A, B, C) with S = 1.
    fn raw_amplitudes(&self, x: LocalEnergy) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.n();
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            let (ai, bi, ci) = self.resolvent_column(i, x);
            a.push(ai);
            b.push(bi);
            c.push(ci);
        }
        (a, b, c)
    }

    pub fn amplitudes(&self, x: LocalEnergy) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let (mut a, mut b, mut c) = self.raw_amplitudes(x);
        let scale = a
            .iter()
            .chain(&b)
            .chain(&c)
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::NearPole { offset: x.offset(), pole: x.anchor, distance: x.dx.abs() });
        }
        for v in a.iter_mut().chain(b.iter_mut()).chain(c.iter_mut()) {
            *v /= scale;
        }
        let sum_c = compensated_sum(c.iter().copied());
        let abs_c: f64 = c.iter().map(|v| v.abs()).sum();
        let violation = if abs_c > 0.0 { sum_c.abs() / abs_c } else { 0.0 };
        if violation > 1e-6 {
            return Err(Error::NotARoot { offset: x.offset(), violation });
        }
        let norm = compensated_sum(a.iter().chain(&b).chain(&c).map(|v| v * v)).sqrt();
        let zero = self.grid.zero_index();
        let sign = if a[zero].abs() > 1e-12 {
            a[zero].signum()
        } else {
            a.iter()
                .chain(&b)
                .chain(&c)
                .find(|v| v.abs() > 1e-8)
                .map_or(1.0, |v| v.signum())
        };
        let f = sign / norm;
        for v in a.iter_mut().chain(b.iter_mut()).chain(c.iter_mut()) {
            *v *= f;
        }
        Ok((a, b, c))
    }

    /// Root of F between consecutive poles `left < right`.
    fn bracket_root(&self, left: f64, right: f64) -> std::result::Result<LocalEnergy, SolverIssue> {
        let half = 0.5 * (right - left);
        let mid = self.secular(LocalEnergy { anchor: left, dx: half });
        if mid == 0.0 {
            return Ok(LocalEnergy { anchor: left, dx: half });
        }
        // F falls from +inf to -inf across the interval, so the sign at the
        // midpoint tells which pole the root is closer to.
        let (anchor, mut lo, mut hi) = if mid > 0.0 { (right, -half, 0.0) } else { (left, 0.0, half) };
        let f_at = |dx: f64| self.secular(LocalEnergy { anchor, dx });
        let mut pole_side_moved = false;
        for _ in 0..MAX_BISECTIONS {
            let m = 0.5 * (lo + hi);
            if m == lo || m == hi {
                break;
            }
            if f_at(m) > 0.0 {
                lo = m;
                pole_side_moved |= mid < 0.0;
            } else {
                hi = m;
                pole_side_moved |= mid > 0.0;
            }
            if pole_side_moved && (hi - lo) <= BISECTION_RTOL * lo.abs().max(hi.abs()) {
                break;
            }
        }
        if !pole_side_moved {
            return Err(SolverIssue::NoSignChange { lower: left, upper: right });
        }
        Ok(LocalEnergy { anchor, dx: 0.5 * (lo + hi) })
    }
}

/// F(E) = Σ_ν φ/Δ at absolute energy `e` (rad/s).
pub fn secular_value(e: f64, p: &ModelParams) -> Result<f64> {
    let prob = K0Problem::new(p);
    let x = e - 2.0 * p.e0;
    let nearest = prob
        .distinct_poles()
        .into_iter()
        .min_by(|a, b| (x - a).abs().total_cmp(&(x - b).abs()))
        .unwrap_or(x);
    let dist = (x - nearest).abs();
    if dist < 1e-6 * p.big_g {
        return Err(Error::NearPole { offset: x, pole: nearest, distance: dist });
    }
    Ok(prob.secular(LocalEnergy::plain(x)))
}

/// Amplitudes (A, B, C) on the k grid for a root at absolute energy `e`.
pub fn amplitudes(e: f64, p: &ModelParams) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    amplitudes_offset(e - 2.0 * p.e0, p)
}

/// As [`amplitudes`] with `x = E − 2E0`.
pub fn amplitudes_offset(x: f64, p: &ModelParams) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let prob = K0Problem::new(p);
    let anchor = prob
        .distinct_poles()
        .into_iter()
        .min_by(|a, b| (x - a).abs().total_cmp(&(x - b).abs()))
        .unwrap_or(x);
    prob.amplitudes(LocalEnergy { anchor, dx: x - anchor })
}

/// Index of n = 0 in real-space vectors of length `n_sites`.
pub fn zero_index(n_sites: usize) -> usize {
    n_sites / 2 - 1
}

/// Relative separations (−N/2, N/2] in storage order.
pub fn separations(n_sites: usize) -> Vec<i64> {
    let h = n_sites as i64 / 2;
    (-h + 1..=h).collect()
}

/// X(n) = (1/√N)·Σ_ν X(k_ν)·e^{i k_ν a n}.
pub fn to_real_space(xk: &[C64]) -> Vec<C64> {
    let n = xk.len();
    let h = n as i64 / 2;
    let norm = 1.0 / (n as f64).sqrt();
    separations(n)
        .into_iter()
        .map(|sep| {
            let mut acc = C64::new(0.0, 0.0);
            for (i, &x) in xk.iter().enumerate() {
                let nu = i as i64 - h + 1;
                let phase = 2.0 * std::f64::consts::PI * ((nu * sep).rem_euclid(n as i64)) as f64 / n as f64;
                acc += x * C64::from_polar(1.0, phase);
            }
            acc * norm
        })
        .collect()
}

/// Real part of [`to_real_space`] for k-even real input.
pub fn to_real_space_even(xk: &[f64]) -> Vec<f64> {
    let v: Vec<C64> = xk.iter().map(|&x| C64::new(x, 0.0)).collect();
    to_real_space(&v).into_iter().map(|z| z.re).collect()
}

/// Effective wave vector of the ρ-th LL state, 1 ≤ ρ ≤ N/2.
pub fn k_eff(rho: usize, n: usize, a: f64) -> Result<f64> {
    let h = n / 2;
    if rho == 0 || rho > h || h < 2 {
        return Err(Error::IndexOutOfRange { what: "rho", index: rho, max: h });
    }
    let hf = h as f64;
    let rho_star = (rho - 1) as f64 * (hf - 0.5) / (hf - 1.0);
    Ok(2.0 * std::f64::consts::PI * rho_star / (n as f64 * a))
}

/// ΔA = max(0, (|A(0)| − ⟨|A|⟩)/⟨|A|⟩) with n = 0 at [`zero_index`].
pub fn bunching_merit(a_n: &[f64]) -> f64 {
    let n = a_n.len();
    if n == 0 {
        return 0.0;
    }
    let mean = a_n.iter().map(|v| v.abs()).sum::<f64>() / n as f64;
    if mean == 0.0 {
        return 0.0;
    }
    ((a_n[zero_index(n)].abs() - mean) / mean).max(0.0)
}

/// As [`bunching_merit`] for complex amplitudes.
pub fn bunching_merit_complex(a_n: &[C64]) -> f64 {
    let mags: Vec<f64> = a_n.iter().map(|z| z.norm()).collect();
    bunching_merit(&mags)
}

/// ΔA divided by the photonic weight of the lower polariton, guarded below 1e−12.
pub fn scale_merit(delta_a: f64, x_alpha: f64) -> f64 {
    delta_a / x_alpha.max(1e-12)
}

/// ΔA_ρ / X^(L,α)(k_eff(ρ)) for an LL state.
pub fn scaled_merit(state: &TwoPolaritonState, p: &ModelParams) -> Result<f64> {
    let k = match (state.band, state.k_eff) {
        (Band::LL, Some(k)) => k,
        _ => {
            return Err(Error::IndexOutOfRange { what: "LL rho", index: state.rho, max: p.n / 2 });
        }
    };
    let (lower, _) = wavepacket::mixing(k, p);
    Ok(scale_merit(state.delta_a, lower.x_alpha))
}

/// Relative residual of the three coupled K = 0 equations.
pub fn equation_residual(x: LocalEnergy, a: &[f64], b: &[f64], c: &[f64], p: &ModelParams) -> f64 {
    let prob = K0Problem::new(p);
    let n = prob.n();
    let g = p.big_g;
    let rt2g = SQRT_2 * g;
    let cos_sum = compensated_sum(
        (0..n).map(|i| (p.a * prob.grid.values[i]).cos() * c[i]),
    );
    let s = -(rt2g * compensated_sum(b.iter().copied()) + 4.0 * p.t * cos_sum) / n as f64;
    let mut res2 = 0.0;
    let mut scale = g.max(x.offset().abs());
    for i in 0..n {
        let (ph, ex) = (prob.ph[i], prob.ex[i]);
        scale = scale.max(2.0 * ph.abs()).max(2.0 * ex.abs());
        let ra = x.minus(2.0 * ph) * a[i] - rt2g * b[i];
        let rb = x.minus(ph + ex) * b[i] - rt2g * (a[i] + c[i]);
        let rc = x.minus(2.0 * ex) * c[i] - rt2g * b[i] - s;
        res2 += ra * ra + rb * rb + rc * rc;
    }
    let norm2: f64 = a.iter().chain(b).chain(c).map(|v| v * v).sum();
    res2.sqrt() / (scale * norm2.sqrt())
}

pub fn state_residual(state: &TwoPolaritonState, p: &ModelParams) -> f64 {
    equation_residual(state.local, &state.a_k, &state.b_k, &state.c_k, p)
}

/// Band whose edge is closer in units of its own level spacing.
fn nearer(d_low: f64, s_low: f64, d_high: f64, s_high: f64, low: Band, high: Band) -> Band {
    let tiny = f64::MIN_POSITIVE;
    if d_low / s_low.max(tiny) <= d_high / s_high.max(tiny) {
        low
    } else {
        high
    }
}

struct BandLayout {
    edges: BandEdges,
    ll_spacing: f64,
    lu_spacing: f64,
    lu_top_spacing: f64,
    uu_spacing: f64,
    tol: f64,
}

impl BandLayout {
    fn new(prob: &K0Problem, edges: BandEdges) -> Self {
        let branch = |f: &dyn Fn(usize) -> f64| {
            let mut v: Vec<f64> = (0..prob.n()).map(f).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let ll = branch(&|i| 2.0 * prob.lo[i]);
        let lu = branch(&|i| prob.lo[i] + prob.up[i]);
        let uu = branch(&|i| 2.0 * prob.up[i]);
        let bottom_gap = |v: &[f64]| if v.len() > 1 { v[1] - v[0] } else { 0.0 };
        let top_gap = |v: &[f64]| if v.len() > 1 { v[v.len() - 1] - v[v.len() - 2] } else { 0.0 };
        Self {
            edges,
            ll_spacing: top_gap(&ll),
            lu_spacing: bottom_gap(&lu),
            lu_top_spacing: top_gap(&lu),
            uu_spacing: bottom_gap(&uu),
            tol: EDGE_TOL * prob.big_g,
        }
    }

    fn classify(&self, x: f64) -> Band {
        let e = &self.edges;
        if x < e.ll_bottom {
            return Band::BelowBand;
        }
        if x <= e.ll_top + self.tol {
            return Band::LL;
        }
        if x < e.lu_bottom - self.tol {
            let height = x - e.ll_top;
            let depth = e.lu_bottom - x;
            if height > self.ll_spacing && depth > self.lu_spacing {
                return Band::Gap;
            }
            return nearer(height, self.ll_spacing, depth, self.lu_spacing, Band::LL, Band::LU);
        }
        if x <= e.lu_top + self.tol {
            return Band::LU;
        }
        if x < e.uu_bottom - self.tol {
            let height = x - e.lu_top;
            let depth = e.uu_bottom - x;
            return nearer(height, self.lu_top_spacing, depth, self.uu_spacing, Band::LU, Band::UU);
        }
        Band::UU
    }
}

/// All symmetric K = 0 eigenstates plus the decoupled antisymmetric levels.
pub fn solve_spectrum(p: &ModelParams) -> Result<SpectrumK0> {
    if !(p.big_g > 0.0) {
        return Err(Error::InvalidConfig("solve_spectrum needs G > 0".into()));
    }
    let prob = K0Problem::new(p);
    let poles = prob.distinct_poles();
    let mut issues = Vec::new();
    let mut roots = Vec::new();
    for w in poles.windows(2) {
        match prob.bracket_root(w[0], w[1]) {
            Ok(x) => roots.push(x),
            Err(issue) => issues.push(issue),
        }
    }

    let edges = band_edges(p);
    let layout = BandLayout::new(&prob, edges);
    let mut states = Vec::with_capacity(roots.len());
    let mut counters = std::collections::HashMap::new();
    for x in roots {
        let (a_k, b_k, c_k) = match prob.amplitudes(x) {
            Ok(v) => v,
            Err(e) => {
                issues.push(SolverIssue::AmplitudeFailure { offset: x.offset(), message: e.to_string() });
                continue;
            }
        };
        let band = layout.classify(x.offset());
        let rho = {
            let c = counters.entry(band.label()).or_insert(0usize);
            *c += 1;
            *c
        };
        let k_eff = (band == Band::LL && rho <= p.n / 2).then(|| k_eff(rho, p.n, p.a).ok()).flatten();
        let a_n = to_real_space_even(&a_k);
        let delta_a = bunching_merit(&a_n);
        states.push(TwoPolaritonState {
            index: states.len() + 1,
            rho,
            energy: 2.0 * p.e0 + x.offset(),
            offset: x.offset(),
            local: x,
            b_n: to_real_space_even(&b_k),
            c_n: to_real_space_even(&c_k),
            a_n,
            a_k,
            b_k,
            c_k,
            k_eff,
            band,
            delta_a,
        });
    }

    let antisym_levels = (1..(p.n as i64 / 2))
        .map(|nu| {
            let i = prob.grid.index_of(nu);
            AntisymLevel { nu, offset: prob.ph[i] + prob.ex[i] }
        })
        .collect();

    Ok(SpectrumK0 { params: p.clone(), edges, states, antisym_levels, issues })
}

/// Bound two-polariton states inside the LL–LU gap.
pub fn gap_states(p: &ModelParams) -> Result<Vec<TwoPolaritonState>> {
    if band_edges(p).gap <= 0.0 {
        return Ok(Vec::new());
    }
    Ok(solve_spectrum(p)?.states.into_iter().filter(|s| s.band == Band::Gap).collect())
}
