//! Parameter sweeps: ΔA versus energy across lattice constants and
//! detunings, and the evolution of the LL–LU gap state with a.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{band_edges, exciton_offset, photon_offset, KGrid};
use crate::exact2p::{solve_spectrum, Band};
use crate::params::{derive_params, hz_to_rad, rad_to_hz, ModelParams, PhysicalConfig};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    LatticeConstant,
    Detuning,
    Both,
}

/// Sweep over lattice constants (m), detunings (Hz), or their product
/// (lattice constant outermost). An empty list keeps the base value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: PhysicalConfig,
    #[serde(default)]
    pub lattice_constants: Vec<f64>,
    #[serde(default)]
    pub detunings_hz: Vec<f64>,
}

impl SweepSpec {
    pub fn over_lattice_constant(base: PhysicalConfig, values: Vec<f64>) -> Self {
        Self { base, lattice_constants: values, detunings_hz: Vec::new() }
    }

    pub fn over_detuning(base: PhysicalConfig, values_hz: Vec<f64>) -> Self {
        Self { base, lattice_constants: Vec::new(), detunings_hz: values_hz }
    }

    /// Detunings given as multiples of the base configuration's G.
    pub fn over_detuning_in_g(base: PhysicalConfig, factors: &[f64]) -> Result<Self> {
        let g_hz = rad_to_hz(derive_params(&base)?.big_g);
        Ok(Self::over_detuning(base, factors.iter().map(|f| f * g_hz).collect()))
    }

    pub fn axis(&self) -> Result<SweepAxis> {
        match (self.lattice_constants.is_empty(), self.detunings_hz.is_empty()) {
            (false, true) => Ok(SweepAxis::LatticeConstant),
            (true, false) => Ok(SweepAxis::Detuning),
            (false, false) => Ok(SweepAxis::Both),
            (true, true) => Err(Error::InvalidConfig("sweep needs at least one value list".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.axis()?;
        for (name, list) in [("lattice_constants", &self.lattice_constants), ("detunings_hz", &self.detunings_hz)] {
            if list.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name}: non-finite value")));
            }
            if list.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidConfig(format!("{name}: values must be strictly increasing")));
            }
        }
        for cfg in self.configs() {
            cfg.validate()?;
        }
        Ok(())
    }

    /// One configuration per sweep point, in output order.
    pub fn configs(&self) -> Vec<PhysicalConfig> {
        let a_values: Vec<Option<f64>> = if self.lattice_constants.is_empty() {
            vec![None]
        } else {
            self.lattice_constants.iter().copied().map(Some).collect()
        };
        let d_values: Vec<Option<f64>> = if self.detunings_hz.is_empty() {
            vec![None]
        } else {
            self.detunings_hz.iter().copied().map(Some).collect()
        };
        let mut out = Vec::with_capacity(a_values.len() * d_values.len());
        for a in &a_values {
            for d in &d_values {
                let mut cfg = self.base.clone();
                if let Some(a) = a {
                    cfg = cfg.with_lattice_constant(*a);
                }
                if let Some(d) = d {
                    cfg = cfg.with_detuning_hz(*d);
                }
                out.push(cfg);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeritRow {
    pub a_m: f64,
    pub detuning_hz: f64,
    pub rho: usize,
    pub band: String,
    #[serde(rename = "E_hz")]
    pub energy_hz: f64,
    #[serde(rename = "E_minus_2E0_hz")]
    pub offset_hz: f64,
    #[serde(rename = "deltaA")]
    pub delta_a: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub a_m: f64,
    pub detuning_hz: f64,
    pub rows: Vec<MeritRow>,
    /// Solver diagnostics for this point; the sweep continues regardless.
    pub issues: Vec<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeritSweep {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

impl MeritSweep {
    pub fn rows(&self) -> Vec<MeritRow> {
        self.points.iter().flat_map(|p| p.rows.iter().cloned()).collect()
    }
}

/// Uncoupled K = 0 symmetric levels: photon pairs, photon + exciton, exciton
/// pairs, one per k ≥ 0. ΔA vanishes since nothing scatters the photons.
fn uncoupled_rows(p: &ModelParams) -> Vec<MeritRow> {
    let grid = KGrid::for_params(p);
    let mut levels: Vec<f64> = Vec::new();
    for nu in 0..=(p.n as i64 / 2) {
        let k = grid.values[grid.index_of(nu)];
        let (ph, ex) = (photon_offset(k, p), exciton_offset(k, p));
        levels.extend([2.0 * ph, ph + ex, 2.0 * ex]);
    }
    levels.sort_by(f64::total_cmp);
    levels
        .into_iter()
        .enumerate()
        .map(|(i, x)| MeritRow {
            a_m: p.a,
            detuning_hz: rad_to_hz(p.delta),
            rho: i + 1,
            band: "uncoupled".into(),
            energy_hz: rad_to_hz(2.0 * p.e0 + x),
            offset_hz: rad_to_hz(x),
            delta_a: 0.0,
        })
        .collect()
}

fn sweep_point(cfg: &PhysicalConfig) -> SweepPoint {
    let fail = |a: f64, d: f64, e: Error| SweepPoint { a_m: a, detuning_hz: d, rows: Vec::new(), issues: Vec::new(), error: Some(e.to_string()) };
    let d_cfg = cfg.detuning_target.unwrap_or(f64::NAN);
    let p = match derive_params(cfg) {
        Ok(p) => p,
        Err(e) => return fail(cfg.a, d_cfg, e),
    };
    let detuning_hz = rad_to_hz(p.delta);
    if p.big_g == 0.0 {
        return SweepPoint { a_m: p.a, detuning_hz, rows: uncoupled_rows(&p), issues: Vec::new(), error: None };
    }
    match solve_spectrum(&p) {
        Ok(s) => SweepPoint {
            a_m: p.a,
            detuning_hz,
            rows: s
                .states
                .iter()
                .map(|st| MeritRow {
                    a_m: p.a,
                    detuning_hz,
                    rho: st.rho,
                    band: st.band.label().into(),
                    energy_hz: rad_to_hz(st.energy),
                    offset_hz: rad_to_hz(st.offset),
                    delta_a: st.delta_a,
                })
                .collect(),
            issues: s.issues.iter().map(|i| format!("{i:?}")).collect(),
            error: None,
        },
        Err(e) => fail(p.a, detuning_hz, e),
    }
}

/// Solves every sweep point in parallel; rows keep the input point order.
pub fn merit_sweep(spec: &SweepSpec) -> Result<MeritSweep> {
    spec.validate()?;
    let points = spec.configs().par_iter().map(sweep_point).collect();
    Ok(MeritSweep { axis: spec.axis()?, points })
}

/// Rows of one band (by label).
pub fn band_rows(rows: &[MeritRow], band: Band) -> Vec<MeritRow> {
    rows.iter().filter(|r| r.band == band.label()).cloned().collect()
}

/// Largest ΔA among `rows`.
pub fn max_delta_a(rows: &[MeritRow]) -> f64 {
    rows.iter().map(|r| r.delta_a).fold(0.0, f64::max)
}

/// Energy span (Hz) of the states with ΔA > `fraction`·max ΔA; 0 when no
/// state bunches.
pub fn bunching_window_hz(rows: &[MeritRow], fraction: f64) -> f64 {
    let threshold = fraction * max_delta_a(rows);
    let (lo, hi) = rows
        .iter()
        .filter(|r| r.delta_a > threshold && r.delta_a > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.offset_hz), hi.max(r.offset_hz)));
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub a_m: f64,
    /// lu_bottom − ll_top (Hz); negative when the bands overlap.
    pub gap_hz: f64,
    pub gap_states: usize,
    /// Deepest gap state, relative to 2E0 (Hz).
    pub gap_state_offset_hz: Option<f64>,
    /// lu_bottom − E of the deepest gap state (Hz).
    pub penetration_hz: Option<f64>,
    #[serde(rename = "gap_state_deltaA")]
    pub gap_state_delta_a: Option<f64>,
    /// Largest ΔA among LL, LU and UU states.
    #[serde(rename = "continuum_max_deltaA")]
    pub continuum_max_delta_a: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapScan {
    pub rows: Vec<GapRow>,
    /// Smallest scanned a with a gap state.
    pub onset_a_m: Option<f64>,
    /// Whether penetration grows monotonically over the detected points.
    pub penetration_monotonic: bool,
}

fn gap_point(cfg: &PhysicalConfig) -> GapRow {
    let mut row = GapRow {
        a_m: cfg.a,
        gap_hz: f64::NAN,
        gap_states: 0,
        gap_state_offset_hz: None,
        penetration_hz: None,
        gap_state_delta_a: None,
        continuum_max_delta_a: 0.0,
        error: None,
    };
    let result = derive_params(cfg).and_then(|p| {
        let edges = band_edges(&p);
        row.gap_hz = rad_to_hz(edges.lu_bottom - edges.ll_top);
        solve_spectrum(&p).map(|s| (edges, s))
    });
    match result {
        Ok((edges, s)) => {
            let gap: Vec<_> = s.band(Band::Gap).collect();
            row.gap_states = gap.len();
            if let Some(deepest) = gap.iter().min_by(|x, y| x.offset.total_cmp(&y.offset)) {
                row.gap_state_offset_hz = Some(rad_to_hz(deepest.offset));
                row.penetration_hz = Some(rad_to_hz(edges.lu_bottom - deepest.offset));
                row.gap_state_delta_a = Some(deepest.delta_a);
            }
            row.continuum_max_delta_a = s
                .states
                .iter()
                .filter(|st| matches!(st.band, Band::LL | Band::LU | Band::UU))
                .map(|st| st.delta_a)
                .fold(0.0, f64::max);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Scans `steps` evenly spaced lattice constants in [a_min, a_max].
pub fn gap_scan(a_min: f64, a_max: f64, steps: usize, base: &PhysicalConfig) -> Result<GapScan> {
    if !(a_min > 0.0 && a_min < a_max) {
        return Err(Error::InvalidConfig(format!("gap scan needs 0 < a_min < a_max, got [{a_min}, {a_max}]")));
    }
    if steps < 2 {
        return Err(Error::InvalidConfig("gap scan needs at least 2 steps".into()));
    }
    let configs: Vec<PhysicalConfig> = (0..steps)
        .map(|i| base.clone().with_lattice_constant(a_min + (a_max - a_min) * i as f64 / (steps - 1) as f64))
        .collect();
    for cfg in &configs {
        cfg.validate()?;
    }
    let rows: Vec<GapRow> = configs.par_iter().map(gap_point).collect();
    let onset_a_m = rows.iter().find(|r| r.gap_states > 0).map(|r| r.a_m);
    let pen: Vec<f64> = rows.iter().filter_map(|r| r.penetration_hz).collect();
    let penetration_monotonic = pen.windows(2).all(|w| w[1] >= w[0]);
    Ok(GapScan { rows, onset_a_m, penetration_monotonic })
}

/// Detuning list (Hz) from multiples of a G given in rad/s.
pub fn detunings_from_g(factors: &[f64], big_g: f64) -> Vec<f64> {
    factors.iter().map(|f| rad_to_hz(f * big_g)).collect()
}

/// Inverse of [`detunings_from_g`] for one value.
pub fn detuning_in_g(detuning_hz: f64, big_g: f64) -> f64 {
    hz_to_rad(detuning_hz) / big_g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(n: usize) -> PhysicalConfig {
        PhysicalConfig::rb_d2().with_n(n).with_detuning_hz(0.0)
    }

    #[test]
    fn spec_validation() {
        assert!(SweepSpec::over_lattice_constant(base(8), vec![]).validate().is_err());
        assert!(SweepSpec::over_lattice_constant(base(8), vec![2e-6, 1e-6]).validate().is_err());
        assert!(SweepSpec::over_lattice_constant(base(8), vec![1e-6, 1e-6]).validate().is_err());
        let both = SweepSpec { base: base(8), lattice_constants: vec![1e-6, 2e-6], detunings_hz: vec![-1e9, 0.0, 1e9] };
        assert_eq!(both.axis().unwrap(), SweepAxis::Both);
        assert_eq!(both.configs().len(), 6);
    }

    #[test]
    fn sweep_rows_follow_spec_order() {
        let spec = SweepSpec::over_lattice_constant(base(12), vec![1e-6, 3e-6, 5e-6]);
        let sweep = merit_sweep(&spec).unwrap();
        let a: Vec<f64> = sweep.points.iter().map(|p| p.a_m).collect();
        assert_eq!(a, vec![1e-6, 3e-6, 5e-6]);
        assert!(sweep.points.iter().all(|p| p.error.is_none() && p.rows.len() == 3 * 12 / 2 + 2));
    }

    #[test]
    fn zero_coupling_point_has_no_bunching() {
        let spec = SweepSpec::over_lattice_constant(base(12).with_coupling_hz(0.0), vec![5.32e-6]);
        let sweep = merit_sweep(&spec).unwrap();
        let rows = sweep.rows();
        assert_eq!(rows.len(), 3 * (12 / 2 + 1));
        assert!(rows.iter().all(|r| r.delta_a == 0.0));
    }

    #[test]
    fn bad_point_does_not_abort() {
        let spec = SweepSpec::over_lattice_constant(base(12), vec![-1.0, 5e-6]);
        // Validation rejects inadmissible values up front.
        assert!(merit_sweep(&spec).is_err());
        let p = sweep_point(&base(12).with_lattice_constant(-1.0));
        assert!(p.error.is_some());
    }

    #[test]
    fn window_helper() {
        let row = |x: f64, d: f64| MeritRow { a_m: 1.0, detuning_hz: 0.0, rho: 1, band: "LL".into(), energy_hz: x, offset_hz: x, delta_a: d };
        let rows = vec![row(0.0, 0.0), row(1.0, 0.05), row(2.0, 1.0), row(5.0, 0.2), row(9.0, 0.0)];
        assert_eq!(bunching_window_hz(&rows, 0.1), 3.0);
        assert_eq!(bunching_window_hz(&rows, 0.0), 4.0);
        assert_eq!(bunching_window_hz(&rows[..1], 0.0), 0.0);
    }

    #[test]
    fn gap_scan_rejects_bad_range() {
        assert!(gap_scan(2e-5, 1e-5, 4, &base(12)).is_err());
        assert!(gap_scan(1e-5, 2e-5, 1, &base(12)).is_err());
    }

    #[test]
    fn detuning_units_round_trip() {
        let g = hz_to_rad(5e9);
        let d = detunings_from_g(&[-0.5, 0.0, 1.0], g);
        assert_eq!(d, vec![-2.5e9, 0.0, 5e9]);
        assert!((detuning_in_g(d[0], g) + 0.5).abs() < 1e-15);
    }
}
