//! Physical inputs and the derived model parameters.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Speed of light (m/s).
pub const C_LIGHT: f64 = 2.997_924_58e8;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Reduced Planck constant (J·s), only used to turn the SI coupling into rad/s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// One atomic unit of electric dipole moment (C·m).
pub const AU_DIPOLE: f64 = 8.478_353_625_5e-30;

/// J0 by its power series. Accurate to a few ulp for |x| <= 4.
pub fn bessel_j0(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 1.0;
    while term.abs() > 1e-18 * sum.abs().max(1e-300) {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
        if k > 200.0 {
            break;
        }
    }
    sum
}

/// First positive zero of J0, found once by bisection on [2, 3].
pub fn bessel_j0_first_zero() -> f64 {
    static ZERO: OnceLock<f64> = OnceLock::new();
    *ZERO.get_or_init(|| {
        let (mut lo, mut hi) = (2.0_f64, 3.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if bessel_j0(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if bessel_j0(lo).abs() < bessel_j0(hi).abs() {
            lo
        } else {
            hi
        }
    })
}

/// User-facing inputs. Frequencies are ordinary frequencies (Hz).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    /// Number of atoms (even, at least 4).
    pub n: usize,
    /// Lattice constant (m).
    pub a: f64,
    /// Fiber radius (m). Ignored when `detuning_target` is set.
    pub r: f64,
    /// Atomic transition frequency (Hz).
    pub f0: f64,
    /// Transition dipole moment (atomic units).
    pub d: f64,
    /// Collective coupling G/2π (Hz) replacing the derived value.
    pub override_g: Option<f64>,
    /// Exciton hopping t/2π (Hz). Zero when absent.
    pub override_t: Option<f64>,
    /// Cavity detuning δ/2π (Hz); the radius is recomputed to realize it.
    pub detuning_target: Option<f64>,
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        Self::rb_d2()
    }
}

impl PhysicalConfig {
    /// Rb D2 line in a 0.299 μm fiber with 40 atoms spaced by 5.32 μm.
    pub fn rb_d2() -> Self {
        Self {
            n: 40,
            a: 5.32e-6,
            r: 0.299e-6,
            f0: 384e12,
            d: 4.22,
            override_g: None,
            override_t: None,
            detuning_target: None,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_lattice_constant(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn with_radius(mut self, r: f64) -> Self {
        self.r = r;
        self.detuning_target = None;
        self
    }

    pub fn with_detuning_hz(mut self, delta_hz: f64) -> Self {
        self.detuning_target = Some(delta_hz);
        self
    }

    pub fn with_coupling_hz(mut self, g_hz: f64) -> Self {
        self.override_g = Some(g_hz);
        self
    }

    pub fn with_hopping_hz(mut self, t_hz: f64) -> Self {
        self.override_t = Some(t_hz);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n < 4 || self.n % 2 != 0 {
            return bad(format!("n_sites must be an even integer >= 4, got {}", self.n));
        }
        let positive = [
            ("lattice_constant_m", self.a),
            ("fiber_radius_m", self.r),
            ("transition_freq_hz", self.f0),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.d.is_finite() && self.d >= 0.0) {
            return bad(format!("dipole_au must be non-negative, got {}", self.d));
        }
        if let Some(g) = self.override_g {
            if !(g.is_finite() && g >= 0.0) {
                return bad(format!("coupling_G_hz must be non-negative, got {g}"));
            }
        }
        if let Some(t) = self.override_t {
            if !t.is_finite() {
                return bad(format!("hopping_t_hz must be finite, got {t}"));
            }
        }
        if let Some(delta) = self.detuning_target {
            if !delta.is_finite() || self.f0 + delta <= 0.0 {
                return bad(format!(
                    "detuning_hz = {delta} gives a non-positive cavity frequency"
                ));
            }
        }
        Ok(())
    }
}

/// Derived parameters in internal units (rad/s, m).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    pub n: usize,
    pub a: f64,
    /// Fiber radius actually used (m).
    pub r: f64,
    pub e0: f64,
    pub q_perp: f64,
    /// Mode volume πR²Na (m³).
    pub v: f64,
    pub g: f64,
    /// Collective coupling g√N.
    pub big_g: f64,
    pub t: f64,
    /// c·q⊥ − E0.
    pub delta: f64,
    pub k_sc: f64,
    /// The inputs these values came from.
    pub source: PhysicalConfig,
}

impl ModelParams {
    /// Inputs that reproduce these parameters exactly.
    pub fn to_config(&self) -> PhysicalConfig {
        self.source.clone()
    }

    pub fn with_source(&self, f: impl FnOnce(PhysicalConfig) -> PhysicalConfig) -> Result<Self> {
        derive_params(&f(self.to_config()))
    }
}

pub fn hz_to_rad(f: f64) -> f64 {
    2.0 * PI * f
}

pub fn rad_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}

pub fn derive_params(cfg: &PhysicalConfig) -> Result<ModelParams> {
    cfg.validate()?;
    let j01 = bessel_j0_first_zero();
    let n = cfg.n as f64;
    let e0 = hz_to_rad(cfg.f0);

    let (r, q_perp, delta) = match cfg.detuning_target {
        Some(delta_hz) => {
            let delta = hz_to_rad(delta_hz);
            let q_perp = (e0 + delta) / C_LIGHT;
            (j01 / q_perp, q_perp, delta)
        }
        None => {
            let q_perp = j01 / cfg.r;
            (cfg.r, q_perp, C_LIGHT * q_perp - e0)
        }
    };

    let v = PI * r * r * n * cfg.a;
    let (g, big_g) = match cfg.override_g {
        Some(g_hz) => {
            let g = hz_to_rad(g_hz) / n.sqrt();
            (g, g * n.sqrt())
        }
        None => {
            let d_si = cfg.d * AU_DIPOLE;
            let g = d_si * (e0 / (2.0 * EPSILON_0 * HBAR * v)).sqrt();
            (g, g * n.sqrt())
        }
    };
    let t = cfg.override_t.map(hz_to_rad).unwrap_or(0.0);
    let k_sc = 2.0 * (e0 * big_g).sqrt() / C_LIGHT;

    Ok(ModelParams {
        n: cfg.n,
        a: cfg.a,
        r,
        e0,
        q_perp,
        v,
        g,
        big_g,
        t,
        delta,
        k_sc,
        source: cfg.clone(),
    })
}

/// Returns `cfg` with the fiber radius chosen so that the derived detuning is
/// `delta_target` (rad/s).
pub fn retune_radius(cfg: &PhysicalConfig, delta_target: f64) -> Result<PhysicalConfig> {
    let e0 = hz_to_rad(cfg.f0);
    if !(delta_target.is_finite() && e0 + delta_target > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "detuning {delta_target} rad/s gives a non-positive cavity frequency"
        )));
    }
    let mut out = cfg.clone();
    out.r = C_LIGHT * bessel_j0_first_zero() / (e0 + delta_target);
    out.detuning_target = Some(rad_to_hz(delta_target));
    Ok(out)
}

/// Dipole-dipole scale d²/(4πε0ħa³) in rad/s. Only an estimate of |t|.
pub fn dipolar_hopping_estimate(cfg: &PhysicalConfig) -> f64 {
    let d_si = cfg.d * AU_DIPOLE;
    d_si * d_si / (4.0 * PI * EPSILON_0 * HBAR * cfg.a.powi(3))
}
