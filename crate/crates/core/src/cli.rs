//! Command-line surface: configuration ingestion, subcommands, and table
//! serialization.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bare_exciton::{bare_amplitude, bare_energy_offset, KappaGrid};
use crate::dispersion::{exciton_offset, photon_offset, polariton_offsets, KGrid};
use crate::exact2p::{scaled_merit, separations, solve_spectrum, Band, SpectrumK0, TwoPolaritonState};
use crate::oracle::{build_hamiltonian, compare_k0, diagonalize, merit_vs_k};
use crate::params::{derive_params, rad_to_hz, ModelParams, PhysicalConfig};
use crate::sweeps::{gap_scan, merit_sweep, SweepSpec};
use crate::wavepacket;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

/// JSON run configuration. Units are part of the key names.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_sites: Option<usize>,
    pub lattice_constant_m: Option<f64>,
    pub fiber_radius_m: Option<f64>,
    pub transition_freq_hz: Option<f64>,
    pub dipole_au: Option<f64>,
    /// Retunes the fiber radius to realize this detuning.
    pub detuning_hz: Option<f64>,
    #[serde(rename = "coupling_G_hz")]
    pub coupling_g_hz: Option<f64>,
    pub hopping_t_hz: Option<f64>,
    pub output: Option<OutputSpec>,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
}

impl RunConfig {
    /// Applies command-line overrides on top of file values.
    pub fn merged(mut self, o: &Overrides) -> Self {
        let set = |dst: &mut Option<f64>, v: Option<f64>| {
            if v.is_some() {
                *dst = v;
            }
        };
        if o.n.is_some() {
            self.n_sites = o.n;
        }
        set(&mut self.lattice_constant_m, o.lattice_constant);
        set(&mut self.fiber_radius_m, o.radius);
        set(&mut self.detuning_hz, o.detuning_hz);
        set(&mut self.coupling_g_hz, o.coupling_hz);
        set(&mut self.hopping_t_hz, o.hopping_hz);
        self
    }

    /// Physical configuration plus any warnings. Missing keys fall back to
    /// the Rb D2 scenario.
    pub fn physical(&self) -> Result<(PhysicalConfig, Vec<String>)> {
        let mut cfg = PhysicalConfig::rb_d2();
        let mut warnings = Vec::new();
        if let Some(n) = self.n_sites {
            cfg.n = n;
        }
        if let Some(a) = self.lattice_constant_m {
            cfg.a = a;
        }
        if let Some(r) = self.fiber_radius_m {
            cfg.r = r;
        }
        if let Some(f) = self.transition_freq_hz {
            cfg.f0 = f;
        }
        if let Some(d) = self.dipole_au {
            cfg.d = d;
        }
        if let Some(d) = self.detuning_hz {
            if self.fiber_radius_m.is_some() {
                warnings.push("both detuning_hz and fiber_radius_m are set; detuning_hz wins and the radius is recomputed".into());
            }
            cfg.detuning_target = Some(d);
        }
        cfg.override_g = self.coupling_g_hz;
        cfg.override_t = self.hopping_t_hz;
        cfg.validate()?;
        Ok((cfg, warnings))
    }
}

/// A rectangular table of JSON scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    /// CSV with CRLF line endings and shortest round-trip floats.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell_text))?;
        }
        w.into_inner().map_err(|e| Error::Numerical(e.to_string()))
    }

    /// Inverse of [`Table::to_csv`]: empty cells become null, numeric cells
    /// numbers.
    pub fn from_csv(bytes: &[u8]) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(bytes);
        let columns = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(parse_cell).collect());
        }
        Ok(Self { columns, rows })
    }

    /// Array of objects with keys in column order.
    pub fn to_json(&self) -> Result<Vec<u8>> {
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| Value::Object(self.columns.iter().cloned().zip(row.iter().cloned()).collect()))
            .collect();
        let mut out = serde_json::to_vec_pretty(&records)?;
        out.push(b'\n');
        Ok(out)
    }
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn parse_cell(s: &str) -> Value {
    if s.is_empty() {
        return Value::Null;
    }
    if let Ok(b) = s.parse::<bool>() {
        return Value::Bool(b);
    }
    if let Ok(i) = s.parse::<i64>() {
        return Value::from(i);
    }
    match s.parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
        Some(n) => Value::Number(n),
        None => Value::String(s.to_string()),
    }
}

/// What a subcommand produces.
#[derive(Clone, Debug)]
pub enum Output {
    Table(Table),
    /// Structured report; JSON only.
    Document(Value),
}

pub fn emit(output: &Output, format: Option<Format>) -> Result<Vec<u8>> {
    match (output, format) {
        (Output::Table(t), None | Some(Format::Csv)) => t.to_csv(),
        (Output::Table(t), Some(Format::Json)) => t.to_json(),
        (Output::Document(v), None | Some(Format::Json)) => {
            let mut out = serde_json::to_vec_pretty(v)?;
            out.push(b'\n');
            Ok(out)
        }
        (Output::Document(_), Some(Format::Csv)) => Err(Error::InvalidConfig("this subcommand only emits JSON".into())),
    }
}

#[derive(Clone, Debug, Default, Args)]
pub struct Overrides {
    /// Number of atoms (even).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Lattice constant (m).
    #[arg(long, global = true)]
    pub lattice_constant: Option<f64>,
    /// Fiber radius (m).
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    /// Cavity detuning δ/2π (Hz); recomputes the radius.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub detuning_hz: Option<f64>,
    /// Coupling override G/2π (Hz).
    #[arg(long, global = true)]
    pub coupling_hz: Option<f64>,
    /// Exciton hopping t/2π (Hz).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub hopping_hz: Option<f64>,
}

#[derive(Debug, Parser)]
#[command(name = "polariton", version, about = "Two-polariton spectra and photon bunching in a fiber-coupled atomic chain")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BandArg {
    BelowBand,
    Ll,
    Gap,
    Lu,
    Uu,
}

impl From<BandArg> for Band {
    fn from(b: BandArg) -> Self {
        match b {
            BandArg::BelowBand => Band::BelowBand,
            BandArg::Ll => Band::LL,
            BandArg::Gap => Band::Gap,
            BandArg::Lu => Band::LU,
            BandArg::Uu => Band::UU,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Photon, exciton and polariton dispersion on the k grid.
    Dispersion,
    /// K = 0 two-polariton spectrum with ΔA per state.
    Spectrum,
    /// Real- and momentum-space amplitudes of one state.
    State {
        #[arg(long)]
        rho: usize,
        #[arg(long, value_enum, default_value = "ll")]
        band: BandArg,
    },
    /// Bare two-exciton levels on the half-integer grid.
    BareExciton {
        /// Emit the g_n(μ) table instead of the levels.
        #[arg(long)]
        table: bool,
    },
    /// AB-subsystem decomposition and A(0) reconstructions for an LL state.
    Wavepacket {
        #[arg(long)]
        rho: usize,
    },
    /// Exact diagonalization of the full two-excitation sector, one total-momentum block at a time.
    Oracle {
        /// Only report this total-momentum index.
        #[arg(long, allow_hyphen_values = true)]
        k_sector: Option<i64>,
        /// Compare the K = 0 sector with the exact solver (JSON).
        #[arg(long)]
        compare: bool,
    },
    /// ΔA against total momentum for the ρ-th state of each K sector.
    MeritVsK {
        #[arg(long)]
        rho: usize,
    },
    /// ΔA of every K = 0 state across lattice constants and/or detunings.
    MeritSweep {
        /// Lattice constants (m).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a_list: Vec<f64>,
        /// Detunings δ/2π (Hz).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "delta_g_list")]
        delta_list: Vec<f64>,
        /// Detunings in units of the base configuration's G.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        delta_g_list: Vec<f64>,
    },
    /// Gap-state detection across evenly spaced lattice constants.
    GapScan {
        #[arg(long)]
        a_min: f64,
        #[arg(long)]
        a_max: f64,
        #[arg(long)]
        steps: usize,
    },
}

fn read_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| Error::Io { path: p.to_path_buf(), source })?;
            parse_config(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", p.display())))
        }
    }
}

fn hz(w: f64) -> Value {
    json!(rad_to_hz(w))
}

fn opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, Value::from)
}

fn spectrum_table(s: &SpectrumK0) -> Table {
    let p = &s.params;
    let mut t = Table::new(&["index", "rho", "E_hz", "E_minus_2E0_hz", "k_eff", "classification", "deltaA", "deltaA_scaled"]);
    for st in &s.states {
        t.push(vec![
            json!(st.index),
            json!(st.rho),
            hz(st.energy),
            hz(st.offset),
            opt(st.k_eff),
            json!(st.band.label()),
            json!(st.delta_a),
            opt(scaled_merit(st, p).ok()),
        ]);
    }
    t
}

fn find_state(s: &SpectrumK0, band: Band, rho: usize) -> Result<&TwoPolaritonState> {
    s.state(band, rho).ok_or(Error::IndexOutOfRange { what: "rho", index: rho, max: s.band(band).count() })
}

fn state_table(st: &TwoPolaritonState, p: &ModelParams) -> Table {
    let grid = KGrid::for_params(p);
    let seps = separations(p.n);
    let mut t = Table::new(&["n", "A_n", "B_n", "C_n", "k_per_m", "A_k", "B_k", "C_k"]);
    for i in 0..p.n {
        t.push(vec![
            json!(seps[i]),
            json!(st.a_n[i]),
            json!(st.b_n[i]),
            json!(st.c_n[i]),
            json!(grid.values[i]),
            json!(st.a_k[i]),
            json!(st.b_k[i]),
            json!(st.c_k[i]),
        ]);
    }
    t
}

fn dispersion_table(p: &ModelParams) -> Table {
    let grid = KGrid::for_params(p);
    let mut t = Table::new(&[
        "nu",
        "k_per_m",
        "photon_minus_E0_hz",
        "exciton_minus_E0_hz",
        "lower_minus_E0_hz",
        "upper_minus_E0_hz",
        "lower_hz",
        "upper_hz",
    ]);
    for (i, &k) in grid.values.iter().enumerate() {
        let (l, u) = polariton_offsets(k, p);
        t.push(vec![
            json!(grid.nu(i)),
            json!(k),
            hz(photon_offset(k, p)),
            hz(exciton_offset(k, p)),
            hz(l),
            hz(u),
            hz(p.e0 + l),
            hz(p.e0 + u),
        ]);
    }
    t
}

fn bare_exciton_table(p: &ModelParams, g_table: bool) -> Table {
    let kg = KappaGrid::new(p.n, p.a);
    if g_table {
        let mut t = Table::new(&["mu", "n", "g"]);
        for &mu in &kg.mus {
            for &n in &separations(p.n) {
                t.push(vec![json!(mu.value()), json!(n), json!(bare_amplitude(n, mu, p.n))]);
            }
        }
        return t;
    }
    let mut t = Table::new(&["mu", "kappa_per_m", "E_minus_2E0_hz", "E_hz"]);
    for (&mu, &kappa) in kg.mus.iter().zip(&kg.values) {
        let x = bare_energy_offset(mu, p.n, p.t);
        t.push(vec![json!(mu.value()), json!(kappa), hz(x), hz(2.0 * p.e0 + x)]);
    }
    t
}

fn execute(command: &Command, cfg: &PhysicalConfig) -> Result<Output> {
    let p = derive_params(cfg)?;
    Ok(match command {
        Command::Dispersion => Output::Table(dispersion_table(&p)),
        Command::Spectrum => Output::Table(spectrum_table(&solve_spectrum(&p)?)),
        Command::State { rho, band } => {
            let s = solve_spectrum(&p)?;
            Output::Table(state_table(find_state(&s, (*band).into(), *rho)?, &p))
        }
        Command::BareExciton { table } => Output::Table(bare_exciton_table(&p, *table)),
        Command::Wavepacket { rho } => {
            let s = solve_spectrum(&p)?;
            let st = find_state(&s, Band::LL, *rho)?;
            Output::Document(serde_json::to_value(wavepacket::report(st, &p))?)
        }
        Command::Oracle { k_sector, compare } => {
            let h = build_hamiltonian(&p)?;
            let r = diagonalize(&h);
            if *compare {
                let exact = solve_spectrum(&p)?;
                Output::Document(serde_json::to_value(compare_k0(&h, &r, &exact))?)
            } else {
                let mut t = Table::new(&["index", "nu_K", "K_per_m", "E_hz", "E_minus_2E0_hz", "deltaA"]);
                for i in 0..r.offsets.len() {
                    let k = r.k_index[i];
                    if k_sector.is_some() && k != *k_sector {
                        continue;
                    }
                    t.push(vec![
                        json!(i + 1),
                        k.map_or(Value::Null, Value::from),
                        opt(k.map(|k| r.k_value(k))),
                        hz(2.0 * p.e0 + r.offsets[i]),
                        hz(r.offsets[i]),
                        json!(r.delta_a[i]),
                    ]);
                }
                Output::Table(t)
            }
        }
        Command::MeritVsK { rho } => {
            let r = diagonalize(&build_hamiltonian(&p)?);
            let mut t = Table::new(&["nu_K", "K_per_m", "E_hz", "E_minus_2E0_hz", "deltaA", "ambiguous"]);
            for pt in merit_vs_k(&r, *rho) {
                t.push(vec![
                    json!(pt.nu_k),
                    json!(pt.k),
                    hz(2.0 * p.e0 + pt.offset),
                    hz(pt.offset),
                    json!(pt.delta_a),
                    json!(pt.ambiguous),
                ]);
            }
            Output::Table(t)
        }
        Command::MeritSweep { a_list, delta_list, delta_g_list } => {
            let mut spec = if delta_g_list.is_empty() {
                SweepSpec::over_detuning(cfg.clone(), delta_list.clone())
            } else {
                SweepSpec::over_detuning_in_g(cfg.clone(), delta_g_list)?
            };
            spec.lattice_constants = a_list.clone();
            let sweep = merit_sweep(&spec)?;
            let mut t = Table::new(&["a_m", "detuning_hz", "rho", "band", "E_hz", "E_minus_2E0_hz", "deltaA"]);
            for point in &sweep.points {
                if let Some(e) = &point.error {
                    log::warn!("sweep point a = {} m, δ = {} Hz failed: {e}", point.a_m, point.detuning_hz);
                }
                for issue in &point.issues {
                    log::warn!("sweep point a = {} m: {issue}", point.a_m);
                }
                for r in &point.rows {
                    t.push(vec![
                        json!(r.a_m),
                        json!(r.detuning_hz),
                        json!(r.rho),
                        json!(r.band),
                        json!(r.energy_hz),
                        json!(r.offset_hz),
                        json!(r.delta_a),
                    ]);
                }
            }
            Output::Table(t)
        }
        Command::GapScan { a_min, a_max, steps } => {
            let scan = gap_scan(*a_min, *a_max, *steps, cfg)?;
            match scan.onset_a_m {
                Some(a) => log::info!("first gap state at a = {a} m; penetration monotonic: {}", scan.penetration_monotonic),
                None => log::info!("no gap state in the scanned range"),
            }
            let mut t = Table::new(&[
                "a_m",
                "gap_hz",
                "gap_states",
                "gap_state_E_minus_2E0_hz",
                "penetration_hz",
                "gap_state_deltaA",
                "continuum_max_deltaA",
                "error",
            ]);
            for r in &scan.rows {
                t.push(vec![
                    json!(r.a_m),
                    json!(r.gap_hz),
                    json!(r.gap_states),
                    opt(r.gap_state_offset_hz),
                    opt(r.penetration_hz),
                    opt(r.gap_state_delta_a),
                    json!(r.continuum_max_delta_a),
                    r.error.clone().map_or(Value::Null, Value::from),
                ]);
            }
            Output::Table(t)
        }
    })
}

/// Runs one invocation and writes its artifact.
pub fn run(cli: &Cli) -> Result<()> {
    let file = read_config(cli.config.as_deref())?;
    let output_spec = file.output.clone().unwrap_or_default();
    let (cfg, warnings) = file.merged(&cli.overrides).physical()?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let format = cli.format.or(output_spec.format);
    let path = cli.out.clone().or(output_spec.path);

    let output = match cli.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("--jobs: {e}")))?
            .install(|| execute(&cli.command, &cfg))?,
        None => execute(&cli.command, &cfg)?,
    };
    let bytes = emit(&output, format)?;
    match path {
        Some(p) => std::fs::write(&p, bytes).map_err(|source| Error::Io { path: p, source }),
        None => std::io::stdout()
            .lock()
            .write_all(&bytes)
            .map_err(|source| Error::Io { path: PathBuf::from("<stdout>"), source }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default_scenario() {
        let (cfg, warnings) = parse_config("{}").unwrap().physical().unwrap();
        assert_eq!(cfg, PhysicalConfig::rb_d2());
        assert!(warnings.is_empty());
    }

    #[test]
    fn rejects_unknown_and_odd() {
        let err = parse_config(r#"{"n_site": 40}"#).unwrap_err().to_string();
        assert!(err.contains("n_site"), "{err}");
        let err = parse_config(r#"{"n_sites": 7}"#).unwrap().physical().unwrap_err().to_string();
        assert!(err.contains("n_sites"), "{err}");
        assert!(parse_config(r#"{"output": {"format": "xml"}}"#).is_err());
    }

    #[test]
    fn detuning_beats_radius() {
        let rc = parse_config(r#"{"fiber_radius_m": 3e-7, "detuning_hz": 0}"#).unwrap();
        let (cfg, warnings) = rc.physical().unwrap();
        assert_eq!(cfg.detuning_target, Some(0.0));
        assert_eq!(warnings.len(), 1);
        let p = derive_params(&cfg).unwrap();
        assert!(p.delta.abs() < 1e-6 * p.big_g);
    }

    #[test]
    fn flags_override_file() {
        let rc = parse_config(r#"{"n_sites": 12, "coupling_G_hz": 1e9}"#).unwrap();
        let o = Overrides { n: Some(16), ..Default::default() };
        let (cfg, _) = rc.merged(&o).physical().unwrap();
        assert_eq!(cfg.n, 16);
        assert_eq!(cfg.override_g, Some(1e9));
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["a", "b"]);
        assert_eq!(t.to_csv().unwrap(), b"a,b\r\n");
    }

    #[test]
    fn document_refuses_csv() {
        let doc = Output::Document(json!({"x": 1}));
        assert!(emit(&doc, Some(Format::Csv)).is_err());
        assert!(emit(&doc, None).is_ok());
    }
}
