//! Command-line front end. Every command produces one table with a metadata
//! header echoing all inputs, written as CSV or JSON.

mod args;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use rayon::prelude::*;
use thiserror::Error;

pub use args::{Cli, Command, FormatArg, GlobalArgs, Method, SweepVar};
use args::{CompareArgs, EvolveArgs, MatrixElementArgs, SpectrumArgs, SweepArgs};

use crate::dressed::{
    band_energy, default_band_cutoff, free_energy, initial_amplitudes, poisson_cutoff, BandDecomposition, BandLabel,
    DressedBasis, DressedError,
};
use crate::dynamics::{
    propagate_amplitudes, propagate_full, AmplitudeOptions, DynamicsError, FullOptions, IntegratorConfig, TimeGrid,
    TimeSeries, Track,
};
use crate::fock::{self, FockError, SpinFockVector, TruncationConfig, C64};
use crate::output::{fmt_f64, Cell, Format, Metadata, Table};
use crate::params::{ModelParams, ParamError, Sign};
use crate::rabi::{self, RabiError, RabiResult, TransitionSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 1 for invalid input or I/O, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<FockError> for CliError {
    fn from(e: FockError) -> Self {
        match e {
            FockError::Leakage { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<DressedError> for CliError {
    fn from(e: DressedError) -> Self {
        match e {
            DressedError::Fock(f) => f.into(),
            DressedError::TailTooHeavy { .. } => CliError::Numerical(e.to_string()),
            DressedError::NotAState { .. } => CliError::Validation(e.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<RabiError> for CliError {
    fn from(e: RabiError) -> Self {
        match e {
            RabiError::Fock(f) => f.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<crate::specfun::SpecFunError> for CliError {
    fn from(e: crate::specfun::SpecFunError) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Rendered output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    /// Extra human-readable lines for standard error.
    pub notes: Vec<String>,
}

/// Parses `args` (program name first), runs the command and writes its
/// output. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let report = run(cli)?;
    for note in &report.notes {
        eprintln!("{note}");
    }
    let format = match cli.global.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let text = report.table.render(format);
    match &cli.global.output {
        Some(path) => write_file(path, &text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs a parsed command without writing anything.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let g = &cli.global;
    let params = ModelParams::new(g.omega, g.delta, g.g)?;
    if !(g.rel_tol.is_finite() && g.rel_tol > 0.0) {
        return Err(CliError::Validation(format!("--rel-tol must be positive (got {})", g.rel_tol)));
    }
    match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(g, &params, a),
        Command::RabiSweep(a) => cmd_rabi_sweep(g, &params, a),
        Command::Evolve(a) => cmd_evolve(g, &params, a),
        Command::Compare(a) => cmd_compare(g, &params, a),
        Command::MatrixElement(a) => cmd_matrix_element(g, a),
    }
}

fn energy_unit(g: &GlobalArgs) -> f64 {
    if g.raw {
        1.0
    } else {
        g.omega
    }
}

fn base_metadata(command: &str, g: &GlobalArgs, params: &ModelParams) -> Metadata {
    let mut m = Metadata::new(command);
    m.push_f64("omega", params.omega);
    m.push_f64("delta", params.delta);
    m.push_f64("g", params.g);
    m.push_f64("theta", params.theta());
    m.push("strong_coupling", params.is_strong_coupling());
    m.push("energy_unit", if g.raw { "raw" } else { "omega" });
    m
}

fn push_numerics(m: &mut Metadata, g: &GlobalArgs, trunc: TruncationConfig, grid: &TimeGrid, cfg: &IntegratorConfig) {
    m.push("n_max", trunc.n_max);
    m.push("guard", trunc.guard);
    m.push_f64("tmax", grid.t_end);
    m.push("samples", grid.samples);
    m.push_f64("rel_tol", cfg.rel_tol);
    m.push_f64("abs_tol", cfg.abs_tol);
    m.push_f64("max_step", cfg.max_step);
    m.push("scheme", "dormand-prince-45");
    let _ = g;
}

/// `N:SIGMA` with `SIGMA` one of `+1`, `-1`, `+`, `-`, `1`.
pub fn parse_band(text: &str) -> Result<BandLabel, CliError> {
    let bad = || CliError::Validation(format!("band label {text:?} must look like N:+1 or N:-1"));
    let (n, s) = text.split_once(':').ok_or_else(bad)?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    let sigma = match s.trim() {
        "+1" | "1" | "+" => Sign::Plus,
        "-1" | "-" => Sign::Minus,
        _ => return Err(bad()),
    };
    Ok(BandLabel::new(n, sigma))
}

/// Truncation leaving at least `max_index` usable levels below the guard.
fn truncation_for(g: &GlobalArgs, max_index: usize, theta: f64) -> Result<TruncationConfig, CliError> {
    let guard = g
        .guard
        .unwrap_or_else(|| TruncationConfig::recommended_guard(theta, max_index));
    let n_max = g.nmax.unwrap_or(max_index + guard);
    if n_max < max_index + guard {
        return Err(CliError::Validation(format!(
            "--nmax {n_max} leaves fewer than {max_index} levels below a guard of {guard}; use --nmax >= {}",
            max_index + guard
        )));
    }
    Ok(TruncationConfig::new(n_max, guard)?)
}

fn integrator(g: &GlobalArgs) -> IntegratorConfig {
    IntegratorConfig::default().with_rel_tol(g.rel_tol)
}

fn cmd_spectrum(g: &GlobalArgs, params: &ModelParams, a: &SpectrumArgs) -> Result<Report, CliError> {
    let unit = energy_unit(g);
    let mut meta = base_metadata("spectrum", g, params);
    meta.push("bands", a.bands);
    let mut table = Table::new(meta, &["n", "sigma", "band_energy", "free_energy", "total_energy"]);
    for n in 0..=a.bands {
        for sigma in [Sign::Minus, Sign::Plus] {
            let l = BandLabel::new(n, sigma);
            let eb = band_energy(l, params)?;
            let ef = free_energy(n, params);
            table.push(vec![
                n.into(),
                sigma.as_i32().into(),
                (eb / unit).into(),
                (ef / unit).into(),
                ((eb + ef) / unit).into(),
            ]);
        }
    }
    Ok(Report { table, notes: vec![] })
}

const SWEEP_COLUMNS: [&str; 15] = [
    "index",
    "g",
    "n",
    "m",
    "sigma_from",
    "sigma_to",
    "kind",
    "diff",
    "frequency",
    "asymptotic",
    "detuning",
    "bessel_order",
    "bessel_argument",
    "relative_deviation",
    "detuning_ratio",
];

fn sweep_row(index: usize, g: f64, r: &RabiResult, unit: f64) -> Vec<Cell> {
    vec![
        index.into(),
        g.into(),
        r.spec.from.n.into(),
        r.spec.to.n.into(),
        r.spec.from.sigma.as_i32().into(),
        r.spec.to.sigma.as_i32().into(),
        r.spec.kind().as_str().into(),
        (r.spec.diff()).into(),
        (r.frequency / unit).into(),
        (r.asymptotic / unit).into(),
        (r.detuning / unit).into(),
        (r.bessel_order as i64).into(),
        r.bessel_argument.into(),
        r.relative_deviation().into(),
        r.detuning_ratio().into(),
    ]
}

fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![start];
    }
    (0..points)
        .map(|i| {
            if i + 1 == points {
                stop
            } else {
                start + (stop - start) * i as f64 / (points - 1) as f64
            }
        })
        .collect()
}

fn cmd_rabi_sweep(g: &GlobalArgs, params: &ModelParams, a: &SweepArgs) -> Result<Report, CliError> {
    if a.points == 0 || a.diffs.is_empty() {
        return Err(CliError::Validation("a sweep needs at least one point and one diff".into()));
    }
    if !(a.start.is_finite() && a.stop.is_finite()) || a.stop < a.start {
        return Err(CliError::Validation(format!(
            "sweep range [{}, {}] must be finite and ordered",
            a.start, a.stop
        )));
    }
    let unit = energy_unit(g);
    let mut meta = base_metadata("rabi-sweep", g, params);
    // (point params, n) per sweep index
    let points: Vec<(ModelParams, usize)> = match a.var {
        SweepVar::G => {
            if a.start < 0.0 {
                return Err(CliError::Validation("g must be non-negative".into()));
            }
            meta.push("sweep", "g");
            meta.push("n", a.n);
            linspace(a.start, a.stop, a.points)
                .into_iter()
                .map(|gv| Ok((params.with_g(gv), a.n)))
                .collect::<Result<_, CliError>>()?
        }
        SweepVar::N => {
            if a.start < 0.0 || (a.log && a.start < 1.0) {
                return Err(CliError::Validation("n range must start at >= 0 (>= 1 with --log)".into()));
            }
            meta.push("sweep", "n");
            meta.push("spacing", if a.log { "log" } else { "linear" });
            let mut ns: Vec<usize> = if a.log {
                linspace(a.start.ln(), a.stop.ln(), a.points)
                    .into_iter()
                    .map(|x| x.exp().round() as usize)
                    .collect()
            } else {
                linspace(a.start, a.stop, a.points).into_iter().map(|x| x.round() as usize).collect()
            };
            ns.dedup();
            let mut out = Vec::with_capacity(ns.len());
            for n in ns {
                let p = match a.fixed_arg {
                    Some(x) => {
                        if n == 0 {
                            return Err(CliError::Validation("--fixed-arg needs n >= 1".into()));
                        }
                        ModelParams::new(params.omega, params.delta, x * params.omega / (4.0 * (n as f64).sqrt()))?
                    }
                    None => *params,
                };
                out.push((p, n));
            }
            out
        }
    };
    if let Some(x) = a.fixed_arg {
        meta.push_f64("fixed_arg", x);
    }
    meta.push_f64("start", a.start);
    meta.push_f64("stop", a.stop);
    meta.push("points", a.points);
    meta.push(
        "diffs",
        a.diffs.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(";"),
    );
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|i| a.diffs.iter().map(move |&d| (i, d)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(i, d)| rabi::best_orientation(points[i].1, d, &points[i].0).map(|r| (i, r)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(meta, &SWEEP_COLUMNS);
    for (i, r) in &results {
        table.push(sweep_row(*i, points[*i].0.g, r, unit));
    }
    Ok(Report { table, notes: vec![] })
}

enum Initial {
    Vacuum,
    Band(BandLabel),
    File(SpinFockVector),
}

fn parse_initial(text: &str) -> Result<Initial, CliError> {
    if text == "vacuum-g" || text == "vacuum_g" {
        Ok(Initial::Vacuum)
    } else if let Some(rest) = text.strip_prefix("band:") {
        Ok(Initial::Band(parse_band(rest)?))
    } else if let Some(path) = text.strip_prefix("file:") {
        let raw = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: PathBuf::from(path),
            source,
        })?;
        let value: serde_json::Value =
            serde_json::from_str(&raw).map_err(|e| CliError::Validation(format!("{path}: {e}")))?;
        let state = SpinFockVector::from_json(&value).map_err(|e| CliError::Validation(format!("{path}: {e}")))?;
        if !state.is_state() {
            return Err(CliError::Validation(format!("{path}: state has norm {}", state.norm())));
        }
        Ok(Initial::File(state))
    } else {
        Err(CliError::Validation(format!(
            "initial state {text:?} must be vacuum-g, band:N:SIGMA or file:PATH"
        )))
    }
}

fn time_grid(g: &GlobalArgs, default_tmax: f64) -> Result<TimeGrid, CliError> {
    Ok(TimeGrid::new(0.0, g.tmax.unwrap_or(default_tmax), g.samples)?)
}

fn tracked_bands(max_n: usize) -> Vec<BandLabel> {
    (0..=max_n)
        .flat_map(|n| [Sign::Minus, Sign::Plus].map(|s| BandLabel::new(n, s)))
        .collect()
}

fn scale_track(series: &TimeSeries, name: &str, factor: f64) -> TimeSeries {
    let mut out = TimeSeries::new(series.grid);
    for n in series.names() {
        match series.track(n).expect("listed track exists") {
            Track::Real(v) if n == name => out.push_real(n, v.iter().map(|x| x * factor).collect()),
            Track::Real(v) => out.push_real(n, v.clone()),
            Track::Complex(v) => out.push_complex(n, v.clone()),
        }
    }
    out
}

fn cmd_evolve(g: &GlobalArgs, params: &ModelParams, a: &EvolveArgs) -> Result<Report, CliError> {
    let initial = parse_initial(&a.initial)?;
    let grid = time_grid(g, 50.0)?;
    let cfg = integrator(g);
    let beta = params.beta();
    // the two coherent branches reach amplitude 2β
    let photon_reach = poisson_cutoff(4.0 * beta * beta, 1e-15);
    let mut meta = base_metadata("evolve", g, params);
    meta.push("initial", &a.initial);
    meta.push("method", match a.method {
        Method::Full => "full",
        Method::Amplitudes => "amplitudes",
    });
    let bands = tracked_bands(a.track_bands);
    let mut notes = Vec::new();

    let (series, drift, trunc) = match a.method {
        Method::Full => {
            let (state, trunc) = match &initial {
                Initial::Vacuum => {
                    let trunc = truncation_for(g, photon_reach.max(a.track_bands), params.theta())?;
                    (SpinFockVector::vacuum_ground(trunc), trunc)
                }
                Initial::Band(l) => {
                    let reach = l.n + (4.0 * params.theta().abs() * (l.n as f64).sqrt()).ceil() as usize;
                    let trunc = truncation_for(g, (reach + photon_reach).max(a.track_bands), params.theta())?;
                    (DressedBasis::new(params, trunc)?.band_eigenstate(*l)?, trunc)
                }
                Initial::File(s) => (s.clone(), s.trunc()),
            };
            let opts = FullOptions {
                bands: bands.clone(),
                keep_states: a.final_state.is_some(),
                leakage_tol: None,
            };
            let run = propagate_full(&state, &grid, params, &cfg, &opts)?;
            if let Some(path) = &a.final_state {
                let last = run.states.last().expect("grid has samples");
                let text = serde_json::to_string_pretty(&last.to_json()).expect("state serializes");
                write_file(path, &(text + "\n"))?;
            }
            meta.push_f64("max_edge_weight", run.max_edge_weight);
            let unit = energy_unit(g);
            (scale_track(&run.series, "energy", 1.0 / unit), run.max_norm_drift, trunc)
        }
        Method::Amplitudes => {
            if a.final_state.is_some() {
                return Err(CliError::Validation("--final-state is only available with --method full".into()));
            }
            let nb_default = default_band_cutoff(params).max(a.track_bands) + 10;
            let (d0, trunc) = match &initial {
                Initial::Vacuum => {
                    let trunc = truncation_for(g, nb_default, params.theta())?;
                    (initial_amplitudes(params, trunc.interior())?, trunc)
                }
                Initial::Band(l) => {
                    let trunc = truncation_for(g, nb_default.max(l.n + 10), params.theta())?;
                    (BandDecomposition::single(trunc.interior(), *l), trunc)
                }
                Initial::File(s) => {
                    let d = crate::dressed::decompose(s, params, s.trunc().interior())?;
                    if let Some(w) = d.warning() {
                        notes.push(format!("warning: {w}"));
                    }
                    let weight = d.weight();
                    let mut d = d.clone();
                    for c in d.coeffs_mut() {
                        *c /= C64::new(weight.sqrt(), 0.0);
                    }
                    (d, s.trunc())
                }
            };
            let opts = AmplitudeOptions {
                bands: bands.clone(),
                keep_snapshots: false,
            };
            let run = propagate_amplitudes(&d0, &grid, params, &cfg, &opts)?;
            meta.push("band_cutoff", d0.n_max());
            meta.push("diff_cut", run.diff_cut);
            meta.push_f64("max_omitted_coupling", run.max_omitted);
            (run.series, run.max_norm_drift, trunc)
        }
    };
    push_numerics(&mut meta, g, trunc, &grid, &cfg);
    meta.push_f64("max_norm_drift", drift);
    Ok(Report {
        table: series.to_table(meta),
        notes,
    })
}

fn cmd_compare(g: &GlobalArgs, params: &ModelParams, a: &CompareArgs) -> Result<Report, CliError> {
    let spec = TransitionSpec::new(parse_band(&a.from)?, parse_band(&a.to)?);
    if spec.from.n == spec.to.n {
        return Err(CliError::Validation(format!(
            "{spec} couples no photon levels: the two bands share n and are already diagonal"
        )));
    }
    let r = rabi::rabi_frequency(&spec, params)?;
    if !spec.allowed() {
        rabi::rwa_pair_evolution(&spec, C64::new(1.0, 0.0), C64::new(0.0, 0.0), 0.0, params)?;
    }
    if r.frequency == 0.0 {
        return Err(CliError::Validation(format!("{spec} has zero coupling at these parameters (delta = 0)")));
    }
    let period = 2.0 * std::f64::consts::PI / r.frequency;
    let grid = time_grid(g, 2.0 * period)?;
    let cfg = integrator(g);
    let top = spec.from.n.max(spec.to.n) + 10;
    let trunc = truncation_for(g, top, params.theta())?;

    let times = grid.times();
    let mut rwa_from = Vec::with_capacity(times.len());
    let mut rwa_to = Vec::with_capacity(times.len());
    for &t in &times {
        let (x, y) = rabi::rwa_pair_evolution(&spec, C64::new(1.0, 0.0), C64::new(0.0, 0.0), t, params)?;
        rwa_from.push(x.norm_sqr());
        rwa_to.push(y.norm_sqr());
    }
    let bands = vec![spec.from, spec.to];
    let amp = propagate_amplitudes(
        &BandDecomposition::single(trunc.interior(), spec.from),
        &grid,
        params,
        &cfg,
        &AmplitudeOptions {
            bands: bands.clone(),
            keep_snapshots: false,
        },
    )?;
    let state0 = DressedBasis::new(params, trunc)?.band_eigenstate(spec.from)?;
    let full = propagate_full(
        &state0,
        &grid,
        params,
        &cfg,
        &FullOptions {
            bands,
            ..Default::default()
        },
    )?;
    let (from_name, to_name) = (spec.from.track_name(), spec.to.track_name());
    let track = |s: &TimeSeries, n: &str| s.real(n).expect("requested track").to_vec();
    let (amp_from, amp_to) = (track(&amp.series, &from_name), track(&amp.series, &to_name));
    let (full_from, full_to) = (track(&full.series, &from_name), track(&full.series, &to_name));

    let max_dev = |x: &[f64], y: &[f64], u: &[f64], v: &[f64]| {
        x.iter()
            .zip(y)
            .zip(u.iter().zip(v))
            .map(|((a, b), (c, d))| (a - c).abs().max((b - d).abs()))
            .fold(0.0, f64::max)
    };
    let dev_amp = max_dev(&rwa_from, &rwa_to, &amp_from, &amp_to);
    let dev_full = max_dev(&rwa_from, &rwa_to, &full_from, &full_to);
    let first_peak = |v: &[f64]| {
        times
            .iter()
            .zip(v)
            .filter(|(t, _)| **t <= period)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(f64::NAN, |(t, _)| *t)
    };

    let unit = energy_unit(g);
    let mut meta = base_metadata("compare", g, params);
    meta.push("from", format!("{}:{:+}", spec.from.n, spec.from.sigma.as_i32()));
    meta.push("to", format!("{}:{:+}", spec.to.n, spec.to.sigma.as_i32()));
    meta.push("kind", spec.kind().as_str());
    push_numerics(&mut meta, g, trunc, &grid, &cfg);
    meta.push_f64("frequency", r.frequency / unit);
    meta.push_f64("detuning", r.detuning / unit);
    meta.push_f64("detuning_ratio", r.detuning_ratio());
    meta.push_f64("transfer_time", 0.5 * period);
    meta.push_f64("peak_time_amplitudes", first_peak(&amp_to));
    meta.push_f64("peak_time_full", first_peak(&full_to));
    meta.push_f64("max_deviation_amplitudes", dev_amp);
    meta.push_f64("max_deviation_full", dev_full);
    meta.push_f64("max_norm_drift", full.max_norm_drift.max(amp.max_norm_drift));

    let mut series = TimeSeries::new(grid);
    series.push_real("rwa_from", rwa_from);
    series.push_real("rwa_to", rwa_to);
    series.push_real("amp_from", amp_from);
    series.push_real("amp_to", amp_to);
    series.push_real("full_from", full_from);
    series.push_real("full_to", full_to);
    let mut notes = vec![format!(
        "{spec}: R = {}, |detuning|/R = {}, max deviation from the two-level solution: amplitudes {}, full {}",
        fmt_f64(r.frequency / unit),
        fmt_f64(r.detuning_ratio()),
        fmt_f64(dev_amp),
        fmt_f64(dev_full)
    )];
    if r.detuning_ratio() > 1.0 {
        notes.push("note: the pair is far from resonance, so the resonant two-level solution is not expected to hold".into());
    }
    Ok(Report {
        table: series.to_table(meta),
        notes,
    })
}

fn cmd_matrix_element(g: &GlobalArgs, a: &MatrixElementArgs) -> Result<Report, CliError> {
    let closed = fock::displaced_matrix_element(a.m as u64, a.n as u64, a.theta)?;
    // the exponential is the reference here, so give it room beyond the usual guard
    let top = a.m.max(a.n);
    let mut wide = g.clone();
    wide.guard = Some(g.guard.unwrap_or(TruncationConfig::recommended_guard(a.theta, top) + 20));
    let trunc = truncation_for(&wide, top, a.theta)?;
    let oracle = fock::displacement(trunc, a.theta)?.get(a.m, a.n).re;
    let mut meta = Metadata::new("matrix-element");
    meta.push("n_max", trunc.n_max);
    meta.push("guard", trunc.guard);
    let mut table = Table::new(meta, &["m", "n", "theta", "closed_form", "oracle", "difference"]);
    table.push(vec![
        a.m.into(),
        a.n.into(),
        a.theta.into(),
        closed.into(),
        oracle.into(),
        (closed - oracle).into(),
    ]);
    Ok(Report { table, notes: vec![] })
}
