use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "qrabi",
    version,
    about = "Dressed bands, Rabi frequencies and exact dynamics of a two-level atom coupled to one mode",
    long_about = "Dressed bands, Rabi frequencies and exact dynamics of H = omega a^dag a + (delta/2) sigma_3 \
                  + g sigma_1 (a^dag + a).\n\nEnergies and frequencies are written in units of omega unless \
                  --raw is given; times are always in the units of the inputs."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Mode frequency omega
    #[arg(long, global = true, default_value_t = 1.0)]
    pub omega: f64,
    /// Level splitting delta
    #[arg(long, global = true, default_value_t = 0.1)]
    pub delta: f64,
    /// Atom-field coupling g
    #[arg(long, global = true, default_value_t = 1.0)]
    pub g: f64,
    /// Highest retained Fock index [default: chosen from the initial state and coupling]
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    /// Guard levels at the top of the truncation [default: ceil(10 theta^2) + 10, widened for high indices]
    #[arg(long, global = true)]
    pub guard: Option<usize>,
    /// End of the time grid [default: 50 for evolve, two Rabi periods for compare]
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    /// Number of time samples, including t = 0
    #[arg(long, global = true, default_value_t = 501)]
    pub samples: usize,
    /// Relative tolerance of the adaptive integrator
    #[arg(long = "rel-tol", global = true, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output file [default: standard output]
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Report energies in the units of the inputs instead of units of omega
    #[arg(long, global = true)]
    pub raw: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Band energies E_{n,sigma} and free energies E_n
    Spectrum(SpectrumArgs),
    /// Exact and asymptotic Rabi frequencies over a range of g or n
    RabiSweep(SweepArgs),
    /// Time evolution from a chosen initial state
    Evolve(EvolveArgs),
    /// Two-level, band-amplitude and full evolutions of one transition side by side
    Compare(CompareArgs),
    /// Closed-form and matrix-exponential values of <m|exp(theta(a^dag - a))|n>
    MatrixElement(MatrixElementArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    /// Highest photon index listed
    #[arg(long, default_value_t = 30)]
    pub bands: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    G,
    N,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Swept quantity
    #[arg(long, value_enum)]
    pub var: SweepVar,
    #[arg(long)]
    pub start: f64,
    #[arg(long)]
    pub stop: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Lower photon index when sweeping g
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Photon-number differences m - n, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = vec![0usize, 1, 2])]
    pub diffs: Vec<usize>,
    /// When sweeping n, choose g at each point so that 4 sqrt(n) g / omega equals this value
    #[arg(long = "fixed-arg")]
    pub fixed_arg: Option<f64>,
    /// Space n points geometrically instead of linearly
    #[arg(long)]
    pub log: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    /// Initial state: vacuum-g, band:N:SIGMA (SIGMA = +1 or -1) or file:PATH (state JSON)
    #[arg(long, default_value = "vacuum-g")]
    pub initial: String,
    /// Record band populations for all n up to this index
    #[arg(long = "track-bands", default_value_t = 2)]
    pub track_bands: usize,
    /// Propagation method
    #[arg(long, value_enum, default_value_t = Method::Full)]
    pub method: Method,
    /// Also write the final state as JSON to this path
    #[arg(long = "final-state")]
    pub final_state: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Schrodinger equation of the full Hamiltonian
    Full,
    /// Dressed-band amplitude equations
    Amplitudes,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Initial band N:SIGMA
    #[arg(long, allow_hyphen_values = true)]
    pub from: String,
    /// Partner band M:SIGMA
    #[arg(long, allow_hyphen_values = true)]
    pub to: String,
}

#[derive(Debug, Clone, Args)]
pub struct MatrixElementArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
}
