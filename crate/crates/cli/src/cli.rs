//! Argument parsing and subcommand dispatch. Bad arguments exit 2 (via
//! the parser), run-level failures exit 1, success exits 0.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cbh_core::model::SystemParams;
use cbh_core::solver::{auto_truncate, SolverConfig};
use cbh_core::thermo::{
    carrier_response_analytic, response_atomic_fixed_n, thermo_point, ReferenceFrequencies,
};

use crate::kappa::{kappa_threshold_scan, KappaThreshold};
use crate::output::{emit_plot_script, write_records, OutputRecord, PlotCurve};
use crate::presets::{self, Preset};
use crate::spec::{GridSpec, OutputFormat, SweepMode, SweepSpec};
use crate::sweep::run_sweep;

#[derive(Parser)]
#[command(
    name = "cbh",
    version,
    about = "Steady-state energies and reservoir-temperature responses of a driven atom-mode system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one steady state and print its energies
    Steady(SteadyArgs),
    /// Sweep a response curve over an occupation grid
    Sweep(SweepArgs),
    /// Run a named reference scenario
    Preset(PresetArgs),
    /// Find the largest field decay rate that still allows field cooling
    ScanKappa(ScanKappaArgs),
    /// Tabulate numeric carrier responses against the closed form
    Oracle(OracleArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Sideband order: 0 carrier, 1 first blue, 2 second blue
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2))]
    k: u8,
    /// Coupling strength in units of the atomic decay rate
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    /// Field decay rate in units of the atomic decay rate
    #[arg(long, default_value_t = 0.1)]
    kappa: f64,
    /// Field-reservoir occupation
    #[arg(long, default_value_t = 0.0)]
    nth: f64,
    /// Atom-reservoir occupation
    #[arg(long, default_value_t = 0.0)]
    mth: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<SystemParams> {
        Ok(SystemParams::new(
            self.k, self.g, self.kappa, self.nth, self.mth,
        )?)
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Steady-state residual tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Hard ceiling on the Fock cutoff
    #[arg(long)]
    max_fock: Option<usize>,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let mut config = SolverConfig::default();
        if let Some(tol) = self.tol {
            config.residual_tol = tol;
        }
        if let Some(max_fock) = self.max_fock {
            config.max_fock = max_fock;
        }
        config
    }
}

#[derive(Args)]
struct OutputArgs {
    /// csv or json
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the generation-time comment so outputs diff cleanly
    #[arg(long)]
    no_timestamp: bool,
    /// Also write a gnuplot script next to the data
    #[arg(long)]
    plot_script: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args)]
struct SteadyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Print as JSON instead of aligned text
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file with a full sweep description; flags below are ignored
    #[arg(long, conflicts_with_all = ["k", "mode", "grid"])]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "common-occupation")]
    mode: ModeArg,
    /// Sideband order: 0 carrier, 1 first blue, 2 second blue
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2), default_value_t = 1)]
    k: u8,
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    #[arg(long, default_value_t = 0.1)]
    kappa: f64,
    /// Occupation (or κ) grid as start:stop:step
    #[arg(long, default_value = "0.05:3.0:0.05")]
    grid: GridSpec,
    /// Pinned field occupation; repeat for several sub-curves
    #[arg(long = "fixed-n", num_args = 1..)]
    fixed_n: Vec<f64>,
    /// Frequency used to convert common-occupation derivatives
    #[arg(long, default_value_t = 1.0)]
    omega_ref: f64,
    /// Centered finite-difference step
    #[arg(long)]
    fd_step: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ModeArg {
    CommonOccupation,
    FixedFieldOccupation,
    KappaScan,
}

impl From<ModeArg> for SweepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::CommonOccupation => SweepMode::CommonOccupation,
            ModeArg::FixedFieldOccupation => SweepMode::FixedFieldOccupation,
            ModeArg::KappaScan => SweepMode::KappaScan,
        }
    }
}

#[derive(Args)]
struct PresetArgs {
    #[arg(value_enum)]
    name: Preset,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ScanKappaArgs {
    /// Sideband order: 1 or 2
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    k: u8,
    /// Couplings to scan; the largest per-coupling threshold is reported.
    /// Defaults to {g/2, g, 3g/2} around the figure value for the model.
    #[arg(long, num_args = 1..)]
    g: Vec<f64>,
    /// κ grid as start:stop:step
    #[arg(long, default_value = "0.1:0.55:0.05")]
    grid: GridSpec,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct OracleArgs {
    /// Drive strength in units of the atomic decay rate
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    /// Occupation grid as start:stop:step
    #[arg(long, default_value = "0.1:1.0:0.1")]
    grid: GridSpec,
    #[command(flatten)]
    solver: SolverArgs,
}

/// Parse and run; the exit code contract is 0 success, 1 run-level
/// failure, 2 argument errors.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return err.exit_code();
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Steady(args) => run_steady(args),
        Command::Sweep(args) => run_sweep_cmd(args),
        Command::Preset(args) => run_preset(args),
        Command::ScanKappa(args) => run_scan_kappa(args),
        Command::Oracle(args) => run_oracle(args),
    }
}

fn run_steady(args: SteadyArgs) -> Result<()> {
    let params = args.model.params()?;
    let config = args.solver.config();
    let result = auto_truncate(&params, &config)?;
    let point = thermo_point(&result, &params)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&point)?);
    } else {
        println!("m_th            {:.12}", point.m_th);
        println!("n_th            {:.12}", point.n_th);
        println!("ea_over_omega0  {:.12}", point.ea_over_omega0);
        println!("ef_over_nu      {:.12}", point.ef_over_nu);
        println!("e_int           {:.3e}", point.e_int);
        println!("n_fock_used     {}", point.n_fock_used);
        println!("residual        {:.3e}", point.residual);
        println!("method          {:?}", result.method);
        println!("wall_time_s     {:.3}", result.wall_time);
    }
    Ok(())
}

fn emit(records: &[OutputRecord], format: OutputFormat, output: &OutputArgs) -> Result<()> {
    let timestamp = !output.no_timestamp;
    match &output.out {
        Some(path) => {
            let mut file = fs::File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            write_records(records, format, timestamp, &mut file)?;
        }
        None => {
            let stdout = std::io::stdout();
            write_records(records, format, timestamp, &mut stdout.lock())?;
        }
    }
    if let Some(script_path) = &output.plot_script {
        let data_name = output
            .out
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "data.csv".to_string());
        let script = emit_plot_script(&data_name, &[PlotCurve::Energies, PlotCurve::Responses]);
        let mut file = fs::File::create(script_path)
            .with_context(|| format!("cannot create {}", script_path.display()))?;
        file.write_all(script.as_bytes())?;
    }
    Ok(())
}

fn run_sweep_cmd(args: SweepArgs) -> Result<()> {
    let spec = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            toml::from_str::<SweepSpec>(&text)
                .with_context(|| format!("bad sweep config {}", path.display()))?
        }
        None => {
            let mode: SweepMode = args.mode.into();
            if mode == SweepMode::FixedFieldOccupation && args.fixed_n.is_empty() {
                bail!("fixed-field-occupation mode needs at least one --fixed-n");
            }
            SweepSpec {
                mode,
                params: SystemParams::new(args.k, args.g, args.kappa, 0.0, 0.0)?,
                grid: args.grid,
                fixed_n: args.fixed_n.clone(),
                freqs: ReferenceFrequencies {
                    omega_ref: args.omega_ref,
                    ..ReferenceFrequencies::default()
                },
                solver: args.solver.config(),
                fd_step: args.fd_step,
                format: args.output.format.into(),
                out: args.output.out.clone(),
            }
        }
    };
    spec.validate()?;
    let records = run_sweep(&spec)?;
    let format = spec.format;
    let mut output = args.output;
    if output.out.is_none() {
        output.out = spec.out.clone();
    }
    emit(&records, format, &output)
}

fn run_preset(args: PresetArgs) -> Result<()> {
    let mut spec = presets::spec(args.name);
    spec.solver = args.solver.config();
    spec.format = args.output.format.into();
    let records = run_sweep(&spec)?;
    emit(&records, spec.format, &args.output)
}

fn run_scan_kappa(args: ScanKappaArgs) -> Result<()> {
    let config = args.solver.config();
    let grid = args.grid.values();
    let couplings = if args.g.is_empty() {
        let nominal = if args.k == 1 { 1.0 } else { 0.2 };
        crate::kappa::coupling_set(nominal)
    } else {
        args.g.clone()
    };
    let mut best = KappaThreshold {
        threshold: 0.0,
        found: false,
        saturated: false,
    };
    for &g in &couplings {
        let t = kappa_threshold_scan(args.k, g, &grid, &config)?;
        println!(
            "# g = {g:.4}: threshold = {:.3}{}{}",
            t.threshold,
            if t.found { "" } else { " (no cooling in grid)" },
            if t.saturated { " (lower bound)" } else { "" },
        );
        if t.found && (!best.found || t.threshold > best.threshold) {
            best = t;
        }
    }
    println!(
        "largest kappa/gamma with a field cooling region: {:.3}{}",
        best.threshold,
        if best.found { "" } else { " (none found)" }
    );
    Ok(())
}

fn run_oracle(args: OracleArgs) -> Result<()> {
    let config = args.solver.config();
    let freqs = ReferenceFrequencies::default();
    let params = SystemParams::new(0, args.g, 0.0, 0.0, 0.1)?;
    println!("m_th,c_atom_numeric,c_atom_analytic,ratio");
    for m in args.grid.values() {
        let numeric = response_atomic_fixed_n(&params, m, 0.0, &freqs, 1e-5, &config)?;
        let analytic = carrier_response_analytic(m, args.g);
        println!(
            "{:.6},{:.10e},{:.10e},{:.6}",
            m,
            numeric,
            analytic,
            numeric / analytic
        );
    }
    Ok(())
}
