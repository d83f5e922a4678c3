//! `nlslab`: experiment runner for the comb-data NLS laboratory.
//!
//! One subcommand per experiment; outputs are deterministic (no timestamps),
//! carry a config hash in their metadata header, and print floats with 17
//! significant digits so files round-trip exactly.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure.

mod commands;
mod formats;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nlslab",
    version,
    about = "Numerical laboratory for the 1d cubic NLS with Dirac-comb data"
)]
struct Cli {
    /// Output directory for commands that write files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Seed recorded in artifact metadata (reserved for randomized data
    /// generation; the built-in experiments are deterministic).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Line,
    Periodic,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the quadratic Gauss sum G(-p, m, q) = sum_l e^{2 pi i(-p l^2 + m l)/q};
    /// prints real, imaginary, modulus, phase as CSV.
    Gauss {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        m: i64,
        #[arg(long)]
        q: u64,
    },
    /// Revival of a concentrated spectrum at t = p/(2 pi q): closed-form
    /// modulus q^{-1/2}|u_hat(xi_x)| against the direct-sum oracle on a grid
    /// over one unit cell.
    Talbot {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        /// JSON map k -> [re, im] of spectrum coefficients.
        #[arg(long)]
        spectrum: PathBuf,
        /// Number of grid points across [-1/2, 1/2).
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
    /// Integrate the coefficient flow between two times, writing trajectory
    /// snapshots (JSON) and conserved quantities (CSV).
    Evolve {
        /// JSON map j -> [re, im]: line mode reads it as the t -> 0 data
        /// a_j; periodic mode as the coefficients B_j at t0.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        t0: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Line-mode coefficient window (defaults to the data support).
        #[arg(long)]
        n_max: Option<i64>,
        /// Periodic-mode period M (indices 0..M).
        #[arg(long)]
        period: Option<usize>,
        /// Number of output times, spaced uniformly in log tau.
        #[arg(long, default_value_t = 9)]
        snapshots: usize,
    },
    /// Reconstruct u(x, t) from a state file on a grid; prints CSV of
    /// x, Re u, Im u, |u|.
    Field {
        /// Full state file ({tau, mode, coeffs}) or a bare coefficient map
        /// (then --t is required).
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        t: Option<f64>,
        /// Grid specification x0:x1:n.
        #[arg(long)]
        grid: String,
    },
    /// Reconstruct the filament: integrate the coefficients to time t,
    /// transport the parallel frame, and write tangent + curve files.
    Filament {
        /// JSON map j -> [re, im] of the t -> 0 data a_j.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        t: f64,
        /// Grid specification x0:x1:n.
        #[arg(long)]
        grid: String,
        /// Slow time where the integration starts (remainders zeroed).
        #[arg(long)]
        tau_start: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        n_max: Option<i64>,
    },
    /// Windowed sup of |T_x^|^2 near xi = 1/t across a decreasing list of
    /// times, with the fitted slope against |log t|; prints CSV.
    Cascade {
        #[arg(long)]
        tmin: f64,
        #[arg(long)]
        tmax: f64,
        /// Number of times, geometric from tmax down to tmin.
        #[arg(long, default_value_t = 5)]
        steps: usize,
        /// Two-corner datum a_{-1} = a_{+1}.
        #[arg(long, default_value_t = 0.2)]
        amplitude: f64,
        #[arg(long, default_value_t = 12)]
        n_window: i64,
        #[arg(long)]
        tau_start: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Concentrated-bump experiment: small almost-periodic waves at the fine
    /// rational time, a localized tall structure at the coarse one. Writes a
    /// report (JSON) and profiles (CSV).
    Rogue {
        /// JSON file with the experiment parameters
        /// {eta, p, s, beta, q, p_tilde, q_tilde}.
        #[arg(long)]
        config: PathBuf,
        /// Spectrum cut |k| <= k_max (auto-suggested when omitted).
        #[arg(long)]
        k_max: Option<u64>,
        /// Also integrate the coefficient flow and report the dressed field.
        #[arg(long)]
        nonlinear: bool,
        /// Local tolerance of the nonlinear integration.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Rescale the spectrum to this l1 mass before the nonlinear run.
        #[arg(long)]
        l1_rescale: Option<f64>,
        /// Slow time where the remainders are zeroed.
        #[arg(long)]
        tau_start: Option<f64>,
        /// Coefficient window carried by the dynamics.
        #[arg(long)]
        ode_window: Option<i64>,
    },
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let out = cli.out;
    let seed = cli.seed;
    match cli.command {
        Command::Gauss { p, m, q } => commands::gauss(p, m, q, seed),
        Command::Talbot {
            p,
            q,
            spectrum,
            grid,
        } => commands::talbot(p, q, &spectrum, grid, seed),
        Command::Evolve {
            data,
            t0,
            t1,
            tol,
            mode,
            n_max,
            period,
            snapshots,
        } => commands::evolve(commands::EvolveArgs {
            data,
            t0,
            t1,
            tol,
            line: matches!(mode, ModeArg::Line),
            n_max,
            period,
            snapshots,
            out,
            seed,
        }),
        Command::Field { state, t, grid } => commands::field(&state, t, &grid, seed),
        Command::Filament {
            data,
            t,
            grid,
            tau_start,
            tol,
            n_max,
        } => commands::filament(commands::FilamentArgs {
            data,
            t,
            grid,
            tau_start,
            tol,
            n_max,
            out,
            seed,
        }),
        Command::Cascade {
            tmin,
            tmax,
            steps,
            amplitude,
            n_window,
            tau_start,
            tol,
        } => commands::cascade(commands::CascadeArgs {
            tmin,
            tmax,
            steps,
            amplitude,
            n_window,
            tau_start,
            tol,
            seed,
        }),
        Command::Rogue {
            config,
            k_max,
            nonlinear,
            tol,
            l1_rescale,
            tau_start,
            ode_window,
        } => commands::rogue(commands::RogueArgs {
            config,
            k_max,
            nonlinear,
            tol,
            l1_rescale,
            tau_start,
            ode_window,
            out,
            seed,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<nlslab_core::Error>() {
                Some(core_err) if !core_err.is_validation() => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
