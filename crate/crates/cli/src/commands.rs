//! Implementations of the subcommands.

use crate::formats::{load_coeff_map, load_state_file, parse_grid, StateFile};
use crate::output::{fmt_f64, print_stdout, write_artifact, CsvTable, RunMeta};
use anyhow::{anyhow, bail, Context, Result};
use nlslab_core::coeffs::{
    b_from_a_with_window, conserved_report, CoefficientState, LineData,
};
use nlslab_core::field::u_grid;
use nlslab_core::frame::{
    cascade_diagnostic, curve_from_tangent, transport_x, CascadeOpts, Frame, Grid1,
};
use nlslab_core::gauss::{gauss_sum, GaussSumParams};
use nlslab_core::integrate::{integrate_opts, IntegrateOpts};
use nlslab_core::rogue::{
    build_bump_coefficients, run_linear, run_nonlinear, suggest_bump_cut, RogueConfig,
    RogueNonlinearOpts,
};
use nlslab_core::talbot::{
    evolve_direct_rational, revival_renorm, talbot_closed_form_grid, PeriodicSpectrum,
    RationalTime,
};
use nlslab_core::util::principal_angle;
use nlslab_core::C64;
use serde_json::json;
use std::path::PathBuf;

pub fn gauss(p: i64, m: i64, q: u64, seed: Option<u64>) -> Result<()> {
    let meta = RunMeta::new("gauss", json!({"p": p, "m": m, "q": q}), seed);
    let sum = gauss_sum(GaussSumParams::new(-p, m, q)?)?;
    let phase = principal_angle(sum.im.atan2(sum.re));
    let mut table = CsvTable::new(&meta, &[], &["re", "im", "modulus", "phase"]);
    table.row(&[sum.re, sum.im, sum.norm(), phase]);
    print_stdout(&table.into_string())
}

pub fn talbot(p: u64, q: u64, spectrum: &PathBuf, grid: usize, seed: Option<u64>) -> Result<()> {
    if grid < 2 {
        bail!(nlslab_core::Error::invalid("grid needs at least 2 points"));
    }
    let coeffs = load_coeff_map(spectrum)?;
    let spec = PeriodicSpectrum::new(coeffs);
    let t = RationalTime::new(p, q)?;
    let meta = RunMeta::new(
        "talbot",
        json!({"p": p, "q": q, "spectrum": spectrum.display().to_string(), "grid": grid}),
        seed,
    );
    let xs: Vec<f64> = (0..grid).map(|i| -0.5 + i as f64 / grid as f64).collect();
    let closed = talbot_closed_form_grid(&spec, &t, &xs)?;
    let factor = revival_renorm(&t);
    let oracle = evolve_direct_rational(&spec, &t, &xs);
    let mut table = CsvTable::new(
        &meta,
        &[format!("revival renormalization: {}", fmt_f64(factor))],
        &["x", "closed_modulus", "oracle_modulus"],
    );
    for (i, &x) in xs.iter().enumerate() {
        table.row(&[x, closed[i], factor * oracle[i].norm()]);
    }
    print_stdout(&table.into_string())
}

pub struct EvolveArgs {
    pub data: PathBuf,
    pub t0: f64,
    pub t1: f64,
    pub tol: f64,
    pub line: bool,
    pub n_max: Option<i64>,
    pub period: Option<usize>,
    pub snapshots: usize,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

pub fn evolve(args: EvolveArgs) -> Result<()> {
    if !(args.t0 > 0.0 && args.t1 > 0.0) {
        bail!(nlslab_core::Error::invalid("t0 and t1 must be positive"));
    }
    let coeffs = load_coeff_map(&args.data)?;
    let state0 = if args.line {
        let data = LineData::new(coeffs);
        let n = args.n_max.unwrap_or_else(|| data.max_index());
        b_from_a_with_window(&data, args.t0, n)?
    } else {
        let period = args
            .period
            .ok_or_else(|| anyhow!(nlslab_core::Error::invalid("periodic mode needs --period")))?;
        CoefficientState::periodic(1.0 / args.t0, period, &coeffs)?
    };
    let meta = RunMeta::new(
        "evolve",
        json!({
            "data": args.data.display().to_string(),
            "t0": args.t0, "t1": args.t1, "tol": args.tol,
            "mode": if args.line { "line" } else { "periodic" },
            "n_max": args.n_max, "period": args.period,
            "snapshots": args.snapshots,
        }),
        args.seed,
    );

    let k = args.snapshots.max(2);
    let (s0, s1) = ((1.0 / args.t0).ln(), (1.0 / args.t1).ln());
    let opts = IntegrateOpts {
        tol: args.tol,
        ..Default::default()
    };
    let mut state = state0;
    let mut snapshots = Vec::with_capacity(k);
    let mut table = CsvTable::new(
        &meta,
        &[],
        &["tau", "cl1", "cl2", "cl3", "moment2", "energy", "m0"],
    );
    let push_row = |report: &nlslab_core::ConservedReport, table: &mut CsvTable| {
        let cells: Vec<String> = [
            Some(report.tau),
            Some(report.cl1),
            report.cl2,
            report.cl3,
            report.moment2,
            report.energy,
            Some(report.m0),
        ]
        .iter()
        .map(|v| v.map(fmt_f64).unwrap_or_default())
        .collect();
        table.row_cells(&cells);
    };
    snapshots.push(state.clone());
    push_row(&conserved_report(&state), &mut table);
    for i in 1..k {
        let sigma = s0 + (s1 - s0) * i as f64 / (k - 1) as f64;
        state = integrate_opts(&state, sigma.exp(), opts)?.state;
        snapshots.push(state.clone());
        push_row(&conserved_report(&state), &mut table);
    }

    let trajectory = json!({
        "meta": meta.json_meta(),
        "snapshots": snapshots,
    });
    let p1 = write_artifact(
        &args.out,
        "trajectory.json",
        &serde_json::to_string_pretty(&trajectory)?,
    )?;
    let p2 = write_artifact(&args.out, "conserved.csv", &table.into_string())?;
    println!("{}", p1.display());
    println!("{}", p2.display());
    Ok(())
}

pub fn field(state_path: &PathBuf, t: Option<f64>, grid: &str, seed: Option<u64>) -> Result<()> {
    let xs = parse_grid(grid)?;
    let state = match load_state_file(state_path)? {
        StateFile::State(state) => {
            if let Some(t) = t {
                if (t * state.tau() - 1.0).abs() > 1e-9 {
                    bail!(nlslab_core::Error::invalid(format!(
                        "--t {} disagrees with the state's time {}",
                        t,
                        1.0 / state.tau()
                    )));
                }
            }
            state
        }
        StateFile::Map(map) => {
            let t = t.ok_or_else(|| {
                anyhow!(nlslab_core::Error::invalid(
                    "a bare coefficient map needs --t to fix the time",
                ))
            })?;
            if !(t > 0.0) {
                bail!(nlslab_core::Error::invalid("t must be positive"));
            }
            let n = map.keys().map(|j| j.abs()).max().unwrap_or(0);
            CoefficientState::line(1.0 / t, n, &map)?
        }
    };
    let meta = RunMeta::new(
        "field",
        json!({
            "state": state_path.display().to_string(),
            "t": 1.0 / state.tau(),
            "grid": grid,
        }),
        seed,
    );
    let values = u_grid(&state, &xs)?;
    let mut table = CsvTable::new(&meta, &[], &["x", "re_u", "im_u", "abs_u"]);
    for (&x, v) in xs.iter().zip(&values) {
        table.row(&[x, v.re, v.im, v.norm()]);
    }
    print_stdout(&table.into_string())
}

pub struct FilamentArgs {
    pub data: PathBuf,
    pub t: f64,
    pub grid: String,
    pub tau_start: Option<f64>,
    pub tol: f64,
    pub n_max: Option<i64>,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

pub fn filament(args: FilamentArgs) -> Result<()> {
    if !(args.t > 0.0) {
        bail!(nlslab_core::Error::invalid("t must be positive"));
    }
    let xs = parse_grid(&args.grid)?;
    let coeffs = load_coeff_map(&args.data)?;
    let data = LineData::new(coeffs);
    let n = args.n_max.unwrap_or_else(|| data.max_index() + 4);
    let tau = 1.0 / args.t;
    let tau_start = args.tau_start.unwrap_or(8.0 * tau);
    if tau_start <= tau {
        bail!(nlslab_core::Error::invalid("tau_start must exceed 1/t"));
    }
    let meta = RunMeta::new(
        "filament",
        json!({
            "data": args.data.display().to_string(),
            "t": args.t, "grid": args.grid, "tau_start": tau_start,
            "tol": args.tol, "n_max": n,
        }),
        args.seed,
    );

    let state0 = b_from_a_with_window(&data, 1.0 / tau_start, n)?;
    let opts = IntegrateOpts {
        tol: args.tol,
        ..Default::default()
    };
    let state = integrate_opts(&state0, tau, opts)?.state;
    let u = u_grid(&state, &xs)?;
    // the CSV/xyz grids are uniform by construction of parse_grid
    let grid = Grid1 {
        x0: xs[0],
        h: xs[1] - xs[0],
        n: xs.len(),
    };
    let field = transport_x(grid, &u, &Frame::standard(), args.t)?;
    let curve = curve_from_tangent(&field, nlslab_core::frame::Vector3::zeros());

    let mut table = CsvTable::new(
        &meta,
        &[],
        &["x", "t1", "t2", "t3", "chi1", "chi2", "chi3"],
    );
    let mut xyz = String::new();
    for (i, &x) in xs.iter().enumerate() {
        let t_vec = field.frames[i].t;
        let p = curve.points[i];
        table.row(&[x, t_vec.x, t_vec.y, t_vec.z, p.x, p.y, p.z]);
        xyz.push_str(&format!(
            "{} {} {}\n",
            fmt_f64(p.x),
            fmt_f64(p.y),
            fmt_f64(p.z)
        ));
    }
    let p1 = write_artifact(&args.out, "filament.csv", &table.into_string())?;
    let p2 = write_artifact(&args.out, "filament.xyz", &xyz)?;
    println!("{}", p1.display());
    println!("{}", p2.display());
    Ok(())
}

pub struct CascadeArgs {
    pub tmin: f64,
    pub tmax: f64,
    pub steps: usize,
    pub amplitude: f64,
    pub n_window: i64,
    pub tau_start: Option<f64>,
    pub tol: f64,
    pub seed: Option<u64>,
}

pub fn cascade(args: CascadeArgs) -> Result<()> {
    if !(args.tmin > 0.0 && args.tmax > args.tmin) {
        bail!(nlslab_core::Error::invalid("need 0 < tmin < tmax"));
    }
    if args.steps < 3 {
        bail!(nlslab_core::Error::invalid("need at least 3 steps"));
    }
    let meta = RunMeta::new(
        "cascade",
        json!({
            "tmin": args.tmin, "tmax": args.tmax, "steps": args.steps,
            "amplitude": args.amplitude, "n_window": args.n_window,
            "tau_start": args.tau_start, "tol": args.tol,
        }),
        args.seed,
    );
    let t_list: Vec<f64> = (0..args.steps)
        .map(|i| {
            args.tmax * (args.tmin / args.tmax).powf(i as f64 / (args.steps - 1) as f64)
        })
        .collect();
    let data = LineData::from_pairs([
        (1i64, C64::new(args.amplitude, 0.0)),
        (-1, C64::new(args.amplitude, 0.0)),
    ]);
    let opts = CascadeOpts {
        n_window: args.n_window,
        tau_start: args.tau_start,
        tol: args.tol,
        ..Default::default()
    };
    let report = cascade_diagnostic(&data, &t_list, &opts)?;
    let mut table = CsvTable::new(
        &meta,
        &[format!(
            "slope vs |log t|: {} +- {}",
            fmt_f64(report.slope),
            fmt_f64(report.slope_sigma)
        )],
        &["t", "sup", "band_center", "band_halfwidth", "window_halfwidth"],
    );
    for row in &report.rows {
        table.row(&[
            row.t,
            row.sup,
            row.band_center,
            row.band_halfwidth,
            row.window_halfwidth,
        ]);
    }
    print_stdout(&table.into_string())
}

pub struct RogueArgs {
    pub config: PathBuf,
    pub k_max: Option<u64>,
    pub nonlinear: bool,
    pub tol: f64,
    pub l1_rescale: Option<f64>,
    pub tau_start: Option<f64>,
    pub ode_window: Option<i64>,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

pub fn rogue(args: RogueArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let cfg: RogueConfig = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a valid config", args.config.display()))?;
    cfg.validate()?;
    let k_max = match args.k_max {
        Some(k) => k,
        None => suggest_bump_cut(cfg.eta, cfg.p, cfg.beta, &cfg.bump)?,
    };
    let spectrum = build_bump_coefficients(&cfg, k_max)?;
    let meta = RunMeta::new(
        "rogue",
        json!({
            "config": serde_json::to_value(cfg)?,
            "k_max": k_max,
            "nonlinear": args.nonlinear,
            "tol": args.tol,
            "l1_rescale": args.l1_rescale,
            "tau_start": args.tau_start,
            "ode_window": args.ode_window,
        }),
        args.seed,
    );

    let linear = run_linear(&cfg, &spectrum)?;
    let dichotomy = linear.report.amp_at_0_tilde >= 2.5 * linear.report.amp_max_tpq;
    let mut report_json = json!({
        "meta": meta.json_meta(),
        "linear": linear.report,
        "dichotomy": dichotomy,
        "oracle_mismatch_rel": linear.oracle_mismatch_rel,
        "spectrum_l1": spectrum.l1_norm(),
        "spectrum_l2s": spectrum.l2s_norm(cfg.s),
    });

    if args.nonlinear {
        let working = match args.l1_rescale {
            Some(target) => spectrum.scaled(target / spectrum.l1_norm()),
            None => spectrum.clone(),
        };
        let defaults = RogueNonlinearOpts::default();
        let opts = RogueNonlinearOpts {
            tau_start: args.tau_start.unwrap_or(defaults.tau_start),
            ode_window: args.ode_window.unwrap_or(defaults.ode_window),
        };
        let nl = run_nonlinear(&cfg, &working, args.tol, &opts)?;
        let nl_dichotomy = nl.nonlinear.amp_at_0_tilde >= 2.5 * nl.nonlinear.amp_max_tpq;
        report_json["nonlinear"] = serde_json::to_value(&nl)?;
        report_json["nonlinear_dichotomy"] = json!(nl_dichotomy);
    }

    let mut fine = CsvTable::new(&meta, &[], &["x", "closed_modulus", "oracle_modulus"]);
    for p in &linear.profile_tpq {
        fine.row(&[p.x, p.closed, p.oracle]);
    }
    let mut coarse = CsvTable::new(&meta, &[], &["x", "closed_modulus", "oracle_modulus"]);
    for p in &linear.profile_tilde {
        coarse.row(&[p.x, p.closed, p.oracle]);
    }

    let p1 = write_artifact(
        &args.out,
        "rogue_report.json",
        &serde_json::to_string_pretty(&report_json)?,
    )?;
    let p2 = write_artifact(&args.out, "profile_fine.csv", &fine.into_string())?;
    let p3 = write_artifact(&args.out, "profile_coarse.csv", &coarse.into_string())?;
    println!("{}", p1.display());
    println!("{}", p2.display());
    println!("{}", p3.display());
    Ok(())
}
