// Temporary calibration probe; not part of the deliverable surface.
use nlslab_core::coeffs::{
    b_from_a_with_window, cl1, cl2, conserved_report, energy, energy_flux, CoefficientState,
    LineData,
};
use nlslab_core::field::{angle_from_c, c_from_angle, self_similar};
use nlslab_core::frame::{
    cascade_diagnostic, corner_angle_from_tangents, outer_tangent_average, transport_x,
    CascadeOpts, Frame, Grid1,
};
use nlslab_core::integrate::{integrate_opts, IntegrateOpts};
use nlslab_core::C64;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    match which.as_str() {
        "corner" => corner(),
        "drift" => drift(),
        "energy" => energy_probe(),
        "cascade" => cascade(),
        "cascade2" => cascade_linear(),
        _ => println!("usage: devprobe corner|drift|energy|cascade|cascade2"),
    }
}

fn cascade_linear() {
    // linear-coefficient pipeline: band sup as a function of the window
    // half-width at fixed t, then vs t with the window scaled like 1/sqrt(t)
    use nlslab_core::field::u_grid;
    use nlslab_core::frame::tangent_derivative_power;
    let a = 0.2;
    let data = LineData::from_pairs([(1i64, C64::new(a, 0.0)), (-1, C64::new(a, 0.0))]);
    let measure = |t: f64, x_half: f64| -> f64 {
        // resolve the fastest chirp (rate x_half / 2t) with ~12 samples/rad
        let h_target = (2.0 * t / x_half / 12.0).min(0.01);
        let n = ((2.0 * x_half / h_target) as usize).next_power_of_two();
        let grid = Grid1::half_open(-x_half, x_half, n).unwrap();
        let st = b_from_a_with_window(&data, t, 1).unwrap();
        let u = u_grid(&st, &grid.xs()).unwrap();
        let field = transport_x(grid, &u, &Frame::standard(), t).unwrap();
        let (power, dxi) = tangent_derivative_power(&field, &u, 4).unwrap();
        let center = 1.0 / t;
        let half = t.sqrt();
        let lo = ((center - half) / dxi).floor().max(0.0) as usize;
        let hi = (((center + half) / dxi).ceil() as usize).min(power.len() - 1);
        power[lo..=hi].iter().fold(0.0f64, |m, &p| m.max(p))
    };
    println!("--- sup vs window at fixed t ---");
    for t in [0.01, 0.003] {
        for x_half in [4.0, 8.0, 16.0, 32.0, 64.0, 128.0] {
            let sup = measure(t, x_half);
            println!("t={t}: X={x_half}: sup={sup:.4e}");
        }
    }
    println!("--- sup vs t with X = 4/sqrt(t) ---");
    for i in 0..13 {
        let t = 0.2 * (0.002f64 / 0.2).powf(i as f64 / 12.0);
        let sup = measure(t, 4.0 / t.sqrt());
        println!("t={t:.5} |log t|={:.2} X={:.1} sup={sup:.4e}", t.ln().abs(), 4.0 / t.sqrt());
    }
}

fn corner() {
    // measure the tangent geometry of the self-similar field at small t
    for theta_target in [PI / 3.0, PI / 4.0, 1.2, 0.6] {
        let c0 = c_from_angle(theta_target).unwrap();
        for t in [1e-2, 1e-3] {
            for (x_half, n) in [(1.0, 1 << 16), (2.0, 1 << 17)] {
                let grid = Grid1::half_open(-x_half, x_half, n).unwrap();
                let u: Vec<C64> = (0..n)
                    .map(|i| self_similar(c0, grid.x(i), t).unwrap())
                    .collect();
                let field = transport_x(grid, &u, &Frame::standard(), t).unwrap();
                let (tm, tp) = outer_tangent_average(&field, 0.1);
                let phi = tm.dot(&tp).clamp(-1.0, 1.0).acos();
                let theta_est = corner_angle_from_tangents(tm, tp);
                println!(
                    "theta*={theta_target:.6} c0={c0:.4} t={t:.0e} X={x_half} n={n}: phi={phi:.6} theta_est={theta_est:.6} err={:+.3e}  alt(pi/2-phi)={:.6} alt(phi/2)={:.6}",
                    theta_est - theta_target,
                    PI / 2.0 - phi,
                    phi / 2.0,
                );
            }
        }
        println!(
            "   angle_from_c(c0) = {:.6}",
            angle_from_c(c_from_angle(theta_target).unwrap()).unwrap()
        );
    }
}

fn drift() {
    // one criterion-3-style trajectory: N=16, random-ish small data
    let n = 16i64;
    let coeffs: BTreeMap<i64, C64> = (-n..=n)
        .map(|j| {
            let a = 0.012 * ((1.7 * j as f64 + 0.3).sin());
            let b = 0.011 * ((0.9 * j as f64 - 1.1).cos());
            (j, C64::new(a, b))
        })
        .collect();
    let data = LineData::new(coeffs);
    println!("l1 = {:.4}", data.l1_norm());
    let st = b_from_a_with_window(&data, 1.0, n).unwrap();
    println!("cl1 = {:.6e}, cl2 = {:.6e}", cl1(&st), cl2(&st).unwrap());
    for tol in [1e-8, 1e-10] {
        let t0 = Instant::now();
        let out = integrate_opts(
            &st,
            10.0,
            IntegrateOpts {
                tol,
                ..Default::default()
            },
        )
        .unwrap();
        println!(
            "tol={tol:.0e}: {:?} steps acc, {} rej, {} rhs, cl1 drift {:.3e}, cl2 drift {:.3e}, wall {:.2}s",
            out.stats.steps_accepted,
            out.stats.steps_rejected,
            out.stats.rhs_evals,
            out.stats.cl1_drift_rel,
            out.stats.cl2_drift_abs.unwrap(),
            t0.elapsed().as_secs_f64()
        );
    }
}

fn energy_probe() {
    // does dE/dtau = flux hold along the truncated flow?
    let coeffs: BTreeMap<i64, C64> = (-4i64..=4)
        .map(|j| {
            (
                j,
                C64::new(
                    0.11 * ((1.3 * j as f64).sin()),
                    0.10 * ((0.7 * j as f64 + 0.2).cos()),
                ),
            )
        })
        .collect();
    let st = CoefficientState::line(1.5, 16, &coeffs).unwrap();
    let tight = IntegrateOpts {
        tol: 1e-12,
        ..Default::default()
    };
    let flux = energy_flux(&st).unwrap();
    println!("E = {:.8e}, flux = {:.6e}", energy(&st).unwrap(), flux);
    for h in [0.02, 0.01, 0.005, 0.0025] {
        let plus = integrate_opts(&st, st.tau() + h, tight).unwrap().state;
        let minus = integrate_opts(&st, st.tau() - h, tight).unwrap().state;
        let fd = (energy(&plus).unwrap() - energy(&minus).unwrap()) / (2.0 * h);
        println!("h={h}: fd={fd:.8e} resid={:+.3e} rel={:.3e}", fd - flux, (fd - flux).abs() / flux.abs());
    }
    let _ = conserved_report(&st);
}

fn cascade() {
    let a: f64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.2);
    let data = LineData::from_pairs([(1i64, C64::new(a, 0.0)), (-1, C64::new(a, 0.0))]);
    let t0 = Instant::now();
    // fine geometric grid to see the beat structure
    let nt = 17;
    let t_list: Vec<f64> = (0..nt)
        .map(|i| 0.2 * (0.01f64 / 0.2).powf(i as f64 / (nt - 1) as f64))
        .collect();
    let report = cascade_diagnostic(&data, &t_list, &CascadeOpts::default()).unwrap();
    for row in &report.rows {
        println!(
            "t={:.4}: sup={:.6e}  |log t|={:.3}",
            row.t,
            row.sup,
            row.t.ln().abs()
        );
    }
    println!(
        "slope = {:.4e} +- {:.4e}  (z = {:.2}), wall {:.1}s",
        report.slope,
        report.slope_sigma,
        report.slope / report.slope_sigma,
        t0.elapsed().as_secs_f64()
    );

    // amplitudes of the integrated coefficients at the smallest t
    let st = b_from_a_with_window(&data, 1.0 / 400.0, 12).unwrap();
    let out = integrate_opts(
        &st,
        100.0,
        IntegrateOpts {
            tol: 1e-8,
            ..Default::default()
        },
    )
    .unwrap();
    for (j, b) in out.state.iter() {
        if b.norm() > 1e-9 {
            println!("  |B_{j}| = {:.4e}", b.norm());
        }
    }
}
