//! The `galerkin`, `bench-inequalities` and `mms` subcommands.

use crate::output::fmt;
use std::io::Write as _;
use std::path::Path;
use vfb_core::bench::{self, HardyVariant, RatioReport, TestFamily};
use vfb_core::galerkin;
use vfb_core::grid::make_grid;
use vfb_core::initial::{unit_mass_amplitude, InitialData, VelocityKind};
use vfb_core::mms::{observed_order, run_mms, ManufacturedSolution};
use vfb_core::solver::SolverConfig;

/// Spectral-vs-finite-volume cross validation on the frozen-identity
/// linearized problem. Exit 0 iff the discrepancy stays below `tol` and
/// the spectral error decreases monotonically over the mode sweep.
pub fn galerkin_cmd(alpha: f64, n_modes: usize, fv_n: usize, t_end: f64, tol: f64) -> i32 {
    if !(alpha > 0.0 && alpha <= 1.0) {
        eprintln!("alpha must lie in (0,1], got {alpha}");
        return 2;
    }
    let data = InitialData::new(
        alpha,
        unit_mass_amplitude(alpha),
        VelocityKind::Bump { center: 0.5, radius: 0.25, amplitude: 1.0 },
        make_grid(fv_n),
    );
    let fv = SolverConfig {
        n: fv_n,
        dt: 5e-5,
        t_end,
        theta: 0.5,
        ..SolverConfig::default()
    };
    let mut sweep = Vec::new();
    let mut modes = Vec::new();
    let mut m = n_modes;
    while m >= 8 {
        modes.push(m);
        m /= 2;
    }
    modes.reverse();
    for &nm in &modes {
        let cv = galerkin::cross_validate(&data, &|_, _| 1.0, false, nm, &fv, 2e-5, 500);
        println!("modes {nm:3}  weighted-L2 discrepancy {:.6e}", cv.discrepancy);
        sweep.push(cv.discrepancy);
    }
    let final_disc = *sweep.last().unwrap();
    let monotone = sweep.windows(2).all(|w| w[1] < w[0]);
    println!(
        "final discrepancy {:.6e} (tolerance {:.1e}); spectral sweep monotone: {monotone}",
        final_disc, tol
    );
    if final_disc <= tol && monotone { 0 } else { 1 }
}

fn print_report(f: &mut dyn std::io::Write, r: &RatioReport) -> std::io::Result<()> {
    writeln!(
        f,
        "{},{},{},{},{},{},{}",
        r.case,
        r.params,
        fmt(r.max_ratio),
        r.argmax,
        fmt(r.ratio_at_n),
        fmt(r.ratio_at_2n),
        if r.stable { "stable" } else { "UNSTABLE" }
    )
}

/// The default inequality suite. Exit 0 iff every case is finite and
/// refinement-stable.
pub fn bench_cmd(n: usize, report_path: Option<&Path>) -> i32 {
    let grid = make_grid(n);
    let data = InitialData::new(1.0, 6.0, VelocityKind::Zero, grid.clone());
    let poly = TestFamily::Polynomial { max_degree: 4 };
    let trig = TestFamily::Trig { max_freq: 3 };
    let bumps = TestFamily::Bump {
        params: vec![(0.5, 0.25, 1.0), (0.3, 0.15, 0.7), (0.7, 0.2, -0.5)],
    };
    let random = TestFamily::RandomSmooth { seed: 7, count: 6 };
    let families: [(&str, &TestFamily); 4] =
        [("poly", &poly), ("trig", &trig), ("bump", &bumps), ("random", &random)];

    let mut reports: Vec<RatioReport> = Vec::new();
    for (fname, fam) in families {
        for k in [-0.5, 0.0, 1.0, 2.0] {
            let mut r = bench::gn_check(k, fam, &grid).expect("k > -1 by construction");
            r.params = format!("{},family={fname}", r.params);
            reports.push(r);
        }
        for k in [-0.5, 0.0, 1.0] {
            let mut r = bench::hardy_check(HardyVariant::A7 { k }, fam, &grid, true).unwrap();
            r.params = format!("{},family={fname}", r.params);
            reports.push(r);
        }
        let mut r =
            bench::hardy_check(HardyVariant::A6 { k: 0.0, eps: 0.5 }, fam, &grid, true).unwrap();
        r.params = format!("{},family={fname}", r.params);
        reports.push(r);
        let mut r = bench::hardy_check(HardyVariant::A8 { k: 1.0 }, fam, &grid, true).unwrap();
        r.params = format!("{},family={fname}", r.params);
        reports.push(r);
        for (s, kappa) in [(1.0, 2.0), (0.75, 1.0), (1.5, 2.0)] {
            let mut r = bench::embedding_check(s, kappa, s, fam, &data).unwrap();
            r.params = format!("{},family={fname}", r.params);
            reports.push(r);
        }
        let mut r = bench::sobolev_check(fam, &grid);
        r.params = format!("family={fname}");
        reports.push(r);
    }

    let mut all_stable = true;
    let mut buf: Vec<u8> = Vec::new();
    writeln!(buf, "case,params,max_ratio,argmax,ratio_at_n,ratio_at_2n,stable").unwrap();
    for r in &reports {
        print_report(&mut buf, r).unwrap();
        all_stable &= r.stable && r.max_ratio.is_finite();
        for note in &r.notes {
            writeln!(buf, "# note[{}]: {}", r.case, note).unwrap();
        }
    }
    print!("{}", String::from_utf8_lossy(&buf));
    if let Some(p) = report_path {
        if let Err(e) = std::fs::write(p, &buf) {
            eprintln!("cannot write report: {e}");
            return 3;
        }
    }
    println!("# {} cases, all stable: {all_stable}", reports.len());
    if all_stable { 0 } else { 1 }
}

/// Manufactured-solution convergence study. Prints the observed orders and
/// runs the wrong-forcing negative control.
pub fn mms_cmd(t_end: f64) -> i32 {
    let ms = ManufacturedSolution::new(0.5);
    // temporal order: backward Euler on a fine fixed grid
    let mut terrs = Vec::new();
    let d = InitialData::new(1.0, 6.0, VelocityKind::Zero, make_grid(401));
    for k in 0..3 {
        let dt = 8e-3 / (1 << k) as f64;
        let cfg = SolverConfig { n: 401, dt, t_end, theta: 1.0, ..SolverConfig::default() };
        terrs.push(run_mms(&d, &cfg, &ms, false));
    }
    let t_order = observed_order(&terrs);
    println!("temporal errors {terrs:?}");
    println!("observed temporal order (theta = 1): {t_order:.3}");

    // spatial order: midpoint scheme with dt ~ h
    let mut serrs = Vec::new();
    for n in [51usize, 101, 201] {
        let d = InitialData::new(1.0, 6.0, VelocityKind::Zero, make_grid(n));
        let dt = 0.2 / (n - 1) as f64;
        let cfg = SolverConfig { n, dt, t_end, theta: 0.5, ..SolverConfig::default() };
        serrs.push(run_mms(&d, &cfg, &ms, false));
    }
    let s_order = observed_order(&serrs);
    println!("spatial errors {serrs:?}");
    println!("observed spatial order (theta = 1/2, dt ~ h): {s_order:.3}");

    // negative control
    let mut werrs = Vec::new();
    for n in [51usize, 101, 201] {
        let d = InitialData::new(1.0, 6.0, VelocityKind::Zero, make_grid(n));
        let dt = 0.2 / (n - 1) as f64;
        let cfg = SolverConfig { n, dt, t_end, theta: 0.5, ..SolverConfig::default() };
        werrs.push(run_mms(&d, &cfg, &ms, true));
    }
    let w_order = observed_order(&werrs);
    let control_detected = w_order < 0.5;
    println!("wrong-forcing errors {werrs:?}");
    println!("negative control detected (order {w_order:.3} < 0.5): {control_detected}");

    if t_order >= 0.9 && s_order >= 1.8 && control_detected { 0 } else { 1 }
}
