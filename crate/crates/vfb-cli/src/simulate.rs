//! The `simulate` and `reconstruct` subcommands: drive the solver, stream
//! diagnostics, emit snapshots and plots, evaluate the enabled checks.

use crate::config::{self, RunConfig};
use crate::output::{self, CheckOutcome, Metadata};
use std::path::{Path, PathBuf};
use vfb_core::diagnostics::{self, DiagnosticsRecord};
use vfb_core::eulerian;
use vfb_core::initial::InitialData;
use vfb_core::solver::{self, FluidState};

pub struct RunArtifacts {
    pub records: Vec<DiagnosticsRecord>,
    pub endpoint_metric_dev: f64,
}

fn metadata(cfg_echo: &str, data: &InitialData, cfg: &RunConfig) -> Metadata {
    Metadata {
        config_echo: cfg_echo.to_string(),
        extra: vec![
            ("alpha".into(), format!("{}", data.alpha)),
            ("profile_amplitude".into(), format!("{}", data.amplitude)),
            ("epsilon0".into(), format!("{}", data.epsilon0)),
            (
                "equivalence_constants".into(),
                format!("({:.6}, {:.6})", data.eq_constants.0, data.eq_constants.1),
            ),
            ("n".into(), format!("{}", cfg.solver.n)),
            ("h".into(), format!("{}", data.grid.h)),
            ("dt".into(), format!("{}", cfg.solver.dt)),
            ("theta".into(), format!("{}", cfg.solver.theta)),
        ],
    }
}

/// Run the solver, collecting records and snapshots. Returns exit code 3
/// territory as Err.
pub fn drive(
    cfg: &RunConfig,
    cfg_echo: &str,
    data: &InitialData,
    out_dir: &Path,
    write_snapshots: bool,
) -> Result<RunArtifacts, String> {
    let solver_cfg = config::solver_config(cfg);
    let meta = metadata(cfg_echo, data, cfg);
    std::fs::create_dir_all(out_dir).map_err(|e| format!("cannot create output dir: {e}"))?;

    let mut records: Vec<DiagnosticsRecord> = Vec::new();
    let mut prev: Option<FluidState> = None;
    let mut endpoint_dev = 0.0f64;
    let mut snap_times: Vec<f64> = cfg.output.snapshot_times.clone();
    snap_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut snap_idx = 0usize;
    let mut step_count = 0usize;
    let record_every = cfg.output.record_every;

    let mut snapshot_error: Option<String> = None;
    solver::run(data, &solver_cfg, |state, _report| {
        let n = data.grid.n;
        endpoint_dev = endpoint_dev
            .max((state.eta_x[0] - 1.0).abs())
            .max((state.eta_x[n - 1] - 1.0).abs());
        if step_count % record_every == 0 || state.t >= solver_cfg.t_end - 0.5 * solver_cfg.dt {
            records.push(diagnostics::record(prev.as_ref(), state, data));
        }
        // emit any snapshot whose time this step has just reached
        while snap_idx < snap_times.len()
            && state.t + 0.5 * solver_cfg.dt >= snap_times[snap_idx]
        {
            if write_snapshots {
                let snap = eulerian::reconstruct(state, data, cfg.output.eulerian_resolution);
                let name = format!("snapshot_t{:.6}.csv", snap_times[snap_idx]);
                if let Err(e) = output::write_snapshot(&out_dir.join(name), &meta, &snap) {
                    snapshot_error = Some(format!("snapshot write failed: {e}"));
                }
            }
            snap_idx += 1;
        }
        prev = Some(state.clone());
        step_count += 1;
    })
    .map_err(|e| format!("solver aborted: {e}"))?;
    if let Some(e) = snapshot_error {
        return Err(e);
    }
    Ok(RunArtifacts { records, endpoint_metric_dev: endpoint_dev })
}

/// Evaluate the enabled checks over the collected records.
pub fn evaluate_checks(
    cfg: &RunConfig,
    art: &RunArtifacts,
) -> Vec<CheckOutcome> {
    let r = &art.records;
    let c = &cfg.checks;
    let mut out = Vec::new();
    let first = &r[0];
    for name in &c.enabled {
        let oc = match name.as_str() {
            "momentum" => {
                let p0 = first.momentum;
                let scale = p0.abs().max(1e-14);
                let worst =
                    r.iter().map(|x| (x.momentum - p0).abs()).fold(0.0f64, f64::max) / scale;
                CheckOutcome {
                    name: name.clone(),
                    passed: worst <= c.momentum_tol,
                    value: worst,
                    threshold: c.momentum_tol,
                    note: "relative momentum drift".into(),
                }
            }
            "energy" => {
                let mut worst = f64::NEG_INFINITY;
                for k in 1..r.len() {
                    worst = worst.max(r[k].dissipative_energy - r[k - 1].dissipative_energy);
                }
                if !worst.is_finite() {
                    worst = 0.0; // single-record run: nothing to compare
                }
                CheckOutcome {
                    name: name.clone(),
                    passed: worst <= c.energy_slack,
                    value: worst,
                    threshold: c.energy_slack,
                    note: "max per-record energy increase (theta = 1 runs)".into(),
                }
            }
            "metric" => {
                let lo = r.iter().map(|x| x.eta_x_min).fold(f64::INFINITY, f64::min);
                let hi = r.iter().map(|x| x.eta_x_max).fold(0.0f64, f64::max);
                CheckOutcome {
                    name: name.clone(),
                    passed: lo >= c.metric_min && hi <= c.metric_max,
                    value: lo,
                    threshold: c.metric_min,
                    note: format!("min {lo:.4}, max {hi:.4} (bounds [{}, {}])", c.metric_min, c.metric_max),
                }
            }
            "endpoint_metric" => CheckOutcome {
                name: name.clone(),
                passed: art.endpoint_metric_dev <= c.endpoint_metric_tol,
                value: art.endpoint_metric_dev,
                threshold: c.endpoint_metric_tol,
                note: "max |eta_x - 1| on the boundary".into(),
            },
            "neumann" => {
                let worst = r.iter().map(|x| x.neumann_residual).fold(0.0f64, f64::max);
                CheckOutcome {
                    name: name.clone(),
                    passed: worst <= c.neumann_tol,
                    value: worst,
                    threshold: c.neumann_tol,
                    note: "max |U_x| on the boundary".into(),
                }
            }
            "slope" => {
                let q = r.len() / 4;
                let head: f64 =
                    r[..q.max(1)].iter().map(|x| x.slope_ratio).sum::<f64>() / q.max(1) as f64;
                let tail: f64 = r[r.len() - q.max(1)..].iter().map(|x| x.slope_ratio).sum::<f64>()
                    / q.max(1) as f64;
                CheckOutcome {
                    name: name.clone(),
                    passed: tail <= 2.0 * head,
                    value: tail / head.max(1e-300),
                    threshold: 2.0,
                    note: "last-quartile mean of |U_x|/d over first-quartile mean".into(),
                }
            }
            "kinetic_floor" => {
                let series: Vec<f64> = r.iter().map(|x| x.kinetic_energy).collect();
                match diagnostics::kinetic_floor_check(
                    first.momentum,
                    first.mass,
                    &series,
                    c.kinetic_floor_tol,
                ) {
                    Some((ok, margin)) => CheckOutcome {
                        name: name.clone(),
                        passed: ok,
                        value: margin,
                        threshold: -c.kinetic_floor_tol,
                        note: "min E_k - P(0)^2/(2 m(0))".into(),
                    },
                    None => CheckOutcome {
                        name: name.clone(),
                        passed: true,
                        value: 0.0,
                        threshold: 0.0,
                        note: "skipped: initial momentum is zero".into(),
                    },
                }
            }
            "h_max" => {
                let h0 = first.h_max;
                let worst = r.iter().map(|x| x.h_max).fold(0.0f64, f64::max);
                CheckOutcome {
                    name: name.clone(),
                    passed: worst <= 10.0 * h0,
                    value: worst,
                    threshold: 10.0 * h0,
                    note: "max depth over the run vs 10x initial".into(),
                }
            }
            "v_sup" => {
                let v0 = first.v_weighted_sup;
                let bound = (10.0 * v0).max(v0 + 1.0);
                let worst = r.iter().map(|x| x.v_weighted_sup).fold(0.0f64, f64::max);
                CheckOutcome {
                    name: name.clone(),
                    passed: worst <= bound,
                    value: worst,
                    threshold: bound,
                    note: "sup rho0^alpha |V| over the run".into(),
                }
            }
            other => CheckOutcome {
                name: other.to_string(),
                passed: false,
                value: f64::NAN,
                threshold: f64::NAN,
                note: "unknown check".into(),
            },
        };
        out.push(oc);
    }
    out
}

fn write_plots(dir: &Path, records: &[DiagnosticsRecord]) -> std::io::Result<()> {
    let plots = dir.join("plots");
    std::fs::create_dir_all(&plots)?;
    let series = |f: &dyn Fn(&DiagnosticsRecord) -> f64| -> Vec<(f64, f64)> {
        records.iter().map(|r| (r.t, f(r))).collect()
    };
    output::write_line_chart(&plots.join("momentum.svg"), "momentum", &series(&|r| r.momentum))?;
    output::write_line_chart(
        &plots.join("energies.svg"),
        "dissipative energy",
        &series(&|r| r.dissipative_energy),
    )?;
    output::write_line_chart(
        &plots.join("kinetic.svg"),
        "kinetic energy",
        &series(&|r| r.kinetic_energy),
    )?;
    output::write_line_chart(
        &plots.join("metric.svg"),
        "min/max eta_x (min shown)",
        &series(&|r| r.eta_x_min),
    )?;
    output::write_line_chart(
        &plots.join("neumann.svg"),
        "boundary Neumann residual",
        &series(&|r| r.neumann_residual),
    )?;
    output::write_line_chart(
        &plots.join("v_sup.svg"),
        "sup rho0^alpha |V|",
        &series(&|r| r.v_weighted_sup),
    )?;
    Ok(())
}

/// Full `simulate` command. Returns the process exit code.
pub fn simulate(config_path: &Path) -> i32 {
    let (cfg, echo) = match config::load(config_path) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    let data = config::build_data(&cfg);
    if data.alpha <= 1.0 / 3.0 {
        eprintln!(
            "warning: alpha = {} is outside the global-existence range (1/3, 1]; \
             long-time runs may lose the metric bounds",
            data.alpha
        );
    }
    let report = data.check_compatibility(1e-8);
    if !report.passes {
        eprintln!(
            "warning: initial data failed the admissibility check \
             (neumann residual {:.3e}); proceeding anyway",
            report.neumann_residual
        );
    }
    let out_dir = PathBuf::from(&cfg.output.dir);
    let art = match drive(&cfg, &echo, &data, &out_dir, true) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            return 3;
        }
    };
    let meta = metadata(&echo, &data, &cfg);
    if let Err(e) = output::write_diagnostics(&out_dir.join("diagnostics.csv"), &meta, &art.records)
    {
        eprintln!("cannot write diagnostics: {e}");
        return 3;
    }
    let outcomes = evaluate_checks(&cfg, &art);
    if let Err(e) = output::write_summary(&out_dir.join("summary.csv"), &meta, &outcomes) {
        eprintln!("cannot write summary: {e}");
        return 3;
    }
    if cfg.output.plots {
        if let Err(e) = write_plots(&out_dir, &art.records) {
            eprintln!("cannot write plots: {e}");
            return 3;
        }
    }
    let mut ok = true;
    for c in &outcomes {
        println!(
            "check {:<16} {}  value {:.6e}  threshold {:.6e}  ({})",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            c.value,
            c.threshold,
            c.note
        );
        ok &= c.passed;
    }
    if ok { 0 } else { 1 }
}

/// `reconstruct`: run to the requested times and emit snapshots only.
pub fn reconstruct(config_path: &Path, times: &[f64], resolution: Option<usize>) -> i32 {
    let (mut cfg, echo) = match config::load(config_path) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    cfg.output.snapshot_times = times.to_vec();
    if let Some(m) = resolution {
        cfg.output.eulerian_resolution = m;
    }
    if let Some(&tmax) = times.iter().max_by(|a, b| a.partial_cmp(b).unwrap()) {
        cfg.solver.t_end = tmax;
    }
    let data = config::build_data(&cfg);
    let out_dir = PathBuf::from(&cfg.output.dir);
    match drive(&cfg, &echo, &data, &out_dir, true) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("{e}");
            3
        }
    }
}
