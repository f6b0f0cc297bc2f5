//! CSV and SVG artifact writers.
//!
//! Every file starts with a '#'-prefixed metadata block: the verbatim
//! config, the code version and the grid parameters. Numbers are written
//! in scientific notation with 13 significant digits, so identical runs
//! produce byte-identical files.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use vfb_core::diagnostics::DiagnosticsRecord;
use vfb_core::eulerian::EulerianSnapshot;

pub fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

/// Metadata block shared by all artifacts of one run.
pub struct Metadata {
    pub config_echo: String,
    pub extra: Vec<(String, String)>,
}

impl Metadata {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# vfb {}", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.extra {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let _ = writeln!(s, "# --- config echo ---");
        for line in self.config_echo.lines() {
            let _ = writeln!(s, "# {line}");
        }
        s
    }
}

pub const DIAGNOSTICS_COLUMNS: &[&str] = &[
    "t",
    "mass",
    "momentum",
    "kinetic_energy",
    "fundamental_energy",
    "fundamental_dissipation",
    "dissipative_energy",
    "bd_entropy",
    "bd_dissipation",
    "bd_divergent",
    "eta_x_min",
    "eta_x_max",
    "h_max",
    "neumann_residual",
    "slope_ratio",
    "v_transport_residual",
    "v_weighted_sup",
    "log_eta_weighted",
    "e_tilde_spatial",
];

pub fn write_diagnostics(
    path: &Path,
    meta: &Metadata,
    records: &[DiagnosticsRecord],
) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(meta.render().as_bytes())?;
    writeln!(f, "{}", DIAGNOSTICS_COLUMNS.join(","))?;
    for r in records {
        let row = [
            fmt(r.t),
            fmt(r.mass),
            fmt(r.momentum),
            fmt(r.kinetic_energy),
            fmt(r.fundamental_energy),
            fmt(r.fundamental_dissipation),
            fmt(r.dissipative_energy),
            fmt(r.bd_entropy),
            fmt(r.bd_dissipation),
            if r.bd_divergent { "1".into() } else { "0".into() },
            fmt(r.eta_x_min),
            fmt(r.eta_x_max),
            fmt(r.h_max),
            fmt(r.neumann_residual),
            fmt(r.slope_ratio),
            fmt(r.v_transport_residual),
            fmt(r.v_weighted_sup),
            fmt(r.log_eta_weighted),
            fmt(r.e_tilde_spatial),
        ];
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_snapshot(
    path: &Path,
    meta: &Metadata,
    snap: &EulerianSnapshot,
) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(meta.render().as_bytes())?;
    writeln!(f, "# gamma_left = {}, gamma_right = {}", fmt(snap.gamma_left), fmt(snap.gamma_right))?;
    writeln!(f, "t,y,rho,u,u_y,u_yy")?;
    for j in 0..snap.y_nodes.len() {
        writeln!(
            f,
            "{},{},{},{},{},{}",
            fmt(snap.t),
            fmt(snap.y_nodes[j]),
            fmt(snap.rho[j]),
            fmt(snap.u[j]),
            fmt(snap.u_y[j]),
            fmt(snap.u_yy[j]),
        )?;
    }
    Ok(())
}

/// Outcome of one enabled check.
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub note: String,
}

pub fn write_summary(
    path: &Path,
    meta: &Metadata,
    outcomes: &[CheckOutcome],
) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(meta.render().as_bytes())?;
    writeln!(f, "check,passed,value,threshold,note")?;
    for c in outcomes {
        writeln!(
            f,
            "{},{},{},{},{}",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            fmt(c.value),
            fmt(c.threshold),
            c.note
        )?;
    }
    Ok(())
}

/// Minimal hand-emitted SVG line chart of one (t, value) series.
pub fn write_line_chart(
    path: &Path,
    title: &str,
    series: &[(f64, f64)],
) -> std::io::Result<()> {
    let (w, h) = (720.0, 420.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let mut tmin = f64::INFINITY;
    let mut tmax = f64::NEG_INFINITY;
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for &(t, v) in series {
        tmin = tmin.min(t);
        tmax = tmax.max(t);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    if !(tmax > tmin) {
        tmax = tmin + 1.0;
    }
    if !(vmax > vmin) {
        vmax = vmin + 1.0;
        vmin -= 1.0;
    }
    let pad = 0.05 * (vmax - vmin);
    vmin -= pad;
    vmax += pad;
    let sx = |t: f64| ml + (t - tmin) / (tmax - tmin) * (w - ml - mr);
    let sy = |v: f64| h - mb - (v - vmin) / (vmax - vmin) * (h - mt - mb);
    let mut pts = String::new();
    for &(t, v) in series {
        let _ = write!(pts, "{:.2},{:.2} ", sx(t), sy(v));
    }
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="monospace" font-size="16">{title}</text>"#,
        ml
    );
    // axes
    let _ = writeln!(
        s,
        r#"<line x1="{ml}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        h - mb,
        w - mr,
        h - mb
    );
    let _ = writeln!(s, r#"<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{}" stroke="black"/>"#, h - mb);
    for k in 0..=4 {
        let tv = tmin + (tmax - tmin) * k as f64 / 4.0;
        let vv = vmin + (vmax - vmin) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" font-family="monospace" font-size="11" text-anchor="middle">{tv:.3}</text>"#,
            sx(tv),
            h - mb + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" font-family="monospace" font-size="11" text-anchor="end">{vv:.4e}</text>"#,
            ml - 6.0,
            sy(vv) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r##"<polyline points="{pts}" fill="none" stroke="#1f6fb2" stroke-width="1.5"/>"##
    );
    let _ = writeln!(s, "</svg>");
    std::fs::write(path, s)
}
