//! On-disk artifacts: functional time series, snapshots and reports.
//!
//! Snapshot files hold
//!
//! ```text
//! # t=<t> epsilon=<ε> n=<cells> dx=<dx>
//! # consumed=<Σ dt ∫uv> clamped=<clamp mass>
//! x,u,v
//! <17 significant digits per value>
//! ```
//!
//! The second comment line is optional on read.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functionals::FunctionalSample;
use crate::gn::GnRatioTable;
use crate::grid::Grid;
use crate::harness::InequalityReport;
use crate::limit::WeakResidual;
use crate::solver::{State, Trajectory};

pub const FUNCTIONALS_FILE: &str = "functionals.csv";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const REPORT_TXT: &str = "report.txt";
pub const REPORT_CSV: &str = "report.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const GN_FILE: &str = "gn_ratios.csv";
pub const WEAK_FILE: &str = "weak_residuals.csv";

pub fn functionals_csv(traj: &Trajectory) -> String {
    let mut s = FunctionalSample::csv_header(&traj.meta.monitors.pairs());
    s.push('\n');
    for row in &traj.samples {
        s.push_str(&row.csv_row());
        s.push('\n');
    }
    s
}

pub fn write_functionals(dir: &Path, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(FUNCTIONALS_FILE), functionals_csv(traj))?;
    Ok(())
}

pub fn snapshot_name(k: usize) -> String {
    format!("snap_{k:05}.csv")
}

/// A snapshot as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub t: f64,
    pub epsilon: f64,
    pub n_cells: usize,
    pub dx: f64,
    pub consumed: Option<f64>,
    pub clamped: Option<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl SnapshotRecord {
    /// Rebuilds the state, checking that the stored centers match the grid.
    pub fn to_state(&self, path: &Path) -> Result<State> {
        let bad = |msg: String| Error::Snapshot { path: path.display().to_string(), msg };
        let grid = Grid::new(self.epsilon, self.n_cells).map_err(|e| bad(e.to_string()))?;
        if (grid.dx() - self.dx).abs() > 1e-12 * grid.dx() {
            return Err(bad(format!("dx={} inconsistent with n={}", self.dx, self.n_cells)));
        }
        if self.x.len() != self.n_cells {
            return Err(bad(format!("{} rows for n={}", self.x.len(), self.n_cells)));
        }
        for (i, (&a, &b)) in self.x.iter().zip(grid.centers()).enumerate() {
            if (a - b).abs() > 1e-9 * (1.0 + b.abs()) {
                return Err(bad(format!("row {i}: x={a} is not the cell center {b}")));
            }
        }
        State::new(Arc::new(grid), self.t, self.u.clone(), self.v.clone()).map_err(|e| bad(e.to_string()))
    }
}

pub fn snapshot_text(s: &State, consumed: f64, clamped: f64) -> String {
    let g = &s.grid;
    let mut out = String::with_capacity(64 * g.n_cells() + 128);
    let _ = writeln!(
        out,
        "# t={:.16e} epsilon={:.16e} n={} dx={:.16e}",
        s.t,
        g.epsilon(),
        g.n_cells(),
        g.dx()
    );
    let _ = writeln!(out, "# consumed={consumed:.16e} clamped={clamped:.16e}");
    out.push_str("x,u,v\n");
    for i in 0..g.n_cells() {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", g.centers()[i], s.u[i], s.v[i]);
    }
    out
}

pub fn write_snapshots(dir: &Path, traj: &Trajectory) -> Result<()> {
    let sd = dir.join(SNAPSHOT_DIR);
    fs::create_dir_all(&sd)?;
    for (k, s) in traj.snapshots.iter().enumerate() {
        fs::write(sd.join(snapshot_name(k)), snapshot_text(s, traj.consumed[k], traj.clamped[k]))?;
    }
    Ok(())
}

fn header_fields(line: &str) -> Vec<(&str, &str)> {
    line.trim_start_matches('#')
        .split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .collect()
}

pub fn parse_snapshot(text: &str, path: &Path) -> Result<SnapshotRecord> {
    let bad = |msg: String| Error::Snapshot { path: path.display().to_string(), msg };
    let mut lines = text.lines().enumerate().peekable();
    let (_, first) = lines.next().ok_or_else(|| bad("empty file".into()))?;
    if !first.starts_with('#') {
        return Err(bad("missing `# t=...` header".into()));
    }
    let mut t = None;
    let mut eps = None;
    let mut n = None;
    let mut dx = None;
    let mut consumed = None;
    let mut clamped = None;
    let parse_f = |k: &str, v: &str| v.parse::<f64>().map_err(|_| bad(format!("bad header value {k}={v}")));
    for (k, v) in header_fields(first) {
        match k {
            "t" => t = Some(parse_f(k, v)?),
            "epsilon" => eps = Some(parse_f(k, v)?),
            "n" => n = Some(v.parse::<usize>().map_err(|_| bad(format!("bad header value n={v}")))?),
            "dx" => dx = Some(parse_f(k, v)?),
            _ => {}
        }
    }
    while let Some((_, l)) = lines.peek() {
        if !l.starts_with('#') {
            break;
        }
        for (k, v) in header_fields(l) {
            match k {
                "consumed" => consumed = Some(parse_f(k, v)?),
                "clamped" => clamped = Some(parse_f(k, v)?),
                _ => {}
            }
        }
        lines.next();
    }
    let missing = |k: &str| bad(format!("header lacks `{k}`"));
    let (t, epsilon, n_cells, dx) = (
        t.ok_or_else(|| missing("t"))?,
        eps.ok_or_else(|| missing("epsilon"))?,
        n.ok_or_else(|| missing("n"))?,
        dx.ok_or_else(|| missing("dx"))?,
    );
    match lines.next() {
        Some((_, h)) if h.trim() == "x,u,v" => {}
        _ => return Err(bad("missing `x,u,v` column header".into())),
    }
    let mut rec = SnapshotRecord {
        t,
        epsilon,
        n_cells,
        dx,
        consumed,
        clamped,
        x: Vec::with_capacity(n_cells),
        u: Vec::with_capacity(n_cells),
        v: Vec::with_capacity(n_cells),
    };
    for (i, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let mut it = l.split(',').map(|s| s.trim().parse::<f64>());
        match (it.next(), it.next(), it.next(), it.next()) {
            (Some(Ok(x)), Some(Ok(u)), Some(Ok(v)), None) => {
                rec.x.push(x);
                rec.u.push(u);
                rec.v.push(v);
            }
            _ => return Err(bad(format!("line {}: expected three numbers", i + 1))),
        }
    }
    Ok(rec)
}

pub fn read_snapshot(path: &Path) -> Result<SnapshotRecord> {
    let text = fs::read_to_string(path)?;
    parse_snapshot(&text, path)
}

/// Snapshot files of `dir/snapshots` in name order.
pub fn snapshot_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let sd = dir.join(SNAPSHOT_DIR);
    let mut paths: Vec<PathBuf> = fs::read_dir(&sd)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("snap_") && n.ends_with(".csv"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Snapshot {
            path: sd.display().to_string(),
            msg: "no snapshot files".into(),
        });
    }
    Ok(paths)
}

pub fn reports_text(reports: &[InequalityReport], extra: &[String]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = writeln!(s, "{r}");
    }
    for e in extra {
        let _ = writeln!(s, "{e}");
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    let _ = writeln!(s, "{} checks, {} failed", reports.len(), failed);
    s
}

pub fn reports_csv(reports: &[InequalityReport]) -> String {
    let mut s = String::from(InequalityReport::csv_header());
    s.push('\n');
    for r in reports {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

pub fn write_reports(dir: &Path, reports: &[InequalityReport], extra: &[String]) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(REPORT_TXT), reports_text(reports, extra))?;
    fs::write(dir.join(REPORT_CSV), reports_csv(reports))?;
    Ok(())
}

/// Long-format distance matrices: one row per `(q, field, j, k)`.
pub fn sweep_csv(epsilons: &[f64], matrices: &[(f64, Vec<Vec<f64>>, Vec<Vec<f64>>)]) -> String {
    let mut s = String::from("q,field,row,col,epsilon_row,epsilon_col,distance\n");
    for (q, du, dv) in matrices {
        for (field, m) in [("u", du), ("v", dv)] {
            for (j, row) in m.iter().enumerate() {
                for (k, d) in row.iter().enumerate() {
                    let _ = writeln!(
                        s,
                        "{q},{field},{j},{k},{:.16e},{:.16e},{d:.16e}",
                        epsilons[j], epsilons[k]
                    );
                }
            }
        }
    }
    s
}

pub fn gn_csv(tables: &[GnRatioTable]) -> String {
    let mut s = String::from(GnRatioTable::csv_header());
    s.push('\n');
    for t in tables {
        for row in t.csv_rows() {
            s.push_str(&row);
            s.push('\n');
        }
    }
    s
}

pub fn weak_header() -> &'static str {
    "epsilon,test_function,variant,u_lhs,u_rhs,u_residual,v_lhs,v_rhs,v_residual"
}

pub fn weak_row(epsilon: f64, label: &str, variant: &str, r: &WeakResidual) -> String {
    format!(
        "{epsilon:.16e},{},{variant},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
        label.replace(',', ";"),
        r.u_lhs,
        r.u_rhs,
        r.u(),
        r.v_lhs,
        r.v_rhs,
        r.v()
    )
}
