//! Subcommand orchestration behind the `taxis` binary.

use std::fs;
use std::path::Path;

use crate::config::{Command, RunConfig};
use crate::error::{Error, Result};
use crate::gn::{check_scaling_identity, estimate_gn_ratio, sample_grid};
use crate::harness::{
    all_pass, balance_laws_from_rows, check_balance_laws, check_dissipation_bounds, check_gronwall,
    dual_pairing_monitor, InequalityReport,
};
use crate::io;
use crate::limit::{pairwise_distances, run_sweep, weak_residual, TestFunctionBank, WeakVariant};
use crate::functionals::evaluate_monitors;
use crate::solver::{simulate_with, SemiImplicit, Trajectory};

/// Result of a subcommand whose artifacts have been written.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub summary: String,
}

/// Largest relative error tolerated in the change-of-variables identities.
pub const SCALING_TOLERANCE: f64 = 1e-10;

pub fn execute(cmd: Command, cfg: &RunConfig, out: &Path, variant: WeakVariant) -> Result<Outcome> {
    cfg.validate_for(cmd)?;
    fs::create_dir_all(out)?;
    match cmd {
        Command::Simulate => simulate(cfg, out, variant),
        Command::Verify => verify(cfg, out),
        Command::Sweep => sweep(cfg, out, variant),
        Command::GnTest => gn_test(cfg, out),
    }
}

fn finish(out: &Path, reports: &[InequalityReport], extra: &[String]) -> Result<Outcome> {
    io::write_reports(out, reports, extra)?;
    Ok(Outcome {
        pass: all_pass(reports),
        summary: io::reports_text(reports, extra),
    })
}

fn tag(reports: &mut [InequalityReport], label: &str) {
    for r in reports {
        r.check_name = format!("{}[{label}]", r.check_name);
    }
}

fn weak_rows(traj: &Trajectory, bank: &TestFunctionBank, variant: WeakVariant) -> Result<Vec<String>> {
    let name = match variant {
        WeakVariant::Derived => "derived",
        WeakVariant::Printed => "printed",
    };
    let res = weak_residual(traj, bank, variant)?;
    Ok(bank
        .members
        .iter()
        .zip(&res)
        .map(|(f, r)| io::weak_row(traj.epsilon(), &f.label(), name, r))
        .collect())
}

fn dual_lines(traj: &Trajectory) -> Result<Vec<String>> {
    let m = &traj.meta.monitors;
    let mut lines = Vec::new();
    if traj.snapshots.len() < 2 {
        return Ok(lines);
    }
    for &p in &m.p_list {
        let d = dual_pairing_monitor(traj, p, &m.cutoff, m.psi_dictionary_size)?;
        let peak = d.sup_pairing.iter().copied().fold(0.0, f64::max);
        lines.push(format!(
            "dual pairing p={p} eps={} dict={}: time integral {:.6e}, peak {:.6e}",
            traj.epsilon(),
            m.psi_dictionary_size,
            d.time_integral,
            peak
        ));
    }
    Ok(lines)
}

fn simulate(cfg: &RunConfig, out: &Path, variant: WeakVariant) -> Result<Outcome> {
    let grid = cfg.grid()?;
    let init = cfg.spec.build_initial(grid.clone())?;
    let traj = simulate_with(&SemiImplicit, init, &cfg.params, cfg.horizon, &cfg.monitors, Some(cfg.spec))?;
    io::write_functionals(out, &traj)?;
    io::write_snapshots(out, &traj)?;

    let reports = check_balance_laws(&traj, cfg.tol_rel)?;
    let mut extra = vec![format!(
        "steps {} (rejected {}), clamp mass {:.3e}, horizon {}",
        traj.steps,
        traj.rejected_steps,
        traj.total_clamp_mass(),
        cfg.horizon
    )];
    extra.extend(dual_lines(&traj)?);
    if !cfg.spec.hypothesis_exempt {
        let h = cfg.spec.validate_hypotheses(&cfg.monitors.p_list)?;
        extra.push(h.to_string());
    }
    if cfg.horizon > 0.0 {
        let w = cfg.window_or_default(grid.half_length());
        let bank = TestFunctionBank::standard(w, cfg.bank_t_end_or_default())?;
        if let Ok(rows) = weak_rows(&traj, &bank, variant) {
            let mut s = format!("{}\n", io::weak_header());
            for r in rows {
                s.push_str(&r);
                s.push('\n');
            }
            fs::write(out.join(io::WEAK_FILE), s)?;
        }
    }
    finish(out, &reports, &extra)
}

fn verify(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let paths = io::snapshot_paths(out)?;
    let mut states = Vec::with_capacity(paths.len());
    let mut records = Vec::with_capacity(paths.len());
    for p in &paths {
        let rec = io::read_snapshot(p)?;
        states.push(rec.to_state(p)?);
        records.push(rec);
    }
    let grid = states[0].grid.clone();
    if states.iter().any(|s| *s.grid != *grid) {
        return Err(Error::Snapshot {
            path: out.display().to_string(),
            msg: "snapshots are on different grids".into(),
        });
    }
    if states.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Snapshot {
            path: out.display().to_string(),
            msg: "snapshot times are not increasing".into(),
        });
    }
    cfg.monitors.cutoff.ensure_fits(&grid)?;
    let baseline = states[0].v.max();
    let samples = states
        .iter()
        .map(|s| evaluate_monitors(s, &cfg.monitors, baseline))
        .collect::<Result<Vec<_>>>()?;
    let consumed: Vec<f64> = records
        .iter()
        .zip(&samples)
        .map(|(r, s)| r.consumed.unwrap_or(samples[0].mass_v - s.mass_v))
        .collect();
    let clamped: Vec<f64> = records.iter().map(|r| r.clamped.unwrap_or(0.0)).collect();
    let horizon = states.last().map_or(0.0, |s| s.t);
    let reports = balance_laws_from_rows(&samples, &consumed, &clamped, horizon, cfg.tol_rel)?;
    let extra = vec![format!(
        "verified {} snapshots on n={} epsilon={}",
        states.len(),
        grid.n_cells(),
        grid.epsilon()
    )];
    finish(out, &reports, &extra)
}

fn sweep(cfg: &RunConfig, out: &Path, variant: WeakVariant) -> Result<Outcome> {
    let dx = cfg.sweep_dx()?;
    let w = cfg.window_or_default(1.0 / cfg.epsilons[0]);
    let sw = run_sweep(&cfg.spec, &cfg.params, &cfg.monitors, &cfg.epsilons, cfg.horizon, dx, w)?;
    let eps = sw.epsilons();

    for t in &sw.members {
        let dir = out.join(format!("eps_{}", t.epsilon()));
        io::write_functionals(&dir, t)?;
        io::write_snapshots(&dir, t)?;
    }

    let mut matrices = Vec::new();
    let mut reports = Vec::new();
    for &q in &cfg.q_dist {
        let (du, dv) = pairwise_distances(&sw, q)?;
        for (field, m) in [("u", &du), ("v", &dv)] {
            let mut r = cauchy_report(field, q, &eps, m, cfg.horizon);
            r.notes.push(format!("window [-{w}, {w}]"));
            reports.push(r);
        }
        matrices.push((q, du, dv));
    }
    fs::write(out.join(io::SWEEP_FILE), io::sweep_csv(&eps, &matrices))?;

    for t in &sw.members {
        let mut b = check_balance_laws(t, cfg.tol_rel)?;
        tag(&mut b, &format!("eps={}", t.epsilon()));
        reports.extend(b);
    }
    reports.extend(check_dissipation_bounds(&sw.members, cfg.slack)?);
    let (calibration, rest) = sw.members.split_first().expect("sweep has members");
    for (p, q) in cfg.monitors.pairs() {
        for t in rest {
            reports.extend(check_gronwall(t, calibration, p, q, cfg.inflation)?);
        }
    }
    reports.push(window_positivity(&sw.members[sw.members.len() - 1], w));

    let bank = TestFunctionBank::standard(w, cfg.bank_t_end_or_default())?;
    let mut weak = format!("{}\n", io::weak_header());
    for t in &sw.members {
        for r in weak_rows(t, &bank, variant)? {
            weak.push_str(&r);
            weak.push('\n');
        }
    }
    fs::write(out.join(io::WEAK_FILE), weak)?;

    let mut extra = Vec::new();
    for t in &sw.members {
        extra.extend(dual_lines(t)?);
    }
    finish(out, &reports, &extra)
}

/// Consecutive distances `d_{j,j+1}` must decrease; the margin is the
/// relative drop `(d_{j,j+1} - d_{j+1,j+2}) / d_{j,j+1}`, reported at `ε_{j+2}`.
pub fn cauchy_report(field: &str, q: f64, eps: &[f64], m: &[Vec<f64>], horizon: f64) -> InequalityReport {
    let consecutive: Vec<f64> = (0..eps.len() - 1).map(|j| m[j][j + 1]).collect();
    let mut r = InequalityReport::new(format!("cauchy:{field}[q={q}]"), 0.0, horizon);
    r.values = eps[1..].iter().copied().zip(consecutive.iter().copied()).collect();
    for j in 0..consecutive.len().saturating_sub(1) {
        let (a, b) = (consecutive[j], consecutive[j + 1]);
        let margin = if a > 0.0 { (a - b) / a } else { f64::NEG_INFINITY };
        r.margins.push((eps[j + 2], margin));
    }
    strict(r.finish())
}

/// `min v` over the window at every sample of the finest member, which must stay positive.
fn window_positivity(t: &Trajectory, w: f64) -> InequalityReport {
    let mut r = InequalityReport::new(format!("sweep:finest_v_positive[eps={}]", t.epsilon()), 0.0, t.meta.horizon);
    for s in &t.snapshots {
        let range = s.grid.window(w);
        let m = s.v[range].iter().copied().fold(f64::INFINITY, f64::min);
        r.margins.push((s.t, m));
    }
    strict(r.finish())
}

/// Zero margins fail: these checks demand a strict inequality.
fn strict(mut r: InequalityReport) -> InequalityReport {
    r.pass = r.pass && r.margins.iter().all(|m| m.1 > 0.0);
    r
}

fn gn_test(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let mut tables = Vec::new();
    let mut reports = Vec::new();
    for case in &cfg.gn_cases {
        let t = estimate_gn_ratio(case, &cfg.gn_sampler, &cfg.gn_epsilons, cfg.gn_samples)?;
        let mut r = InequalityReport::new(format!("gn:variation[{}]", case.label().replace(',', ";")), 0.0, 0.0);
        r.margins.push((0.0, crate::gn::GN_VARIATION_LIMIT - t.variation()));
        r.values = t.rows.iter().map(|row| (row.epsilon, row.max_ratio)).collect();
        r.fitted.push(("variation".into(), t.variation()));
        r.notes.push(format!("family {} seed {}", cfg.gn_sampler.name(), cfg.gn_sampler.seed()));
        reports.push(strict(r.finish()));
        tables.push(t);
    }
    fs::write(out.join(io::GN_FILE), io::gn_csv(&tables))?;

    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for &eps in &cfg.gn_epsilons {
        let g = sample_grid(eps)?;
        for k in 0..cfg.gn_samples as u64 {
            let f = cfg.gn_sampler.draw(k, g.half_length());
            for m in [1.0, 2.0, 3.0, 4.0] {
                worst = worst.max(check_scaling_identity(&f, m, eps, g.n_cells())?);
                checked += 1;
            }
        }
    }
    let mut r = InequalityReport::new("gn:scaling_identities", 0.0, 0.0);
    r.margins.push((0.0, SCALING_TOLERANCE - worst));
    r.fitted.push(("max_rel_error".into(), worst));
    r.notes.push(format!("{checked} (function, m, epsilon) triples"));
    reports.push(r.finish());
    finish(out, &reports, &[])
}
