//! Executable pass/fail checks of the a priori estimates over one trajectory
//! or over a family of trajectories with decreasing `ε`.
//!
//! Every check reports a margin series `RHS - LHS` (relative where noted) and
//! passes iff the smallest margin is at least `-tolerance`.

use std::fmt;

use crate::cutoff::Cutoff;
use crate::error::{Error, Result};
use crate::functionals::{check_window, lemma36_bracket, FunctionalSample};
use crate::solver::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub check_name: String,
    /// `(time or ε, RHS - LHS)`.
    pub margins: Vec<(f64, f64)>,
    /// Informational series, e.g. the per-ε values of a family check.
    pub values: Vec<(f64, f64)>,
    /// Fitted constants and the run they were fitted on.
    pub fitted: Vec<(String, f64)>,
    pub tolerance: f64,
    pub pass: bool,
    /// Abscissa of the smallest margin.
    pub worst_time: Option<f64>,
    pub horizon: f64,
    pub notes: Vec<String>,
}

impl InequalityReport {
    pub fn new(name: impl Into<String>, tolerance: f64, horizon: f64) -> Self {
        Self {
            check_name: name.into(),
            margins: Vec::new(),
            values: Vec::new(),
            fitted: Vec::new(),
            tolerance,
            pass: true,
            worst_time: None,
            horizon,
            notes: Vec::new(),
        }
    }

    /// Sets `pass` and `worst_time` from the margins.
    pub fn finish(mut self) -> Self {
        let worst = self
            .margins
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1));
        self.worst_time = worst.map(|w| w.0);
        self.pass = match worst {
            Some((_, m)) => m.is_finite() && m >= -self.tolerance,
            None => true,
        };
        self
    }

    pub fn min_margin(&self) -> f64 {
        self.margins
            .iter()
            .map(|m| m.1)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn csv_header() -> &'static str {
        "check,pass,min_margin,tolerance,worst_time,horizon,fitted,notes"
    }

    pub fn csv_row(&self) -> String {
        let fitted = self
            .fitted
            .iter()
            .map(|(k, v)| format!("{k}={v:.16e}"))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{},{},{:.16e},{:.16e},{},{:.16e},{},{}",
            self.check_name,
            self.pass,
            self.min_margin(),
            self.tolerance,
            self.worst_time.map(|t| format!("{t:.16e}")).unwrap_or_default(),
            self.horizon,
            fitted,
            self.notes.join(";").replace(',', " ")
        )
    }
}

impl fmt::Display for InequalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<34} min margin {:>12.4e} (tol {:.1e}, T={})",
            if self.pass { "PASS" } else { "FAIL" },
            self.check_name,
            self.min_margin(),
            self.tolerance,
            self.horizon
        )?;
        if let Some(t) = self.worst_time {
            write!(f, " worst at {t:.4}")?;
        }
        for (k, v) in &self.fitted {
            write!(f, " {k}={v:.4e}")?;
        }
        for n in &self.notes {
            write!(f, "\n       note: {n}")?;
        }
        Ok(())
    }
}

pub fn all_pass(reports: &[InequalityReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

pub const BALANCE_TOTAL: &str = "balance:total_mass";
pub const BALANCE_V_DECREASING: &str = "balance:mass_v_nonincreasing";
pub const BALANCE_U_INCREASING: &str = "balance:mass_u_nondecreasing";
pub const BALANCE_MAX_PRINCIPLE: &str = "balance:max_principle";
pub const BALANCE_CONSUMPTION: &str = "balance:consumption";

/// Discrete balance laws: conservation of `∫(u+v)` net of the mass added by clamping,
/// monotonicity of `∫v` and `∫u`, the maximum principle for `v`, and the
/// bound of the cumulative consumption by `∫v₀`. All margins are relative.
pub fn check_balance_laws(traj: &Trajectory, tol_rel: f64) -> Result<Vec<InequalityReport>> {
    balance_laws_from_rows(&traj.samples, &traj.consumed, &traj.clamped, traj.meta.horizon, tol_rel)
}

/// [`check_balance_laws`] on bare rows; `consumed` and `clamped` are cumulative.
pub fn balance_laws_from_rows(
    samples: &[FunctionalSample],
    consumed: &[f64],
    clamped: &[f64],
    horizon: f64,
    tol_rel: f64,
) -> Result<Vec<InequalityReport>> {
    let first = samples
        .first()
        .ok_or_else(|| Error::invalid("trajectory has no samples"))?;
    if consumed.len() != samples.len() || clamped.len() != samples.len() {
        return Err(Error::invalid("consumption/clamp series do not match samples"));
    }
    let total0 = first.mass_u + first.mass_v;
    let scale = if total0 > 0.0 { total0 } else { 1.0 };
    let v0 = first.mass_v;
    let sup0 = first.sup_v;

    let mut total = InequalityReport::new(BALANCE_TOTAL, tol_rel, horizon);
    let mut v_dec = InequalityReport::new(BALANCE_V_DECREASING, tol_rel, horizon);
    let mut u_inc = InequalityReport::new(BALANCE_U_INCREASING, tol_rel, horizon);
    let mut maxp = InequalityReport::new(BALANCE_MAX_PRINCIPLE, tol_rel, horizon);
    let mut cons = InequalityReport::new(BALANCE_CONSUMPTION, tol_rel, horizon);

    for (k, s) in samples.iter().enumerate() {
        let drift = s.mass_u + s.mass_v - clamped[k] - total0;
        total.margins.push((s.t, -drift.abs() / scale));
        maxp.margins.push((s.t, (sup0 - s.sup_v) / sup0));
        cons.margins.push((s.t, (v0 - consumed[k]) / v0));
        if k > 0 {
            let prev = &samples[k - 1];
            v_dec.margins.push((s.t, (prev.mass_v - s.mass_v) / scale));
            u_inc.margins.push((s.t, (s.mass_u - clamped[k] - prev.mass_u + clamped[k - 1]) / scale));
        }
    }
    let clamp = clamped.last().copied().unwrap_or(0.0);
    if clamp > 0.0 {
        total.notes.push(format!("clamp mass {clamp:.3e} discounted"));
    }
    Ok(vec![
        total.finish(),
        v_dec.finish(),
        u_inc.finish(),
        maxp.finish(),
        cons.finish(),
    ])
}

fn p_block_series(traj: &Trajectory, p: f64) -> Result<Vec<(f64, f64, f64, f64)>> {
    traj.samples
        .iter()
        .map(|s| {
            let b = s
                .block(p)
                .ok_or_else(|| Error::invalid(format!("trajectory not monitored at p={p}")))?;
            Ok((s.t, b.y, b.lp_u, s.sup_v))
        })
        .collect()
}

/// Fits `C` as the largest ratio of the forward-difference growth rate of `y`
/// to `sup v · (∫u^p + 1 + ε-powers)` over the calibration run.
pub fn fit_gronwall_constant(calibration: &Trajectory, p: f64, q: f64) -> Result<f64> {
    check_window(p, q)?;
    let rows = p_block_series(calibration, p)?;
    let eps = calibration.epsilon();
    let mut c = 0.0f64;
    for w in rows.windows(2) {
        let (t0, y0, lp0, sv0) = w[0];
        let (t1, y1, _, _) = w[1];
        let rate = (y1 - y0) / (t1 - t0);
        if rate > 0.0 {
            c = c.max(rate / (sv0 * lemma36_bracket(lp0, p, q, eps)));
        }
    }
    Ok(c)
}

/// Calibrate-then-validate check of the differential inequality for
/// `y = ∫u^p + ∫v^{-α}|v_x|^q + 3` and of its integrated envelope
/// `y(t) ≤ y(0) exp(C sup v₀ t)`. Margins are relative to the right-hand side;
/// `inflation` is the admissible relative excess.
pub fn check_gronwall(
    traj: &Trajectory,
    calibration: &Trajectory,
    p: f64,
    q: f64,
    inflation: f64,
) -> Result<Vec<InequalityReport>> {
    if std::ptr::eq(traj, calibration) {
        return Err(Error::invalid(
            "calibration trajectory must differ from the validated one",
        ));
    }
    let c = fit_gronwall_constant(calibration, p, q)?;
    let fitted = vec![(format!("C[eps={}]", calibration.epsilon()), c)];
    let rows = p_block_series(traj, p)?;
    let eps = traj.epsilon();
    let sup_v0 = traj.meta.baseline_sup_v;
    let horizon = traj.meta.horizon;
    let label = format!("p={p},q={q},eps={eps}");

    let rel = |rhs: f64, lhs: f64| {
        if rhs > 0.0 {
            (rhs - lhs) / rhs
        } else if lhs <= 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    };

    let mut envelope = InequalityReport::new(format!("gronwall:envelope[{label}]"), inflation, horizon);
    let y0 = rows[0].1;
    for &(t, y, _, _) in &rows {
        envelope.margins.push((t, rel(y0 * (c * sup_v0 * t).exp(), y)));
    }
    envelope.fitted = fitted.clone();

    let mut inst = InequalityReport::new(format!("gronwall:differential[{label}]"), inflation, horizon);
    for w in rows.windows(2) {
        let (t0, y0, lp0, sv0) = w[0];
        let (t1, y1, _, _) = w[1];
        let rate = (y1 - y0) / (t1 - t0);
        let rhs = c * sv0 * lemma36_bracket(lp0, p, q, eps);
        inst.margins.push((t0, rel(rhs, rate)));
    }
    inst.fitted = fitted;
    inst.notes.push(format!("horizon T={horizon}; fixed horizons cannot separate growth from blow-up"));
    Ok(vec![envelope.finish(), inst.finish()])
}

/// Quantities whose boundedness in `ε` is checked by [`check_dissipation_bounds`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissipationQuantity {
    /// `∫₀ᵀ∫ v_x⁴/v³`
    Quartic,
    /// `∫₀ᵀ∫ u^{p-1} v u_x² φ²` for the first monitored `p`
    DensityDissipation,
    /// `∫₀ᵀ∫ (u/v) v_x² φ²`
    CrossDissipation,
    /// `∫₀ᵀ∫ u^{q̃-1} v u_x² φ²`
    LowPowerDissipation,
    /// `sup_t ∫ ln(sup v₀ / v) φ²`
    LogNutrient,
    /// `∫ (v_x²/v)(·,T) φ²`
    FinalFisher,
    /// `sup_t sup_x |v_x|`
    GradientSup,
}

impl DissipationQuantity {
    pub const ALL: [DissipationQuantity; 7] = [
        Self::Quartic,
        Self::DensityDissipation,
        Self::CrossDissipation,
        Self::LowPowerDissipation,
        Self::LogNutrient,
        Self::FinalFisher,
        Self::GradientSup,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Quartic => "quartic_time_integral",
            Self::DensityDissipation => "density_dissipation_time_integral",
            Self::CrossDissipation => "cross_dissipation_time_integral",
            Self::LowPowerDissipation => "low_power_dissipation_time_integral",
            Self::LogNutrient => "log_nutrient_sup",
            Self::FinalFisher => "fisher_cutoff_at_T",
            Self::GradientSup => "gradient_sup",
        }
    }

    /// Value of the quantity on a list of rows.
    pub fn evaluate(&self, rows: &[FunctionalSample]) -> f64 {
        let trap = |f: &dyn Fn(&FunctionalSample) -> f64| trapezoid(rows, f);
        match self {
            Self::Quartic => trap(&|s| s.quartic),
            Self::DensityDissipation => trap(&|s| s.per_p.first().map_or(0.0, |b| b.diss_u)),
            Self::CrossDissipation => trap(&|s| s.diss_v),
            Self::LowPowerDissipation => trap(&|s| s.diss_q),
            Self::LogNutrient => rows.iter().map(|s| s.logv).fold(f64::NEG_INFINITY, f64::max),
            Self::FinalFisher => rows.last().map_or(0.0, |s| s.fisher_cut),
            Self::GradientSup => rows.iter().map(|s| s.sup_abs_vx).fold(0.0, f64::max),
        }
    }
}

/// Trapezoid rule in time over sample rows.
pub fn trapezoid(rows: &[FunctionalSample], f: &dyn Fn(&FunctionalSample) -> f64) -> f64 {
    rows.windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1])))
        .sum()
}

pub const DISSIPATION_SLACK: f64 = 0.2;

/// Empirical uniform-in-`ε` boundedness: for each quantity the value on the
/// finest member must not exceed `(1 + slack)` times the largest value on the
/// coarser members. The margin is `((1+slack) max_prev - last) / max_prev`.
pub fn check_dissipation_bounds(family: &[Trajectory], slack: f64) -> Result<Vec<InequalityReport>> {
    let rows: Vec<&[FunctionalSample]> = family.iter().map(|t| t.samples.as_slice()).collect();
    let eps: Vec<f64> = family.iter().map(|t| t.epsilon()).collect();
    let horizons: Vec<f64> = family.iter().map(|t| t.meta.horizon).collect();
    dissipation_bounds_from_rows(&rows, &eps, &horizons, slack)
}

/// [`check_dissipation_bounds`] on bare rows, one slice per family member.
pub fn dissipation_bounds_from_rows(
    rows: &[&[FunctionalSample]],
    eps: &[f64],
    horizons: &[f64],
    slack: f64,
) -> Result<Vec<InequalityReport>> {
    if rows.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 trajectories, got {}",
            rows.len()
        )));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid("epsilon must be strictly decreasing along the family"));
    }
    if horizons.windows(2).any(|w| (w[1] - w[0]).abs() > 1e-12) {
        return Err(Error::invalid("family members must share the horizon"));
    }
    let horizon = horizons[0];
    let mut out = Vec::new();
    for quantity in DissipationQuantity::ALL {
        let values: Vec<f64> = rows.iter().map(|r| quantity.evaluate(r)).collect();
        let mut report = InequalityReport::new(format!("uniform_eps:{}", quantity.name()), 0.0, horizon);
        report.values = eps.iter().copied().zip(values.iter().copied()).collect();
        let (last, prev) = values.split_last().expect("nonempty");
        let max_prev = prev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bound = (1.0 + slack) * max_prev;
        let margin = if max_prev > 0.0 {
            (bound - last) / max_prev
        } else if *last <= 0.0 || (*last - bound).abs() <= f64::EPSILON {
            0.0
        } else {
            f64::NEG_INFINITY
        };
        report.margins.push((*eps.last().expect("nonempty"), margin));
        report.fitted.push(("bound".into(), bound));
        out.push(report.finish());
    }
    Ok(out)
}

/// Cosine dictionary mode `cos(kπ(x+L)/(2L))` scaled to unit discrete `W^{3,2}` norm.
pub fn dictionary_mode(k: usize, grid: &crate::grid::Grid) -> Vec<f64> {
    let l = grid.half_length();
    let w = k as f64 * std::f64::consts::PI / (2.0 * l);
    let mut norm2 = 0.0;
    let vals: Vec<f64> = grid
        .centers()
        .iter()
        .map(|&x| {
            let (s, c) = (w * (x + l)).sin_cos();
            // ψ, ψ', ψ'', ψ''' squared
            norm2 += c * c + (w * s).powi(2) + (w * w * c).powi(2) + (w * w * w * s).powi(2);
            c
        })
        .collect();
    let norm = (norm2 * grid.dx()).sqrt();
    vals.into_iter().map(|v| v / norm).collect()
}

/// Per-interval supremum of the pairing of the difference quotient of
/// `u^{(p+1)/2} v φ²` with the dictionary, and its time integral. The
/// dictionary supremum bounds the true dual norm from below.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPairingSeries {
    /// Interval midpoints.
    pub times: Vec<f64>,
    pub sup_pairing: Vec<f64>,
    /// Index of the maximizing mode per interval.
    pub argmax: Vec<usize>,
    pub time_integral: f64,
}

pub fn dual_pairing_monitor(
    traj: &Trajectory,
    p: f64,
    c: &Cutoff,
    dict_size: usize,
) -> Result<DualPairingSeries> {
    if dict_size < 1 {
        return Err(Error::invalid("dict_size must be >= 1"));
    }
    if traj.snapshots.len() < 2 {
        return Err(Error::invalid("need at least two snapshots"));
    }
    let grid = traj.snapshots[0].grid.clone();
    let (phi2, _, _) = c.sample(&grid);
    let dict: Vec<Vec<f64>> = (0..dict_size).map(|k| dictionary_mode(k, &grid)).collect();
    let e = 0.5 * (p + 1.0);
    let z: Vec<Vec<f64>> = traj
        .snapshots
        .iter()
        .map(|s| (0..grid.n_cells()).map(|i| s.u[i].powf(e) * s.v[i] * phi2[i]).collect())
        .collect();

    let mut out = DualPairingSeries {
        times: Vec::new(),
        sup_pairing: Vec::new(),
        argmax: Vec::new(),
        time_integral: 0.0,
    };
    for k in 0..z.len() - 1 {
        let (t0, t1) = (traj.snapshots[k].t, traj.snapshots[k + 1].t);
        let dt = t1 - t0;
        let mut best = 0.0f64;
        let mut arg = 0;
        for (m, psi) in dict.iter().enumerate() {
            let pairing = grid
                .integrate_with(|i| (z[k + 1][i] - z[k][i]) / dt * psi[i])
                .abs();
            if pairing > best {
                best = pairing;
                arg = m;
            }
        }
        out.times.push(0.5 * (t0 + t1));
        out.sup_pairing.push(best);
        out.argmax.push(arg);
        out.time_integral += best * dt;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn row(t: f64, mass_u: f64, mass_v: f64, sup_v: f64) -> FunctionalSample {
        FunctionalSample { t, mass_u, mass_v, sup_v, ..Default::default() }
    }

    #[test]
    fn finish_uses_smallest_margin() {
        let mut r = InequalityReport::new("x", 0.1, 1.0);
        r.margins = vec![(0.0, 0.5), (0.5, -0.05), (1.0, 0.2)];
        let r = r.finish();
        assert!(r.pass);
        assert_eq!(r.worst_time, Some(0.5));
        assert_eq!(r.min_margin(), -0.05);

        let mut r = InequalityReport::new("x", 0.1, 1.0);
        r.margins = vec![(0.0, -0.2)];
        assert!(!r.finish().pass);

        let mut r = InequalityReport::new("x", 1.0, 1.0);
        r.margins = vec![(0.0, f64::NAN)];
        assert!(!r.finish().pass);

        assert!(InequalityReport::new("empty", 0.0, 0.0).finish().pass);
    }

    #[test]
    fn csv_row_has_header_arity() {
        let mut r = InequalityReport::new("a", 0.0, 1.0);
        r.margins.push((0.0, 1.0));
        r.fitted.push(("C".into(), 2.0));
        r.notes.push("one, two".into());
        let r = r.finish();
        let n = InequalityReport::csv_header().split(',').count();
        assert_eq!(r.csv_row().split(',').count(), n);
    }

    #[test]
    fn balance_rows_detect_leaks() {
        let rows = vec![row(0.0, 1.0, 2.0, 1.0), row(0.5, 1.5, 1.5, 0.9), row(1.0, 1.8, 1.2, 0.8)];
        let consumed = [0.0, 0.5, 0.8];
        let clamped = [0.0; 3];
        let r = balance_laws_from_rows(&rows, &consumed, &clamped, 1.0, 1e-12).unwrap();
        assert!(all_pass(&r));

        let mut leaky = rows.clone();
        leaky[2].mass_u = 1.7;
        let r = balance_laws_from_rows(&leaky, &consumed, &clamped, 1.0, 1e-12).unwrap();
        assert!(!r.iter().find(|r| r.check_name == BALANCE_TOTAL).unwrap().pass);

        let mut hot = rows.clone();
        hot[1].sup_v = 1.1;
        let r = balance_laws_from_rows(&hot, &consumed, &clamped, 1.0, 1e-12).unwrap();
        assert!(!r.iter().find(|r| r.check_name == BALANCE_MAX_PRINCIPLE).unwrap().pass);
    }

    #[test]
    fn clamp_mass_is_discounted() {
        // clamping added 0.01 to u between the last two rows
        let rows = vec![row(0.0, 1.0, 2.0, 1.0), row(1.0, 1.51, 1.5, 1.0)];
        let r = balance_laws_from_rows(&rows, &[0.0, 0.5], &[0.0, 0.01], 1.0, 1e-12).unwrap();
        assert!(all_pass(&r));
        let r = balance_laws_from_rows(&rows, &[0.0, 0.5], &[0.0, 0.0], 1.0, 1e-12).unwrap();
        assert!(!all_pass(&r));
    }

    #[test]
    fn balance_rows_reject_mismatched_series() {
        let rows = vec![row(0.0, 1.0, 1.0, 1.0)];
        assert!(balance_laws_from_rows(&rows, &[], &[0.0], 0.0, 1e-12).is_err());
        assert!(balance_laws_from_rows(&[], &[], &[], 0.0, 1e-12).is_err());
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let rows: Vec<FunctionalSample> = [0.0, 0.3, 1.0]
            .iter()
            .map(|&t| FunctionalSample { t, quartic: 2.0 * t + 1.0, ..Default::default() })
            .collect();
        assert!((trapezoid(&rows, &|s| s.quartic) - 2.0).abs() < 1e-15);
    }

    fn family(quartic: &[f64]) -> Vec<Vec<FunctionalSample>> {
        quartic
            .iter()
            .map(|&q| {
                [0.0, 1.0]
                    .iter()
                    .map(|&t| FunctionalSample { t, quartic: q, logv: q, ..Default::default() })
                    .collect()
            })
            .collect()
    }

    fn quartic_report(values: &[f64]) -> InequalityReport {
        let fam = family(values);
        let rows: Vec<&[FunctionalSample]> = fam.iter().map(|r| r.as_slice()).collect();
        let eps = [1.0, 0.5, 0.25];
        dissipation_bounds_from_rows(&rows, &eps, &[1.0; 3], DISSIPATION_SLACK)
            .unwrap()
            .into_iter()
            .find(|r| r.check_name.ends_with("quartic_time_integral"))
            .unwrap()
    }

    #[test]
    fn dissipation_bound_uses_previous_maximum() {
        assert!(quartic_report(&[1.0, 2.0, 2.3]).pass);
        assert!(!quartic_report(&[1.0, 2.0, 2.5]).pass);
        assert!(quartic_report(&[0.0, 0.0, 0.0]).pass);
        assert!(!quartic_report(&[0.0, 0.0, 1e-3]).pass);
        let r = quartic_report(&[1.0, 2.0, 2.0]);
        assert!((r.min_margin() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn dissipation_family_preconditions() {
        let fam = family(&[1.0, 1.0, 1.0]);
        let rows: Vec<&[FunctionalSample]> = fam.iter().map(|r| r.as_slice()).collect();
        assert!(dissipation_bounds_from_rows(&rows[..2], &[1.0, 0.5], &[1.0; 2], 0.2).is_err());
        assert!(dissipation_bounds_from_rows(&rows, &[1.0, 0.5, 0.5], &[1.0; 3], 0.2).is_err());
        assert!(dissipation_bounds_from_rows(&rows, &[1.0, 0.5, 0.25], &[1.0, 1.0, 2.0], 0.2).is_err());
    }

    #[test]
    fn dictionary_modes_have_unit_norm() {
        let g = Grid::new(0.5, 400).unwrap();
        let psi0 = dictionary_mode(0, &g);
        let expect = 1.0 / (2.0 * g.half_length()).sqrt();
        assert!(psi0.iter().all(|&v| (v - expect).abs() < 1e-14));
        for k in 1..6 {
            let psi = dictionary_mode(k, &g);
            let w = k as f64 * std::f64::consts::PI / (2.0 * g.half_length());
            // continuous W^{3,2} norm of cos(w(x+L)) is L(1 + w² + w⁴ + w⁶)
            let scale = (g.half_length() * (1.0 + w * w + w.powi(4) + w.powi(6))).sqrt();
            let peak = psi.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            assert!((peak * scale - 1.0).abs() < 1e-3, "k={k}");
        }
    }
}
