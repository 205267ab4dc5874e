//! Scalar functionals of a state that the a priori estimates are stated in.

use crate::cutoff::Cutoff;
use crate::error::{Error, Result};
use crate::grid::{Boundary, Field};
use crate::solver::State;

/// How `q` is chosen for each `p` in the weighted-gradient functional.
#[derive(Debug, Clone, PartialEq)]
pub enum QRule {
    /// `q = 2(p+1)(p+2)/(p+4)`, the lower end of the admissible window.
    LowerWindow,
    /// One explicit `q` per entry of `p_list`.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorConfig {
    pub p_list: Vec<f64>,
    pub q_rule: QRule,
    /// Exponent in `(0, 1)` of the low-power dissipation monitor.
    pub q_tilde: f64,
    pub cutoff: Cutoff,
    pub sample_interval: f64,
    pub psi_dictionary_size: usize,
}

impl MonitorConfig {
    pub fn new(p_list: Vec<f64>, cutoff: Cutoff, sample_interval: f64) -> Self {
        Self {
            p_list,
            q_rule: QRule::LowerWindow,
            q_tilde: 0.5,
            cutoff,
            sample_interval,
            psi_dictionary_size: 8,
        }
    }

    /// `(p, q)` pairs in `p_list` order.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        match &self.q_rule {
            QRule::LowerWindow => self.p_list.iter().map(|&p| (p, q_window(p).0)).collect(),
            QRule::Explicit(qs) => self.p_list.iter().copied().zip(qs.iter().copied()).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_list.is_empty() {
            return Err(Error::invalid("p_list must not be empty"));
        }
        if let QRule::Explicit(qs) = &self.q_rule {
            if qs.len() != self.p_list.len() {
                return Err(Error::invalid("need exactly one q per p"));
            }
        }
        for (p, q) in self.pairs() {
            if !(p >= 2.0) {
                return Err(Error::invalid(format!("p must be >= 2, got {p}")));
            }
            check_window(p, q)?;
        }
        if !(self.q_tilde > 0.0 && self.q_tilde < 1.0) {
            return Err(Error::invalid(format!("q_tilde must lie in (0,1), got {}", self.q_tilde)));
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            return Err(Error::invalid("sample_interval must be positive"));
        }
        if self.psi_dictionary_size < 1 {
            return Err(Error::invalid("psi_dictionary_size must be >= 1"));
        }
        Ok(())
    }
}

/// Admissible `q` range `[2(p+1)(p+2)/(p+4), 2(p+2))` for a given `p`.
pub fn q_window(p: f64) -> (f64, f64) {
    (2.0 * (p + 1.0) * (p + 2.0) / (p + 4.0), 2.0 * (p + 2.0))
}

pub fn check_window(p: f64, q: f64) -> Result<()> {
    let (lo, hi) = q_window(p);
    if q >= lo - 1e-12 && q < hi {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "q={q} outside [{lo}, {hi}) for p={p}"
        )))
    }
}

/// Weight exponent `α = (2p-1)q/(2(p+1))`.
pub fn alpha(p: f64, q: f64) -> f64 {
    (2.0 * p - 1.0) * q / (2.0 * (p + 1.0))
}

/// Functionals that depend on the exponent `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PBlock {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    /// `∫ u^p`
    pub lp_u: f64,
    /// `∫ v^{-α} |v_x|^q`
    pub wgrad: f64,
    /// `lp_u + wgrad + 3`
    pub y: f64,
    /// `∫ u^p φ²`
    pub lp_u_cut: f64,
    /// `∫ u^{p-1} v u_x² φ²`
    pub diss_u: f64,
    /// `‖u^{(p+1)/2} v φ²‖_{W^{1,1}}`
    pub w11: f64,
}

/// One time row of monitored functionals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FunctionalSample {
    pub t: f64,
    pub mass_u: f64,
    pub mass_v: f64,
    /// `∫ uv`
    pub cross: f64,
    pub sup_v: f64,
    pub sup_abs_vx: f64,
    /// `∫ v_x² / v`
    pub fisher: f64,
    /// `∫ v_x⁴ / v³`
    pub quartic: f64,
    /// `∫ (v_x² / v) φ²`
    pub fisher_cut: f64,
    /// `∫ u^{q̃-1} v u_x² φ²`
    pub diss_q: f64,
    /// `∫ (u / v) v_x² φ²`
    pub diss_v: f64,
    /// `∫ ln(sup v₀ / v) φ²`
    pub logv: f64,
    pub per_p: Vec<PBlock>,
}

impl FunctionalSample {
    pub fn block(&self, p: f64) -> Option<&PBlock> {
        self.per_p.iter().find(|b| b.p == p)
    }

    /// Column names of [`FunctionalSample::csv_row`], stable across releases.
    pub fn csv_header(pairs: &[(f64, f64)]) -> String {
        let mut cols: Vec<String> = SCALAR_COLUMNS.iter().map(|s| s.to_string()).collect();
        for (p, _) in pairs {
            for name in P_COLUMNS {
                cols.push(format!("p{p}_{name}"));
            }
        }
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut vals = vec![
            self.t,
            self.mass_u,
            self.mass_v,
            self.cross,
            self.sup_v,
            self.sup_abs_vx,
            self.fisher,
            self.quartic,
            self.fisher_cut,
            self.diss_q,
            self.diss_v,
            self.logv,
        ];
        for b in &self.per_p {
            vals.extend([b.q, b.alpha, b.lp_u, b.wgrad, b.y, b.lp_u_cut, b.diss_u, b.w11]);
        }
        vals.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(",")
    }
}

pub const SCALAR_COLUMNS: [&str; 12] = [
    "t", "mass_u", "mass_v", "cross", "sup_v", "sup_abs_vx", "fisher", "quartic", "fisher_cut",
    "diss_q", "diss_v", "logv",
];

pub const P_COLUMNS: [&str; 8] = ["q", "alpha", "lp_u", "wgrad", "y", "lp_u_cut", "diss_u", "w11"];

fn finite(name: &'static str, t: f64, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFiniteFunctional { name, t })
    }
}

/// Evaluates every monitored functional of `s`. `baseline` is `sup v₀`.
pub fn evaluate_monitors(s: &State, cfg: &MonitorConfig, baseline: f64) -> Result<FunctionalSample> {
    if !(baseline > 0.0) {
        return Err(Error::invalid("baseline sup v0 must be positive"));
    }
    let g = &s.grid;
    let (u, v) = (&s.u, &s.v);
    let ux = g.gradient(u, Boundary::Reflective)?;
    let vx = g.gradient(v, Boundary::Reflective)?;
    let (phi2, dphi2, _) = cfg.cutoff.sample(g);
    let t = s.t;

    let mass_u = finite("mass_u", t, g.integrate_with(|i| u[i]))?;
    let mass_v = finite("mass_v", t, g.integrate_with(|i| v[i]))?;
    let cross = finite("cross", t, g.integrate_with(|i| u[i] * v[i]))?;
    let sup_v = v.max();
    let sup_abs_vx = vx.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let fisher = finite("fisher", t, g.integrate_with(|i| vx[i] * vx[i] / v[i]))?;
    let quartic = finite(
        "quartic",
        t,
        g.integrate_with(|i| vx[i].powi(4) / (v[i] * v[i] * v[i])),
    )?;
    let fisher_cut = finite(
        "fisher_cut",
        t,
        g.integrate_with(|i| vx[i] * vx[i] / v[i] * phi2[i]),
    )?;
    let qt = cfg.q_tilde;
    let diss_q = finite(
        "diss_q",
        t,
        g.integrate_with(|i| {
            if u[i] > 0.0 && phi2[i] > 0.0 {
                u[i].powf(qt - 1.0) * v[i] * ux[i] * ux[i] * phi2[i]
            } else {
                0.0
            }
        }),
    )?;
    let diss_v = finite(
        "diss_v",
        t,
        g.integrate_with(|i| u[i] / v[i] * vx[i] * vx[i] * phi2[i]),
    )?;
    let logv = finite(
        "logv",
        t,
        g.integrate_with(|i| (baseline / v[i]).ln() * phi2[i]),
    )?;

    let mut per_p = Vec::with_capacity(cfg.p_list.len());
    for (p, q) in cfg.pairs() {
        let a = alpha(p, q);
        let lp_u = finite("lp_u", t, g.integrate_with(|i| u[i].powf(p)))?;
        let wgrad = finite(
            "wgrad",
            t,
            g.integrate_with(|i| v[i].powf(-a) * vx[i].abs().powf(q)),
        )?;
        let lp_u_cut = finite("lp_u_cut", t, g.integrate_with(|i| u[i].powf(p) * phi2[i]))?;
        let diss_u = finite(
            "diss_u",
            t,
            g.integrate_with(|i| u[i].powf(p - 1.0) * v[i] * ux[i] * ux[i] * phi2[i]),
        )?;
        let w11 = finite("w11", t, w11_from_parts(s, p, &ux, &vx, &phi2, &dphi2))?;
        per_p.push(PBlock {
            p,
            q,
            alpha: a,
            lp_u,
            wgrad,
            y: lp_u + wgrad + 3.0,
            lp_u_cut,
            diss_u,
            w11,
        });
    }

    Ok(FunctionalSample {
        t,
        mass_u,
        mass_v,
        cross,
        sup_v,
        sup_abs_vx,
        fisher,
        quartic,
        fisher_cut,
        diss_q,
        diss_v,
        logv,
        per_p,
    })
}

fn w11_from_parts(s: &State, p: f64, ux: &Field, vx: &Field, phi2: &Field, dphi2: &Field) -> f64 {
    let (u, v) = (&s.u, &s.v);
    let e = 0.5 * (p + 1.0);
    s.grid.integrate_with(|i| {
        let up = u[i].powf(e);
        let z = up * v[i] * phi2[i];
        let dz = e * u[i].powf(e - 1.0) * ux[i] * v[i] * phi2[i]
            + up * vx[i] * phi2[i]
            + up * v[i] * dphi2[i];
        z.abs() + dz.abs()
    })
}

/// `∫|u^{(p+1)/2} v φ²| + ∫|(u^{(p+1)/2} v φ²)_x|`, with the derivative expanded
/// by the product rule from the discrete `u_x`, `v_x` and the exact `(φ²)_x`.
pub fn cutoff_w11_norm(s: &State, p: f64, c: &Cutoff) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(Error::invalid(format!("p must be >= 2, got {p}")));
    }
    let g = &s.grid;
    let ux = g.gradient(&s.u, Boundary::Reflective)?;
    let vx = g.gradient(&s.v, Boundary::Reflective)?;
    let (phi2, dphi2, _) = c.sample(g);
    finite("w11", s.t, w11_from_parts(s, p, &ux, &vx, &phi2, &dphi2))
}

/// `lp_u + 1 + ε^{(p(q+2)+2)/q} + ε^{q/2}`.
pub fn lemma36_bracket(lp_u: f64, p: f64, q: f64, epsilon: f64) -> f64 {
    lp_u + 1.0 + epsilon.powf((p * (q + 2.0) + 2.0) / q) + epsilon.powf(q / 2.0)
}

/// Right-hand side `C · sup v · (∫u^p + 1 + ε^{(p(q+2)+2)/q} + ε^{q/2})` of the
/// differential inequality for `∫u^p + ∫v^{-α}|v_x|^q`.
pub fn lemma36_rhs(sample: &FunctionalSample, p: f64, q: f64, epsilon: f64, fitted_c: f64) -> Result<f64> {
    check_window(p, q)?;
    let b = sample
        .block(p)
        .ok_or_else(|| Error::invalid(format!("sample has no block for p={p}")))?;
    Ok(fitted_c * sample.sup_v * lemma36_bracket(b.lp_u, p, q, epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::sync::Arc;

    fn cfg(c: Cutoff) -> MonitorConfig {
        MonitorConfig::new(vec![2.0], c, 0.1)
    }

    #[test]
    fn alpha_example() {
        assert_eq!(alpha(2.0, 4.0), 2.0);
    }

    #[test]
    fn window_example() {
        assert_eq!(q_window(2.0), (4.0, 8.0));
        assert!(check_window(2.0, 4.0).is_ok());
        assert!(check_window(2.0, 8.0).is_err());
        assert!(check_window(2.0, 3.9).is_err());
    }

    #[test]
    fn alpha_positive() {
        for &p in &[0.51, 1.0, 2.0, 7.5] {
            for &q in &[0.1, 1.0, 4.0, 20.0] {
                assert!(alpha(p, q) > 0.0);
            }
        }
    }

    fn sample_with(lp_u: f64, sup_v: f64) -> FunctionalSample {
        FunctionalSample {
            t: 0.0,
            mass_u: 0.0,
            mass_v: 0.0,
            cross: 0.0,
            sup_v,
            sup_abs_vx: 0.0,
            fisher: 0.0,
            quartic: 0.0,
            fisher_cut: 0.0,
            diss_q: 0.0,
            diss_v: 0.0,
            logv: 0.0,
            per_p: vec![PBlock {
                p: 2.0,
                q: 4.0,
                alpha: 2.0,
                lp_u,
                wgrad: 0.0,
                y: lp_u + 3.0,
                lp_u_cut: 0.0,
                diss_u: 0.0,
                w11: 0.0,
            }],
        }
    }

    #[test]
    fn lemma36_examples() {
        let s = sample_with(0.0, 1.0);
        // ε = 1: both ε-powers equal 1
        assert_eq!(lemma36_rhs(&s, 2.0, 4.0, 1.0, 1.0).unwrap(), 3.0);
        let expected = 1.0 + 0.5f64.powf(3.5) + 0.25;
        let got = lemma36_rhs(&s, 2.0, 4.0, 0.5, 1.0).unwrap();
        assert!((got - 1.338_388_347_648_318_5).abs() < 1e-12);
        assert!((got - expected).abs() < 1e-15);
        assert!(lemma36_rhs(&s, 2.0, 8.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn homogeneous_state_functionals() {
        let g = Arc::new(Grid::new(0.5, 64).unwrap());
        let c = Cutoff::new(0.5, 1.5).unwrap();
        let s = State::new(g.clone(), 0.0, g.constant(0.7), g.constant(0.4)).unwrap();
        let f = evaluate_monitors(&s, &cfg(c), 0.9).unwrap();
        assert_eq!(f.fisher, 0.0);
        assert_eq!(f.quartic, 0.0);
        assert_eq!(f.per_p[0].wgrad, 0.0);
        let (phi2, dphi2, _) = c.sample(&g);
        let int_phi2 = g.integrate(&phi2).unwrap();
        let int_dphi2 = g.integrate(&dphi2.map(f64::abs)).unwrap();
        assert!((f.logv - (0.9f64 / 0.4).ln() * int_phi2).abs() < 1e-12);
        assert!(f.logv > 0.0);
        let w = 0.7f64.powf(1.5) * 0.4 * (int_phi2 + int_dphi2);
        assert!((f.per_p[0].w11 - w).abs() < 1e-12);
        assert!((cutoff_w11_norm(&s, 2.0, &c).unwrap() - w).abs() < 1e-12);
        assert!((f.per_p[0].y - (0.7f64.powi(2) * 4.0 + 3.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_u_w11_is_zero() {
        let g = Arc::new(Grid::new(0.5, 32).unwrap());
        let c = Cutoff::new(0.5, 1.5).unwrap();
        let s = State::new(g.clone(), 0.0, g.constant(0.0), g.sample(|x| 1.0 + 0.1 * x)).unwrap();
        assert_eq!(cutoff_w11_norm(&s, 2.0, &c).unwrap(), 0.0);
        assert!(cutoff_w11_norm(&s, 1.5, &c).is_err());
    }

    #[test]
    fn sech_fisher() {
        let g = Arc::new(Grid::new(0.05, 32768).unwrap());
        let c = Cutoff::new(0.5, 1.5).unwrap();
        let s = State::new(g.clone(), 0.0, g.constant(0.0), g.sample(|x| 1.0 / x.cosh())).unwrap();
        let f = evaluate_monitors(&s, &cfg(c), 1.0).unwrap();
        assert!((f.fisher - std::f64::consts::FRAC_PI_2).abs() < 1e-6, "{}", f.fisher);
    }

    #[test]
    fn tiny_v_is_reported_not_clipped() {
        let g = Arc::new(Grid::new(0.5, 32).unwrap());
        let c = Cutoff::new(0.5, 1.5).unwrap();
        let v = g.sample(|x| if x > 0.0 { 1.0 } else { 1e-300 });
        let s = State::new(g.clone(), 0.0, g.constant(1.0), v).unwrap();
        let err = evaluate_monitors(&s, &cfg(c), 1.0).unwrap_err();
        assert!(matches!(err, Error::NonFiniteFunctional { .. }));
    }

    #[test]
    fn csv_header_matches_row() {
        let s = sample_with(1.0, 1.0);
        let h = FunctionalSample::csv_header(&[(2.0, 4.0)]);
        assert_eq!(h.split(',').count(), s.csv_row().split(',').count());
        assert!(h.starts_with("t,mass_u,mass_v"));
        assert!(h.contains("p2_wgrad"));
    }
}
