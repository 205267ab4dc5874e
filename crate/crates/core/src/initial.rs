//! Analytic initial-data families, the perturbed start `u₀ + εζ`, and a
//! numerical validator for the integrability hypotheses on the data.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::solver::State;

/// Family for the initial bacterial density `u₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum U0Family {
    /// `a·exp(-x²/(2σ²))`
    Gaussian { amplitude: f64, sigma: f64 },
    /// `a·exp(-1/(1-(x/w)²))` on `|x| < w`, zero elsewhere
    CompactBump { amplitude: f64, width: f64 },
    Zero,
    /// Not integrable on ℝ; only for hypothesis-exempt fixtures.
    Constant { value: f64 },
}

/// Family for the initial nutrient concentration `v₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum V0Family {
    /// `b·sech(κx)`
    Sech { amplitude: f64, kappa: f64 },
    /// `floor + b·exp(-x²/(2σ²))`
    GaussianPos { amplitude: f64, sigma: f64, floor: f64 },
    /// Not integrable on ℝ; only for hypothesis-exempt fixtures.
    Constant { value: f64 },
}

/// Perturbation profile `ζ` added as `εζ` to `u₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZetaFamily {
    /// `a·exp(-x²/(2σ²))`; the default is `a = σ = 1`.
    Gaussian { amplitude: f64, sigma: f64 },
    Constant { value: f64 },
    /// No perturbation; only for hypothesis-exempt fixtures.
    Off,
}

impl Default for ZetaFamily {
    fn default() -> Self {
        ZetaFamily::Gaussian { amplitude: 1.0, sigma: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialDataSpec {
    pub u0: U0Family,
    pub v0: V0Family,
    pub zeta: ZetaFamily,
    pub hypothesis_exempt: bool,
}

impl U0Family {
    /// Value and derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match *self {
            U0Family::Gaussian { amplitude, sigma } => {
                let f = amplitude * (-x * x / (2.0 * sigma * sigma)).exp();
                (f, -x / (sigma * sigma) * f)
            }
            U0Family::CompactBump { amplitude, width } => {
                let s = x / width;
                if s.abs() >= 1.0 {
                    return (0.0, 0.0);
                }
                let z = 1.0 - s * s;
                let f = amplitude * (-1.0 / z).exp();
                (f, f * (-2.0 * s / width) / (z * z))
            }
            U0Family::Zero => (0.0, 0.0),
            U0Family::Constant { value } => (value, 0.0),
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            U0Family::Gaussian { sigma, .. } => sigma,
            U0Family::CompactBump { width, .. } => width,
            U0Family::Zero | U0Family::Constant { .. } => 1.0,
        }
    }

    fn validate(&self, exempt: bool) -> Result<()> {
        match *self {
            U0Family::Gaussian { amplitude, sigma } => {
                positive("u0 gaussian sigma", sigma)?;
                nonneg("u0 gaussian amplitude", amplitude)
            }
            U0Family::CompactBump { amplitude, width } => {
                positive("u0 bump width", width)?;
                nonneg("u0 bump amplitude", amplitude)
            }
            U0Family::Zero => Ok(()),
            U0Family::Constant { value } => {
                require_exempt(exempt, "constant u0")?;
                nonneg("u0 constant", value)
            }
        }
    }
}

impl V0Family {
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match *self {
            V0Family::Sech { amplitude, kappa } => {
                let y = kappa * x;
                let s = 1.0 / y.cosh();
                let f = amplitude * s;
                (f, -kappa * f * y.tanh())
            }
            V0Family::GaussianPos { amplitude, sigma, floor } => {
                let g = amplitude * (-x * x / (2.0 * sigma * sigma)).exp();
                (floor + g, -x / (sigma * sigma) * g)
            }
            V0Family::Constant { value } => (value, 0.0),
        }
    }

    /// `(ln v₀, (ln v₀)_x)`, evaluated without underflow in the far field.
    pub fn log_eval(&self, x: f64) -> (f64, f64) {
        match *self {
            V0Family::Sech { amplitude, kappa } => {
                let y = kappa * x;
                let a = y.abs();
                let ln_cosh = a + ((1.0 + (-2.0 * a).exp()) / 2.0).ln();
                (amplitude.ln() - ln_cosh, -kappa * y.tanh())
            }
            V0Family::GaussianPos { amplitude, sigma, floor } if floor == 0.0 => {
                let s2 = sigma * sigma;
                (amplitude.ln() - x * x / (2.0 * s2), -x / s2)
            }
            _ => {
                let (f, d) = self.eval(x);
                (f.ln(), d / f)
            }
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            V0Family::Sech { kappa, .. } => 1.0 / kappa,
            V0Family::GaussianPos { sigma, .. } => sigma,
            V0Family::Constant { .. } => 1.0,
        }
    }

    fn validate(&self, exempt: bool) -> Result<()> {
        match *self {
            V0Family::Sech { amplitude, kappa } => {
                positive("v0 sech kappa", kappa)?;
                positive("v0 sech amplitude", amplitude)
            }
            V0Family::GaussianPos { amplitude, sigma, floor } => {
                positive("v0 gaussian sigma", sigma)?;
                nonneg("v0 gaussian amplitude", amplitude)?;
                nonneg("v0 gaussian floor", floor)
            }
            V0Family::Constant { value } => {
                require_exempt(exempt, "constant v0")?;
                positive("v0 constant", value)
            }
        }
    }
}

impl ZetaFamily {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ZetaFamily::Gaussian { amplitude, sigma } => {
                amplitude * (-x * x / (2.0 * sigma * sigma)).exp()
            }
            ZetaFamily::Constant { value } => value,
            ZetaFamily::Off => 0.0,
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            ZetaFamily::Gaussian { sigma, .. } => sigma,
            _ => 1.0,
        }
    }

    fn validate(&self, exempt: bool) -> Result<()> {
        match *self {
            ZetaFamily::Gaussian { amplitude, sigma } => {
                positive("zeta amplitude", amplitude)?;
                positive("zeta sigma", sigma)
            }
            ZetaFamily::Constant { value } => {
                require_exempt(exempt, "constant zeta")?;
                positive("zeta constant", value)
            }
            ZetaFamily::Off => require_exempt(exempt, "zeta off"),
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {x}")))
    }
}

fn nonneg(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be nonnegative, got {x}")))
    }
}

fn require_exempt(exempt: bool, what: &str) -> Result<()> {
    if exempt {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{what} is only allowed for hypothesis-exempt fixtures"
        )))
    }
}

impl InitialDataSpec {
    pub fn new(u0: U0Family, v0: V0Family) -> Self {
        Self {
            u0,
            v0,
            zeta: ZetaFamily::default(),
            hypothesis_exempt: false,
        }
    }

    /// `u₀ = gaussian(1, 1)`, `v₀ = sech(1, 1)`, default `ζ`.
    pub fn gaussian_fixture() -> Self {
        Self::new(
            U0Family::Gaussian { amplitude: 1.0, sigma: 1.0 },
            V0Family::Sech { amplitude: 1.0, kappa: 1.0 },
        )
    }

    /// Spatially homogeneous `u₀ ≡ a`, `v₀ ≡ b` with no perturbation.
    pub fn homogeneous(a: f64, b: f64) -> Self {
        Self {
            u0: U0Family::Constant { value: a },
            v0: V0Family::Constant { value: b },
            zeta: ZetaFamily::Off,
            hypothesis_exempt: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.u0.validate(self.hypothesis_exempt)?;
        self.v0.validate(self.hypothesis_exempt)?;
        self.zeta.validate(self.hypothesis_exempt)
    }

    /// Supremum of `v₀` over ℝ.
    pub fn sup_v0(&self) -> f64 {
        match self.v0 {
            V0Family::Sech { amplitude, .. } => amplitude,
            V0Family::GaussianPos { amplitude, floor, .. } => amplitude + floor,
            V0Family::Constant { value } => value,
        }
    }

    /// Samples `u = u₀ + εζ` and `v = v₀` at the cell centers.
    pub fn build_initial(&self, grid: Arc<Grid>) -> Result<State> {
        self.validate()?;
        let eps = grid.epsilon();
        let u = grid.sample(|x| self.u0.eval(x).0 + eps * self.zeta.eval(x));
        let v = grid.sample(|x| self.v0.eval(x).0);
        if let Some(i) = u.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Positivity(format!(
                "u not strictly positive at x={}: {}",
                grid.centers()[i],
                u[i]
            )));
        }
        if let Some(i) = v.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Positivity(format!(
                "v0 not strictly positive at x={}: {}",
                grid.centers()[i],
                v[i]
            )));
        }
        State::new(grid, 0.0, u, v)
    }

    /// Evaluates the integrability hypotheses for the exponents in `p_list`.
    pub fn validate_hypotheses(&self, p_list: &[f64]) -> Result<HypothesisReport> {
        self.validate()?;
        if self.hypothesis_exempt {
            return Err(Error::invalid(
                "hypothesis-exempt data has nothing to validate",
            ));
        }
        if p_list.is_empty() || p_list.iter().any(|&p| !(p >= 2.0)) {
            return Err(Error::invalid("p_list must be nonempty with every p >= 2"));
        }

        let scale_max = self.u0.scale().max(self.v0.scale()).max(self.zeta.scale());
        let scale_min = self.u0.scale().min(self.v0.scale()).min(self.zeta.scale());
        let radius = 30.0 * scale_max;
        let h = scale_min / 200.0;

        let mut checks = Vec::new();
        let mut check = |name: String, f: &dyn Fn(f64) -> f64| {
            let inner = simpson(f, -radius, radius, h);
            let outer = simpson(f, -2.0 * radius, 2.0 * radius, h);
            let tail = (outer - inner).abs();
            let ok = inner.is_finite() && outer.is_finite() && tail < TAIL_TOL;
            checks.push(HypothesisCheck {
                name,
                value: inner,
                tail,
                pass: ok,
            });
            inner
        };

        let int_u0 = check("int_u0".into(), &|x| self.u0.eval(x).0);
        let int_v0 = check("int_v0".into(), &|x| self.v0.eval(x).0);
        let int_zeta = check("int_zeta".into(), &|x| self.zeta.eval(x));
        let fisher = check("int_v0x2_over_v0".into(), &|x| {
            let (lv, dlv) = self.v0.log_eval(x);
            lv.exp() * dlv * dlv
        });

        let mut per_p = Vec::with_capacity(p_list.len());
        for &p in p_list {
            let int_u0_p = check(format!("int_u0^p[p={p}]"), &|x| self.u0.eval(x).0.powf(p));
            let s = 3.0 / (2.0 * (p + 1.0));
            let m = hip01_exponent(p);
            let hip01 = check(format!("hip01[p={p}]"), &|x| {
                let (lv, dlv) = self.v0.log_eval(x);
                (s * (s * lv).exp() * dlv).abs().powf(m)
            });
            per_p.push(PHypothesis { p, int_u0_p, hip01 });
        }

        let (mut sup_u0, mut sup_du0, mut sup_dv0) = (0.0f64, 0.0f64, 0.0f64);
        let n = (2.0 * radius / h).ceil() as usize;
        for i in 0..=n {
            let x = -radius + 2.0 * radius * i as f64 / n as f64;
            let (u, du) = self.u0.eval(x);
            let (_, dv) = self.v0.eval(x);
            sup_u0 = sup_u0.max(u.abs());
            sup_du0 = sup_du0.max(du.abs());
            sup_dv0 = sup_dv0.max(dv.abs());
        }
        let sup_v0 = self.sup_v0();

        let pass = checks.iter().all(|c| c.pass)
            && [sup_u0, sup_du0, sup_dv0, sup_v0].iter().all(|x| x.is_finite());
        let k = checks
            .iter()
            .map(|c| c.value)
            .chain([sup_v0])
            .fold(0.0f64, f64::max);

        Ok(HypothesisReport {
            k,
            int_u0,
            int_v0,
            sup_v0,
            int_zeta,
            fisher,
            sup_u0,
            sup_du0,
            sup_dv0,
            per_p,
            checks,
            pass,
        })
    }
}

const TAIL_TOL: f64 = 1e-8;

/// Exponent `2(p+1)(p+2)/(p+4)` of the gradient hypothesis.
pub fn hip01_exponent(p: f64) -> f64 {
    2.0 * (p + 1.0) * (p + 2.0) / (p + 4.0)
}

/// Composite Simpson rule with step at most `h`.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, h: f64) -> f64 {
    let mut n = ((b - a) / h).ceil() as usize;
    if n % 2 == 1 {
        n += 1;
    }
    let step = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * step);
    }
    acc * step / 3.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub name: String,
    pub value: f64,
    /// Change of the integral when the integration radius doubles.
    pub tail: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PHypothesis {
    pub p: f64,
    pub int_u0_p: f64,
    /// `∫|(v₀^{3/(2(p+1))})_x|^{2(p+1)(p+2)/(p+4)}`
    pub hip01: f64,
}

/// Outcome of [`InitialDataSpec::validate_hypotheses`]. Only the listed `p` are
/// checked; the exponential decay of every shipped `v₀` family covers the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub k: f64,
    pub int_u0: f64,
    pub int_v0: f64,
    pub sup_v0: f64,
    pub int_zeta: f64,
    /// `∫ v₀ₓ² / v₀`
    pub fisher: f64,
    pub sup_u0: f64,
    pub sup_du0: f64,
    pub sup_dv0: f64,
    pub per_p: Vec<PHypothesis>,
    pub checks: Vec<HypothesisCheck>,
    pub pass: bool,
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "hypotheses: {} (K = {:.6e})", if self.pass { "PASS" } else { "FAIL" }, self.k)?;
        for c in &self.checks {
            writeln!(
                f,
                "  {:<28} {:>14.6e}  tail {:.1e}  {}",
                c.name,
                c.value,
                c.tail,
                if c.pass { "ok" } else { "FAIL" }
            )?;
        }
        write!(f, "  note: checked for the listed p only")
    }
}

/// Named initial-data fixtures shipped with the tool.
pub fn catalogue() -> Vec<(&'static str, InitialDataSpec)> {
    vec![
        ("gaussian", InitialDataSpec::gaussian_fixture()),
        (
            "bump",
            InitialDataSpec::new(
                U0Family::CompactBump { amplitude: 1.0, width: 1.0 },
                V0Family::GaussianPos { amplitude: 1.0, sigma: 2.0, floor: 0.0 },
            ),
        ),
        (
            "zero",
            InitialDataSpec::new(U0Family::Zero, V0Family::Sech { amplitude: 1.0, kappa: 1.0 }),
        ),
        ("homogeneous", InitialDataSpec::homogeneous(1.0, 1.0)),
    ]
}

pub fn fixture(name: &str) -> Option<InitialDataSpec> {
    catalogue()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| s)
}
