//! Flat `key = value` run configuration.
//!
//! Blank lines and text after `#` are ignored. Every key may appear once,
//! except `gn_case`, which accumulates. See `docs/schema.md` for the keys.

use std::path::Path;
use std::sync::Arc;

use crate::cutoff::Cutoff;
use crate::error::{Error, Result};
use crate::functionals::{MonitorConfig, QRule};
use crate::gn::{GnCase, Sampler, GN_EPSILONS};
use crate::grid::Grid;
use crate::initial::{fixture, InitialDataSpec, U0Family, V0Family, ZetaFamily};
use crate::limit::cells_for;
use crate::solver::SolverParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Sweep,
    Verify,
    GnTest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: InitialDataSpec,
    pub params: SolverParams,
    pub monitors: MonitorConfig,
    pub epsilon: Option<f64>,
    pub n_cells: Option<usize>,
    pub dx: Option<f64>,
    pub epsilons: Vec<f64>,
    pub horizon: f64,
    /// Half-width of the comparison window; defaults to 90% of the smallest ball.
    pub window: Option<f64>,
    pub q_dist: Vec<f64>,
    pub tol_rel: f64,
    pub slack: f64,
    pub inflation: f64,
    /// End time of the weak-form test bank; defaults to 80% of the horizon.
    pub bank_t_end: Option<f64>,
    pub seed: u64,
    pub gn_cases: Vec<GnCase>,
    pub gn_samples: usize,
    pub gn_sampler: Sampler,
    pub gn_epsilons: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let seed = 42;
        Self {
            spec: InitialDataSpec::gaussian_fixture(),
            params: SolverParams::default(),
            monitors: MonitorConfig::new(vec![2.0], Cutoff::new(0.4, 0.9).expect("valid"), 0.05),
            epsilon: None,
            n_cells: None,
            dx: None,
            epsilons: Vec::new(),
            horizon: 1.0,
            window: None,
            q_dist: vec![1.0],
            tol_rel: 1e-10,
            slack: crate::harness::DISSIPATION_SLACK,
            inflation: 0.1,
            bank_t_end: None,
            seed,
            gn_cases: Vec::new(),
            gn_samples: 400,
            gn_sampler: Sampler::Trig { degree: 8, seed },
            gn_epsilons: GN_EPSILONS.to_vec(),
        }
    }
}

fn cfg_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn num(line: usize, key: &str, tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| cfg_err(line, format!("`{key}`: `{tok}` is not a finite number")))
}

fn nums(line: usize, key: &str, val: &str) -> Result<Vec<f64>> {
    val.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| num(line, key, t))
        .collect()
}

fn count(line: usize, key: &str, val: &str) -> Result<usize> {
    val.parse::<usize>()
        .map_err(|_| cfg_err(line, format!("`{key}`: `{val}` is not a nonnegative integer")))
}

fn family_args(line: usize, key: &str, val: &str) -> Result<(String, Vec<f64>)> {
    let mut toks = val.split_whitespace();
    let name = toks
        .next()
        .ok_or_else(|| cfg_err(line, format!("`{key}` needs a family name")))?
        .to_string();
    let args = toks.map(|t| num(line, key, t)).collect::<Result<Vec<_>>>()?;
    Ok((name, args))
}

fn arity(line: usize, key: &str, name: &str, args: &[f64], n: usize) -> Result<()> {
    if args.len() == n {
        Ok(())
    } else {
        Err(cfg_err(
            line,
            format!("`{key} = {name}` takes {n} numbers, got {}", args.len()),
        ))
    }
}

fn parse_u0(line: usize, val: &str) -> Result<U0Family> {
    let (name, a) = family_args(line, "u0", val)?;
    let f = match name.as_str() {
        "gaussian" => {
            arity(line, "u0", &name, &a, 2)?;
            U0Family::Gaussian { amplitude: a[0], sigma: a[1] }
        }
        "bump" => {
            arity(line, "u0", &name, &a, 2)?;
            U0Family::CompactBump { amplitude: a[0], width: a[1] }
        }
        "zero" => {
            arity(line, "u0", &name, &a, 0)?;
            U0Family::Zero
        }
        "constant" => {
            arity(line, "u0", &name, &a, 1)?;
            U0Family::Constant { value: a[0] }
        }
        _ => return Err(cfg_err(line, format!("unknown u0 family `{name}`"))),
    };
    Ok(f)
}

fn parse_v0(line: usize, val: &str) -> Result<V0Family> {
    let (name, a) = family_args(line, "v0", val)?;
    let f = match name.as_str() {
        "sech" => {
            arity(line, "v0", &name, &a, 2)?;
            V0Family::Sech { amplitude: a[0], kappa: a[1] }
        }
        "gaussian" => {
            arity(line, "v0", &name, &a, 3)?;
            V0Family::GaussianPos { amplitude: a[0], sigma: a[1], floor: a[2] }
        }
        "constant" => {
            arity(line, "v0", &name, &a, 1)?;
            V0Family::Constant { value: a[0] }
        }
        _ => return Err(cfg_err(line, format!("unknown v0 family `{name}`"))),
    };
    Ok(f)
}

fn parse_zeta(line: usize, val: &str) -> Result<ZetaFamily> {
    let (name, a) = family_args(line, "zeta", val)?;
    let f = match name.as_str() {
        "gaussian" => {
            arity(line, "zeta", &name, &a, 2)?;
            ZetaFamily::Gaussian { amplitude: a[0], sigma: a[1] }
        }
        "constant" => {
            arity(line, "zeta", &name, &a, 1)?;
            ZetaFamily::Constant { value: a[0] }
        }
        "off" => {
            arity(line, "zeta", &name, &a, 0)?;
            ZetaFamily::Off
        }
        _ => return Err(cfg_err(line, format!("unknown zeta family `{name}`"))),
    };
    Ok(f)
}

fn parse_gn_case(line: usize, val: &str) -> Result<GnCase> {
    let (name, a) = family_args(line, "gn_case", val)?;
    let case = match name.as_str() {
        "gn1" => {
            arity(line, "gn_case", &name, &a, 4)?;
            GnCase::gn1(a[0], a[1], a[2], a[3])
        }
        "gn2" => {
            arity(line, "gn_case", &name, &a, 2)?;
            GnCase::gn2(a[0], a[1])
        }
        _ => return Err(cfg_err(line, format!("unknown gn_case `{name}`, expected gn1 or gn2"))),
    };
    case.map_err(|e| cfg_err(line, e.to_string()))
}

fn parse_bool(line: usize, key: &str, val: &str) -> Result<bool> {
    match val {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(cfg_err(line, format!("`{key}`: expected true or false, got `{val}`"))),
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err(0, format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        let mut p_list: Option<Vec<f64>> = None;
        let mut q_list: Option<Vec<f64>> = None;
        let mut cutoff = (0.4, 0.9);
        let mut gn_family = "trig".to_string();
        let mut gn_degree = 8;
        let mut gn_bumps = 4;
        let mut exempt: Option<bool> = None;
        let mut pieces: (Option<U0Family>, Option<V0Family>, Option<ZetaFamily>) = (None, None, None);

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, val) = body
                .split_once('=')
                .ok_or_else(|| cfg_err(line, format!("expected `key = value`, got `{body}`")))?;
            let (key, val) = (key.trim(), val.trim());
            if key != "gn_case" {
                if seen.iter().any(|k| k == key) {
                    return Err(cfg_err(line, format!("duplicate key `{key}`")));
                }
                seen.push(key.to_string());
            }
            let one = |v: &str| num(line, key, v);
            match key {
                "fixture" => {
                    c.spec = fixture(val).ok_or_else(|| cfg_err(line, format!("unknown fixture `{val}`")))?;
                }
                "u0" => pieces.0 = Some(parse_u0(line, val)?),
                "v0" => pieces.1 = Some(parse_v0(line, val)?),
                "zeta" => pieces.2 = Some(parse_zeta(line, val)?),
                "exempt" => exempt = Some(parse_bool(line, key, val)?),
                "chi" => c.params.chi = one(val)?,
                "cfl_safety" => c.params.cfl_safety = one(val)?,
                "dt_max" => c.params.dt_max = one(val)?,
                "positivity_floor" => c.params.positivity_floor = one(val)?,
                "max_halvings" => c.params.max_halvings = count(line, key, val)?,
                "epsilon" => c.epsilon = Some(one(val)?),
                "epsilons" => c.epsilons = nums(line, key, val)?,
                "n_cells" => c.n_cells = Some(count(line, key, val)?),
                "dx" => c.dx = Some(one(val)?),
                "T" => c.horizon = one(val)?,
                "sample_interval" => c.monitors.sample_interval = one(val)?,
                "p" => p_list = Some(nums(line, key, val)?),
                "q" => q_list = Some(nums(line, key, val)?),
                "q_tilde" => c.monitors.q_tilde = one(val)?,
                "cutoff" => {
                    let v = nums(line, key, val)?;
                    if v.len() != 2 {
                        return Err(cfg_err(line, "`cutoff` takes R and S"));
                    }
                    cutoff = (v[0], v[1]);
                }
                "psi_dictionary_size" => c.monitors.psi_dictionary_size = count(line, key, val)?,
                "window" => c.window = Some(one(val)?),
                "q_dist" => c.q_dist = nums(line, key, val)?,
                "tol_rel" => c.tol_rel = one(val)?,
                "slack" => c.slack = one(val)?,
                "inflation" => c.inflation = one(val)?,
                "bank_t_end" => c.bank_t_end = Some(one(val)?),
                "seed" => {
                    c.seed = val
                        .parse()
                        .map_err(|_| cfg_err(line, format!("`seed`: `{val}` is not an integer")))?
                }
                "gn_case" => c.gn_cases.push(parse_gn_case(line, val)?),
                "gn_samples" => c.gn_samples = count(line, key, val)?,
                "gn_family" => gn_family = val.to_string(),
                "gn_degree" => gn_degree = count(line, key, val)?,
                "gn_bumps" => gn_bumps = count(line, key, val)?,
                "gn_epsilons" => c.gn_epsilons = nums(line, key, val)?,
                _ => return Err(cfg_err(line, format!("unknown key `{key}`"))),
            }
        }

        if let Some(u0) = pieces.0 {
            c.spec.u0 = u0;
        }
        if let Some(v0) = pieces.1 {
            c.spec.v0 = v0;
        }
        if let Some(z) = pieces.2 {
            c.spec.zeta = z;
        }
        if let Some(e) = exempt {
            c.spec.hypothesis_exempt = e;
        }
        c.monitors.cutoff = Cutoff::new(cutoff.0, cutoff.1).map_err(|e| cfg_err(0, e.to_string()))?;
        if let Some(p) = p_list {
            c.monitors.p_list = p;
        }
        if let Some(q) = q_list {
            c.monitors.q_rule = QRule::Explicit(q);
        }
        c.gn_sampler = match gn_family.as_str() {
            "trig" => Sampler::Trig { degree: gn_degree, seed: c.seed },
            "bumps" => Sampler::Bumps { max_bumps: gn_bumps, seed: c.seed },
            other => return Err(cfg_err(0, format!("unknown gn_family `{other}`"))),
        };
        Ok(c)
    }

    /// Grid for a single run: `epsilon` plus either `n_cells` or `dx`.
    pub fn grid(&self) -> Result<Arc<Grid>> {
        let eps = self
            .epsilon
            .ok_or_else(|| Error::invalid("`epsilon` is required"))?;
        let n = match (self.n_cells, self.dx) {
            (Some(n), None) => n,
            (None, Some(dx)) => cells_for(eps, dx)?,
            (Some(_), Some(_)) => return Err(Error::invalid("give either `n_cells` or `dx`, not both")),
            (None, None) => return Err(Error::invalid("one of `n_cells` or `dx` is required")),
        };
        Ok(Arc::new(Grid::new(eps, n)?))
    }

    /// Spacing shared by the sweep members.
    pub fn sweep_dx(&self) -> Result<f64> {
        match (self.dx, self.n_cells) {
            (Some(dx), None) => Ok(dx),
            (None, Some(n)) => {
                let e0 = *self.epsilons.first().ok_or_else(|| Error::invalid("`epsilons` is required"))?;
                Ok(2.0 / (e0 * n as f64))
            }
            _ => Err(Error::invalid("a sweep needs exactly one of `dx` or `n_cells` (for the largest epsilon)")),
        }
    }

    /// Default comparison window: 90% of the smallest ball.
    pub fn window_or_default(&self, smallest_radius: f64) -> f64 {
        self.window.unwrap_or(0.9 * smallest_radius)
    }

    pub fn bank_t_end_or_default(&self) -> f64 {
        self.bank_t_end.unwrap_or(0.8 * self.horizon)
    }

    /// Checks every parameter the subcommand will use, before any compute.
    pub fn validate_for(&self, cmd: Command) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("`{name}` must be positive, got {v}")))
            }
        };
        match cmd {
            Command::Verify => {
                self.monitors.validate()?;
                positive("tol_rel", self.tol_rel)?;
            }
            Command::Simulate => {
                self.spec.validate()?;
                self.params.validate()?;
                self.monitors.validate()?;
                let g = self.grid()?;
                self.monitors.cutoff.ensure_fits(&g)?;
                if !(self.horizon >= 0.0) {
                    return Err(Error::invalid("`T` must be nonnegative"));
                }
                positive("tol_rel", self.tol_rel)?;
            }
            Command::Sweep => {
                self.spec.validate()?;
                if self.spec.hypothesis_exempt {
                    return Err(Error::invalid("hypothesis-exempt data cannot be used in a sweep"));
                }
                self.params.validate()?;
                self.monitors.validate()?;
                if self.epsilons.len() < 3 {
                    return Err(Error::invalid("`epsilons` needs at least 3 values"));
                }
                if self.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
                    return Err(Error::invalid("`epsilons` must be strictly decreasing"));
                }
                let dx = self.sweep_dx()?;
                for &e in &self.epsilons {
                    let g = Grid::new(e, cells_for(e, dx)?)?;
                    self.monitors.cutoff.ensure_fits(&g)?;
                }
                let r = 1.0 / self.epsilons[0];
                let w = self.window_or_default(r);
                if !(w > 0.0 && w < r) {
                    return Err(Error::invalid(format!("`window` must lie in (0, {r})")));
                }
                positive("T", self.horizon)?;
                positive("tol_rel", self.tol_rel)?;
                positive("slack", self.slack)?;
                positive("inflation", self.inflation)?;
                if self.q_dist.is_empty() || self.q_dist.iter().any(|&q| !(q >= 1.0)) {
                    return Err(Error::invalid("`q_dist` values must be >= 1"));
                }
                let te = self.bank_t_end_or_default();
                if !(te > 0.0 && te <= self.horizon) {
                    return Err(Error::invalid("`bank_t_end` must lie in (0, T]"));
                }
            }
            Command::GnTest => {
                if self.gn_cases.is_empty() {
                    return Err(Error::invalid("gn-test needs at least one `gn_case`"));
                }
                if self.gn_samples < 100 {
                    return Err(Error::invalid("`gn_samples` must be at least 100"));
                }
                if self.gn_epsilons.is_empty() || self.gn_epsilons.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
                    return Err(Error::invalid("`gn_epsilons` must lie in (0, 1]"));
                }
                match self.gn_sampler {
                    Sampler::Trig { degree, .. } if degree == 0 => {
                        return Err(Error::invalid("`gn_degree` must be >= 1"))
                    }
                    Sampler::Bumps { max_bumps, .. } if max_bumps == 0 => {
                        return Err(Error::invalid("`gn_bumps` must be >= 1"))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_simulate_config() {
        let c = RunConfig::parse(
            "# comment\nfixture = homogeneous\nepsilon = 1\nn_cells = 64 # trailing\nT = 0.5\n\
             sample_interval = 0.1\np = 2 3\ncutoff = 0.3 0.8\n",
        )
        .unwrap();
        assert_eq!(c.spec, InitialDataSpec::homogeneous(1.0, 1.0));
        assert_eq!(c.grid().unwrap().n_cells(), 64);
        assert_eq!(c.monitors.p_list, vec![2.0, 3.0]);
        assert_eq!(c.monitors.cutoff, Cutoff::new(0.3, 0.8).unwrap());
        c.validate_for(Command::Simulate).unwrap();
    }

    #[test]
    fn families_override_fixture() {
        let c = RunConfig::parse("u0 = bump 2 0.5\nv0 = gaussian 1 2 0.1\nzeta = constant 0.5\nexempt = true\n").unwrap();
        assert_eq!(c.spec.u0, U0Family::CompactBump { amplitude: 2.0, width: 0.5 });
        assert_eq!(c.spec.v0, V0Family::GaussianPos { amplitude: 1.0, sigma: 2.0, floor: 0.1 });
        assert_eq!(c.spec.zeta, ZetaFamily::Constant { value: 0.5 });
        assert!(c.spec.hypothesis_exempt);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = RunConfig::parse("epsilon = 1\nbogus = 3\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }), "{e}");
        let e = RunConfig::parse("epsilon = 1\nepsilon = 2\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }));
        let e = RunConfig::parse("u0 = gaussian 1\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 1, .. }));
        assert!(RunConfig::parse("dt_max = nan\n").is_err());
        assert!(RunConfig::parse("no equals sign\n").is_err());
    }

    #[test]
    fn gn_cases_accumulate() {
        let c = RunConfig::parse("gn_case = gn1 4 2 2 2\ngn_case = gn2 2 2\ngn_family = bumps\nseed = 7\n").unwrap();
        assert_eq!(c.gn_cases.len(), 2);
        assert_eq!(c.gn_sampler, Sampler::Bumps { max_bumps: 4, seed: 7 });
        c.validate_for(Command::GnTest).unwrap();
        assert!(RunConfig::parse("gn_case = gn1 2 3 2 1\n").is_err());
    }

    #[test]
    fn sweep_validation() {
        let ok = "epsilons = 0.5 0.25 0.125\ndx = 0.0625\nwindow = 1\n";
        RunConfig::parse(ok).unwrap().validate_for(Command::Sweep).unwrap();
        let short = RunConfig::parse("epsilons = 0.5 0.25\ndx = 0.0625\n").unwrap();
        assert!(short.validate_for(Command::Sweep).is_err());
        let exempt = RunConfig::parse(&format!("{ok}fixture = homogeneous\n")).unwrap();
        assert!(exempt.validate_for(Command::Sweep).is_err());
        let wide = RunConfig::parse("epsilons = 0.5 0.25 0.125\ndx = 0.0625\nwindow = 3\n").unwrap();
        assert!(wide.validate_for(Command::Sweep).is_err());
    }

    #[test]
    fn simulate_needs_grid() {
        let c = RunConfig::parse("epsilon = 0.5\n").unwrap();
        assert!(c.validate_for(Command::Simulate).is_err());
        let c = RunConfig::parse("epsilon = 0.5\ndx = 0.0625\n").unwrap();
        assert_eq!(c.grid().unwrap().n_cells(), 64);
        let c = RunConfig::parse("epsilon = 1\nn_cells = 16\ncutoff = 0.5 1.5\n").unwrap();
        assert!(c.validate_for(Command::Simulate).is_err());
    }
}
