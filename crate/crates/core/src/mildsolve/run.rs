use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::constants::{ConstantsContext, LebesgueExponent as Exp};
use crate::error::{domain, Error, Result};
use crate::fields::{sample_analytic, BoxGrid, GridField};
use crate::mildsolve::galerkin::{Galerkin, Spectrum};
use crate::real::Real;

fn two_thirds() -> f64 {
    2.0 / 3.0
}

fn default_monitor() -> Vec<Exp<f64>> {
    vec![Exp::Finite(3.0), Exp::Finite(6.0), Exp::Infinity]
}

fn default_outputs() -> usize {
    16
}

fn half() -> f64 {
    0.5
}

fn thousand() -> f64 {
    1e3
}

fn dt_floor() -> f64 {
    1e-8
}

fn agreement() -> f64 {
    1e-4
}

/// Where a refinement run takes its initial data from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resample {
    /// Zero-padded spectrum of the base initial field.
    #[default]
    Spectral,
    /// Fresh samples of the field's recipe.
    Recipe,
}

/// Time stepper settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub grid: BoxGrid<f64>,
    pub dt: f64,
    #[serde(default)]
    pub t_start: f64,
    pub t_end: f64,
    /// Number of equal output intervals on `[t_start, t_end]`.
    #[serde(default = "default_outputs")]
    pub outputs: usize,
    #[serde(default = "two_thirds")]
    pub dealias: f64,
    /// Form products on a grid of twice the resolution instead of
    /// truncating; `dealias` is then unused.
    #[serde(default)]
    pub padding: bool,
    /// `L^2` is always monitored; these are extra.
    #[serde(default = "default_monitor")]
    pub monitor_p: Vec<Exp<f64>>,
    /// `(n, dt)` reruns used for the refinement agreement.
    #[serde(default)]
    pub refinement: Vec<(usize, f64)>,
    #[serde(default)]
    pub resample: Resample,
    #[serde(default = "half")]
    pub cfl: f64,
    /// Stop once the largest speed exceeds this multiple of the initial one.
    #[serde(default = "thousand")]
    pub speed_ceiling: f64,
    #[serde(default = "dt_floor")]
    pub dt_min: f64,
    #[serde(default = "agreement")]
    pub refinement_tolerance: f64,
    /// Grid size on which the `L^p` monitors are evaluated, by spectral
    /// interpolation; defaults to the run's own grid, or to the finest
    /// refinement grid when refinement is configured.
    #[serde(default)]
    pub measure_n: Option<usize>,
}

impl SolverConfig {
    pub fn new(grid: BoxGrid<f64>, dt: f64, t_end: f64) -> Self {
        Self {
            grid,
            dt,
            t_start: 0.0,
            t_end,
            outputs: default_outputs(),
            dealias: two_thirds(),
            padding: false,
            monitor_p: default_monitor(),
            refinement: Vec::new(),
            resample: Resample::default(),
            cfl: half(),
            speed_ceiling: thousand(),
            dt_min: dt_floor(),
            refinement_tolerance: agreement(),
            measure_n: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        BoxGrid::new(self.grid.n, self.grid.length).map_err(|e| Error::Config(e.to_string()))?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_start >= 0.0) || !(self.t_end > self.t_start) {
            return bad(format!("need 0 <= t_start < t_end, got {} and {}", self.t_start, self.t_end));
        }
        if self.t_end - self.t_start < self.dt {
            return bad(format!(
                "the horizon {} is shorter than one step dt = {}",
                self.t_end - self.t_start,
                self.dt
            ));
        }
        if self.outputs == 0 {
            return bad("outputs must be at least 1".into());
        }
        if !(self.dealias > 0.0 && self.dealias <= 1.0) {
            return bad(format!("dealias = {} must lie in (0, 1]", self.dealias));
        }
        if !(self.cfl > 0.0) || !(self.speed_ceiling > 1.0) || !(self.dt_min > 0.0) {
            return bad("cfl, speed_ceiling and dt_min must be positive (ceiling above 1)".into());
        }
        if let Some(m) = self.measure_n {
            if m < self.grid.n {
                return bad(format!("measure_n = {m} is below the grid size {}", self.grid.n));
            }
            BoxGrid::new(m, self.grid.length).map_err(|e| Error::Config(e.to_string()))?;
        }
        let mut prev = self.grid.n;
        for &(n, dt) in &self.refinement {
            if n <= prev {
                return bad(format!("refinement sizes must increase strictly, {n} follows {prev}"));
            }
            if !(dt > 0.0) {
                return bad(format!("refinement dt = {dt} must be positive"));
            }
            BoxGrid::new(n, self.grid.length).map_err(|e| Error::Config(e.to_string()))?;
            prev = n;
        }
        Ok(())
    }

    fn output_times(&self) -> Vec<f64> {
        let span = self.t_end - self.t_start;
        (0..=self.outputs)
            .map(|k| {
                if k == self.outputs {
                    self.t_end
                } else {
                    self.t_start + span * k as f64 / self.outputs as f64
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    NormExploded,
    RefinementDiverged,
}

/// Monitors at one output time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub l2: f64,
    /// Aligned with the configured `monitor_p`.
    pub norms: Vec<f64>,
    /// `‖u‖²_{L²} + 2∫₀ᵗ‖∇u‖²`.
    pub energy_lhs: f64,
    /// Largest spectral divergence residual since the previous sample.
    pub div_residual: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementLevel {
    pub n: usize,
    pub dt: f64,
    pub status: RunStatus,
    /// Largest relative norm discrepancy against the previous level.
    pub agreement: f64,
}

/// Everything a spectral run recorded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverRun {
    pub config: SolverConfig,
    pub status: RunStatus,
    pub t_reached: f64,
    pub steps: usize,
    pub samples: Vec<Sample>,
    /// `‖u₀‖²_{L²}` of the given initial data.
    pub initial_energy: f64,
    /// Divergence residual of the initial data before projection.
    pub initial_residual: f64,
    pub max_div_residual: f64,
    /// `max_t (energy_lhs(t)/‖u₀‖² - 1)`, nonpositive when the energy
    /// inequality holds exactly.
    pub max_energy_excess: f64,
    pub refinement: Vec<RefinementLevel>,
    pub refinement_agreement: Option<f64>,
    pub constants_hash: String,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Run summary without the time series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: SolverConfig,
    pub status: RunStatus,
    pub t_reached: f64,
    pub steps: usize,
    pub initial_energy: f64,
    pub initial_residual: f64,
    pub max_div_residual: f64,
    pub max_energy_excess: f64,
    pub refinement: Vec<RefinementLevel>,
    pub refinement_agreement: Option<f64>,
    pub csv_columns: Vec<String>,
    pub constants_hash: String,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SolverRun {
    pub fn csv_columns(&self) -> Vec<String> {
        let mut cols = vec!["t".to_string(), "l2".to_string()];
        cols.extend(self.config.monitor_p.iter().map(|p| format!("l{p}")));
        cols.extend(["energy_lhs", "div_residual", "steps"].map(String::from));
        cols
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.csv_columns().join(",");
        s.push('\n');
        for r in &self.samples {
            write!(s, "{:e},{:e}", r.t, r.l2).unwrap();
            for v in &r.norms {
                write!(s, ",{v:e}").unwrap();
            }
            writeln!(s, ",{:e},{:e},{}", r.energy_lhs, r.div_residual, r.steps).unwrap();
        }
        s
    }

    pub fn manifest(&self) -> RunManifest {
        RunManifest {
            config: self.config.clone(),
            status: self.status,
            t_reached: self.t_reached,
            steps: self.steps,
            initial_energy: self.initial_energy,
            initial_residual: self.initial_residual,
            max_div_residual: self.max_div_residual,
            max_energy_excess: self.max_energy_excess,
            refinement: self.refinement.clone(),
            refinement_agreement: self.refinement_agreement,
            csv_columns: self.csv_columns(),
            constants_hash: self.constants_hash.clone(),
            tool_version: self.tool_version.clone(),
            note: self.note.clone(),
        }
    }

    /// Series of the monitored norm at `p`, as `(t, value)`.
    pub fn series(&self, p: Exp<f64>) -> Option<Vec<(f64, f64)>> {
        if p == Exp::Finite(2.0) {
            return Some(self.samples.iter().map(|s| (s.t, s.l2)).collect());
        }
        let i = self.config.monitor_p.iter().position(|&m| m == p)?;
        Some(self.samples.iter().map(|s| (s.t, s.norms[i])).collect())
    }
}

struct Factors<T> {
    h: T,
    full: Vec<T>,
    half: Vec<T>,
}

fn axpy<T: Real>(out: &mut Spectrum<T>, a: T, x: &Spectrum<T>) {
    for c in 0..3 {
        for (o, v) in out[c].iter_mut().zip(&x[c]) {
            *o = *o + *v * a;
        }
    }
}

fn scaled<T: Real>(f: &[T], x: &Spectrum<T>) -> Spectrum<T> {
    std::array::from_fn(|c| x[c].iter().zip(f).map(|(v, s)| *v * *s).collect())
}

/// `∂_t û = -|k|² û + N(û)`.
fn time_derivative<T: Real>(g: &Galerkin<T>, u: &Spectrum<T>, nl: &Spectrum<T>) -> Spectrum<T> {
    std::array::from_fn(|c| {
        u[c].iter()
            .zip(&nl[c])
            .zip(&g.k2)
            .map(|((v, n), k2)| *n - *v * *k2)
            .collect()
    })
}

struct Stepper<'a, T: Real> {
    g: &'a Galerkin<T>,
    factors: Option<Factors<T>>,
}

impl<T: Real> Stepper<'_, T> {
    fn factors(&mut self, h: T) -> &Factors<T> {
        if self.factors.as_ref().map_or(true, |f| f.h != h) {
            let full = self.g.k2.iter().map(|k2| (-h * *k2).exp()).collect();
            let half = self.g.k2.iter().map(|k2| (-h * *k2 / T::lit(2.0)).exp()).collect();
            self.factors = Some(Factors { h, full, half });
        }
        self.factors.as_ref().unwrap()
    }

    /// One integrating-factor RK4 step; `a` is `N(u)`.
    fn step(&mut self, u: &Spectrum<T>, a: &Spectrum<T>, h: T) -> Spectrum<T> {
        let g = self.g;
        let hh = h / T::lit(2.0);
        let (e, e2) = {
            let f = self.factors(h);
            (f.full.clone(), f.half.clone())
        };
        let eu = scaled(&e2, u);
        let mut u2 = eu.clone();
        axpy(&mut u2, hh, &scaled(&e2, a));
        let (b, _) = g.nonlinear(&u2);
        let mut u3 = eu;
        axpy(&mut u3, hh, &b);
        let (c, _) = g.nonlinear(&u3);
        let mut u4 = scaled(&e, u);
        axpy(&mut u4, h, &scaled(&e2, &c));
        let (d, _) = g.nonlinear(&u4);

        let mut out = scaled(&e, u);
        let sixth = h / T::lit(6.0);
        axpy(&mut out, sixth, &scaled(&e, a));
        let mut bc = b;
        axpy(&mut bc, T::one(), &c);
        axpy(&mut out, sixth * T::lit(2.0), &scaled(&e2, &bc));
        axpy(&mut out, sixth, &d);
        out
    }
}

fn sample_at<T: Real>(
    g: &Galerkin<T>,
    meter: Option<&Galerkin<T>>,
    u: &Spectrum<T>,
    t: f64,
    monitor: &[Exp<f64>],
    energy_lhs: f64,
    div: f64,
    steps: usize,
) -> Sample {
    let field = match meter {
        Some(m) => m.to_field(&m.embed(u, g.grid.n)),
        None => g.to_field(u),
    };
    let ps: Vec<Exp<T>> = monitor.iter().map(|p| p.cast()).collect();
    Sample {
        t,
        l2: g.energy(u).to_f64_lossy().sqrt(),
        norms: field.norms(&ps).into_iter().map(|v| v.to_f64_lossy()).collect(),
        energy_lhs,
        div_residual: div,
        steps,
    }
}

/// Integrates one configuration, without refinement reruns.
fn integrate<T: Real>(u0: &GridField<T>, cfg: &SolverConfig) -> Result<(SolverRun, GridField<T>)> {
    let grid: BoxGrid<T> = cfg.grid.cast();
    if u0.grid != grid {
        return Err(Error::Config(format!(
            "initial field is on n = {}, L = {} but the config asks for n = {}, L = {}",
            u0.grid.n, u0.grid.length, cfg.grid.n, cfg.grid.length
        )));
    }
    let g = if cfg.padding {
        Galerkin::padded(grid)?
    } else {
        Galerkin::new(grid, cfg.dealias)?
    };
    let meter = match cfg.measure_n {
        Some(m) if m != grid.n => Some(Galerkin::new(BoxGrid::new(m, grid.length)?, cfg.dealias)?),
        _ => None,
    };
    let mut u = g.forward(u0)?;
    let initial_energy = g.energy(&u).to_f64_lossy();
    let initial_residual = g.divergence_residual(&u).to_f64_lossy();
    g.project(&mut u);
    let e0 = g.energy(&u).to_f64_lossy();

    let h_grid = grid.spacing();
    let (mut nl, mut speed) = g.nonlinear(&u);
    let speed0 = speed;
    let mut d_rate = g.dissipation_rate(&u, &time_derivative(&g, &u, &nl));
    let mut diss = g.dissipation(&u);
    let mut integral = T::zero();

    let mut stepper = Stepper { g: &g, factors: None };
    let mut max_div = g.divergence_residual(&u).to_f64_lossy();
    let mut samples = vec![sample_at(&g, meter.as_ref(), &u, cfg.t_start, &cfg.monitor_p, e0, max_div, 0)];
    let mut status = RunStatus::Completed;
    let mut note = None;
    let mut t = cfg.t_start;
    let mut steps = 0usize;
    let mut window_div = 0.0f64;
    let dt = cfg.dt;

    'outer: for &target in &cfg.output_times()[1..] {
        while t < target {
            let cfl_dt = if speed > T::zero() {
                (T::lit(cfg.cfl) * h_grid / speed).to_f64_lossy()
            } else {
                f64::INFINITY
            };
            let remaining = target - t;
            let mut h = dt.min(cfl_dt);
            if h < cfg.dt_min && remaining > cfg.dt_min {
                status = RunStatus::NormExploded;
                note = Some(format!("CFL step {h:e} fell below dt_min at t = {t}"));
                break 'outer;
            }
            // land on the output time, and never leave a sliver behind
            if remaining <= h * (1.0 + 1e-9) {
                h = remaining;
            }
            let ht = T::lit(h);
            let next = stepper.step(&u, &nl, ht);
            let (nl_next, speed_next) = g.nonlinear(&next);
            let diss_next = g.dissipation(&next);
            let rate_next = g.dissipation_rate(&next, &time_derivative(&g, &next, &nl_next));
            // trapezoid with the endpoint-derivative correction
            integral = integral
                + ht / T::lit(2.0) * (diss + diss_next)
                + ht * ht / T::lit(12.0) * (d_rate - rate_next);
            u = next;
            nl = nl_next;
            speed = speed_next;
            diss = diss_next;
            d_rate = rate_next;
            steps += 1;
            t = if h == remaining { target } else { t + h };
            let r = g.divergence_residual(&u).to_f64_lossy();
            window_div = window_div.max(r);
            max_div = max_div.max(r);
            if !speed.is_finite() || (speed0 > T::zero() && speed > T::lit(cfg.speed_ceiling) * speed0) {
                status = RunStatus::NormExploded;
                note = Some(format!("speed {} exceeded the ceiling at t = {t}", speed.to_f64_lossy()));
                break 'outer;
            }
        }
        let lhs = (g.energy(&u) + T::lit(2.0) * integral).to_f64_lossy();
        samples.push(sample_at(&g, meter.as_ref(), &u, t, &cfg.monitor_p, lhs, window_div, steps));
        window_div = 0.0;
    }

    let max_energy_excess = samples
        .iter()
        .map(|s| if e0 > 0.0 { s.energy_lhs / e0 - 1.0 } else { s.energy_lhs })
        .fold(f64::NEG_INFINITY, f64::max);
    let run = SolverRun {
        config: cfg.clone(),
        status,
        t_reached: t,
        steps,
        samples,
        initial_energy,
        initial_residual,
        max_div_residual: max_div,
        max_energy_excess,
        refinement: Vec::new(),
        refinement_agreement: None,
        constants_hash: String::new(),
        tool_version: crate::TOOL_VERSION.to_string(),
        note,
    };
    Ok((run, g.to_field(&u)))
}

/// Largest relative difference of the monitored norms at shared times.
pub fn norm_discrepancy(a: &SolverRun, b: &SolverRun) -> f64 {
    let mut worst = 0.0f64;
    for (x, y) in a.samples.iter().zip(&b.samples) {
        if x.t != y.t {
            break;
        }
        let pairs = std::iter::once((x.l2, y.l2)).chain(x.norms.iter().copied().zip(y.norms.iter().copied()));
        for (u, v) in pairs {
            let scale = u.abs().max(v.abs());
            if scale > 0.0 {
                worst = worst.max((u - v).abs() / scale);
            }
        }
    }
    worst
}

fn initial_for<T: Real>(u0: &GridField<T>, grid: BoxGrid<T>, mode: Resample, dealias: f64) -> Result<GridField<T>> {
    match (&u0.recipe, mode) {
        (Some(recipe), Resample::Recipe) => sample_analytic(recipe, grid),
        _ => Galerkin::new(grid, dealias)?.resample(u0),
    }
}

/// Pseudo-spectral run with the refinement reruns listed in the config.
pub fn spectral_run_with_state<T: Real>(
    u0: &GridField<T>,
    cfg: &SolverConfig,
    ctx: &ConstantsContext<T>,
) -> Result<(SolverRun, GridField<T>)> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    if let Some(&(finest, _)) = cfg.refinement.last() {
        cfg.measure_n = Some(cfg.measure_n.unwrap_or(0).max(finest));
    }
    let cfg = &cfg;
    let (mut run, last) = integrate(u0, cfg)?;
    run.constants_hash = ctx.hash();
    if cfg.refinement.is_empty() {
        return Ok((run, last));
    }
    let mut prev = run.clone();
    let mut worst = 0.0f64;
    for &(n, dt) in &cfg.refinement {
        let mut sub = cfg.clone();
        sub.grid = BoxGrid::new(n, cfg.grid.length)?;
        sub.dt = dt;
        sub.refinement.clear();
        let init = initial_for(u0, sub.grid.cast(), cfg.resample, cfg.dealias)?;
        let (r, _) = integrate(&init, &sub)?;
        let agreement = norm_discrepancy(&prev, &r);
        worst = worst.max(agreement);
        run.refinement.push(RefinementLevel {
            n,
            dt,
            status: r.status,
            agreement,
        });
        if r.status != RunStatus::Completed {
            worst = f64::INFINITY;
        }
        prev = r;
    }
    run.refinement_agreement = Some(worst);
    if run.status == RunStatus::Completed && !(worst <= cfg.refinement_tolerance) {
        run.status = RunStatus::RefinementDiverged;
    }
    Ok((run, last))
}

pub fn spectral_run<T: Real>(u0: &GridField<T>, cfg: &SolverConfig, ctx: &ConstantsContext<T>) -> Result<SolverRun> {
    spectral_run_with_state(u0, cfg, ctx).map(|(r, _)| r)
}

/// Config for a field's own grid with the given step and horizon.
pub fn config_for<T: Real>(u0: &GridField<T>, dt: f64, t_end: f64) -> Result<SolverConfig> {
    let grid = BoxGrid::new(u0.grid.n, u0.grid.length.to_f64_lossy()).map_err(|e| domain(e.to_string()))?;
    Ok(SolverConfig::new(grid, dt, t_end))
}
