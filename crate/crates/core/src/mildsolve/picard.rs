use serde::{Deserialize, Serialize};

use crate::constants::{ConstantsContext, LebesgueExponent as Exp};
use crate::error::{domain, Error, Result};
use crate::fields::GridField;
use crate::mildsolve::galerkin::{Galerkin, Spectrum};
use crate::real::Real;
use crate::spectral::C;

/// Product-trapezoid weights for one interval of length `h`.
///
/// With `F` linear between `F_a` at `τ_a` and `F_b` at `τ_b = τ_a + h`,
/// `∫ e^{-(τ_b-τ)κ} F dτ = h ψ(κh) F_a + h (φ₁(κh) - ψ(κh)) F_b` where
/// `φ₁(z) = (1 - e^{-z})/z` and `ψ(z) = (1 - (1 + z)e^{-z})/z²`.
struct Weights<T> {
    decay: Vec<T>,
    wa: Vec<T>,
    wb: Vec<T>,
}

fn phi_psi(z: f64) -> (f64, f64) {
    if z < 1e-2 {
        let z2 = z * z;
        let phi = 1.0 - z / 2.0 + z2 / 6.0 - z2 * z / 24.0 + z2 * z2 / 120.0;
        let psi = 0.5 - z / 3.0 + z2 / 8.0 - z2 * z / 30.0 + z2 * z2 / 144.0;
        (phi, psi)
    } else {
        let e = (-z).exp();
        ((1.0 - e) / z, (1.0 - (1.0 + z) * e) / (z * z))
    }
}

impl<T: Real> Weights<T> {
    fn new(g: &Galerkin<T>, h: f64) -> Self {
        let n = g.len();
        let (mut decay, mut wa, mut wb) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for k2 in &g.k2 {
            let z = k2.to_f64_lossy() * h;
            let (phi, psi) = phi_psi(z);
            decay.push(T::lit((-z).exp()));
            wa.push(T::lit(h * psi));
            wb.push(T::lit(h * (phi - psi)));
        }
        Self { decay, wa, wb }
    }
}

type Products<T> = [Vec<C<T>>; 6];

/// `M u` at every node of a uniform grid `τ_j = j h`, given `u` there.
///
/// `S_j = e^{-hκ} S_{j-1} + w_a F_{j-1} + w_b F_j` accumulates the
/// convolution in time; `M u(τ_j) = e^{-τ_j κ} û₀ - P ∇·S_j`.
fn mild_map<T: Real>(g: &Galerkin<T>, u0: &Spectrum<T>, traj: &[Spectrum<T>], h: f64) -> Vec<Spectrum<T>> {
    let w = Weights::new(g, h);
    let len = g.len();
    let mut s: Products<T> = std::array::from_fn(|_| vec![C::default(); len]);
    let mut prev: Option<Products<T>> = None;
    let mut out = Vec::with_capacity(traj.len());
    for (j, u) in traj.iter().enumerate() {
        let (f, _) = g.product_spectra(u);
        if let Some(fa) = prev.as_ref() {
            for c in 0..6 {
                for idx in 0..len {
                    s[c][idx] = s[c][idx] * w.decay[idx] + fa[c][idx] * w.wa[idx] + f[c][idx] * w.wb[idx];
                }
            }
        }
        let mut m = g.heat(T::lit(j as f64 * h), u0);
        let d = g.divergence_term(&s);
        for c in 0..3 {
            for idx in 0..len {
                m[c][idx] = m[c][idx] + d[c][idx];
            }
        }
        out.push(m);
        prev = Some(f);
    }
    out
}

fn diff<T: Real>(a: &Spectrum<T>, b: &Spectrum<T>) -> Spectrum<T> {
    std::array::from_fn(|c| a[c].iter().zip(&b[c]).map(|(x, y)| *x - *y).collect())
}

/// A trajectory sampled at `times[j] = j h`.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub times: Vec<f64>,
    pub fields: Vec<GridField<T>>,
}

impl<T: Real> Trajectory<T> {
    /// Uniform spacing, or an error naming the offending node.
    pub fn spacing(&self) -> Result<f64> {
        if self.times.len() < 2 || self.times.len() != self.fields.len() {
            return Err(domain("a trajectory needs at least two nodes and one field per node"));
        }
        if self.times[0] != 0.0 {
            return Err(domain("trajectory must start at t = 0"));
        }
        let h = self.times[1];
        for (j, &t) in self.times.iter().enumerate() {
            if (t - j as f64 * h).abs() > 1e-9 * h.max(t) {
                return Err(domain(format!("node {j} at {t} breaks the uniform spacing {h}")));
            }
        }
        if !(h > 0.0) {
            return Err(domain("trajectory spacing must be positive"));
        }
        Ok(h)
    }
}

/// Relative error estimate above which [`duhamel_apply`] refuses the grid.
pub const DUHAMEL_TOLERANCE: f64 = 1e-6;

/// The mild-form right-hand side at time `t`:
/// `G(t)u₀ - ∫₀ᵗ {G_m(t-τ)(u^m u^j) + G_klj(t-τ)(u^k u^l)} dτ`,
/// with the products dealiased and the time integral taken with exact
/// exponential weights against the piecewise linear interpolant in `τ`.
pub fn duhamel_apply<T: Real>(traj: &Trajectory<T>, t: f64, u0: &GridField<T>, dealias: f64) -> Result<GridField<T>> {
    duhamel_apply_with(traj, t, u0, dealias, DUHAMEL_TOLERANCE)
}

pub fn duhamel_apply_with<T: Real>(
    traj: &Trajectory<T>,
    t: f64,
    u0: &GridField<T>,
    dealias: f64,
    tolerance: f64,
) -> Result<GridField<T>> {
    let h = traj.spacing()?;
    let steps = (t / h).round();
    if !(t >= 0.0) || (t - steps * h).abs() > 1e-9 * h.max(t) || steps as usize >= traj.times.len() {
        return Err(domain(format!("t = {t} is not a node of the trajectory")));
    }
    let last = steps as usize;
    let g = Galerkin::new(u0.grid, dealias)?;
    let u0s = g.forward(u0)?;
    let specs = traj.fields[..=last]
        .iter()
        .map(|f| g.forward(f))
        .collect::<Result<Vec<_>>>()?;
    let full = mild_map(&g, &u0s, &specs, h).pop().expect("at least one node");
    if last >= 2 && last % 2 == 0 {
        let coarse_specs: Vec<_> = specs.iter().step_by(2).cloned().collect();
        let coarse = mild_map(&g, &u0s, &coarse_specs, 2.0 * h).pop().expect("nodes");
        let scale = g.energy(&full).sqrt();
        let est = (g.energy(&diff(&full, &coarse)).sqrt() / T::lit(3.0)).to_f64_lossy();
        if scale > T::zero() && est > tolerance * scale.to_f64_lossy() {
            return Err(Error::Quadrature(format!(
                "estimated relative error {:.3e} exceeds {tolerance:e} with spacing {h}",
                est / scale.to_f64_lossy()
            )));
        }
    }
    Ok(g.to_field(&full))
}

fn third_two() -> f64 {
    2.0 / 3.0
}

fn sixteen() -> usize {
    16
}

fn tiny() -> f64 {
    1e-10
}

fn forty() -> usize {
    40
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardConfig {
    pub p: Exp<f64>,
    #[serde(default = "third_two")]
    pub theta: f64,
    /// Uniform time intervals on `[0, T_0]`.
    #[serde(default = "sixteen")]
    pub intervals: usize,
    /// Stop once `sup_t ‖u⁽ⁿ⁺¹⁾ - u⁽ⁿ⁾‖_p` falls below this times `‖u₀‖_p`.
    #[serde(default = "tiny")]
    pub tolerance: f64,
    #[serde(default = "forty")]
    pub max_iterations: usize,
    #[serde(default = "third_two")]
    pub dealias: f64,
}

impl PicardConfig {
    pub fn new(p: Exp<f64>) -> Self {
        Self {
            p,
            theta: third_two(),
            intervals: sixteen(),
            tolerance: tiny(),
            max_iterations: forty(),
            dealias: third_two(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.p.check_p_role().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Config(format!("theta = {} must lie in (0, 1)", self.theta)));
        }
        if self.intervals == 0 || self.max_iterations == 0 || !(self.tolerance > 0.0) {
            return Err(Error::Config("intervals, max_iterations and tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// `T_0 = (K ‖u₀‖_p / θ)^{-2p/(p-3)}`, the horizon on which the mild map
/// contracts with factor `θ`; `None` for zero data.
pub fn picard_horizon<T: Real>(p: Exp<T>, norm_p: T, theta: T, ctx: &ConstantsContext<T>) -> Result<Option<T>> {
    let p = p.check_p_role()?;
    if norm_p == T::zero() {
        return Ok(None);
    }
    let ln = ctx.ln_nonlinear_factor(p)? + norm_p.ln() - theta.ln();
    Ok(Some((-p.p_pair_exponent() * ln).exp()))
}

/// How many consecutive ratios above `θ + 0.1` abort the iteration.
const PERSISTENT: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PicardResult<T: Real> {
    pub config: PicardConfig,
    /// `T_0`; absent for zero data.
    pub horizon: Option<f64>,
    pub times: Vec<f64>,
    pub norm_u0: f64,
    pub iterates: usize,
    /// `sup_t ‖u⁽ⁿ⁺¹⁾ - u⁽ⁿ⁾‖_p` per iteration.
    pub updates: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
    /// Largest `‖u⁽ⁿ⁾(t)‖_p` over every iterate and node.
    pub ball_max: f64,
    pub ball_bound: f64,
    /// `‖u(t)‖_p` of the fixed point at each node.
    pub norms: Vec<f64>,
    pub constants_hash: String,
    pub tool_version: String,
    #[serde(skip)]
    pub fixed_point: Vec<GridField<T>>,
}

/// Iterates the mild map from `u⁽⁰⁾(t) = G(t)u₀` on `[0, T_0]`.
pub fn picard_solve<T: Real>(u0: &GridField<T>, cfg: &PicardConfig, ctx: &ConstantsContext<T>) -> Result<PicardResult<T>> {
    cfg.validate()?;
    let g = Galerkin::new(u0.grid, cfg.dealias)?;
    let mut u0s = g.forward(u0)?;
    g.project(&mut u0s);
    let p: Exp<T> = cfg.p.cast();
    let field0 = g.to_field(&u0s);
    let norm_u0 = field0.norm(p).to_f64_lossy();
    let ball_bound = 2.0 * norm_u0 + 1e-9;
    let base = |times: Vec<f64>, horizon| PicardResult {
        config: cfg.clone(),
        horizon,
        times,
        norm_u0,
        iterates: 0,
        updates: Vec::new(),
        contraction_ratios: Vec::new(),
        residual: 0.0,
        converged: false,
        ball_max: norm_u0,
        ball_bound,
        norms: Vec::new(),
        constants_hash: ctx.hash(),
        tool_version: crate::TOOL_VERSION.to_string(),
        fixed_point: Vec::new(),
    };

    let Some(horizon) = picard_horizon(p, T::lit(norm_u0), T::lit(cfg.theta), ctx)? else {
        let mut r = base(vec![0.0], None);
        r.iterates = 1;
        r.converged = true;
        r.norms = vec![0.0];
        r.ball_max = 0.0;
        r.fixed_point = vec![field0];
        return Ok(r);
    };
    let horizon = horizon.to_f64_lossy();
    let h = horizon / cfg.intervals as f64;
    let times: Vec<f64> = (0..=cfg.intervals).map(|j| j as f64 * h).collect();
    let mut result = base(times.clone(), Some(horizon));

    let mut traj: Vec<Spectrum<T>> = times.iter().map(|&t| g.heat(T::lit(t), &u0s)).collect();
    let norm_of = |s: &Spectrum<T>| g.to_field(s).norm(p).to_f64_lossy();
    result.ball_max = traj.iter().map(norm_of).fold(0.0, f64::max);
    let mut above = 0usize;
    loop {
        let next = mild_map(&g, &u0s, &traj, h);
        result.iterates += 1;
        let update = next
            .iter()
            .zip(&traj)
            .map(|(a, b)| norm_of(&diff(a, b)))
            .fold(0.0, f64::max);
        let sup = next.iter().map(norm_of).fold(0.0, f64::max);
        result.ball_max = result.ball_max.max(sup);
        if let Some(&last) = result.updates.last() {
            let ratio = if last > 0.0 { update / last } else { 0.0 };
            result.contraction_ratios.push(ratio);
            above = if ratio > cfg.theta + 0.1 { above + 1 } else { 0 };
        }
        result.updates.push(update);
        traj = next;
        if result.ball_max > ball_bound {
            return Err(Error::Picard(format!(
                "iterate {} left the ball: max ‖u(t)‖_p = {:e} > 2‖u₀‖_p = {:e}",
                result.iterates, result.ball_max, 2.0 * norm_u0
            )));
        }
        if above >= PERSISTENT {
            return Err(Error::Picard(format!(
                "contraction ratios {:?} stay above theta + 0.1; the discretization is too coarse",
                &result.contraction_ratios[result.contraction_ratios.len() - PERSISTENT..]
            )));
        }
        if update <= cfg.tolerance * norm_u0 {
            result.converged = true;
            break;
        }
        if result.iterates >= cfg.max_iterations {
            break;
        }
    }
    result.residual = *result.updates.last().unwrap_or(&0.0);
    result.fixed_point = traj.iter().map(|s| g.to_field(s)).collect();
    result.norms = result.fixed_point.iter().map(|f| f.norm(p).to_f64_lossy()).collect();
    Ok(result)
}
