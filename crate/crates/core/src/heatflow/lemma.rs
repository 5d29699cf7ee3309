use serde::{Deserialize, Serialize};

use crate::constants::{c0, c1, c2, c3, c4, c5, ConstantsContext, LebesgueExponent};
use crate::error::{domain, Result};
use crate::fields::{sample_analytic, BoxGrid, FieldRecipe, GridField, Sampler};
use crate::heatflow::kernel::{check_time, KernelId};
use crate::heatflow::semigroup::{apply_to_spectrum, required_box_length, riesz_spectrum};
use crate::real::Real;
use crate::spectral::{Fft3, Wavenumbers};

type Exp<T> = LebesgueExponent<T>;

/// Which family of estimates a report covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaId {
    /// `L^∞` and `L^q` bounds for the Riesz transforms.
    Riesz,
    /// Bounds for `G(t)`.
    Heat,
    /// Bounds for `G_m(t)`.
    Gradient,
    /// Bounds for `G_klj(t)`.
    RieszGradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    /// `‖R_a w‖_∞ ≤ C_∞ ‖w‖_∞`.
    Sup,
    /// `‖R_a w‖_q ≤ C_∞^{1-2/q} ‖w‖_q`, `q >= 2`.
    LqAboveTwo,
    /// `‖R_a w‖_q ≤ C_∞^{2/q-1} ‖w‖_q`, `1 < q < 2`.
    LqBelowTwo,
    /// `L^p → L^p`.
    PP,
    /// `L^1 → L^p`.
    P1,
    /// `L^{p'} → L^p`.
    PDual,
    /// `L^q → L^p`, `1 < q < p`.
    PQ,
    /// `L^q → L^p` for `G_klj` with the constant `C_∞^{(2p-4)/p} C_3` used in
    /// the existence proofs.
    PQTheorem,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCase {
    pub estimate: Estimate,
    pub kernel: String,
    pub field: String,
    pub t: Option<f64>,
    pub p: Exp<f64>,
    pub q: Option<Exp<f64>>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: LemmaId,
    /// A case passes when `margin >= -tolerance * rhs`.
    pub tolerance: f64,
    pub c_infty: f64,
    pub cases: Vec<LemmaCase>,
    pub pass: bool,
}

impl LemmaReport {
    pub fn failures(&self) -> impl Iterator<Item = &LemmaCase> {
        self.cases.iter().filter(|c| !c.pass)
    }

    pub fn min_relative_margin(&self) -> f64 {
        self.cases
            .iter()
            .filter(|c| c.rhs > 0.0)
            .map(|c| c.margin / c.rhs)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Times, exponents and data of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub times: Vec<f64>,
    pub ps: Vec<Exp<f64>>,
    /// Candidate lower exponents; each `p` also gets `q = p/2`. Only `q`
    /// with `1 < q < p` are used.
    pub qs: Vec<Exp<f64>>,
    pub recipes: Vec<FieldRecipe>,
    /// Points per axis; raised up to [`RESOLVE_CAP`] when the heat factor at
    /// the Nyquist mode is not negligible.
    pub n: usize,
    pub tolerance: f64,
}

pub const RESOLVE_CAP: usize = 128;

/// `t k_N²` at which the grid is taken to resolve the semigroup.
const RESOLVED_DECAY: f64 = 30.0;

impl SweepSpec {
    pub fn standard() -> Self {
        Self {
            times: vec![0.05, 0.5, 5.0],
            ps: [4.0, 6.0, 12.0].map(Exp::Finite).into_iter().chain([Exp::Infinity]).collect(),
            qs: [1.5, 2.0, 3.0].map(Exp::Finite).to_vec(),
            recipes: standard_recipes(),
            n: 64,
            tolerance: 1e-9,
        }
    }

    /// Random fields whose spectrum sits where the cutoff equals one.
    pub fn riesz(count: u64) -> Self {
        Self {
            times: Vec::new(),
            ps: vec![Exp::Infinity],
            qs: [1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 12.0].map(Exp::Finite).to_vec(),
            recipes: (0..count)
                .map(|seed| {
                    FieldRecipe::new(Sampler::RandomBandLimited {
                        amplitude: 1.0,
                        seed,
                        period: 2.0 * std::f64::consts::PI,
                        kmax: 1.0,
                    })
                })
                .collect(),
            n: 32,
            tolerance: 1e-9,
        }
    }

    /// Every exponent at which the data's norm enters a bound.
    fn exponents(&self) -> Vec<Exp<f64>> {
        let mut out = vec![Exp::Finite(1.0)];
        for &p in &self.ps {
            out.push(p);
            out.push(p.conjugate());
            out.extend(self.lower_exponents(p));
        }
        out
    }

    fn lower_exponents(&self, p: Exp<f64>) -> Vec<Exp<f64>> {
        let mut out: Vec<Exp<f64>> = self.qs.clone();
        if let Exp::Finite(v) = p {
            out.push(Exp::Finite(v / 2.0));
        }
        out.retain(|q| matches!(q, Exp::Finite(v) if *v > 1.0) && *q < p);
        out.sort_by(|a, b| a.partial_cmp(b).expect("exponents are ordered"));
        out.dedup();
        out
    }
}

/// Bump example, Gaussian bump, Taylor-Green packet and a random solenoidal
/// field.
pub fn standard_recipes() -> Vec<FieldRecipe> {
    vec![
        FieldRecipe::new(Sampler::PaperExample {
            alpha: 1.0,
            lambda: 1.0,
            smoothing: 1.0,
        }),
        FieldRecipe::new(Sampler::Gaussian {
            amplitude: 1.0,
            width: 1.0,
            component: 1,
        }),
        FieldRecipe::new(Sampler::TaylorGreen {
            amplitude: 1.0,
            wavenumber: 1.0,
            envelope: 2.0,
        }),
        FieldRecipe::new(Sampler::RandomSolenoidal {
            amplitude: 1.0,
            seed: 42,
            period: 8.0,
            kmax: 4.0,
        }),
    ]
}

/// Grid used for `recipe` at time `t`: large enough to hold the kernel and
/// fine enough that `e^{-t k_N²}` is negligible.
pub fn sweep_grid<T: Real>(recipe: &FieldRecipe, t: f64, n: usize) -> Result<BoxGrid<T>> {
    let natural = recipe.natural_length();
    if recipe.is_periodic() {
        return BoxGrid::new(n, T::lit(natural));
    }
    let length = natural.max(required_box_length(t));
    let mut m = n;
    let nyquist = |m: usize| std::f64::consts::PI * m as f64 / length;
    while m < RESOLVE_CAP.max(n) && t * nyquist(m).powi(2) < RESOLVED_DECAY {
        m *= 2;
    }
    BoxGrid::new(m, T::lit(length))
}

struct NormTable<T> {
    entries: Vec<(Exp<T>, T)>,
}

impl<T: Real> NormTable<T> {
    fn new(u: &GridField<T>, exponents: &[Exp<f64>]) -> Self {
        let ps: Vec<Exp<T>> = exponents.iter().map(|p| p.cast()).collect();
        let values = u.norms(&ps);
        Self {
            entries: ps.into_iter().zip(values).collect(),
        }
    }

    fn get(&self, p: Exp<T>) -> T {
        self.entries
            .iter()
            .find(|(e, _)| *e == p)
            .map(|(_, v)| *v)
            .expect("norm table covers every exponent of the sweep")
    }
}

fn label(recipe: &FieldRecipe, i: usize) -> String {
    format!("{}[{i}]", recipe.id())
}

struct Recorder {
    tolerance: f64,
    cases: Vec<LemmaCase>,
}

impl Recorder {
    #[allow(clippy::too_many_arguments)]
    fn push<T: Real>(
        &mut self,
        estimate: Estimate,
        kernel: String,
        field: &str,
        t: Option<f64>,
        p: Exp<T>,
        q: Option<Exp<T>>,
        lhs: T,
        rhs: T,
        note: Option<String>,
    ) {
        let (lhs, rhs) = (lhs.to_f64_lossy(), rhs.to_f64_lossy());
        let margin = rhs - lhs;
        self.cases.push(LemmaCase {
            estimate,
            kernel,
            field: field.to_string(),
            t,
            p: p.cast(),
            q: q.map(|q| q.cast()),
            lhs,
            rhs,
            margin,
            pass: margin >= -self.tolerance * rhs.abs(),
            note,
        });
    }

    fn finish(self, lemma: LemmaId, c_infty: f64) -> LemmaReport {
        let pass = self.cases.iter().all(|c| c.pass);
        LemmaReport {
            lemma,
            tolerance: self.tolerance,
            c_infty,
            cases: self.cases,
            pass,
        }
    }
}

/// Checks every estimate of one family over the sweep. Violations are
/// recorded in the report, not returned as errors.
pub fn verify_lemma<T: Real>(lemma: LemmaId, sweep: &SweepSpec, consts: &ConstantsContext<T>) -> Result<LemmaReport> {
    if sweep.recipes.is_empty() || sweep.ps.is_empty() {
        return Err(domain("sweep needs at least one recipe and one exponent"));
    }
    if lemma == LemmaId::Riesz {
        let fields = sweep
            .recipes
            .iter()
            .map(|r| sample_analytic::<T>(r, BoxGrid::new(sweep.n, T::lit(r.natural_length()))?))
            .collect::<Result<Vec<_>>>()?;
        let qs: Vec<Exp<T>> = sweep.qs.iter().map(|q| q.cast()).collect();
        return verify_riesz(&fields, &qs, consts, sweep.tolerance);
    }
    if sweep.times.is_empty() {
        return Err(domain("sweep needs at least one time"));
    }
    let kernels = match lemma {
        LemmaId::Heat => vec![KernelId::Heat],
        LemmaId::Gradient => KernelId::gradients(),
        _ => KernelId::riesz_gradients(),
    };
    let mut rec = Recorder {
        tolerance: sweep.tolerance,
        cases: Vec::new(),
    };
    for (i, recipe) in sweep.recipes.iter().enumerate() {
        let name = label(recipe, i);
        for &t in &sweep.times {
            check_time(t)?;
            let grid = sweep_grid::<T>(recipe, t, sweep.n)?;
            let u = sample_analytic::<T>(recipe, grid)?;
            let fft = Fft3::new(grid.n);
            let wn = Wavenumbers::new(grid.n, grid.length);
            let spec = fft.forward3(&u.components);
            let data = NormTable::new(&u, &sweep.exponents());
            for &kernel in &kernels {
                let v = GridField {
                    grid,
                    components: fft.inverse3(&apply_to_spectrum(kernel, T::lit(t), &spec, &wn)),
                    recipe: None,
                    solenoidal: false,
                };
                semigroup_cases(&mut rec, lemma, kernel, &name, t, &data, &v, sweep, consts)?;
            }
        }
    }
    Ok(rec.finish(lemma, consts.c_infty.to_f64_lossy()))
}

#[allow(clippy::too_many_arguments)]
fn semigroup_cases<T: Real>(
    rec: &mut Recorder,
    lemma: LemmaId,
    kernel: KernelId,
    field: &str,
    t64: f64,
    u: &NormTable<T>,
    v: &GridField<T>,
    sweep: &SweepSpec,
    consts: &ConstantsContext<T>,
) -> Result<()> {
    let t = T::lit(t64);
    let c = consts.c_infty;
    let one = Exp::Finite(T::one());
    let two = Exp::Finite(T::lit(2.0));
    let pi_t = (T::PI() * t).powf(T::lit(-0.5));
    let four_pi_t = (T::lit(4.0) * T::PI() * t).ln();
    let name = kernel.to_string();
    let u1 = u.get(one);
    let ps: Vec<Exp<T>> = sweep.ps.iter().map(|p| p.cast()).collect();
    let lhs_all = v.norms(&ps);
    for (&p64, &lhs) in sweep.ps.iter().zip(&lhs_all) {
        let p: Exp<T> = p64.cast();
        let r = p.recip();
        let up = u.get(p);
        let riesz_p = || -> Result<T> {
            match lemma {
                LemmaId::RieszGradient => c4(p, c),
                _ => Ok(T::one()),
            }
        };
        // L^p → L^p
        let rhs_pp = match lemma {
            LemmaId::Heat => up,
            _ => riesz_p()? * pi_t * up,
        };
        rec.push(Estimate::PP, name.clone(), field, Some(t64), p, Some(p), lhs, rhs_pp, None);
        // L^1 → L^p
        let rhs_p1 = match lemma {
            LemmaId::Heat => (-T::lit(1.5) * (T::one() - r) * four_pi_t).exp() * u1,
            _ => riesz_p()? * c1(p)? * t.powf(-(T::lit(2.0) - T::lit(1.5) * r)) * u1,
        };
        rec.push(Estimate::P1, name.clone(), field, Some(t64), p, Some(one), lhs, rhs_p1, None);
        // L^{p'} → L^p
        if p >= two {
            let pd: Exp<T> = p64.conjugate().cast();
            let ud = u.get(pd);
            let rhs = match lemma {
                LemmaId::Heat => (-T::lit(1.5) * (T::one() - T::lit(2.0) * r) * four_pi_t).exp() * ud,
                _ => riesz_p()? * c2(p)? * t.powf(-(T::lit(2.0) - T::lit(3.0) * r)) * ud,
            };
            rec.push(Estimate::PDual, name.clone(), field, Some(t64), p, Some(pd), lhs, rhs, None);
        }
        // L^q → L^p
        for q64 in sweep.lower_exponents(p64) {
            let q: Exp<T> = q64.cast();
            let s = q.recip();
            let uq = u.get(q);
            let decay = T::lit(1.5) * (s - r);
            match lemma {
                LemmaId::Heat => {
                    let rhs = c0(p, q)? * t.powf(-decay) * uq;
                    rec.push(Estimate::PQ, name.clone(), field, Some(t64), p, Some(q), lhs, rhs, None);
                }
                _ => {
                    let base = c3(p, q)? * t.powf(-(decay + T::lit(0.5))) * uq;
                    let factor = match lemma {
                        LemmaId::RieszGradient => c5(p, q, c)?,
                        _ => T::one(),
                    };
                    rec.push(Estimate::PQ, name.clone(), field, Some(t64), p, Some(q), lhs, factor * base, None);
                    if lemma == LemmaId::RieszGradient {
                        let theorem = c.powf(T::lit(2.0) - T::lit(4.0) * r);
                        let halved = matches!((p64, q64), (Exp::Finite(a), Exp::Finite(b)) if b == a / 2.0);
                        let note = (halved && q >= two).then(|| {
                            "q = p/2 >= 2: the existence proofs use C_inf^((2p-4)/p), the estimate's own constant is C_inf^((2q-4)/q)"
                                .to_string()
                        });
                        rec.push(
                            Estimate::PQTheorem,
                            name.clone(),
                            field,
                            Some(t64),
                            p,
                            Some(q),
                            lhs,
                            theorem * base,
                            note,
                        );
                    }
                }
            }
        }
    }
    Ok(())
}

/// Largest `|k| P / (2R)` over the modes carried by the field, where `P` is
/// the box edge and `R` the half-width of the box defining `C_∞`. The
/// cutoff equals one below `1/2`.
pub fn band_radius<T: Real>(field: &GridField<T>, half_width: T) -> T {
    let fft = Fft3::new(field.grid.n);
    let wn = Wavenumbers::new(field.grid.n, field.grid.length);
    let spec = fft.forward3(&field.components);
    let amp = |idx: usize| spec.iter().map(|s| s[idx].norm()).fold(T::zero(), T::max);
    let peak = (0..spec[0].len()).map(amp).fold(T::zero(), T::max);
    let floor = peak * T::lit(1e-12);
    let mut radius = T::zero();
    for idx in 0..spec[0].len() {
        if amp(idx) > floor {
            let (_, k2) = wn.mode(idx);
            radius = radius.max(k2.sqrt());
        }
    }
    radius * field.grid.length / (T::lit(2.0) * half_width)
}

/// The Riesz bounds on band-limited fields: the `L^∞` bound and its
/// interpolated `L^q` forms, for every axis.
pub fn verify_riesz<T: Real>(
    fields: &[GridField<T>],
    qs: &[Exp<T>],
    consts: &ConstantsContext<T>,
    tolerance: f64,
) -> Result<LemmaReport> {
    let c = consts.c_infty;
    let mut rec = Recorder {
        tolerance,
        cases: Vec::new(),
    };
    for (i, w) in fields.iter().enumerate() {
        let radius = band_radius(w, consts.cutoff.half_width);
        if radius > T::lit(0.5 + 1e-12) {
            return Err(domain(format!(
                "field {i} carries modes at scaled radius {radius}; the bound is only checked where the cutoff equals one (<= 1/2)"
            )));
        }
        let name = w
            .recipe
            .as_ref()
            .map(|r| label(r, i))
            .unwrap_or_else(|| format!("field[{i}]"));
        let fft = Fft3::new(w.grid.n);
        let wn = Wavenumbers::new(w.grid.n, w.grid.length);
        let spec = fft.forward3(&w.components);
        for axis in 1..=3u8 {
            let rw = GridField {
                grid: w.grid,
                components: fft.inverse3(&riesz_spectrum(axis, &spec, &wn)),
                recipe: None,
                solenoidal: false,
            };
            let kernel = format!("R_{axis}");
            let inf = Exp::Infinity;
            rec.push(Estimate::Sup, kernel.clone(), &name, None, inf, Some(inf), rw.norm(inf), c * w.norm(inf), None);
            for &q in qs {
                let qv = match q {
                    Exp::Finite(v) if v > T::one() => v,
                    _ => continue,
                };
                let (estimate, e) = if qv >= T::lit(2.0) {
                    (Estimate::LqAboveTwo, T::one() - T::lit(2.0) / qv)
                } else {
                    (Estimate::LqBelowTwo, T::lit(2.0) / qv - T::one())
                };
                let rhs = c.powf(e) * w.norm(q);
                rec.push(estimate, kernel.clone(), &name, None, q, Some(q), rw.norm(q), rhs, None);
            }
        }
    }
    Ok(rec.finish(LemmaId::Riesz, c.to_f64_lossy()))
}
