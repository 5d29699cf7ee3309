use serde::{Deserialize, Serialize};

use crate::certify::certificate::SearchConfig;
use crate::certify::checks::NormSet;
use crate::constants::{ConstantsContext, LebesgueExponent as Exp};
use crate::error::{domain, Result};
use crate::fields::{paper_example, BoxGrid, FieldRecipe, Sampler};

/// Where the example family `λ ψ(αλx)` changes verdict as `α` grows.
///
/// For `λ = 1` the norms scale as `‖u‖_p = α^{-3/p} ‖ψ‖_p`, so both tests
/// reduce to thresholds on `α`. Neither depends on `λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaSearch {
    /// Smallest `α` at which some grid pair passes the norm-pair test.
    pub alpha_norm_pair: f64,
    pub pair: (Exp<f64>, Exp<f64>),
    /// `L^3` smallness holds for every `α` strictly above this.
    pub alpha_l3: f64,
    /// Geometric midpoint of the window, when there is one.
    pub alpha_star: Option<f64>,
    pub n: usize,
    pub smoothing: f64,
    pub base_norms: NormSet<f64>,
}

impl AlphaSearch {
    /// Width of the window as a ratio, below 1 when there is none.
    pub fn window(&self) -> f64 {
        self.alpha_l3 / self.alpha_norm_pair
    }
}

/// `d ln Q / d ln α` for `λ = 1`: `-(6/(p-3) + 6/(3-q))`.
fn alpha_slope(p: Exp<f64>, q: Exp<f64>) -> f64 {
    let r = p.recip();
    let q = q.finite().expect("q is finite");
    -(6.0 * r / (1.0 - 3.0 * r) + 6.0 / (3.0 - q))
}

/// Norms of `ψ` on the natural box at resolution `n`.
pub fn example_norms(n: usize, smoothing: f64, exponents: &[Exp<f64>]) -> Result<NormSet<f64>> {
    let recipe = FieldRecipe::new(Sampler::PaperExample {
        alpha: 1.0,
        lambda: 1.0,
        smoothing,
    });
    let grid = BoxGrid::new(n, recipe.natural_length())?;
    Ok(NormSet::measure(&paper_example(1.0, 1.0, smoothing, grid)?, exponents))
}

/// Locates the `α` window in which the norm-pair test passes and the
/// `L^3` test does not.
pub fn search_alpha_star(
    n: usize,
    smoothing: f64,
    search: &SearchConfig<f64>,
    ctx: &ConstantsContext<f64>,
) -> Result<AlphaSearch> {
    search.validate()?;
    let norms = example_norms(n, smoothing, &search.exponents())?;
    let three = norms.get(Exp::Finite(3.0))?;
    let best_threshold = search
        .p_grid
        .iter()
        .filter(|p| !p.is_infinite())
        .map(|&p| ctx.idc3p_threshold(p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if !best_threshold.is_finite() {
        return Err(domain("the p grid has no finite exponent"));
    }
    let alpha_l3 = three / best_threshold;

    let mut best: Option<(f64, (Exp<f64>, Exp<f64>))> = None;
    for (p, q) in search.pairs() {
        let ln_q = crate::fields::ln_q_pair_from_norms(p, q, norms.get(p)?, norms.get(q)?)?;
        // ln Q(α) = ln Q(1) + slope · ln α must reach -ln K_0.
        let ln_alpha = (ln_q + ctx.ln_k0(p, q)?) / -alpha_slope(p, q);
        let alpha = ln_alpha.exp();
        if best.map_or(true, |(a, _)| alpha < a) {
            best = Some((alpha, (p, q)));
        }
    }
    let (alpha_norm_pair, pair) = best.expect("validated grids are nonempty");
    let alpha_star = (alpha_norm_pair < alpha_l3).then(|| (alpha_norm_pair * alpha_l3).sqrt());
    Ok(AlphaSearch {
        alpha_norm_pair,
        pair,
        alpha_l3,
        alpha_star,
        n,
        smoothing,
        base_norms: norms,
    })
}
