//! End-to-end acceptance checks. Runs without the test harness so that each
//! criterion prints a single PASS or FAIL line; the process exits nonzero
//! when any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nsreg::app::{self, Command, Format};
use nsreg::certify::{
    check_norm_pair, ln_t_lower, ln_t_upper, make_certificate, pair_outcome, NormEntry, NormSet, SearchConfig,
    TimeBracket, Verdict,
};
use nsreg::constants::{
    ln_k0, ln_k0_from_parts, refinement_table, ConstantsContext, CutoffSpec, LebesgueExponent as Exp,
};
use nsreg::fields::{paper_example, rescale, sample_analytic, BoxGrid, FieldRecipe, GridField, Sampler};
use nsreg::heatflow::{
    apply_semigroup, kernel_l1, kernel_sup, standard_recipes, verify_lemma, KernelId, LemmaId, SemigroupAction,
    SweepSpec,
};
use nsreg::mildsolve::{
    config_for, dichotomy_verdict, picard_solve, spectral_run, spectral_run_with_state, PicardConfig, RunStatus,
};
use nsreg::spectral::Fft3;
use nsreg::Error;

type Outcome = Result<String, String>;

const ALPHA_STAR: f64 = 47.7;

fn ctx() -> ConstantsContext<f64> {
    ConstantsContext::golden()
}

fn f(v: f64) -> Exp<f64> {
    Exp::Finite(v)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T>(r: nsreg::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn l2_rel(a: &GridField<f64>, b: &GridField<f64>) -> Result<f64, String> {
    Ok(ok(a.difference(b))?.norm(f(2.0)) / b.norm(f(2.0)))
}

fn taylor_green(amplitude: f64, n: usize) -> GridField<f64> {
    let rec = FieldRecipe::new(Sampler::TaylorGreen { amplitude, wavenumber: 1.0, envelope: 2.0 });
    let grid = BoxGrid::new(n, rec.natural_length()).unwrap();
    sample_analytic(&rec, grid).unwrap().leray_projected(&Fft3::new(n))
}

fn periodic(amplitude: f64, seed: u64, n: usize) -> GridField<f64> {
    let period = 2.0 * PI;
    let rec = FieldRecipe::new(Sampler::RandomSolenoidal { amplitude, seed, period, kmax: 3.0 });
    sample_analytic(&rec, BoxGrid::new(n, period).unwrap()).unwrap()
}

fn example(alpha: f64, lambda: f64, n: usize) -> GridField<f64> {
    let grid = BoxGrid::new(n, 5.0 / (alpha * lambda)).unwrap();
    paper_example(alpha, lambda, 1.0, grid).unwrap()
}

fn kernel_identities() -> Outcome {
    let mut worst_heat = 0.0f64;
    let mut worst_grad = 0.0f64;
    for t in [0.01f64, 0.1, 1.0, 10.0] {
        worst_heat = worst_heat.max((ok(kernel_l1(KernelId::Heat, t))? - 1.0).abs());
        for j in 1..=3 {
            let v = ok(kernel_l1(KernelId::Gradient { j }, t))?;
            worst_grad = worst_grad.max(rel(v, (PI * t).powf(-0.5)));
        }
    }
    let peak = 2f64.powf(-3.5) * (-0.5f64).exp() * PI.powf(-1.5);
    let mut worst_peak = 0.0f64;
    for j in 1..=3 {
        worst_peak = worst_peak.max((ok(kernel_sup(KernelId::Gradient { j }, 1.0))? - peak).abs());
    }
    ensure(worst_heat <= 1e-8, || format!("heat mass off by {worst_heat:e}"))?;
    ensure(worst_grad <= 1e-6, || format!("gradient mass off by {worst_grad:e}"))?;
    ensure(worst_peak <= 1e-8, || format!("gradient peak off by {worst_peak:e}"))?;
    Ok(format!("mass {worst_heat:.1e}, gradient mass {worst_grad:.1e}, peak {worst_peak:.1e}"))
}

fn c_infty_converges() -> Outcome {
    let cutoff = CutoffSpec::<f64>::default();
    let table = ok(refinement_table(&cutoff, &[32, 64, 128, 256]))?;
    let v: Vec<f64> = table.iter().map(|(_, v)| *v).collect();
    let (d1, d2) = ((v[1] - v[0]).abs(), (v[2] - v[1]).abs());
    ensure(d2 < d1, || format!("changes {d1:e} then {d2:e}"))?;
    ensure(d2 / v[2] <= 1e-4, || format!("final relative change {:e}", d2 / v[2]))?;
    let fresh = ok(ConstantsContext::<f64>::compute(cutoff))?;
    let [a, b, c] = fresh.provenance.per_axis;
    let spread = (a - b).abs().max((a - c).abs()).max((b - c).abs());
    ensure(spread <= fresh.c_infty_error, || format!("axis spread {spread:e} > {:e}", fresh.c_infty_error))?;
    Ok(format!(
        "values {:.10} {:.10} {:.10}, final change {:.1e}, axis spread {spread:.1e}",
        v[0],
        v[1],
        v[2],
        d2 / v[2]
    ))
}

fn lemma_sweeps() -> Outcome {
    let c = ctx();
    let mut cases = 0;
    for lemma in [LemmaId::Heat, LemmaId::Gradient, LemmaId::RieszGradient] {
        let report = ok(verify_lemma(lemma, &SweepSpec::standard(), &c))?;
        ensure(report.pass, || format!("{lemma:?}: {:?}", report.failures().next()))?;
        cases += report.cases.len();
    }
    let report = ok(verify_lemma(LemmaId::Riesz, &SweepSpec::riesz(50), &c))?;
    ensure(report.pass, || format!("riesz: {:?}", report.failures().next()))?;
    Ok(format!("{cases} kernel cases and {} riesz cases nonnegative", report.cases.len()))
}

fn verdict_kind(r: &nsreg::Result<nsreg::certify::Certificate<f64>>) -> String {
    match r {
        Ok(c) => format!("{:?}", std::mem::discriminant(&c.verdict)),
        Err(Error::NotSolenoidal(_)) => "not solenoidal".into(),
        Err(e) => format!("error {e}"),
    }
}

fn scale_invariance() -> Outcome {
    let c = ctx();
    let s = SearchConfig::<f64>::default();
    let (mut worst_q, mut worst_t) = (0.0f64, 0.0f64);
    for recipe in standard_recipes() {
        let grid = ok(BoxGrid::new(64, recipe.natural_length()))?;
        let base = ok(rescale(&recipe, grid, 1.0))?;
        let q0 = ok(check_norm_pair(&base, &s.pairs(), &c))?;
        let v0 = verdict_kind(&make_certificate(&base, &s, &c));
        for lambda in [0.1, 0.5, 2.0, 10.0] {
            let u = ok(rescale(&recipe, grid, lambda))?;
            let q = ok(check_norm_pair(&u, &s.pairs(), &c))?;
            for (a, b) in q.pairs.iter().zip(&q0.pairs) {
                let (la, lb) = (a.ln_q.ok_or("zero norm")?, b.ln_q.ok_or("zero norm")?);
                worst_q = worst_q.max((la - lb).exp_m1().abs());
                let (ba, bb) = (a.bracket.as_ref().unwrap(), b.bracket.as_ref().unwrap());
                worst_t = worst_t.max(rel(ba.t_l, bb.t_l / (lambda * lambda)));
                worst_t = worst_t.max(rel(ba.t_r, bb.t_r / (lambda * lambda)));
            }
            let v = verdict_kind(&make_certificate(&u, &s, &c));
            ensure(v == v0, || format!("{:?} at lambda {lambda}: {v} vs {v0}", recipe.sampler))?;
        }
    }
    ensure(worst_q <= 1e-8, || format!("Q drifts by {worst_q:e}"))?;
    ensure(worst_t <= 1e-8, || format!("brackets drift by {worst_t:e}"))?;
    Ok(format!("Q drift {worst_q:.1e}, bracket drift {worst_t:.1e}"))
}

fn dual_form_and_equivalence() -> Outcome {
    let c = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let (mut worst_k0, mut worst_gap) = (0.0f64, 0.0f64);
    for i in 0..1000 {
        let p = if i % 10 == 0 { Exp::Infinity } else { f(rng.gen_range(3.05..120.0)) };
        let q = f(rng.gen_range(1.0..2.95));
        let cinf = rng.gen_range(0.2..4.0);
        let a = ok(ln_k0(p, q, cinf))?;
        let b = ok(ln_k0_from_parts(p, q, cinf))?;
        worst_k0 = worst_k0.max((a - b).abs() / a.abs().max(1.0));

        let norm_p = rng.gen_range(-12.0f64..6.0).exp();
        let norm_q = rng.gen_range(-12.0f64..6.0).exp();
        let norms = NormSet(vec![NormEntry { p, value: norm_p }, NormEntry { p: q, value: norm_q }]);
        let o = ok(pair_outcome(p, q, &norms, &c))?;
        let ln_l = ok(ln_t_lower(p, norm_p, &c))?.ok_or("no T_l")?;
        let ln_r = ok(ln_t_upper(p, q, norm_q, &c))?.ok_or("no T_r")?;
        let margin = o.ln_inv_k0 - o.ln_q.ok_or("zero Q")?;
        let gap = ln_l - ln_r;
        let scale = o.ln_inv_k0.abs().max(1.0);
        worst_gap = worst_gap.max((gap - margin).abs() / scale);
        if (gap - margin).abs() > 1e-9 * scale {
            return Err(format!("tuple {i}: ln T_l - ln T_r = {gap} but ln(1/K0) - ln Q = {margin}"));
        }
        if margin.abs() > 1e-9 * scale {
            ensure((ln_r <= ln_l) == (margin >= 0.0), || format!("tuple {i}: equivalence broken"))?;
        }
    }
    ensure(worst_k0 <= 1e-9, || format!("dual form off by {worst_k0:e}"))?;
    Ok(format!("1000 tuples, K0 forms {worst_k0:.1e}, bracket gap {worst_gap:.1e}"))
}

fn example_family() -> Outcome {
    let c = ctx();
    let s = SearchConfig::<f64>::default();
    let mut pairs = Vec::new();
    for lambda in [0.1, 1.0, 10.0] {
        let cert = ok(make_certificate(&example(ALPHA_STAR, lambda, 64), &s, &c))?;
        match cert.verdict {
            Verdict::GlobalByNormPair { p, q, .. } => pairs.push(format!("({p:?}, {q:?})")),
            other => return Err(format!("lambda {lambda}: {other:?}")),
        }
    }
    Ok(format!("alpha {ALPHA_STAR} certified by pairs {}", pairs.join(" ")))
}

fn small_bump_field(n: usize) -> GridField<f64> {
    let grid = BoxGrid::new(n, 10.0).unwrap();
    paper_example(ALPHA_STAR, 1.0 / ALPHA_STAR, 1.0, grid).unwrap()
}

fn picard_contraction() -> Outcome {
    let c = ctx();
    let mut worst = 0.0f64;
    let mut summary = Vec::new();
    for (name, u) in [("bump", small_bump_field(64)), ("periodic", periodic(0.05, 2, 64))] {
        let cfg = PicardConfig::new(f(6.0));
        let r = ok(picard_solve(&u, &cfg, &c))?;
        ensure(r.converged, || format!("{name}: not converged"))?;
        let top = r.contraction_ratios.iter().copied().fold(0.0, f64::max);
        ensure(top <= cfg.theta + 0.05, || format!("{name}: ratio {top}"))?;
        ensure(r.ball_max <= 2.0 * r.norm_u0 + 1e-9, || format!("{name}: left the ball"))?;
        worst = worst.max(top);
        summary.push(format!("{name} T0 {:.3e} in {} iterates", r.horizon.unwrap_or(0.0), r.iterates));
    }
    Ok(format!("largest ratio {worst:.2e}; {}", summary.join(", ")))
}

fn solver_physics() -> Outcome {
    let c = ctx();

    let u = taylor_green(1.0, 64);
    let mut cfg = ok(config_for(&u, 0.02, 0.4))?;
    cfg.outputs = 4;
    let run = ok(spectral_run(&u, &cfg, &c))?;
    ensure(run.status == RunStatus::Completed, || format!("moderate run {:?}", run.status))?;
    ensure(run.max_div_residual <= 1e-10, || format!("divergence {:e}", run.max_div_residual))?;
    ensure(run.max_energy_excess <= 1e-8, || format!("energy excess {:e}", run.max_energy_excess))?;

    let u = taylor_green(1e-7, 64);
    let mut cfg = ok(config_for(&u, 0.05, 0.5))?;
    cfg.outputs = 1;
    let (_, last) = ok(spectral_run_with_state(&u, &cfg, &c))?;
    let heat = ok(apply_semigroup(&ok(SemigroupAction::spectral(KernelId::Heat, 0.5))?, &u))?;
    let linear = l2_rel(&last, &heat)?;
    ensure(linear <= 1e-6, || format!("linear regime off by {linear:e}"))?;

    let u = periodic(0.05, 2, 64);
    let mut pc = PicardConfig::new(f(6.0));
    pc.intervals = 8;
    let pic = ok(picard_solve(&u, &pc, &c))?;
    let t0 = pic.horizon.ok_or("no horizon")?;
    let mut cfg = ok(config_for(&u, t0 / 64.0, t0))?;
    cfg.outputs = pc.intervals;
    cfg.monitor_p = vec![f(6.0)];
    let (run, last) = ok(spectral_run_with_state(&u, &cfg, &c))?;
    let mut worst = 0.0f64;
    for (s, &norm) in run.samples.iter().zip(&pic.norms) {
        worst = worst.max(rel(s.norms[0], norm));
    }
    worst = worst.max(l2_rel(pic.fixed_point.last().unwrap(), &last)?);
    ensure(worst <= 1e-3, || format!("picard vs spectral {worst:e}"))?;
    Ok(format!(
        "divergence {:.1e}, energy excess {:.1e}, linear {linear:.1e}, picard vs spectral {worst:.1e}",
        run.max_div_residual.max(0.0),
        run.max_energy_excess
    ))
}

fn dichotomy_exercise() -> Outcome {
    let c = ctx();
    let s = SearchConfig::<f64>::default();
    let natural = example(ALPHA_STAR, 1.0 / ALPHA_STAR, 64);
    let cert = ok(make_certificate(&natural, &s, &c))?;
    ensure(matches!(cert.verdict, Verdict::GlobalByNormPair { .. }), || format!("{:?}", cert.verdict))?;

    let u = small_bump_field(64);
    let (p, q) = (f(6.0), f(1.0));
    let bracket = ok(TimeBracket::new(p, q, u.norm(p), u.norm(q), &c))?.ok_or("zero data")?;
    let mut cfg = ok(config_for(&u, 0.1, 1.5 * bracket.t_r))?;
    cfg.outputs = 8;
    cfg.refinement = vec![(128, 0.05)];
    let run = ok(spectral_run(&u, &cfg, &c))?;
    ensure(run.status == RunStatus::Completed, || format!("run {:?}", run.status))?;
    let agreement = run.refinement_agreement.ok_or("no refinement")?;
    ensure(agreement <= 1e-4, || format!("refinement agreement {agreement:e}"))?;

    let wide = BoxGrid::new(128, 20.0).unwrap();
    let wide_u = paper_example(ALPHA_STAR, 1.0 / ALPHA_STAR, 1.0, wide).unwrap();
    let mut wide_cfg = ok(config_for(&wide_u, 0.1, 1.5 * bracket.t_r))?;
    wide_cfg.outputs = cfg.outputs;
    let wide_run = ok(spectral_run(&wide_u, &wide_cfg, &c))?;

    let report = ok(dichotomy_verdict(&run, &bracket, &c))?.with_box_sensitivity(&run, &wide_run);
    ensure(!report.decay.is_empty(), || "no samples past T_r".into())?;
    for check in &report.decay {
        ensure(check.holds, || format!("t = {}: {:e} above {:e}", check.t, check.measured, check.bound))?;
    }
    ensure(matches!(report.verdict, Some(Verdict::SimulationSupported { .. })), || report.annotation.clone())?;
    Ok(format!(
        "T_l {:.4} T_r {:.4}, agreement {agreement:.2e}, {} decay samples hold, box sensitivity {:.2e}",
        bracket.t_l,
        bracket.t_r,
        report.decay.len(),
        report.box_sensitivity.unwrap_or(f64::NAN)
    ))
}

const RUN_FIELD: &str = r#"
[field]
n = 16
length = 6.283185307179586

[field.recipe]
sampler = "random_solenoidal"
amplitude = 0.05
seed = 4
period = 6.283185307179586
"#;

fn reproducibility() -> Outcome {
    let simulate = format!("{RUN_FIELD}[solver]\ndt = 0.05\nt_end = 0.2\noutputs = 4\n");
    let picard = format!("{RUN_FIELD}[picard]\np = 6\nintervals = 4\n");
    let cases: Vec<(Command, String, Format)> = vec![
        (Command::Constants, String::new(), Format::Json),
        (
            Command::Certify,
            "[field]\nn = 32\n[field.recipe]\nsampler = \"paper_example\"\nalpha = 47.7\nlambda = 1.0\n".into(),
            Format::Json,
        ),
        (Command::Simulate, simulate.clone(), Format::Json),
        (Command::Simulate, simulate, Format::Csv),
        (Command::Picard, picard, Format::Json),
        (Command::VerifyLemmas, "[lemmas]\nlemma = \"riesz\"\nriesz_fields = 4\n".into(), Format::Json),
        (
            Command::Envelope,
            "[envelope]\nkind = \"decay\"\np = 6\nq = 2\nnorm_q = 0.01\ncount = 8\n".into(),
            Format::Json,
        ),
    ];
    let mut documents = 0;
    for (cmd, text, format) in cases {
        let cfg = ok(app::load_config(&text, &[]))?;
        let a = ok(app::run(cmd, &cfg, format))?;
        let b = ok(app::run(cmd, &cfg, format))?;
        ensure(a.documents.len() == b.documents.len(), || format!("{}: document count", cmd.name()))?;
        for (x, y) in a.documents.iter().zip(&b.documents) {
            ensure(x.name == y.name && x.bytes == y.bytes, || format!("{}: {} differs", cmd.name(), x.name))?;
            documents += 1;
        }
    }
    Ok(format!("{documents} documents byte-identical across reruns"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("kernel identities", kernel_identities),
        ("C_inf convergence", c_infty_converges),
        ("lemma sweeps", lemma_sweeps),
        ("scaling invariance", scale_invariance),
        ("K0 dual form and bracket equivalence", dual_form_and_equivalence),
        ("example family certificate", example_family),
        ("Picard contraction", picard_contraction),
        ("solver physics", solver_physics),
        ("dichotomy exercise", dichotomy_exercise),
        ("reproducibility", reproducibility),
    ];
    // `cargo test -- <filter>` selects criteria by number or name fragment
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if std::env::args().any(|a| a == "--list") {
        for (i, (name, _)) in criteria.iter().enumerate() {
            println!("criterion {}: {name}: test", i + 1);
        }
        return;
    }
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filters.is_empty() && !filters.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} ({name}): PASS [{secs:.1}s] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} ({name}): FAIL [{secs:.1}s] {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
