use std::f64::consts::PI;

use num_complex::Complex64;

use nsreg::certify::{TimeBracket, Verdict};
use nsreg::constants::{ConstantsContext, LebesgueExponent};
use nsreg::fields::io::{read_field, write_field};
use nsreg::fields::{paper_example, sample_analytic, BoxGrid, FieldRecipe, GridField, Sampler};
use nsreg::heatflow::{apply_semigroup, KernelId, SemigroupAction};
use nsreg::mildsolve::{
    config_for, dichotomy_verdict, duhamel_apply, duhamel_apply_with, picard_solve, spectral_run,
    spectral_run_with_state, PicardConfig, RunStatus, SolverConfig, Trajectory,
};
use nsreg::spectral::Fft3;
use nsreg::Error;

type E = LebesgueExponent<f64>;

fn ctx() -> ConstantsContext<f64> {
    ConstantsContext::golden()
}

fn taylor_green(amplitude: f64, n: usize) -> GridField<f64> {
    let rec = FieldRecipe::new(Sampler::TaylorGreen { amplitude, wavenumber: 1.0, envelope: 2.0 });
    let grid = BoxGrid::new(n, rec.natural_length()).unwrap();
    let f = sample_analytic(&rec, grid).unwrap();
    f.leray_projected(&Fft3::new(n))
}

fn periodic(amplitude: f64, seed: u64, n: usize) -> GridField<f64> {
    let period = 2.0 * PI;
    let rec = FieldRecipe::new(Sampler::RandomSolenoidal { amplitude, seed, period, kmax: 3.0 });
    sample_analytic(&rec, BoxGrid::new(n, period).unwrap()).unwrap()
}

fn l2_rel(a: &GridField<f64>, b: &GridField<f64>) -> f64 {
    a.difference(b).unwrap().norm(E::Finite(2.0)) / b.norm(E::Finite(2.0))
}

/// Plain separable DFT, forward with `e^{-2πi jk/n}`.
mod oracle {
    use super::*;

    pub fn dft3(data: &[Complex64], n: usize, sign: f64) -> Vec<Complex64> {
        let tw: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / n as f64))
            .collect();
        let mut a = data.to_vec();
        for axis in 0..3 {
            let stride = n.pow(axis as u32);
            let mut b = vec![Complex64::default(); a.len()];
            for idx in 0..a.len() {
                let k = (idx / stride) % n;
                let base = idx - k * stride;
                let mut s = Complex64::default();
                for j in 0..n {
                    s += a[base + j * stride] * tw[(j * k) % n];
                }
                b[idx] = s;
            }
            a = b;
        }
        a
    }

    pub fn freq(i: usize, n: usize) -> f64 {
        if i <= n / 2 {
            i as f64
        } else {
            i as f64 - n as f64
        }
    }

    /// `G(t)u₀ - ∫₀ᵗ G(t-τ) P ∇·(u₀ ⊗ u₀) dτ` for a field whose modes all
    /// survive the two-thirds cut, with the τ-integral by composite Simpson.
    pub fn first_iterate(u0: &GridField<f64>, t: f64, panels: usize) -> GridField<f64> {
        let n = u0.grid.n;
        let len = n * n * n;
        let kscale = 2.0 * PI / u0.grid.length;
        let to_c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        let uh: Vec<Vec<Complex64>> = (0..3).map(|c| dft3(&to_c(&u0.components[c]), n, -1.0)).collect();
        let mut prod = vec![vec![Complex64::default(); len]; 9];
        for a in 0..3 {
            for b in 0..3 {
                let p: Vec<f64> = (0..len).map(|i| u0.components[a][i] * u0.components[b][i]).collect();
                prod[3 * a + b] = dft3(&to_c(&p), n, -1.0);
            }
        }
        let mut out = vec![vec![Complex64::default(); len]; 3];
        for idx in 0..len {
            let f = [freq(idx % n, n), freq((idx / n) % n, n), freq(idx / (n * n), n)];
            let keep = f.iter().all(|x| x.abs() < n as f64 / 3.0);
            let k = f.map(|x| x * kscale);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let mut w = [Complex64::default(); 3];
            for j in 0..3 {
                for m in 0..3 {
                    w[j] += Complex64::new(0.0, k[m]) * prod[3 * m + j][idx];
                }
            }
            if k2 > 0.0 {
                let dot = (w[0] * k[0] + w[1] * k[1] + w[2] * k[2]) / k2;
                for j in 0..3 {
                    w[j] -= dot * k[j];
                }
            }
            let h = t / panels as f64;
            let mut integral = 0.0;
            for i in 0..=panels {
                let c = if i == 0 || i == panels { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                integral += c * (-(t - i as f64 * h) * k2).exp();
            }
            integral *= h / 3.0;
            for j in 0..3 {
                out[j][idx] = uh[j][idx] * (-t * k2).exp() - if keep { w[j] * integral } else { Complex64::default() };
            }
        }
        let mut f = GridField::zeros(u0.grid);
        for c in 0..3 {
            let back = dft3(&out[c], n, 1.0);
            f.components[c] = back.iter().map(|z| z.re / len as f64).collect();
        }
        f
    }
}

#[test]
fn zero_data_gives_a_zero_run() {
    let f = GridField::<f64>::zeros(BoxGrid::new(16, 4.0).unwrap());
    let mut cfg = config_for(&f, 0.1, 1.0).unwrap();
    cfg.outputs = 4;
    let run = spectral_run(&f, &cfg, &ctx()).unwrap();
    assert_eq!(run.status, RunStatus::Completed);
    assert_eq!(run.samples.len(), 5);
    assert_eq!(run.samples[0].t, 0.0);
    assert_eq!(run.t_reached, 1.0);
    for s in &run.samples {
        assert_eq!(s.l2, 0.0);
        assert!(s.norms.iter().all(|&v| v == 0.0));
        assert_eq!(s.energy_lhs, 0.0);
    }
}

#[test]
fn tiny_amplitude_follows_the_heat_flow() {
    let f = taylor_green(1e-7, 32);
    let mut cfg = config_for(&f, 0.05, 0.5).unwrap();
    cfg.outputs = 1;
    let (run, last) = spectral_run_with_state(&f, &cfg, &ctx()).unwrap();
    assert_eq!(run.status, RunStatus::Completed);
    let heat = apply_semigroup(&SemigroupAction::spectral(KernelId::Heat, 0.5).unwrap(), &f).unwrap();
    let d = l2_rel(&last, &heat);
    assert!(d < 1e-6, "relative L2 distance to the heat flow {d:e}");
}

#[test]
fn energy_inequality_and_divergence_hold_at_moderate_amplitude() {
    let f = taylor_green(1.0, 32);
    let mut cfg = config_for(&f, 0.02, 0.4).unwrap();
    cfg.outputs = 8;
    let run = spectral_run(&f, &cfg, &ctx()).unwrap();
    assert_eq!(run.status, RunStatus::Completed);
    assert!(run.max_energy_excess <= 1e-8, "excess {:e}", run.max_energy_excess);
    assert!(run.max_div_residual <= 1e-10, "residual {:e}", run.max_div_residual);
    // the truncated system conserves the energy balance up to the time error
    for s in &run.samples {
        let e0 = run.samples[0].energy_lhs;
        assert!((s.energy_lhs / e0 - 1.0).abs() < 1e-5, "{} {}", s.t, s.energy_lhs / e0);
    }
    // the energy itself decays
    for w in run.samples.windows(2) {
        assert!(w[1].l2 < w[0].l2);
    }
}

#[test]
fn csv_and_manifest_describe_the_same_columns() {
    let f = taylor_green(0.5, 16);
    let mut cfg = config_for(&f, 0.05, 0.2).unwrap();
    cfg.outputs = 2;
    let run = spectral_run(&f, &cfg, &ctx()).unwrap();
    let csv = run.to_csv();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header, ["t", "l2", "l3", "l6", "linf", "energy_lhs", "div_residual", "steps"]);
    assert_eq!(lines.clone().count(), 3);
    for line in lines {
        assert_eq!(line.split(',').count(), header.len());
    }
    let m = run.manifest();
    assert_eq!(m.csv_columns, header);
    assert_eq!(m.constants_hash, ctx().hash());
    let json = serde_json::to_value(&m).unwrap();
    assert_eq!(json["status"], "completed");
}

#[test]
fn restarting_from_a_saved_state_matches_a_single_run() {
    let f = taylor_green(1.0, 32);
    let mut whole = config_for(&f, 0.02, 0.4).unwrap();
    whole.outputs = 4;
    let (_, end) = spectral_run_with_state(&f, &whole, &ctx()).unwrap();

    let mut first = whole.clone();
    first.t_end = 0.2;
    first.outputs = 2;
    let (run1, mid) = spectral_run_with_state(&f, &first, &ctx()).unwrap();
    let mut buf = Vec::new();
    write_field(&mid, run1.t_reached, &mut buf).unwrap();
    let (restored, t1): (GridField<f64>, f64) = read_field(buf.as_slice()).unwrap();
    assert_eq!(t1, 0.2);

    let mut second = whole.clone();
    second.t_start = t1;
    second.outputs = 2;
    let (run2, end2) = spectral_run_with_state(&restored, &second, &ctx()).unwrap();
    assert_eq!(run2.samples[0].t, 0.2);
    let d = l2_rel(&end2, &end);
    assert!(d <= 1e-9, "restart drift {d:e}");
}

#[test]
fn refinement_agreement_is_recorded_per_level() {
    let f = periodic(0.3, 5, 16);
    let mut cfg = config_for(&f, 0.05, 0.5).unwrap();
    cfg.outputs = 2;
    cfg.t_end = 0.2;
    cfg.refinement = vec![(32, 0.025), (64, 0.0125)];
    let run = spectral_run(&f, &cfg, &ctx()).unwrap();
    assert_eq!(run.refinement.len(), 2);
    let worst = run.refinement.iter().map(|l| l.agreement).fold(0.0, f64::max);
    assert_eq!(run.refinement_agreement, Some(worst));
    assert!(worst < 1e-4, "agreement {worst:e}");
    assert_eq!(run.status, RunStatus::Completed);
    assert_eq!(run.config.measure_n, Some(64));

    let mut strict = cfg.clone();
    strict.refinement_tolerance = 1e-300;
    let diverged = spectral_run(&f, &strict, &ctx()).unwrap();
    assert_eq!(diverged.status, RunStatus::RefinementDiverged);
}

#[test]
fn refinement_converges_at_fourth_order_in_time() {
    // band-limited data on its own period: time error dominates
    let f = periodic(2.0, 9, 16);
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&dt| {
            let mut cfg = config_for(&f, dt, 0.4).unwrap();
            cfg.outputs = 1;
            cfg.cfl = 10.0;
            spectral_run_with_state(&f, &cfg, &ctx()).unwrap().1
        })
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| w[0].difference(&w[1]).unwrap().norm(E::Finite(2.0)))
        .collect();
    let order = (errs[0] / errs[1]).log2();
    assert!(order >= 3.5, "observed order {order} from {errs:?}");
}

#[test]
fn config_validation_rejects_bad_settings() {
    let grid = BoxGrid::new(16, 4.0).unwrap();
    let ok = SolverConfig::new(grid, 0.1, 1.0);
    ok.validate().unwrap();
    let cases: Vec<Box<dyn Fn(&mut SolverConfig)>> = vec![
        Box::new(|c| c.dt = 0.0),
        Box::new(|c| c.dt = f64::NAN),
        Box::new(|c| c.dealias = 0.0),
        Box::new(|c| c.dealias = 1.5),
        Box::new(|c| c.t_end = 0.05),
        Box::new(|c| c.outputs = 0),
        Box::new(|c| c.refinement = vec![(16, 0.05)]),
        Box::new(|c| c.refinement = vec![(32, 0.05), (24, 0.01)]),
        Box::new(|c| c.refinement = vec![(32, -1.0)]),
        Box::new(|c| c.measure_n = Some(8)),
    ];
    for (i, break_it) in cases.iter().enumerate() {
        let mut c = ok.clone();
        break_it(&mut c);
        assert!(matches!(c.validate(), Err(Error::Config(_))), "case {i}");
    }
    let f = GridField::<f64>::zeros(BoxGrid::new(8, 4.0).unwrap());
    assert!(matches!(spectral_run(&f, &ok, &ctx()), Err(Error::Config(_))));
}

#[test]
fn config_round_trips_through_toml_with_defaults() {
    let text = "dt = 0.01\nt_end = 1.0\n[grid]\nn = 32\nlength = 10.0\n";
    let cfg: SolverConfig = toml::from_str(text).unwrap();
    assert_eq!(cfg.dealias, 2.0 / 3.0);
    assert_eq!(cfg.monitor_p.len(), 3);
    assert_eq!(cfg.cfl, 0.5);
    assert!(toml::from_str::<SolverConfig>("dt = 0.01\nt_end = 1.0\nbogus = 1\n[grid]\nn = 32\nlength = 10.0\n").is_err());
}

#[test]
fn collapsing_cfl_step_stops_the_run() {
    let f = taylor_green(1.0, 16);
    let mut cfg = config_for(&f, 0.05, 0.5).unwrap();
    // decaying data never speeds up, so force the step floor instead
    cfg.cfl = 1e-9;
    cfg.dt_min = 1e-3;
    let run = spectral_run(&f, &cfg, &ctx()).unwrap();
    assert_eq!(run.status, RunStatus::NormExploded);
    assert!(run.note.unwrap().contains("dt_min"));
}

#[test]
fn duhamel_with_zero_products_is_the_heat_flow() {
    let u0 = periodic(1.0, 3, 16);
    let zero = GridField::zeros(u0.grid);
    let traj = Trajectory {
        times: vec![0.0, 0.1, 0.2],
        fields: vec![zero.clone(), zero.clone(), zero],
    };
    let got = duhamel_apply(&traj, 0.2, &u0, 2.0 / 3.0).unwrap();
    let heat = apply_semigroup(&SemigroupAction::spectral(KernelId::Heat, 0.2).unwrap(), &u0).unwrap();
    assert!(l2_rel(&got, &heat) < 1e-13);

    // linear in u₀ when the nonlinear part vanishes
    let twice = duhamel_apply(&traj, 0.2, &u0.scaled(2.0), 2.0 / 3.0).unwrap();
    assert!(l2_rel(&twice, &got.scaled(2.0)) < 1e-13);
}

#[test]
fn duhamel_first_iterate_matches_direct_quadrature() {
    let u0 = periodic(1.0, 11, 16);
    let t = 0.05;
    let traj = Trajectory {
        times: (0..=4).map(|j| j as f64 * t / 4.0).collect(),
        fields: vec![u0.clone(); 5],
    };
    let got = duhamel_apply(&traj, t, &u0, 2.0 / 3.0).unwrap();
    let want = oracle::first_iterate(&u0, t, 2000);
    let d = l2_rel(&got, &want);
    assert!(d < 1e-6, "relative L2 distance {d:e}");
    // the nonlinear part is visible at this size
    let heat = apply_semigroup(&SemigroupAction::spectral(KernelId::Heat, t).unwrap(), &u0).unwrap();
    assert!(l2_rel(&heat, &want) > 1e-3);
}

#[test]
fn duhamel_rejects_a_coarse_grid_and_off_node_times() {
    let u0 = periodic(1.0, 11, 16);
    let traj = Trajectory {
        times: vec![0.0, 0.5, 1.0],
        fields: (0..3).map(|j| u0.scaled(1.0 + 20.0 * (j * j) as f64)).collect(),
    };
    assert!(matches!(duhamel_apply_with(&traj, 1.0, &u0, 2.0 / 3.0, 1e-8), Err(Error::Quadrature(_))));
    assert!(duhamel_apply(&traj, 0.7, &u0, 2.0 / 3.0).is_err());
    let bent = Trajectory { times: vec![0.0, 0.5, 1.2], fields: traj.fields.clone() };
    assert!(duhamel_apply(&bent, 0.5, &u0, 2.0 / 3.0).is_err());
}

#[test]
fn picard_on_zero_data_is_immediate() {
    let f = GridField::<f64>::zeros(BoxGrid::new(16, 4.0).unwrap());
    let r = picard_solve(&f, &PicardConfig::new(E::Finite(6.0)), &ctx()).unwrap();
    assert_eq!(r.iterates, 1);
    assert!(r.converged);
    assert_eq!(r.horizon, None);
    assert!(r.fixed_point[0].is_zero());
}

fn small_paper_field(n: usize) -> GridField<f64> {
    let alpha = 47.7;
    paper_example(alpha, 1.0 / alpha, 1.0, BoxGrid::new(n, 10.0).unwrap()).unwrap()
}

#[test]
fn picard_contracts_inside_the_ball() {
    let fields = [small_paper_field(32), periodic(0.05, 2, 16)];
    for f in &fields {
        for p in [E::Finite(6.0), E::Infinity] {
            let cfg = PicardConfig::new(p);
            let r = picard_solve(f, &cfg, &ctx()).unwrap();
            assert!(r.converged);
            assert!(r.contraction_ratios.iter().all(|&q| q <= 2.0 / 3.0 + 0.05), "{:?}", r.contraction_ratios);
            assert!(r.ball_max <= 2.0 * r.norm_u0 + 1e-9);
            assert_eq!(r.fixed_point.len(), cfg.intervals + 1);
            assert!(r.residual <= cfg.tolerance * r.norm_u0);
            let h = r.horizon.unwrap();
            assert!((r.times.last().unwrap() - h).abs() <= 1e-12 * h);
        }
    }
}

#[test]
fn picard_rejects_bad_settings() {
    let f = periodic(0.05, 2, 16);
    let mut cfg = PicardConfig::new(E::Finite(6.0));
    cfg.theta = 1.0;
    assert!(matches!(picard_solve(&f, &cfg, &ctx()), Err(Error::Config(_))));
    let cfg = PicardConfig::new(E::Finite(2.0));
    assert!(picard_solve(&f, &cfg, &ctx()).is_err());
}

#[test]
fn picard_and_spectral_runs_agree() {
    let f = periodic(0.05, 2, 16);
    let mut pc = PicardConfig::new(E::Finite(6.0));
    pc.intervals = 8;
    let pic = picard_solve(&f, &pc, &ctx()).unwrap();
    let t0 = pic.horizon.unwrap();
    let mut cfg = config_for(&f, t0 / 64.0, t0).unwrap();
    cfg.outputs = 8;
    cfg.monitor_p = vec![E::Finite(6.0)];
    let run = spectral_run(&f, &cfg, &ctx()).unwrap();
    for (s, (&t, &norm)) in run.samples.iter().zip(pic.times.iter().zip(&pic.norms)) {
        assert!((s.t - t).abs() <= 1e-12 * t0);
        assert!((s.norms[0] - norm).abs() <= 1e-3 * norm, "t = {t}: {} vs {norm}", s.norms[0]);
    }
    let (_, mid) = {
        let mut half = cfg.clone();
        half.t_end = pic.times[4];
        spectral_run_with_state(&f, &half, &ctx()).unwrap()
    };
    let d = l2_rel(&pic.fixed_point[4], &mid);
    assert!(d <= 1e-4, "fixed point vs spectral at T_0/2: {d:e}");
}

#[test]
fn dichotomy_upgrades_only_past_t_r_with_agreement() {
    let f = periodic(1e-3, 5, 16);
    let ctx = ctx();
    let p = E::Finite(6.0);
    let q = E::Finite(1.5);
    let bracket = TimeBracket::new(p, q, f.norm(p), f.norm(q), &ctx).unwrap().unwrap();
    let t_r = bracket.t_r;
    assert!(t_r > 0.01 && t_r < 0.04, "{t_r}");

    let mut cfg = config_for(&f, 0.005, 0.05).unwrap();
    cfg.outputs = 4;
    cfg.refinement = vec![(32, 0.0025)];
    let run = spectral_run(&f, &cfg, &ctx).unwrap();
    assert_eq!(run.status, RunStatus::Completed);
    let report = dichotomy_verdict(&run, &bracket, &ctx).unwrap();
    match report.verdict {
        Some(Verdict::SimulationSupported { t_reached, t_r: tr }) => {
            assert_eq!(t_reached, 0.05);
            assert_eq!(tr, t_r);
        }
        ref other => panic!("{other:?}"),
    }
    assert!(report.annotation.contains("subject to discretization error"));
    assert_eq!(report.decay.len(), 3);
    assert!(report.decay_holds);

    let mut unrefined = run.clone();
    unrefined.refinement_agreement = None;
    assert!(dichotomy_verdict(&unrefined, &bracket, &ctx).unwrap().verdict.is_none());

    let mut short = cfg.clone();
    short.t_end = 0.01;
    let run = spectral_run(&f, &short, &ctx).unwrap();
    let report = dichotomy_verdict(&run, &bracket, &ctx).unwrap();
    assert!(report.verdict.is_none());
    assert!(report.decay.is_empty());
    assert!(report.annotation.contains("bracket stands"));
}

#[test]
fn blowup_floor_is_reported_for_exploded_runs() {
    let f = periodic(0.3, 5, 16);
    let ctx = ctx();
    let p = E::Finite(6.0);
    let q = E::Finite(2.0);
    let bracket = TimeBracket::new(p, q, f.norm(p), f.norm(q), &ctx).unwrap().unwrap();
    let mut cfg = config_for(&f, 0.05, 0.5).unwrap();
    cfg.outputs = 4;
    let mut run = spectral_run(&f, &cfg, &ctx).unwrap();
    run.status = RunStatus::NormExploded;
    run.t_reached = 0.3;
    let report = dichotomy_verdict(&run, &bracket, &ctx).unwrap();
    assert!(report.verdict.is_none());
    assert_eq!(report.blowup.len(), 3);
    assert!(report.blowup.iter().all(|c| c.bound > 0.0));
}

#[test]
fn padded_products_match_a_finer_truncated_run() {
    let coarse = periodic(0.3, 5, 16);
    let fine = periodic(0.3, 5, 32);
    let mut cfg = config_for(&coarse, 0.02, 0.2).unwrap();
    cfg.outputs = 2;
    cfg.padding = true;
    let padded = spectral_run(&coarse, &cfg, &ctx()).unwrap();
    assert!(padded.max_energy_excess <= 1e-8, "excess {:e}", padded.max_energy_excess);
    assert!(padded.max_div_residual <= 1e-10);
    let mut cfg = config_for(&fine, 0.02, 0.2).unwrap();
    cfg.outputs = 2;
    let truncated = spectral_run(&fine, &cfg, &ctx()).unwrap();
    let (a, b) = (padded.samples.last().unwrap(), truncated.samples.last().unwrap());
    assert!((a.l2 - b.l2).abs() <= 1e-6 * b.l2, "{} vs {}", a.l2, b.l2);
}
