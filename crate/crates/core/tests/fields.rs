mod common;

use nsreg::constants::LebesgueExponent;
use nsreg::fields::{
    io, paper_example, q_pair, rescale, sample_analytic, BoxGrid, FieldRecipe, GridField, Sampler,
};
use nsreg::spectral::Fft3;
use proptest::prelude::*;

type E = LebesgueExponent<f64>;

fn f(v: f64) -> E {
    E::Finite(v)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn bump_example(alpha: f64, lambda: f64) -> FieldRecipe {
    FieldRecipe::new(Sampler::PaperExample { alpha, lambda, smoothing: 1.0 })
}

fn recipes() -> Vec<(FieldRecipe, BoxGrid<f64>)> {
    vec![
        (bump_example(1.0, 1.0), BoxGrid::new(32, 5.0).unwrap()),
        (
            FieldRecipe::new(Sampler::Gaussian { amplitude: 1.0, width: 1.0, component: 2 }),
            BoxGrid::new(32, 12.0).unwrap(),
        ),
        (
            FieldRecipe::new(Sampler::TaylorGreen { amplitude: 1.0, wavenumber: 1.0, envelope: 2.0 }),
            BoxGrid::new(32, 16.0).unwrap(),
        ),
        (
            FieldRecipe::new(Sampler::RandomSolenoidal { amplitude: 1.0, seed: 7, period: 10.0, kmax: 3.0 }),
            BoxGrid::new(32, 10.0).unwrap(),
        ),
    ]
}

#[test]
fn zero_recipe_gives_zero_field_and_norms() {
    let g = BoxGrid::new(16, 3.0).unwrap();
    let u = sample_analytic::<f64>(&FieldRecipe::new(Sampler::Zero), g).unwrap();
    assert!(u.is_zero());
    for p in [f(1.0), f(2.0), f(6.0), E::Infinity] {
        assert_eq!(u.norm(p), 0.0);
    }
    assert_eq!(q_pair(&u, f(6.0), f(2.0)).unwrap(), 0.0);
    assert_eq!(u.lp_norm(f(2.0)).tail_note, "identically zero");
}

#[test]
fn gaussian_peak_and_l2_norm() {
    let g = BoxGrid::new(64, 12.0).unwrap();
    let r = FieldRecipe::new(Sampler::Gaussian { amplitude: 1.0, width: 1.0, component: 1 });
    let u = sample_analytic::<f64>(&r, g).unwrap();
    assert_eq!(u.max_magnitude(), 1.0);
    let origin = 32 + 64 * (32 + 64 * 32);
    assert_eq!(u.components[0][origin], 1.0);
    let expect = (std::f64::consts::PI / 2.0).powf(0.75);
    assert!((u.norm(f(2.0)) - expect).abs() < 1e-6);
    assert!(!u.solenoidal);
}

#[test]
fn random_solenoidal_is_divergence_free() {
    let r = FieldRecipe::new(Sampler::RandomSolenoidal { amplitude: 1.0, seed: 42, period: 6.0, kmax: 4.0 });
    let g = BoxGrid::new(64, 6.0).unwrap();
    let u = sample_analytic::<f64>(&r, g).unwrap();
    let fft = Fft3::new(64);
    assert!(u.divergence_residual(&fft) <= 1e-12);
    // RMS normalization is resolution independent
    let rms = u.norm(f(2.0)) / 6f64.powf(1.5);
    assert!((rms - 1.0).abs() < 1e-12);
    let coarse = sample_analytic::<f64>(&r, BoxGrid::new(16, 6.0).unwrap()).unwrap();
    assert!(rel(coarse.norm(f(2.0)), u.norm(f(2.0))) < 1e-12);
    assert!(sample_analytic::<f64>(&r, BoxGrid::new(64, 5.0).unwrap()).is_err());
}

#[test]
fn random_fields_depend_only_on_seed() {
    let r = FieldRecipe::new(Sampler::RandomSolenoidal { amplitude: 1.0, seed: 3, period: 6.0, kmax: 2.0 });
    let g = BoxGrid::new(16, 6.0).unwrap();
    let a = sample_analytic::<f64>(&r, g).unwrap();
    let b = sample_analytic::<f64>(&r, g).unwrap();
    assert_eq!(a, b);
    let other = FieldRecipe::new(Sampler::RandomSolenoidal { amplitude: 1.0, seed: 4, period: 6.0, kmax: 2.0 });
    assert_ne!(a.components, sample_analytic::<f64>(&other, g).unwrap().components);
}

#[test]
fn paper_example_support_and_divergence() {
    let g = BoxGrid::new(64, 5.0).unwrap();
    let u = paper_example::<f64>(1.0, 1.0, 1.0, g).unwrap();
    assert!(u.solenoidal);
    for idx in 0..g.len() {
        let x = g.point(idx);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r >= 2.0 {
            assert_eq!(u.magnitude(idx), 0.0, "r = {r}");
        }
    }
    // The bump is smooth but not analytic, so the sampled residual falls
    // faster than any power of n; projection removes what is left.
    let mut last = f64::INFINITY;
    for n in [32, 64, 128] {
        let u = paper_example::<f64>(1.0, 1.0, 1.0, BoxGrid::new(n, 5.0).unwrap()).unwrap();
        let fft = Fft3::new(n);
        let res = u.divergence_residual(&fft);
        assert!(res < last / 10.0, "n = {n}: {res:e}");
        last = res;
        assert!(u.leray_projected(&fft).divergence_residual(&fft) <= 1e-12);
    }
    match paper_example::<f64>(1.0, 1.0, 1.0, BoxGrid::new(16, 3.5).unwrap()) {
        Err(nsreg::Error::BoxTooSmall { required, .. }) => assert_eq!(required, 4.0),
        other => panic!("expected a box error, got {other:?}"),
    }
}

#[test]
fn paper_example_norms_match_quadrature_oracle() {
    let g = BoxGrid::new(128, 5.0).unwrap();
    let u = paper_example::<f64>(1.0, 1.0, 1.0, g).unwrap();
    for p in [2.0, 3.0, 6.0] {
        let oracle = common::paper_psi_norm(p);
        assert!(rel(u.norm(f(p)), oracle) < 1e-6, "p = {p}: {} vs {oracle}", u.norm(f(p)));
    }
}

#[test]
fn paper_example_sup_converges_under_refinement() {
    let a = paper_example::<f64>(1.0, 1.0, 1.0, BoxGrid::new(64, 6.0).unwrap()).unwrap();
    let b = paper_example::<f64>(1.0, 1.0, 1.0, BoxGrid::new(128, 6.0).unwrap()).unwrap();
    let (na, nb) = (a.norm(E::Infinity), b.norm(E::Infinity));
    assert!(rel(na, nb) < 1e-4);
    assert!(rel(nb, common::paper_psi_sup()) < 1e-4);
}

#[test]
fn paper_example_golden_q_pair() {
    // (p, q) = (6, 2) on 128^3 nodes of the box of edge 5.
    const GOLDEN: f64 = 5.918_454_067_243_224e5;
    let g = BoxGrid::new(128, 5.0).unwrap();
    let u = paper_example::<f64>(1.0, 1.0, 1.0, g).unwrap();
    let q = q_pair(&u, f(6.0), f(2.0)).unwrap();
    assert!(rel(q, GOLDEN) < 1e-10, "{q:.15e}");
    let oracle = common::paper_psi_norm(6.0).powi(4) * common::paper_psi_norm(2.0).powi(4);
    assert!(rel(q, oracle) < 1e-6);
}

#[test]
fn doubling_lambda_and_alpha_lambda_scales_norms() {
    // (λ, αλ) -> (2λ, 2αλ) keeps α and doubles λ.
    let g = BoxGrid::new(64, 5.0).unwrap();
    let u = paper_example::<f64>(1.0, 1.0, 1.0, g).unwrap();
    let v = paper_example::<f64>(1.0, 2.0, 1.0, g.rescaled(2.0).unwrap()).unwrap();
    for p in [2.0, 4.0, 6.0] {
        let ratio = v.norm(f(p)) / u.norm(f(p));
        assert!(rel(ratio, 2f64.powf(1.0 - 3.0 / p)) < 1e-8);
    }
}

#[test]
fn rescale_identity_and_norm_scaling() {
    for (r, g) in recipes() {
        let u = sample_analytic::<f64>(&r, g).unwrap();
        assert_eq!(rescale::<f64>(&r, g, 1.0).unwrap().components, u.components);
        for lambda in [0.5, 2.0, 10.0] {
            let v = rescale::<f64>(&r, g, lambda).unwrap();
            for p in [f(2.0), f(6.0), E::Infinity] {
                let expect = lambda.powf(1.0 - 3.0 * p.recip()) * u.norm(p);
                assert!(rel(v.norm(p), expect) < 1e-8, "{} lambda={lambda} p={p}", r.id());
            }
        }
    }
}

#[test]
fn rescale_composes_at_recipe_level() {
    let r = bump_example(2.0, 1.0);
    let a = r.rescaled(0.5).rescaled(4.0);
    let b = r.rescaled(2.0);
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn q_pair_is_scale_invariant(which in 0usize..4, log_lambda in -1.0f64..1.0) {
        let lambda = 10f64.powf(log_lambda);
        let (r, g) = recipes().swap_remove(which);
        let u = sample_analytic::<f64>(&r, g).unwrap();
        let v = rescale::<f64>(&r, g, lambda).unwrap();
        for (p, q) in [(6.0, 2.0), (4.0, 1.5), (12.0, 2.5)] {
            let a = q_pair(&u, f(p), f(q)).unwrap();
            let b = q_pair(&v, f(p), f(q)).unwrap();
            prop_assert!(rel(a, b) < 1e-8);
        }
        let a = q_pair(&u, E::Infinity, f(2.0)).unwrap();
        let b = q_pair(&v, E::Infinity, f(2.0)).unwrap();
        prop_assert!(rel(a, b) < 1e-8);
    }

    #[test]
    fn norms_are_monotone_under_domination(seed in 0u64..1000, shrink in 0.0f64..1.0) {
        let r = FieldRecipe::new(Sampler::RandomSolenoidal { amplitude: 1.0, seed, period: 4.0, kmax: 2.0 });
        let g = BoxGrid::new(16, 4.0).unwrap();
        let v = sample_analytic::<f64>(&r, g).unwrap();
        let mut u = v.clone();
        for (i, x) in u.components[0].iter_mut().enumerate() {
            if i % 3 == 0 {
                *x *= shrink;
            }
        }
        for p in [f(1.0), f(2.0), f(3.5), f(7.0), E::Infinity] {
            prop_assert!(u.norm(p) <= v.norm(p) * (1.0 + 1e-14));
        }
    }

    #[test]
    fn interpolation_between_two_and_p(seed in 0u64..1000, p in 3.0f64..20.0, t in 0.05f64..0.95) {
        let r = FieldRecipe::new(Sampler::RandomSolenoidal { amplitude: 1.0, seed, period: 4.0, kmax: 2.0 });
        let u = sample_analytic::<f64>(&r, BoxGrid::new(16, 4.0).unwrap()).unwrap();
        let rr = 2.0 + t * (p - 2.0);
        let bound = u.norm(f(2.0)).powf(2.0 * (p - rr) / (rr * (p - 2.0)))
            * u.norm(f(p)).powf(p * (rr - 2.0) / (rr * (p - 2.0)));
        prop_assert!(u.norm(f(rr)) <= bound * (1.0 + 1e-12));
    }
}

#[test]
fn binary_round_trip_is_bit_exact() {
    let (r, g) = recipes().swap_remove(0);
    let u = sample_analytic::<f64>(&r, g).unwrap();
    let mut buf = Vec::new();
    io::write_field(&u, 0.25, &mut buf).unwrap();
    assert_eq!(buf.len(), 32 + 3 * 8 * g.len());
    let (v, t): (GridField<f64>, f64) = io::read_field(buf.as_slice()).unwrap();
    assert_eq!(t, 0.25);
    assert_eq!(v.grid, u.grid);
    for c in 0..3 {
        let a: Vec<u64> = u.components[c].iter().map(|x| x.to_bits()).collect();
        let b: Vec<u64> = v.components[c].iter().map(|x| x.to_bits()).collect();
        assert_eq!(a, b);
    }
    assert!(io::read_field::<f64, _>(&buf[..100]).is_err());
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(io::read_field::<f64, _>(bad.as_slice()).is_err());
}

#[test]
fn recipe_grammar_parses_from_toml() {
    let r: FieldRecipe = toml::from_str("sampler = \"paper_example\"\nalpha = 60\nlambda = 1.0\n").unwrap();
    assert_eq!(r, bump_example(60.0, 1.0));
    let r: FieldRecipe = toml::from_str("sampler = \"random_solenoidal\"\nseed = 42\nperiod = 6\nscale = 2\n").unwrap();
    assert_eq!(r.scale, 2.0);
    assert!(toml::from_str::<FieldRecipe>("sampler = \"vortex_ring\"\n").is_err());
}

#[test]
fn single_precision_sampling_agrees() {
    let g = BoxGrid::<f32>::new(32, 5.0).unwrap();
    let u = paper_example::<f32>(1.0, 1.0, 1.0, g).unwrap();
    let v = paper_example::<f64>(1.0, 1.0, 1.0, BoxGrid::new(32, 5.0).unwrap()).unwrap();
    let a = u.norm(LebesgueExponent::Finite(6.0)) as f64;
    assert!(rel(a, v.norm(f(6.0))) < 1e-5);
}
