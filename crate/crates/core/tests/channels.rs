use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_secrecy::channels::*;
use ris_secrecy::quad::{integrate_positive, QuadOptions};
use ris_secrecy::specfun::ContourSpec;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

fn fp(m: f64, m_s: f64, omega: f64) -> FadingParams {
    FadingParams::new(m, m_s, omega).unwrap()
}

/// F power as a scaled Fisher-Snedecor variate: X = Ω(m_s-1)/m_s · F(2m, 2m_s).
fn statrs_cdf(x: f64, p: &FadingParams) -> f64 {
    let f = FisherSnedecor::new(2.0 * p.m, 2.0 * p.m_s).unwrap();
    f.cdf(x * p.m_s / (p.omega * (p.m_s - 1.0)))
}

fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max((c - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn rejects_invalid_fading() {
    assert!(FadingParams::new(0.0, 3.0, 1.0).is_err());
    assert!(FadingParams::new(2.0, 1.0, 1.0).is_err());
    assert!(FadingParams::new(2.0, 3.0, -1.0).is_err());
    assert!(ris_moment_constants(0, &fp(2.0, 3.0, 1.0), &fp(2.0, 3.0, 1.0)).is_err());
}

#[test]
fn pdf_normalizes_and_has_mean_omega() {
    for p in [fp(2.0, 3.0, 1.0), fp(0.7, 5.5, 2.5), fp(6.0, 1.8, 0.3)] {
        let opts = QuadOptions::default();
        let mass = integrate_positive(|x| fisher_f_power_pdf(x, &p).unwrap(), p.omega, opts).unwrap();
        let mean = integrate_positive(|x| x * fisher_f_power_pdf(x, &p).unwrap(), p.omega, opts).unwrap();
        assert!((mass.value - 1.0).abs() < 1e-8, "{p:?}: mass {}", mass.value);
        assert!((mean.value - p.omega).abs() < 1e-6 * p.omega, "{p:?}: mean {}", mean.value);
    }
}

#[test]
fn meijer_cdf_matches_fisher_snedecor_cdf() {
    let contour = ContourSpec::default().with_rel_tol(1e-9);
    for p in [fp(2.0, 3.0, 1.0), fp(0.7, 5.5, 2.5), fp(3.5, 1.6, 0.1)] {
        for x in [1e-3, 0.05, 0.4, 1.0, 3.0, 20.0] {
            let x = x * p.omega;
            let g = fisher_f_power_cdf(x, &p, &contour).unwrap();
            let s = statrs_cdf(x, &p);
            assert!((g - s).abs() < 1e-8, "{p:?} x={x}: {g} vs {s}");
        }
    }
}

#[test]
fn sampler_mean_and_ks() {
    let p = fp(2.0, 3.0, 1.0);
    let sampler = FisherSampler::new(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut xs: Vec<f64> = (0..1_000_000).map(|_| sampler.sample(&mut rng)).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    let d = ks_distance(&mut xs[..200_000], |x| statrs_cdf(x, &p));
    assert!(d < 1.36 / (200_000f64).sqrt(), "KS {d}");
}

#[test]
fn samplers_are_deterministic() {
    let h = fp(2.0, 3.0, 1.0);
    let draw = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = CascadeSampler::new(8, &h, &h).unwrap();
        (0..100).map(|_| (c.reader(&mut rng), c.eve(&mut rng))).collect::<Vec<_>>()
    };
    assert_eq!(draw(5), draw(5));
    assert_ne!(draw(5), draw(6));
    let mut r1 = ChaCha8Rng::seed_from_u64(3);
    let mut r2 = ChaCha8Rng::seed_from_u64(3);
    assert_eq!(sample_fisher_f_power(&h, &mut r1).unwrap(), sample_fisher_f_power(&h, &mut r2).unwrap());
}

#[test]
fn shape_grows_with_surface_size() {
    let h1 = fp(2.0, 3.0, 1.0);
    let h2 = fp(1.5, 4.0, 2.0);
    let cs: Vec<f64> = [1, 2, 4, 8, 16, 64].iter().map(|&n| ris_moment_constants(n, &h1, &h2).unwrap().c).collect();
    assert!(cs.windows(2).all(|w| w[1] > w[0]), "{cs:?}");
}

#[test]
fn cascade_means_scale_with_n() {
    let h1 = fp(2.0, 3.0, 1.0);
    let h2 = fp(3.0, 4.0, 0.5);
    let ea = (h1.law().ln_moment(0.5) + h2.law().ln_moment(0.5)).exp();
    let ea2 = h1.omega * h2.omega;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for n in [2usize, 8, 32] {
        let c = CascadeSampler::new(n, &h1, &h2).unwrap();
        let trials = 100_000;
        let (mut sr, mut sr2, mut se, mut se2) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..trials {
            let r = c.reader(&mut rng);
            let e = c.eve(&mut rng);
            sr += r;
            sr2 += r * r;
            se += e;
            se2 += e * e;
        }
        let t = trials as f64;
        let nf = n as f64;
        let (mr, me) = (sr / t, se / t);
        let ser = ((sr2 / t - mr * mr) / t).sqrt();
        let see = ((se2 / t - me * me) / t).sqrt();
        let reader_exact = nf * ea2 + nf * (nf - 1.0) * ea * ea;
        let eve_exact = nf * ea2;
        assert!((mr - reader_exact).abs() < 4.0 * ser, "N={n}: reader {mr} vs {reader_exact} ± {ser}");
        assert!((me - eve_exact).abs() < 4.0 * see, "N={n}: eve {me} vs {eve_exact} ± {see}");
    }
}

#[test]
fn moment_matched_reader_cascade_fits_samples() {
    let h = fp(2.0, 3.0, 1.0);
    let contour = ContourSpec::default();
    let mut gaps = Vec::new();
    for n in [4usize, 32] {
        let k = ris_moment_constants(n, &h, &h).unwrap();
        let c = CascadeSampler::new(n, &h, &h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let mut ys: Vec<f64> = (0..20_000).map(|_| c.reader(&mut rng)).collect();
        let d = ks_distance(&mut ys, |y| ris_sum_power_cdf(y, &k, 1.0, &contour).unwrap());
        gaps.push(d);
    }
    eprintln!("moment-matching KS gap, N = 4, 32: {gaps:?}");
    assert!(gaps.iter().all(|&g| g < 0.05), "{gaps:?}");
}

#[test]
fn eve_cascade_approaches_exponential() {
    let h = fp(2.0, 3.0, 1.0);
    let mut gaps = Vec::new();
    for n in [4usize, 64] {
        let c = CascadeSampler::new(n, &h, &h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mean = n as f64;
        let mut ys: Vec<f64> = (0..50_000).map(|_| c.eve(&mut rng)).collect();
        gaps.push(ks_distance(&mut ys, |y| 1.0 - (-y / mean).exp()));
    }
    assert!(gaps[1] < gaps[0], "{gaps:?}");
    assert!(gaps[1] < 0.02, "{gaps:?}");
}

#[test]
fn ris_pdf_and_cdf_agree() {
    let h = fp(2.0, 5.0, 1.0);
    let k = ris_moment_constants(8, &h, &h).unwrap();
    let contour = ContourSpec::default().with_rel_tol(1e-9);
    let ybar = 3e-4;
    let mass = integrate_positive(|y| ris_sum_power_pdf(y, &k, ybar).unwrap(), ybar * 64.0, QuadOptions::default())
        .unwrap();
    assert!((mass.value - 1.0).abs() < 1e-8);
    let law = MellinLaw::ris_sum(&k, ybar);
    for y in [0.2, 1.0, 3.0].map(|f| f * ybar * 64.0) {
        let closed = ris_sum_power_cdf(y, &k, ybar, &contour).unwrap();
        let mellin = law.cdf(y, &contour).unwrap();
        assert!((closed - mellin).abs() < 1e-8, "{closed} vs {mellin}");
        let p1 = ris_sum_power_pdf(y, &k, ybar).unwrap();
        let p2 = law.pdf(y, &contour).unwrap();
        assert!((p1 - p2).abs() < 1e-7 * p1, "{p1} vs {p2}");
    }
}

fn fading() -> impl Strategy<Value = FadingParams> {
    (0.5f64..6.0, 1.5f64..8.0, 0.1f64..4.0).prop_map(|(m, s, o)| fp(m, s, o))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hop_swap_leaves_constants_unchanged(h1 in fading(), h2 in fading(), n in 1usize..200) {
        let a = ris_moment_constants(n, &h1, &h2).unwrap();
        let b = ris_moment_constants(n, &h2, &h1).unwrap();
        prop_assert!((a.c - b.c).abs() <= 1e-9 * a.c.abs().max(1.0));
        prop_assert!((a.d - b.d).abs() <= 1e-12 * a.d);
        prop_assert!(a.a_prime > 0.0 && a.b_prime > 0.0 && a.c_prime > 0.0);
    }

    #[test]
    fn matched_gamma_reproduces_first_two_moments(h1 in fading(), h2 in fading(), n in 1usize..200) {
        let k = ris_moment_constants(n, &h1, &h2).unwrap();
        let nf = n as f64;
        let ea = (h1.law().ln_moment(0.5) + h2.law().ln_moment(0.5)).exp();
        let var = h1.omega * h2.omega - ea * ea;
        let shape = k.c + 1.0;
        prop_assert!((shape * k.d - nf * ea).abs() <= 1e-9 * nf * ea);
        prop_assert!((shape * k.d * k.d - nf * var).abs() <= 1e-7 * nf * var);
    }

    #[test]
    fn fisher_pdf_is_positive_and_cdf_monotone(p in fading(), x in 1e-3f64..50.0) {
        let contour = ContourSpec::default();
        prop_assert!(fisher_f_power_pdf(x, &p).unwrap() > 0.0);
        let a = fisher_f_power_cdf(x, &p, &contour).unwrap();
        let b = fisher_f_power_cdf(1.1 * x, &p, &contour).unwrap();
        prop_assert!(b >= a - 1e-9);
    }
}
