use proptest::prelude::*;
use ris_secrecy::montecarlo::*;
use ris_secrecy::snrdist::*;
use ris_secrecy::specfun::ContourSpec;
use ris_secrecy::Execution;

fn operating() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::paper_default();
    cfg.set_snr_r2(100.0);
    cfg.set_snr_e2(1.0);
    cfg
}

fn batch_of(gamma_r: Vec<f64>, gamma_e: Vec<f64>) -> SampleBatch {
    let n = gamma_r.len();
    SampleBatch { gamma_r, gamma_e, n_trials: n, seed: 0, fingerprint: String::new() }
}

#[test]
fn same_seed_same_samples_across_engines() {
    let mut cfg = operating();
    cfg.direct_links = true;
    let par = simulate_batch_with(&cfg, 20_000, 3, McOptions::default()).unwrap();
    let seq = McOptions { execution: Execution::Sequential, ..McOptions::default() };
    let seq = simulate_batch_with(&cfg, 20_000, 3, seq).unwrap();
    assert_eq!(par, seq);
    assert_eq!(par, simulate_batch(&cfg, 20_000, 3).unwrap());
    assert_ne!(par.gamma_r, simulate_batch(&cfg, 20_000, 4).unwrap().gamma_r);
    // A longer run extends the shorter one.
    let longer = simulate_batch(&cfg, 30_000, 3).unwrap();
    assert_eq!(&longer.gamma_r[..20_000], &par.gamma_r[..]);
}

#[test]
fn snr_scales_linearly_with_source_power() {
    let cfg = operating();
    let mut loud = cfg.clone();
    loud.p_s *= 4.0;
    let (a, b) = (simulate_batch(&cfg, 5_000, 9).unwrap(), simulate_batch(&loud, 5_000, 9).unwrap());
    for (x, y) in a.gamma_r.iter().zip(&b.gamma_r).chain(a.gamma_e.iter().zip(&b.gamma_e)) {
        assert!((y / x - 4.0).abs() < 1e-12);
    }
}

#[test]
fn independent_seeds_agree_within_noise() {
    let cfg = operating();
    let a = estimate_asc(&simulate_batch(&cfg, 200_000, 1).unwrap(), cfg.base);
    let b = estimate_asc(&simulate_batch(&cfg, 200_000, 2).unwrap(), cfg.base);
    let z = (a.mean - b.mean).abs() / (a.standard_error.powi(2) + b.standard_error.powi(2)).sqrt();
    assert!(z < 4.0, "z = {z}");
}

#[test]
fn standard_error_halves_when_trials_quadruple() {
    let cfg = operating();
    let small = estimate_asc(&simulate_batch(&cfg, 50_000, 5).unwrap(), cfg.base);
    let large = estimate_asc(&simulate_batch(&cfg, 200_000, 5).unwrap(), cfg.base);
    let ratio = large.standard_error / small.standard_error;
    assert!((0.3..0.7).contains(&ratio), "{ratio}");
}

#[test]
fn degenerate_batches() {
    let g: Vec<f64> = (1..=1000).map(|i| i as f64 * 0.01).collect();
    let same = batch_of(g.clone(), g.clone());
    assert_eq!(estimate_asc(&same, LogBase::Bits).mean, 0.0);
    assert_eq!(estimate_sop(&same, 0.5, LogBase::Bits).mean, 1.0);

    let silent = batch_of(g.clone(), vec![0.0; g.len()]);
    let expected = g.iter().map(|x| x.ln_1p() / std::f64::consts::LN_2).sum::<f64>() / g.len() as f64;
    assert!((estimate_asc(&silent, LogBase::Bits).mean - expected).abs() < 1e-12);
    let nats = g.iter().map(|x| x.ln_1p()).sum::<f64>() / g.len() as f64;
    assert!((estimate_asc(&silent, LogBase::Nats).mean - nats).abs() < 1e-12);

    let sop = estimate_sop(&silent, 1e9, LogBase::Bits);
    assert_eq!(sop.mean, 1.0);
    assert!(sop.standard_error > 0.0);
}

#[test]
fn empirical_cdf_basics() {
    let e = EmpiricalCdf::new(&[3.0, 1.0, 2.0, 4.0]).unwrap();
    assert_eq!(e.cdf(0.5), 0.0);
    assert_eq!(e.cdf(1.0), 0.25);
    assert_eq!(e.cdf(4.0), 1.0);
    assert_eq!((e.min(), e.max()), (1.0, 4.0));
    assert!((2.0..=3.0).contains(&e.median()));
    assert!(EmpiricalCdf::new(&[]).is_err());
    assert!(EmpiricalCdf::new(&[1.0, f64::NAN]).is_err());
}

#[test]
fn reader_samples_pass_kolmogorov_smirnov() {
    let cfg = operating();
    let k = derive_constants(&cfg).unwrap();
    let h = SnrDistributionHandle::new(&k, Side::Reader, false, ContourSpec::default().with_rel_tol(1e-7)).unwrap();
    let batch = simulate_batch(&cfg, 100_000, 21).unwrap();
    let e = empirical_cdf(&batch, Which::Reader).unwrap();
    let tab = TabulatedCdf::build(&h, e.min(), e.max(), 120, Execution::default()).unwrap();
    let d = e.ks_distance(|x| tab.eval(x));
    assert!(d < ks_critical_5pct(e.len()), "D = {d}");
    for x in [e.quantile(0.1), e.median(), e.quantile(0.9)] {
        assert!((tab.eval(x) - h.cdf(x).unwrap()).abs() < 1e-6);
    }
}

#[test]
fn tabulated_density_matches_smoothed_handle_density() {
    let mut cfg = operating();
    cfg.direct_links = true;
    let k = derive_constants(&cfg).unwrap();
    let h = SnrDistributionHandle::new(&k, Side::Eve, true, ContourSpec::default().with_rel_tol(1e-7)).unwrap();
    let m = h.mean();
    let tab = TabulatedCdf::build(&h, m * 1e-4, m * 50.0, 160, Execution::default()).unwrap();
    for u in [(m * 0.01).ln(), (m * 0.3).ln(), m.ln(), (m * 4.0).ln()] {
        let a = tab.smoothed_log_density(u, 0.2).unwrap();
        let b = smoothed_log_density(&h, u, 0.2).unwrap();
        assert!((a - b).abs() < 1e-4 * b.max(1e-3), "u={u}: {a} vs {b}");
    }
}

#[test]
fn physical_and_analytic_models_share_mean_powers() {
    let cfg = operating();
    let phys = McOptions { snr: SnrModel::Physical, ..McOptions::default() };
    let a = simulate_batch(&cfg, 200_000, 2).unwrap();
    let b = simulate_batch_with(&cfg, 200_000, 2, phys).unwrap();
    for (x, y) in [(&a.gamma_e, &b.gamma_e), (&a.gamma_r, &b.gamma_r)] {
        let (mx, my) = (batch_mean(x, 0), batch_mean(y, 0));
        let z = (mx.mean - my.mean).abs() / (mx.standard_error.powi(2) + my.standard_error.powi(2)).sqrt();
        assert!(z < 4.0, "{} vs {}", mx.mean, my.mean);
    }
}

#[test]
fn elementwise_cascade_tracks_moment_matched_mean() {
    let cfg = operating();
    let el = McOptions { cascade: CascadeModel::Elementwise, ..McOptions::default() };
    let a = batch_mean(&simulate_batch(&cfg, 100_000, 4).unwrap().gamma_r, 0);
    let b = batch_mean(&simulate_batch_with(&cfg, 100_000, 4, el).unwrap().gamma_r, 0);
    assert!((a.mean / b.mean - 1.0).abs() < 0.05, "{} vs {}", a.mean, b.mean);
}

#[test]
fn sample_dump_layout() {
    let batch = simulate_batch(&operating(), 10, 1).unwrap();
    let mut out = Vec::new();
    write_samples_csv(&batch, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "trial,gamma_R,gamma_E");
    assert_eq!(lines.len(), 11);
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, batch.gamma_r[0], batch.gamma_e[0]]);
}

#[test]
fn zero_trials_rejected() {
    assert!(simulate_batch(&operating(), 0, 1).is_err());
}

proptest! {
    #[test]
    fn secrecy_capacity_is_clipped_gap(r in 0.0f64..1e6, e in 0.0f64..1e6) {
        let c = secrecy_capacity(r, e, LogBase::Bits);
        prop_assert!(c >= 0.0);
        if e >= r {
            prop_assert_eq!(c, 0.0);
        } else {
            prop_assert!((c - ((1.0 + r) / (1.0 + e)).log2()).abs() <= 1e-9 * c.max(1.0));
        }
    }

    #[test]
    fn empirical_cdf_is_monotone(xs in prop::collection::vec(0.0f64..100.0, 1..200), a in 0.0f64..100.0, b in 0.0f64..100.0) {
        let e = EmpiricalCdf::new(&xs).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(e.cdf(lo) <= e.cdf(hi));
        prop_assert!((0.0..=1.0).contains(&e.cdf(lo)));
    }
}
