use ris_secrecy::channels::{fisher_f_power_pdf, ris_sum_power_pdf, FadingParams};
use ris_secrecy::quad::{integrate, integrate_real_line, QuadOptions};
use ris_secrecy::snrdist::*;
use ris_secrecy::specfun::ContourSpec;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

fn mean_of(h: &SnrDistributionHandle) -> f64 {
    h.components.ris.ln_moment(1.0).exp() + h.components.direct.as_ref().map_or(0.0, |d| d.ln_moment(1.0).exp())
}

/// ∫₀^γ pdf, integrated in ln γ over successive grid cells.
fn cumulative_pdf(h: &SnrDistributionHandle, grid: &[f64]) -> Vec<f64> {
    let opts = QuadOptions { abs_tol: 1e-9, rel_tol: 1e-9, max_intervals: 2000 };
    let f = |u: f64| {
        let g = u.exp();
        h.pdf(g).unwrap() * g
    };
    let mut acc = integrate(f, grid[0].ln() - 25.0, grid[0].ln(), opts).unwrap().value;
    let mut out = vec![acc];
    for w in grid.windows(2) {
        acc += integrate(f, w[0].ln(), w[1].ln(), opts).unwrap().value;
        out.push(acc);
    }
    out
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

#[test]
fn constants_match_independent_transcription() {
    let k = derive_constants(&ScenarioConfig::paper_default()).unwrap();
    let expect = [
        (k.lambda1, 0.5),
        (k.c_cal, 0.020833333333333332),
        (k.g_cal, 0.017755368012522553),
        (k.a, 0.0001024),
        (k.ybar1, 0.0006762006882779828),
        (k.ybar2, 1.28e-05),
        (k.c, 16.73891729337671),
        (k.d, 0.3743960821022787),
        (k.eta1, 0.001736111111111111),
        (k.eta2, 0.001736111111111111),
        (k.delta1, 0.25),
        (k.delta2, 0.25),
        (k.gammabar_r, 1.1313708498984761e-06),
        (k.gammabar_r1, 0.00016358979259257722),
        (k.gammabar_e1, 1.28e-05),
        (k.gammabar_r2, 7.65033747398996e-10),
        (k.gammabar_e2, 1.4481546878700493e-11),
    ];
    for (i, (got, want)) in expect.into_iter().enumerate() {
        assert!(close(got, want, 1e-10), "entry {i}: {got} vs {want}");
    }
    assert_eq!((k.r_t, k.r_t_prime), (2.0, 1.0));
}

#[test]
fn constants_scale_with_source_power() {
    let mut cfg = ScenarioConfig::paper_default();
    let k1 = derive_constants(&cfg).unwrap();
    cfg.p_s *= 2.0;
    let k2 = derive_constants(&cfg).unwrap();
    assert!(close(k2.ybar1, 2.0 * k1.ybar1, 1e-14));
    assert!(close(k2.a, 2.0 * k1.a, 1e-14));
    assert_eq!((k1.eta1, k1.delta1, k1.c, k1.d), (k2.eta1, k2.delta1, k2.c, k2.d));
}

#[test]
fn hop_swap_keeps_shape_and_scale() {
    let mut cfg = ScenarioConfig::paper_default();
    cfg.fading.ttheta = FadingParams::new(1.5, 3.0, 1.0).unwrap();
    cfg.fading.thetar = FadingParams::new(3.0, 6.0, 1.0).unwrap();
    let k1 = derive_constants(&cfg).unwrap();
    std::mem::swap(&mut cfg.fading.ttheta, &mut cfg.fading.thetar);
    let k2 = derive_constants(&cfg).unwrap();
    assert!(close(k1.c, k2.c, 1e-12) && close(k1.d, k2.d, 1e-12));
}

#[test]
fn invalid_scenarios_are_rejected() {
    let mut cfg = ScenarioConfig::paper_default();
    cfg.n = 0;
    assert!(derive_constants(&cfg).is_err());
    let mut cfg = ScenarioConfig::paper_default();
    cfg.geometry.d_te = 0.0;
    assert!(derive_constants(&cfg).unwrap_err().to_string().contains("d_te"));
    let mut cfg = ScenarioConfig::paper_default();
    cfg.fading.thetae.m_s = 0.9;
    assert!(derive_constants(&cfg).unwrap_err().to_string().contains("thetae"));
    let mut cfg = ScenarioConfig::paper_default();
    cfg.r_s = -1.0;
    assert!(derive_constants(&cfg).is_err());
}

#[test]
fn snr_targets_rescale_noise() {
    let mut cfg = ScenarioConfig::paper_default();
    cfg.set_snr_r2(1e3);
    cfg.set_snr_e2(10.0);
    let k = derive_constants(&cfg).unwrap();
    assert!(close(k.gammabar_r2, 1e3, 1e-12) && close(k.gammabar_e2, 10.0, 1e-12));
    assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
    assert!((watts_to_dbm(1e-9) + 60.0).abs() < 1e-12);
}

#[test]
fn closed_forms_match_mellin_route_and_product_quadrature() {
    let k = derive_constants(&ScenarioConfig::paper_default()).unwrap();
    let contour = ContourSpec::default().with_rel_tol(1e-9);
    let st = k.fading.st;
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-10, max_intervals: 4000 };
    for side in [Side::Reader, Side::Eve] {
        let h = SnrDistributionHandle::new(&k, side, false, contour.clone()).unwrap();
        let mean = mean_of(&h);
        // Density of γ̄ X · Y by conditioning on the source-link power X.
        let inner = |y: f64| match side {
            Side::Reader => ris_sum_power_pdf(y, &k.ris, k.ybar1).unwrap(),
            Side::Eve => (-y / k.a).exp() / k.a,
        };
        let gb = match side {
            Side::Reader => k.gammabar_r,
            Side::Eve => k.gammabar_e,
        };
        let src = FadingParams { omega: 1.0 / (k.lambda1 * (st.m_s - 1.0) / st.m), ..st };
        for g in [0.05, 0.3, 1.0, 2.5, 8.0].map(|f| f * mean) {
            let closed = h.pdf(g).unwrap();
            let mellin = h.components.ris.pdf(g, &contour).unwrap();
            let product = integrate_real_line(
                |u| {
                    let x = u.exp();
                    fisher_f_power_pdf(x, &src).unwrap() * inner(g / (gb * x)) / gb
                },
                opts,
            )
            .unwrap()
            .value;
            assert!(close(closed, mellin, 1e-7), "{side:?} γ={g}: {closed} vs {mellin}");
            assert!(close(closed, product, 1e-6), "{side:?} γ={g}: {closed} vs {product}");
            let cdf = h.cdf(g).unwrap();
            let cdf_mellin = h.components.ris.cdf(g, &contour).unwrap();
            assert!((cdf - cdf_mellin).abs() < 1e-8, "{side:?} γ={g}: {cdf} vs {cdf_mellin}");
        }
    }
}

#[test]
fn all_cases_normalize_and_cdf_integrates_pdf() {
    let cfg = ScenarioConfig::paper_default();
    let k = derive_constants(&cfg).unwrap();
    for h in handles(&k, &ContourSpec::default().with_rel_tol(1e-8)).unwrap() {
        let mean = mean_of(&h);
        let n = if h.case.direct { 10 } else { 25 };
        let grid = log_grid(mean * 1e-2, mean * 20.0, n);
        let cum = cumulative_pdf(&h, &grid);
        let mut last = 0.0;
        for (g, c) in grid.iter().zip(&cum) {
            let cdf = h.cdf(*g).unwrap();
            assert!((cdf - c).abs() < 1e-5, "{}: γ={g} cdf {cdf} vs ∫pdf {c}", h.case);
            assert!(cdf >= last - 1e-12, "{}: cdf decreased at {g}", h.case);
            assert!(h.pdf(*g).unwrap() >= 0.0);
            last = cdf;
        }
        assert!((cum[n - 1] - 1.0).abs() < 1e-3, "{}: mass {}", h.case, cum[n - 1]);
        assert_eq!(h.cdf(0.0).unwrap(), 0.0);
        assert_eq!(h.pdf(-1.0).unwrap(), 0.0);
    }
}

#[test]
fn direct_links_dominate_and_degenerate() {
    let mut cfg = ScenarioConfig::paper_default();
    cfg.direct_links = true;
    let contour = ContourSpec::default().with_rel_tol(1e-8);
    let k = derive_constants(&cfg).unwrap();
    for side in [Side::Reader, Side::Eve] {
        let plain = SnrDistributionHandle::new(&k, side, false, contour.clone()).unwrap();
        let with = SnrDistributionHandle::new(&k, side, true, contour.clone()).unwrap();
        for g in log_grid(mean_of(&plain) * 0.05, mean_of(&with) * 5.0, 8) {
            assert!(with.cdf(g).unwrap() <= plain.cdf(g).unwrap() + 1e-6, "{side:?} γ={g}");
        }
    }
    cfg.fading.tr.omega = 1e-9;
    cfg.fading.te.omega = 1e-9;
    let k = derive_constants(&cfg).unwrap();
    for side in [Side::Reader, Side::Eve] {
        let plain = SnrDistributionHandle::new(&k, side, false, contour.clone()).unwrap();
        let with = SnrDistributionHandle::new(&k, side, true, contour.clone()).unwrap();
        for g in log_grid(mean_of(&plain) * 0.1, mean_of(&plain) * 5.0, 6) {
            let (a, b) = (with.cdf(g).unwrap(), plain.cdf(g).unwrap());
            assert!((a - b).abs() < 1e-3, "{side:?} γ={g}: {a} vs {b}");
        }
    }
}

#[test]
fn case_functions_check_the_handle() {
    let k = derive_constants(&ScenarioConfig::paper_default()).unwrap();
    let [r, e, rd, ed] = handles(&k, &ContourSpec::default()).unwrap();
    let g = mean_of(&r);
    assert!(pdf_reader_nodirect(g, &r).unwrap() > 0.0);
    assert!(cdf_eve_nodirect(mean_of(&e), &e).unwrap() > 0.0);
    assert!(pdf_reader_direct(mean_of(&rd), &rd).unwrap() > 0.0);
    assert!(cdf_eve_direct(mean_of(&ed), &ed).unwrap() > 0.0);
    assert!(pdf_eve_nodirect(g, &r).is_err());
    assert!(cdf_reader_direct(g, &r).is_err());
}

#[test]
fn source_scale_literal_mode_moves_lambda() {
    let mut cfg = ScenarioConfig::paper_default();
    cfg.sigma2_t = Some(cfg.p_s * 0.25);
    let k = derive_constants(&cfg).unwrap();
    let st = cfg.fading.st;
    assert!(close(k.lambda1, st.m * 0.25 / st.m_s, 1e-14));
    let h = SnrDistributionHandle::new(&k, Side::Reader, false, ContourSpec::default()).unwrap();
    let mean = mean_of(&h);
    let mass = cumulative_pdf(&h, &[mean * 1e-3, mean * 1e3]);
    assert!((mass[1] - 1.0).abs() < 1e-6, "{mass:?}");
}
