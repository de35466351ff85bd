//! Scenario description, derived constants and the reader/Eve SNR laws.
//!
//! Without direct links both SNRs are products γ̄·X_ST·Y of the source-link
//! F power and a surface cascade, so their densities are single Meijer
//! G-functions. With direct links an independent product of two F powers
//! is added, and the densities become bivariate Fox H-functions obtained
//! by inverting the product of the two Laplace transforms.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::channels::{ris_moment_constants, FadingParams, MellinLaw, MomentGamma, RisMomentConstants};
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::specfun::{fox_h_bivariate, ln_gamma, meijer_g, ContourSpec, Evaluation, FoxHSpec, MeijerGSpec, MellinIntegrand};

/// Link distances in meters and the path-loss exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkGeometry {
    pub d_st: f64,
    pub d_ttheta: f64,
    pub d_thetar: f64,
    pub d_thetae: f64,
    pub d_tr: f64,
    pub d_te: f64,
    pub chi: f64,
}

impl LinkGeometry {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("d_st", self.d_st),
            ("d_ttheta", self.d_ttheta),
            ("d_thetar", self.d_thetar),
            ("d_thetae", self.d_thetae),
            ("d_tr", self.d_tr),
            ("d_te", self.d_te),
            ("chi", self.chi),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("geometry.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Path loss d^χ.
    pub fn loss(&self, d: f64) -> f64 {
        d.powf(self.chi)
    }
}

/// Fading of the six links: source→tag, tag→surface, surface→reader,
/// surface→Eve, tag→reader and tag→Eve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkFading {
    pub st: FadingParams,
    pub ttheta: FadingParams,
    pub thetar: FadingParams,
    pub thetae: FadingParams,
    pub tr: FadingParams,
    pub te: FadingParams,
}

impl LinkFading {
    pub fn uniform(fp: FadingParams) -> Self {
        Self { st: fp, ttheta: fp, thetar: fp, thetae: fp, tr: fp, te: fp }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, fp) in self.named() {
            fp.validate().map_err(|e| Error::config(format!("fading.{name}: {e}")))?;
        }
        Ok(())
    }

    pub fn named(&self) -> [(&'static str, &FadingParams); 6] {
        [
            ("st", &self.st),
            ("ttheta", &self.ttheta),
            ("thetar", &self.thetar),
            ("thetae", &self.thetae),
            ("tr", &self.tr),
            ("te", &self.te),
        ]
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut FadingParams> {
        Some(match name {
            "st" => &mut self.st,
            "ttheta" => &mut self.ttheta,
            "thetar" => &mut self.thetar,
            "thetae" => &mut self.thetae,
            "tr" => &mut self.tr,
            "te" => &mut self.te,
            _ => return None,
        })
    }
}

/// Logarithm base for capacities and the secrecy-rate threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Bits,
    Nats,
}

impl LogBase {
    pub fn ln_base(self) -> f64 {
        match self {
            LogBase::Bits => LN_2,
            LogBase::Nats => 1.0,
        }
    }
}

/// A complete experiment, with every power in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub geometry: LinkGeometry,
    pub fading: LinkFading,
    /// Number of surface elements.
    pub n: usize,
    pub p_s: f64,
    pub sigma2_r: f64,
    pub sigma2_e: f64,
    /// When set, the source-link constant uses m σ²_T / (m_s P_S) instead
    /// of the mean-power scale m / ((m_s - 1) Ω).
    pub sigma2_t: Option<f64>,
    /// Secrecy-rate threshold in units of `base`.
    pub r_s: f64,
    pub direct_links: bool,
    pub base: LogBase,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.fading.validate()?;
        if self.n == 0 {
            return Err(Error::config("N must be at least 1"));
        }
        for (name, v) in [("p_s", self.p_s), ("sigma2_r", self.sigma2_r), ("sigma2_e", self.sigma2_e)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be a positive power, got {v}")));
            }
        }
        if let Some(t) = self.sigma2_t {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::config(format!("sigma2_t must be a positive power, got {t}")));
            }
        }
        if !(self.r_s >= 0.0 && self.r_s.is_finite()) {
            return Err(Error::config(format!("r_s must be non-negative, got {}", self.r_s)));
        }
        Ok(())
    }

    /// P_S / (d_ST^χ d_TΘ^χ d_ΘR^χ σ²_R): average SNR of the surface path to the reader.
    pub fn snr_r2(&self) -> f64 {
        let g = &self.geometry;
        self.p_s / (g.loss(g.d_st) * g.loss(g.d_ttheta) * g.loss(g.d_thetar) * self.sigma2_r)
    }

    /// P_S / (d_ST^χ d_TΘ^χ d_ΘE^χ σ²_E): average SNR of the surface path to Eve.
    pub fn snr_e2(&self) -> f64 {
        let g = &self.geometry;
        self.p_s / (g.loss(g.d_st) * g.loss(g.d_ttheta) * g.loss(g.d_thetae) * self.sigma2_e)
    }

    /// Rescales σ²_R so that [`Self::snr_r2`] equals `snr`.
    pub fn set_snr_r2(&mut self, snr: f64) {
        self.sigma2_r *= self.snr_r2() / snr;
    }

    /// Rescales σ²_E so that [`Self::snr_e2`] equals `snr`.
    pub fn set_snr_e2(&mut self, snr: f64) {
        self.sigma2_e *= self.snr_e2() / snr;
    }
}

impl ScenarioConfig {
    /// SHA-256 over a canonical rendering with 12 significant digits, so a
    /// dBm round trip through a scenario file keeps the fingerprint.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let g = &self.geometry;
        let mut text = format!("n={};direct={};base={:?};", self.n, self.direct_links, self.base);
        let mut put = |k: &str, v: f64| text.push_str(&format!("{k}={v:.11e};"));
        for (k, v) in [
            ("d_st", g.d_st),
            ("d_ttheta", g.d_ttheta),
            ("d_thetar", g.d_thetar),
            ("d_thetae", g.d_thetae),
            ("d_tr", g.d_tr),
            ("d_te", g.d_te),
            ("chi", g.chi),
            ("p_s", self.p_s),
            ("sigma2_r", self.sigma2_r),
            ("sigma2_e", self.sigma2_e),
            ("sigma2_t", self.sigma2_t.unwrap_or(-1.0)),
            ("r_s", self.r_s),
        ] {
            put(k, v);
        }
        for (name, fp) in self.fading.named() {
            put(&format!("{name}.m"), fp.m);
            put(&format!("{name}.m_s"), fp.m_s);
            put(&format!("{name}.omega"), fp.omega);
        }
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts watts to dBm.
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

impl ScenarioConfig {
    /// The long-range backscatter setup: 50 m hops, 60 m to the reader,
    /// 90 m direct tag-reader link, χ = 3.5, 30 dBm source, −60/−40 dBm
    /// noise at reader/Eve, N = 8, R_s = 1 bit/s/Hz, (m, m_s, Ω) = (2, 5, 1).
    pub fn paper_default() -> Self {
        let fp = FadingParams { m: 2.0, m_s: 5.0, omega: 1.0 };
        Self {
            name: "paper_default".into(),
            geometry: LinkGeometry {
                d_st: 50.0,
                d_ttheta: 50.0,
                d_thetar: 60.0,
                d_thetae: 50.0,
                d_tr: 90.0,
                d_te: 50.0,
                chi: 3.5,
            },
            fading: LinkFading::uniform(fp),
            n: 8,
            p_s: dbm_to_watts(30.0),
            sigma2_r: dbm_to_watts(-60.0),
            sigma2_e: dbm_to_watts(-40.0),
            sigma2_t: None,
            r_s: 1.0,
            direct_links: false,
            base: LogBase::Bits,
        }
    }
}

/// Every scalar constant of the closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants {
    pub lambda1: f64,
    pub c_cal: f64,
    pub g_cal: f64,
    pub a: f64,
    pub ybar1: f64,
    pub ybar2: f64,
    pub c: f64,
    pub d: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub gammabar_r: f64,
    pub gammabar_e: f64,
    pub gammabar_r1: f64,
    pub gammabar_r2: f64,
    pub gammabar_e1: f64,
    pub gammabar_e2: f64,
    pub r_t: f64,
    pub r_t_prime: f64,
    pub ris: RisMomentConstants,
    pub fading: LinkFading,
    pub n: usize,
    pub direct_links: bool,
    pub base: LogBase,
}

pub fn derive_constants(cfg: &ScenarioConfig) -> Result<DerivedConstants> {
    cfg.validate()?;
    let g = &cfg.geometry;
    let f = &cfg.fading;
    let nf = cfg.n as f64;
    let ris = ris_moment_constants(cfg.n, &f.ttheta, &f.thetar)?;
    let lambda1 = match cfg.sigma2_t {
        Some(s2t) => f.st.m * s2t / (f.st.m_s * cfg.p_s),
        None => f.st.lambda(),
    };
    let c_cal = lambda1 / (ln_gamma(f.st.m) + ln_gamma(f.st.m_s)).exp();
    let gammabar_r = 1.0 / g.loss(g.d_st);
    let gammabar_e = gammabar_r;
    let ybar1 = cfg.p_s / (g.loss(g.d_ttheta) * g.loss(g.d_thetar) * cfg.sigma2_r);
    let ybar2 = cfg.p_s / (g.loss(g.d_ttheta) * g.loss(g.d_thetae) * cfg.sigma2_e);
    let a = nf * f.ttheta.omega * f.thetae.omega * ybar2;
    let c = ris.c;
    let d = ris.d;
    let g_cal = ((c - 2.0) * LN_2 + c_cal.ln() - 0.5 * PI.ln() - ln_gamma(c + 1.0)).exp()
        / (gammabar_r * ybar1 * d * d);
    let eta = |x: &FadingParams, y: &FadingParams| {
        (-(ln_gamma(x.m) + ln_gamma(x.m_s) + ln_gamma(y.m) + ln_gamma(y.m_s))).exp()
    };
    let delta = |x: &FadingParams, y: &FadingParams| x.m * y.m / ((x.m_s - 1.0) * (y.m_s - 1.0));
    let gammabar_r1 = cfg.p_s * f.st.omega * f.tr.omega / (g.loss(g.d_st) * g.loss(g.d_tr) * cfg.sigma2_r);
    let gammabar_e1 = cfg.p_s * f.st.omega * f.te.omega / (g.loss(g.d_st) * g.loss(g.d_te) * cfg.sigma2_e);
    let r_t = (cfg.r_s * cfg.base.ln_base()).exp();
    let out = DerivedConstants {
        lambda1,
        c_cal,
        g_cal,
        a,
        ybar1,
        ybar2,
        c,
        d,
        eta1: eta(&f.st, &f.tr),
        eta2: eta(&f.st, &f.te),
        delta1: delta(&f.st, &f.tr),
        delta2: delta(&f.st, &f.te),
        gammabar_r,
        gammabar_e,
        gammabar_r1,
        gammabar_r2: gammabar_r * ybar1,
        gammabar_e1,
        gammabar_e2: gammabar_e * ybar2,
        r_t,
        r_t_prime: r_t - 1.0,
        ris,
        fading: cfg.fading,
        n: cfg.n,
        direct_links: cfg.direct_links,
        base: cfg.base,
    };
    let scalars = [
        out.lambda1, out.c_cal, out.g_cal, out.a, out.ybar1, out.c, out.d, out.eta1, out.delta1, out.gammabar_r1,
        out.gammabar_e1,
    ];
    if scalars.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("a derived constant is not finite"));
    }
    Ok(out)
}

/// Constants that enter the distributions or the metrics, by name.
pub const PERTURBABLE: [&str; 17] = [
    "lambda1", "c_cal", "g_cal", "a", "ybar1", "c", "d", "eta1", "eta2", "delta1", "delta2", "gammabar_r",
    "gammabar_e", "gammabar_r1", "gammabar_e1", "r_t", "r_t_prime",
];

impl DerivedConstants {
    /// Multiplies one named constant by `factor` and leaves every other
    /// constant, including those normally computed from it, untouched.
    pub fn perturbed(&self, name: &str, factor: f64) -> Result<Self> {
        let mut k = self.clone();
        let field = match name {
            "lambda1" => &mut k.lambda1,
            "c_cal" => &mut k.c_cal,
            "g_cal" => &mut k.g_cal,
            "a" => &mut k.a,
            "ybar1" => &mut k.ybar1,
            "c" => &mut k.c,
            "d" => &mut k.d,
            "eta1" => &mut k.eta1,
            "eta2" => &mut k.eta2,
            "delta1" => &mut k.delta1,
            "delta2" => &mut k.delta2,
            "gammabar_r" => &mut k.gammabar_r,
            "gammabar_e" => &mut k.gammabar_e,
            "gammabar_r1" => &mut k.gammabar_r1,
            "gammabar_e1" => &mut k.gammabar_e1,
            "r_t" => &mut k.r_t,
            "r_t_prime" => &mut k.r_t_prime,
            _ => return Err(Error::config(format!("unknown derived constant '{name}'"))),
        };
        *field *= factor;
        k.ris.c = k.c;
        k.ris.d = k.d;
        Ok(k)
    }

    /// 4 γ̄_R ȳ₁ d² / λ₁, the argument scale of the reader G-forms.
    pub fn kappa_reader(&self) -> f64 {
        4.0 * self.gammabar_r * self.ybar1 * self.d * self.d / self.lambda1
    }

    /// γ̄_E a / λ₁, the argument scale of the Eve G-forms.
    pub fn kappa_eve(&self) -> f64 {
        self.gammabar_e * self.a / self.lambda1
    }

    /// Reader no-direct SNR with moments 𝒢 κ^{1+t} Γ((c+1)/2+t) Γ(c/2+1+t) Γ(m+t) Γ(m_s-t),
    /// the Mellin transform of the G-form density.
    pub fn reader_ris_law(&self) -> MellinLaw {
        let st = self.fading.st;
        let c = self.c;
        let kappa = self.kappa_reader();
        MellinLaw {
            log_const: self.g_cal.ln() + kappa.ln(),
            log_scale: kappa.ln(),
            gammas: vec![
                MomentGamma { a: 0.5 * (c + 1.0), b: 1.0 },
                MomentGamma { a: 0.5 * c + 1.0, b: 1.0 },
                MomentGamma { a: st.m, b: 1.0 },
                MomentGamma { a: st.m_s, b: -1.0 },
            ],
        }
    }

    /// Eve no-direct SNR γ̄_E · X_ST · Y₂ with Y₂ exponential of mean a.
    pub fn eve_ris_law(&self) -> MellinLaw {
        let st = self.fading.st;
        let kappa = self.kappa_eve();
        MellinLaw {
            log_const: (self.c_cal / (self.a * self.gammabar_e)).ln() + kappa.ln(),
            log_scale: kappa.ln(),
            gammas: vec![
                MomentGamma { a: 1.0, b: 1.0 },
                MomentGamma { a: st.m, b: 1.0 },
                MomentGamma { a: st.m_s, b: -1.0 },
            ],
        }
    }

    fn direct_law(&self, other: &FadingParams, eta: f64, delta: f64, gammabar: f64) -> MellinLaw {
        let st = self.fading.st;
        MellinLaw {
            log_const: eta.ln(),
            log_scale: (gammabar / delta).ln(),
            gammas: vec![
                MomentGamma { a: st.m, b: 1.0 },
                MomentGamma { a: st.m_s, b: -1.0 },
                MomentGamma { a: other.m, b: 1.0 },
                MomentGamma { a: other.m_s, b: -1.0 },
            ],
        }
    }

    /// γ̄_R1 · X_ST X_TR / (Ω_ST Ω_TR).
    pub fn reader_direct_law(&self) -> MellinLaw {
        self.direct_law(&self.fading.tr, self.eta1, self.delta1, self.gammabar_r1)
    }

    /// γ̄_E1 · X_ST X_TE / (Ω_ST Ω_TE).
    pub fn eve_direct_law(&self) -> MellinLaw {
        self.direct_law(&self.fading.te, self.eta2, self.delta2, self.gammabar_e1)
    }

    /// Reader SNR as a sum of independent components.
    pub fn reader_components(&self) -> Components {
        Components {
            ris: self.reader_ris_law(),
            direct: self.direct_links.then(|| self.reader_direct_law()),
        }
    }

    /// Eve SNR as a sum of independent components.
    pub fn eve_components(&self) -> Components {
        Components { ris: self.eve_ris_law(), direct: self.direct_links.then(|| self.eve_direct_law()) }
    }
}

/// An SNR written as ris + optional direct term, independent.
#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    pub ris: MellinLaw,
    pub direct: Option<MellinLaw>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Reader,
    Eve,
}

/// Which of the four SNR laws a handle describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Case {
    pub side: Side,
    pub direct: bool,
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let side = match self.side {
            Side::Reader => "reader",
            Side::Eve => "eve",
        };
        write!(f, "{side}_{}", if self.direct { "direct" } else { "nodirect" })
    }
}

/// Precompiled density and distribution function of one SNR.
#[derive(Debug, Clone)]
pub struct SnrDistributionHandle {
    pub case: Case,
    pub consts: DerivedConstants,
    pub components: Components,
    pub contour: ContourSpec,
    pdf_spec: MeijerGSpec,
    cdf_spec: MeijerGSpec,
    ccdf_spec: MeijerGSpec,
    /// ln of the G-function prefactor and of its argument scale κ (argument κ/γ).
    ln_prefactor: f64,
    ln_kappa: f64,
}

impl SnrDistributionHandle {
    pub fn new(consts: &DerivedConstants, side: Side, direct: bool, contour: ContourSpec) -> Result<Self> {
        let st = consts.fading.st;
        // The complementary form moves the parameter 2 into the first
        // block, which puts the contour on the far side of the pole whose
        // residue is the unit mass.
        let (a, ln_prefactor, kappa) = match side {
            Side::Reader => {
                let c = consts.c;
                (vec![(2.0 - c) / 2.0, (3.0 - c) / 2.0, 2.0 - st.m], consts.g_cal.ln(), consts.kappa_reader())
            }
            Side::Eve => {
                (vec![1.0, 2.0 - st.m], (consts.c_cal / (consts.a * consts.gammabar_e)).ln(), consts.kappa_eve())
            }
        };
        let n = a.len();
        let pdf_spec = MeijerGSpec::new(1, n, a.clone(), vec![1.0 + st.m_s])?;
        let mut ca = a.clone();
        ca.push(2.0);
        let cdf_spec = MeijerGSpec::new(2, n, ca, vec![1.0 + st.m_s, 1.0])?;
        let mut ta = vec![2.0];
        ta.extend(a);
        let ccdf_spec = MeijerGSpec::new(1, n + 1, ta, vec![1.0 + st.m_s, 1.0])?;
        let ln_kappa = kappa.ln();
        let ris = match side {
            Side::Reader => consts.reader_ris_law(),
            Side::Eve => consts.eve_ris_law(),
        };
        let components = Components { ris, direct: direct.then(|| direct_law_for(consts, side)) };
        Ok(Self {
            case: Case { side, direct },
            consts: consts.clone(),
            components,
            contour,
            pdf_spec,
            cdf_spec,
            ccdf_spec,
            ln_prefactor,
            ln_kappa,
        })
    }

    pub fn pdf(&self, gamma: f64) -> Result<f64> {
        if gamma == f64::INFINITY {
            return Ok(0.0);
        }
        Ok(self.pdf_eval(gamma)?.map_or(0.0, |e| e.value.max(0.0)))
    }

    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        if gamma == f64::INFINITY {
            return Ok(1.0);
        }
        Ok(self.cdf_eval(gamma)?.map_or(0.0, |e| e.value.clamp(0.0, 1.0)))
    }

    /// Density with its quadrature diagnostics; `None` at γ ≤ 0.
    pub fn pdf_eval(&self, gamma: f64) -> Result<Option<Evaluation>> {
        if !(gamma > 0.0) {
            return Ok(None);
        }
        let ev = if self.case.direct {
            match self.direct_eval(gamma, false).and_then(|ev| self.checked(ev, gamma, "density")) {
                Ok(ev) => ev,
                Err(_) => self.direct_convolution(gamma, false)?,
            }
        } else {
            let x = (self.ln_kappa - gamma.ln()).exp();
            meijer_g(&self.pdf_spec, x, &self.contour)?.scale(self.ln_prefactor, 1.0)
        };
        // γ·f(γ) is the dimensionless density in ln γ.
        self.checked(ev, gamma, "density").map(Some)
    }

    /// Distribution function with diagnostics; `None` at γ ≤ 0. Past the
    /// median of a no-direct law it is formed as one minus the upper tail;
    /// a direct-link law falls back to the component convolution in its
    /// upper tail.
    pub fn cdf_eval(&self, gamma: f64) -> Result<Option<Evaluation>> {
        if !(gamma > 0.0) {
            return Ok(None);
        }
        if self.case.direct {
            let fox = self.direct_eval(gamma, true).and_then(|ev| self.checked(ev, 1.0, "distribution"));
            return match fox {
                Ok(ev) => Ok(Some(ev)),
                Err(e) if gamma <= self.mean() => Err(e),
                Err(_) => {
                    let mut ev = self.direct_convolution(gamma, true)?.scale(0.0, -1.0);
                    ev.add_term(0.0, 1.0, 0.0);
                    self.checked(ev, 1.0, "distribution").map(Some)
                }
            };
        }
        let lower = self.lower_tail(gamma);
        if let Ok(ev) = &lower {
            if ev.value <= 0.5 {
                return self.checked(ev.clone(), 1.0, "distribution").map(Some);
            }
        }
        match self.upper_tail(gamma) {
            Ok(mut ev) => {
                ev = ev.scale(0.0, -1.0);
                ev.add_term(0.0, 1.0, 0.0);
                self.checked(ev, 1.0, "distribution").map(Some)
            }
            Err(e) => match lower {
                Ok(ev) => self.checked(ev, 1.0, "distribution").map(Some),
                Err(_) => Err(e),
            },
        }
    }

    /// P(γ > x) with diagnostics, for the no-direct laws.
    pub fn ccdf_eval(&self, gamma: f64) -> Result<Evaluation> {
        if self.case.direct {
            if gamma > self.mean() {
                return self.checked(self.direct_convolution(gamma, true)?, 1.0, "survival function");
            }
            let mut ev = self.direct_eval(gamma, true)?.scale(0.0, -1.0);
            ev.add_term(0.0, 1.0, 0.0);
            return self.checked(ev, 1.0, "survival function");
        }
        self.checked(self.upper_tail(gamma)?, 1.0, "survival function")
    }

    fn lower_tail(&self, gamma: f64) -> Result<Evaluation> {
        let x = (self.ln_kappa - gamma.ln()).exp();
        Ok(meijer_g(&self.cdf_spec, x, &self.contour)?.scale(self.ln_prefactor + gamma.ln(), 1.0))
    }

    fn upper_tail(&self, gamma: f64) -> Result<Evaluation> {
        let x = (self.ln_kappa - gamma.ln()).exp();
        Ok(meijer_g(&self.ccdf_spec, x, &self.contour)?.scale(self.ln_prefactor + gamma.ln(), 1.0))
    }

    /// Rejects results whose error is large both relative to the value and
    /// in absolute terms after multiplying by `unit`.
    fn checked(&self, ev: Evaluation, unit: f64, what: &str) -> Result<Evaluation> {
        let tol = 10.0 * self.contour.rel_tol;
        if ev.error <= tol * ev.value.abs() || ev.error * unit <= 1e-12 {
            Ok(ev)
        } else {
            Err(Error::Convergence {
                what: format!("{} {what}: cancellation on the contour", self.case),
                achieved: ev.error / ev.value.abs().max(f64::MIN_POSITIVE),
                requested: self.contour.rel_tol,
            })
        }
    }

    /// Laplace-inversion form of the sum density:
    /// f(γ) = (2πi)^{-2} ∫∫ Γ(ζ₁)Γ(ζ₂)/Γ(ζ₁+ζ₂) E[A^{-ζ₁}] E[B^{-ζ₂}] γ^{ζ₁+ζ₂-1},
    /// and its integral with 1/Γ(1+ζ₁+ζ₂) in place of 1/(γ Γ(ζ₁+ζ₂)).
    fn direct_eval(&self, gamma: f64, cumulative: bool) -> Result<Evaluation> {
        let direct = self.components.direct.as_ref().expect("direct handle carries a direct law");
        let mut f = MellinIntegrand::new(2);
        self.components.ris.push_moment(&mut f, 0.0, &[-1.0, 0.0]);
        direct.push_moment(&mut f, 0.0, &[0.0, -1.0]);
        f.numerator(0.0, &[1.0, 0.0]).numerator(0.0, &[0.0, 1.0]);
        if cumulative {
            f.denominator(1.0, &[1.0, 1.0]);
        } else {
            f.denominator(0.0, &[1.0, 1.0]);
        }
        let lg = gamma.ln();
        let spec = FoxHSpec::from_terms(2, &f.terms)?;
        let x1 = (f.log_x[0] + lg).exp();
        let x2 = (f.log_x[1] + lg).exp();
        let h = fox_h_bivariate(&spec, x1, x2, &self.contour)?;
        let shift = if cumulative { 0.0 } else { -lg };
        Ok(h.scale(f.log_prefactor + shift, 1.0))
    }
}

impl SnrDistributionHandle {
    /// E[γ].
    pub fn mean(&self) -> f64 {
        let c = &self.components;
        c.ris.ln_moment(1.0).exp() + c.direct.as_ref().map_or(0.0, |d| d.ln_moment(1.0).exp())
    }

    /// Upper-tail form by convolving the two components,
    /// P(A+B > γ) = P(B > γ) + ∫₀^γ f_B(b) P(A > γ-b) db and f = ∫₀^γ f_B(b) f_A(γ-b) db,
    /// with the range split at γ/2 and each half integrated in the log of
    /// the distance to its end.
    fn direct_convolution(&self, gamma: f64, survival: bool) -> Result<Evaluation> {
        let a = &self.components.ris;
        let b = self.components.direct.as_ref().expect("direct handle carries a direct law");
        let contour = &self.contour;
        let opts = QuadOptions { abs_tol: 0.0, rel_tol: self.contour.rel_tol, max_intervals: 500 };
        let mut failure = None;
        let mut keep = |r: Result<f64>| match r {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };
        let half = 0.5 * gamma;
        let lo = (half * 1e-15).ln();
        let a_part = |x: f64| if survival { a.ccdf(x, contour) } else { a.pdf(x, contour) };
        // b near 0: substitute b = e^u.
        let near_zero = integrate(
            |u| {
                let bv = u.exp();
                let fb = keep(b.pdf(bv, contour));
                let fa = keep(a_part(gamma - bv));
                fb * fa * bv
            },
            lo,
            half.ln(),
            opts,
        )?;
        // b near γ: substitute γ - b = e^u.
        let near_top = integrate(
            |u| {
                let r = u.exp();
                let fb = keep(b.pdf(gamma - r, contour));
                let fa = keep(a_part(r));
                fb * fa * r
            },
            lo,
            half.ln(),
            opts,
        )?;
        let tail = if survival { keep(b.ccdf(gamma, contour)) } else { 0.0 };
        if let Some(e) = failure {
            return Err(e);
        }
        let value = near_zero.value + near_top.value + tail;
        let error = near_zero.error + near_top.error + contour.rel_tol * tail.abs();
        Ok(Evaluation::from_value(value, error))
    }
}

fn direct_law_for(consts: &DerivedConstants, side: Side) -> MellinLaw {
    match side {
        Side::Reader => consts.reader_direct_law(),
        Side::Eve => consts.eve_direct_law(),
    }
}

/// Handles for all four cases of one scenario.
pub fn handles(consts: &DerivedConstants, contour: &ContourSpec) -> Result<[SnrDistributionHandle; 4]> {
    Ok([
        SnrDistributionHandle::new(consts, Side::Reader, false, contour.clone())?,
        SnrDistributionHandle::new(consts, Side::Eve, false, contour.clone())?,
        SnrDistributionHandle::new(consts, Side::Reader, true, contour.clone())?,
        SnrDistributionHandle::new(consts, Side::Eve, true, contour.clone())?,
    ])
}

macro_rules! case_fns {
    ($pdf:ident, $cdf:ident, $side:expr, $direct:expr) => {
        pub fn $pdf(gamma: f64, h: &SnrDistributionHandle) -> Result<f64> {
            check_case(h, $side, $direct)?;
            h.pdf(gamma)
        }
        pub fn $cdf(gamma: f64, h: &SnrDistributionHandle) -> Result<f64> {
            check_case(h, $side, $direct)?;
            h.cdf(gamma)
        }
    };
}

fn check_case(h: &SnrDistributionHandle, side: Side, direct: bool) -> Result<()> {
    if h.case != (Case { side, direct }) {
        return Err(Error::config(format!("handle is {}, not the requested case", h.case)));
    }
    Ok(())
}

case_fns!(pdf_reader_nodirect, cdf_reader_nodirect, Side::Reader, false);
case_fns!(pdf_eve_nodirect, cdf_eve_nodirect, Side::Eve, false);
case_fns!(pdf_reader_direct, cdf_reader_direct, Side::Reader, true);
case_fns!(pdf_eve_direct, cdf_eve_direct, Side::Eve, true);
