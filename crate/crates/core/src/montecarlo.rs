//! Monte-Carlo ground truth: channel draws, instantaneous SNRs and the
//! estimators the closed forms are checked against.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};

use crate::channels::{ris_moment_constants, CascadeSampler, FisherSampler};
use crate::error::{Error, Result};
use crate::par::{map_items, Execution};
use crate::quad::{integrate, QuadOptions};
use crate::snrdist::{LogBase, ScenarioConfig, SnrDistributionHandle};

/// Trials per RNG stream. Each chunk owns stream `chunk index` of the seed,
/// so the samples do not depend on how chunks are spread over threads.
pub const CHUNK: usize = 4096;

/// Batches for the batch-means standard error.
pub const BATCHES: usize = 32;

/// Asymptotic 5% critical value of the Cramér–von Mises statistic.
pub const CVM_CRITICAL_5PCT: f64 = 0.461;

/// How the instantaneous SNRs are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrModel {
    /// Every SNR term gets its own source-link draw and direct links add
    /// in power, so γ_R and γ_E are independent as in the closed forms.
    #[default]
    Analytic,
    /// One shared source link and surface hop, with direct paths added
    /// to the surface field with a uniform phase.
    Physical,
}

/// How the N-element surface sums are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CascadeModel {
    /// The gamma amplitude and exponential power that the closed forms use.
    #[default]
    MomentMatched,
    /// Every element drawn from its two F-faded hops.
    Elementwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct McOptions {
    pub snr: SnrModel,
    pub cascade: CascadeModel,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub gamma_r: Vec<f64>,
    pub gamma_e: Vec<f64>,
    pub n_trials: usize,
    pub seed: u64,
    pub fingerprint: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub n_trials: usize,
    pub seed: u64,
}

impl McEstimate {
    /// |value - mean| / SE, infinite when the SE is zero and they differ.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = value - self.mean;
        if d == 0.0 {
            0.0
        } else {
            d.abs() / self.standard_error
        }
    }
}

/// Per-scenario samplers and SNR scale factors.
struct Generator {
    model: McOptions,
    direct: bool,
    n: usize,
    source: FisherSampler,
    /// P_S / (L_ST L_TΘ L_ΘR σ²_R) and P_S / (L_ST L_TΘ L_ΘE σ²_E).
    ris_r: f64,
    ris_e: f64,
    /// P_S / (L_ST L_TR σ²_R) and P_S / (L_ST L_TE σ²_E).
    dir_r: f64,
    dir_e: f64,
    cascade_r: CascadeSampler,
    cascade_e: CascadeSampler,
    hop1: FisherSampler,
    hop_r: FisherSampler,
    hop_e: FisherSampler,
    amp_r: Gamma<f64>,
    pow_e: Exp<f64>,
    field_e_sd: f64,
    link_tr: FisherSampler,
    link_te: FisherSampler,
}

impl Generator {
    fn new(cfg: &ScenarioConfig, model: McOptions) -> Result<Self> {
        cfg.validate()?;
        let g = &cfg.geometry;
        let f = &cfg.fading;
        let base = cfg.p_s / g.loss(g.d_st);
        let ris = ris_moment_constants(cfg.n, &f.ttheta, &f.thetar)?;
        let eve_power = cfg.n as f64 * f.ttheta.omega * f.thetae.omega;
        let dist = |e: String| Error::config(format!("sampler: {e}"));
        Ok(Self {
            model,
            direct: cfg.direct_links,
            n: cfg.n,
            source: FisherSampler::new(&f.st)?,
            ris_r: base / (g.loss(g.d_ttheta) * g.loss(g.d_thetar) * cfg.sigma2_r),
            ris_e: base / (g.loss(g.d_ttheta) * g.loss(g.d_thetae) * cfg.sigma2_e),
            dir_r: base / (g.loss(g.d_tr) * cfg.sigma2_r),
            dir_e: base / (g.loss(g.d_te) * cfg.sigma2_e),
            cascade_r: CascadeSampler::new(cfg.n, &f.ttheta, &f.thetar)?,
            cascade_e: CascadeSampler::new(cfg.n, &f.ttheta, &f.thetae)?,
            hop1: FisherSampler::new(&f.ttheta)?,
            hop_r: FisherSampler::new(&f.thetar)?,
            hop_e: FisherSampler::new(&f.thetae)?,
            amp_r: Gamma::new(ris.c + 1.0, ris.d).map_err(|e| dist(e.to_string()))?,
            pow_e: Exp::new(1.0 / eve_power).map_err(|e| dist(e.to_string()))?,
            field_e_sd: (0.5 * eve_power).sqrt(),
            link_tr: FisherSampler::new(&f.tr)?,
            link_te: FisherSampler::new(&f.te)?,
        })
    }

    fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self.model.snr {
            SnrModel::Analytic => self.trial_analytic(rng),
            SnrModel::Physical => self.trial_physical(rng),
        }
    }

    fn trial_analytic<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let (y_r, y_e) = match self.model.cascade {
            CascadeModel::MomentMatched => {
                let s: f64 = self.amp_r.sample(rng);
                (s * s, self.pow_e.sample(rng))
            }
            CascadeModel::Elementwise => (self.cascade_r.reader(rng), self.cascade_e.eve(rng)),
        };
        let mut g_r = self.ris_r * self.source.sample(rng) * y_r;
        let mut g_e = self.ris_e * self.source.sample(rng) * y_e;
        if self.direct {
            g_r += self.dir_r * self.source.sample(rng) * self.link_tr.sample(rng);
            g_e += self.dir_e * self.source.sample(rng) * self.link_te.sample(rng);
        }
        (g_r, g_e)
    }

    fn trial_physical<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let x_st = self.source.sample(rng);
        // Reader amplitude (phase-aligned) and complex Eve field of the surface.
        let (a_r, f_e) = match self.model.cascade {
            CascadeModel::MomentMatched => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                (self.amp_r.sample(rng), (self.field_e_sd * re, self.field_e_sd * im))
            }
            CascadeModel::Elementwise => {
                let (mut a, mut re, mut im) = (0.0, 0.0, 0.0);
                for _ in 0..self.n {
                    let h1 = self.hop1.sample(rng);
                    a += (h1 * self.hop_r.sample(rng)).sqrt();
                    let amp = (h1 * self.hop_e.sample(rng)).sqrt();
                    let phi: f64 = rng.random_range(-PI..PI);
                    re += amp * phi.cos();
                    im += amp * phi.sin();
                }
                (a, (re, im))
            }
        };
        let (mut rr, mut ri) = (self.ris_r.sqrt() * a_r, 0.0);
        let (mut er, mut ei) = (self.ris_e.sqrt() * f_e.0, self.ris_e.sqrt() * f_e.1);
        if self.direct {
            let (d, psi): (f64, f64) = ((self.dir_r * self.link_tr.sample(rng)).sqrt(), rng.random_range(-PI..PI));
            rr += d * psi.cos();
            ri += d * psi.sin();
            let (d, psi): (f64, f64) = ((self.dir_e * self.link_te.sample(rng)).sqrt(), rng.random_range(-PI..PI));
            er += d * psi.cos();
            ei += d * psi.sin();
        }
        (x_st * (rr * rr + ri * ri), x_st * (er * er + ei * ei))
    }
}

/// Draws `n_trials` reader/Eve SNR pairs with the validation defaults.
pub fn simulate_batch(cfg: &ScenarioConfig, n_trials: usize, seed: u64) -> Result<SampleBatch> {
    simulate_batch_with(cfg, n_trials, seed, McOptions::default())
}

pub fn simulate_batch_with(cfg: &ScenarioConfig, n_trials: usize, seed: u64, opts: McOptions) -> Result<SampleBatch> {
    if n_trials == 0 {
        return Err(Error::config("n_trials must be at least 1"));
    }
    let gen = Generator::new(cfg, opts)?;
    let chunks: Vec<usize> = (0..n_trials.div_ceil(CHUNK)).collect();
    let parts = map_items(&chunks, opts.execution, |&k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let len = CHUNK.min(n_trials - k * CHUNK);
        (0..len).map(|_| gen.trial(&mut rng)).collect::<Vec<_>>()
    });
    let (gamma_r, gamma_e) = parts.into_iter().flatten().unzip();
    Ok(SampleBatch { gamma_r, gamma_e, n_trials, seed, fingerprint: cfg.fingerprint() })
}

/// Mean with a batch-means standard error over contiguous batches.
pub fn batch_mean(values: &[f64], seed: u64) -> McEstimate {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let b = BATCHES.min(n);
    let standard_error = if b < 2 {
        0.0
    } else {
        let means: Vec<f64> = (0..b)
            .map(|i| {
                let s = &values[i * n / b..(i + 1) * n / b];
                s.iter().sum::<f64>() / s.len() as f64
            })
            .collect();
        let m = means.iter().sum::<f64>() / b as f64;
        let var = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (b - 1) as f64;
        (var / b as f64).sqrt()
    };
    McEstimate { mean, standard_error, n_trials: n, seed }
}

/// Secrecy capacity of one trial, in units of `base`.
pub fn secrecy_capacity(gamma_r: f64, gamma_e: f64, base: LogBase) -> f64 {
    ((gamma_r.ln_1p() - gamma_e.ln_1p()) / base.ln_base()).max(0.0)
}

/// ASC as the sample mean of the per-trial secrecy capacity.
pub fn estimate_asc(batch: &SampleBatch, base: LogBase) -> McEstimate {
    let c: Vec<f64> =
        batch.gamma_r.iter().zip(&batch.gamma_e).map(|(&r, &e)| secrecy_capacity(r, e, base)).collect();
    batch_mean(&c, batch.seed)
}

/// Fraction of trials with C_s ≤ R_s. The standard error uses the
/// Agresti–Coull adjusted proportion, which stays positive when no trial
/// (or every trial) is an outage.
pub fn estimate_sop(batch: &SampleBatch, r_s: f64, base: LogBase) -> McEstimate {
    let n = batch.n_trials;
    let hits = batch.gamma_r.iter().zip(&batch.gamma_e).filter(|(&r, &e)| secrecy_capacity(r, e, base) <= r_s).count();
    let nt = n as f64 + 4.0;
    let p_adj = (hits as f64 + 2.0) / nt;
    McEstimate {
        mean: hits as f64 / n as f64,
        standard_error: (p_adj * (1.0 - p_adj) / nt).sqrt(),
        n_trials: n,
        seed: batch.seed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Reader,
    Eve,
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::config("empirical CDF needs at least one sample"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::domain("NaN sample"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    /// Smallest sample whose empirical CDF reaches p, for p in (0, 1].
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.len();
        let k = ((p * n as f64).ceil() as usize).clamp(1, n);
        self.sorted[k - 1]
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.len() - 1]
    }

    /// sup |F_n - F|.
    pub fn ks_distance(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = f(x);
                (c - i as f64 / n).abs().max((c - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Cramér–von Mises statistic n ∫ (F_n - F)² dF.
    pub fn cvm_statistic(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.len() as f64;
        let sum: f64 = self
            .sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let d = f(x) - (2.0 * i as f64 + 1.0) / (2.0 * n);
                d * d
            })
            .sum();
        1.0 / (12.0 * n) + sum
    }
}

pub fn empirical_cdf(batch: &SampleBatch, which: Which) -> Result<EmpiricalCdf> {
    EmpiricalCdf::new(match which {
        Which::Reader => &batch.gamma_r,
        Which::Eve => &batch.gamma_e,
    })
}

/// 5% critical value of the Kolmogorov–Smirnov distance for n samples.
pub fn ks_critical_5pct(n: usize) -> f64 {
    1.358 / (n as f64).sqrt()
}

/// Analytic CDF tabulated on a log grid and interpolated with cubic
/// Hermite splines in ln γ, whose slopes γ f(γ) come from the density.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    u: Vec<f64>,
    f: Vec<f64>,
    slope: Vec<f64>,
}

impl TabulatedCdf {
    pub fn build(h: &SnrDistributionHandle, lo: f64, hi: f64, points: usize, exec: Execution) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) || points < 2 {
            return Err(Error::config("tabulation needs 0 < lo < hi and at least two points"));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let u: Vec<f64> = (0..points).map(|i| a + (b - a) * i as f64 / (points - 1) as f64).collect();
        let vals = map_items(&u, exec, |&u| {
            let x = u.exp();
            Ok((h.cdf(x)?, h.pdf(x)? * x))
        });
        let vals: Vec<(f64, f64)> = vals.into_iter().collect::<Result<_>>()?;
        let (f, slope) = vals.into_iter().unzip();
        Ok(Self { u, f, slope })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.u.len();
        if !(x > 0.0) {
            return 0.0;
        }
        let u = x.ln();
        if u <= self.u[0] {
            return self.f[0];
        }
        if u >= self.u[n - 1] {
            return self.f[n - 1];
        }
        let i = (self.u.partition_point(|&v| v <= u) - 1).min(n - 2);
        let h = self.u[i + 1] - self.u[i];
        let t = (u - self.u[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * self.f[i]
            + (t3 - 2.0 * t2 + t) * h * self.slope[i]
            + (-2.0 * t3 + 3.0 * t2) * self.f[i + 1]
            + (t3 - t2) * h * self.slope[i + 1];
        v.clamp(0.0, 1.0)
    }

    /// Derivative of the interpolant in ln γ, i.e. γ f(γ); zero off the grid.
    pub fn log_density(&self, u: f64) -> f64 {
        let n = self.u.len();
        if !(u > self.u[0] && u < self.u[n - 1]) {
            return 0.0;
        }
        let i = (self.u.partition_point(|&v| v <= u) - 1).min(n - 2);
        let h = self.u[i + 1] - self.u[i];
        let t = (u - self.u[i]) / h;
        let t2 = t * t;
        let v = (6.0 * t2 - 6.0 * t) / h * (self.f[i] - self.f[i + 1])
            + (3.0 * t2 - 4.0 * t + 1.0) * self.slope[i]
            + (3.0 * t2 - 2.0 * t) * self.slope[i + 1];
        v.max(0.0)
    }

    /// [`TabulatedCdf::log_density`] smoothed by the Gaussian kernel of
    /// [`kde_log`].
    pub fn smoothed_log_density(&self, u: f64, bw: f64) -> Result<f64> {
        let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-8, max_intervals: 400 };
        let v = integrate(|z| self.log_density(u - bw * z) * (-0.5 * z * z).exp(), -8.0, 8.0, opts)?;
        Ok(v.value / (2.0 * PI).sqrt())
    }
}

/// Gaussian-kernel density estimate of ln γ at `u` with bandwidth `h`,
/// and its standard error.
pub fn kde_log(samples: &[f64], u: f64, h: f64) -> McEstimate {
    let norm = 1.0 / (h * (2.0 * PI).sqrt());
    let k: Vec<f64> = samples
        .iter()
        .map(|&x| {
            let z = (u - x.ln()) / h;
            norm * (-0.5 * z * z).exp()
        })
        .collect();
    let n = k.len() as f64;
    let mean = k.iter().sum::<f64>() / n;
    let var = k.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    McEstimate { mean, standard_error: (var / n).sqrt(), n_trials: k.len(), seed: 0 }
}

/// Silverman's bandwidth for the log samples.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let m = samples.iter().map(|x| x.ln()).sum::<f64>() / n;
    let sd = (samples.iter().map(|x| (x.ln() - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
    1.06 * sd * n.powf(-0.2)
}

/// The analytic log-density γ f(γ) smoothed by the same Gaussian kernel
/// as [`kde_log`], so both sides carry the same smoothing bias.
pub fn smoothed_log_density(h: &SnrDistributionHandle, u: f64, bw: f64) -> Result<f64> {
    let mut failure = None;
    let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-8, max_intervals: 200 };
    let v = integrate(
        |z| {
            let x = (u - bw * z).exp();
            match h.pdf(x) {
                Ok(p) => p * x * (-0.5 * z * z).exp(),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        -8.0,
        8.0,
        opts,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(v.value / (2.0 * PI).sqrt())
}

/// Writes `trial,gamma_R,gamma_E` rows.
pub fn write_samples_csv<W: Write>(batch: &SampleBatch, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["trial", "gamma_R", "gamma_E"]).map_err(io)?;
    for (i, (r, e)) in batch.gamma_r.iter().zip(&batch.gamma_e).enumerate() {
        w.write_record([i.to_string(), format!("{r:e}"), format!("{e:e}")]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
