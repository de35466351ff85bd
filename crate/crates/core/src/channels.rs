//! Fisher-Snedecor F fading, the RIS cascade laws and their samplers.
//!
//! Every positive random variable used by the closed forms is described by
//! its Mellin moments E[V^t] = e^{c + t·ln k} Π Γ(a_j + b_j t); densities,
//! distribution functions and secrecy integrals are all assembled from
//! these blocks.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{digamma, ln_beta, ln_gamma, meijer_g, ContourSpec, GammaTerm, MeijerGSpec, MellinIntegrand};

/// One link's F fading triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingParams {
    /// Multipath severity.
    pub m: f64,
    /// Shadowing parameter.
    pub m_s: f64,
    /// Mean power Ω.
    pub omega: f64,
}

impl FadingParams {
    pub fn new(m: f64, m_s: f64, omega: f64) -> Result<Self> {
        let fp = Self { m, m_s, omega };
        fp.validate()?;
        Ok(fp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::config(format!("fading m must be positive, got {}", self.m)));
        }
        if !(self.m_s > 1.0 && self.m_s.is_finite()) {
            return Err(Error::config(format!("fading m_s must exceed 1, got {}", self.m_s)));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::config(format!("fading omega must be positive, got {}", self.omega)));
        }
        Ok(())
    }

    /// Scale k of the power: X = k·G_m / G_{m_s} with unit-scale gamma variates.
    pub fn scale(&self) -> f64 {
        self.omega * (self.m_s - 1.0) / self.m
    }

    /// λ = m / ((m_s - 1) Ω), the reciprocal scale.
    pub fn lambda(&self) -> f64 {
        1.0 / self.scale()
    }

    /// Mellin moments of the power.
    pub fn law(&self) -> MellinLaw {
        MellinLaw::fisher(self)
    }

    /// Mellin moments of the envelope-product factor normalized by Ω.
    pub fn unit_law(&self) -> MellinLaw {
        MellinLaw::fisher(&Self { omega: 1.0, ..*self })
    }
}

/// Density of the F-distributed squared envelope.
pub fn fisher_f_power_pdf(x: f64, fp: &FadingParams) -> Result<f64> {
    fp.validate()?;
    if x < 0.0 {
        return Ok(0.0);
    }
    if x == 0.0 {
        return Ok(match fp.m.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Greater) => 0.0,
            Some(std::cmp::Ordering::Equal) => fp.lambda() * fp.m_s,
            _ => f64::INFINITY,
        });
    }
    let k = fp.scale();
    let ln = fp.m_s * k.ln() + (fp.m - 1.0) * x.ln() - ln_beta(fp.m, fp.m_s) - (fp.m + fp.m_s) * (k + x).ln();
    Ok(ln.exp())
}

/// Distribution function of the F power, as a Meijer G-function:
/// F(x) = G^{1,2}_{2,2}(x/k | 1 - m_s, 1; m, 0) / (Γ(m) Γ(m_s)).
pub fn fisher_f_power_cdf(x: f64, fp: &FadingParams, contour: &ContourSpec) -> Result<f64> {
    fp.validate()?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let spec = MeijerGSpec::new(1, 2, vec![1.0 - fp.m_s, 1.0], vec![fp.m, 0.0])?;
    let g = meijer_g(&spec, x / fp.scale(), contour)?;
    Ok(g.scale(-ln_gamma(fp.m) - ln_gamma(fp.m_s), 1.0).value.clamp(0.0, 1.0))
}

/// One draw of the F power.
pub fn sample_fisher_f_power<R: Rng + ?Sized>(fp: &FadingParams, rng: &mut R) -> Result<f64> {
    Ok(FisherSampler::new(fp)?.sample(rng))
}

/// Reusable F-power sampler (gamma-ratio construction).
#[derive(Debug, Clone, Copy)]
pub struct FisherSampler {
    scale: f64,
    num: Gamma<f64>,
    den: Gamma<f64>,
}

impl FisherSampler {
    pub fn new(fp: &FadingParams) -> Result<Self> {
        fp.validate()?;
        let g = |shape: f64| Gamma::new(shape, 1.0).map_err(|e| Error::config(format!("gamma sampler: {e}")));
        Ok(Self { scale: fp.scale(), num: g(fp.m)?, den: g(fp.m_s)? })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.scale * self.num.sample(rng) / self.den.sample(rng)
    }
}

/// Beta-product constants of the moment-matched RIS sum Σ|h_1n||h_2n|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisMomentConstants {
    pub a_prime: f64,
    pub b_prime: f64,
    pub c_prime: f64,
    pub d_prime: f64,
    /// Gamma shape minus one.
    pub c: f64,
    /// Gamma scale of the unit-power sum.
    pub d: f64,
}

pub fn ris_moment_constants(n: usize, hop1: &FadingParams, hop2: &FadingParams) -> Result<RisMomentConstants> {
    if n == 0 {
        return Err(Error::config("RIS element count must be at least 1"));
    }
    hop1.validate()?;
    hop2.validate()?;
    let pair = |f: &dyn Fn(&FadingParams) -> f64| f(hop1) * f(hop2);
    let a_prime = pair(&|h| ln_beta(h.m + 1.0, h.m_s - 1.0).exp());
    let b_prime = pair(&|h| ln_beta(h.m + 0.5, h.m_s - 0.5).exp());
    let c_prime = pair(&|h| ln_beta(h.m, h.m_s).exp());
    let d_prime = pair(&|h| (h.m_s - 1.0) * h.omega / h.m).sqrt();
    let gap = a_prime * c_prime - b_prime * b_prime;
    if !(gap.abs() > 1e-14 * a_prime * c_prime) {
        return Err(Error::domain("degenerate moment match: A'C' = B'^2"));
    }
    let nf = n as f64;
    let c = ((nf + 1.0) * b_prime * b_prime - a_prime * c_prime) / gap;
    let d = d_prime * gap / (b_prime * c_prime);
    Ok(RisMomentConstants { a_prime, b_prime, c_prime, d_prime, c, d })
}

impl RisMomentConstants {
    fn theta(&self, ybar: f64) -> f64 {
        self.d * ybar.sqrt()
    }
}

/// Moment-matched density of Y = ȳ·(Σ|h_1n||h_2n|)²: √Y is gamma with
/// shape c + 1 and scale d√ȳ.
pub fn ris_sum_power_pdf(y: f64, consts: &RisMomentConstants, ybar: f64) -> Result<f64> {
    if !(ybar > 0.0) {
        return Err(Error::config("ris_sum_power_pdf needs a positive ybar"));
    }
    if y <= 0.0 {
        return Ok(if consts.c > 1.0 || y < 0.0 { 0.0 } else { f64::INFINITY });
    }
    let theta = consts.theta(ybar);
    let shape = consts.c + 1.0;
    let ln = (consts.c - 1.0) * 0.5 * y.ln() - y.sqrt() / theta - (2.0_f64).ln() - ln_gamma(shape) - shape * theta.ln();
    Ok(ln.exp())
}

/// Distribution function matching [`ris_sum_power_pdf`]: P(c + 1, √y / θ),
/// via γ(a, z) = G^{1,1}_{1,2}(z | 1; a, 0).
pub fn ris_sum_power_cdf(y: f64, consts: &RisMomentConstants, ybar: f64, contour: &ContourSpec) -> Result<f64> {
    if y <= 0.0 {
        return Ok(0.0);
    }
    let shape = consts.c + 1.0;
    let spec = MeijerGSpec::new(1, 1, vec![1.0], vec![shape, 0.0])?;
    let g = meijer_g(&spec, y.sqrt() / consts.theta(ybar), contour)?;
    Ok(g.scale(-ln_gamma(shape), 1.0).value.clamp(0.0, 1.0))
}

/// (Σ_n |h_1n||h_2n|)² with every phase aligned.
pub fn sample_reader_cascade<R: Rng + ?Sized>(
    n: usize,
    hop1: &FadingParams,
    hop2: &FadingParams,
    rng: &mut R,
) -> Result<f64> {
    Ok(CascadeSampler::new(n, hop1, hop2)?.reader(rng))
}

/// |Σ_n |h_1n||h_2n| e^{jφ_n}|² with φ_n uniform on [-π, π).
pub fn sample_eve_cascade<R: Rng + ?Sized>(
    n: usize,
    hop1: &FadingParams,
    hop2: &FadingParams,
    rng: &mut R,
) -> Result<f64> {
    Ok(CascadeSampler::new(n, hop1, hop2)?.eve(rng))
}

/// Element-wise cascade sampler for an N-element surface.
#[derive(Debug, Clone, Copy)]
pub struct CascadeSampler {
    n: usize,
    hop1: FisherSampler,
    hop2: FisherSampler,
}

impl CascadeSampler {
    pub fn new(n: usize, hop1: &FadingParams, hop2: &FadingParams) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("RIS element count must be at least 1"));
        }
        Ok(Self { n, hop1: FisherSampler::new(hop1)?, hop2: FisherSampler::new(hop2)? })
    }

    pub fn reader<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s: f64 = (0..self.n).map(|_| (self.hop1.sample(rng) * self.hop2.sample(rng)).sqrt()).sum();
        s * s
    }

    pub fn eve<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for _ in 0..self.n {
            let amp = (self.hop1.sample(rng) * self.hop2.sample(rng)).sqrt();
            let phi: f64 = rng.random_range(-PI..PI);
            re += amp * phi.cos();
            im += amp * phi.sin();
        }
        re * re + im * im
    }

    /// Reader cascade and the amplitude sum, for coherent combination with
    /// a direct path.
    pub fn reader_amplitude<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        (0..self.n).map(|_| (self.hop1.sample(rng) * self.hop2.sample(rng)).sqrt()).sum()
    }

    /// Complex Eve cascade field.
    pub fn eve_field<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        for _ in 0..self.n {
            let amp = (self.hop1.sample(rng) * self.hop2.sample(rng)).sqrt();
            let phi: f64 = rng.random_range(-PI..PI);
            re += amp * phi.cos();
            im += amp * phi.sin();
        }
        (re, im)
    }
}

/// One gamma factor Γ(a + b·t) of a Mellin moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentGamma {
    pub a: f64,
    pub b: f64,
}

/// Law of a positive random variable through its Mellin moments
/// E[V^t] = exp(log_const + t·log_scale) Π Γ(a_j + b_j t).
#[derive(Debug, Clone, PartialEq)]
pub struct MellinLaw {
    pub log_const: f64,
    pub log_scale: f64,
    pub gammas: Vec<MomentGamma>,
}

impl MellinLaw {
    /// F power with mean Ω.
    pub fn fisher(fp: &FadingParams) -> Self {
        Self {
            log_const: -ln_gamma(fp.m) - ln_gamma(fp.m_s),
            log_scale: fp.scale().ln(),
            gammas: vec![MomentGamma { a: fp.m, b: 1.0 }, MomentGamma { a: fp.m_s, b: -1.0 }],
        }
    }

    /// Moment-matched RIS sum power ȳ·Z², written with unit weights via the
    /// duplication formula Γ(c+1+2t) = 2^{c+2t} Γ((c+1)/2+t) Γ(c/2+1+t) / √π.
    pub fn ris_sum(consts: &RisMomentConstants, ybar: f64) -> Self {
        let theta = consts.theta(ybar);
        let c = consts.c;
        Self {
            log_const: c * (2.0_f64).ln() - 0.5 * PI.ln() - ln_gamma(c + 1.0),
            log_scale: (4.0 * theta * theta).ln(),
            gammas: vec![MomentGamma { a: 0.5 * (c + 1.0), b: 1.0 }, MomentGamma { a: 0.5 * c + 1.0, b: 1.0 }],
        }
    }

    /// Exponential with the given mean.
    pub fn exponential(mean: f64) -> Self {
        Self { log_const: 0.0, log_scale: mean.ln(), gammas: vec![MomentGamma { a: 1.0, b: 1.0 }] }
    }

    /// Law of c·V.
    pub fn scaled(mut self, c: f64) -> Self {
        self.log_scale += c.ln();
        self
    }

    /// Law of the product of independent variables.
    pub fn product(mut self, other: &MellinLaw) -> Self {
        self.log_const += other.log_const;
        self.log_scale += other.log_scale;
        self.gammas.extend(other.gammas.iter().copied());
        self
    }

    /// Open interval of t where E[V^t] is finite.
    pub fn moment_bounds(&self) -> (f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for g in &self.gammas {
            if g.b > 0.0 {
                lo = lo.max(-g.a / g.b);
            } else if g.b < 0.0 {
                hi = hi.min(g.a / -g.b);
            }
        }
        (lo, hi)
    }

    /// ln E[V^t] for real t inside the moment bounds.
    pub fn ln_moment(&self, t: f64) -> f64 {
        self.log_const + t * self.log_scale + self.gammas.iter().map(|g| ln_gamma(g.a + g.b * t)).sum::<f64>()
    }

    /// E[ln V].
    pub fn mean_log(&self) -> f64 {
        self.log_scale + self.gammas.iter().map(|g| g.b * digamma(g.a)).sum::<f64>()
    }

    /// Appends E[V^{offset + weights·s}] to a Mellin–Barnes integrand.
    pub fn push_moment(&self, f: &mut MellinIntegrand, offset: f64, weights: &[f64]) {
        f.log_prefactor += self.log_const + offset * self.log_scale;
        for (lx, w) in f.log_x.iter_mut().zip(weights) {
            *lx += w * self.log_scale;
        }
        for g in &self.gammas {
            let w: Vec<f64> = weights.iter().map(|w| g.b * w).collect();
            f.push(GammaTerm::numerator(g.a + g.b * offset, w));
        }
    }

    /// Density through the inverse Mellin transform:
    /// f(x) = (1/x)(1/2πi) ∫ E[V^{-s}] x^s ds.
    pub fn pdf(&self, x: f64, contour: &ContourSpec) -> Result<f64> {
        if !(x > 0.0) {
            return Ok(0.0);
        }
        let mut f = MellinIntegrand::new(1);
        self.push_moment(&mut f, 0.0, &[-1.0]);
        f.log_x[0] += x.ln();
        f.log_prefactor -= x.ln();
        Ok(f.integrate(contour)?.value)
    }

    /// F(x) = (1/2πi) ∫ E[V^{-s}] Γ(s)/Γ(1+s) x^s ds, 0 < Re s.
    pub fn cdf(&self, x: f64, contour: &ContourSpec) -> Result<f64> {
        if !(x > 0.0) {
            return Ok(0.0);
        }
        let mut f = MellinIntegrand::new(1);
        self.push_moment(&mut f, 0.0, &[-1.0]);
        f.numerator(0.0, &[1.0]).denominator(1.0, &[1.0]);
        f.log_x[0] += x.ln();
        Ok(f.integrate(contour)?.value)
    }

    /// P(V > x) = (1/2πi) ∫ E[V^s] Γ(s)/Γ(1+s) x^{-s} ds, 0 < Re s.
    pub fn ccdf(&self, x: f64, contour: &ContourSpec) -> Result<f64> {
        if !(x > 0.0) {
            return Ok(1.0);
        }
        let mut f = MellinIntegrand::new(1);
        self.push_moment(&mut f, 0.0, &[1.0]);
        f.numerator(0.0, &[1.0]).denominator(1.0, &[1.0]);
        f.log_x[0] -= x.ln();
        Ok(f.integrate(contour)?.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_constants_reference() {
        let h = FadingParams::new(2.0, 3.0, 1.0).unwrap();
        let k = ris_moment_constants(8, &h, &h).unwrap();
        assert!((k.c - 11.486254223048467).abs() < 1e-10);
        assert!((k.d - 0.5001987724657684).abs() < 1e-12);
    }

    #[test]
    fn fisher_law_has_mean_omega() {
        let fp = FadingParams::new(2.0, 3.0, 1.7).unwrap();
        assert!((fp.law().ln_moment(1.0).exp() - 1.7).abs() < 1e-12);
        assert_eq!(fp.law().moment_bounds(), (-2.0, 3.0));
    }
}
