//! Multidimensional Mellin–Barnes quadrature.
//!
//! An integrand is a product of gamma factors Γ(c + w·s)^{±1} times
//! exp(Σ s_i ln x_i), integrated over vertical lines Re s = σ:
//!
//! ```text
//! I = (2πi)^{-r} ∫ F(s) ds = (2π)^{-r} ∫ F(σ + it) dt
//! ```
//!
//! The truncated lines are discretized by the trapezoid rule, which is
//! spectrally accurate for integrands analytic in a strip. Factors that share
//! no variables are never multiplied on the full tensor grid: the sum is
//! contracted one variable at a time, so a chain of pairwise couplings costs
//! O(r n²) gamma products instead of O(n^r).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::{lgamma_unchecked, ln_gamma};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// One gamma factor Γ(constant + weights·s), or its reciprocal.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTerm {
    pub constant: f64,
    pub weights: Vec<f64>,
    pub reciprocal: bool,
}

impl GammaTerm {
    pub fn numerator(constant: f64, weights: Vec<f64>) -> Self {
        Self { constant, weights, reciprocal: false }
    }

    pub fn denominator(constant: f64, weights: Vec<f64>) -> Self {
        Self { constant, weights, reciprocal: true }
    }

    fn real_arg(&self, sigma: &[f64]) -> f64 {
        self.constant + dot(&self.weights, sigma)
    }

    fn scope(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&i| self.weights[i] != 0.0).collect()
    }

    fn max_weight(&self) -> f64 {
        self.weights.iter().fold(0.0_f64, |m, w| m.max(w.abs()))
    }
}

/// Where the vertical lines are placed when no abscissa is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    /// Minimize the integrand on the real section inside the pole-free
    /// region. Keeps the line near the saddle so that small results are
    /// not computed as the difference of large oscillating contributions.
    #[default]
    Saddle,
    /// Point of maximal clearance from every pole family.
    Midpoint,
}

/// Contour and accuracy settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    /// Real part of each vertical line; chosen automatically when `None`.
    pub abscissa: Option<Vec<f64>>,
    /// Lower bound for the imaginary truncation; grows as needed.
    pub half_extent: f64,
    /// Maximum number of nodes on any axis.
    pub node_budget: usize,
    pub rel_tol: f64,
    /// Abort when a refinement level would need more elementary operations.
    pub cost_ceiling: f64,
    pub placement: Placement,
    pub execution: Execution,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            abscissa: None,
            half_extent: 4.0,
            node_budget: 4096,
            rel_tol: 1e-6,
            cost_ceiling: 1e9,
            placement: Placement::Saddle,
            execution: Execution::Parallel,
        }
    }
}

impl ContourSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abscissa(mut self, abscissa: Vec<f64>) -> Self {
        self.abscissa = Some(abscissa);
        self
    }

    pub fn with_placement(mut self, placement: Placement) -> Self {
        self.placement = placement;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_extent > 0.0) {
            return Err(Error::config("contour half_extent must be positive"));
        }
        if self.node_budget < 64 {
            return Err(Error::config("contour node_budget must be at least 64"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::config("contour rel_tol must be positive"));
        }
        if !(self.cost_ceiling > 0.0) {
            return Err(Error::config("contour cost_ceiling must be positive"));
        }
        Ok(())
    }
}

/// A quadrature result kept as mantissa × e^{log_scale} so that values far
/// below the double-precision range survive.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub error: f64,
    /// Imaginary part of the quadrature sum; zero up to rounding for real
    /// parameter sets.
    pub imag: f64,
    pub mantissa: f64,
    pub error_mantissa: f64,
    pub imag_mantissa: f64,
    pub log_scale: f64,
    /// Integral of |F| along the contour, on the same scale as the mantissa.
    pub abs_mantissa: f64,
    pub abscissa: Vec<f64>,
    pub half_extent: Vec<f64>,
    pub nodes: Vec<usize>,
    /// Elementary operations spent, including refinement levels.
    pub cost: f64,
}

impl Evaluation {
    /// A plain value with an absolute error and no contour diagnostics.
    pub fn from_value(value: f64, error: f64) -> Self {
        Self {
            value,
            error,
            imag: 0.0,
            mantissa: value,
            error_mantissa: error,
            imag_mantissa: 0.0,
            log_scale: 0.0,
            abs_mantissa: value.abs(),
            abscissa: vec![],
            half_extent: vec![],
            nodes: vec![],
            cost: 0.0,
        }
    }

    /// ln |value|, finite even when `value` underflows.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.abs().ln() + self.log_scale
    }

    /// Error estimate relative to |value|.
    pub fn rel_error(&self) -> f64 {
        if self.mantissa == 0.0 {
            f64::INFINITY
        } else {
            self.error_mantissa / self.mantissa.abs()
        }
    }

    /// Multiplies the result by sign·e^{log_factor}.
    pub fn scale(mut self, log_factor: f64, sign: f64) -> Self {
        self.log_scale += log_factor;
        self.mantissa *= sign;
        self.imag_mantissa *= sign;
        self.set_linear();
        self
    }

    /// Adds sign·e^{log_term}, known to relative accuracy `rel_err`.
    pub fn add_term(&mut self, log_term: f64, sign: f64, rel_err: f64) {
        let new_scale = if self.mantissa == 0.0 { log_term } else { self.log_scale.max(log_term) };
        let rescale = (self.log_scale - new_scale).exp();
        let term = (log_term - new_scale).exp();
        self.mantissa = self.mantissa * rescale + sign * term;
        self.abs_mantissa = self.abs_mantissa * rescale + term;
        self.log_scale = new_scale;
        self.error_mantissa = self.error_mantissa * rescale + term * rel_err;
        self.imag_mantissa *= rescale;
        self.set_linear();
    }

    fn set_linear(&mut self) {
        let s = self.log_scale.exp();
        self.value = self.mantissa * s;
        self.error = self.error_mantissa * s;
        self.imag = self.imag_mantissa * s;
    }
}

/// Gamma-product integrand over r ≤ 4 variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MellinIntegrand {
    pub dim: usize,
    pub terms: Vec<GammaTerm>,
    /// ln x_i; the integrand carries x_i^{s_i}.
    pub log_x: Vec<f64>,
    /// Constant log factor multiplying the integrand.
    pub log_prefactor: f64,
}

impl MellinIntegrand {
    pub fn new(dim: usize) -> Self {
        Self { dim, terms: Vec::new(), log_x: vec![0.0; dim], log_prefactor: 0.0 }
    }

    pub fn push(&mut self, term: GammaTerm) -> &mut Self {
        self.terms.push(term);
        self
    }

    pub fn numerator(&mut self, constant: f64, weights: &[f64]) -> &mut Self {
        self.push(GammaTerm::numerator(constant, weights.to_vec()))
    }

    pub fn denominator(&mut self, constant: f64, weights: &[f64]) -> &mut Self {
        self.push(GammaTerm::denominator(constant, weights.to_vec()))
    }

    fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.dim) {
            return Err(Error::config(format!("integrand dimension {} outside 1..=4", self.dim)));
        }
        if self.log_x.len() != self.dim {
            return Err(Error::config("log_x length differs from dimension"));
        }
        for t in &self.terms {
            if t.weights.len() != self.dim {
                return Err(Error::config("gamma weight vector length differs from dimension"));
            }
            if !t.constant.is_finite() || t.weights.iter().any(|w| !w.is_finite()) {
                return Err(Error::config("non-finite gamma parameter"));
            }
            if !t.reciprocal && t.max_weight() == 0.0 && t.constant <= 0.0 && t.constant == t.constant.floor() {
                return Err(Error::domain(format!("constant gamma factor at pole {}", t.constant)));
            }
        }
        if !self.log_x.iter().all(|v| v.is_finite()) || !self.log_prefactor.is_finite() {
            return Err(Error::config("non-finite integrand argument"));
        }
        Ok(())
    }

    /// log F(s) at a complex point.
    pub fn log_value(&self, s: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(self.log_prefactor, 0.0);
        for (si, lx) in s.iter().zip(&self.log_x) {
            acc += si * lx;
        }
        for t in &self.terms {
            let mut z = Complex64::new(t.constant, 0.0);
            for (w, si) in t.weights.iter().zip(s) {
                if *w != 0.0 {
                    z += si * w;
                }
            }
            let lg = lgamma_unchecked(z);
            if t.reciprocal {
                acc -= lg;
            } else {
                acc += lg;
            }
        }
        acc
    }

    fn log_abs_at(&self, sigma: &[f64], t: &[f64]) -> f64 {
        let s: Vec<Complex64> = sigma.iter().zip(t).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let v = self.log_value(&s).re;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }

    /// Smallest normalized distance from σ to any numerator pole family.
    pub fn margin(&self, sigma: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|t| !t.reciprocal && t.max_weight() > 0.0)
            .map(|t| t.real_arg(sigma) / t.max_weight())
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance, in the imaginary direction of variable i, to the nearest singularity.
    fn axis_gap(&self, sigma: &[f64], i: usize) -> f64 {
        self.terms
            .iter()
            .filter(|t| !t.reciprocal && t.weights[i] != 0.0)
            .map(|t| t.real_arg(sigma) / t.weights[i].abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Real-section objective for saddle placement. Reciprocal factors are
    /// evaluated one unit off the real axis so that their zeros do not act
    /// as attractors.
    fn section_objective(&self, sigma: &[f64]) -> f64 {
        let mut acc = self.log_prefactor + dot(sigma, &self.log_x);
        for t in &self.terms {
            let z = t.real_arg(sigma);
            if t.reciprocal {
                acc -= lgamma_unchecked(Complex64::new(z, 1.0)).re;
            } else {
                acc += ln_gamma(z);
            }
        }
        acc
    }

    fn maximin(&self) -> (Vec<f64>, f64) {
        let r = self.dim;
        let bound = 8.0 + self.terms.iter().fold(0.0_f64, |m, t| m.max(t.constant.abs()));
        let mut rows: Vec<(Vec<f64>, f64)> = self
            .terms
            .iter()
            .filter(|t| !t.reciprocal && t.max_weight() > 0.0)
            .map(|t| {
                let w = t.max_weight();
                (t.weights.iter().map(|x| x / w).collect(), t.constant / w)
            })
            .collect();
        for i in 0..r {
            let mut e = vec![0.0; r];
            e[i] = 1.0;
            rows.push((e.clone(), bound));
            e[i] = -1.0;
            rows.push((e, bound));
        }
        let eval = |s: &[f64]| -> Vec<f64> { rows.iter().map(|(a, b)| b + dot(a, s)).collect() };
        let softmin = |g: &[f64], tau: f64| -> (f64, Vec<f64>) {
            let gmin = g.iter().cloned().fold(f64::INFINITY, f64::min);
            let ws: Vec<f64> = g.iter().map(|v| (-(v - gmin) / tau).exp()).collect();
            let total: f64 = ws.iter().sum();
            (gmin - tau * total.ln(), ws.into_iter().map(|w| w / total).collect())
        };
        let mut sigma = vec![0.0; r];
        for tau in [1.0, 0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3, 3e-4] {
            for _ in 0..400 {
                let g = eval(&sigma);
                let (val, p) = softmin(&g, tau);
                let mut grad = vec![0.0; r];
                for (pj, (a, _)) in p.iter().zip(&rows) {
                    for i in 0..r {
                        grad[i] += pj * a[i];
                    }
                }
                let mut step = 1.0;
                let mut moved = false;
                while step > 1e-12 {
                    let trial: Vec<f64> = sigma.iter().zip(&grad).map(|(s, g)| s + step * g).collect();
                    if softmin(&eval(&trial), tau).0 > val + 1e-15 {
                        sigma = trial;
                        moved = true;
                        break;
                    }
                    step *= 0.5;
                }
                if !moved {
                    break;
                }
            }
        }
        let m = self.margin(&sigma);
        (sigma, m)
    }

    fn saddle(&self, start: Vec<f64>, min_margin: f64) -> Vec<f64> {
        let r = self.dim;
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for i in 0..r {
            for si in [-1.0, 1.0] {
                let mut e = vec![0.0; r];
                e[i] = si;
                dirs.push(e.clone());
                for j in (i + 1)..r {
                    for sj in [-1.0, 1.0] {
                        let mut f = e.clone();
                        f[j] = sj;
                        dirs.push(f);
                    }
                }
            }
        }
        let feasible = |s: &[f64]| self.margin(s) >= min_margin && s.iter().all(|v| v.abs() <= 1e5);
        let mut sigma = start;
        let mut best = self.section_objective(&sigma);
        let mut step = 0.5;
        for _ in 0..2000 {
            let mut improved = false;
            for d in &dirs {
                let trial: Vec<f64> = sigma.iter().zip(d).map(|(s, di)| s + step * di).collect();
                if !feasible(&trial) {
                    continue;
                }
                let v = self.section_objective(&trial);
                if v < best - 1e-12 {
                    best = v;
                    sigma = trial;
                    improved = true;
                    break;
                }
            }
            if improved {
                step = (step * 2.0).min(512.0);
            } else {
                step *= 0.5;
                if step < 1e-3 {
                    break;
                }
            }
        }
        sigma
    }

    /// Chooses the vertical lines, or checks the given ones.
    pub fn abscissa(&self, contour: &ContourSpec) -> Result<Vec<f64>> {
        if let Some(a) = &contour.abscissa {
            if a.len() != self.dim {
                return Err(Error::config("abscissa length differs from dimension"));
            }
            if !(self.margin(a) > 0.0) {
                return Err(Error::config(format!(
                    "abscissa {a:?} does not separate the pole families"
                )));
            }
            return Ok(a.clone());
        }
        let (mid, best) = self.maximin();
        if !(best > 1e-9) {
            return Err(Error::config("no contour separates the pole families"));
        }
        Ok(match contour.placement {
            Placement::Midpoint => mid,
            Placement::Saddle => self.saddle(mid, (0.5 * best).min(0.5)),
        })
    }

    /// Imaginary half-extent per axis beyond which |F| stays below
    /// rel_tol × 1e-4 of its peak.
    fn half_extents(&self, sigma: &[f64], contour: &ContourSpec) -> Result<(Vec<f64>, f64)> {
        let r = self.dim;
        let ln_eps = (contour.rel_tol * 1e-4).ln();
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for code in 1..3usize.pow(r as u32) {
            let mut u = vec![0.0; r];
            let mut c = code;
            for ui in u.iter_mut() {
                *ui = (c % 3) as f64 - 1.0;
                c /= 3;
            }
            // |F(σ - it)| = |F(σ + it)| for real parameters.
            if u.iter().find(|v| **v != 0.0).copied() == Some(1.0) {
                dirs.push(u);
            }
        }
        let at = |u: &[f64], rho: f64| {
            let t: Vec<f64> = u.iter().map(|v| v * rho).collect();
            self.log_abs_at(sigma, &t)
        };
        let mut peak = self.log_abs_at(sigma, &vec![0.0; r]);
        let mut profiles = Vec::with_capacity(dirs.len());
        for u in &dirs {
            let mut prof = Vec::new();
            let mut dir_peak = f64::NEG_INFINITY;
            let mut rho = 0.25;
            loop {
                let l = at(u, rho);
                dir_peak = dir_peak.max(l);
                peak = peak.max(l);
                prof.push((rho, l));
                if rho >= 2.0 && l < dir_peak.max(peak) + ln_eps - 10.0 {
                    break;
                }
                if rho > 1e6 {
                    return Err(Error::config(format!(
                        "integrand does not decay along direction {u:?}"
                    )));
                }
                rho *= 2.0;
            }
            profiles.push(prof);
        }
        if !peak.is_finite() {
            return Err(Error::domain("integrand vanishes or overflows on the contour"));
        }
        let threshold = peak + ln_eps;
        let mut ext = vec![contour.half_extent; r];
        for (u, prof) in dirs.iter().zip(&profiles) {
            let last_above = prof.iter().rposition(|&(_, l)| l >= threshold);
            let radius = match last_above {
                None => prof[0].0,
                Some(k) => {
                    let (mut lo, mut hi) = (prof[k].0, prof[k + 1].0);
                    for _ in 0..10 {
                        let mid = 0.5 * (lo + hi);
                        if at(u, mid) >= threshold {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    hi
                }
            };
            for i in 0..r {
                if u[i] != 0.0 {
                    ext[i] = ext[i].max(radius);
                }
            }
        }
        Ok((ext, threshold))
    }

    /// Largest phase rate |d arg F / dt_i| along each axis where |F| is
    /// above the truncation threshold; bounds the first trapezoid step so
    /// that oscillations are never aliased.
    fn phase_rates(&self, sigma: &[f64], ext: &[f64], threshold: f64) -> Vec<f64> {
        let r = self.dim;
        (0..r)
            .map(|i| {
                let steps = 400;
                let dt = ext[i] / steps as f64;
                let at = |t: f64| {
                    let s: Vec<Complex64> = (0..r)
                        .map(|j| Complex64::new(sigma[j], if j == i { t } else { 0.0 }))
                        .collect();
                    self.log_value(&s)
                };
                let mut prev = at(0.0);
                let mut rate = 0.0_f64;
                for k in 1..=steps {
                    let cur = at(k as f64 * dt);
                    if cur.re.max(prev.re) >= threshold && cur.im.is_finite() && prev.im.is_finite() {
                        rate = rate.max((cur.im - prev.im).abs() / dt);
                    }
                    prev = cur;
                }
                rate
            })
            .collect()
    }

    /// Evaluates the integral to the requested tolerance.
    pub fn integrate(&self, contour: &ContourSpec) -> Result<Evaluation> {
        self.validate()?;
        contour.validate()?;
        let sigma = self.abscissa(contour)?;
        let (ext, threshold) = self.half_extents(&sigma, contour)?;
        let r = self.dim;
        let rates = self.phase_rates(&sigma, &ext, threshold);
        let mut h: Vec<f64> = (0..r)
            .map(|i| self.axis_gap(&sigma, i).min(1.0).min(0.5 * std::f64::consts::PI / rates[i].max(1e-300)))
            .collect();
        let order = self.elimination_order(&sigma);
        let mut prev: Option<(Complex64, f64)> = None;
        let mut total_cost = 0.0;
        let mut last_err = f64::INFINITY;
        loop {
            let nodes: Vec<usize> = (0..r).map(|i| 2 * (ext[i] / h[i]).ceil() as usize + 1).collect();
            if let Some(i) = (0..r).find(|&i| nodes[i] > contour.node_budget) {
                return Err(Error::Convergence {
                    what: format!("node budget {} exceeded on axis {i}", contour.node_budget),
                    achieved: last_err,
                    requested: contour.rel_tol,
                });
            }
            let cost = self.level_cost(&nodes, &order);
            if total_cost + cost > contour.cost_ceiling {
                return Err(Error::Convergence {
                    what: format!("cost ceiling {:.1e} reached", contour.cost_ceiling),
                    achieved: last_err,
                    requested: contour.rel_tol,
                });
            }
            total_cost += cost;
            let (m, abs_m, scale) = self.trapezoid(&sigma, &h, &nodes, &order, contour.execution);
            if let Some((pm, ps)) = prev {
                let pm = pm * (ps - scale).exp();
                let diff = (m - pm).norm();
                let size = m.re.abs().max(f64::MIN_POSITIVE);
                // Halving h squares the relative discretization error, so the
                // finer level is good to about diff²/|I| once diff is small.
                let floor = 1e3 * f64::EPSILON * abs_m;
                let est = if diff < 0.1 * size { (diff * diff / size).max(floor) } else { diff };
                last_err = est / size;
                if est <= contour.rel_tol * m.re.abs() || est <= floor || (m.re == 0.0 && abs_m == 0.0) {
                    let s = scale.exp();
                    return Ok(Evaluation {
                        value: m.re * s,
                        error: est * s,
                        imag: m.im * s,
                        mantissa: m.re,
                        error_mantissa: est,
                        imag_mantissa: m.im,
                        log_scale: scale,
                        abs_mantissa: abs_m,
                        abscissa: sigma,
                        half_extent: ext,
                        nodes,
                        cost: total_cost,
                    });
                }
            }
            prev = Some((m, scale));
            for hi in h.iter_mut() {
                *hi *= 0.5;
            }
        }
    }

    fn groups(&self) -> BTreeMap<Vec<usize>, Vec<&GammaTerm>> {
        let mut g: BTreeMap<Vec<usize>, Vec<&GammaTerm>> = BTreeMap::new();
        for i in 0..self.dim {
            g.entry(vec![i]).or_default();
        }
        for t in &self.terms {
            g.entry(t.scope()).or_default().push(t);
        }
        g
    }

    /// Greedy min-size elimination order; ties go to the larger pole gap.
    fn elimination_order(&self, sigma: &[f64]) -> Vec<usize> {
        let mut scopes: Vec<Vec<usize>> = self.groups().into_keys().collect();
        let gaps: Vec<f64> = (0..self.dim).map(|i| self.axis_gap(sigma, i)).collect();
        let mut left: Vec<usize> = (0..self.dim).collect();
        let mut order = Vec::new();
        while !left.is_empty() {
            let mut best: Option<(usize, usize)> = None;
            for (k, &v) in left.iter().enumerate() {
                let size = union_of(&scopes, v).len();
                let better = match best {
                    None => true,
                    Some((bk, bsize)) => size < bsize || (size == bsize && gaps[v] > gaps[left[bk]]),
                };
                if better {
                    best = Some((k, size));
                }
            }
            let v = left.remove(best.unwrap().0);
            let u: Vec<usize> = union_of(&scopes, v).into_iter().filter(|&x| x != v).collect();
            scopes.retain(|s| !s.contains(&v));
            scopes.push(u);
            order.push(v);
        }
        order
    }

    fn level_cost(&self, nodes: &[usize], order: &[usize]) -> f64 {
        let groups = self.groups();
        let mut cost = 0.0;
        for (scope, terms) in &groups {
            let size: f64 = scope.iter().map(|&i| nodes[i] as f64).product();
            cost += size * (terms.len() as f64 + 1.0);
        }
        let mut scopes: Vec<Vec<usize>> = groups.into_keys().collect();
        for &v in order {
            let u = union_of(&scopes, v);
            let k = scopes.iter().filter(|s| s.contains(&v)).count() as f64;
            cost += u.iter().map(|&i| nodes[i] as f64).product::<f64>() * k;
            scopes.retain(|s| !s.contains(&v));
            scopes.push(u.into_iter().filter(|&x| x != v).collect());
        }
        cost
    }

    /// One trapezoid level. Returns the complex sum and the sum of moduli,
    /// both as mantissas of the common scale e^{scale}.
    fn trapezoid(
        &self,
        sigma: &[f64],
        h: &[f64],
        nodes: &[usize],
        order: &[usize],
        exec: Execution,
    ) -> (Complex64, f64, f64) {
        let grids: Vec<Vec<f64>> = (0..self.dim)
            .map(|i| {
                let half = (nodes[i] - 1) / 2;
                (0..nodes[i]).map(|k| (k as f64 - half as f64) * h[i]).collect()
            })
            .collect();
        let mut tables: Vec<Table> = Vec::new();
        let mut log_const = self.log_prefactor;
        for (scope, terms) in self.groups() {
            if scope.is_empty() {
                for t in terms {
                    let lg = ln_gamma(t.constant);
                    log_const += if t.reciprocal { -lg } else { lg };
                }
                continue;
            }
            tables.push(self.build_table(&scope, &terms, sigma, &grids, h, exec));
        }
        for &v in order {
            let (with_v, rest): (Vec<Table>, Vec<Table>) =
                tables.into_iter().partition(|t| t.scope.contains(&v));
            tables = rest;
            tables.push(eliminate(with_v, v, nodes, exec));
        }
        let mut m = Complex64::new(1.0, 0.0);
        let mut a = 1.0;
        let mut scale = log_const - self.dim as f64 * (2.0 * PI).ln();
        for t in &tables {
            m *= t.val[0];
            a *= t.mag[0];
            scale += t.shift;
        }
        // Sign of constant reciprocal/numerator gammas at negative arguments.
        for t in self.terms.iter().filter(|t| t.max_weight() == 0.0) {
            if t.constant < 0.0 && (t.constant.floor() as i64) % 2 != 0 {
                m = -m;
            }
        }
        (m, a, scale)
    }

    fn build_table(
        &self,
        scope: &[usize],
        terms: &[&GammaTerm],
        sigma: &[f64],
        grids: &[Vec<f64>],
        h: &[f64],
        exec: Execution,
    ) -> Table {
        let dims: Vec<usize> = scope.iter().map(|&i| grids[i].len()).collect();
        let len: usize = dims.iter().product();
        let axis_extra: Option<(usize, f64, f64)> = if scope.len() == 1 {
            let i = scope[0];
            Some((i, self.log_x[i], h[i].ln()))
        } else {
            None
        };
        let logs: Vec<Complex64> = par::map_range(len, exec, |flat| {
            let mut rem = flat;
            let mut s = [Complex64::new(0.0, 0.0); 4];
            for (k, &var) in scope.iter().enumerate().rev() {
                let idx = rem % dims[k];
                rem /= dims[k];
                s[var] = Complex64::new(sigma[var], grids[var][idx]);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            if let Some((i, lx, lh)) = axis_extra {
                acc += s[i] * lx + lh;
            }
            for t in terms {
                let mut z = Complex64::new(t.constant, 0.0);
                for &var in scope {
                    z += s[var] * t.weights[var];
                }
                let lg = lgamma_unchecked(z);
                if t.reciprocal {
                    acc -= lg;
                } else {
                    acc += lg;
                }
            }
            acc
        });
        let shift = logs
            .iter()
            .filter(|l| l.re.is_finite())
            .fold(f64::NEG_INFINITY, |m, l| m.max(l.re));
        let shift = if shift.is_finite() { shift } else { 0.0 };
        let val: Vec<Complex64> = logs
            .iter()
            .map(|l| {
                if l.re.is_finite() && l.im.is_finite() {
                    (l - shift).exp()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let mag = val.iter().map(|v| v.norm()).collect();
        Table::new(scope.to_vec(), dims, val, mag, shift)
    }
}

struct Table {
    scope: Vec<usize>,
    strides: Vec<usize>,
    val: Vec<Complex64>,
    mag: Vec<f64>,
    shift: f64,
}

impl Table {
    fn new(scope: Vec<usize>, dims: Vec<usize>, val: Vec<Complex64>, mag: Vec<f64>, shift: f64) -> Self {
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        Self { scope, strides, val, mag, shift }
    }

    fn stride_of(&self, var: usize) -> usize {
        self.scope.iter().position(|&v| v == var).map_or(0, |k| self.strides[k])
    }
}

/// Sums the product of `tables` over variable `v`.
fn eliminate(tables: Vec<Table>, v: usize, nodes: &[usize], exec: Execution) -> Table {
    let mut union: Vec<usize> = tables.iter().flat_map(|t| t.scope.iter().copied()).collect();
    union.sort_unstable();
    union.dedup();
    let out_scope: Vec<usize> = union.iter().copied().filter(|&x| x != v).collect();
    let out_dims: Vec<usize> = out_scope.iter().map(|&i| nodes[i]).collect();
    let out_len: usize = out_dims.iter().product();
    let n_v = nodes[v];
    let strides: Vec<Vec<usize>> = tables
        .iter()
        .map(|t| out_scope.iter().map(|&var| t.stride_of(var)).collect())
        .collect();
    let v_strides: Vec<usize> = tables.iter().map(|t| t.stride_of(v)).collect();
    let sums: Vec<(Complex64, f64)> = par::map_range(out_len, exec, |flat| {
        let mut idx = [0usize; 4];
        let mut rem = flat;
        for k in (0..out_scope.len()).rev() {
            idx[k] = rem % out_dims[k];
            rem /= out_dims[k];
        }
        let bases: Vec<usize> = strides
            .iter()
            .map(|st| st.iter().zip(&idx).map(|(s, i)| s * i).sum())
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut acc_m = 0.0;
        for k in 0..n_v {
            let mut p = Complex64::new(1.0, 0.0);
            let mut pm = 1.0;
            for (j, t) in tables.iter().enumerate() {
                let at = bases[j] + k * v_strides[j];
                p *= t.val[at];
                pm *= t.mag[at];
            }
            acc += p;
            acc_m += pm;
        }
        (acc, acc_m)
    });
    let mut shift: f64 = tables.iter().map(|t| t.shift).sum();
    let peak = sums.iter().fold(0.0_f64, |m, s| m.max(s.1));
    let (val, mag): (Vec<Complex64>, Vec<f64>) = if peak > 0.0 {
        shift += peak.ln();
        sums.into_iter().map(|(c, m)| (c / peak, m / peak)).unzip()
    } else {
        sums.into_iter().unzip()
    };
    Table::new(out_scope, out_dims, val, mag, shift)
}

fn union_of(scopes: &[Vec<usize>], v: usize) -> Vec<usize> {
    let mut u: Vec<usize> = scopes
        .iter()
        .filter(|s| s.contains(&v))
        .flat_map(|s| s.iter().copied())
        .collect();
    u.push(v);
    u.sort_unstable();
    u.dedup();
    u
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_reduction() {
        // (1/2πi) ∫ Γ(-s) x^s ds = e^{-x} along Re s < 0.
        for &x in &[1e-3, 0.5, 1.0, 7.0, 100.0] {
            let mut f = MellinIntegrand::new(1);
            f.numerator(0.0, &[-1.0]);
            f.log_x = vec![f64::ln(x)];
            let e = f.integrate(&ContourSpec::default()).unwrap();
            assert!((e.ln_abs() + x).abs() < 1e-6, "x={x}: {}", e.ln_abs());
        }
    }
}
