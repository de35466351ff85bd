//! Average secrecy capacity and secrecy outage probability.
//!
//! Every exact metric is a sum of Mellin–Barnes integrals assembled from
//! the Mellin moments of the two SNRs. A sum SNR A + B (direct links)
//! enters through
//!
//! E[(A+B)^{-w}] = (2πi)^{-1} ∫ Γ(-ρ) Γ(w+ρ) / Γ(w) · E[B^ρ] E[A^{-w-ρ}] dρ,  -w < ρ < 0,
//!
//! E[(A+B)^s] = E[A^s] + (2πi)^{-1} ∫ K(s, κ) E[B^κ] E[A^{s-κ}] dκ,  0 < s < κ < 1,
//!
//! with K(s, κ) = Γ(1-κ)Γ(κ)Γ(κ-s)Γ(1+s) / (Γ(1+κ)Γ(1-s)Γ(s)), so that
//! each direct link adds one contour variable to a chain of pairwise
//! couplings.

use std::f64::consts::LN_2;

use crate::channels::MellinLaw;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::snrdist::{Components, DerivedConstants, LogBase, Side, SnrDistributionHandle};
use crate::specfun::{gamma, ln_gamma, meijer_g, ContourSpec, Evaluation, GammaTerm, MeijerGSpec, MellinIntegrand};

/// Terms whose sum falls below this fraction of the largest term are
/// flagged as low confidence.
pub const CANCELLATION_GUARD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MellinBarnes,
    Asymptotic,
    Quadrature,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::MellinBarnes => "mellin-barnes",
            Method::Asymptotic => "asymptotic",
            Method::Quadrature => "quadrature",
        }
    }
}

/// A reader/Eve pair built from one scenario.
#[derive(Debug, Clone)]
pub struct SecrecyQuery {
    pub reader: SnrDistributionHandle,
    pub eve: SnrDistributionHandle,
    pub mode: Mode,
}

impl SecrecyQuery {
    pub fn new(reader: SnrDistributionHandle, eve: SnrDistributionHandle, mode: Mode) -> Result<Self> {
        if reader.case.side != Side::Reader || eve.case.side != Side::Eve {
            return Err(Error::config("secrecy query needs a reader handle and an Eve handle"));
        }
        if reader.case.direct != eve.case.direct {
            return Err(Error::config("reader and Eve handles disagree on direct links"));
        }
        if reader.consts != eve.consts {
            return Err(Error::config("reader and Eve handles come from different scenarios"));
        }
        Ok(Self { reader, eve, mode })
    }

    /// Both handles for `consts`, with or without direct links.
    pub fn from_constants(consts: &DerivedConstants, direct: bool, contour: &ContourSpec, mode: Mode) -> Result<Self> {
        Self::new(
            SnrDistributionHandle::new(consts, Side::Reader, direct, contour.clone())?,
            SnrDistributionHandle::new(consts, Side::Eve, direct, contour.clone())?,
            mode,
        )
    }

    pub fn direct(&self) -> bool {
        self.reader.case.direct
    }

    fn consts(&self) -> &DerivedConstants {
        &self.reader.consts
    }

    fn contour(&self) -> &ContourSpec {
        &self.reader.contour
    }

    fn ln_base(&self) -> f64 {
        self.consts().base.ln_base()
    }
}

/// One separately evaluated term of a metric.
#[derive(Debug, Clone, PartialEq)]
pub struct TermReport {
    pub name: String,
    pub value: f64,
    pub error: f64,
    pub dim: usize,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyResult {
    pub value: f64,
    pub error_estimate: f64,
    pub method: Method,
    pub terms: Vec<TermReport>,
    /// The terms cancel to below [`CANCELLATION_GUARD`] of the largest one.
    pub low_confidence: bool,
}

impl SecrecyResult {
    fn assemble(terms: Vec<(f64, TermReport)>, method: Method, scale: f64) -> Self {
        let value: f64 = terms.iter().map(|(s, t)| s * t.value).sum::<f64>() * scale;
        let error: f64 = terms.iter().map(|(_, t)| t.error).sum::<f64>() * scale.abs();
        let biggest = terms.iter().map(|(_, t)| t.value.abs()).fold(0.0, f64::max) * scale.abs();
        let low_confidence = terms.len() > 1 && value.abs() < CANCELLATION_GUARD * biggest;
        let terms = terms
            .into_iter()
            .map(|(s, mut t)| {
                t.value *= s * scale;
                t.error *= scale.abs();
                t
            })
            .collect();
        Self { value, error_estimate: error, method, terms, low_confidence }
    }

    fn clamp_probability(mut self) -> Self {
        self.value = self.value.clamp(0.0, 1.0);
        self
    }

    fn clamp_nonnegative(mut self) -> Self {
        self.value = self.value.max(0.0);
        self
    }
}

/// Linear form over the contour variables of one integrand.
type Form = Vec<f64>;

fn unit(dim: usize, i: usize) -> Form {
    let mut f = vec![0.0; dim];
    f[i] = 1.0;
    f
}

fn pad(f: &Form, dim: usize) -> Form {
    let mut g = f.clone();
    g.resize(dim, 0.0);
    g
}

fn add(a: &Form, b: &Form) -> Form {
    let n = a.len().max(b.len());
    (0..n).map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0)).collect()
}

fn neg(a: &Form) -> Form {
    a.iter().map(|v| -v).collect()
}

/// Appends a contour variable and returns its index.
fn add_var(f: &mut MellinIntegrand) -> usize {
    for t in &mut f.terms {
        t.weights.push(0.0);
    }
    f.log_x.push(0.0);
    f.dim += 1;
    f.dim - 1
}

fn num(f: &mut MellinIntegrand, c: f64, w: &Form) {
    let w = pad(w, f.dim);
    f.push(GammaTerm::numerator(c, w));
}

fn den(f: &mut MellinIntegrand, c: f64, w: &Form) {
    let w = pad(w, f.dim);
    f.push(GammaTerm::denominator(c, w));
}

fn moment(f: &mut MellinIntegrand, law: &MellinLaw, w: &Form) {
    let w = pad(w, f.dim);
    law.push_moment(f, 0.0, &w);
}

/// Multiplies every piece by E[V^{-w}].
fn neg_moment(pieces: Vec<MellinIntegrand>, v: &Components, w: &Form) -> Vec<MellinIntegrand> {
    pieces
        .into_iter()
        .map(|mut f| {
            match &v.direct {
                None => moment(&mut f, &v.ris, &neg(w)),
                Some(b) => {
                    let i = add_var(&mut f);
                    let rho = unit(f.dim, i);
                    num(&mut f, 0.0, &neg(&rho));
                    num(&mut f, 0.0, &add(w, &rho));
                    den(&mut f, 0.0, w);
                    moment(&mut f, b, &rho);
                    moment(&mut f, &v.ris, &neg(&add(w, &rho)));
                }
            }
            f
        })
        .collect()
}

/// Multiplies every piece by E[V^s], splitting it in two for a sum.
fn pos_moment(pieces: Vec<MellinIntegrand>, v: &Components, s: &Form) -> Vec<MellinIntegrand> {
    let mut out = Vec::new();
    for f in pieces {
        match &v.direct {
            None => {
                let mut f = f;
                moment(&mut f, &v.ris, s);
                out.push(f);
            }
            Some(b) => {
                let mut first = f.clone();
                moment(&mut first, &v.ris, s);
                out.push(first);
                let mut g = f;
                let i = add_var(&mut g);
                let kappa = unit(g.dim, i);
                num(&mut g, 1.0, &neg(&kappa));
                num(&mut g, 0.0, &kappa);
                den(&mut g, 1.0, &kappa);
                num(&mut g, 0.0, &add(&kappa, &neg(s)));
                num(&mut g, 1.0, s);
                den(&mut g, 1.0, &neg(s));
                den(&mut g, 0.0, s);
                moment(&mut g, b, &kappa);
                moment(&mut g, &v.ris, &add(s, &neg(&kappa)));
                out.push(g);
            }
        }
    }
    out
}

/// Γ(1-u) Γ(u)² / Γ(1+u), the Mellin kernel of ln(1+x) = ∫ L(u) x^u du.
fn log_kernel(f: &mut MellinIntegrand, u: &Form) {
    num(f, 1.0, &neg(u));
    num(f, 0.0, u);
    num(f, 0.0, u);
    den(f, 1.0, u);
}

/// 1/w = Γ(w)/Γ(1+w).
fn reciprocal(f: &mut MellinIntegrand, w: &Form) {
    num(f, 0.0, w);
    den(f, 1.0, w);
}

fn evaluate(name: &str, pieces: Vec<MellinIntegrand>, contour: &ContourSpec) -> Result<Vec<TermReport>> {
    let many = pieces.len() > 1;
    pieces
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let ev: Evaluation = f.integrate(contour).map_err(|e| match e {
                Error::Convergence { what, achieved, requested } => {
                    Error::Convergence { what: format!("{name}: {what}"), achieved, requested }
                }
                other => other,
            })?;
            Ok(TermReport {
                name: if many { format!("{name}.{i}") } else { name.to_string() },
                value: ev.value,
                error: ev.error,
                dim: f.dim,
                nodes: ev.nodes,
            })
        })
        .collect()
}

/// J₁ = E[ln(1+R) 1{E < R}] in nats, in the variables (s, w) with s = u + w:
/// ∫∫ L(s-w) (1/w) E[E^{-w}] E[R^s].
fn j_max_term(name: &str, top: &Components, other: &Components, contour: &ContourSpec) -> Result<Vec<TermReport>> {
    let mut f = MellinIntegrand::new(2);
    let s = unit(2, 0);
    let w = unit(2, 1);
    log_kernel(&mut f, &add(&s, &neg(&w)));
    reciprocal(&mut f, &w);
    let pieces = neg_moment(vec![f], other, &w);
    let pieces = pos_moment(pieces, top, &s);
    evaluate(name, pieces, contour)
}

/// E[ln(1+V)] in nats as ∫ L(u) E[V^u] du.
fn mean_log1p_mellin(name: &str, v: &Components, contour: &ContourSpec) -> Result<Vec<TermReport>> {
    let mut f = MellinIntegrand::new(1);
    let u = unit(1, 0);
    log_kernel(&mut f, &u);
    evaluate(name, pos_moment(vec![f], v, &u), contour)
}

/// E[ln(1+γ_E)] for the no-direct Eve law, as
/// G^{2,3}_{3,2}(K_E | 1, 1, 1-m; 1, m_s) / (Γ(m) Γ(m_s)), in nats.
pub fn eve_log_mean_meijer(consts: &DerivedConstants, contour: &ContourSpec) -> Result<Evaluation> {
    let st = consts.fading.st;
    let spec = MeijerGSpec::new(2, 3, vec![1.0, 1.0, 1.0 - st.m], vec![1.0, st.m_s])?;
    // The Eve law's moment constant carries 𝒞/(a γ̄_E)·K_E = 𝒞/λ₁ = 1/(Γ(m)Γ(m_s)).
    let ln_norm = (consts.c_cal / consts.lambda1).ln();
    Ok(meijer_g(&spec, consts.kappa_eve(), contour)?.scale(ln_norm, 1.0))
}

fn report(name: &str, ev: &Evaluation, dim: usize) -> TermReport {
    TermReport { name: name.into(), value: ev.value, error: ev.error, dim, nodes: ev.nodes.clone() }
}

fn asc_exact(q: &SecrecyQuery) -> Result<SecrecyResult> {
    let r = &q.reader.components;
    let e = &q.eve.components;
    let contour = q.contour();
    let mut terms: Vec<(f64, TermReport)> = Vec::new();
    for t in j_max_term("J1", r, e, contour)? {
        terms.push((1.0, t));
    }
    for t in j_max_term("J2", e, r, contour)? {
        terms.push((1.0, t));
    }
    if q.direct() {
        for t in mean_log1p_mellin("J3", e, contour)? {
            terms.push((-1.0, t));
        }
    } else {
        terms.push((-1.0, report("J3", &eve_log_mean_meijer(q.consts(), contour)?, 1)));
    }
    Ok(SecrecyResult::assemble(terms, Method::MellinBarnes, 1.0 / q.ln_base()).clamp_nonnegative())
}

/// Pr(C_s < R_s) = Pr(γ_R < R_t γ_E + R_t′).
fn sop_exact(q: &SecrecyQuery) -> Result<SecrecyResult> {
    let k = q.consts();
    let r = &q.reader.components;
    let e = &q.eve.components;
    let contour = q.contour();
    let mut terms: Vec<(f64, TermReport)> = Vec::new();
    if k.r_t_prime <= 0.0 {
        // Pr(γ_R < R_t γ_E) = ∫ (1/w) E[γ_R^{-w}] R_t^w E[γ_E^w] dw.
        let mut f = MellinIntegrand::new(1);
        let w = unit(1, 0);
        reciprocal(&mut f, &w);
        f.log_x[0] += k.r_t.ln();
        let pieces = pos_moment(neg_moment(vec![f], r, &w), e, &w);
        for t in evaluate("P", pieces, contour)? {
            terms.push((1.0, t));
        }
    } else {
        // F_R(R_t′) plus the excess of E[(R_t γ_E + R_t′)^w] over R_t′^w:
        // ∫∫ E[γ_R^{-w}] Γ(1-τ)Γ(τ)Γ(τ-w) / (Γ(1+τ)Γ(1-w)) R_t^τ R_t′^{w-τ} E[γ_E^τ],  0 < w < τ < 1.
        let base = q.reader.cdf_eval(k.r_t_prime)?.ok_or_else(|| Error::domain("R_t′ must be positive"))?;
        terms.push((1.0, report("F_R(R_t')", &base, 1)));
        let mut f = MellinIntegrand::new(2);
        let w = unit(2, 0);
        let tau = unit(2, 1);
        num(&mut f, 1.0, &neg(&tau));
        num(&mut f, 0.0, &tau);
        num(&mut f, 0.0, &add(&tau, &neg(&w)));
        den(&mut f, 1.0, &tau);
        den(&mut f, 1.0, &neg(&w));
        f.log_x[0] += k.r_t_prime.ln();
        f.log_x[1] += k.r_t.ln() - k.r_t_prime.ln();
        let pieces = pos_moment(neg_moment(vec![f], r, &w), e, &tau);
        for t in evaluate("H", pieces, contour)? {
            terms.push((1.0, t));
        }
    }
    Ok(SecrecyResult::assemble(terms, Method::MellinBarnes, 1.0).clamp_probability())
}

fn require(q: &SecrecyQuery, direct: bool) -> Result<()> {
    if q.direct() != direct {
        let want = if direct { "direct-link" } else { "no-direct" };
        return Err(Error::config(format!("query handles are not {want}")));
    }
    Ok(())
}

pub fn asc_nodirect(q: &SecrecyQuery) -> Result<SecrecyResult> {
    require(q, false)?;
    asc_exact(q)
}

pub fn sop_nodirect(q: &SecrecyQuery) -> Result<SecrecyResult> {
    require(q, false)?;
    sop_exact(q)
}

pub fn asc_direct(q: &SecrecyQuery) -> Result<SecrecyResult> {
    require(q, true)?;
    asc_exact(q)
}

pub fn sop_direct(q: &SecrecyQuery) -> Result<SecrecyResult> {
    require(q, true)?;
    sop_exact(q)
}

/// High-SNR ASC: J₁ → E[ln γ_R], J₂ → 0, J₃ unchanged.
pub fn asc_asymptotic(q: &SecrecyQuery) -> Result<SecrecyResult> {
    require(q, false)?;
    let r = &q.reader.components.ris;
    let j1 = TermReport { name: "E[ln gamma_R]".into(), value: r.mean_log(), error: 0.0, dim: 0, nodes: vec![] };
    let j3 = report("J3", &eve_log_mean_meijer(q.consts(), q.contour())?, 1);
    Ok(SecrecyResult::assemble(vec![(1.0, j1), (-1.0, j3)], Method::Asymptotic, 1.0 / q.ln_base()))
}

/// Leading right pole w* of E[γ_R^{-w}] and the residue factor
/// lim_{w→w*} (w* - w) E[γ_R^{-w}] / w, as (w*, ln factor).
fn reader_leading_pole(law: &MellinLaw) -> Result<(f64, f64)> {
    let (lo, _) = law.moment_bounds();
    let w_star = -lo;
    let hits: Vec<_> = law.gammas.iter().filter(|g| g.b > 0.0 && ((g.a / g.b) - w_star).abs() < 1e-12).collect();
    if hits.len() != 1 || hits[0].b != 1.0 {
        return Err(Error::domain("asymptotic SOP needs a simple leading pole of unit weight"));
    }
    let mut ln = law.log_const - w_star * law.log_scale - w_star.ln();
    let mut skipped = false;
    for g in &law.gammas {
        if !skipped && std::ptr::eq(g, hits[0]) {
            skipped = true;
            continue;
        }
        let arg = g.a - g.b * w_star;
        if arg <= 0.0 && arg.fract() == 0.0 {
            return Err(Error::domain("coincident leading poles in the reader law"));
        }
        if gamma(arg) < 0.0 {
            return Err(Error::domain("negative residue factor in the reader law"));
        }
        ln += ln_gamma(arg);
    }
    Ok((w_star, ln))
}

/// E[(b + R_t γ_E)^w] for real w > 0: the binomial terms up to ⌊w⌋ plus a
/// contour remainder on (w, ⌊w⌋+1).
pub fn shifted_power_moment(e: &MellinLaw, r_t: f64, b: f64, w: f64, contour: &ContourSpec) -> Result<Evaluation> {
    let (_, hi) = e.moment_bounds();
    if w >= hi {
        return Err(Error::domain(format!("E[γ_E^{w}] is infinite (moments exist below {hi})")));
    }
    let n = w.floor();
    let mut total = zero_evaluation();
    for k in 0..=(n as u32) {
        // C(w, k) > 0 for k ≤ ⌊w⌋.
        let k = f64::from(k);
        let ln_binom = ln_gamma(w + 1.0) - ln_gamma(k + 1.0) - ln_gamma(w - k + 1.0);
        total.add_term(ln_binom + k * r_t.ln() + e.ln_moment(k) + (w - k) * b.ln(), 1.0, 1e-15);
    }
    if w.fract() != 0.0 {
        // (1/|Γ(-w)|) ∫ Γ(n+1-u) Γ(u-n) Γ(u-w) / Γ(1+u) · R_t^u E[γ_E^u] b^{w-u} du.
        let mut f = MellinIntegrand::new(1);
        let u = unit(1, 0);
        num(&mut f, n + 1.0, &neg(&u));
        num(&mut f, -n, &u);
        num(&mut f, -w, &u);
        den(&mut f, 1.0, &u);
        moment(&mut f, e, &u);
        f.log_x[0] += r_t.ln() - b.ln();
        f.log_prefactor += w * b.ln() - ln_gamma(-w);
        let rem = f.integrate(contour)?;
        total.add_term(rem.ln_abs(), rem.value.signum(), rem.rel_error());
    }
    Ok(total)
}

fn zero_evaluation() -> Evaluation {
    Evaluation {
        value: 0.0,
        error: 0.0,
        imag: 0.0,
        mantissa: 0.0,
        error_mantissa: 0.0,
        imag_mantissa: 0.0,
        log_scale: 0.0,
        abs_mantissa: 0.0,
        abscissa: vec![],
        half_extent: vec![],
        nodes: vec![],
        cost: 0.0,
    }
}

/// High-SNR SOP from the leading reader pole w* = min(m_ST, (c+1)/2):
/// K_R E[(R_t γ_E + R_t′)^{w*}].
pub fn sop_asymptotic(q: &SecrecyQuery) -> Result<SecrecyResult> {
    require(q, false)?;
    let k = q.consts();
    let (w_star, ln_k) = reader_leading_pole(&q.reader.components.ris)?;
    let b = k.r_t_prime;
    let e = &q.eve.components.ris;
    let ev = if b > 0.0 {
        shifted_power_moment(e, k.r_t, b, w_star, q.contour())?
    } else {
        let mut z = zero_evaluation();
        z.add_term(w_star * k.r_t.ln() + e.ln_moment(w_star), 1.0, 1e-15);
        z
    };
    let term = report("K_R E[(R_t gamma_E + R_t')^w*]", &ev.scale(ln_k, 1.0), 1);
    Ok(SecrecyResult::assemble(vec![(1.0, term)], Method::Asymptotic, 1.0))
}

pub fn asc(q: &SecrecyQuery) -> Result<SecrecyResult> {
    match q.mode {
        Mode::Exact => asc_exact(q),
        Mode::Asymptotic => asc_asymptotic(q),
    }
}

pub fn sop(q: &SecrecyQuery) -> Result<SecrecyResult> {
    match q.mode {
        Mode::Exact => sop_exact(q),
        Mode::Asymptotic => sop_asymptotic(q),
    }
}

/// Integration window in ln γ that carries all but a negligible part of
/// both laws.
fn log_window(q: &SecrecyQuery) -> (f64, f64) {
    let mean = |c: &Components| c.ris.ln_moment(1.0).exp() + c.direct.as_ref().map_or(0.0, |d| d.ln_moment(1.0).exp());
    let (mr, me) = (mean(&q.reader.components), mean(&q.eve.components));
    ((mr.min(me) * 1e-9).ln(), (mr.max(me) * 1e7).ln())
}

fn quad_opts() -> QuadOptions {
    QuadOptions { abs_tol: 0.0, rel_tol: 1e-8, max_intervals: 2000 }
}

/// ASC by one-dimensional quadrature, ∫ F_E(x) (1 - F_R(x)) / (1 + x) dx,
/// over the distribution evaluators.
pub fn asc_quadrature(q: &SecrecyQuery) -> Result<SecrecyResult> {
    let (lo, hi) = log_window(q);
    let mut failure = None;
    let val = integrate(
        |u| {
            let x = u.exp();
            let fe = q.eve.cdf(x);
            let sr = q.reader.ccdf_eval(x).map(|e| e.value.clamp(0.0, 1.0));
            match (fe, sr) {
                (Ok(a), Ok(b)) => a * b * x / (1.0 + x),
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        lo,
        hi,
        quad_opts(),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let t = TermReport { name: "quadrature".into(), value: val.value, error: val.error, dim: 1, nodes: vec![val.evaluations] };
    Ok(SecrecyResult::assemble(vec![(1.0, t)], Method::Quadrature, 1.0 / q.ln_base()))
}

/// SOP by one-dimensional quadrature, ∫ f_E(e) F_R(R_t e + R_t′) de.
pub fn sop_quadrature(q: &SecrecyQuery) -> Result<SecrecyResult> {
    let k = q.consts();
    let (lo, hi) = log_window(q);
    let mut failure = None;
    let val = integrate(
        |u| {
            let x = u.exp();
            match (q.eve.pdf(x), q.reader.cdf(k.r_t * x + k.r_t_prime)) {
                (Ok(a), Ok(b)) => a * b * x,
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        lo,
        hi,
        quad_opts(),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let t = TermReport { name: "quadrature".into(), value: val.value, error: val.error, dim: 1, nodes: vec![val.evaluations] };
    Ok(SecrecyResult::assemble(vec![(1.0, t)], Method::Quadrature, 1.0).clamp_probability())
}

/// Capacity of a single SNR in the configured base, E[log(1+γ)], by
/// quadrature against its density.
pub fn mean_capacity_quadrature(h: &SnrDistributionHandle, base: LogBase) -> Result<f64> {
    let c = &h.components;
    let mean = c.ris.ln_moment(1.0).exp() + c.direct.as_ref().map_or(0.0, |d| d.ln_moment(1.0).exp());
    let mut failure = None;
    let val = integrate(
        |u| {
            let x = u.exp();
            match h.pdf(x) {
                Ok(p) => p * x * x.ln_1p(),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        (mean * 1e-9).ln(),
        (mean * 1e7).ln(),
        quad_opts(),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(val.value / base.ln_base())
}

/// Bits per nat, for callers that report in bits.
pub const BITS_PER_NAT: f64 = 1.0 / LN_2;
