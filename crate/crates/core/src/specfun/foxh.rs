//! Multivariate Fox H-function in the Srivastava–Panda layout.
//!
//! ```text
//! H = (2πi)^{-r} ∫ Ψ(s) Π_i φ_i(s_i) x_i^{s_i} ds
//! Ψ(s)   = Π_{j<n0} Γ(1 - a_j + α_j·s) / (Π_{j≥n0} Γ(a_j - α_j·s) Π_j Γ(1 - b_j + β_j·s))
//! φ_i(s) = Π_{j<m} Γ(d_j - δ_j s) Π_{j<n} Γ(1 - c_j + γ_j s)
//!          / (Π_{j≥n} Γ(c_j - γ_j s) Π_{j≥m} Γ(1 - d_j + δ_j s))
//! ```
//!
//! Weights may carry either sign, which lets the same layout hold the
//! differences of contour variables that appear in moment expansions.

use super::mellin::{ContourSpec, Evaluation, GammaTerm, MellinIntegrand};
use crate::error::{Error, Result};

/// Coefficient and weight vector of a coupling gamma factor.
#[derive(Debug, Clone, PartialEq)]
pub struct HBlock {
    pub coef: f64,
    pub weights: Vec<f64>,
}

/// Coefficient and weight of a single-variable gamma factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HParam {
    pub coef: f64,
    pub weight: f64,
}

/// Orders and parameters of one variable's own gamma ratio φ_i.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VariableBlock {
    pub m: usize,
    pub n: usize,
    /// (c_j, γ_j), j = 1..p.
    pub upper: Vec<HParam>,
    /// (d_j, δ_j), j = 1..q.
    pub lower: Vec<HParam>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoxHSpec {
    pub r: usize,
    /// Number of leading `outer_upper` blocks that sit in the numerator.
    pub outer_n: usize,
    pub outer_upper: Vec<HBlock>,
    pub outer_lower: Vec<HBlock>,
    pub per_variable: Vec<VariableBlock>,
}

impl FoxHSpec {
    /// Builds a spec whose integrand is Π terms · Π x_i^{s_i}.
    pub fn from_terms(r: usize, terms: &[GammaTerm]) -> Result<Self> {
        let mut outer_num = Vec::new();
        let mut outer_lower = Vec::new();
        let mut per_variable = vec![VariableBlock::default(); r];
        let mut lower_num = vec![Vec::new(); r];
        let mut lower_den = vec![Vec::new(); r];
        let mut upper_num = vec![Vec::new(); r];
        let mut upper_den = vec![Vec::new(); r];
        for t in terms {
            if t.weights.len() != r {
                return Err(Error::config("gamma weight vector length differs from dimension"));
            }
            let scope: Vec<usize> = (0..r).filter(|&i| t.weights[i] != 0.0).collect();
            if scope.len() == 1 {
                let i = scope[0];
                let w = t.weights[i];
                match (t.reciprocal, w < 0.0) {
                    (false, true) => lower_num[i].push(HParam { coef: t.constant, weight: -w }),
                    (false, false) => upper_num[i].push(HParam { coef: 1.0 - t.constant, weight: w }),
                    (true, true) => upper_den[i].push(HParam { coef: t.constant, weight: -w }),
                    (true, false) => lower_den[i].push(HParam { coef: 1.0 - t.constant, weight: w }),
                }
            } else if t.reciprocal {
                outer_lower.push(HBlock { coef: 1.0 - t.constant, weights: t.weights.clone() });
            } else {
                outer_num.push(HBlock { coef: 1.0 - t.constant, weights: t.weights.clone() });
            }
        }
        for i in 0..r {
            let v = &mut per_variable[i];
            v.m = lower_num[i].len();
            v.n = upper_num[i].len();
            v.lower = lower_num[i].iter().chain(&lower_den[i]).copied().collect();
            v.upper = upper_num[i].iter().chain(&upper_den[i]).copied().collect();
        }
        let outer_n = outer_num.len();
        let outer_upper = outer_num;
        let spec = Self { r, outer_n, outer_upper, outer_lower, per_variable };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.r) {
            return Err(Error::config(format!("Fox-H dimension {} outside 1..=4", self.r)));
        }
        if self.per_variable.len() != self.r {
            return Err(Error::config("Fox-H needs one variable block per dimension"));
        }
        if self.outer_n > self.outer_upper.len() {
            return Err(Error::config("Fox-H outer_n exceeds the number of upper blocks"));
        }
        for b in self.outer_upper.iter().chain(&self.outer_lower) {
            if b.weights.len() != self.r {
                return Err(Error::config("Fox-H block weight list length differs from r"));
            }
            if !b.coef.is_finite() || b.weights.iter().any(|w| !w.is_finite()) {
                return Err(Error::config("non-finite Fox-H block"));
            }
        }
        for (i, v) in self.per_variable.iter().enumerate() {
            if v.m > v.lower.len() || v.n > v.upper.len() {
                return Err(Error::config(format!("Fox-H variable {i}: orders exceed parameter counts")));
            }
            if v.upper.iter().chain(&v.lower).any(|p| !p.coef.is_finite() || !p.weight.is_finite()) {
                return Err(Error::config(format!("Fox-H variable {i}: non-finite parameter")));
            }
        }
        Ok(())
    }

    /// The Mellin–Barnes integrand at arguments x.
    pub fn integrand(&self, x: &[f64]) -> MellinIntegrand {
        let r = self.r;
        let mut f = MellinIntegrand::new(r);
        for (j, b) in self.outer_upper.iter().enumerate() {
            if j < self.outer_n {
                f.numerator(1.0 - b.coef, &b.weights);
            } else {
                let w: Vec<f64> = b.weights.iter().map(|w| -w).collect();
                f.denominator(b.coef, &w);
            }
        }
        for b in &self.outer_lower {
            f.denominator(1.0 - b.coef, &b.weights);
        }
        for (i, v) in self.per_variable.iter().enumerate() {
            let unit = |w: f64| {
                let mut e = vec![0.0; r];
                e[i] = w;
                e
            };
            for (j, p) in v.lower.iter().enumerate() {
                if j < v.m {
                    f.numerator(p.coef, &unit(-p.weight));
                } else {
                    f.denominator(1.0 - p.coef, &unit(p.weight));
                }
            }
            for (j, p) in v.upper.iter().enumerate() {
                if j < v.n {
                    f.numerator(1.0 - p.coef, &unit(p.weight));
                } else {
                    f.denominator(p.coef, &unit(-p.weight));
                }
            }
        }
        f.log_x = x.iter().map(|v| v.ln()).collect();
        f
    }
}

fn check_args(x: &[f64]) -> Result<()> {
    if let Some(v) = x.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::domain(format!("Fox-H argument must be positive, got {v}")));
    }
    Ok(())
}

/// Any-dimension Fox-H evaluation.
pub fn fox_h(spec: &FoxHSpec, x: &[f64], contour: &ContourSpec) -> Result<Evaluation> {
    spec.validate()?;
    if x.len() != spec.r {
        return Err(Error::config(format!("Fox-H expects {} arguments, got {}", spec.r, x.len())));
    }
    check_args(x)?;
    spec.integrand(x).integrate(contour)
}

pub fn fox_h_bivariate(spec: &FoxHSpec, x1: f64, x2: f64, contour: &ContourSpec) -> Result<Evaluation> {
    if spec.r != 2 {
        return Err(Error::config(format!("bivariate Fox-H needs r = 2, got {}", spec.r)));
    }
    fox_h(spec, &[x1, x2], contour)
}

pub fn fox_h_multivariate(spec: &FoxHSpec, x: &[f64], contour: &ContourSpec) -> Result<Evaluation> {
    if spec.r < 3 {
        return Err(Error::config(format!("multivariate Fox-H needs r ≥ 3, got {}", spec.r)));
    }
    fox_h(spec, x, contour)
}
