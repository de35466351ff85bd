//! Meijer G-function by Mellin–Barnes quadrature.
//!
//! ```text
//! G^{m,n}_{p,q}(x | a; b) = (1/2πi) ∫ Π_{j<m} Γ(b_j - s) Π_{i<n} Γ(1 - a_i + s)
//!                           / (Π_{j≥m} Γ(1 - b_j + s) Π_{i≥n} Γ(a_i - s)) x^s ds
//! ```

use super::mellin::{ContourSpec, Evaluation, MellinIntegrand};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MeijerGSpec {
    pub m: usize,
    pub n: usize,
    /// Upper parameters a_1..a_p.
    pub a: Vec<f64>,
    /// Lower parameters b_1..b_q.
    pub b: Vec<f64>,
}

impl MeijerGSpec {
    pub fn new(m: usize, n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let spec = Self { m, n, a, b };
        spec.validate()?;
        Ok(spec)
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn q(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.m > self.q() || self.n > self.p() {
            return Err(Error::config(format!(
                "Meijer-G orders m={} n={} exceed q={} p={}",
                self.m,
                self.n,
                self.q(),
                self.p()
            )));
        }
        if self.a.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(Error::config("non-finite Meijer-G parameter"));
        }
        let left = self.a[..self.n].iter().map(|a| a - 1.0).fold(f64::NEG_INFINITY, f64::max);
        let right = self.b[..self.m].iter().copied().fold(f64::INFINITY, f64::min);
        if left >= right {
            return Err(Error::config(format!(
                "Meijer-G pole families overlap: left family reaches {left}, right family starts at {right}"
            )));
        }
        Ok(())
    }

    /// The Mellin–Barnes integrand at argument x.
    pub fn integrand(&self, x: f64) -> MellinIntegrand {
        let mut f = MellinIntegrand::new(1);
        for (j, &b) in self.b.iter().enumerate() {
            if j < self.m {
                f.numerator(b, &[-1.0]);
            } else {
                f.denominator(1.0 - b, &[1.0]);
            }
        }
        for (i, &a) in self.a.iter().enumerate() {
            if i < self.n {
                f.numerator(1.0 - a, &[1.0]);
            } else {
                f.denominator(a, &[-1.0]);
            }
        }
        f.log_x = vec![x.ln()];
        f
    }
}

/// G^{m,n}_{p,q}(x) with its quadrature error estimate.
pub fn meijer_g(spec: &MeijerGSpec, x: f64, contour: &ContourSpec) -> Result<Evaluation> {
    spec.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("Meijer-G argument must be positive, got {x}")));
    }
    spec.integrand(x).integrate(contour)
}
