//! Inversion of the moment function into the meta distribution.
//!
//! With `X = −ln P_s`, `M_b = E[e^(−bX)]` is the Laplace transform of `X` and
//! `M_(jt)` its characteristic function. The Gil-Pelaez integral
//!
//! ```text
//! P(P_s > γ) = 1/2 + (1/π) ∫₀^∞ Im(e^(−jt ln γ) M_(jt)) / t dt
//! ```
//!
//! converges only like `t^(−1−2/α)` because the law of `X` is singular at the
//! origin, so a truncated imaginary-axis integral is impractical. The same
//! inversion is carried out on the shifted Bromwich contour `Re b = A/(2x)`,
//! `x = −ln γ`, where `(1+v)^(−b)` damps the oscillations. The resulting
//! alternating Fourier series is summed with Euler (binomial) averaging.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{check_gamma, MomentEngine, MomentKernel};
use crate::error::{domain, Error, Result};

/// Settings of the Euler-summed Fourier-series inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GilPelaezOptions {
    /// Contour shift parameter; the discretization error is about `e^(−A)`.
    pub shift: f64,
    /// Number of series terms summed before averaging.
    pub terms: usize,
    /// Order of the binomial (Euler) average.
    pub euler_order: usize,
    /// Largest accepted change between consecutive Euler averages.
    pub tolerance: f64,
    /// Relative tolerance of the quadratures inside each moment.
    pub quadrature_tol: f64,
}

impl Default for GilPelaezOptions {
    fn default() -> Self {
        Self {
            shift: 18.4,
            terms: 20,
            euler_order: 11,
            tolerance: 1e-4,
            quadrature_tol: 1e-8,
        }
    }
}

/// Result of an inversion over a set of reliability thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct GilPelaezReport {
    pub gammas: Vec<f64>,
    pub values: Vec<f64>,
    /// Estimated absolute error per value.
    pub error_estimates: Vec<f64>,
    /// Largest imaginary part of the moment order used.
    pub max_imaginary_order: f64,
    pub moment_evaluations: usize,
}

/// Inverts the Laplace transform `fhat` of a CDF `F` supported on `[0, ∞)` at
/// `x > 0`. Returns the value and an error estimate.
pub fn euler_inversion<F>(fhat: F, x: f64, opts: &GilPelaezOptions) -> Result<(f64, f64)>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    if !(x > 0.0 && x.is_finite()) {
        return Err(domain(format!("inversion point must be positive, got {x}")));
    }
    let (n, m) = (opts.terms, opts.euler_order);
    let count = n + m + 2;
    let terms: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|k| {
            let s = Complex64::new(opts.shift, 2.0 * PI * k as f64) / (2.0 * x);
            fhat(s).map(|v| v.re)
        })
        .collect::<Result<Vec<_>>>()?;

    let front = (0.5 * opts.shift).exp() / x;
    let mut partial = Vec::with_capacity(count);
    let mut acc = 0.5 * terms[0];
    partial.push(front * acc);
    for (k, a) in terms.iter().enumerate().skip(1) {
        acc += if k % 2 == 1 { -a } else { *a };
        partial.push(front * acc);
    }
    let average = |start: usize| -> f64 {
        let mut binom = 1.0;
        let mut sum = 0.0;
        for k in 0..=m {
            sum += binom * partial[start + k];
            binom *= (m - k) as f64 / (k + 1) as f64;
        }
        sum / 2f64.powi(m as i32)
    };
    let value = average(n);
    let next = average(n + 1);
    let error = (next - value).abs() + (-opts.shift).exp();
    Ok((value, error))
}

impl MomentEngine {
    /// `M_(jt)`, the characteristic function of `−ln P_s` at `−t`.
    pub fn imaginary_moment(&self, theta: f64, t: f64) -> Result<Complex64> {
        Ok(self.moment(theta, Complex64::new(0.0, t), MomentKernel::PgflExact)?.value)
    }

    /// The imaginary-axis Gil-Pelaez integrand `Im(e^(−jt ln γ) M_(jt))/t`.
    pub fn gil_pelaez_integrand(&self, theta: f64, gamma: f64, t: f64) -> Result<f64> {
        check_gamma(gamma)?;
        if !(t > 0.0) {
            return Err(domain(format!("integrand needs t > 0, got {t}")));
        }
        let m = self.imaginary_moment(theta, t)?;
        let phase = Complex64::new(0.0, -t * gamma.ln()).exp();
        Ok((phase * m).im / t)
    }

    /// Meta distribution at every `γ` by inverting the PGFL moments.
    pub fn gil_pelaez(&self, theta: f64, gammas: &[f64], opts: &GilPelaezOptions) -> Result<GilPelaezReport> {
        if gammas.is_empty() {
            return Err(domain("no reliability thresholds requested"));
        }
        let mut engine = self.clone();
        engine.tol.inner = opts.quadrature_tol;
        let mut values = Vec::with_capacity(gammas.len());
        let mut errors = Vec::with_capacity(gammas.len());
        let mut max_im: f64 = 0.0;
        for &gamma in gammas {
            check_gamma(gamma)?;
            let x = -gamma.ln();
            let fhat = |s: Complex64| -> Result<Complex64> {
                Ok(engine.moment(theta, s, MomentKernel::PgflExact)?.value / s)
            };
            let (v, err) = euler_inversion(fhat, x, opts)?;
            max_im = max_im.max(PI * (opts.terms + opts.euler_order + 1) as f64 / x);
            if err > opts.tolerance {
                return Err(Error::InversionTruncated {
                    partial: v,
                    residual: err,
                    t_max: max_im,
                });
            }
            values.push(v.clamp(0.0, 1.0));
            errors.push(err);
        }
        Ok(GilPelaezReport {
            gammas: gammas.to_vec(),
            values,
            error_estimates: errors,
            max_imaginary_order: max_im,
            moment_evaluations: gammas.len() * (opts.terms + opts.euler_order + 2),
        })
    }
}
