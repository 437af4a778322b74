//! Moments of the conditional success probability, the two-moment beta
//! approximation and Gil-Pelaez inversion of the meta distribution.
//!
//! With `κ = θ R_u^α / p_t(R_u)` the `b`-th moment is
//!
//! ```text
//! M_b = E[ exp(−bκσ²) · exp(−2πλ Φ(κ, b)) ],
//! Φ(κ, b) = ∫₀^∞ w(x) ∫_x^∞ [1 − (1 + κ p_t(x) d^(−α))^(−b)] d dd dx,
//! ```
//!
//! where `w(x) = 2πλ x e^(−πλx²)` is the law of an interferer's own link
//! length. Exchanging the order of integration collapses `Φ` to a single
//! integral over the normalized distance `y`:
//!
//! ```text
//! Φ(κ, b) = κ^(2/α) ∫₀^∞ k_b(y) y Ω(r*(κ y^α)) dy,   k_b(y) = 1 − (1 + y^(−α))^(−b)
//! ```
//!
//! with `Ω(X) = ∫₀^X w(x) p_t(x)^(2/α) dx` in closed form and `r*` the inverse
//! of `r ↦ r^α/p_t(r)`.

mod gil_pelaez;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{serving_distance_law, SystemParams};
use crate::numerics::{
    ln_gamma, regularized_incomplete_beta, regularized_lower_gamma, Integrator, ToleranceBudget,
};

pub use gil_pelaez::{GilPelaezOptions, GilPelaezReport};

/// Interference factor used inside the moment integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MomentKernel {
    /// Exact PGFL kernel `1 − (1+v)^(−b)`.
    #[default]
    PgflExact,
    /// First-moment Laplace transform evaluated at `bκ`.
    ScaledLaplace,
}

/// A (possibly complex) moment of the conditional success probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentValue {
    pub order: Complex64,
    pub theta: f64,
    pub value: Complex64,
}

/// Beta law matched to the first two moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaShape {
    pub a: f64,
    pub b: f64,
}

impl BetaShape {
    pub fn from_moments(m1: f64, m2: f64) -> Result<Self> {
        let var = m2 - m1 * m1;
        if !(var > 0.0) {
            return Err(Error::DegenerateMoments(format!(
                "non-positive variance M2 - M1^2 = {var:e} (M1 = {m1}, M2 = {m2})"
            )));
        }
        if !(m1 >= m2) || !(m1 <= 1.0) {
            return Err(Error::DegenerateMoments(format!(
                "moments violate 1 >= M1 >= M2 (M1 = {m1}, M2 = {m2})"
            )));
        }
        let a = m1 * (m1 - m2) / var;
        let b = (m1 - m2) * (1.0 - m1) / var;
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::DegenerateMoments(format!("beta shape a = {a}, b = {b}")));
        }
        Ok(Self { a, b })
    }

    /// `1 − I_γ(a, b)`.
    pub fn ccdf(&self, gamma: f64) -> Result<f64> {
        Ok(1.0 - regularized_incomplete_beta(gamma, self.a, self.b)?)
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }
}

/// `ln(1 + y^(−α))` without overflow for tiny `y`.
#[inline]
fn ln_one_plus_inv_pow(y: f64, alpha: f64) -> f64 {
    let ya = y.powf(alpha);
    if ya < 1.0 {
        ya.ln_1p() - ya.ln()
    } else {
        (1.0 / ya).ln_1p()
    }
}

/// `1 − (1 + y^(−α))^(−b)`.
#[inline]
fn kernel(y: f64, alpha: f64, b: Complex64) -> Complex64 {
    let ell = ln_one_plus_inv_pow(y, alpha);
    if b.im == 0.0 {
        return Complex64::new(-(-b.re * ell).exp_m1(), 0.0);
    }
    // 1 − e^(−b ℓ) with the real part kept accurate for small |bℓ|
    let z = -b * ell;
    let half = (0.5 * z.im).sin();
    let em1 = Complex64::new(z.re.exp_m1(), 0.0) * Complex64::new(z.im.cos(), z.im.sin())
        + Complex64::new(-2.0 * half * half, z.im.sin());
    -em1
}

/// Evaluator for moments and derived approximations at fixed parameters.
#[derive(Debug, Clone)]
pub struct MomentEngine {
    params: SystemParams,
    tol: ToleranceBudget,
    omega_front: f64,
    omega_at_rc: f64,
}

impl MomentEngine {
    pub fn new(params: SystemParams) -> Result<Self> {
        Self::with_tolerances(params, ToleranceBudget::default())
    }

    pub fn with_tolerances(params: SystemParams, tol: ToleranceBudget) -> Result<Self> {
        params.validate()?;
        let l = PI * params.bs_density;
        let eps = params.compensation;
        let delta = 2.0 / params.path_loss;
        let omega_front = params.power_control.powf(delta) * l.powf(-eps) * ln_gamma(1.0 + eps).exp();
        let rc = params.crossover_radius();
        let omega_at_rc = omega_front * regularized_lower_gamma(1.0 + eps, l * rc * rc);
        Ok(Self {
            params,
            tol,
            omega_front,
            omega_at_rc,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn tolerances(&self) -> &ToleranceBudget {
        &self.tol
    }

    /// `Ω(X) = ∫₀^X w(x) p_t(x)^(2/α) dx`.
    fn omega(&self, x: f64) -> f64 {
        let p = &self.params;
        let l = PI * p.bs_density;
        let rc = p.crossover_radius();
        if x <= rc {
            return self.omega_front * regularized_lower_gamma(1.0 + p.compensation, l * x * x);
        }
        let delta = 2.0 / p.path_loss;
        self.omega_at_rc
            + p.max_power.powf(delta) * (-l * rc * rc).exp() * -(-l * (x * x - rc * rc)).exp_m1()
    }

    /// `Φ(κ, b)` by the single-integral representation.
    pub(crate) fn phi(&self, kappa: f64, b: Complex64) -> Result<Complex64> {
        if kappa <= 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let p = &self.params;
        let alpha = p.path_loss;
        let delta = 2.0 / alpha;
        let weight = |y: f64| y * self.omega(p.radius_for_inverse_strength(kappa * y.powf(alpha)));

        // kinks of the weight: saturation of the interferer power, and the
        // normalized distance of a typical interferer
        let y_c = (p.inverse_strength_crossover() / kappa).powf(1.0 / alpha);
        let y_m = (p.inverse_strength(p.mean_cell_radius()) / kappa).powf(1.0 / alpha);
        let mut points = vec![0.0];
        for v in [y_c, y_m, 1.0] {
            if v > 0.0 && v.is_finite() {
                points.push(v);
            }
        }
        points.sort_by(|a, b| a.total_cmp(b));
        points.dedup();
        let scale = *points.last().unwrap();
        points.push(f64::INFINITY);

        let integrand = |y: f64| kernel(y, alpha, b) * weight(y);
        let res = Integrator::with_tol(0.0, self.tol.inner)
            .scale(scale)
            .max_subdivisions(4000)
            .integrate_breaks(integrand, &points);
        let v = res.into_result()?;
        Ok(v * kappa.powf(delta))
    }

    /// Outer integral over the serving distance of `g(z, κ(z))`.
    fn serving_average<F>(&self, theta: f64, mut g: F) -> Result<Complex64>
    where
        F: FnMut(f64, f64) -> Result<Complex64>,
    {
        let p = &self.params;
        let law = serving_distance_law(p);
        let z_hi = law.quantile(1.0 - 1e-15);
        let rc = p.crossover_radius();
        let mut points = vec![0.0];
        if rc < z_hi {
            points.push(rc);
        }
        let median = law.median();
        if median < z_hi && median != rc {
            points.push(median);
        }
        points.push(z_hi);
        points.sort_by(|a, b| a.total_cmp(b));
        let mut failure = None;
        let res = Integrator::with_tol(self.tol.inner, 0.0).integrate_breaks(
            |z| {
                if z <= 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let kappa = theta * p.inverse_strength(z);
                match g(z, kappa) {
                    Ok(v) => v * law.pdf(z),
                    Err(e) => {
                        failure.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    }
                }
            },
            &points,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        res.into_result()
    }

    /// `b`-th moment of the conditional success probability.
    pub fn moment(&self, theta: f64, b: Complex64, kernel: MomentKernel) -> Result<MomentValue> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(domain(format!("θ must be positive and finite, got {theta}")));
        }
        if b.re < 0.0 {
            return Err(domain(format!("moment order needs Re(b) ≥ 0, got {b}")));
        }
        let value = if b == Complex64::new(0.0, 0.0) {
            Complex64::new(1.0, 0.0)
        } else {
            let two_pi_lambda = 2.0 * PI * self.params.bs_density;
            let noise = self.params.noise;
            self.serving_average(theta, |_, kappa| {
                let exponent = match kernel {
                    MomentKernel::PgflExact => b * kappa * noise + self.phi(kappa, b)? * two_pi_lambda,
                    MomentKernel::ScaledLaplace => {
                        let kb = b.re * kappa;
                        if b.im != 0.0 {
                            return Err(domain("the scaled-laplace kernel is defined for real orders only"));
                        }
                        Complex64::new(kb * noise, 0.0)
                            + self.phi(kb, Complex64::new(1.0, 0.0))? * two_pi_lambda
                    }
                };
                Ok((-exponent).exp())
            })?
        };
        Ok(MomentValue { order: b, theta, value })
    }

    pub fn real_moment(&self, theta: f64, b: f64, kernel: MomentKernel) -> Result<f64> {
        Ok(self.moment(theta, Complex64::new(b, 0.0), kernel)?.value.re)
    }

    pub fn beta_shape(&self, theta: f64, kernel: MomentKernel) -> Result<BetaShape> {
        let m1 = self.real_moment(theta, 1.0, kernel)?;
        let m2 = self.real_moment(theta, 2.0, kernel)?;
        BetaShape::from_moments(m1, m2)
    }

    /// Beta approximation `1 − I_γ(a, b)` of the meta distribution.
    pub fn beta_meta(&self, theta: f64, gamma: f64, kernel: MomentKernel) -> Result<f64> {
        check_gamma(gamma)?;
        self.beta_shape(theta, kernel)?.ccdf(gamma)
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain(format!("γ must lie in (0, 1), got {gamma}")));
    }
    Ok(())
}

/// Laplace transform `E[e^(−sI)]` of the interference at the typical BS, by
/// direct nested quadrature over the interferer distance and its link length.
pub fn laplace_interference(s: Complex64, params: &SystemParams) -> Result<Complex64> {
    params.validate()?;
    if s.re < 0.0 {
        return Err(domain(format!("Laplace argument needs Re(s) ≥ 0, got {s}")));
    }
    if s == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let l = PI * params.bs_density;
    let alpha = params.path_loss;
    let rc = params.crossover_radius();
    let inner_tol = ToleranceBudget::default().inner;
    let mut failure = None;
    let outer = |r: f64| -> Complex64 {
        if r <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let ra = r.powf(-alpha);
        let mut pts = vec![0.0];
        if rc < r {
            pts.push(rc);
        }
        pts.push(r);
        let res = Integrator::with_tol(0.0, inner_tol).integrate_breaks(
            |x: f64| {
                let v = s * params.tx_power(x) * ra;
                v / (v + 1.0) * (2.0 * l * x * (-l * x * x).exp())
            },
            &pts,
        );
        if !res.converged {
            failure.get_or_insert(Error::NoConvergence {
                estimate: res.value.re,
                error: res.abs_error_estimate,
                evaluations: res.evaluations,
            });
        }
        res.value * r
    };
    let scale = params.mean_cell_radius();
    let mut pts = vec![0.0];
    if rc < 10.0 * scale {
        pts.push(rc);
    }
    pts.push(scale.max(rc * 1.5));
    pts.push(f64::INFINITY);
    pts.sort_by(|a, b| a.total_cmp(b));
    let v = Integrator::with_tol(0.0, ToleranceBudget::default().middle)
        .scale(scale)
        .integrate_breaks(outer, &pts)
        .into_result()?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((-v * (2.0 * PI * params.bs_density)).exp())
}

/// `b`-th moment of the conditional success probability.
pub fn moment_b(theta: f64, b: Complex64, params: &SystemParams, kernel: MomentKernel) -> Result<MomentValue> {
    MomentEngine::new(*params)?.moment(theta, b, kernel)
}

/// Beta approximation with the exact PGFL moments.
pub fn beta_meta(theta: f64, gamma: f64, params: &SystemParams) -> Result<f64> {
    MomentEngine::new(*params)?.beta_meta(theta, gamma, MomentKernel::PgflExact)
}

/// Meta distribution by Gil-Pelaez inversion of the imaginary moments.
pub fn gil_pelaez_meta(theta: f64, gamma: f64, params: &SystemParams) -> Result<f64> {
    let engine = MomentEngine::new(*params)?;
    let report = engine.gil_pelaez(theta, &[gamma], &GilPelaezOptions::default())?;
    Ok(report.values[0])
}

#[cfg(test)]
mod tests;
