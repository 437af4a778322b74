//! Dominant-interferer approximation of the meta distribution.
//!
//! The nearest interferer at distance `r` from the typical BS is kept exactly,
//! with its transmit power replaced by the conditional mean `p̄(r)`. All
//! farther interferers enter through their mean power `G(r)`. The conditional
//! success probability then reads
//!
//! ```text
//! P_s(u | r) ≈ exp(−S(r)·u) / (1 + κ(r)·u),   S = θ(σ² + G(r)),  κ = θ p̄(r) r^(−α)
//! ```
//!
//! where `u = R_u^α / p_t(R_u)`. Its inverse in `u` is explicit through the
//! Lambert W function, and averaging the CDF of `U` over the nearest-interferer
//! distance gives the meta distribution.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::model::{
    nearest_interferer_pdf, nearest_interferer_support, serving_distance_law, SystemParams,
};
use crate::numerics::{
    find_root_monotone, lambert_w0_exp, regularized_lower_gamma, HermiteTable, Integrator,
};

/// Lower-tail mass of the nearest-interferer law dropped by the outer integral.
const LOWER_TAIL_MASS: f64 = 1e-12;
/// Upper-tail mass dropped by the outer integral.
const UPPER_TAIL_MASS: f64 = 1e-10;
/// Node spacing of the memo tables in `ln r`.
const TABLE_STEP: f64 = 0.02;
const OUTER_TOL: f64 = 1e-10;

/// Per-distance quantities entering the reliability threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdContext {
    pub nearest_distance: f64,
    pub sir_threshold: f64,
    pub reliability: f64,
    /// `S(r) = θ(σ² + G(r))`.
    pub noise_plus_residual: f64,
    /// `κ(r) = θ p̄(r) r^(−α)`.
    pub nearest_term: f64,
}

impl ThresholdContext {
    /// Approximate conditional success probability at inverse strength `u`.
    pub fn success(&self, u: f64) -> f64 {
        if self.sir_threshold == 0.0 {
            return 1.0;
        }
        (-self.noise_plus_residual * u).exp() / (1.0 + self.nearest_term * u)
    }

    /// Closed-form root `K` of `success(K) = γ` via `W₀`.
    ///
    /// With `q = S/κ`, `K = (W₀(q e^q/γ) − q)/S`; the argument is handled in
    /// the log domain so that large `q` or tiny `γ` cannot overflow.
    pub fn threshold(&self) -> f64 {
        let (s, k, g) = (self.noise_plus_residual, self.nearest_term, self.reliability);
        if g <= 0.0 {
            return f64::INFINITY;
        }
        if g >= 1.0 {
            return 0.0;
        }
        let q = s / k;
        if s == 0.0 || q < 1e-300 {
            return (1.0 / g - 1.0) / k;
        }
        let y = q.ln() + q - g.ln();
        let w = lambert_w0_exp(y);
        ((w - q) / s).max(0.0)
    }

    /// Root of `success(u) = γ` by bisection, without the Lambert W function.
    pub fn threshold_by_bisection(&self) -> Result<f64> {
        let (s, k, g) = (self.noise_plus_residual, self.nearest_term, self.reliability);
        if g <= 0.0 {
            return Ok(f64::INFINITY);
        }
        if g >= 1.0 {
            return Ok(0.0);
        }
        // both factors are at most one, so either bound alone forces P_s ≤ γ
        let mut hi = (1.0 / g - 1.0) / k;
        if s > 0.0 {
            hi = hi.min(-g.ln() / s);
        }
        find_root_monotone(|u| self.success(u) - g, 0.0, hi, hi * 1e-15)
    }
}

/// `A(z) = ∫₀^z p_t(x)·2πλ x e^(−πλx²) dx`, the mean power of a UE at link
/// length below `z` weighted by the serving-distance law.
pub(crate) fn power_mass(z: f64, params: &SystemParams) -> f64 {
    let l = PI * params.bs_density;
    let ae = params.path_loss * params.compensation;
    let s = 1.0 + 0.5 * ae;
    let front = params.power_control * l.powf(-0.5 * ae) * crate::numerics::ln_gamma(s).exp();
    let rc = params.crossover_radius();
    if z <= rc {
        return front * regularized_lower_gamma(s, l * z * z);
    }
    let at_rc = front * regularized_lower_gamma(s, l * rc * rc);
    at_rc + params.max_power * (-l * rc * rc).exp() * -(-l * (z * z - rc * rc)).exp_m1()
}

/// Conditional mean transmit power `p̄(r)` of an interferer at distance `r`.
pub fn mean_nearest_power(r: f64, params: &SystemParams) -> Result<f64> {
    if !(r > 0.0) {
        return Err(domain(format!("mean nearest power needs r > 0, got {r}")));
    }
    Ok(mean_power_unchecked(r, params))
}

fn mean_power_unchecked(r: f64, params: &SystemParams) -> f64 {
    let l = PI * params.bs_density;
    let mass = -(-l * r * r).exp_m1();
    if mass < 1e-12 {
        // small-r limit: the truncated law is ∝ x on [0, r]
        let ae = params.path_loss * params.compensation;
        return params.tx_power(r) * 2.0 / (ae + 2.0);
    }
    power_mass(r, params) / mass
}

/// Mean residual interference `G(d)` from all interferers beyond distance `d`.
pub fn residual_interference(d1: f64, params: &SystemParams) -> Result<f64> {
    params.validate()?;
    if !(d1 > 0.0) {
        return Err(domain(format!("residual interference needs d1 > 0, got {d1}")));
    }
    let alpha = params.path_loss;
    let rc = params.crossover_radius();
    let integrand = |z: f64| power_mass(z, params) * z.powf(1.0 - alpha);
    let mut points = vec![d1];
    if rc > d1 {
        points.push(rc);
    }
    points.push(f64::INFINITY);
    let scale = points[points.len() - 2];
    let v = Integrator::with_tol(0.0, 1e-12)
        .scale(scale)
        .integrate_breaks(integrand, &points)
        .into_result()?;
    Ok(2.0 * PI * params.bs_density * v)
}

/// Approximate conditional success probability given the inverse received
/// strength `u` of the typical link and the nearest-interferer distance.
pub fn conditional_success_approx(u: f64, d1: f64, theta: f64, params: &SystemParams) -> Result<f64> {
    if !(u > 0.0) || !(theta >= 0.0) {
        return Err(domain("conditional success needs u > 0 and θ ≥ 0"));
    }
    let ctx = exact_context(d1, theta, 0.5, params)?;
    Ok(ctx.success(u))
}

fn exact_context(r: f64, theta: f64, gamma: f64, params: &SystemParams) -> Result<ThresholdContext> {
    let g = residual_interference(r, params)?;
    let pbar = mean_power_unchecked(r, params);
    Ok(ThresholdContext {
        nearest_distance: r,
        sir_threshold: theta,
        reliability: gamma,
        noise_plus_residual: theta * (params.noise + g),
        nearest_term: theta * pbar * r.powf(-params.path_loss),
    })
}

/// Reliability threshold `K(r, θ, γ)` from the exact `G` and `p̄`.
pub fn reliability_threshold(r: f64, theta: f64, gamma: f64, params: &SystemParams) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(domain(format!("threshold needs θ > 0, got {theta}")));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(domain(format!("reliability must lie in [0, 1], got {gamma}")));
    }
    Ok(exact_context(r, theta, gamma, params)?.threshold())
}

/// CDF of the inverse received strength `U = R_u^α / p_t(R_u)`.
pub fn inverse_strength_cdf(x: f64, params: &SystemParams) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    serving_distance_law(params).cdf(params.radius_for_inverse_strength(x))
}

/// Meta distribution by the dominant-interferer approximation.
pub fn meta_proposed(theta: f64, gamma: f64, params: &SystemParams) -> Result<f64> {
    DominantModel::new(*params)?.meta(theta, gamma)
}

/// Same integral as [`meta_proposed`] with the threshold found by bisection.
pub fn meta_direct(theta: f64, gamma: f64, params: &SystemParams) -> Result<f64> {
    DominantModel::new(*params)?.meta_direct(theta, gamma)
}

/// Log-spaced nodes on `[a, b]` with the saturation radius as an exact node
/// and a finer step just above it, where `p̄` bends sharply.
fn table_nodes(a: f64, b: f64, ln_rc: f64) -> Vec<f64> {
    let mut breaks = vec![a, b];
    for x in [ln_rc - 0.1, ln_rc, ln_rc + 1.0] {
        if x > a && x < b {
            breaks.push(x);
        }
    }
    breaks.sort_by(|x, y| x.total_cmp(y));
    let mut nodes = vec![a];
    for w in breaks.windows(2) {
        let fine = w[0] >= ln_rc - 0.1 - 1e-12 && w[1] <= ln_rc + 1.0 + 1e-12;
        let step = if fine { TABLE_STEP / 4.0 } else { TABLE_STEP };
        let k = ((w[1] - w[0]) / step).ceil().max(1.0) as usize;
        for j in 1..=k {
            nodes.push(if j == k { w[1] } else { w[0] + (w[1] - w[0]) * j as f64 / k as f64 });
        }
    }
    nodes
}

/// Memoized `G` and `p̄` over the effective support of the nearest-interferer
/// distance. Immutable once built and safe to share between threads.
#[derive(Debug, Clone)]
pub struct DominantModel {
    params: SystemParams,
    r_lo: f64,
    r_hi: f64,
    ln_residual: HermiteTable<f64>,
    ln_mean_power: HermiteTable<f64>,
}

impl DominantModel {
    pub fn new(params: SystemParams) -> Result<Self> {
        params.validate()?;
        let (r_lo, _) = nearest_interferer_support(&params, LOWER_TAIL_MASS);
        let (_, r_hi) = nearest_interferer_support(&params, UPPER_TAIL_MASS);
        let (r_lo, r_hi) = (0.5 * r_lo, 1.5 * r_hi);
        let nodes = table_nodes(r_lo.ln(), r_hi.ln(), params.crossover_radius().ln());
        let n = nodes.len();
        let l = PI * params.bs_density;
        let alpha = params.path_loss;
        let mut lg = Vec::with_capacity(n);
        let mut lg_slope = Vec::with_capacity(n);
        let mut lp = Vec::with_capacity(n);
        let mut lp_slope = Vec::with_capacity(n);
        for &t in &nodes {
            let r = t.exp();
            let g = residual_interference(r, &params)?;
            let mass = power_mass(r, &params);
            // dG/dr = −2πλ A(r) r^(1−α)
            lg.push(g.ln());
            lg_slope.push(-2.0 * PI * params.bs_density * mass * r.powf(2.0 - alpha) / g);
            let pbar = mean_power_unchecked(r, &params);
            let cdf = -(-l * r * r).exp_m1();
            let w = 2.0 * l * r * (-l * r * r).exp();
            let dp = if cdf < 1e-12 {
                // p̄ ∝ r^(αε) near the origin
                alpha * params.compensation * pbar / r
            } else {
                w * (params.tx_power(r) - pbar) / cdf
            };
            lp.push(pbar.ln());
            lp_slope.push(r * dp / pbar);
        }
        Ok(Self {
            params,
            r_lo,
            r_hi,
            ln_residual: HermiteTable::new(nodes.clone(), lg, lg_slope),
            ln_mean_power: HermiteTable::new(nodes, lp, lp_slope),
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Table lookup of `G(r)`; exact quadrature outside the tabulated range.
    pub fn residual(&self, r: f64) -> f64 {
        if r >= self.r_lo && r <= self.r_hi {
            self.ln_residual.eval(r.ln()).exp()
        } else {
            residual_interference(r, &self.params).unwrap_or(f64::NAN)
        }
    }

    /// Table lookup of `p̄(r)`.
    pub fn mean_power(&self, r: f64) -> f64 {
        if r >= self.r_lo && r <= self.r_hi {
            self.ln_mean_power.eval(r.ln()).exp()
        } else {
            mean_power_unchecked(r, &self.params)
        }
    }

    pub fn context(&self, r: f64, theta: f64, gamma: f64) -> ThresholdContext {
        ThresholdContext {
            nearest_distance: r,
            sir_threshold: theta,
            reliability: gamma,
            noise_plus_residual: theta * (self.params.noise + self.residual(r)),
            nearest_term: theta * self.mean_power(r) * r.powf(-self.params.path_loss),
        }
    }

    fn check(theta: f64, gamma: f64) -> Result<()> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(domain(format!("θ must be positive and finite, got {theta}")));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(domain(format!("γ must lie in (0, 1), got {gamma}")));
        }
        Ok(())
    }

    fn outer<F>(&self, mut threshold: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let (lo, _) = nearest_interferer_support(&self.params, LOWER_TAIL_MASS);
        let (_, hi) = nearest_interferer_support(&self.params, UPPER_TAIL_MASS);
        let rc = self.params.crossover_radius();
        let mut points = vec![lo];
        if rc > lo && rc < hi {
            points.push(rc);
        }
        points.push(hi);
        let mut failure = None;
        let res = Integrator::with_tol(OUTER_TOL, 0.0).integrate_breaks(
            |r| match threshold(r) {
                Ok(k) => inverse_strength_cdf(k, &self.params) * nearest_interferer_pdf(r, &self.params),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            &points,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(res.into_result()?.clamp(0.0, 1.0))
    }

    /// `F̄(θ, γ)` with the Lambert-W threshold.
    pub fn meta(&self, theta: f64, gamma: f64) -> Result<f64> {
        Self::check(theta, gamma)?;
        self.outer(|r| Ok(self.context(r, theta, gamma).threshold()))
    }

    /// `F̄(θ, γ)` with the threshold found by bisection.
    pub fn meta_direct(&self, theta: f64, gamma: f64) -> Result<f64> {
        Self::check(theta, gamma)?;
        self.outer(|r| self.context(r, theta, gamma).threshold_by_bisection())
    }
}
