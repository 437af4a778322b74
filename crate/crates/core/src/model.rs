//! System parameters, the truncated fractional power-control law and the
//! distance distributions seen from the typical base station.
//!
//! All powers are in watts and all distances in meters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Physical-layer constants of the network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Base-station density λ, per m².
    pub bs_density: f64,
    /// Path-loss exponent α (> 2).
    pub path_loss: f64,
    /// Compensation factor ε in (0, 1].
    pub compensation: f64,
    /// Power-control factor ρ, watts.
    pub power_control: f64,
    /// Maximum transmit power, watts.
    pub max_power: f64,
    /// Noise power σ², watts.
    pub noise: f64,
}

impl Default for SystemParams {
    /// λ = 1e-5 m⁻², α = 4, ε = 0.4, ρ = 0.008 mW, p_max = 200 mW, σ² = 1e-9 W.
    fn default() -> Self {
        Self {
            bs_density: 1e-5,
            path_loss: 4.0,
            compensation: 0.4,
            power_control: 8e-6,
            max_power: 0.2,
            noise: 1e-9,
        }
    }
}

impl SystemParams {
    pub fn new(
        bs_density: f64,
        path_loss: f64,
        compensation: f64,
        power_control: f64,
        max_power: f64,
        noise: f64,
    ) -> Result<Self> {
        let p = Self {
            bs_density,
            path_loss,
            compensation,
            power_control,
            max_power,
            noise,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_compensation(mut self, compensation: f64) -> Self {
        self.compensation = compensation;
        self
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: &str) -> Error {
            Error::InvalidParameter {
                field,
                reason: reason.to_string(),
            }
        }
        if !(self.bs_density > 0.0 && self.bs_density.is_finite()) {
            return Err(bad("bs_density", "must be positive and finite"));
        }
        if !(self.path_loss > 2.0 && self.path_loss.is_finite()) {
            return Err(bad("path_loss", "must exceed 2 for the interference to be finite"));
        }
        if !(self.compensation > 0.0 && self.compensation <= 1.0) {
            return Err(bad("compensation", "must lie in (0, 1]"));
        }
        if !(self.power_control > 0.0 && self.power_control.is_finite()) {
            return Err(bad("power_control", "must be positive and finite"));
        }
        if !(self.max_power > 0.0 && self.max_power.is_finite()) {
            return Err(bad("max_power", "must be positive and finite"));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(bad("noise", "must be non-negative and finite"));
        }
        Ok(())
    }

    /// Link length at which the power control saturates at `max_power`.
    pub fn crossover_radius(&self) -> f64 {
        (self.max_power / self.power_control).powf(1.0 / (self.path_loss * self.compensation))
    }

    /// Mean distance scale `1/sqrt(πλ)`.
    pub fn mean_cell_radius(&self) -> f64 {
        1.0 / (PI * self.bs_density).sqrt()
    }

    /// Transmit power `min(p_max, ρ·r^(αε))` without argument checks.
    #[inline]
    pub fn tx_power(&self, r: f64) -> f64 {
        let p = self.power_control * r.powf(self.path_loss * self.compensation);
        p.min(self.max_power)
    }

    /// Received strength `p_t(r)·r^(−α)` without argument checks.
    #[inline]
    pub fn rx_strength(&self, r: f64) -> f64 {
        self.tx_power(r) * r.powf(-self.path_loss)
    }

    /// `r^α / p_t(r)`, the reciprocal of the received strength.
    #[inline]
    pub fn inverse_strength(&self, r: f64) -> f64 {
        r.powf(self.path_loss) / self.tx_power(r)
    }

    /// Crossover of `inverse_strength` between its two branches,
    /// `u_c = (p_max/ρ)^(1/ε) / p_max`.
    pub fn inverse_strength_crossover(&self) -> f64 {
        (self.max_power / self.power_control).powf(1.0 / self.compensation) / self.max_power
    }

    /// Link length whose inverse strength equals `u` (the inverse of
    /// [`Self::inverse_strength`]); for ε = 1 values below the crossover map to
    /// the saturation radius.
    pub fn radius_for_inverse_strength(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let (alpha, eps) = (self.path_loss, self.compensation);
        if eps >= 1.0 {
            // U ≡ 1/ρ below saturation; the relative slack absorbs roundoff in 1/ρ
            if u * self.power_control < 1.0 - 1e-14 {
                return 0.0;
            }
            return (u * self.max_power).powf(1.0 / alpha).max(self.crossover_radius());
        }
        if u < self.inverse_strength_crossover() {
            (u * self.power_control).powf(1.0 / (alpha * (1.0 - eps)))
        } else {
            (u * self.max_power).powf(1.0 / alpha)
        }
    }
}

/// Distances attached to one interfering link, seen from the typical BS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkDistances {
    /// Typical UE to its serving (typical) BS.
    pub serving: f64,
    /// Interferer to its own serving BS.
    pub interferer_link: f64,
    /// Interferer to the typical BS.
    pub interferer_to_bs: f64,
    /// Nearest interferer to the typical BS.
    pub nearest_interferer: f64,
}

impl LinkDistances {
    pub fn new(
        serving: f64,
        interferer_link: f64,
        interferer_to_bs: f64,
        nearest_interferer: f64,
    ) -> Result<Self> {
        let all = [serving, interferer_link, interferer_to_bs, nearest_interferer];
        if all.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(domain("link distances must be finite and non-negative"));
        }
        if interferer_link > interferer_to_bs {
            return Err(domain(format!(
                "interferer link {interferer_link} m exceeds its distance {interferer_to_bs} m to the typical BS"
            )));
        }
        Ok(Self {
            serving,
            interferer_link,
            interferer_to_bs,
            nearest_interferer,
        })
    }
}

/// Truncated fractional path-loss inversion power control.
pub fn transmit_power(r: f64, params: &SystemParams) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(domain(format!("transmit power needs r >= 0, got {r}")));
    }
    Ok(params.tx_power(r))
}

/// `p_t(r)·r^(−α)`; singular at `r = 0`.
pub fn received_strength(r: f64, params: &SystemParams) -> Result<f64> {
    if !(r > 0.0) {
        return Err(domain(format!("received strength needs r > 0, got {r}")));
    }
    Ok(params.rx_strength(r))
}

/// Rayleigh law of the serving distance, `F(r) = 1 − exp(−λπr²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServingDistanceLaw {
    pub bs_density: f64,
}

impl ServingDistanceLaw {
    pub fn pdf(&self, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        let l = PI * self.bs_density;
        2.0 * l * r * (-l * r * r).exp()
    }

    pub fn cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        -(-PI * self.bs_density * r * r).exp_m1()
    }

    /// Inverse CDF for `p` in `[0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        (-(-p).ln_1p() / (PI * self.bs_density)).sqrt()
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }
}

pub fn serving_distance_law(params: &SystemParams) -> ServingDistanceLaw {
    ServingDistanceLaw {
        bs_density: params.bs_density,
    }
}

/// Density of an interferer's own link length `r` given its distance `d_i`
/// to the typical BS (Rayleigh law truncated to `[0, d_i]`).
pub fn interferer_link_pdf(r: f64, d_i: f64, params: &SystemParams) -> Result<f64> {
    if !(d_i > 0.0) {
        return Err(domain(format!("interferer distance must be positive, got {d_i}")));
    }
    if !(r >= 0.0) || r > d_i {
        return Err(domain(format!("interferer link {r} m outside [0, {d_i}]")));
    }
    let l = PI * params.bs_density;
    Ok(2.0 * l * r * (-l * r * r).exp() / -(-l * d_i * d_i).exp_m1())
}

/// Intensity `λ(1 − exp(−πλd²))` of interfering UEs at distance `d`.
pub fn interferer_intensity(d: f64, params: &SystemParams) -> f64 {
    let l = PI * params.bs_density;
    -params.bs_density * (-l * d * d).exp_m1()
}

/// `J(r) = ∫₀^r (1 − e^(−πλz²)) z dz` in closed form.
pub fn nearest_interferer_exponent(r: f64, params: &SystemParams) -> f64 {
    let l = PI * params.bs_density;
    // r²/2 − (1 − e^(−l r²))/(2l), written to avoid cancellation at small r
    let x = l * r * r;
    if x < 1e-3 {
        // series: x²/2 − x³/6 + x⁴/24 − …, divided by 2l
        let s = x * x * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0);
        return s / (2.0 * l);
    }
    (x + (-x).exp_m1()) / (2.0 * l)
}

/// Probability that no interferer lies within `r` of the typical BS.
pub fn nearest_interferer_survival(r: f64, params: &SystemParams) -> f64 {
    (-2.0 * PI * params.bs_density * nearest_interferer_exponent(r, params)).exp()
}

/// Density of the nearest-interferer distance `D₁`.
pub fn nearest_interferer_pdf(r: f64, params: &SystemParams) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    2.0 * PI * interferer_intensity(r, params) * r * nearest_interferer_survival(r, params)
}

/// Smallest and largest `D₁` outside of which the distribution carries less
/// than `mass` on each side.
pub fn nearest_interferer_support(params: &SystemParams, mass: f64) -> (f64, f64) {
    let l = PI * params.bs_density;
    // lower: 1 − exp(−2πλJ) ≈ (l r²)²/2 for small r
    let lower = (2.0 * mass).sqrt().sqrt() / l.sqrt();
    // upper: 2πλJ = l r² − 1 + e^(−l r²) ≥ −ln(mass)
    let target = -mass.ln();
    let mut x = target + 1.0;
    for _ in 0..50 {
        x = target + 1.0 - (-x).exp();
    }
    (lower, (x / l).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Integrator;

    fn params() -> SystemParams {
        SystemParams::default()
    }

    #[test]
    fn power_at_zero_and_crossover() {
        let p = params();
        assert_eq!(transmit_power(0.0, &p).unwrap(), 0.0);
        let rc = p.crossover_radius();
        assert!((transmit_power(rc, &p).unwrap() - p.max_power).abs() < 1e-12);
        assert!(transmit_power(-1.0, &p).is_err());
    }

    #[test]
    fn crossover_branches_agree() {
        let p = params();
        let rc = 25_000f64.powf(1.0 / 1.6);
        assert!((p.crossover_radius() - rc).abs() < 1e-9 * rc);
        let unsaturated = 8e-6 * rc.powf(1.6);
        assert!((unsaturated - 0.2).abs() < 1e-12);
    }

    #[test]
    fn full_inversion_gives_constant_strength() {
        let p = params().with_compensation(1.0);
        for r in [0.5, 3.0, 10.0] {
            assert!(r < p.crossover_radius());
            assert!((received_strength(r, &p).unwrap() - p.power_control).abs() < 1e-18);
        }
    }

    #[test]
    fn strength_beyond_saturation() {
        let p = params();
        let r = 2.0 * p.crossover_radius();
        let expect = 0.2 / (r * r * r * r);
        assert!((received_strength(r, &p).unwrap() - expect).abs() < 1e-12 * expect);
        assert!(received_strength(0.0, &p).is_err());
    }

    #[test]
    fn strength_decreasing() {
        let p = params().with_compensation(0.5);
        let mut prev = f64::INFINITY;
        for i in 1..400 {
            let x = p.rx_strength(i as f64 * 5.0);
            assert!(x < prev);
            prev = x;
        }
    }

    #[test]
    fn serving_law() {
        let law = serving_distance_law(&params());
        assert_eq!(law.cdf(0.0), 0.0);
        let med = (2f64.ln() / (PI * 1e-5)).sqrt();
        assert!((law.median() - med).abs() < 1e-9);
        assert!((law.cdf(med) - 0.5).abs() < 1e-14);
        let total = Integrator::with_tol(1e-13, 0.0)
            .scale(200.0)
            .integrate(|r| law.pdf(r), 0.0, f64::INFINITY)
            .value;
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn truncated_link_law_normalized() {
        let p = params();
        for d in [50.0, 500.0, 5000.0] {
            let total = Integrator::with_tol(1e-13, 0.0)
                .integrate(|r| interferer_link_pdf(r, d, &p).unwrap(), 0.0, d)
                .value;
            assert!((total - 1.0).abs() < 1e-9, "d = {d}: {total}");
        }
        assert_eq!(interferer_link_pdf(0.0, 100.0, &p).unwrap(), 0.0);
        assert!(interferer_link_pdf(101.0, 100.0, &p).is_err());
        // far truncation recovers the serving law
        let law = serving_distance_law(&p);
        let r = 150.0;
        assert!((interferer_link_pdf(r, 1e5, &p).unwrap() - law.pdf(r)).abs() < 1e-15);
    }

    #[test]
    fn nearest_interferer_law() {
        let p = params();
        assert_eq!(nearest_interferer_pdf(0.0, &p), 0.0);
        let l = PI * p.bs_density;
        for r in [1.0, 30.0, 200.0, 900.0] {
            let quad = Integrator::with_tol(1e-14, 1e-14)
                .integrate(|z: f64| -(-l * z * z).exp_m1() * z, 0.0, r)
                .value;
            let closed = nearest_interferer_exponent(r, &p);
            assert!((quad - closed).abs() <= 1e-10 * closed.max(1e-300), "r = {r}");
        }
        let total = Integrator::with_tol(1e-12, 0.0)
            .scale(p.mean_cell_radius())
            .integrate(|r| nearest_interferer_pdf(r, &p), 0.0, f64::INFINITY)
            .value;
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn support_bounds_hold_their_mass() {
        let p = params();
        let (lo, hi) = nearest_interferer_support(&p, 1e-10);
        assert!(nearest_interferer_survival(hi, &p) <= 1.0001e-10);
        assert!(1.0 - nearest_interferer_survival(lo, &p) <= 1.0001e-10);
    }

    #[test]
    fn intensity_limits() {
        let p = params();
        assert_eq!(interferer_intensity(0.0, &p), 0.0);
        assert!((interferer_intensity(1e6, &p) - p.bs_density).abs() < 1e-20);
        let half = (2f64.ln() / (PI * p.bs_density)).sqrt();
        assert!((interferer_intensity(half, &p) - p.bs_density / 2.0).abs() < 1e-18);
        for i in 0..100 {
            assert!(interferer_intensity(i as f64 * 20.0, &p) <= p.bs_density);
        }
    }

    #[test]
    fn validation() {
        assert!(SystemParams::default().validate().is_ok());
        assert!(SystemParams::default().with_compensation(0.0).validate().is_err());
        assert!(SystemParams { path_loss: 2.0, ..SystemParams::default() }.validate().is_err());
        assert!(SystemParams::default().with_noise(-1.0).validate().is_err());
    }

    #[test]
    fn inverse_strength_roundtrip() {
        for eps in [0.3, 0.4, 0.8] {
            let p = params().with_compensation(eps);
            for r in [1.0, 20.0, 100.0, 700.0, 3000.0] {
                let u = p.inverse_strength(r);
                let back = p.radius_for_inverse_strength(u);
                assert!((back - r).abs() < 1e-9 * r, "eps {eps} r {r} back {back}");
            }
        }
    }

    #[test]
    fn link_distances_enforce_association() {
        assert!(LinkDistances::new(10.0, 5.0, 20.0, 20.0).is_ok());
        assert!(LinkDistances::new(10.0, 25.0, 20.0, 20.0).is_err());
        assert!(LinkDistances::new(-1.0, 5.0, 20.0, 20.0).is_err());
    }
}
