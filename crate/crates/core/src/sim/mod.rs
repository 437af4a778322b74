//! Monte-Carlo reference: PPP base stations, one uplink user per Voronoi
//! cell, truncated fractional power control and Rayleigh fading.
//!
//! Each realization places a Poisson number of base stations uniformly in a
//! disk plus one pinned at the origin. Links are pooled over every UE that
//! lies in the interior disk of radius `window_radius − guard_margin`; by
//! default each link is weighted by the area of its cell, so the pooled link
//! is the one serving a uniformly placed user and its length follows the
//! Rayleigh law exactly.

mod voronoi;

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::SystemParams;
use crate::numerics::{stream, StreamRng};

pub use voronoi::{Point, Polygon};

/// How the conditional success probability of a link is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Closed-form average over the exponential fading (exact per realization).
    #[default]
    AnalyticConditional,
    /// Fraction of successes over this many independent fading vectors.
    FadingDraws(usize),
}

/// Weight of a pooled link in the empirical averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkWeighting {
    /// Cell area: the link of a uniformly placed user.
    #[default]
    Area,
    /// Every link counts once: the link of a typical cell.
    PerLink,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub n_realizations: usize,
    /// Radius of the simulated disk, meters.
    pub window_radius: f64,
    pub seed: u64,
    pub estimator: Estimator,
    /// Width of the outer ring whose users only act as interferers, meters.
    pub guard_margin: f64,
    pub weighting: LinkWeighting,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::for_params(&SystemParams::default())
    }
}

impl SimConfig {
    /// Window of 15 mean cell radii with a guard ring of 5.
    pub fn for_params(params: &SystemParams) -> Self {
        let m = params.mean_cell_radius();
        Self {
            n_realizations: 500,
            window_radius: 15.0 * m,
            seed: 1,
            estimator: Estimator::AnalyticConditional,
            guard_margin: 5.0 * m,
            weighting: LinkWeighting::Area,
        }
    }

    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        let m = params.mean_cell_radius();
        if self.n_realizations == 0 {
            return Err(Error::InvalidParameter {
                field: "n_realizations",
                reason: "must be positive".into(),
            });
        }
        if !(self.guard_margin >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "guard_margin",
                reason: format!("must be nonnegative, got {}", self.guard_margin),
            });
        }
        if !(self.window_radius >= (10.0 * m + self.guard_margin) * (1.0 - 1e-12)) {
            return Err(Error::InvalidParameter {
                field: "window_radius",
                reason: format!(
                    "{} m does not cover 10 mean cell radii ({:.1} m) plus the guard margin",
                    self.window_radius,
                    10.0 * m
                ),
            });
        }
        if let Estimator::FadingDraws(0) = self.estimator {
            return Err(Error::InvalidParameter {
                field: "estimator",
                reason: "fading-draws needs at least one draw".into(),
            });
        }
        Ok(())
    }

    pub fn interior_radius(&self) -> f64 {
        self.window_radius - self.guard_margin
    }
}

/// One network snapshot. Index `typical_bs_index` is the BS at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub bs_points: Vec<Point>,
    /// Index-aligned with `bs_points`.
    pub ue_points: Vec<Point>,
    pub cell_areas: Vec<f64>,
    pub typical_bs_index: usize,
    pub window_radius: f64,
    /// Attempts discarded before this one (failed rejection sampling or a
    /// typical cell reaching the guard ring).
    pub resampled: usize,
}

const MAX_ATTEMPTS: u64 = 16;
const MAX_REJECTIONS: usize = 100_000;

fn uniform_in_disk(rng: &mut StreamRng, radius: f64) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let t = 2.0 * PI * rng.random::<f64>();
    [r * t.cos(), r * t.sin()]
}

fn try_sample(params: &SystemParams, cfg: &SimConfig, rng: &mut StreamRng) -> Result<Realization> {
    let w = cfg.window_radius;
    let mean = params.bs_density * PI * w * w;
    let count = Poisson::new(mean).map_err(|e| Error::Simulation(e.to_string()))?.sample(rng) as usize;
    let mut bs = Vec::with_capacity(count + 1);
    bs.push([0.0, 0.0]);
    for _ in 0..count {
        bs.push(uniform_in_disk(rng, w));
    }
    let mut ue = Vec::with_capacity(bs.len());
    let mut areas = Vec::with_capacity(bs.len());
    for k in 0..bs.len() {
        let cell = voronoi::cell(&bs, k, w);
        if k == 0 && cell.max_distance(bs[0]) + cfg.guard_margin > w {
            return Err(Error::Simulation("typical cell reaches the guard ring".into()));
        }
        let (lo, hi) = cell.bounding_box();
        let mut placed = None;
        for _ in 0..MAX_REJECTIONS {
            let p = [lo[0] + (hi[0] - lo[0]) * rng.random::<f64>(), lo[1] + (hi[1] - lo[1]) * rng.random::<f64>()];
            if p[0].hypot(p[1]) <= w && cell.contains(p) {
                placed = Some(p);
                break;
            }
        }
        let p = placed.ok_or_else(|| Error::Simulation(format!("rejection sampling failed in cell {k}")))?;
        ue.push(p);
        areas.push(cell.area());
    }
    Ok(Realization {
        bs_points: bs,
        ue_points: ue,
        cell_areas: areas,
        typical_bs_index: 0,
        window_radius: w,
        resampled: 0,
    })
}

/// Draws realization `index` of the run with seed `cfg.seed`. A failed
/// attempt is discarded and redrawn from a fresh stream.
pub fn sample_network(params: &SystemParams, cfg: &SimConfig, index: u64) -> Result<(Realization, StreamRng)> {
    params.validate()?;
    cfg.validate(params)?;
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = stream(cfg.seed, index | (attempt << 48));
        match try_sample(params, cfg, &mut rng) {
            Ok(mut r) => {
                r.resampled = attempt as usize;
                return Ok((r, rng));
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Simulation("no attempt made".into())))
}

impl Realization {
    /// Length of the link served by BS `k`.
    pub fn link_length(&self, k: usize) -> f64 {
        voronoi::dist(self.ue_points[k], self.bs_points[k])
    }

    /// Writes the realization as CSV with columns `kind,x_m,y_m`.
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "kind,x_m,y_m")?;
        for p in &self.bs_points {
            writeln!(out, "bs,{},{}", p[0], p[1])?;
        }
        for p in &self.ue_points {
            writeln!(out, "ue,{},{}", p[0], p[1])?;
        }
        out.flush()
    }

    /// Received strength of the link at `k` and the interference factors
    /// `p_j·D_j^(−α)` of every other UE at BS `k`.
    fn link_terms(&self, k: usize, params: &SystemParams) -> (f64, Vec<f64>) {
        let x = params.rx_strength(self.link_length(k));
        let bs = self.bs_points[k];
        let terms = (0..self.ue_points.len())
            .filter(|&j| j != k)
            .map(|j| {
                let p = params.tx_power(self.link_length(j));
                p * voronoi::dist(self.ue_points[j], bs).powf(-params.path_loss)
            })
            .collect();
        (x, terms)
    }

    /// Conditional success probability of the link at BS `k`, averaged over
    /// the exponential fading in closed form.
    pub fn link_success(&self, k: usize, theta: f64, params: &SystemParams) -> f64 {
        self.link_log_success(k, &[theta], params)[0].exp()
    }

    /// `ln P_s` of the link at BS `k` at each θ. Kept in the log domain since
    /// long noise-limited links underflow.
    pub fn link_log_success(&self, k: usize, thetas: &[f64], params: &SystemParams) -> Vec<f64> {
        let (x, terms) = self.link_terms(k, params);
        thetas.iter().map(|&t| analytic_log_success(x, &terms, t, params.noise)).collect()
    }

    /// Success fractions at each θ over `draws` fading vectors.
    pub fn link_success_by_fading(
        &self,
        k: usize,
        thetas: &[f64],
        params: &SystemParams,
        draws: usize,
        rng: &mut StreamRng,
    ) -> Vec<f64> {
        let (x, terms) = self.link_terms(k, params);
        let mut hits = vec![0usize; thetas.len()];
        for _ in 0..draws {
            let h: f64 = Exp1.sample(rng);
            let mut i = 0.0;
            for t in &terms {
                let g: f64 = Exp1.sample(rng);
                i += t * g;
            }
            let sinr = h * x / (params.noise + i);
            for (c, &th) in hits.iter_mut().zip(thetas) {
                if sinr > th {
                    *c += 1;
                }
            }
        }
        hits.into_iter().map(|c| c as f64 / draws as f64).collect()
    }
}

fn analytic_log_success(x: f64, terms: &[f64], theta: f64, noise: f64) -> f64 {
    let s = theta / x;
    let log: f64 = terms.iter().map(|t| (s * t).ln_1p()).sum();
    -s * noise - log
}

/// Conditional success probability of the typical link (BS at the origin).
pub fn conditional_success(real: &Realization, theta: f64, params: &SystemParams) -> f64 {
    real.link_success(real.typical_bs_index, theta, params)
}

/// Pooled links of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationLinks {
    pub weights: Vec<f64>,
    /// `log_success[l][t]`: `ln P_s` of link `l` at threshold `thetas[t]`.
    pub log_success: Vec<Vec<f64>>,
    pub resampled: usize,
}

/// Conditional success probabilities of every pooled link of every realization.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSample {
    pub thetas: Vec<f64>,
    pub realizations: Vec<RealizationLinks>,
}

fn realization_links(params: &SystemParams, cfg: &SimConfig, thetas: &[f64], index: u64) -> Result<RealizationLinks> {
    let (real, mut rng) = sample_network(params, cfg, index)?;
    let inner = cfg.interior_radius();
    let mut weights = Vec::new();
    let mut log_success = Vec::new();
    for k in 0..real.bs_points.len() {
        let u = real.ue_points[k];
        if u[0].hypot(u[1]) > inner {
            continue;
        }
        weights.push(match cfg.weighting {
            LinkWeighting::Area => real.cell_areas[k],
            LinkWeighting::PerLink => 1.0,
        });
        log_success.push(match cfg.estimator {
            Estimator::AnalyticConditional => real.link_log_success(k, thetas, params),
            Estimator::FadingDraws(n) => real
                .link_success_by_fading(k, thetas, params, n, &mut rng)
                .into_iter()
                .map(f64::ln)
                .collect(),
        });
    }
    Ok(RealizationLinks {
        weights,
        log_success,
        resampled: real.resampled,
    })
}

/// Simulates `cfg.n_realizations` snapshots in parallel. The result does not
/// depend on the number of threads.
pub fn sample_links(params: &SystemParams, cfg: &SimConfig, thetas: &[f64]) -> Result<LinkSample> {
    if thetas.is_empty() {
        return Err(domain("empty θ grid"));
    }
    if let Some(t) = thetas.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(domain(format!("SINR threshold must be positive, got {t}")));
    }
    params.validate()?;
    cfg.validate(params)?;
    let realizations = (0..cfg.n_realizations as u64)
        .into_par_iter()
        .map(|i| realization_links(params, cfg, thetas, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(LinkSample {
        thetas: thetas.to_vec(),
        realizations,
    })
}

/// Weighted mean with a standard error that treats realizations as
/// independent clusters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterMean {
    pub mean: f64,
    pub std_error: f64,
}

impl LinkSample {
    pub fn n_links(&self) -> usize {
        self.realizations.iter().map(|r| r.weights.len()).sum()
    }

    pub fn resampled(&self) -> usize {
        self.realizations.iter().map(|r| r.resampled).sum()
    }

    /// Ratio estimator `Σ w·g / Σ w` of `g(ln P_s)` at threshold index `t`.
    pub fn mean_of<F: Fn(f64) -> f64>(&self, t: usize, g: F) -> ClusterMean {
        let per: Vec<(f64, f64)> = self
            .realizations
            .iter()
            .map(|r| {
                let s: f64 = r.weights.iter().zip(&r.log_success).map(|(w, p)| w * g(p[t])).sum();
                (s, r.weights.iter().sum())
            })
            .collect();
        let total_w: f64 = per.iter().map(|p| p.1).sum();
        if total_w <= 0.0 {
            return ClusterMean {
                mean: f64::NAN,
                std_error: f64::NAN,
            };
        }
        let mean = per.iter().map(|p| p.0).sum::<f64>() / total_w;
        let n = per.len() as f64;
        let var: f64 = per.iter().map(|(s, w)| (s - mean * w).powi(2)).sum::<f64>();
        let std_error = if n > 1.0 {
            (var * n / (n - 1.0)).sqrt() / total_w
        } else {
            f64::NAN
        };
        ClusterMean { mean, std_error }
    }

    /// Empirical `P(P_s > γ)` per threshold, with 95% Wilson half-widths.
    pub fn meta(&self, gammas: &[f64]) -> EmpiricalMeta {
        let mut values = Vec::with_capacity(self.thetas.len());
        let mut ci = Vec::with_capacity(self.thetas.len());
        let n_eff = self.effective_size();
        for t in 0..self.thetas.len() {
            let mut row = Vec::with_capacity(gammas.len());
            let mut row_ci = Vec::with_capacity(gammas.len());
            for &g in gammas {
                let lg = g.ln();
                let m = self.mean_of(t, |lp| if lp > lg { 1.0 } else { 0.0 });
                // effective size from the clustered variance when informative
                let n = if m.std_error > 0.0 {
                    m.mean * (1.0 - m.mean) / (m.std_error * m.std_error)
                } else {
                    n_eff
                };
                row.push(m.mean);
                row_ci.push(wilson_half_width(m.mean, n));
            }
            values.push(row);
            ci.push(row_ci);
        }
        EmpiricalMeta {
            thetas: self.thetas.clone(),
            gammas: gammas.to_vec(),
            values,
            ci_half_width: ci,
            n_links: self.n_links(),
            n_effective: n_eff,
        }
    }

    /// Kish effective sample size of the link weights.
    pub fn effective_size(&self) -> f64 {
        let (s, s2) = self
            .realizations
            .iter()
            .flat_map(|r| r.weights.iter())
            .fold((0.0, 0.0), |(a, b), w| (a + w, b + w * w));
        if s2 > 0.0 {
            s * s / s2
        } else {
            0.0
        }
    }
}

/// 95% Wilson score half-width for a proportion `p` out of `n` trials.
pub fn wilson_half_width(p: f64, n: f64) -> f64 {
    if !(n > 0.0) {
        return f64::NAN;
    }
    let z = 1.959_963_984_540_054;
    let z2 = z * z;
    z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// Empirical meta distribution on a (θ, γ) grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeta {
    /// Linear thresholds.
    pub thetas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// `values[t][g]`.
    pub values: Vec<Vec<f64>>,
    pub ci_half_width: Vec<Vec<f64>>,
    pub n_links: usize,
    pub n_effective: f64,
}

/// Fraction of links whose conditional success probability exceeds each γ.
pub fn empirical_meta(params: &SystemParams, cfg: &SimConfig, thetas: &[f64], gammas: &[f64]) -> Result<EmpiricalMeta> {
    if gammas.is_empty() {
        return Err(domain("empty γ grid"));
    }
    Ok(sample_links(params, cfg, thetas)?.meta(gammas))
}

/// Sample mean of `P_s^b` with its standard error.
pub fn empirical_moment(params: &SystemParams, cfg: &SimConfig, theta: f64, b: f64) -> Result<ClusterMean> {
    if !(b >= 0.0) {
        return Err(domain(format!("moment order must be nonnegative, got {b}")));
    }
    let sample = sample_links(params, cfg, &[theta])?;
    Ok(sample.mean_of(0, |lp| if b == 0.0 { 1.0 } else { (b * lp).exp() }))
}

/// Radius beyond which the analysis-model interferers are not drawn.
fn interference_cutoff(params: &SystemParams, d1: f64) -> f64 {
    (60.0 * params.mean_cell_radius()).max(4.0 * d1)
}

/// One draw of the interference at the typical BS under the analysis model:
/// interferers form a PPP of intensity `λ(1 − e^(−πλd²))` (homogeneous PPP of
/// intensity λ thinned), link lengths are truncated Rayleigh on `[0, d]`,
/// powers follow the power-control law and fading is exponential.
///
/// With `d1 = Some(d)` only interferers beyond `d` are drawn, which is the
/// interference other than the nearest one given that the nearest is at `d`.
pub fn sample_nonhomogeneous_interference(params: &SystemParams, d1: Option<f64>, rng: &mut StreamRng) -> Result<f64> {
    params.validate()?;
    let inner = match d1 {
        Some(d) if !(d > 0.0 && d.is_finite()) => {
            return Err(domain(format!("nearest-interferer distance must be positive, got {d}")))
        }
        Some(d) => d,
        None => 0.0,
    };
    let outer = interference_cutoff(params, inner);
    let lam = params.bs_density;
    let l = PI * lam;
    let mean = lam * PI * (outer * outer - inner * inner);
    let n = Poisson::new(mean).map_err(|e| Error::Simulation(e.to_string()))?.sample(rng) as usize;
    let mut total = 0.0;
    for _ in 0..n {
        let d = (inner * inner + (outer * outer - inner * inner) * rng.random::<f64>()).sqrt();
        if !thinning_keeps(d, l, rng) {
            continue;
        }
        // inverse CDF of the Rayleigh law truncated to [0, d]
        let u: f64 = rng.random();
        let r = (-(u * (-l * d * d).exp_m1()).ln_1p() / l).sqrt();
        let h: f64 = Exp1.sample(rng);
        total += h * params.tx_power(r) * d.powf(-params.path_loss);
    }
    Ok(total)
}

/// Keeps a point at distance `d` with probability `1 − e^(−πλd²)`.
pub(crate) fn thinning_keeps(d: f64, l: f64, rng: &mut StreamRng) -> bool {
    rng.random::<f64>() < -(-l * d * d).exp_m1()
}

#[cfg(test)]
mod tests;
