//! Globally adaptive Gauss-Kronrod (7/15) quadrature for real and complex
//! integrands on finite and semi-infinite ranges.
//!
//! Semi-infinite ranges `[a, ∞)` are mapped onto `[0, 1)` with
//! `x = a + L·t/(1 − t)`, where `L` is the integrator's length scale. The
//! mapped integrand `f(x(t))·L/(1 − t)²` is then integrated like any finite
//! one; Kronrod nodes never touch `t = 1`.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T> {
    pub value: T,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: QuadValue> QuadratureResult<T> {
    /// Converts a non-converged result into an error carrying the best estimate.
    pub fn into_result(self) -> crate::Result<T>
    where
        T: Into<Estimate>,
    {
        if self.converged {
            Ok(self.value)
        } else {
            Err(crate::Error::NoConvergence {
                estimate: self.value.into().0,
                error: self.abs_error_estimate,
                evaluations: self.evaluations,
            })
        }
    }
}

/// Scalar summary of an estimate used in error reports.
pub struct Estimate(pub f64);

impl From<f64> for Estimate {
    fn from(v: f64) -> Self {
        Estimate(v)
    }
}

impl From<Complex64> for Estimate {
    fn from(v: Complex64) -> Self {
        Estimate(v.re)
    }
}

/// Adaptive integrator settings. Convergence is declared once the summed
/// error estimate drops below `max(abs_tol, rel_tol·|I|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Length scale of the semi-infinite map.
    pub scale: f64,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            scale: 1.0,
        }
    }
}

struct Segment<T> {
    a: f64,
    b: f64,
    mapped: bool,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod evaluation with the QUADPACK error heuristic.
pub fn gauss_kronrod_15<T, F>(f: &mut F, a: f64, b: f64) -> (T, f64)
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.magnitude() * WGK[7];

    #[allow(clippy::needless_range_loop)]
    for j in 0..3 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g = res_g + (f1 + f2) * WG[j];
        res_k = res_k + (f1 + f2) * WGK[jtw];
        res_abs += WGK[jtw] * (f1.magnitude() + f2.magnitude());
    }
    for j in 0..4 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k = res_k + (f1 + f2) * WGK[jtwm1];
        res_abs += WGK[jtwm1] * (f1.magnitude() + f2.magnitude());
    }

    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).magnitude();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }

    let value = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut err = ((res_k - res_g) * half).magnitude();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

impl Integrator {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    /// Integrates `f` over `[a, b]`; `b` may be `+∞`.
    pub fn integrate<T, F>(&self, f: F, a: f64, b: f64) -> QuadratureResult<T>
    where
        T: QuadValue,
        F: FnMut(f64) -> T,
    {
        self.integrate_breaks(f, &[a, b])
    }

    /// Integrates over consecutive segments `points[0]..points[1]..`. Only the
    /// last point may be `+∞`. Interior points are typically kinks of `f`.
    pub fn integrate_breaks<T, F>(&self, mut f: F, points: &[f64]) -> QuadratureResult<T>
    where
        T: QuadValue,
        F: FnMut(f64) -> T,
    {
        assert!(points.len() >= 2, "need at least one segment");
        let n = points.len();
        let tail = points[n - 1].is_infinite();
        let mut segs: Vec<(f64, f64, bool)> = points
            .windows(2)
            .take(if tail { n - 2 } else { n - 1 })
            .map(|w| (w[0], w[1], false))
            .collect();
        let origin = if tail { points[n - 2] } else { 0.0 };
        if tail {
            segs.push((0.0, 1.0, true));
        }
        let scale = self.scale;
        let mut eval = |x: f64, mapped: bool| -> T {
            if !mapped {
                return f(x);
            }
            let om = 1.0 - x;
            f(origin + scale * x / om) * (scale / (om * om))
        };
        self.run(&mut eval, &segs)
    }

    fn run<T, F>(&self, f: &mut F, segs: &[(f64, f64, bool)]) -> QuadratureResult<T>
    where
        T: QuadValue,
        F: FnMut(f64, bool) -> T,
    {
        let mut heap = BinaryHeap::new();
        let mut total = T::zero();
        let mut total_err = 0.0;
        let mut evaluations = 0usize;
        for &(a, b, mapped) in segs {
            if a == b {
                continue;
            }
            let (v, e) = gauss_kronrod_15(&mut |x| f(x, mapped), a, b);
            evaluations += 15;
            total = total + v;
            total_err += e;
            heap.push(Segment { a, b, mapped, value: v, error: e });
        }
        let mut subdivisions = heap.len();

        loop {
            let tol = self.abs_tol.max(self.rel_tol * total.magnitude());
            if total_err <= tol {
                break;
            }
            if !total.is_finite_value() || subdivisions >= self.max_subdivisions {
                return QuadratureResult {
                    value: total,
                    abs_error_estimate: total_err,
                    evaluations,
                    converged: false,
                };
            }
            let Some(seg) = heap.pop() else { break };
            let mid = 0.5 * (seg.a + seg.b);
            if mid <= seg.a || mid >= seg.b {
                // interval exhausted at machine precision
                heap.push(seg);
                return QuadratureResult {
                    value: total,
                    abs_error_estimate: total_err,
                    evaluations,
                    converged: false,
                };
            }
            let mapped = seg.mapped;
            let (v1, e1) = gauss_kronrod_15(&mut |x| f(x, mapped), seg.a, mid);
            let (v2, e2) = gauss_kronrod_15(&mut |x| f(x, mapped), mid, seg.b);
            evaluations += 30;
            subdivisions += 1;
            total = total - seg.value + v1 + v2;
            total_err += e1 + e2 - seg.error;
            heap.push(Segment { a: seg.a, b: mid, mapped, value: v1, error: e1 });
            heap.push(Segment { a: mid, b: seg.b, mapped, value: v2, error: e2 });
        }

        // re-sum to shed accumulated cancellation in the running totals
        let mut value = T::zero();
        let mut err = 0.0;
        for s in heap.iter() {
            value = value + s.value;
            err += s.error;
        }
        QuadratureResult {
            value,
            abs_error_estimate: err,
            evaluations,
            converged: true,
        }
    }
}


/// Adaptive integral of a real function with a single absolute tolerance.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> QuadratureResult<f64>
where
    F: FnMut(f64) -> f64,
{
    Integrator::with_tol(tol, 0.0).integrate(f, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_tail() {
        let r = integrate(|x| (-x).exp(), 0.0, f64::INFINITY, 1e-12);
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn endpoint_singularity() {
        let r = Integrator::with_tol(1e-10, 0.0).integrate(|x: f64| x.powf(-0.5), 0.0, 1.0);
        assert!(r.converged);
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn polynomial_exact_in_one_panel() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-13);
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-12);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn complex_oscillatory() {
        let w = 7.3;
        let r = Integrator::with_tol(1e-12, 0.0)
            .integrate(|x: f64| Complex64::new(0.0, w * x).exp(), 0.0, 3.0);
        let exact = (Complex64::new(0.0, w * 3.0).exp() - 1.0) / Complex64::new(0.0, w);
        assert!((r.value - exact).norm() < 1e-11);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let r = Integrator::with_tol(1e-14, 0.0)
            .max_subdivisions(3)
            .integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0);
        assert!(!r.converged);
        assert!(r.into_result().is_err());
    }

    #[test]
    fn scaled_semi_infinite() {
        let lambda = 1e-5;
        let pdf = |r: f64| 2.0 * std::f64::consts::PI * lambda * r * (-std::f64::consts::PI * lambda * r * r).exp();
        let r = Integrator::with_tol(1e-12, 0.0).scale(200.0).integrate(pdf, 0.0, f64::INFINITY);
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn breakpoints_split_kinks() {
        let r = Integrator::with_tol(1e-13, 0.0).integrate_breaks(|x: f64| (x - 0.3).abs(), &[0.0, 0.3, 1.0]);
        let exact = 0.3 * 0.3 / 2.0 + 0.7 * 0.7 / 2.0;
        assert!((r.value - exact).abs() < 1e-14);
        assert_eq!(r.evaluations, 30);
    }
}
