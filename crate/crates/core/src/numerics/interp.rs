//! Piecewise cubic Hermite interpolation on sorted nodes with known
//! derivatives.

use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone)]
pub struct HermiteTable<T> {
    nodes: Vec<f64>,
    values: Vec<T>,
    slopes: Vec<T>,
}

impl<T> HermiteTable<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    /// Nodes must be strictly increasing; `slopes` are `dT/dx` at the nodes.
    pub fn new(nodes: Vec<f64>, values: Vec<T>, slopes: Vec<T>) -> Self {
        assert!(nodes.len() >= 2);
        assert_eq!(nodes.len(), values.len());
        assert_eq!(nodes.len(), slopes.len());
        debug_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        Self { nodes, values, slopes }
    }

    pub fn lower(&self) -> f64 {
        self.nodes[0]
    }

    pub fn upper(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Value and derivative at `x`, clamped into the node range.
    pub fn eval_with_slope(&self, x: f64) -> (T, T) {
        let n = self.nodes.len();
        let i = match self.nodes.partition_point(|&v| v <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let h = x1 - x0;
        let s = ((x - x0) / h).clamp(0.0, 1.0);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let value = y0 * h00 + m0 * h10 + y1 * h01 + m1 * h11;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -6.0 * s2 + 6.0 * s;
        let d11 = 3.0 * s2 - 2.0 * s;
        let slope = (y0 * d00 + m0 * d10 + y1 * d01 + m1 * d11) * (1.0 / h);
        (value, slope)
    }

    pub fn eval(&self, x: f64) -> T {
        self.eval_with_slope(x).0
    }
}
