//! Bounded Voronoi cells by successive half-plane clipping.

pub type Point = [f64; 2];

/// Convex polygon, vertices in counter-clockwise order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn square(center: Point, half: f64) -> Self {
        let [x, y] = center;
        Self {
            vertices: vec![[x - half, y - half], [x + half, y - half], [x + half, y + half], [x - half, y + half]],
        }
    }

    /// Keeps the part with `n·p ≤ c`.
    pub fn clip(&self, n: Point, c: f64) -> Self {
        let side = |p: &Point| n[0] * p[0] + n[1] * p[1] - c;
        let mut out = Vec::with_capacity(self.vertices.len() + 1);
        let len = self.vertices.len();
        for i in 0..len {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % len];
            let (sa, sb) = (side(&a), side(&b));
            if sa <= 0.0 {
                out.push(a);
            }
            if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
                let t = sa / (sa - sb);
                out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        Self { vertices: out }
    }

    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        let mut s = 0.0;
        for i in 0..v.len() {
            let j = (i + 1) % v.len();
            s += v[i][0] * v[j][1] - v[j][0] * v[i][1];
        }
        0.5 * s
    }

    pub fn contains(&self, p: Point) -> bool {
        let v = &self.vertices;
        (0..v.len()).all(|i| {
            let a = v[i];
            let b = v[(i + 1) % v.len()];
            (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0
        })
    }

    /// Largest distance from `p` to a vertex.
    pub fn max_distance(&self, p: Point) -> f64 {
        self.vertices.iter().map(|v| dist(*v, p)).fold(0.0, f64::max)
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Voronoi cell of `sites[k]` intersected with the square `[−half, half]²`.
pub fn cell(sites: &[Point], k: usize, half: f64) -> Polygon {
    let s = sites[k];
    let mut order: Vec<(f64, usize)> = sites
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(j, t)| (dist(s, *t), j))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut poly = Polygon::square([0.0, 0.0], half);
    let mut reach = poly.max_distance(s);
    for (d, j) in order {
        // a site farther than twice the cell's reach cannot cut it
        if d > 2.0 * reach {
            break;
        }
        let t = sites[j];
        let n = [t[0] - s[0], t[1] - s[1]];
        let c = 0.5 * (t[0] * t[0] + t[1] * t[1] - s[0] * s[0] - s[1] * s[1]);
        poly = poly.clip(n, c);
        reach = poly.max_distance(s);
    }
    poly
}
