use serde::Serialize;

use crate::infomeasure::Unit;

const DEDUP_TOL: f64 = 1e-9;

/// Downward-closed convex polygon in the nonnegative quadrant.
///
/// `vertices` run counter-clockwise starting at the origin. Each half-plane is a
/// unit outward normal with offset, `n . p <= offset`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region2D {
    pub vertices: Vec<[f64; 2]>,
    pub halfplanes: Vec<([f64; 2], f64)>,
    pub unit: Unit,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

fn snap(v: f64) -> f64 {
    (v / DEDUP_TOL).round() * DEDUP_TOL
}

/// Andrew's monotone chain; returns the hull counter-clockwise without repeats.
/// Points are snapped to the dedup lattice first so near-ties sort together.
fn hull(pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = pts.into_iter().map(|p| [snap(p[0]), snap(p[1])]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| dist(*a, *b) <= DEDUP_TOL);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-15 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-15 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl Region2D {
    /// Closure of the convex hull of `points` together with everything below them.
    /// Negative coordinates are clipped to zero.
    pub fn from_points(points: &[[f64; 2]], unit: Unit) -> Self {
        let mut pts = vec![[0.0, 0.0]];
        for p in points {
            let q = [p[0].max(0.0), p[1].max(0.0)];
            pts.push(q);
            pts.push([q[0], 0.0]);
            pts.push([0.0, q[1]]);
        }
        let mut vertices = hull(pts);
        if let Some(k) = vertices.iter().position(|v| v[0] <= DEDUP_TOL && v[1] <= DEDUP_TOL) {
            vertices.rotate_left(k);
        }
        let mut halfplanes = Vec::new();
        if vertices.len() >= 3 {
            for i in 0..vertices.len() {
                let a = vertices[i];
                let b = vertices[(i + 1) % vertices.len()];
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let len = (dx * dx + dy * dy).sqrt();
                let n = [dy / len, -dx / len];
                halfplanes.push((n, n[0] * a[0] + n[1] * a[1]));
            }
        }
        Region2D { vertices, halfplanes, unit }
    }

    /// Same region with coordinates expressed in `unit`.
    pub fn in_unit(&self, unit: Unit) -> Self {
        let f = |v: f64| unit.from_nats(self.unit.to_nats(v));
        let pts: Vec<[f64; 2]> = self.vertices.iter().map(|v| [f(v[0]), f(v[1])]).collect();
        Region2D::from_points(&pts, unit)
    }

    /// `max_{p in region} w . p`.
    pub fn support(&self, w: [f64; 2]) -> f64 {
        self.vertices.iter().map(|v| w[0] * v[0] + w[1] * v[1]).fold(0.0, f64::max)
    }

    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        if p[0] < -tol || p[1] < -tol {
            return false;
        }
        if self.vertices.len() < 3 {
            return self.distance(p) <= tol;
        }
        self.halfplanes.iter().all(|(n, off)| n[0] * p[0] + n[1] * p[1] <= off + tol)
    }

    /// Euclidean distance from `p` to the region (zero inside).
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        let k = self.vertices.len();
        if k >= 3 && self.halfplanes.iter().all(|(n, off)| n[0] * p[0] + n[1] * p[1] <= off + 1e-15) {
            return 0.0;
        }
        match k {
            0 => dist(p, [0.0, 0.0]),
            1 => dist(p, self.vertices[0]),
            _ => (0..k)
                .map(|i| segment_distance(p, self.vertices[i], self.vertices[(i + 1) % k]))
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn area(&self) -> f64 {
        let k = self.vertices.len();
        if k < 3 {
            return 0.0;
        }
        0.5 * (0..k)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % k];
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
    }

    /// Hausdorff distance; for convex polygons the farthest point is a vertex.
    pub fn hausdorff(&self, other: &Region2D) -> f64 {
        let other = other.in_unit(self.unit);
        let one = self.vertices.iter().map(|&v| other.distance(v)).fold(0.0, f64::max);
        let two = other.vertices.iter().map(|&v| self.distance(v)).fold(0.0, f64::max);
        one.max(two)
    }

    /// Largest amount by which `self` sticks out of `other`.
    pub fn excess_over(&self, other: &Region2D) -> f64 {
        let other = other.in_unit(self.unit);
        self.vertices.iter().map(|&v| other.distance(v)).fold(0.0, f64::max)
    }

    pub fn is_convex(&self) -> bool {
        let k = self.vertices.len();
        k < 3 || (0..k).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % k], self.vertices[(i + 2) % k]) >= -1e-12)
    }
}
