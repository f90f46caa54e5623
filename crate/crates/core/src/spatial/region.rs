use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Service area. The disk is centred at the origin and the rectangle has
/// its lower-left corner there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Region {
    Disk {
        radius: f64,
    },
    Rectangle {
        width: f64,
        height: f64,
    },
    /// Simple polygon with counter-clockwise vertices.
    Polygon {
        vertices: Vec<Point>,
    },
}

impl Region {
    /// L-shaped hexagon: unit square with its upper-right quarter removed.
    pub fn l_shape() -> Self {
        Region::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.5], [0.5, 0.5], [0.5, 1.0], [0.0, 1.0]] }
    }

    pub fn area(&self) -> f64 {
        match self {
            Region::Disk { radius } => std::f64::consts::PI * radius * radius,
            Region::Rectangle { width, height } => width * height,
            Region::Polygon { vertices } => signed_area(vertices),
        }
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Point, b: Point, p: Point, d: f64| {
        d == 0.0 && p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn point_in_triangle(p: Point, a: Point, b: Point, c: Point) -> bool {
    cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0
}

/// Ear-clipping triangulation of a simple counter-clockwise polygon.
fn triangulate(v: &[Point]) -> Result<Vec<[Point; 3]>> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let mut out = Vec::with_capacity(v.len().saturating_sub(2));
    let mut guard = 0;
    while idx.len() > 3 {
        let k = idx.len();
        let mut clipped = false;
        for i in 0..k {
            let (ia, ib, ic) = (idx[(i + k - 1) % k], idx[i], idx[(i + 1) % k]);
            let (a, b, c) = (v[ia], v[ib], v[ic]);
            if cross(a, b, c) <= 0.0 {
                continue;
            }
            let blocked =
                idx.iter().filter(|&&j| j != ia && j != ib && j != ic).any(|&j| point_in_triangle(v[j], a, b, c));
            if blocked {
                continue;
            }
            out.push([a, b, c]);
            idx.remove(i);
            clipped = true;
            break;
        }
        guard += 1;
        if !clipped || guard > 4 * v.len() {
            return Err(Error::DegenerateRegion("polygon could not be triangulated".into()));
        }
    }
    out.push([v[idx[0]], v[idx[1]], v[idx[2]]]);
    Ok(out)
}

/// Pre-processed region ready for uniform sampling.
#[derive(Debug, Clone)]
pub(crate) enum Sampler {
    Disk { radius: f64 },
    Rectangle { width: f64, height: f64 },
    Triangles { tris: Vec<[Point; 3]>, cumulative: Vec<f64> },
}

impl Sampler {
    pub fn new(region: &Region) -> Result<Self> {
        match region {
            Region::Disk { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::DegenerateRegion(format!("disk radius {radius}")));
                }
                Ok(Sampler::Disk { radius: *radius })
            }
            Region::Rectangle { width, height } => {
                if !(width.is_finite() && height.is_finite() && *width > 0.0 && *height > 0.0) {
                    return Err(Error::DegenerateRegion(format!("rectangle {width}x{height}")));
                }
                Ok(Sampler::Rectangle { width: *width, height: *height })
            }
            Region::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 || vertices.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::DegenerateRegion(format!("polygon with {n} vertices")));
                }
                let area = signed_area(vertices);
                if !(area > 0.0) {
                    return Err(Error::DegenerateRegion(format!(
                        "polygon signed area {area}; vertices must be counter-clockwise"
                    )));
                }
                for i in 0..n {
                    for j in i + 1..n {
                        let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                        if adjacent {
                            continue;
                        }
                        if segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]) {
                            return Err(Error::DegenerateRegion(format!("edges {i} and {j} intersect")));
                        }
                    }
                }
                let tris = triangulate(vertices)?;
                let mut acc = 0.0;
                let cumulative = tris
                    .iter()
                    .map(|t| {
                        acc += 0.5 * cross(t[0], t[1], t[2]);
                        acc
                    })
                    .collect();
                Ok(Sampler::Triangles { tris, cumulative })
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            Sampler::Disk { radius } => loop {
                let x: f64 = rng.random_range(-1.0..1.0);
                let y: f64 = rng.random_range(-1.0..1.0);
                if x * x + y * y < 1.0 {
                    break [radius * x, radius * y];
                }
            },
            Sampler::Rectangle { width, height } => [width * rng.random::<f64>(), height * rng.random::<f64>()],
            Sampler::Triangles { tris, cumulative } => {
                let total = *cumulative.last().unwrap();
                let pick = rng.random::<f64>() * total;
                let k = cumulative.partition_point(|&c| c <= pick).min(tris.len() - 1);
                let [a, b, c] = tris[k];
                let (mut r1, mut r2) = (rng.random::<f64>(), rng.random::<f64>());
                if r1 + r2 > 1.0 {
                    r1 = 1.0 - r1;
                    r2 = 1.0 - r2;
                }
                [a[0] + r1 * (b[0] - a[0]) + r2 * (c[0] - a[0]), a[1] + r1 * (b[1] - a[1]) + r2 * (c[1] - a[1])]
            }
        }
    }

    /// Area centroid.
    pub fn centre(&self) -> Point {
        match self {
            Sampler::Disk { .. } => [0.0, 0.0],
            Sampler::Rectangle { width, height } => [0.5 * width, 0.5 * height],
            Sampler::Triangles { tris, cumulative } => {
                let total = *cumulative.last().unwrap();
                let mut c = [0.0, 0.0];
                for t in tris {
                    let w = 0.5 * cross(t[0], t[1], t[2]) / total;
                    c[0] += w * (t[0][0] + t[1][0] + t[2][0]) / 3.0;
                    c[1] += w * (t[0][1] + t[1][1] + t[2][1]) / 3.0;
                }
                c
            }
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            Sampler::Disk { radius } => p[0] * p[0] + p[1] * p[1] <= radius * radius,
            Sampler::Rectangle { width, height } => p[0] >= 0.0 && p[0] <= *width && p[1] >= 0.0 && p[1] <= *height,
            Sampler::Triangles { tris, .. } => tris.iter().any(|t| point_in_triangle(p, t[0], t[1], t[2])),
        }
    }
}
