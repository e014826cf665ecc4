//! Brute-force minimax widths for tiny real clouds (ambient dimension <= 3,
//! n <= 1, at most 12 points). Shares no code with the estimators: subspace
//! orientations are searched by Lipschitz branch and bound, and offsets are
//! obtained from exact smallest-enclosing-ball enumeration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};

use super::{SnapshotCloud, WidthMode};
use crate::error::{Error, Result};

const ACCURACY: f64 = 1e-4;
const MAX_EVALUATIONS: usize = 4_000_000;

/// Minimax width of a tiny real cloud to absolute accuracy `1e-4`.
pub fn exact_width_oracle(cloud: &SnapshotCloud<f64>, n: usize, mode: WidthMode) -> Result<f64> {
    let dim = cloud.dim();
    if dim > 3 || n > 1 || cloud.len() > 12 {
        return Err(Error::InstanceTooLarge(format!(
            "dim {dim}, n {n}, {} points (limits 3, 1, 12)",
            cloud.len()
        )));
    }
    let pts: Vec<[f64; 3]> = cloud
        .points()
        .iter()
        .map(|p| {
            let mut a = [0.0; 3];
            a[..dim].copy_from_slice(p.as_slice());
            a
        })
        .collect();
    if n >= dim {
        return Ok(0.0);
    }
    match (mode, n) {
        (WidthMode::Linear, 0) => Ok(pts.iter().map(norm3).fold(0.0, f64::max)),
        (WidthMode::Affine, 0) => Ok(enclosing_radius(&pts, dim)),
        (WidthMode::Linear, _) => {
            let lip = 2.0 * pts.iter().map(norm3).fold(0.0, f64::max);
            let f = |v: &[f64; 3]| {
                pts.iter()
                    .map(|p| {
                        let c = dot3(p, v);
                        norm3(&[p[0] - c * v[0], p[1] - c * v[1], p[2] - c * v[2]])
                    })
                    .fold(0.0, f64::max)
            };
            minimize_over_lines(dim, lip, &unit_directions(pts.iter().copied()), f)
        }
        (WidthMode::Affine, _) => {
            // widths are translation invariant; centring shrinks the Lipschitz constant
            let k = pts.len() as f64;
            let mut mean = [0.0; 3];
            for p in &pts {
                for i in 0..3 {
                    mean[i] += p[i] / k;
                }
            }
            let centred: Vec<[f64; 3]> = pts
                .iter()
                .map(|p| [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]])
                .collect();
            let lip = 2.0 * centred.iter().map(norm3).fold(0.0, f64::max);
            let f = |v: &[f64; 3]| {
                let (e1, e2) = complement_basis(v);
                let proj: Vec<[f64; 3]> = centred.iter().map(|p| [dot3(p, &e1), dot3(p, &e2), 0.0]).collect();
                enclosing_radius(&proj, dim - 1)
            };
            let diffs = centred.iter().enumerate().flat_map(|(i, p)| {
                centred[i + 1..]
                    .iter()
                    .map(move |q| [p[0] - q[0], p[1] - q[1], p[2] - q[2]])
            });
            minimize_over_lines(dim, lip, &unit_directions(diffs), f)
        }
    }
}

/// Normalised nonzero vectors, used as exact incumbents (a cloud lying on a
/// line is fitted exactly by the line through its points).
fn unit_directions(vs: impl Iterator<Item = [f64; 3]>) -> Vec<[f64; 3]> {
    vs.filter_map(|v| {
        let n = norm3(&v);
        (n > 0.0).then(|| [v[0] / n, v[1] / n, v[2] / n])
    })
    .collect()
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Orthonormal basis of the complement of the unit vector `v` (in 2-D the
/// second vector is zero).
fn complement_basis(v: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    if v[2] == 0.0 && v.iter().all(|x| x.is_finite()) && (v[0].abs() > 0.0 || v[1].abs() > 0.0) {
        let e1 = [-v[1], v[0], 0.0];
        let e2 = [0.0, 0.0, 1.0];
        return (e1, e2);
    }
    let vv = Vector3::new(v[0], v[1], v[2]);
    let seed = if v[0].abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let a = (seed - vv * vv.dot(&seed)).normalize();
    let b = vv.cross(&a);
    ([a[0], a[1], a[2]], [b[0], b[1], b[2]])
}

/// Radius of the smallest ball enclosing `pts` (first `dim` coordinates), by
/// enumerating circumscribed balls of subsets of size <= dim + 1.
fn enclosing_radius(pts: &[[f64; 3]], dim: usize) -> f64 {
    let scale = pts.iter().map(norm3).fold(1.0, f64::max);
    let m = pts.len();
    let mut best = f64::INFINITY;
    let mut subset = Vec::with_capacity(dim + 1);
    fn recurse(start: usize, limit: usize, m: usize, subset: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if !subset.is_empty() {
            visit(subset);
        }
        if subset.len() == limit {
            return;
        }
        for i in start..m {
            subset.push(i);
            recurse(i + 1, limit, m, subset, visit);
            subset.pop();
        }
    }
    let mut visit = |s: &[usize]| {
        if let Some((center, r)) = circumball(pts, s, dim) {
            if r >= best {
                return;
            }
            let tol = 1e-12 * scale;
            let covers = pts.iter().all(|p| {
                let d: f64 = (0..dim).map(|i| (p[i] - center[i]).powi(2)).sum::<f64>().sqrt();
                d <= r + tol
            });
            if covers {
                best = r;
            }
        }
    };
    recurse(0, (dim + 1).min(m), m, &mut subset, &mut visit);
    best
}

/// Centre and radius of the smallest ball through the points of `s` with
/// centre in their affine hull; `None` for affinely dependent subsets.
fn circumball(pts: &[[f64; 3]], s: &[usize], dim: usize) -> Option<([f64; 3], f64)> {
    let p0 = pts[s[0]];
    if s.len() == 1 {
        return Some((p0, 0.0));
    }
    let k = s.len() - 1;
    let d: Vec<[f64; 3]> = s[1..]
        .iter()
        .map(|&i| {
            let mut v = [0.0; 3];
            for c in 0..dim {
                v[c] = pts[i][c] - p0[c];
            }
            v
        })
        .collect();
    let gram = DMatrix::from_fn(k, k, |i, j| 2.0 * dot3(&d[i], &d[j]));
    let rhs = DVector::from_fn(k, |i, _| dot3(&d[i], &d[i]));
    let det = gram.determinant();
    let diag: f64 = (0..k).map(|i| gram[(i, i)]).product();
    if diag == 0.0 || det.abs() <= 1e-12 * diag {
        return None;
    }
    let lambda = gram.lu().solve(&rhs)?;
    let mut c = p0;
    for (j, dj) in d.iter().enumerate() {
        for i in 0..dim {
            c[i] += lambda[j] * dj[i];
        }
    }
    let r = (0..dim).map(|i| (c[i] - p0[i]).powi(2)).sum::<f64>().sqrt();
    Some((c, r))
}

#[derive(Debug)]
struct Cell {
    lower: f64,
    center: [f64; 2],
    half: [f64; 2],
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.lower == other.lower
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    // min-heap on the lower bound
    fn cmp(&self, other: &Self) -> Ordering {
        other.lower.total_cmp(&self.lower)
    }
}

/// Minimises `f` over lines through the origin in R^dim (dim 2 or 3) by
/// branch and bound, using that `f` is `lip`-Lipschitz in the unit direction.
fn minimize_over_lines(dim: usize, lip: f64, seeds: &[[f64; 3]], f: impl Fn(&[f64; 3]) -> f64) -> Result<f64> {
    let dir = |c: &[f64; 2]| -> [f64; 3] {
        if dim == 2 {
            [c[0].cos(), c[0].sin(), 0.0]
        } else {
            let (st, ct) = c[0].sin_cos();
            [st * c[1].cos(), st * c[1].sin(), ct]
        }
    };
    // (theta, phi) box; in 2-D phi is unused. Hemisphere suffices since v ~ -v.
    let (extent, grid) = if dim == 2 {
        ([PI, 0.0], [64usize, 1usize])
    } else {
        ([PI / 2.0, 2.0 * PI], [16, 64])
    };
    let mut heap = BinaryHeap::new();
    let mut best = seeds.iter().map(&f).fold(f64::INFINITY, f64::min);
    let mut evaluations = seeds.len();
    // arc length spanned by the phi half-width: sin(theta) |d phi| over the cell
    let phi_arc = |center: &[f64; 2], half: &[f64; 2]| {
        if dim == 2 {
            0.0
        } else {
            (center[0] + half[0]).min(PI / 2.0).sin() * half[1]
        }
    };
    let push = |heap: &mut BinaryHeap<Cell>, best: &mut f64, center: [f64; 2], half: [f64; 2]| {
        let v = f(&dir(&center));
        *best = best.min(v);
        // geodesic distance to the centre is at most |d theta| + sin(theta) |d phi|
        let lower = v - lip * (half[0] + phi_arc(&center, &half));
        heap.push(Cell { lower, center, half });
    };
    let h0 = [extent[0] / grid[0] as f64 / 2.0, extent[1] / grid[1] as f64 / 2.0];
    for i in 0..grid[0] {
        for j in 0..grid[1] {
            let c = [(2 * i + 1) as f64 * h0[0], (2 * j + 1) as f64 * h0[1]];
            push(&mut heap, &mut best, c, h0);
            evaluations += 1;
        }
    }
    while let Some(cell) = heap.pop() {
        if cell.lower >= best - 0.5 * ACCURACY {
            return Ok(best);
        }
        if evaluations > MAX_EVALUATIONS {
            return Err(Error::InstanceTooLarge("branch and bound did not converge".into()));
        }
        let axis = if dim == 2 || cell.half[0] >= phi_arc(&cell.center, &cell.half) {
            0
        } else {
            1
        };
        let mut half = cell.half;
        half[axis] /= 2.0;
        for sign in [-1.0, 1.0] {
            let mut c = cell.center;
            c[axis] += sign * half[axis];
            push(&mut heap, &mut best, c, half);
            evaluations += 1;
        }
    }
    Ok(best)
}
