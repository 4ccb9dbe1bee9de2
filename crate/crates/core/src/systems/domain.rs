//! Compact domains `K` with a chart from a parameter box, and the regular
//! grids laid over that box for the brute-force inner maximization.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack used by membership predicates and box clipping.
const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// Axis-aligned box; the chart is the identity.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Convex planar quadrilateral with corners in boundary order, charted
    /// bilinearly from the unit square.
    Quadrilateral { corners: [[f64; 2]; 4] },
    /// Closed Euclidean ball in two or three dimensions, charted by polar or
    /// spherical coordinates.
    Ball { center: Vec<f64>, radius: f64 },
    /// `S¹ × box`: axis 0 is an angle of period 2π, the remaining axes are
    /// bounded by `lower`/`upper`.
    Cylinder { lower: Vec<f64>, upper: Vec<f64> },
}

/// One axis of the parameter box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamAxis {
    pub lower: f64,
    pub upper: f64,
    /// Periodic axes exclude the upper endpoint from the coarse grid.
    pub periodic: bool,
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lower, .. } => lower.len(),
            Domain::Quadrilateral { .. } => 2,
            Domain::Ball { center, .. } => center.len(),
            Domain::Cylinder { lower, .. } => lower.len() + 1,
        }
    }

    pub fn is_cylinder(&self) -> bool {
        matches!(self, Domain::Cylinder { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        match self {
            Domain::Box { lower, upper } | Domain::Cylinder { lower, upper } => {
                if lower.len() != upper.len() {
                    return bad("box bounds have different lengths".into());
                }
                if matches!(self, Domain::Box { .. }) && lower.is_empty() {
                    return bad("box must have at least one axis".into());
                }
                if lower.iter().zip(upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
                    return bad(format!("invalid box bounds {lower:?} .. {upper:?}"));
                }
            }
            Domain::Quadrilateral { corners } => {
                if quad_orientation(corners).is_none() {
                    return bad("quadrilateral corners must form a convex polygon in boundary order".into());
                }
            }
            Domain::Ball { center, radius } => {
                if !(center.len() == 2 || center.len() == 3) {
                    return bad("ball chart supports dimensions 2 and 3".into());
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return bad(format!("ball radius must be positive, got {radius}"));
                }
            }
        }
        Ok(())
    }

    pub fn param_axes(&self) -> Vec<ParamAxis> {
        let closed = |lower, upper| ParamAxis { lower, upper, periodic: false };
        match self {
            Domain::Box { lower, upper } => lower.iter().zip(upper).map(|(&l, &u)| closed(l, u)).collect(),
            Domain::Quadrilateral { .. } => vec![closed(0.0, 1.0), closed(0.0, 1.0)],
            Domain::Ball { center, radius } => {
                if center.len() == 2 {
                    vec![closed(0.0, *radius), closed(0.0, TAU)]
                } else {
                    vec![closed(0.0, *radius), closed(0.0, PI), closed(0.0, TAU)]
                }
            }
            Domain::Cylinder { lower, upper } => {
                let mut axes = vec![ParamAxis { lower: 0.0, upper: TAU, periodic: true }];
                axes.extend(lower.iter().zip(upper).map(|(&l, &u)| closed(l, u)));
                axes
            }
        }
    }

    /// Maps a parameter-box point into state space.
    #[inline]
    pub fn chart(&self, u: &[f64], out: &mut [f64]) {
        match self {
            Domain::Box { .. } | Domain::Cylinder { .. } => out.copy_from_slice(u),
            Domain::Quadrilateral { corners: [a, b, c, d] } => {
                let (s, t) = (u[0], u[1]);
                for k in 0..2 {
                    out[k] = (1.0 - s) * (1.0 - t) * a[k] + s * (1.0 - t) * b[k] + s * t * c[k] + (1.0 - s) * t * d[k];
                }
            }
            Domain::Ball { center, .. } => {
                let r = u[0];
                if center.len() == 2 {
                    out[0] = center[0] + r * u[1].cos();
                    out[1] = center[1] + r * u[1].sin();
                } else {
                    let (az, pol) = (u[1], u[2]);
                    let s = az.sin();
                    out[0] = center[0] + r * s * pol.cos();
                    out[1] = center[1] + r * s * pol.sin();
                    out[2] = center[2] + r * az.cos();
                }
            }
        }
    }

    /// Membership predicate for `K`. Angles on a cylinder are taken modulo 2π.
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            Domain::Box { lower, upper } => in_box(x, lower, upper),
            Domain::Cylinder { lower, upper } => in_box(&x[1..], lower, upper),
            Domain::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                let r = radius * (1.0 + MEMBERSHIP_TOL);
                d2 <= r * r
            }
            Domain::Quadrilateral { corners } => match quad_test(corners) {
                Some((orient, tol)) => in_quad(corners, orient, tol, x),
                None => false,
            },
        }
    }
}

/// Orientation sign and absolute slack for the edge tests of a quadrilateral.
fn quad_test(corners: &[[f64; 2]; 4]) -> Option<(f64, f64)> {
    let orient = quad_orientation(corners)?;
    let scale = corners.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    Some((orient, MEMBERSHIP_TOL * scale * scale))
}

#[inline]
fn in_quad(corners: &[[f64; 2]; 4], orient: f64, tol: f64, x: &[f64]) -> bool {
    x[0].is_finite()
        && x[1].is_finite()
        && (0..4).all(|i| orient * cross(corners[i], corners[(i + 1) % 4], [x[0], x[1]]) >= -tol)
}

fn in_box(x: &[f64], lower: &[f64], upper: &[f64]) -> bool {
    x.iter().zip(lower.iter().zip(upper)).all(|(&v, (&l, &u))| {
        let tol = MEMBERSHIP_TOL * (u - l).abs().max(1.0);
        v >= l - tol && v <= u + tol
    })
}

fn cross(p: [f64; 2], q: [f64; 2], x: [f64; 2]) -> f64 {
    (q[0] - p[0]) * (x[1] - p[1]) - (q[1] - p[1]) * (x[0] - p[0])
}

/// +1 for counter-clockwise, -1 for clockwise, `None` if not strictly convex.
fn quad_orientation(c: &[[f64; 2]; 4]) -> Option<f64> {
    let turns: [f64; 4] = std::array::from_fn(|i| cross(c[i], c[(i + 1) % 4], c[(i + 2) % 4]));
    if turns.iter().all(|&t| t > 0.0) {
        Some(1.0)
    } else if turns.iter().all(|&t| t < 0.0) {
        Some(-1.0)
    } else {
        None
    }
}

/// One axis of a regular lattice: values `origin + (offset + j) * step` for
/// `j = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub origin: f64,
    pub step: f64,
    pub offset: usize,
    pub count: usize,
}

impl GridAxis {
    #[inline]
    pub fn value(&self, j: usize) -> f64 {
        self.origin + (self.offset + j) as f64 * self.step
    }
}

/// Regular lattice over the parameter box of a [`Domain`], indexed in
/// row-major order (last axis fastest).
#[derive(Debug, Clone)]
pub struct Grid {
    domain: Domain,
    axes: Vec<GridAxis>,
    /// `(sin, cos)` of every lattice value on the angular axes of a ball.
    trig: Vec<Vec<(f64, f64)>>,
    quad: Option<(f64, f64)>,
}

fn check_counts(domain: &Domain, counts: &[usize]) -> Result<()> {
    if counts.len() != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim(), got: counts.len() });
    }
    if let Some(&n) = counts.iter().find(|&&n| n < 2) {
        return Err(Error::OutOfRange(format!("grid needs at least 2 points per axis, got {n}")));
    }
    Ok(())
}

impl Grid {
    fn build(domain: &Domain, axes: Vec<GridAxis>) -> Self {
        let trig = axes
            .iter()
            .enumerate()
            .map(|(k, ax)| {
                if matches!(domain, Domain::Ball { .. }) && k > 0 {
                    (0..ax.count).map(|j| ax.value(j).sin_cos()).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        let quad = match domain {
            Domain::Quadrilateral { corners } => quad_test(corners),
            _ => None,
        };
        Self { domain: domain.clone(), axes, trig, quad }
    }

    /// `z_i = a_i + j h_i`, `h_i = (b_i - a_i)/(N_i - 1)`, both endpoints
    /// included; periodic axes use `h_i = (b_i - a_i)/N_i` instead.
    pub fn coarse(domain: &Domain, counts: &[usize]) -> Result<Self> {
        domain.validate()?;
        check_counts(domain, counts)?;
        let axes = domain
            .param_axes()
            .iter()
            .zip(counts)
            .map(|(ax, &n)| {
                let intervals = if ax.periodic { n } else { n - 1 };
                GridAxis { origin: ax.lower, step: (ax.upper - ax.lower) / intervals as f64, offset: 0, count: n }
            })
            .collect();
        Ok(Self::build(domain, axes))
    }

    /// A copy of the coarse grid scaled onto the cube `center ± h_i/2`,
    /// clipped to the parameter box on non-periodic axes.
    pub fn refined(domain: &Domain, counts: &[usize], center: &[f64]) -> Result<Self> {
        let coarse = Self::coarse(domain, counts)?;
        if center.len() != counts.len() {
            return Err(Error::DimensionMismatch { expected: counts.len(), got: center.len() });
        }
        let axes = domain
            .param_axes()
            .iter()
            .zip(&coarse.axes)
            .zip(center)
            .map(|((ax, coarse_ax), &c)| {
                let n = coarse_ax.count;
                let h = coarse_ax.step;
                let step = h / (n - 1) as f64;
                let origin = c - 0.5 * h;
                if ax.periodic {
                    return GridAxis { origin, step, offset: 0, count: n };
                }
                let tol = MEMBERSHIP_TOL * (ax.upper - ax.lower).abs().max(1.0);
                let lo = ((ax.lower - tol - origin) / step).ceil().max(0.0);
                let hi = ((ax.upper + tol - origin) / step).floor().min((n - 1) as f64);
                if hi < lo {
                    GridAxis { origin, step, offset: 0, count: 0 }
                } else {
                    GridAxis { origin, step, offset: lo as usize, count: (hi - lo) as usize + 1 }
                }
            })
            .collect();
        Ok(Self::build(domain, axes))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Number of lattice points (before the membership filter).
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameter-space coordinates of lattice point `index`.
    #[inline]
    pub fn param_at(&self, index: usize, out: &mut [f64]) {
        let mut rem = index;
        for k in (0..self.axes.len()).rev() {
            let ax = &self.axes[k];
            out[k] = ax.value(rem % ax.count);
            rem /= ax.count;
        }
    }

    /// Writes the state-space point for `index` into `out`; returns whether
    /// it passes the membership predicate.
    #[inline]
    pub fn point_at(&self, index: usize, param: &mut [f64], out: &mut [f64]) -> bool {
        let n = self.axes.len();
        let mut small = [0usize; 8];
        let mut large = Vec::new();
        let j: &mut [usize] = if n <= small.len() {
            &mut small[..n]
        } else {
            large.resize(n, 0);
            &mut large
        };
        let mut rem = index;
        for k in (0..n).rev() {
            j[k] = rem % self.axes[k].count;
            rem /= self.axes[k].count;
        }
        self.point_from_indices(j, param, out)
    }

    /// Point for the multi-index `j` (one lattice index per axis).
    #[inline]
    pub fn point_from_indices(&self, j: &[usize], param: &mut [f64], out: &mut [f64]) -> bool {
        for (k, ax) in self.axes.iter().enumerate() {
            param[k] = ax.value(j[k]);
        }
        match &self.domain {
            Domain::Ball { center, .. } => {
                // same arithmetic as `Domain::chart`, with tabulated angles
                let r = param[0];
                if center.len() == 2 {
                    let (s, c) = self.trig[1][j[1]];
                    out[0] = center[0] + r * c;
                    out[1] = center[1] + r * s;
                } else {
                    let (s_az, c_az) = self.trig[1][j[1]];
                    let (s_pol, c_pol) = self.trig[2][j[2]];
                    out[0] = center[0] + r * s_az * c_pol;
                    out[1] = center[1] + r * s_az * s_pol;
                    out[2] = center[2] + r * c_az;
                }
            }
            Domain::Quadrilateral { corners } => {
                self.domain.chart(param, out);
                return match self.quad {
                    Some((orient, tol)) => in_quad(corners, orient, tol, out),
                    None => false,
                };
            }
            domain => domain.chart(param, out),
        }
        self.domain.contains(out)
    }

    /// Cursor positioned at lattice point `start`.
    pub fn cursor(&self, start: usize) -> GridCursor<'_> {
        let mut j = vec![0; self.axes.len()];
        let mut rem = start;
        for k in (0..self.axes.len()).rev() {
            let c = self.axes[k].count.max(1);
            j[k] = rem % c;
            rem /= c;
        }
        GridCursor { grid: self, j, index: start }
    }

    /// All member points as `(index, point)` in index order.
    pub fn points(&self) -> impl Iterator<Item = (usize, Vec<f64>)> + '_ {
        let n = self.dim();
        (0..self.len()).filter_map(move |i| {
            let mut u = vec![0.0; n];
            let mut x = vec![0.0; n];
            self.point_at(i, &mut u, &mut x).then_some((i, x))
        })
    }
}

/// Sequential walk over the lattice in index order.
#[derive(Debug, Clone)]
pub struct GridCursor<'g> {
    grid: &'g Grid,
    j: Vec<usize>,
    index: usize,
}

impl GridCursor<'_> {
    pub fn index(&self) -> usize {
        self.index
    }

    /// Same result as [`Grid::point_at`] for the current index.
    #[inline]
    pub fn point(&self, param: &mut [f64], out: &mut [f64]) -> bool {
        self.grid.point_from_indices(&self.j, param, out)
    }

    #[inline]
    pub fn advance(&mut self) {
        self.index += 1;
        for k in (0..self.j.len()).rev() {
            self.j[k] += 1;
            if self.j[k] < self.grid.axes[k].count {
                return;
            }
            self.j[k] = 0;
        }
    }
}

/// Regular grid over `domain` mapped into state space.
pub fn grid_points(domain: &Domain, counts: &[usize]) -> Result<Vec<(usize, Vec<f64>)>> {
    Ok(Grid::coarse(domain, counts)?.points().collect())
}

/// Scaled-down copy of the grid centred on the parameter-space point `center`.
pub fn refine_around(domain: &Domain, counts: &[usize], center: &[f64]) -> Result<Vec<(usize, Vec<f64>)>> {
    Ok(Grid::refined(domain, counts, center)?.points().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_grid() {
        let d = Domain::Box { lower: vec![0.0], upper: vec![1.0] };
        let pts = grid_points(&d, &[3]).unwrap();
        let xs: Vec<f64> = pts.iter().map(|(_, x)| x[0]).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0]);
        assert!(matches!(grid_points(&d, &[1]), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn cylinder_angle_axis_excludes_seam() {
        let band = 20.0 / 9.0;
        let d = Domain::Cylinder { lower: vec![-band], upper: vec![band] };
        let g = Grid::coarse(&d, &[4, 3]).unwrap();
        assert!((g.axes()[0].step - TAU / 4.0).abs() < 1e-15);
        let pts: Vec<_> = g.points().collect();
        assert_eq!(pts.len(), 12);
        let angles: Vec<f64> = pts.iter().step_by(3).map(|(_, x)| x[0]).collect();
        assert_eq!(angles.len(), 4);
        assert!(angles.iter().all(|a| *a < TAU - 1e-9));
        let x2: Vec<f64> = pts[..3].iter().map(|(_, x)| x[1]).collect();
        assert_eq!(x2, vec![-band, 0.0, band]);
    }

    #[test]
    fn ball_grid_stays_inside() {
        let d = Domain::Ball { center: vec![0.0, 0.0, 38.0], radius: 43.8786 };
        let pts = grid_points(&d, &[7, 5, 9]).unwrap();
        assert_eq!(pts.len(), 7 * 5 * 9);
        for (_, x) in &pts {
            let r = (x[0] * x[0] + x[1] * x[1] + (x[2] - 38.0).powi(2)).sqrt();
            assert!(r <= 43.8786 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn refinement_interior_and_corner() {
        let d = Domain::Box { lower: vec![0.0, 0.0], upper: vec![1.0, 2.0] };
        let coarse = Grid::coarse(&d, &[5, 5]).unwrap();
        let h: Vec<f64> = coarse.axes().iter().map(|a| a.step).collect();

        let inner = Grid::refined(&d, &[5, 5], &[0.5, 1.0]).unwrap();
        assert_eq!(inner.len(), 25);
        for (ax, hi) in inner.axes().iter().zip(&h) {
            assert!((ax.step - hi / 4.0).abs() < 1e-15);
        }
        let mut u = [0.0; 2];
        inner.param_at(0, &mut u);
        assert!((u[0] - (0.5 - h[0] / 2.0)).abs() < 1e-15);

        let corner = Grid::refined(&d, &[5, 5], &[0.0, 0.0]).unwrap();
        assert_eq!(corner.len(), 9);
        assert!(corner.points().all(|(_, x)| x[0] >= 0.0 && x[1] >= 0.0));
    }

    #[test]
    fn quadrilateral_chart_hits_corners() {
        let corners = [[-1.862, 1.96], [1.848, 0.6267], [1.743, -0.6533], [-1.484, -2.3333]];
        let d = Domain::Quadrilateral { corners };
        let pts = grid_points(&d, &[2, 2]).unwrap();
        let got: Vec<Vec<f64>> = pts.into_iter().map(|(_, x)| x).collect();
        // (u, v) = (0,0), (0,1), (1,0), (1,1)
        assert_eq!(got[0], corners[0].to_vec());
        assert_eq!(got[1], corners[3].to_vec());
        assert_eq!(got[2], corners[1].to_vec());
        assert_eq!(got[3], corners[2].to_vec());
        assert!(d.contains(&[0.0, 0.0]));
        assert!(!d.contains(&[2.5, 2.5]));
    }

    #[test]
    fn grid_order_is_deterministic() {
        let d = Domain::Ball { center: vec![0.0, 0.0], radius: 2.0 };
        let a = grid_points(&d, &[4, 6]).unwrap();
        let b = grid_points(&d, &[4, 6]).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].0 < w[1].0));
    }
}
