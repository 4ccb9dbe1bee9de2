//! The pointwise functionals `Σ^P(x)` (maps) and `Σ̂^P(x)` (flows) for a
//! conformal metric, and their maximization over the domain by grid search
//! with a single local refinement.
//!
//! For a map, the spectrum at `x` is the vector of base-2 log singular values
//! of `e^{Δr/2} p^{1/2} A(x) p^{-1/2}` with `Δr = r_a(φ(x)) - r_a(x)`. For a
//! flow it is the descending eigenvalues of
//! `p^{1/2} A(x) p^{-1/2} + p^{-1/2} A(x)ᵀ p^{1/2} + ṙ_a(x) I`.
//! In both cases the pointwise value is the sum of the positive entries.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::ConformalMetric;
use crate::poly::{CompiledPoly, PolyBasis};
use crate::spd::SINGULAR_REL_TOL;
use crate::systems::{DiscreteMap, Domain, Dynamics, Grid, SystemCase, VectorField};

/// Relative spectral gap below which `gap_ok` is cleared.
pub const GAP_REL_TOL: f64 = 1e-8;

/// Grid points handled by one parallel work item.
const CHUNK: usize = 1 << 13;

/// Value, maximizing `k` and spectrum of the pointwise functional.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEval {
    pub value: f64,
    pub k_star: usize,
    pub spectrum: Vec<f64>,
}

impl PointEval {
    fn from_spectrum(spectrum: Vec<f64>) -> Self {
        let (value, k_star) = positive_part(&spectrum);
        Self { value, k_star, spectrum }
    }
}

/// `(Σ max(0, s_i), #{s_i > 0})` for a descending spectrum; the count is the
/// smallest maximizer of the partial sums.
fn positive_part(spectrum: &[f64]) -> (f64, usize) {
    spectrum.iter().filter(|&&s| s > 0.0).fold((0.0, 0), |(v, k), &s| (v + s, k + 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerMaxResult {
    pub x_star: Vec<f64>,
    pub x_star_param: Vec<f64>,
    pub k_star: usize,
    /// Bits for maps; the pre-division `Σ̂` value for flows.
    pub value: f64,
    pub spectrum: Vec<f64>,
    pub gap_ok: bool,
    /// Whether the maximizer came from the refinement pass.
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridConfig {
    pub counts: Vec<usize>,
    pub refine: bool,
}

impl GridConfig {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts, refine: true }
    }

    pub fn without_refinement(counts: Vec<usize>) -> Self {
        Self { counts, refine: false }
    }
}

/// Thread pool used for grid evaluation. `None` runs on rayon's global pool.
#[derive(Debug, Clone, Default)]
pub struct Workers(Option<Arc<rayon::ThreadPool>>);

impl Workers {
    pub fn global() -> Self {
        Self(None)
    }

    pub fn with_threads(n: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
        Ok(Self(Some(Arc::new(pool))))
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.0 {
            Some(pool) => pool.install(f),
            None => f(),
        }
    }
}

/// A metric prepared for repeated pointwise evaluation: `p^{1/2}` and
/// `p^{-1/2}` are computed once.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    dynamics: &'a Dynamics,
    basis: &'a PolyBasis,
    r: CompiledPoly,
    grad_r: Vec<CompiledPoly>,
    poly_active: bool,
    n: usize,
    sqrt: Vec<f64>,
    inv_sqrt: Vec<f64>,
}

/// Per-thread buffers for [`Evaluator`].
#[derive(Debug, Clone)]
pub struct Scratch {
    image: Vec<f64>,
    jac: Vec<f64>,
    tmp: Vec<f64>,
    m: Vec<f64>,
    powers: Vec<f64>,
    spectrum: Vec<f64>,
    param: Vec<f64>,
    point: Vec<f64>,
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

impl<'a> Evaluator<'a> {
    pub fn new(dynamics: &'a Dynamics, metric: &'a ConformalMetric) -> Result<Self> {
        let n = dynamics.dim();
        if metric.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: metric.dim() });
        }
        let f = metric.p.factor();
        let (basis, a) = (metric.basis(), metric.coeffs.coefficients());
        Ok(Self {
            dynamics,
            basis,
            r: CompiledPoly::new(basis, a),
            grad_r: CompiledPoly::gradient(basis, a),
            poly_active: !metric.coeffs.is_zero(),
            n,
            sqrt: row_major(&f.sqrt),
            inv_sqrt: row_major(&f.inv_sqrt),
        })
    }

    pub fn scratch(&self) -> Scratch {
        let n = self.n;
        Scratch {
            image: vec![0.0; n],
            jac: vec![0.0; n * n],
            tmp: vec![0.0; n * n],
            m: vec![0.0; n * n],
            powers: vec![0.0; self.basis.powers_len()],
            spectrum: vec![0.0; n],
            param: vec![0.0; n],
            point: vec![0.0; n],
        }
    }

    /// `m = p^{1/2} · jac · p^{-1/2}` (row-major).
    #[inline]
    fn conjugate(&self, s: &mut Scratch) {
        match self.n {
            2 => conjugate_fixed::<2>(&self.sqrt, &s.jac, &self.inv_sqrt, &mut s.m),
            3 => conjugate_fixed::<3>(&self.sqrt, &s.jac, &self.inv_sqrt, &mut s.m),
            n => {
                let l = DMatrix::from_row_slice(n, n, &self.sqrt);
                let a = DMatrix::from_row_slice(n, n, &s.jac);
                let r = DMatrix::from_row_slice(n, n, &self.inv_sqrt);
                s.m.copy_from_slice(row_major(&(l * a * r)).as_slice());
            }
        }
    }

    /// Fills `s.spectrum` (descending) for the point `x`.
    pub fn spectrum_into(&self, x: &[f64], s: &mut Scratch) -> Result<()> {
        match self.dynamics {
            Dynamics::Discrete(map) => self.discrete_spectrum(&**map, x, s),
            Dynamics::Continuous(field) => {
                self.continuous_spectrum(&**field, x, s);
                Ok(())
            }
        }
    }

    /// `φ(x)`, `A(x)` and `Δr = r_a(φ(x)) - r_a(x)`; leaves `p^{1/2} A p^{-1/2}`
    /// in `s.m`.
    #[inline]
    fn discrete_prepare(&self, map: &dyn DiscreteMap, x: &[f64], s: &mut Scratch) -> f64 {
        map.map(x, &mut s.image);
        map.jacobian(x, &mut s.jac);
        let dr = if self.poly_active {
            self.basis.fill_powers(&s.image, &mut s.powers);
            let r_image = self.r.eval(&s.powers);
            self.basis.fill_powers(x, &mut s.powers);
            let r_x = self.r.eval(&s.powers);
            r_image - r_x
        } else {
            0.0
        };
        self.conjugate(s);
        dr
    }

    /// Singular values of the 2×2 matrix in `s.m`, descending.
    #[inline]
    fn singular_values_2(s: &Scratch, x: &[f64]) -> Result<(f64, f64)> {
        let m = &s.m;
        let fro2 = m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3];
        let det = (m[0] * m[3] - m[1] * m[2]).abs();
        let s1 = ((fro2 + 2.0 * det).sqrt() + (fro2 - 2.0 * det).max(0.0).sqrt()) * 0.5;
        let s2 = if s1 > 0.0 { det / s1 } else { 0.0 };
        if !(s2 > SINGULAR_REL_TOL * s1) {
            return Err(Error::SingularJacobian { x: x.to_vec() });
        }
        Ok((s1, s2))
    }

    fn discrete_spectrum(&self, map: &dyn DiscreteMap, x: &[f64], s: &mut Scratch) -> Result<()> {
        let n = self.n;
        let shift = self.discrete_prepare(map, x, s) / (2.0 * LN_2);
        if n == 2 {
            let (s1, s2) = Self::singular_values_2(s, x)?;
            s.spectrum[0] = s1.log2() + shift;
            s.spectrum[1] = s2.log2() + shift;
        } else {
            let mat = DMatrix::from_row_slice(n, n, &s.m);
            let sv = crate::spd::singular_values(&mat)?;
            if !(sv[n - 1] > SINGULAR_REL_TOL * sv[0]) {
                return Err(Error::SingularJacobian { x: x.to_vec() });
            }
            for (dst, v) in s.spectrum.iter_mut().zip(sv) {
                *dst = v.log2() + shift;
            }
        }
        Ok(())
    }

    fn continuous_spectrum(&self, field: &dyn VectorField, x: &[f64], s: &mut Scratch) {
        let n = self.n;
        field.jacobian(x, &mut s.jac);
        let rdot = if self.poly_active {
            field.field(x, &mut s.image);
            self.basis.fill_powers(x, &mut s.powers);
            self.grad_r.iter().zip(&s.image).map(|(g, f)| g.eval(&s.powers) * f).sum()
        } else {
            0.0
        };
        self.conjugate(s);
        match n {
            2 => {
                symmetric_part::<2>(&s.m, rdot, &mut s.tmp);
                sym2_eigenvalues(&s.tmp, &mut s.spectrum)
            }
            3 => {
                symmetric_part::<3>(&s.m, rdot, &mut s.tmp);
                sym3_eigenvalues(&s.tmp, &mut s.spectrum)
            }
            _ => {
                for i in 0..n {
                    for j in 0..n {
                        s.tmp[i * n + j] = s.m[i * n + j] + s.m[j * n + i];
                    }
                    s.tmp[i * n + i] += rdot;
                }
                let h = DMatrix::from_row_slice(n, n, &s.tmp);
                let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
                ev.sort_by(|a, b| b.total_cmp(a));
                s.spectrum.copy_from_slice(&ev);
            }
        }
    }

    /// Pointwise value `Σ max(0, s_i)`.
    #[inline]
    pub fn value(&self, x: &[f64], s: &mut Scratch) -> Result<f64> {
        self.spectrum_into(x, s)?;
        let (v, _) = positive_part(&s.spectrum);
        // max(0, NaN) is 0, so a NaN entry would otherwise vanish
        if !v.is_finite() || s.spectrum.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite { x: x.to_vec() });
        }
        Ok(v)
    }

    /// A quantity with the same ordering as [`Evaluator::value`], cheaper to
    /// compute: for planar maps `Π max(1, α_i e^{Δr/2})`, whose base-2 log is
    /// the value.
    #[inline]
    pub fn score(&self, x: &[f64], s: &mut Scratch) -> Result<f64> {
        let v = match self.dynamics {
            Dynamics::Discrete(map) if self.n == 2 => {
                let c = (0.5 * self.discrete_prepare(&**map, x, s)).exp();
                if !c.is_finite() {
                    return Err(Error::NonFinite { x: x.to_vec() });
                }
                let (s1, s2) = Self::singular_values_2(s, x)?;
                (s1 * c).max(1.0) * (s2 * c).max(1.0)
            }
            _ => return self.value(x, s),
        };
        if !v.is_finite() {
            return Err(Error::NonFinite { x: x.to_vec() });
        }
        Ok(v)
    }

    pub fn point_eval(&self, x: &[f64]) -> Result<PointEval> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let mut s = self.scratch();
        self.spectrum_into(x, &mut s)?;
        let eval = PointEval::from_spectrum(s.spectrum.clone());
        if !eval.value.is_finite() || eval.spectrum.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite { x: x.to_vec() });
        }
        Ok(eval)
    }
}

#[inline(always)]
fn conjugate_fixed<const N: usize>(l: &[f64], a: &[f64], r: &[f64], out: &mut [f64]) {
    let (l, a, r, out) = (&l[..N * N], &a[..N * N], &r[..N * N], &mut out[..N * N]);
    let mut t = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..N {
            let mut acc = 0.0;
            for k in 0..N {
                acc += l[i * N + k] * a[k * N + j];
            }
            t[i][j] = acc;
        }
    }
    for i in 0..N {
        for j in 0..N {
            let mut acc = 0.0;
            for k in 0..N {
                acc += t[i][k] * r[k * N + j];
            }
            out[i * N + j] = acc;
        }
    }
}

/// `h = m + mᵀ + shift·I`.
#[inline(always)]
fn symmetric_part<const N: usize>(m: &[f64], shift: f64, h: &mut [f64]) {
    let (m, h) = (&m[..N * N], &mut h[..N * N]);
    for i in 0..N {
        for j in 0..N {
            h[i * N + j] = m[i * N + j] + m[j * N + i];
        }
        h[i * N + i] += shift;
    }
}

fn sym2_eigenvalues(h: &[f64], out: &mut [f64]) {
    let mean = 0.5 * (h[0] + h[3]);
    let half_diff = 0.5 * (h[0] - h[3]);
    let off = 0.5 * (h[1] + h[2]);
    let r = half_diff.hypot(off);
    out[0] = mean + r;
    out[1] = mean - r;
}

/// Eigenvalues of a symmetric 3×3 matrix, descending. Uses the
/// trigonometric closed form, falling back to an iterative solver when two
/// eigenvalues nearly coincide and `acos` loses accuracy.
fn sym3_eigenvalues(h: &[f64], out: &mut [f64]) {
    let (a00, a11, a22) = (h[0], h[4], h[8]);
    let (a01, a02, a12) = (0.5 * (h[1] + h[3]), 0.5 * (h[2] + h[6]), 0.5 * (h[5] + h[7]));
    let p1 = a01 * a01 + a02 * a02 + a12 * a12;
    let q = (a00 + a11 + a22) / 3.0;
    let (b00, b11, b22) = (a00 - q, a11 - q, a22 - q);
    let p2 = b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * p1;
    if p2 == 0.0 {
        out.fill(q);
        return;
    }
    let p = (p2 / 6.0).sqrt();
    let det = b00 * (b11 * b22 - a12 * a12) - a01 * (a01 * b22 - a12 * a02) + a02 * (a01 * a12 - b11 * a02);
    let r = det / (2.0 * p * p * p);
    if r.abs() > 1.0 - 1e-6 {
        let m = Matrix3::new(a00, a01, a02, a01, a11, a12, a02, a12, a22);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        out.copy_from_slice(&ev);
        return;
    }
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    out[0] = e1;
    out[1] = 3.0 * q - e1 - e3;
    out[2] = e3;
}

/// `Σ^P(x)` for a discrete-time system.
pub fn discrete_sigma_at(case: &SystemCase, metric: &ConformalMetric, x: &[f64]) -> Result<PointEval> {
    if !case.is_discrete() {
        return Err(Error::InvalidInput(format!("{} is not a discrete-time system", case.name)));
    }
    Evaluator::new(&case.dynamics, metric)?.point_eval(x)
}

/// `Σ̂^P(x)` for a continuous-time system (before division by `2 ln 2`).
pub fn continuous_sigma_at(case: &SystemCase, metric: &ConformalMetric, x: &[f64]) -> Result<PointEval> {
    if case.is_discrete() {
        return Err(Error::InvalidInput(format!("{} is not a continuous-time system", case.name)));
    }
    Evaluator::new(&case.dynamics, metric)?.point_eval(x)
}

/// Pointwise functional of whichever kind matches the case.
pub fn sigma_at(case: &SystemCase, metric: &ConformalMetric, x: &[f64]) -> Result<PointEval> {
    Evaluator::new(&case.dynamics, metric)?.point_eval(x)
}

/// Best `(value, index)` of a scan, ties to the smaller index.
#[derive(Debug, Clone)]
enum ScanOutcome {
    Best(Option<(f64, usize)>),
    Failed(usize, Error),
}

fn better(a: Option<(f64, usize)>, b: Option<(f64, usize)>) -> Option<(f64, usize)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

fn combine(a: ScanOutcome, b: ScanOutcome) -> ScanOutcome {
    match (a, b) {
        (ScanOutcome::Failed(i, e), ScanOutcome::Failed(j, f)) => {
            if i <= j {
                ScanOutcome::Failed(i, e)
            } else {
                ScanOutcome::Failed(j, f)
            }
        }
        (f @ ScanOutcome::Failed(..), _) | (_, f @ ScanOutcome::Failed(..)) => f,
        (ScanOutcome::Best(x), ScanOutcome::Best(y)) => ScanOutcome::Best(better(x, y)),
    }
}

fn scan_range(ev: &Evaluator<'_>, grid: &Grid, range: std::ops::Range<usize>, s: &mut Scratch) -> ScanOutcome {
    let mut best: Option<(f64, usize)> = None;
    let mut param = std::mem::take(&mut s.param);
    let mut point = std::mem::take(&mut s.point);
    let mut outcome = None;
    let mut cursor = grid.cursor(range.start);
    for idx in range {
        let inside = cursor.point(&mut param, &mut point);
        cursor.advance();
        if !inside {
            continue;
        }
        match ev.score(&point, s) {
            Ok(v) => {
                if best.map_or(true, |(b, _)| v > b) {
                    best = Some((v, idx));
                }
            }
            Err(e) => {
                outcome = Some(ScanOutcome::Failed(idx, e));
                break;
            }
        }
    }
    s.param = param;
    s.point = point;
    outcome.unwrap_or(ScanOutcome::Best(best))
}

/// Maximum of [`Evaluator::score`] over the member points of `grid`, as
/// `(score, index)`. Deterministic for any number of workers.
pub fn scan_grid(ev: &Evaluator<'_>, grid: &Grid, workers: &Workers) -> Result<Option<(f64, usize)>> {
    let len = grid.len();
    let chunks = len.div_ceil(CHUNK);
    let outcome = workers.install(|| {
        (0..chunks)
            .into_par_iter()
            .map_init(
                || ev.scratch(),
                |s, c| scan_range(ev, grid, c * CHUNK..((c + 1) * CHUNK).min(len), s),
            )
            .reduce(|| ScanOutcome::Best(None), combine)
    });
    match outcome {
        ScanOutcome::Best(b) => Ok(b),
        ScanOutcome::Failed(_, e) => Err(e),
    }
}

/// Every `(index, value)` of `grid`, in index order.
pub fn grid_values(case: &SystemCase, metric: &ConformalMetric, grid: &Grid) -> Result<Vec<(usize, f64)>> {
    let ev = Evaluator::new(&case.dynamics, metric)?;
    let mut s = ev.scratch();
    let n = grid.dim();
    let (mut u, mut x) = (vec![0.0; n], vec![0.0; n]);
    let mut out = Vec::new();
    for idx in 0..grid.len() {
        if grid.point_at(idx, &mut u, &mut x) {
            out.push((idx, ev.value(&x, &mut s)?));
        }
    }
    Ok(out)
}

fn has_gap(spectrum: &[f64], k: usize, discrete: bool) -> bool {
    if k == 0 || k >= spectrum.len() {
        return true;
    }
    let (hi, lo) = (spectrum[k - 1], spectrum[k]);
    if discrete {
        // (α_k - α_{k+1}) / α_k with α = 2^s
        1.0 - (lo - hi).exp2() >= GAP_REL_TOL
    } else {
        let scale = spectrum.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        (hi - lo) / scale >= GAP_REL_TOL
    }
}

fn check_grid_config(case: &SystemCase, grid: &GridConfig) -> Result<()> {
    if grid.counts.len() != case.dim() {
        return Err(Error::Config(format!(
            "{} needs {} grid counts, got {}",
            case.name,
            case.dim(),
            grid.counts.len()
        )));
    }
    Ok(())
}

/// Solves the inner maximization over the domain: a coarse grid scan, then
/// one scan of a scaled-down grid around the coarse maximizer.
pub fn maximize(case: &SystemCase, metric: &ConformalMetric, grid: &GridConfig, workers: &Workers) -> Result<InnerMaxResult> {
    check_grid_config(case, grid)?;
    let ev = Evaluator::new(&case.dynamics, metric)?;
    let coarse = Grid::coarse(&case.domain, &grid.counts)?;
    let (coarse_value, coarse_idx) = scan_grid(&ev, &coarse, workers)?
        .ok_or_else(|| Error::InvalidInput("grid has no points inside the domain".into()))?;
    let n = case.dim();
    let mut param = vec![0.0; n];
    coarse.param_at(coarse_idx, &mut param);

    let mut best_param = param.clone();
    let mut refined = false;
    if grid.refine {
        let fine = Grid::refined(&case.domain, &grid.counts, &param)?;
        if let Some((v, idx)) = scan_grid(&ev, &fine, workers)? {
            if v > coarse_value {
                fine.param_at(idx, &mut best_param);
                refined = true;
            }
        }
    }
    let mut x_star = vec![0.0; n];
    case.domain.chart(&best_param, &mut x_star);
    let eval = ev.point_eval(&x_star)?;
    let gap_ok = has_gap(&eval.spectrum, eval.k_star, case.is_discrete());
    if !gap_ok {
        log::warn!("spectral gap at k* = {} below tolerance at x* = {:?}", eval.k_star, x_star);
    }
    Ok(InnerMaxResult {
        x_star,
        x_star_param: best_param,
        k_star: eval.k_star,
        value: eval.value,
        spectrum: eval.spectrum,
        gap_ok,
        refined,
    })
}

/// Converts a maximized value into an entropy estimate in bits: maps are
/// already in bits, flows are divided by `2 ln 2`.
pub fn value_to_entropy(case: &SystemCase, value: f64) -> f64 {
    if case.is_discrete() {
        value
    } else {
        value / (2.0 * LN_2)
    }
}

/// Upper estimate of the restoration entropy certified by `metric`, up to the
/// grid error of the inner maximization.
pub fn entropy_estimate(case: &SystemCase, metric: &ConformalMetric, grid: &GridConfig, workers: &Workers) -> Result<f64> {
    let inner = maximize(case, metric, grid, workers)?;
    Ok(value_to_entropy(case, inner.value))
}

/// Cylinder domains only admit `r_a` constant along the angle; the polynomial
/// degree must be zero there.
pub fn check_degree_for_domain(domain: &Domain, degree: usize) -> Result<()> {
    if domain.is_cylinder() && degree != 0 {
        return Err(Error::Config(format!(
            "polynomial degree must be 0 on a cylinder domain, got {degree}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::PolyCoeffs;
    use crate::spd::SpdMatrix;
    use crate::systems::{bouncing_ball_case, henon_case, lorenz_case};

    fn identity_metric(n: usize, d: usize) -> ConformalMetric {
        ConformalMetric::identity(Arc::new(PolyBasis::new(n, d, false).unwrap()))
    }

    #[test]
    fn euclidean_metric_reduces_to_plain_singular_values() {
        let case = henon_case();
        let m = identity_metric(2, 3);
        let x = [0.7, -0.4];
        let got = discrete_sigma_at(&case, &m, &x).unwrap();
        let a = case.dynamics.jacobian(&x);
        let sv = crate::spd::log_singular_vector(&a).unwrap();
        let want: f64 = sv.iter().map(|s| s.max(0.0)).sum();
        assert!((got.value - want).abs() < 1e-14);
        // log α₁ + log α₂ = log |det A| = log 0.3
        assert!((got.spectrum[0] + got.spectrum[1] - 0.3f64.log2()).abs() < 1e-13);
        assert!(got.k_star <= 1);
    }

    #[test]
    fn bouncing_ball_peak_point() {
        let case = bouncing_ball_case(0.1, 2.0).unwrap();
        let m = identity_metric(2, 0);
        let s = std::f64::consts::FRAC_PI_2;
        let got = discrete_sigma_at(&case, &m, &[s - 0.5, 0.5]).unwrap();
        // AᵀA = [[5, 5.2], [5.2, 5.41]]
        let (t, d) = (10.41f64, 5.0 * 5.41 - 5.2 * 5.2);
        let l1 = 0.5 * (t + (t * t - 4.0 * d).sqrt());
        assert!((got.value - 0.5 * l1.log2()).abs() < 1e-13);
        assert!((got.value - 1.6901).abs() < 1e-3);
        assert_eq!(got.k_star, 1);
    }

    #[test]
    fn lorenz_origin() {
        let case = lorenz_case(10.0, 28.0, 8.0 / 3.0).unwrap();
        let m = identity_metric(3, 2);
        let got = continuous_sigma_at(&case, &m, &[0.0, 0.0, 0.0]).unwrap();
        let l1 = -11.0 + (81.0f64 + 1444.0).sqrt();
        assert!((got.value - l1).abs() < 1e-12);
        assert!((got.spectrum[0] - l1).abs() < 1e-12);
        assert_eq!(got.k_star, 1);
        assert!(discrete_sigma_at(&case, &m, &[0.0; 3]).is_err());
    }

    #[test]
    fn orbital_shift_moves_whole_spectrum() {
        let case = lorenz_case(10.0, 28.0, 8.0 / 3.0).unwrap();
        let basis = Arc::new(PolyBasis::new(3, 2, false).unwrap());
        let x = [1.0, 2.0, 30.0];
        let fx = case.dynamics.image(&x);
        // r = c·x₁ gives ṙ = c·F₁
        let c = 0.37;
        let mut a = vec![0.0; basis.len()];
        a[basis.index_of(&[1, 0, 0]).unwrap()] = c;
        let m = ConformalMetric::new(PolyCoeffs::new(basis.clone(), a).unwrap(), SpdMatrix::identity(3)).unwrap();
        let plain = continuous_sigma_at(&case, &identity_metric(3, 2), &x).unwrap();
        let shifted = continuous_sigma_at(&case, &m, &x).unwrap();
        for (p, q) in plain.spectrum.iter().zip(&shifted.spectrum) {
            assert!((q - p - c * fx[0]).abs() < 1e-11);
        }
    }

    #[test]
    fn sym3_matches_iterative_solver() {
        let mats = [
            [4.0, 1.0, -2.0, 1.0, 3.0, 0.5, -2.0, 0.5, -1.0],
            [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            [2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, -1.0],
            [-20.0, 38.0, 0.0, 38.0, -2.0, 0.0, 0.0, 0.0, -16.0 / 3.0],
        ];
        for h in mats {
            let mut got = [0.0; 3];
            sym3_eigenvalues(&h, &mut got);
            let mut want: Vec<f64> = DMatrix::from_row_slice(3, 3, &h).symmetric_eigenvalues().iter().copied().collect();
            want.sort_by(|a, b| b.total_cmp(a));
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-12 * (1.0 + w.abs()), "{got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn degenerate_gap_is_flagged() {
        assert!(!has_gap(&[1.0, 1.0, -1.0], 1, false));
        assert!(has_gap(&[1.0, 0.5, -1.0], 1, false));
        assert!(has_gap(&[1.0, 1.0], 2, true));
        assert!(!has_gap(&[0.5, 0.5], 1, true));
    }

    #[test]
    fn cylinder_requires_degree_zero() {
        let case = bouncing_ball_case(0.1, 2.0).unwrap();
        assert!(check_degree_for_domain(&case.domain, 0).is_ok());
        assert!(matches!(check_degree_for_domain(&case.domain, 1), Err(Error::Config(_))));
    }
}
