//! Model manifolds, cosphere grids and sampled differential forms.
//!
//! Everything in scope lives on flat periodic carriers (circles, tori and
//! their cosphere bundles) plus the product S^2 x S^1 "stretch" geometry,
//! which is supported for quadrature and fixed-point enumeration only.
//! Quadrature is the periodic trapezoidal rule on flat directions and
//! Gauss-Legendre on the sphere polar angle, so smooth periodic integrands
//! are integrated with spectral accuracy.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub const TAU: f64 = 2.0 * PI;

/// Orientation sign of the xi > 0 component of S*S^1.
///
/// Calibrated once so that the fixed-point formula reproduces analytic index
/// -1 for the Hardy-Toeplitz compression of e^{ix}; every other scenario uses
/// the same convention.
pub const ORIENT_CIRCLE_PLUS: f64 = -1.0;
/// Orientation sign of the xi < 0 component of S*S^1.
pub const ORIENT_CIRCLE_MINUS: f64 = 1.0;
/// Orientation sign for a bare circle carrier (the odd Toeplitz formula's X).
pub const ORIENT_CIRCLE_BASE: f64 = -1.0;
/// Orientation sign for the 2-torus carrier (the even formula's X).
pub const ORIENT_TORUS2: f64 = 1.0;
/// Orientation sign for S*T^2.
pub const ORIENT_TORUS2_COSPHERE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ManifoldKind {
    Circle,
    Torus2,
    SphereCrossCircle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ManifoldModel {
    pub kind: ManifoldKind,
}

impl ManifoldModel {
    pub fn new(kind: ManifoldKind) -> Self {
        ManifoldModel { kind }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Circle => 1,
            ManifoldKind::Torus2 => 2,
            ManifoldKind::SphereCrossCircle => 3,
        }
    }

    /// Riemannian volume for the fixed unit flat / round product metric.
    pub fn volume(&self) -> f64 {
        match self.kind {
            ManifoldKind::Circle => TAU,
            ManifoldKind::Torus2 => TAU * TAU,
            ManifoldKind::SphereCrossCircle => 4.0 * PI * TAU,
        }
    }

    /// Volume of the unit sphere fiber of S*M.
    pub fn fiber_volume(&self) -> f64 {
        match self.kind {
            ManifoldKind::Circle => 2.0,
            ManifoldKind::Torus2 => TAU,
            ManifoldKind::SphereCrossCircle => 4.0 * PI,
        }
    }

    pub fn cosphere_volume(&self) -> f64 {
        self.volume() * self.fiber_volume()
    }

    /// Geodesic distance in the product metric; coordinates are angles
    /// (Circle: [x]; Torus2: [x, y]; SphereCrossCircle: [theta, phi, s]).
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            ManifoldKind::Circle => circle_dist(a[0], b[0]),
            ManifoldKind::Torus2 => {
                let dx = circle_dist(a[0], b[0]);
                let dy = circle_dist(a[1], b[1]);
                (dx * dx + dy * dy).sqrt()
            }
            ManifoldKind::SphereCrossCircle => {
                let ds = sphere_dist(a[0], a[1], b[0], b[1]);
                let dc = circle_dist(a[2], b[2]);
                (ds * ds + dc * dc).sqrt()
            }
        }
    }
}

/// Distance between two angles on the unit circle.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Reduce an angle into [0, 2pi).
pub fn wrap_angle(a: f64) -> f64 {
    a.rem_euclid(TAU)
}

/// Great-circle distance on the unit round sphere, points as (theta, phi).
pub fn sphere_dist(t1: f64, p1: f64, t2: f64, p2: f64) -> f64 {
    let c = t1.sin() * t2.sin() * (p1 - p2).cos() + t1.cos() * t2.cos();
    c.clamp(-1.0, 1.0).acos()
}

/// The discretized spaces every sampled object lives on.
///
/// A carrier is a disjoint union of flat periodic components (plus the
/// stretch cosphere, which carries quadrature data only). `res` is the node
/// count per periodic axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Carrier {
    /// S*S^1: two circles, fiber xi = +1 then xi = -1.
    CircleCosphere { res: usize },
    /// A single circle (X = S^1 in the odd formula; sub-circle strata).
    Circle { res: usize },
    /// The 2-torus (X = T^2 in the even formula; the identity stratum).
    Torus2 { res: usize },
    /// S*T^2 as a flat 3-torus (x, y, fiber angle).
    Torus2Cosphere { res: usize },
    /// S*(S^2 x S^1); quadrature and fixed strata only.
    StretchCosphere { res: usize },
}

#[derive(Clone, Debug)]
pub struct CarrierComponent {
    /// Node offset of this component in the flat enumeration.
    pub offset: usize,
    /// Row-major shape over periodic axes (empty for non-flat components).
    pub shape: Vec<usize>,
    /// Orientation sign used by the index-formula evaluators.
    pub sign: f64,
}

impl Carrier {
    /// Dimension available to differential forms (the manifold dimension of
    /// each component).
    pub fn form_dim(&self) -> usize {
        match self {
            Carrier::CircleCosphere { .. } | Carrier::Circle { .. } => 1,
            Carrier::Torus2 { .. } => 2,
            Carrier::Torus2Cosphere { .. } => 3,
            Carrier::StretchCosphere { .. } => 5,
        }
    }

    pub fn is_flat(&self) -> bool {
        !matches!(self, Carrier::StretchCosphere { .. })
    }

    pub fn resolution(&self) -> usize {
        match *self {
            Carrier::CircleCosphere { res }
            | Carrier::Circle { res }
            | Carrier::Torus2 { res }
            | Carrier::Torus2Cosphere { res }
            | Carrier::StretchCosphere { res } => res,
        }
    }

    pub fn components(&self) -> Vec<CarrierComponent> {
        match *self {
            Carrier::CircleCosphere { res } => vec![
                CarrierComponent {
                    offset: 0,
                    shape: vec![res],
                    sign: ORIENT_CIRCLE_PLUS,
                },
                CarrierComponent {
                    offset: res,
                    shape: vec![res],
                    sign: ORIENT_CIRCLE_MINUS,
                },
            ],
            Carrier::Circle { res } => vec![CarrierComponent {
                offset: 0,
                shape: vec![res],
                sign: ORIENT_CIRCLE_BASE,
            }],
            Carrier::Torus2 { res } => vec![CarrierComponent {
                offset: 0,
                shape: vec![res, res],
                sign: ORIENT_TORUS2,
            }],
            Carrier::Torus2Cosphere { res } => vec![CarrierComponent {
                offset: 0,
                shape: vec![res, res, res],
                sign: ORIENT_TORUS2_COSPHERE,
            }],
            Carrier::StretchCosphere { res: _ } => vec![CarrierComponent {
                offset: 0,
                shape: vec![],
                sign: 1.0,
            }],
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            Carrier::CircleCosphere { res } => 2 * res,
            Carrier::Circle { res } => res,
            Carrier::Torus2 { res } => res * res,
            Carrier::Torus2Cosphere { res } => res * res * res,
            Carrier::StretchCosphere { res } => res.pow(5),
        }
    }

    /// Quadrature weights aligned with the node enumeration.
    pub fn weights(&self) -> Vec<f64> {
        match *self {
            Carrier::CircleCosphere { res } => vec![TAU / res as f64; 2 * res],
            Carrier::Circle { res } => vec![TAU / res as f64; res],
            Carrier::Torus2 { res } => {
                let w = (TAU / res as f64).powi(2);
                vec![w; res * res]
            }
            Carrier::Torus2Cosphere { res } => {
                let w = (TAU / res as f64).powi(3);
                vec![w; res * res * res]
            }
            Carrier::StretchCosphere { res } => {
                let (gl_nodes, gl_w) = gauss_legendre(res);
                let _ = gl_nodes;
                let dphi = TAU / res as f64;
                let mut weights = Vec::with_capacity(res.pow(5));
                for wt in &gl_w {
                    for _phi in 0..res {
                        for _s in 0..res {
                            for wtf in &gl_w {
                                for _phif in 0..res {
                                    weights.push(wt * dphi * dphi * wtf * dphi);
                                }
                            }
                        }
                    }
                }
                weights
            }
        }
    }

    /// Base-point angle coordinates of every node.
    pub fn base_points(&self) -> Vec<Vec<f64>> {
        match *self {
            Carrier::CircleCosphere { res } => {
                let mut pts = Vec::with_capacity(2 * res);
                for _comp in 0..2 {
                    for i in 0..res {
                        pts.push(vec![TAU * i as f64 / res as f64]);
                    }
                }
                pts
            }
            Carrier::Circle { res } => (0..res)
                .map(|i| vec![TAU * i as f64 / res as f64])
                .collect(),
            Carrier::Torus2 { res } => {
                let mut pts = Vec::with_capacity(res * res);
                for i in 0..res {
                    for j in 0..res {
                        pts.push(vec![
                            TAU * i as f64 / res as f64,
                            TAU * j as f64 / res as f64,
                        ]);
                    }
                }
                pts
            }
            Carrier::Torus2Cosphere { res } => {
                let mut pts = Vec::with_capacity(res * res * res);
                for i in 0..res {
                    for j in 0..res {
                        for _k in 0..res {
                            pts.push(vec![
                                TAU * i as f64 / res as f64,
                                TAU * j as f64 / res as f64,
                            ]);
                        }
                    }
                }
                pts
            }
            Carrier::StretchCosphere { res } => {
                let (gl_nodes, _) = gauss_legendre(res);
                let mut pts = Vec::with_capacity(res.pow(5));
                for u in &gl_nodes {
                    let theta = u.clamp(-1.0, 1.0).acos();
                    for phi in 0..res {
                        for s in 0..res {
                            for _tf in 0..res {
                                for _pf in 0..res {
                                    pts.push(vec![
                                        theta,
                                        TAU * phi as f64 / res as f64,
                                        TAU * s as f64 / res as f64,
                                    ]);
                                }
                            }
                        }
                    }
                }
                pts
            }
        }
    }

    /// Unit covector at every node (components in the natural orthonormal
    /// frame of the carrier).
    pub fn fiber_points(&self) -> Vec<Vec<f64>> {
        match *self {
            Carrier::CircleCosphere { res } => {
                let mut pts = Vec::with_capacity(2 * res);
                for _ in 0..res {
                    pts.push(vec![1.0]);
                }
                for _ in 0..res {
                    pts.push(vec![-1.0]);
                }
                pts
            }
            Carrier::Circle { res } => (0..res).map(|_| vec![1.0]).collect(),
            Carrier::Torus2 { res } => (0..res * res).map(|_| vec![1.0]).collect(),
            Carrier::Torus2Cosphere { res } => {
                let mut pts = Vec::with_capacity(res * res * res);
                for _i in 0..res {
                    for _j in 0..res {
                        for k in 0..res {
                            let phi = TAU * k as f64 / res as f64;
                            pts.push(vec![phi.cos(), phi.sin()]);
                        }
                    }
                }
                pts
            }
            Carrier::StretchCosphere { res } => {
                let (gl_nodes, _) = gauss_legendre(res);
                let mut pts = Vec::with_capacity(res.pow(5));
                for _u in 0..res {
                    for _phi in 0..res {
                        for _s in 0..res {
                            for uf in &gl_nodes {
                                let tf = uf.clamp(-1.0, 1.0).acos();
                                for pf in 0..res {
                                    let phif = TAU * pf as f64 / res as f64;
                                    pts.push(vec![
                                        tf.sin() * phif.cos(),
                                        tf.sin() * phif.sin(),
                                        tf.cos(),
                                    ]);
                                }
                            }
                        }
                    }
                }
                pts
            }
        }
    }
}

/// A cosphere-bundle quadrature grid.
#[derive(Clone, Debug)]
pub struct CosphereGrid {
    pub manifold: ManifoldModel,
    pub carrier: Carrier,
    pub base_points: Vec<Vec<f64>>,
    pub fiber_points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

pub fn build_cosphere_grid(manifold: ManifoldModel, resolution: usize) -> Result<CosphereGrid> {
    if resolution < 4 {
        return Err(Error::BadResolution {
            got: resolution,
            min: 4,
        });
    }
    let carrier = match manifold.kind {
        ManifoldKind::Circle => Carrier::CircleCosphere { res: resolution },
        ManifoldKind::Torus2 => Carrier::Torus2Cosphere { res: resolution },
        ManifoldKind::SphereCrossCircle => Carrier::StretchCosphere { res: resolution },
    };
    Ok(CosphereGrid {
        manifold,
        carrier,
        base_points: carrier.base_points(),
        fiber_points: carrier.fiber_points(),
        weights: carrier.weights(),
    })
}

/// A degree-`degree` complex differential form sampled on a carrier.
///
/// `values` is (nodes, form components), with the form basis running over
/// size-`degree` axis subsets in lexicographic order.
#[derive(Clone, Debug)]
pub struct SampledForm {
    pub degree: usize,
    pub carrier: Carrier,
    pub values: ndarray::Array2<Complex64>,
}

impl SampledForm {
    pub fn constant(carrier: Carrier, value: Complex64) -> Self {
        SampledForm {
            degree: 0,
            carrier,
            values: ndarray::Array2::from_elem((carrier.node_count(), 1), value),
        }
    }

    pub fn zero(carrier: Carrier, degree: usize) -> Self {
        let ncomp = form_basis(carrier.form_dim(), degree).len();
        SampledForm {
            degree,
            carrier,
            values: ndarray::Array2::zeros((carrier.node_count(), ncomp)),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Quadrature of a top-degree form (unsigned; orientation signs are applied
/// by the index-formula evaluators).
pub fn integrate_form(form: &SampledForm, grid: &CosphereGrid) -> Result<Complex64> {
    integrate_form_on(form, grid.carrier)
}

pub fn integrate_form_on(form: &SampledForm, carrier: Carrier) -> Result<Complex64> {
    if form.carrier != carrier {
        return Err(Error::AlgebraMismatch(
            "form carrier does not match grid".into(),
        ));
    }
    if form.degree != carrier.form_dim() {
        return Err(Error::DegreeMismatch {
            degree: form.degree,
            carrier_dim: carrier.form_dim(),
        });
    }
    let w = carrier.weights();
    let mut total = Complex64::new(0.0, 0.0);
    for (i, wi) in w.iter().enumerate() {
        total += form.values[(i, 0)] * *wi;
    }
    Ok(total)
}

/// Oriented integral: each carrier component contributes with its sign.
pub fn integrate_form_oriented(form: &SampledForm, carrier: Carrier) -> Result<Complex64> {
    if form.degree != carrier.form_dim() {
        return Err(Error::DegreeMismatch {
            degree: form.degree,
            carrier_dim: carrier.form_dim(),
        });
    }
    let w = carrier.weights();
    let mut total = Complex64::new(0.0, 0.0);
    for comp in carrier.components() {
        let len: usize = comp.shape.iter().product::<usize>().max(1);
        for i in comp.offset..comp.offset + len {
            total += form.values[(i, 0)] * w[i] * comp.sign;
        }
    }
    Ok(total)
}

/// Size-`deg` subsets of 0..dim in lexicographic order: the form basis.
pub fn form_basis(dim: usize, deg: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, dim: usize, deg: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if deg == 0 {
            out.push(cur.clone());
            return;
        }
        for a in start..dim {
            cur.push(a);
            rec(a + 1, dim, deg - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, dim, deg, &mut Vec::new(), &mut out);
    out
}

/// Wedge of two basis subsets: the merged subset index and the permutation
/// sign, or `None` when they intersect.
pub fn wedge_merge(dim: usize, i_set: &[usize], j_set: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut merged: Vec<usize> = Vec::with_capacity(i_set.len() + j_set.len());
    merged.extend_from_slice(i_set);
    merged.extend_from_slice(j_set);
    let _ = dim;
    // count inversions of the concatenation; duplicates kill the wedge
    let mut sign = 1.0;
    for a in 0..merged.len() {
        for b in a + 1..merged.len() {
            if merged[a] == merged[b] {
                return None;
            }
            if merged[a] > merged[b] {
                sign = -sign;
            }
        }
    }
    let mut sorted = merged.clone();
    sorted.sort_unstable();
    Some((sorted, sign))
}

pub fn basis_index(basis: &[Vec<usize>], set: &[usize]) -> usize {
    basis
        .iter()
        .position(|b| b.as_slice() == set)
        .expect("basis subset")
}

// ---------------------------------------------------------------------------
// spectral helpers on flat components
// ---------------------------------------------------------------------------

fn fft_along_axis(data: &mut [Complex64], shape: &[usize], axis: usize, inverse: bool) {
    let n = shape[axis];
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let inner = stride;
    let axis_block = n * stride;
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * axis_block + i;
            for k in 0..n {
                line[k] = data[base + k * stride];
            }
            fft.process(&mut line);
            let scale = if inverse { 1.0 / n as f64 } else { 1.0 };
            for k in 0..n {
                data[base + k * stride] = line[k] * scale;
            }
        }
    }
}

/// Fourier mode of DFT bin `i` for length `n` (Nyquist mapped to +n/2).
pub fn bin_mode(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn apply_mode_factor(
    data: &mut [Complex64],
    shape: &[usize],
    axis: usize,
    factor: impl Fn(i64) -> Complex64,
) {
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let axis_block = n * stride;
    for o in 0..outer {
        for i in 0..stride {
            let base = o * axis_block + i;
            for k in 0..n {
                let f = factor(bin_mode(k, n));
                data[base + k * stride] *= f;
            }
        }
    }
}

/// Exact translation of a band-limited sample: f(x) -> f(x + alpha) per axis.
pub fn translate_component(values: &mut [Complex64], shape: &[usize], shifts: &[f64]) {
    for (axis, &alpha) in shifts.iter().enumerate() {
        if alpha == 0.0 {
            continue;
        }
        fft_along_axis(values, shape, axis, false);
        let n = shape[axis] as f64;
        apply_mode_factor(values, shape, axis, |k| {
            Complex64::from_polar(1.0 / 1.0, k as f64 * alpha)
        });
        // normalize the forward transform on the way back
        fft_along_axis(values, shape, axis, true);
        let _ = n;
    }
}

/// Spectral derivative along one axis (Nyquist mode dropped).
pub fn derivative_component(values: &mut [Complex64], shape: &[usize], axis: usize) {
    fft_along_axis(values, shape, axis, false);
    let n = shape[axis];
    apply_mode_factor(values, shape, axis, |k| {
        if n % 2 == 0 && k == (n as i64) / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k as f64)
        }
    });
    fft_along_axis(values, shape, axis, true);
}

/// Fourier coefficients of a sampled component, keyed by mode vector.
pub fn fourier_coefficients(
    values: &[Complex64],
    shape: &[usize],
) -> std::collections::BTreeMap<Vec<i64>, Complex64> {
    let mut data = values.to_vec();
    for axis in 0..shape.len() {
        fft_along_axis(&mut data, shape, axis, false);
    }
    let total: usize = shape.iter().product();
    let scale = 1.0 / total as f64;
    let mut out = std::collections::BTreeMap::new();
    for (idx, v) in data.iter().enumerate() {
        let mut rem = idx;
        let mut mode = Vec::with_capacity(shape.len());
        for axis in 0..shape.len() {
            let stride: usize = shape[axis + 1..].iter().product();
            let i = rem / stride;
            rem %= stride;
            mode.push(bin_mode(i, shape[axis]));
        }
        let c = v * scale;
        if c.norm() > 1e-300 {
            out.insert(mode, c);
        }
    }
    out
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess, Newton refinement
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
