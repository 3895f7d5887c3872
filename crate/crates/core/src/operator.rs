//! Finite-section realizations of operators with shifts.
//!
//! Operators are D = sum_g (g*)^{-1} o D_g with D_g a sum of products of
//! {multiplication by a matrix trig polynomial, d/dx_j to a power, constant
//! matrix}. Assembly follows exact Fourier rules: multiplication by e^{ikx}
//! shifts modes, derivatives are diagonal, and the inverse shift is the
//! diagonal phase e^{-i n.alpha} on the output mode. Entries leaving the
//! retained window are dropped; the plateau protocol downstream absorbs the
//! boundary layer this creates.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use ndarray::{Array2, Array4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Carrier, ManifoldKind};
use crate::group::{GroupElement, IsometryGroup};
use crate::symbol::{carrier_shifts, CrossedSymbol};

/// One atomic factor of a local term.
#[derive(Clone, Debug)]
pub enum Factor {
    /// Matrix trig polynomial: mode vector -> m x m coefficient.
    MultTrig(BTreeMap<Vec<i64>, Array2<Complex64>>),
    /// (d/dx_axis)^power.
    Deriv { axis: usize, power: u32 },
    Const(Array2<Complex64>),
}

impl Factor {
    fn order(&self) -> i64 {
        match self {
            Factor::Deriv { power, .. } => *power as i64,
            _ => 0,
        }
    }
}

/// D_g as a sum of factor products (each product composed left to right,
/// rightmost factor acting first).
pub type LocalPart = Vec<Vec<Factor>>;

#[derive(Clone, Debug)]
pub struct OperatorSpec {
    pub group: Arc<IsometryGroup>,
    pub m: usize,
    pub order: i64,
    pub terms: Vec<(GroupElement, LocalPart)>,
}

impl OperatorSpec {
    pub fn new(
        group: Arc<IsometryGroup>,
        m: usize,
        order: i64,
        terms: Vec<(GroupElement, LocalPart)>,
    ) -> Result<Self> {
        let mut top_seen = false;
        for (g, part) in &terms {
            if g.group_id() != group.id() {
                return Err(Error::GroupMismatch);
            }
            for product in part {
                let prod_order: i64 = product.iter().map(Factor::order).sum();
                if prod_order > order {
                    return Err(Error::UnsupportedTerm(format!(
                        "local product of order {prod_order} exceeds declared order {order}"
                    )));
                }
                if prod_order == order {
                    top_seen = true;
                }
                for f in product {
                    match f {
                        Factor::Deriv { axis, .. } if *axis >= group.manifold.dim() => {
                            return Err(Error::UnsupportedTerm(format!(
                                "derivative axis {axis} on a {}-dim manifold",
                                group.manifold.dim()
                            )))
                        }
                        Factor::MultTrig(map) => {
                            for (mode, c) in map {
                                if mode.len() != flat_axes(&group)? {
                                    return Err(Error::UnsupportedTerm(
                                        "trig mode arity mismatch".into(),
                                    ));
                                }
                                if c.dim() != (m, m) {
                                    return Err(Error::UnsupportedTerm(
                                        "trig coefficient matrix size mismatch".into(),
                                    ));
                                }
                            }
                        }
                        Factor::Const(c) if c.dim() != (m, m) => {
                            return Err(Error::UnsupportedTerm(
                                "constant matrix size mismatch".into(),
                            ))
                        }
                        _ => {}
                    }
                }
            }
        }
        if !top_seen {
            return Err(Error::UnsupportedTerm(
                "no local term attains the declared order".into(),
            ));
        }
        Ok(OperatorSpec {
            group,
            m,
            order,
            terms,
        })
    }
}

fn flat_axes(group: &Arc<IsometryGroup>) -> Result<usize> {
    match group.manifold.kind {
        ManifoldKind::Circle => Ok(1),
        ManifoldKind::Torus2 => Ok(2),
        ManifoldKind::SphereCrossCircle => Err(Error::UnsupportedGeometry(
            "spectral assembly needs a flat manifold".into(),
        )),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeWindow {
    /// Circle modes n in [-radius, radius].
    CircleFull { radius: i64 },
    /// Hardy modes n in [0, max]; only the top end is a truncation artifact.
    Hardy { max: i64 },
    /// Torus modes in [-radius, radius]^2.
    TorusFull { radius: i64 },
}

impl ModeWindow {
    pub fn modes(&self) -> Vec<Vec<i64>> {
        match *self {
            ModeWindow::CircleFull { radius } => (-radius..=radius).map(|n| vec![n]).collect(),
            ModeWindow::Hardy { max } => (0..=max).map(|n| vec![n]).collect(),
            ModeWindow::TorusFull { radius } => {
                let mut out = Vec::new();
                for a in -radius..=radius {
                    for b in -radius..=radius {
                        out.push(vec![a, b]);
                    }
                }
                out
            }
        }
    }

    /// Distance of a mode to the artificial part of the window boundary.
    pub fn edge_distance(&self, mode: &[i64]) -> i64 {
        match *self {
            ModeWindow::CircleFull { radius } => radius - mode[0].abs(),
            ModeWindow::Hardy { max } => max - mode[0],
            ModeWindow::TorusFull { radius } => radius - mode.iter().map(|n| n.abs()).max().unwrap(),
        }
    }

    pub fn contains(&self, mode: &[i64]) -> bool {
        match *self {
            ModeWindow::CircleFull { radius } => mode[0].abs() <= radius,
            ModeWindow::Hardy { max } => mode[0] >= 0 && mode[0] <= max,
            ModeWindow::TorusFull { radius } => mode.iter().all(|n| n.abs() <= radius),
        }
    }
}

/// A finite-section matrix with its mode bookkeeping.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    pub matrix: Array2<Complex64>,
    pub modes: Vec<Vec<i64>>,
    pub m: usize,
    pub window: ModeWindow,
    /// Largest trig-polynomial bandwidth entering the assembly; the width of
    /// the boundary layer corrupted by window truncation.
    pub band: i64,
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.modes.len() * self.m
    }

    /// Basis index -> mode index.
    pub fn mode_of(&self, idx: usize) -> usize {
        idx / self.m
    }

    /// True for basis vectors far enough from the artificial boundary.
    pub fn interior_mask(&self, layer: i64) -> Vec<bool> {
        let mut mask = Vec::with_capacity(self.dim());
        for mode in &self.modes {
            let interior = self.window.edge_distance(mode) >= layer;
            for _ in 0..self.m {
                mask.push(interior);
            }
        }
        mask
    }

    pub fn adjoint(&self) -> TruncatedOperator {
        TruncatedOperator {
            matrix: self.matrix.t().mapv(|v| v.conj()),
            modes: self.modes.clone(),
            m: self.m,
            window: self.window,
            band: self.band,
        }
    }

    /// Right-compose with a diagonal mode weight (discrete order reduction).
    pub fn compose_right_weight(&mut self, f: impl Fn(&[i64]) -> f64) {
        for (mi, mode) in self.modes.iter().enumerate() {
            let w = f(mode);
            for j in 0..self.m {
                let col = mi * self.m + j;
                for r in 0..self.dim() {
                    self.matrix[(r, col)] *= w;
                }
            }
        }
    }
}

/// Assemble the finite section of a spec on the full mode window.
pub fn assemble(spec: &OperatorSpec, n_tr: i64) -> Result<TruncatedOperator> {
    if n_tr < 8 {
        return Err(Error::BadResolution {
            got: n_tr.max(0) as usize,
            min: 8,
        });
    }
    let axes = flat_axes(&spec.group)?;
    let window = match axes {
        1 => ModeWindow::CircleFull { radius: n_tr },
        _ => ModeWindow::TorusFull { radius: n_tr },
    };
    assemble_on_window(spec, window)
}

pub fn assemble_on_window(spec: &OperatorSpec, window: ModeWindow) -> Result<TruncatedOperator> {
    let axes = flat_axes(&spec.group)?;
    let modes = window.modes();
    let mode_index: HashMap<Vec<i64>, usize> = modes
        .iter()
        .enumerate()
        .map(|(i, q)| (q.clone(), i))
        .collect();
    let m = spec.m;
    let d = modes.len() * m;
    let mut matrix: Array2<Complex64> = Array2::zeros((d, d));
    let mut band = 0i64;
    for (g, part) in &spec.terms {
        let alpha = shift_angles(&spec.group, g)?;
        for product in part {
            for f in product {
                if let Factor::MultTrig(map) = f {
                    for mode in map.keys() {
                        band = band.max(mode.iter().map(|n| n.abs()).max().unwrap_or(0));
                    }
                }
            }
            for (ci, col_mode) in modes.iter().enumerate() {
                // coefficient map mode -> m x m block for this input mode
                let mut cur: HashMap<Vec<i64>, Array2<Complex64>> = HashMap::new();
                cur.insert(col_mode.clone(), Array2::eye(m));
                for f in product.iter().rev() {
                    cur = apply_factor(f, cur, axes)?;
                }
                for (out_mode, block) in cur {
                    let ri = match mode_index.get(&out_mode) {
                        Some(i) => *i,
                        None => continue, // sharp window cutoff
                    };
                    // (g*)^{-1} phase on the output mode
                    let phase: f64 = out_mode
                        .iter()
                        .zip(&alpha)
                        .map(|(n, a)| -(*n as f64) * a)
                        .sum();
                    let ph = Complex64::from_polar(1.0, phase);
                    for i in 0..m {
                        for j in 0..m {
                            matrix[(ri * m + i, ci * m + j)] += block[(i, j)] * ph;
                        }
                    }
                }
            }
        }
    }
    Ok(TruncatedOperator {
        matrix,
        modes,
        m,
        window,
        band,
    })
}

fn shift_angles(group: &Arc<IsometryGroup>, g: &GroupElement) -> Result<Vec<f64>> {
    let motion = group.total_motion(g);
    match group.manifold.kind {
        ManifoldKind::Circle => Ok(vec![motion.flat_shift[0]]),
        ManifoldKind::Torus2 => Ok(vec![motion.flat_shift[0], motion.flat_shift[1]]),
        ManifoldKind::SphereCrossCircle => Err(Error::UnsupportedGeometry(
            "spectral assembly needs a flat manifold".into(),
        )),
    }
}

fn apply_factor(
    f: &Factor,
    cur: HashMap<Vec<i64>, Array2<Complex64>>,
    axes: usize,
) -> Result<HashMap<Vec<i64>, Array2<Complex64>>> {
    match f {
        Factor::Deriv { axis, power } => {
            if *axis >= axes {
                return Err(Error::UnsupportedTerm("derivative axis out of range".into()));
            }
            let mut out = HashMap::new();
            for (mode, block) in cur {
                let factor = Complex64::new(0.0, mode[*axis] as f64).powu(*power);
                out.insert(mode, block.mapv(|v| v * factor));
            }
            Ok(out)
        }
        Factor::Const(c) => {
            let mut out = HashMap::new();
            for (mode, block) in cur {
                out.insert(mode, c.dot(&block));
            }
            Ok(out)
        }
        Factor::MultTrig(map) => {
            let mut out: HashMap<Vec<i64>, Array2<Complex64>> = HashMap::new();
            for (mode, block) in &cur {
                for (k, c) in map {
                    let target: Vec<i64> = mode.iter().zip(k).map(|(a, b)| a + b).collect();
                    let add = c.dot(block);
                    match out.get_mut(&target) {
                        Some(b) => *b += &add,
                        None => {
                            out.insert(target, add);
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Principal symbol of a spec, sampled on the cosphere carrier.
pub fn symbol_of_spec(spec: &OperatorSpec, resolution: usize) -> Result<CrossedSymbol> {
    let carrier = match spec.group.manifold.kind {
        ManifoldKind::Circle => Carrier::CircleCosphere { res: resolution },
        ManifoldKind::Torus2 => Carrier::Torus2Cosphere { res: resolution },
        ManifoldKind::SphereCrossCircle => {
            return Err(Error::UnsupportedGeometry(
                "symbols are sampled on flat cosphere carriers".into(),
            ))
        }
    };
    let base = carrier.base_points();
    let fiber = carrier.fiber_points();
    let nodes = carrier.node_count();
    let m = spec.m;
    let mut out = CrossedSymbol::zero(spec.group.clone(), carrier, m, 0);
    for (g, part) in &spec.terms {
        let mut term: Option<Array4<Complex64>> = None;
        for product in part {
            let prod_order: i64 = product.iter().map(Factor::order).sum();
            if prod_order != spec.order {
                continue; // lower-order parts drop out of the principal symbol
            }
            let arr = term.get_or_insert_with(|| Array4::zeros((nodes, 1, m, m)));
            for n in 0..nodes {
                let mut block: Array2<Complex64> = Array2::eye(m);
                for f in product.iter().rev() {
                    block = match f {
                        Factor::Deriv { axis, power } => {
                            let xi = fiber[n][*axis];
                            let factor = Complex64::new(0.0, xi).powu(*power);
                            block.mapv(|v| v * factor)
                        }
                        Factor::Const(c) => c.dot(&block),
                        Factor::MultTrig(map) => {
                            let mut val: Array2<Complex64> = Array2::zeros((m, m));
                            for (k, c) in map {
                                let phase: f64 = k
                                    .iter()
                                    .zip(&base[n])
                                    .map(|(kk, xx)| *kk as f64 * xx)
                                    .sum();
                                let ph = Complex64::from_polar(1.0, phase);
                                val = val + c.mapv(|v| v * ph);
                            }
                            val.dot(&block)
                        }
                    };
                }
                for i in 0..m {
                    for j in 0..m {
                        arr[(n, 0, i, j)] += block[(i, j)];
                    }
                }
            }
        }
        if let Some(arr) = term {
            out.add_term(g.clone(), &arr)?;
        }
    }
    Ok(out)
}

/// Hardy compression P M_sigma P of an order-0 circle symbol on modes
/// 0..n_tr, using the xi = +1 component of the symbol.
pub fn toeplitz(sigma: &CrossedSymbol, n_tr: i64) -> Result<TruncatedOperator> {
    sections_from_symbol(sigma, ModeWindow::Hardy { max: n_tr })
}

/// Full two-sided sections of an order-0 circle symbol: the xi = +1
/// component acts on modes n >= 0, the xi = -1 component on modes n < 0.
pub fn full_sections(sigma: &CrossedSymbol, n_tr: i64) -> Result<TruncatedOperator> {
    sections_from_symbol(sigma, ModeWindow::CircleFull { radius: n_tr })
}

fn sections_from_symbol(sigma: &CrossedSymbol, window: ModeWindow) -> Result<TruncatedOperator> {
    let res = match sigma.carrier {
        Carrier::CircleCosphere { res } => res,
        _ => {
            return Err(Error::UnsupportedGeometry(
                "sections need a circle cosphere symbol".into(),
            ))
        }
    };
    if sigma.degree != 0 {
        return Err(Error::AlgebraMismatch("sections need a degree-0 symbol".into()));
    }
    let comps = sigma.carrier.components();
    let m = sigma.m;
    let modes = window.modes();
    let mode_index: HashMap<Vec<i64>, usize> = modes
        .iter()
        .enumerate()
        .map(|(i, q)| (q.clone(), i))
        .collect();
    let d = modes.len() * m;
    let mut matrix: Array2<Complex64> = Array2::zeros((d, d));
    let mut band = 0i64;
    for (g, term) in sigma.terms() {
        let alpha = carrier_shifts(&sigma.group, sigma.carrier, g)?[0];
        // Fourier coefficients per component and matrix entry
        let mut comp_coeffs: Vec<BTreeMap<i64, Array2<Complex64>>> = Vec::new();
        for comp in &comps {
            let mut map: BTreeMap<i64, Array2<Complex64>> = BTreeMap::new();
            for i in 0..m {
                for j in 0..m {
                    let vals: Vec<Complex64> = (0..res)
                        .map(|n| term[(comp.offset + n, 0, i, j)])
                        .collect();
                    for (mode, c) in crate::geometry::fourier_coefficients(&vals, &[res]) {
                        if c.norm() < 1e-13 {
                            continue;
                        }
                        map.entry(mode[0])
                            .or_insert_with(|| Array2::zeros((m, m)))[(i, j)] = c;
                    }
                }
            }
            for k in map.keys() {
                band = band.max(k.abs());
            }
            comp_coeffs.push(map);
        }
        for (ci, col_mode) in modes.iter().enumerate() {
            let n = col_mode[0];
            // xi = +1 for n >= 0, xi = -1 for n < 0 (Hardy windows only see +1)
            let comp_id = if n >= 0 { 0 } else { 1 };
            for (k, c) in &comp_coeffs[comp_id] {
                let out = n + k;
                let ri = match mode_index.get(&vec![out]) {
                    Some(i) => *i,
                    None => continue,
                };
                let ph = Complex64::from_polar(1.0, -(out as f64) * alpha);
                for i in 0..m {
                    for j in 0..m {
                        matrix[(ri * m + i, ci * m + j)] += c[(i, j)] * ph;
                    }
                }
            }
        }
    }
    Ok(TruncatedOperator {
        matrix,
        modes,
        m,
        window,
        band,
    })
}

/// The rectangular Hermite ladder section of E = x + d/dx: domain modes
/// 0..n, codomain modes 0..n-1, entries A[k-1, k] = sqrt(2k).
pub fn model_ladder(n: usize) -> Array2<Complex64> {
    let mut a: Array2<Complex64> = Array2::zeros((n, n + 1));
    for k in 1..=n {
        a[(k - 1, k)] = Complex64::new((2.0 * k as f64).sqrt(), 0.0);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ManifoldModel;
    use crate::group::{golden_angle, GroupLaw, RigidMotion};
    use crate::symbol::sample_scalar_term;

    fn circle_group() -> Arc<IsometryGroup> {
        IsometryGroup::new(
            ManifoldModel::new(ManifoldKind::Circle),
            GroupLaw::FreeAbelian { rank: 1 },
            vec![RigidMotion::circle_rotation(golden_angle())],
        )
        .unwrap()
    }

    fn trivial_circle() -> Arc<IsometryGroup> {
        IsometryGroup::trivial(ManifoldModel::new(ManifoldKind::Circle))
    }

    fn scalar(v: f64) -> Array2<Complex64> {
        Array2::from_elem((1, 1), Complex64::new(v, 0.0))
    }

    #[test]
    fn derivative_is_diagonal() {
        let g = trivial_circle();
        let spec = OperatorSpec::new(
            g.clone(),
            1,
            1,
            vec![(g.identity(), vec![vec![Factor::Deriv { axis: 0, power: 1 }]])],
        )
        .unwrap();
        let t = assemble(&spec, 8).unwrap();
        assert_eq!(t.dim(), 17);
        for (i, mode) in t.modes.iter().enumerate() {
            for (j, _) in t.modes.iter().enumerate() {
                let v = t.matrix[(i, j)];
                if i == j {
                    assert!((v - Complex64::new(0.0, mode[0] as f64)).norm() < 1e-14);
                } else {
                    assert!(v.norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn pure_shift_is_diagonal_phase() {
        // D = g* is the term ((g^{-1}), identity): diag(e^{i n alpha})
        let g = circle_group();
        let ginv = g.inverse(&g.element(&[1]).unwrap());
        let spec = OperatorSpec::new(g.clone(), 1, 0, vec![(ginv, vec![vec![]])]).unwrap();
        let t = assemble(&spec, 8).unwrap();
        let alpha = golden_angle();
        for (i, mode) in t.modes.iter().enumerate() {
            let want = Complex64::from_polar(1.0, mode[0] as f64 * alpha);
            assert!((t.matrix[(i, i)] - want).norm() < 1e-13);
        }
    }

    #[test]
    fn multiplication_shifts_modes() {
        let g = trivial_circle();
        let mut map = BTreeMap::new();
        map.insert(vec![1i64], scalar(1.0));
        let spec = OperatorSpec::new(
            g.clone(),
            1,
            0,
            vec![(g.identity(), vec![vec![Factor::MultTrig(map)]])],
        )
        .unwrap();
        let t = assemble(&spec, 8).unwrap();
        for i in 0..t.dim() {
            for j in 0..t.dim() {
                let want = if i == j + 1 { 1.0 } else { 0.0 };
                assert!((t.matrix[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-14);
            }
        }
        assert_eq!(t.band, 1);
    }

    #[test]
    fn declared_order_is_enforced() {
        let g = trivial_circle();
        let r = OperatorSpec::new(
            g.clone(),
            1,
            0,
            vec![(g.identity(), vec![vec![Factor::Deriv { axis: 0, power: 1 }]])],
        );
        assert!(matches!(r, Err(Error::UnsupportedTerm(_))));
        let r = OperatorSpec::new(
            g.clone(),
            1,
            2,
            vec![(g.identity(), vec![vec![Factor::Deriv { axis: 0, power: 1 }]])],
        );
        assert!(matches!(r, Err(Error::UnsupportedTerm(_))));
    }

    #[test]
    fn symbol_of_derivative_is_pm_i() {
        let g = trivial_circle();
        let spec = OperatorSpec::new(
            g.clone(),
            1,
            1,
            vec![(g.identity(), vec![vec![Factor::Deriv { axis: 0, power: 1 }]])],
        )
        .unwrap();
        let s = symbol_of_spec(&spec, 16).unwrap();
        let t = s.term(&g.identity()).unwrap();
        // first component: xi = +1 -> +i; second: xi = -1 -> -i
        assert!((t[(0, 0, 0, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        assert!((t[(16, 0, 0, 0)] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn toeplitz_of_winding_one_is_subdiagonal() {
        let g = trivial_circle();
        let carrier = Carrier::CircleCosphere { res: 32 };
        let mut sigma = CrossedSymbol::zero(g.clone(), carrier, 1, 0);
        sigma
            .set_term(
                g.identity(),
                sample_scalar_term(carrier, |x, _| Complex64::from_polar(1.0, x[0])),
            )
            .unwrap();
        let t = toeplitz(&sigma, 8).unwrap();
        assert_eq!(t.dim(), 9);
        for i in 0..9 {
            for j in 0..9 {
                let want = if i == j + 1 { 1.0 } else { 0.0 };
                assert!((t.matrix[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
        // Hardy edge: only the top end is artificial
        assert_eq!(t.window.edge_distance(&[0]), 8);
        assert_eq!(t.window.edge_distance(&[8]), 0);
    }

    #[test]
    fn full_sections_use_both_components() {
        // symbol with a_+ = e^{ix}, a_- = 1
        let g = trivial_circle();
        let carrier = Carrier::CircleCosphere { res: 32 };
        let mut sigma = CrossedSymbol::zero(g.clone(), carrier, 1, 0);
        sigma
            .set_term(
                g.identity(),
                sample_scalar_term(carrier, |x, xi| {
                    if xi[0] > 0.0 {
                        Complex64::from_polar(1.0, x[0])
                    } else {
                        Complex64::new(1.0, 0.0)
                    }
                }),
            )
            .unwrap();
        let t = full_sections(&sigma, 8).unwrap();
        let idx = |n: i64| (n + 8) as usize;
        // n >= 0: subdiagonal from e^{ix}; n < 0: identity
        assert!((t.matrix[(idx(3), idx(2))] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((t.matrix[(idx(-3), idx(-3))] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(t.matrix[(idx(2), idx(2))].norm() < 1e-12);
    }

    #[test]
    fn ladder_shape_and_entries() {
        let a = model_ladder(4);
        assert_eq!(a.dim(), (4, 5));
        for k in 1..=4usize {
            assert!((a[(k - 1, k)].re - (2.0 * k as f64).sqrt()).abs() < 1e-15);
        }
        assert!(a[(0, 0)].norm() == 0.0);
    }

    #[test]
    fn adjoint_and_weight() {
        let g = trivial_circle();
        let mut map = BTreeMap::new();
        map.insert(vec![1i64], scalar(2.0));
        let spec = OperatorSpec::new(
            g.clone(),
            1,
            0,
            vec![(g.identity(), vec![vec![Factor::MultTrig(map)]])],
        )
        .unwrap();
        let t = assemble(&spec, 8).unwrap();
        let adj = t.adjoint();
        assert!((adj.matrix[(3, 4)] - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        let mut w = t.clone();
        w.compose_right_weight(|mode| 1.0 / (1.0 + (mode[0] * mode[0]) as f64).sqrt());
        let col = 4usize; // mode n = -4
        let expect = 2.0 / (17.0f64).sqrt();
        assert!((w.matrix[(5, col)] - Complex64::new(expect, 0.0)).norm() < 1e-14);
    }
}
