//! The crossed-product symbol algebra.
//!
//! A `CrossedSymbol` is a finitely supported family g -> a_g of matrix-valued
//! forms on a flat carrier, multiplied by the twisted convolution
//!
//!   (a * b)(g) = sum_{h k = g} (a_h o k) . b_k
//!
//! where `o k` pulls the coefficient functions back along the rigid motion of
//! k and `.` is matrix product combined with the wedge of form components.
//! Inversion runs a Neumann series when a single term dominates and falls
//! back to a truncated regular-representation solve otherwise.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use ndarray::{Array1, Array2, Array4};
use ndarray_linalg::{Solve, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{
    basis_index, form_basis, fourier_coefficients, translate_component, wedge_merge, Carrier,
    derivative_component, ManifoldKind, TAU,
};
use crate::group::{GroupElement, IsometryGroup};

/// Relative floor below which a term is dropped from the support.
const PRUNE_REL: f64 = 1e-15;

#[derive(Clone, Debug)]
pub struct CrossedSymbol {
    pub group: Arc<IsometryGroup>,
    pub carrier: Carrier,
    /// Matrix size of the coefficients.
    pub m: usize,
    /// Form degree of the coefficients.
    pub degree: usize,
    terms: BTreeMap<GroupElement, Array4<Complex64>>,
}

impl CrossedSymbol {
    pub fn zero(group: Arc<IsometryGroup>, carrier: Carrier, m: usize, degree: usize) -> Self {
        CrossedSymbol {
            group,
            carrier,
            m,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(group: Arc<IsometryGroup>, carrier: Carrier, m: usize) -> Self {
        let mut s = CrossedSymbol::zero(group.clone(), carrier, m, 0);
        let mut arr = Array4::zeros((carrier.node_count(), 1, m, m));
        for n in 0..carrier.node_count() {
            for j in 0..m {
                arr[(n, 0, j, j)] = Complex64::new(1.0, 0.0);
            }
        }
        s.terms.insert(group.identity(), arr);
        s
    }

    fn term_shape(&self) -> (usize, usize, usize, usize) {
        let ncomp = form_basis(self.carrier.form_dim(), self.degree).len();
        (self.carrier.node_count(), ncomp, self.m, self.m)
    }

    pub fn set_term(&mut self, g: GroupElement, values: Array4<Complex64>) -> Result<()> {
        if g.group_id() != self.group.id() {
            return Err(Error::GroupMismatch);
        }
        let want = self.term_shape();
        let got = values.dim();
        if got != want {
            return Err(Error::AlgebraMismatch(format!(
                "term shape {got:?}, algebra expects {want:?}"
            )));
        }
        self.terms.insert(g, values);
        Ok(())
    }

    pub fn add_term(&mut self, g: GroupElement, values: &Array4<Complex64>) -> Result<()> {
        if let Some(t) = self.terms.get_mut(&g) {
            *t += values;
            Ok(())
        } else {
            self.set_term(g, values.clone())
        }
    }

    pub fn term(&self, g: &GroupElement) -> Option<&Array4<Complex64>> {
        self.terms.get(g)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GroupElement, &Array4<Complex64>)> {
        self.terms.iter()
    }

    pub fn support_radius(&self) -> u64 {
        self.terms
            .keys()
            .map(|g| self.group.word_length(g))
            .max()
            .unwrap_or(0)
    }

    /// Sup over nodes of the Frobenius norm, per term.
    pub fn term_sup(values: &Array4<Complex64>) -> f64 {
        let (nodes, ncomp, m, _) = values.dim();
        let mut best = 0.0f64;
        for n in 0..nodes {
            for c in 0..ncomp {
                let mut fr = 0.0;
                for i in 0..m {
                    for j in 0..m {
                        fr += values[(n, c, i, j)].norm_sqr();
                    }
                }
                best = best.max(fr.sqrt());
            }
        }
        best
    }

    pub fn sup_norm(&self) -> f64 {
        self.terms
            .values()
            .map(CrossedSymbol::term_sup)
            .fold(0.0, f64::max)
    }

    /// l1-over-group of sup-over-carrier norms; submultiplicative for the
    /// twisted convolution, so Neumann convergence can be certified with it.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(CrossedSymbol::term_sup).sum()
    }

    pub fn scale(&mut self, c: Complex64) {
        for t in self.terms.values_mut() {
            t.mapv_inplace(|v| v * c);
        }
    }

    pub fn add(&self, other: &CrossedSymbol) -> Result<CrossedSymbol> {
        self.check_compatible(other)?;
        if self.degree != other.degree {
            return Err(Error::AlgebraMismatch("adding forms of mixed degree".into()));
        }
        let mut out = self.clone();
        for (g, t) in &other.terms {
            out.add_term(g.clone(), t)?;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &CrossedSymbol) -> Result<CrossedSymbol> {
        let mut neg = other.clone();
        neg.scale(Complex64::new(-1.0, 0.0));
        self.add(&neg)
    }

    fn check_compatible(&self, other: &CrossedSymbol) -> Result<()> {
        if self.group.id() != other.group.id() {
            return Err(Error::GroupMismatch);
        }
        if self.carrier != other.carrier || self.m != other.m {
            return Err(Error::AlgebraMismatch(
                "carrier or matrix size mismatch".into(),
            ));
        }
        Ok(())
    }

    fn prune(&mut self) {
        let max = self.sup_norm();
        if max == 0.0 {
            self.terms.clear();
            return;
        }
        let floor = max * PRUNE_REL;
        self.terms.retain(|_, t| CrossedSymbol::term_sup(t) > floor);
    }

    /// Twisted convolution product.
    pub fn convolve(&self, other: &CrossedSymbol) -> Result<CrossedSymbol> {
        self.check_compatible(other)?;
        if !self.carrier.is_flat() {
            return Err(Error::UnsupportedGeometry(
                "convolution needs a flat carrier".into(),
            ));
        }
        let dim = self.carrier.form_dim();
        let rdeg = self.degree + other.degree;
        let mut out = CrossedSymbol::zero(self.group.clone(), self.carrier, self.m, rdeg);
        if rdeg > dim {
            return Ok(out);
        }
        let table = wedge_table(dim, self.degree, other.degree);
        let out_ncomp = form_basis(dim, rdeg).len();
        let nodes = self.carrier.node_count();
        let m = self.m;
        for (k, bk) in &other.terms {
            let shifts = carrier_shifts(&self.group, self.carrier, k)?;
            let shifted_needed = shifts.iter().any(|s| s.abs() > 1e-15);
            for (h, ah) in &self.terms {
                let g = self.group.compose(h, k)?;
                let ah_owned;
                let ah_use = if shifted_needed {
                    ah_owned = translate_term(self.carrier, ah, &shifts);
                    &ah_owned
                } else {
                    ah
                };
                let entry = out
                    .terms
                    .entry(g)
                    .or_insert_with(|| Array4::zeros((nodes, out_ncomp, m, m)));
                for &(ci, cj, ck, sign) in &table {
                    for n in 0..nodes {
                        for i in 0..m {
                            for j in 0..m {
                                let mut acc = Complex64::new(0.0, 0.0);
                                for l in 0..m {
                                    acc += ah_use[(n, ci, i, l)] * bk[(n, cj, l, j)];
                                }
                                entry[(n, ck, i, j)] += acc * sign;
                            }
                        }
                    }
                }
            }
        }
        out.prune();
        Ok(out)
    }

    /// Exterior derivative, taken termwise (d commutes with rigid motions).
    pub fn differential(&self) -> Result<CrossedSymbol> {
        let dim = self.carrier.form_dim();
        if self.degree >= dim {
            return Err(Error::TopDegree);
        }
        if !self.carrier.is_flat() {
            return Err(Error::UnsupportedGeometry(
                "differential needs a flat carrier".into(),
            ));
        }
        let basis_p = form_basis(dim, self.degree);
        let basis_p1 = form_basis(dim, self.degree + 1);
        let mut out = CrossedSymbol::zero(self.group.clone(), self.carrier, self.m, self.degree + 1);
        let nodes = self.carrier.node_count();
        for (g, t) in &self.terms {
            let mut entry = Array4::zeros((nodes, basis_p1.len(), self.m, self.m));
            for axis in 0..dim {
                for (ci, iset) in basis_p.iter().enumerate() {
                    let merged = match wedge_merge(dim, &[axis], iset) {
                        Some(v) => v,
                        None => continue,
                    };
                    let ck = basis_index(&basis_p1, &merged.0);
                    let sign = merged.1;
                    let deriv = derivative_term(self.carrier, t, ci, axis);
                    for n in 0..nodes {
                        for i in 0..self.m {
                            for j in 0..self.m {
                                entry[(n, ck, i, j)] += deriv[(n, i, j)] * sign;
                            }
                        }
                    }
                }
            }
            out.terms.insert(g.clone(), entry);
        }
        out.prune();
        Ok(out)
    }

    /// Odd Chern-Simons character form ch_{2k+1}(a) as a scalar crossed form:
    ///
    ///   ch_{2k+1} = (1/2 pi i)^{k+1} * k!/(2k+1)! * tr (a^{-1} da)^{2k+1}.
    pub fn cs_character(&self, k: usize, opts: &InvertOptions) -> Result<CrossedSymbol> {
        if self.degree != 0 {
            return Err(Error::AlgebraMismatch(
                "CS character needs a degree-0 symbol".into(),
            ));
        }
        let b = self.invert(opts)?;
        let da = self.differential()?;
        let u = b.convolve(&da)?;
        let mut w = u.clone();
        for _ in 0..2 * k {
            w = w.convolve(&u)?;
        }
        let mut tr = w.matrix_trace();
        let factor = Complex64::new(0.0, -1.0 / TAU).powu(k as u32 + 1)
            * (factorial(k) / factorial(2 * k + 1));
        tr.scale(factor);
        Ok(tr)
    }

    /// Matrix trace, returning a scalar (m = 1) crossed form.
    pub fn matrix_trace(&self) -> CrossedSymbol {
        let ncomp = form_basis(self.carrier.form_dim(), self.degree).len();
        let nodes = self.carrier.node_count();
        let mut out = CrossedSymbol::zero(self.group.clone(), self.carrier, 1, self.degree);
        for (g, t) in &self.terms {
            let mut entry = Array4::zeros((nodes, ncomp, 1, 1));
            for n in 0..nodes {
                for c in 0..ncomp {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..self.m {
                        acc += t[(n, c, i, i)];
                    }
                    entry[(n, c, 0, 0)] = acc;
                }
            }
            out.terms.insert(g.clone(), entry);
        }
        out.prune();
        out
    }

    /// Per-shell sup norms over word length plus the least-squares slope of
    /// log norm against log(1 + |g|); more negative means faster decay.
    pub fn decay_profile(&self) -> Result<DecayProfile> {
        let mut shells: BTreeMap<u64, f64> = BTreeMap::new();
        for (g, t) in &self.terms {
            let l = self.group.word_length(g);
            let s = CrossedSymbol::term_sup(t);
            let e = shells.entry(l).or_insert(0.0);
            *e = (*e).max(s);
        }
        let shells: Vec<(u64, f64)> = shells.into_iter().collect();
        let exponent = decay_exponent(&shells)?;
        Ok(DecayProfile { shells, exponent })
    }

    /// Inverse in the crossed algebra.
    pub fn invert(&self, opts: &InvertOptions) -> Result<CrossedSymbol> {
        if self.degree != 0 {
            return Err(Error::AlgebraMismatch(
                "inversion needs a degree-0 symbol".into(),
            ));
        }
        if self.terms.is_empty() {
            return Err(Error::NotElliptic("zero symbol".into()));
        }
        let mut inv = None;
        if !opts.force_regular {
            inv = self.try_neumann(opts)?;
        }
        let inv = match inv {
            Some(inv) => inv,
            None => self.invert_regular(opts)?,
        };
        // a symbol that vanishes between sample nodes (or hits rounding-level
        // values on one) can produce a pointwise-exact inverse of absurd
        // norm; the Banach condition bound rejects it
        if inv.sup_norm() * self.sup_norm() > 1e10 {
            return Err(Error::NotElliptic(format!(
                "inverse norm {:.3e} exceeds the condition bound",
                inv.sup_norm()
            )));
        }
        Ok(inv)
    }

    /// Neumann path: factor out a dominant pointwise-invertible term.
    fn try_neumann(&self, opts: &InvertOptions) -> Result<Option<CrossedSymbol>> {
        if self.m > 2 {
            return Ok(None);
        }
        // pick the candidate with the largest pointwise smallest singular value
        let mut best: Option<(GroupElement, f64)> = None;
        for (g, t) in &self.terms {
            let smin = pointwise_smin(t, self.m);
            if best.as_ref().map_or(true, |b| smin > b.1) {
                best = Some((g.clone(), smin));
            }
        }
        let (dom, smin) = best.unwrap();
        if smin <= 0.0 {
            return Ok(None);
        }
        let rest_norm: f64 = self
            .terms
            .iter()
            .filter(|(g, _)| **g != dom)
            .map(|(_, t)| CrossedSymbol::term_sup(t))
            .sum();
        // dominance certificate; term_sup is Frobenius, an upper bound on the
        // operator norm, so this is safe
        if rest_norm >= 0.95 * smin {
            return Ok(None);
        }
        // w = inverse of the dominant term alone
        let dom_inv_elem = self.group.inverse(&dom);
        let shifts = carrier_shifts(&self.group, self.carrier, &dom_inv_elem)?;
        let dom_term = self.terms.get(&dom).unwrap();
        let shifted = translate_term(self.carrier, dom_term, &shifts);
        let mut w = CrossedSymbol::zero(self.group.clone(), self.carrier, self.m, 0);
        w.terms
            .insert(dom_inv_elem, pointwise_inverse(&shifted, self.m)?);

        // a = a_dom * (1 + w * rest)  =>  a^{-1} = (1 + u)^{-1} * w
        let mut rest = self.clone();
        rest.terms.remove(&dom);
        let inv = if rest.terms.is_empty() {
            w
        } else {
            let u = w.convolve(&rest)?;
            let mut series = CrossedSymbol::identity(self.group.clone(), self.carrier, self.m);
            let mut power = CrossedSymbol::identity(self.group.clone(), self.carrier, self.m);
            let mut converged = false;
            for _ in 0..opts.max_series_terms {
                power = power.convolve(&u)?;
                power.scale(Complex64::new(-1.0, 0.0));
                let tail = power.l1_norm();
                series = series.add(&power)?;
                if tail < 1e-14 * series.l1_norm().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Ok(None);
            }
            series.convolve(&w)?
        };
        let resid = self.residual(&inv)?;
        if resid <= opts.tol {
            Ok(Some(inv))
        } else {
            Ok(None)
        }
    }

    /// sup norm of a * b - 1 and b * a - 1.
    pub fn residual(&self, b: &CrossedSymbol) -> Result<f64> {
        let id = CrossedSymbol::identity(self.group.clone(), self.carrier, self.m);
        let r1 = self.convolve(b)?.sub(&id)?.sup_norm();
        let r2 = b.convolve(self)?.sub(&id)?.sup_norm();
        Ok(r1.max(r2))
    }

    /// Regular-representation solve: invert the left-multiplication operator
    /// truncated to a group ball times a Fourier mode window, per carrier
    /// component, then verify the residual on samples.
    fn invert_regular(&self, opts: &InvertOptions) -> Result<CrossedSymbol> {
        let comps = self.carrier.components();
        let mut radius = opts
            .ball_radius
            .unwrap_or_else(|| (2 * self.support_radius() + 6).max(8));
        let mut window = opts.mode_window.unwrap_or_else(|| {
            let mut maxmode = 1i64;
            for (_, t) in &self.terms {
                for comp in &comps {
                    for i in 0..self.m {
                        for j in 0..self.m {
                            let vals = gather_component(t, comp, 0, i, j, self.m);
                            for mode in fourier_coefficients(&vals, &comp.shape).keys() {
                                for &q in mode {
                                    maxmode = maxmode.max(q.abs());
                                }
                            }
                        }
                    }
                }
            }
            2 * maxmode + 6
        });
        let res = self.carrier.resolution() as i64;
        let mut gap_history: Vec<(usize, f64)> = Vec::new();
        let mut last_residual = f64::INFINITY;
        for _round in 0..opts.max_rounds {
            window = window.min(res / 2 - 1);
            match self.regular_solve_once(radius, window, opts, &mut gap_history) {
                Ok(candidate) => {
                    let resid = self.residual(&candidate)?;
                    if resid <= opts.tol {
                        return Ok(candidate);
                    }
                    last_residual = resid;
                }
                Err(Error::NotElliptic(msg)) => return Err(Error::NotElliptic(msg)),
                Err(_) => {}
            }
            radius *= 2;
            window *= 2;
        }
        // failed to converge: decide between a too-small truncation and a
        // genuinely non-invertible symbol from the gap trend
        if gap_history.len() >= 2 {
            let first = gap_history.first().unwrap().1;
            let last = gap_history.last().unwrap().1;
            if last < 0.7 * first || last < 1e-9 {
                return Err(Error::NotElliptic(format!(
                    "regular-representation gap closes: {first:.3e} -> {last:.3e}"
                )));
            }
        }
        Err(Error::TruncationInsufficient {
            residual: last_residual,
        })
    }

    fn regular_solve_once(
        &self,
        radius: u64,
        window: i64,
        opts: &InvertOptions,
        gap_history: &mut Vec<(usize, f64)>,
    ) -> Result<CrossedSymbol> {
        let ball = self.group.ball(radius);
        let ball_index: HashMap<GroupElement, usize> = ball
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i))
            .collect();
        let comps = self.carrier.components();
        let dim_axes = comps[0].shape.len();
        let modes = mode_window(dim_axes, window);
        let mode_index: HashMap<Vec<i64>, usize> = modes
            .iter()
            .enumerate()
            .map(|(i, q)| (q.clone(), i))
            .collect();
        let m = self.m;
        let d = ball.len() * modes.len() * m;
        let idx = |gi: usize, qi: usize, j: usize| (gi * modes.len() + qi) * m + j;

        let mut out = CrossedSymbol::zero(self.group.clone(), self.carrier, self.m, 0);
        let nodes = self.carrier.node_count();
        let ncomp_forms = 1usize;
        let mut out_arrays: BTreeMap<GroupElement, Array4<Complex64>> = BTreeMap::new();

        for comp in &comps {
            // Fourier data of every term on this component
            let mut coeffs: Vec<(GroupElement, BTreeMap<Vec<i64>, Array2<Complex64>>)> =
                Vec::new();
            for (h, t) in &self.terms {
                let mut map: BTreeMap<Vec<i64>, Array2<Complex64>> = BTreeMap::new();
                for i in 0..m {
                    for j in 0..m {
                        let vals = gather_component(t, comp, 0, i, j, m);
                        for (mode, c) in fourier_coefficients(&vals, &comp.shape) {
                            if c.norm() < 1e-14 {
                                continue;
                            }
                            map.entry(mode)
                                .or_insert_with(|| Array2::zeros((m, m)))[(i, j)] = c;
                        }
                    }
                }
                coeffs.push((h.clone(), map));
            }

            let mut t_mat: Array2<Complex64> = Array2::zeros((d, d));
            for (ki, k) in ball.iter().enumerate() {
                let alpha = carrier_shifts(&self.group, self.carrier, k)?;
                for (h, map) in &coeffs {
                    let g = self.group.compose(h, k)?;
                    let gi = match ball_index.get(&g) {
                        Some(i) => *i,
                        None => continue,
                    };
                    for (mode, mat) in map {
                        let phase: f64 = mode
                            .iter()
                            .zip(&alpha)
                            .map(|(q, a)| *q as f64 * a)
                            .sum();
                        let ph = Complex64::from_polar(1.0, phase);
                        for (qi, q) in modes.iter().enumerate() {
                            let target: Vec<i64> =
                                q.iter().zip(mode).map(|(a, b)| a + b).collect();
                            let ti = match mode_index.get(&target) {
                                Some(i) => *i,
                                None => continue,
                            };
                            for i in 0..m {
                                for j in 0..m {
                                    let v = mat[(i, j)];
                                    if v.norm() == 0.0 {
                                        continue;
                                    }
                                    t_mat[(idx(gi, ti, i), idx(ki, qi, j))] += v * ph;
                                }
                            }
                        }
                    }
                }
            }

            // RHS: identity at (e, mode 0, column j)
            let e_idx = *ball_index.get(&self.group.identity()).unwrap();
            let zero_mode = *mode_index.get(&vec![0i64; dim_axes]).unwrap();
            let mut solutions: Vec<Array1<Complex64>> = Vec::new();
            let mut used_svd = false;
            for j in 0..m {
                let mut rhs: Array1<Complex64> = Array1::zeros(d);
                rhs[idx(e_idx, zero_mode, j)] = Complex64::new(1.0, 0.0);
                let sol = match t_mat.solve(&rhs) {
                    Ok(s) if s.iter().all(|v| v.is_finite()) => s,
                    _ => {
                        used_svd = true;
                        pinv_solve(&t_mat, &rhs, gap_history)?
                    }
                };
                solutions.push(sol);
            }
            if !used_svd && opts.record_gap {
                // cheap gap probe only when asked for diagnostics
                record_gap(&t_mat, gap_history);
            }

            // reconstruct samples of each b(g) on this component
            let comp_len: usize = comp.shape.iter().product();
            for (gi, g) in ball.iter().enumerate() {
                let mut any = false;
                let mut local = Array4::zeros((comp_len, ncomp_forms, m, m));
                for (qi, q) in modes.iter().enumerate() {
                    for (j, sol) in solutions.iter().enumerate() {
                        for i in 0..m {
                            let c = sol[idx(gi, qi, i)];
                            if c.norm() < 1e-15 {
                                continue;
                            }
                            any = true;
                            for (node, x) in component_points(comp).enumerate() {
                                let phase: f64 =
                                    q.iter().zip(&x).map(|(qq, xx)| *qq as f64 * xx).sum();
                                local[(node, 0, i, j)] +=
                                    c * Complex64::from_polar(1.0, phase);
                            }
                        }
                    }
                }
                if any {
                    let entry = out_arrays
                        .entry(g.clone())
                        .or_insert_with(|| Array4::zeros((nodes, ncomp_forms, m, m)));
                    for node in 0..comp_len {
                        for i in 0..m {
                            for j in 0..m {
                                entry[(comp.offset + node, 0, i, j)] = local[(node, 0, i, j)];
                            }
                        }
                    }
                }
            }
        }
        out.terms = out_arrays;
        out.prune();
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct DecayProfile {
    /// (word length, sup norm of that shell).
    pub shells: Vec<(u64, f64)>,
    /// Least-squares slope of log norm vs log(1 + |g|).
    pub exponent: f64,
}

/// Power-law decay fit over nonzero shells; needs 3 distinct word lengths.
pub fn decay_exponent(shells: &[(u64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = shells
        .iter()
        .filter(|(_, s)| *s > 0.0)
        .map(|(l, s)| ((1.0 + *l as f64).ln(), s.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientSupport);
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

#[derive(Clone, Debug)]
pub struct InvertOptions {
    /// Acceptable sup norm of a * b - 1.
    pub tol: f64,
    /// Group ball radius for the regular-representation solve (None: derived).
    pub ball_radius: Option<u64>,
    /// Fourier window half-width per axis (None: derived).
    pub mode_window: Option<i64>,
    pub max_rounds: usize,
    pub max_series_terms: usize,
    /// Skip the Neumann fast path (used by tests and diagnostics).
    pub force_regular: bool,
    /// Record the truncated operator's spectral gap each round.
    pub record_gap: bool,
}

impl Default for InvertOptions {
    fn default() -> Self {
        InvertOptions {
            tol: 1e-7,
            ball_radius: None,
            mode_window: None,
            max_rounds: 3,
            max_series_terms: 400,
            force_regular: false,
            record_gap: false,
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product::<f64>().max(1.0)
}

/// Wedge multiplication table (i-comp, j-comp, out-comp, sign).
fn wedge_table(dim: usize, p: usize, q: usize) -> Vec<(usize, usize, usize, f64)> {
    let bp = form_basis(dim, p);
    let bq = form_basis(dim, q);
    let bo = form_basis(dim, p + q);
    let mut out = Vec::new();
    for (ci, iset) in bp.iter().enumerate() {
        for (cj, jset) in bq.iter().enumerate() {
            if let Some((merged, sign)) = wedge_merge(dim, iset, jset) {
                out.push((ci, cj, basis_index(&bo, &merged), sign));
            }
        }
    }
    out
}

/// Base translation of the carrier axes induced by a group element.
pub fn carrier_shifts(
    group: &Arc<IsometryGroup>,
    carrier: Carrier,
    k: &GroupElement,
) -> Result<Vec<f64>> {
    let motion = group.total_motion(k);
    match carrier {
        Carrier::Circle { .. } | Carrier::CircleCosphere { .. } => {
            // on a sub-circle stratum of the stretch geometry only the S^1
            // factor shift survives
            let s = match group.manifold.kind {
                ManifoldKind::Circle => motion.flat_shift[0],
                ManifoldKind::SphereCrossCircle => motion.flat_shift[0],
                ManifoldKind::Torus2 => {
                    return Err(Error::UnsupportedGeometry(
                        "circle carrier under a torus group".into(),
                    ))
                }
            };
            Ok(vec![s])
        }
        Carrier::Torus2 { .. } => Ok(vec![motion.flat_shift[0], motion.flat_shift[1]]),
        Carrier::Torus2Cosphere { .. } => {
            Ok(vec![motion.flat_shift[0], motion.flat_shift[1], 0.0])
        }
        Carrier::StretchCosphere { .. } => Err(Error::UnsupportedGeometry(
            "stretch cosphere carries no flat translation structure".into(),
        )),
    }
}

fn translate_term(carrier: Carrier, values: &Array4<Complex64>, shifts: &[f64]) -> Array4<Complex64> {
    let mut out = values.clone();
    let (_, ncomp, m, _) = values.dim();
    for comp in carrier.components() {
        for c in 0..ncomp {
            for i in 0..m {
                for j in 0..m {
                    let mut vals = gather_component(values, &comp, c, i, j, m);
                    translate_component(&mut vals, &comp.shape, shifts);
                    scatter_component(&mut out, &comp, c, i, j, &vals);
                }
            }
        }
    }
    out
}

/// Spectral derivative of form component `ci` along a flat axis; returns a
/// (nodes, m, m) array.
fn derivative_term(
    carrier: Carrier,
    values: &Array4<Complex64>,
    ci: usize,
    axis: usize,
) -> ndarray::Array3<Complex64> {
    let (nodes, _, m, _) = values.dim();
    let mut out = ndarray::Array3::zeros((nodes, m, m));
    for comp in carrier.components() {
        for i in 0..m {
            for j in 0..m {
                let mut vals = gather_component(values, &comp, ci, i, j, m);
                derivative_component(&mut vals, &comp.shape, axis);
                let base = comp.offset;
                for (n, v) in vals.iter().enumerate() {
                    out[(base + n, i, j)] = *v;
                }
            }
        }
    }
    out
}

fn gather_component(
    values: &Array4<Complex64>,
    comp: &crate::geometry::CarrierComponent,
    c: usize,
    i: usize,
    j: usize,
    _m: usize,
) -> Vec<Complex64> {
    let len: usize = comp.shape.iter().product();
    (0..len)
        .map(|n| values[(comp.offset + n, c, i, j)])
        .collect()
}

fn scatter_component(
    values: &mut Array4<Complex64>,
    comp: &crate::geometry::CarrierComponent,
    c: usize,
    i: usize,
    j: usize,
    vals: &[Complex64],
) {
    for (n, v) in vals.iter().enumerate() {
        values[(comp.offset + n, c, i, j)] = *v;
    }
}

/// Angle coordinates of the nodes of one flat component, row-major.
fn component_points(
    comp: &crate::geometry::CarrierComponent,
) -> impl Iterator<Item = Vec<f64>> + '_ {
    let len: usize = comp.shape.iter().product();
    (0..len).map(move |mut idx| {
        let mut x = vec![0.0; comp.shape.len()];
        for axis in (0..comp.shape.len()).rev() {
            let n = comp.shape[axis];
            x[axis] = TAU * (idx % n) as f64 / n as f64;
            idx /= n;
        }
        x
    })
}

fn mode_window(dim: usize, w: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(out.len() * (2 * w as usize + 1));
        for prefix in &out {
            for q in -w..=w {
                let mut v = prefix.clone();
                v.push(q);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Minimum over nodes of the smallest singular value (m <= 2 closed form).
fn pointwise_smin(values: &Array4<Complex64>, m: usize) -> f64 {
    let (nodes, ncomp, _, _) = values.dim();
    if ncomp != 1 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for n in 0..nodes {
        let s = match m {
            1 => values[(n, 0, 0, 0)].norm(),
            2 => {
                let a = values[(n, 0, 0, 0)];
                let b = values[(n, 0, 0, 1)];
                let c = values[(n, 0, 1, 0)];
                let d = values[(n, 0, 1, 1)];
                // eigenvalues of A^* A for a 2x2 matrix
                let t = a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + d.norm_sqr();
                let det = (a * d - b * c).norm_sqr();
                let disc = (t * t / 4.0 - det).max(0.0).sqrt();
                (t / 2.0 - disc).max(0.0).sqrt()
            }
            _ => 0.0,
        };
        best = best.min(s);
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

/// Pointwise matrix inverse of a degree-0 term (m <= 2).
fn pointwise_inverse(values: &Array4<Complex64>, m: usize) -> Result<Array4<Complex64>> {
    let (nodes, ncomp, _, _) = values.dim();
    let mut out = Array4::zeros((nodes, ncomp, m, m));
    for n in 0..nodes {
        match m {
            1 => {
                let v = values[(n, 0, 0, 0)];
                if v.norm() < 1e-300 {
                    return Err(Error::NotElliptic("vanishing pointwise symbol".into()));
                }
                out[(n, 0, 0, 0)] = v.inv();
            }
            2 => {
                let a = values[(n, 0, 0, 0)];
                let b = values[(n, 0, 0, 1)];
                let c = values[(n, 0, 1, 0)];
                let d = values[(n, 0, 1, 1)];
                let det = a * d - b * c;
                if det.norm() < 1e-300 {
                    return Err(Error::NotElliptic("vanishing pointwise determinant".into()));
                }
                let di = det.inv();
                out[(n, 0, 0, 0)] = d * di;
                out[(n, 0, 0, 1)] = -b * di;
                out[(n, 0, 1, 0)] = -c * di;
                out[(n, 0, 1, 1)] = a * di;
            }
            _ => {
                return Err(Error::AlgebraMismatch(
                    "pointwise inverse supports m <= 2".into(),
                ))
            }
        }
    }
    Ok(out)
}

fn record_gap(t: &Array2<Complex64>, gap_history: &mut Vec<(usize, f64)>) {
    if let Ok((_, s, _)) = t.svd(false, false) {
        let smax = s.iter().cloned().fold(0.0f64, f64::max);
        let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
        if smax > 0.0 {
            gap_history.push((t.nrows(), smin / smax));
        }
    }
}

/// Least-squares / minimum-norm solve through an SVD pseudo-inverse; the
/// cutoff discards truncation-edge artifact directions.
fn pinv_solve(
    t: &Array2<Complex64>,
    rhs: &Array1<Complex64>,
    gap_history: &mut Vec<(usize, f64)>,
) -> Result<Array1<Complex64>> {
    let (u, s, vt) = t
        .svd(true, true)
        .map_err(|e| Error::NotElliptic(format!("svd failed: {e}")))?;
    let u = u.unwrap();
    let vt = vt.unwrap();
    let smax = s.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return Err(Error::NotElliptic("zero truncated operator".into()));
    }
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    gap_history.push((t.nrows(), smin / smax));
    let cut = smax * 1e-10;
    // x = V S^+ U^H rhs
    let uh_b = u.t().mapv(|v| v.conj()).dot(rhs);
    let mut scaled = uh_b;
    for (i, si) in s.iter().enumerate() {
        scaled[i] = if *si > cut {
            scaled[i] / *si
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    Ok(vt.t().mapv(|v| v.conj()).dot(&scaled))
}

// ---------------------------------------------------------------------------
// sampling helpers
// ---------------------------------------------------------------------------

/// Degree-0 scalar term sampled from (base point, unit covector).
pub fn sample_scalar_term(
    carrier: Carrier,
    f: impl Fn(&[f64], &[f64]) -> Complex64,
) -> Array4<Complex64> {
    let base = carrier.base_points();
    let fiber = carrier.fiber_points();
    let mut out = Array4::zeros((carrier.node_count(), 1, 1, 1));
    for n in 0..carrier.node_count() {
        out[(n, 0, 0, 0)] = f(&base[n], &fiber[n]);
    }
    out
}

/// Degree-0 matrix term sampled from (base point, unit covector).
pub fn sample_matrix_term(
    carrier: Carrier,
    m: usize,
    f: impl Fn(&[f64], &[f64]) -> Array2<Complex64>,
) -> Array4<Complex64> {
    let base = carrier.base_points();
    let fiber = carrier.fiber_points();
    let mut out = Array4::zeros((carrier.node_count(), 1, m, m));
    for n in 0..carrier.node_count() {
        let v = f(&base[n], &fiber[n]);
        for i in 0..m {
            for j in 0..m {
                out[(n, 0, i, j)] = v[(i, j)];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{integrate_form_on, ManifoldModel, SampledForm};
    use crate::group::{golden_angle, GroupLaw, RigidMotion};
    use rand::Rng;
    use rand::SeedableRng;

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

    fn const_term(carrier: Carrier, c: Complex64) -> Array4<Complex64> {
        sample_scalar_term(carrier, |_, _| c)
    }

    fn mode_term(carrier: Carrier, k: i64, amp: Complex64) -> Array4<Complex64> {
        sample_scalar_term(carrier, |x, _| amp * Complex64::from_polar(1.0, k as f64 * x[0]))
    }

    #[test]
    fn identity_is_neutral() {
        let g = circle_group();
        let carrier = Carrier::CircleCosphere { res: 32 };
        let mut a = CrossedSymbol::zero(g.clone(), carrier, 1, 0);
        a.set_term(g.identity(), mode_term(carrier, 2, Complex64::new(0.7, 0.1)))
            .unwrap();
        a.set_term(g.element(&[1]).unwrap(), mode_term(carrier, -1, Complex64::new(0.2, 0.0)))
            .unwrap();
        let id = CrossedSymbol::identity(g.clone(), carrier, 1);
        let left = id.convolve(&a).unwrap();
        let right = a.convolve(&id).unwrap();
        assert!(left.sub(&a).unwrap().sup_norm() < 1e-12);
        assert!(right.sub(&a).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn noncommutativity_phase() {
        // pure shift times e^{ix}: b * a = e^{i alpha} a * b
        let g = circle_group();
        let carrier = Carrier::CircleCosphere { res: 32 };
        let shift = g.element(&[1]).unwrap();
        let mut a = CrossedSymbol::zero(g.clone(), carrier, 1, 0);
        a.set_term(shift.clone(), const_term(carrier, Complex64::new(1.0, 0.0)))
            .unwrap();
        let mut b = CrossedSymbol::zero(g.clone(), carrier, 1, 0);
        b.set_term(g.identity(), mode_term(carrier, 1, Complex64::new(1.0, 0.0)))
            .unwrap();
        let ab = a.convolve(&b).unwrap();
        let mut ba = b.convolve(&a).unwrap();
        let phase = Complex64::from_polar(1.0, -golden_angle());
        ba.scale(phase);
        assert!(ba.sub(&ab).unwrap().sup_norm() < 1e-12);
    }

    fn random_symbol(
        g: &Arc<IsometryGroup>,
        carrier: Carrier,
        rng: &mut impl Rng,
        nterms: i64,
    ) -> CrossedSymbol {
        let mut a = CrossedSymbol::zero(g.clone(), carrier, 2, 0);
        for t in -nterms..=nterms {
            let mut arr = Array4::zeros((carrier.node_count(), 1, 2, 2));
            let base = carrier.base_points();
            let coef: Vec<(i64, Complex64, usize, usize)> = (0..6)
                .map(|_| {
                    (
                        rng.gen_range(-3..=3),
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                        rng.gen_range(0..2),
                        rng.gen_range(0..2),
                    )
                })
                .collect();
            for n in 0..carrier.node_count() {
                for (k, c, i, j) in &coef {
                    arr[(n, 0, *i, *j)] +=
                        *c * Complex64::from_polar(1.0, *k as f64 * base[n][0]);
                }
            }
            a.set_term(g.element(&[t]).unwrap(), arr).unwrap();
        }
        a
    }

    #[test]
    fn convolution_is_associative() {
        let g = circle_group();
        let carrier = Carrier::CircleCosphere { res: 32 };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = random_symbol(&g, carrier, &mut rng, 1);
        let b = random_symbol(&g, carrier, &mut rng, 1);
        let c = random_symbol(&g, carrier, &mut rng, 1);
        let left = a.convolve(&b).unwrap().convolve(&c).unwrap();
        let right = a.convolve(&b.convolve(&c).unwrap()).unwrap();
        let scale = left.sup_norm().max(1.0);
        assert!(left.sub(&right).unwrap().sup_norm() / scale < 1e-11);
    }

    fn random_torus_form(
        g: &Arc<IsometryGroup>,
        carrier: Carrier,
        degree: usize,
        rng: &mut impl Rng,
    ) -> CrossedSymbol {
        let ncomp = form_basis(carrier.form_dim(), degree).len();
        let mut a = CrossedSymbol::zero(g.clone(), carrier, 1, degree);
        let base = carrier.base_points();
        let mut arr = Array4::zeros((carrier.node_count(), ncomp, 1, 1));
        for c in 0..ncomp {
            for _ in 0..4 {
                let kx = rng.gen_range(-2..=2);
                let ky = rng.gen_range(-2..=2);
                let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                for n in 0..carrier.node_count() {
                    let phase = kx as f64 * base[n][0] + ky as f64 * base[n][1];
                    arr[(n, c, 0, 0)] += amp * Complex64::from_polar(1.0, phase);
                }
            }
        }
        a.set_term(g.identity(), arr).unwrap();
        a
    }

    #[test]
    fn d_squared_is_zero_and_leibniz() {
        let g = IsometryGroup::trivial(ManifoldModel::new(ManifoldKind::Torus2));
        let carrier = Carrier::Torus2 { res: 16 };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let a = random_torus_form(&g, carrier, 0, &mut rng);
        let da = a.differential().unwrap();
        let dda = da.differential().unwrap();
        assert!(dda.sup_norm() < 1e-10);

        let b = random_torus_form(&g, carrier, 0, &mut rng);
        let lhs = a.convolve(&b).unwrap().differential().unwrap();
        let rhs = da
            .convolve(&b)
            .unwrap()
            .add(&a.convolve(&b.differential().unwrap()).unwrap())
            .unwrap();
        let scale = lhs.sup_norm().max(1.0);
        assert!(lhs.sub(&rhs).unwrap().sup_norm() / scale < 1e-10);

        // degree-1 Leibniz picks up the grading sign
        let w = random_torus_form(&g, carrier, 1, &mut rng);
        let lhs = w.convolve(&b).unwrap().differential().unwrap();
        let mut adb = w.convolve(&b.differential().unwrap()).unwrap();
        adb.scale(Complex64::new(-1.0, 0.0));
        let rhs = w.differential().unwrap().convolve(&b).unwrap().add(&adb).unwrap();
        let scale = lhs.sup_norm().max(1.0);
        assert!(lhs.sub(&rhs).unwrap().sup_norm() / scale < 1e-10);
    }

    #[test]
    fn neumann_series_matches_geometric_series() {
        // (1 + 0.5 g)^{-1} has coefficient (-0.5)^k at g^k
        let g = circle_group();
        let carrier = Carrier::CircleCosphere { res: 16 };
        let mut a = CrossedSymbol::identity(g.clone(), carrier, 1);
        a.set_term(
            g.element(&[1]).unwrap(),
            const_term(carrier, Complex64::new(0.5, 0.0)),
        )
        .unwrap();
        let b = a.invert(&InvertOptions::default()).unwrap();
        for k in 0..10i64 {
            let want = (-0.5f64).powi(k as i32);
            let got = b
                .term(&g.element(&[k]).unwrap())
                .map(|t| t[(0, 0, 0, 0)])
                .unwrap_or_default();
            assert!(
                (got - Complex64::new(want, 0.0)).norm() < 1e-11,
                "coefficient at g^{k}: {got} want {want}"
            );
        }
        assert!(a.residual(&b).unwrap() < 1e-11);
    }

    #[test]
    fn twisted_neumann_inverse_verifies() {
        let g = circle_group();
        let carrier = Carrier::CircleCosphere { res: 64 };
        let mut a = CrossedSymbol::zero(g.clone(), carrier, 1, 0);
        a.set_term(
            g.identity(),
            sample_scalar_term(carrier, |x, _| {
                Complex64::new(2.0, 0.0) + Complex64::from_polar(1.0, x[0])
            }),
        )
        .unwrap();
        a.set_term(
            g.element(&[1]).unwrap(),
            const_term(carrier, Complex64::new(0.3, 0.1)),
        )
        .unwrap();
        let b = a.invert(&InvertOptions::default()).unwrap();
        assert!(a.residual(&b).unwrap() < 1e-9);
    }

    #[test]
    fn regular_representation_matches_pointwise_inverse() {
        let g = trivial_circle();
        let carrier = Carrier::CircleCosphere { res: 64 };
        let mut a = CrossedSymbol::zero(g.clone(), carrier, 1, 0);
        a.set_term(
            g.identity(),
            sample_scalar_term(carrier, |x, _| {
                Complex64::new(2.0, 0.0) + Complex64::from_polar(1.0, x[0])
            }),
        )
        .unwrap();
        let opts = InvertOptions {
            force_regular: true,
            ..InvertOptions::default()
        };
        let b = a.invert(&opts).unwrap();
        assert!(a.residual(&b).unwrap() < 1e-8);
        let base = carrier.base_points();
        let bt = b.term(&g.identity()).unwrap();
        for n in 0..carrier.node_count() {
            let want = (Complex64::new(2.0, 0.0) + Complex64::from_polar(1.0, base[n][0])).inv();
            assert!((bt[(n, 0, 0, 0)] - want).norm() < 1e-8);
        }
    }

    #[test]
    fn pure_winding_inverts_via_pseudo_inverse() {
        let g = trivial_circle();
        let carrier = Carrier::CircleCosphere { res: 32 };
        let mut a = CrossedSymbol::zero(g.clone(), carrier, 1, 0);
        a.set_term(g.identity(), mode_term(carrier, 1, Complex64::new(1.0, 0.0)))
            .unwrap();
        let opts = InvertOptions {
            force_regular: true,
            ..InvertOptions::default()
        };
        let b = a.invert(&opts).unwrap();
        assert!(a.residual(&b).unwrap() < 1e-8);
    }

    #[test]
    fn vanishing_symbol_is_rejected() {
        let g = trivial_circle();
        let carrier = Carrier::CircleCosphere { res: 32 };
        let mut a = CrossedSymbol::zero(g.clone(), carrier, 1, 0);
        a.set_term(
            g.identity(),
            sample_scalar_term(carrier, |x, _| Complex64::new(x[0].sin(), 0.0)),
        )
        .unwrap();
        let err = a.invert(&InvertOptions::default()).unwrap_err();
        assert!(
            matches!(err, Error::NotElliptic(_) | Error::TruncationInsufficient { .. }),
            "got {err:?}"
        );
    }

    #[test]
    fn decay_profile_fits_synthetic_power_law() {
        // a(g^k) = (1+k)^{-4} must fit exponent -4
        let g = circle_group();
        let carrier = Carrier::CircleCosphere { res: 16 };
        let mut a = CrossedSymbol::zero(g.clone(), carrier, 1, 0);
        for k in 0..=12i64 {
            let amp = (1.0 + k as f64).powi(-4);
            a.set_term(
                g.element(&[k]).unwrap(),
                const_term(carrier, Complex64::new(amp, 0.0)),
            )
            .unwrap();
        }
        let p = a.decay_profile().unwrap();
        assert!((p.exponent + 4.0).abs() < 0.2, "exponent {}", p.exponent);

        let mut small = CrossedSymbol::identity(g.clone(), carrier, 1);
        small
            .set_term(g.element(&[1]).unwrap(), const_term(carrier, Complex64::new(0.5, 0.0)))
            .unwrap();
        assert!(matches!(
            small.decay_profile(),
            Err(Error::InsufficientSupport)
        ));
    }

    #[test]
    fn neumann_inverse_of_two_plus_shift() {
        // (2 + g)^{-1}: coefficient (-1)^k 2^{-k-1} at g^k; 1/8 at g^2, and
        // the decay fit is steeper than -3 over |g| <= 12
        let g = circle_group();
        let carrier = Carrier::CircleCosphere { res: 16 };
        let mut a = CrossedSymbol::zero(g.clone(), carrier, 1, 0);
        a.set_term(g.identity(), const_term(carrier, Complex64::new(2.0, 0.0)))
            .unwrap();
        a.set_term(g.element(&[1]).unwrap(), const_term(carrier, Complex64::new(1.0, 0.0)))
            .unwrap();
        let b = a.invert(&InvertOptions::default()).unwrap();
        let got = b.term(&g.element(&[2]).unwrap()).unwrap()[(0, 0, 0, 0)];
        assert!((got - Complex64::new(0.125, 0.0)).norm() < 1e-12, "{got}");
        let p = b.decay_profile().unwrap();
        assert!(p.exponent < -3.0, "exponent {}", p.exponent);
    }

    #[test]
    fn cs_character_counts_winding() {
        let g = trivial_circle();
        let carrier = Carrier::Circle { res: 64 };
        for (winding, envelope) in [(1i64, false), (3, false), (1, true)] {
            let mut a = CrossedSymbol::zero(g.clone(), carrier, 1, 0);
            a.set_term(
                g.identity(),
                sample_scalar_term(carrier, |x, _| {
                    let r = if envelope { 1.0 + 0.3 * x[0].sin() } else { 1.0 };
                    Complex64::from_polar(r, winding as f64 * x[0])
                }),
            )
            .unwrap();
            let ch = a.cs_character(0, &InvertOptions::default()).unwrap();
            let t = ch.term(&g.identity()).unwrap();
            let form = SampledForm {
                degree: 1,
                carrier,
                values: t
                    .index_axis(ndarray::Axis(3), 0)
                    .index_axis(ndarray::Axis(2), 0)
                    .to_owned(),
            };
            let val = integrate_form_on(&form, carrier).unwrap();
            assert!(
                (val - Complex64::new(winding as f64, 0.0)).norm() < 1e-9,
                "winding {winding} envelope {envelope}: {val}"
            );
        }
    }
}
