//! Right-hand sides of the index formulas: characteristic forms, fixed-point
//! denominators, Chern characters of projections, and the series evaluators
//! with shell-decay diagnostics.
//!
//! Every stratum in scope is flat or one-dimensional, so the Todd and A-hat
//! series terminate at their constant term; the denominators are evaluated
//! through two independent routes (elementary symmetric polynomials vs a
//! matrix-sine Pfaffian) whose agreement is one of the verified identities.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{
    form_basis, integrate_form_oriented, Carrier, ManifoldKind, SampledForm,
};
use crate::group::{fixed_strata, FixedStratum, GroupElement, StratumKind};
use crate::symbol::{decay_exponent, CrossedSymbol, InvertOptions};

#[derive(Clone, Debug)]
pub struct CharacteristicForms {
    pub carrier: Carrier,
    pub todd: SampledForm,
    pub a_hat: SampledForm,
    /// Curvature 2-form data; zero on every in-scope stratum.
    pub curvature_is_zero: bool,
}

/// Characteristic forms of a stratum, via the curvature power series.
///
/// All in-scope strata are flat (tori, circles) or one-dimensional, so the
/// curvature entering both series vanishes identically and the series
/// evaluate to the constant 1; the evaluation still runs through the series
/// so the Todd and A-hat routes stay independent.
pub fn characteristic_forms(
    manifold_kind: ManifoldKind,
    stratum: &FixedStratum,
    resolution: usize,
) -> Result<CharacteristicForms> {
    if stratum.kind == StratumKind::Empty {
        return Err(Error::EmptyStratum);
    }
    let carrier = stratum_carrier(manifold_kind, stratum, resolution)?;
    // zero curvature on flat strata; 1-dim strata carry no 2-forms at all
    let todd = char_series(carrier, SeriesKind::Todd);
    let a_hat = char_series(carrier, SeriesKind::AHat);
    Ok(CharacteristicForms {
        carrier,
        todd,
        a_hat,
        curvature_is_zero: true,
    })
}

fn stratum_carrier(
    manifold_kind: ManifoldKind,
    stratum: &FixedStratum,
    resolution: usize,
) -> Result<Carrier> {
    match (&stratum.kind, manifold_kind) {
        (StratumKind::WholeManifold, ManifoldKind::Circle) => {
            Ok(Carrier::CircleCosphere { res: resolution })
        }
        (StratumKind::WholeManifold, ManifoldKind::Torus2) => {
            Ok(Carrier::Torus2Cosphere { res: resolution })
        }
        (StratumKind::WholeManifold, ManifoldKind::SphereCrossCircle) => {
            Ok(Carrier::StretchCosphere { res: resolution })
        }
        (StratumKind::SubCircle, _) => Ok(Carrier::Circle { res: resolution }),
        (StratumKind::PointSet, _) => Err(Error::UnsupportedGeometry(
            "0-dimensional strata have an empty cosphere bundle".into(),
        )),
        (StratumKind::Empty, _) => Err(Error::EmptyStratum),
    }
}

enum SeriesKind {
    Todd,
    AHat,
}

/// Evaluate a characteristic power series at zero curvature: the constant
/// term of both Td(x) = x/(1-e^{-x}) and A-hat(x) = (x/2)/sinh(x/2) is 1 and
/// every higher term carries a positive power of the (vanishing) curvature.
fn char_series(carrier: Carrier, kind: SeriesKind) -> SampledForm {
    let constant_term = match kind {
        SeriesKind::Todd => 1.0,
        SeriesKind::AHat => 1.0,
    };
    SampledForm::constant(carrier, Complex64::new(constant_term, 0.0))
}

/// Denominator ch lambda_{-1}(N otimes C)(g) on a flat stratum: the
/// alternating sum of exterior-power traces, i.e. det(I - R) for the block
/// rotation R, computed through elementary symmetric polynomials.
pub fn as_denominator(angles: &[f64]) -> Result<f64> {
    for &t in angles {
        if (2.0 - 2.0 * t.cos()).abs() < 1e-12 {
            return Err(Error::VanishingAngle(t));
        }
    }
    // characteristic polynomial of R: product of t^2 - 2 cos(theta) t + 1
    let mut poly = vec![1.0f64];
    for &t in angles {
        let factor = [1.0, -2.0 * t.cos(), 1.0];
        let mut next = vec![0.0; poly.len() + 2];
        for (i, a) in poly.iter().enumerate() {
            for (j, b) in factor.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        poly = next;
    }
    // sum of coefficients = char poly at 1 = det(I - R)
    Ok(poly.iter().sum())
}

/// Pf{2i sin(Omega/4pi + i Theta/2)} on a flat stratum (Omega = 0), as the
/// Pfaffian of the matrix sine of the block rotation generator; the sign is
/// pinned so one block with theta = pi gives +2.
pub fn pf_sin_denominator(angles: &[f64]) -> Result<f64> {
    for &t in angles {
        if (2.0 * (t / 2.0).sin()).abs() < 1e-12 {
            return Err(Error::VanishingAngle(t));
        }
    }
    if angles.is_empty() {
        return Ok(1.0);
    }
    let r = angles.len();
    let mut arg: Array2<Complex64> = Array2::zeros((2 * r, 2 * r));
    for (j, &t) in angles.iter().enumerate() {
        // i Theta / 2 with Theta the rotation generator of the block
        arg[(2 * j, 2 * j + 1)] = Complex64::new(0.0, t / 2.0);
        arg[(2 * j + 1, 2 * j)] = Complex64::new(0.0, -t / 2.0);
    }
    let s = matrix_sine(&arg);
    let scaled = s.mapv(|v| v * Complex64::new(0.0, -2.0));
    let pf = pfaffian(&scaled);
    if pf.im.abs() > 1e-9 * pf.norm().max(1.0) {
        return Err(Error::UnsupportedGeometry(format!(
            "pfaffian unexpectedly complex: {pf}"
        )));
    }
    Ok(pf.re)
}

fn matrix_sine(a: &Array2<Complex64>) -> Array2<Complex64> {
    let a2 = a.dot(a);
    let mut term = a.clone();
    let mut sum = a.clone();
    for k in 1..40 {
        term = term.dot(&a2).mapv(|v| v * (-1.0 / ((2 * k) as f64 * (2 * k + 1) as f64)));
        let norm: f64 = term.iter().map(|v| v.norm()).fold(0.0, f64::max);
        sum = sum + &term;
        if norm < 1e-16 {
            break;
        }
    }
    sum
}

/// Pfaffian of a complex antisymmetric matrix by recursive expansion along
/// the first row.
fn pfaffian(a: &Array2<Complex64>) -> Complex64 {
    let n = a.nrows();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if n % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    if n == 2 {
        return a[(0, 1)];
    }
    let mut total = Complex64::new(0.0, 0.0);
    for j in 1..n {
        let entry = a[(0, j)];
        if entry.norm() == 0.0 {
            continue;
        }
        let keep: Vec<usize> = (1..n).filter(|&k| k != j).collect();
        let mut minor: Array2<Complex64> = Array2::zeros((n - 2, n - 2));
        for (ri, &r) in keep.iter().enumerate() {
            for (ci, &c) in keep.iter().enumerate() {
                minor[(ri, ci)] = a[(r, c)];
            }
        }
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        total += entry * pfaffian(&minor) * sign;
    }
    total
}

/// Denominator of a stratum for the (fixedp) formula: angles of the normal
/// bundle N M_g, complexified.
pub fn stratum_as_denominator(stratum: &FixedStratum) -> Result<f64> {
    if stratum.kind == StratumKind::Empty {
        return Err(Error::EmptyStratum);
    }
    as_denominator(
        &stratum
            .normal_angles
            .iter()
            .map(|t| t.abs())
            .collect::<Vec<_>>(),
    )
}

/// Denominator of a stratum for the (local)/(dirac1) formulas: the normal
/// bundle inside S*M doubles every angle block.
pub fn stratum_pf_sin_denominator(stratum: &FixedStratum) -> Result<f64> {
    if stratum.kind == StratumKind::Empty {
        return Err(Error::EmptyStratum);
    }
    let doubled: Vec<f64> = stratum
        .normal_angles
        .iter()
        .flat_map(|t| [t.abs(), t.abs()])
        .collect();
    pf_sin_denominator(&doubled)
}

/// Chern character coefficients of an idempotent: one scalar crossed form
/// per even degree 0, 2, ..., up to the carrier dimension.
pub fn chern_projection(p: &CrossedSymbol, idempotent_tol: f64) -> Result<Vec<CrossedSymbol>> {
    let dev = p.convolve(p)?.sub(p)?.sup_norm();
    if dev >= idempotent_tol {
        return Err(Error::NotIdempotent(dev));
    }
    let dim = p.carrier.form_dim();
    // q = -(1/2pi i) p dp dp, the curvature term of the exponential
    let dp = p.differential()?;
    let mut q = p.convolve(&dp)?.convolve(&dp)?;
    // -(1/2 pi i) = i/(2 pi)
    q.scale(Complex64::new(0.0, 1.0 / crate::geometry::TAU));
    let mut out = Vec::new();
    // degree 0: tr p
    out.push(p.matrix_trace());
    // higher terms: tr(p q^k / k!)
    let mut power = q.clone();
    let mut kfact = 1.0;
    let mut deg = 2;
    while deg <= dim {
        let mut term = p.convolve(&power)?.matrix_trace();
        term.scale(Complex64::new(1.0 / kfact, 0.0));
        out.push(term);
        deg += 2;
        if deg <= dim {
            power = power.convolve(&q)?;
            kfact *= ((deg / 2) as f64).max(1.0);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Contribution {
    pub g: GroupElement,
    pub stratum_kind: StratumKind,
    pub value: Complex64,
}

#[derive(Clone, Debug)]
pub struct IndexReport {
    pub contributions: Vec<Contribution>,
    /// Shell sums of actual stratum contributions, by word length.
    pub shell_sums: Vec<(u64, Complex64)>,
    /// Sup norms of the character coefficients per word-length shell; the
    /// convergence diagnostic (stratum sums vanish identically for free
    /// actions, so they carry no decay information).
    pub coeff_shells: Vec<(u64, f64)>,
    /// Power-law fit on coeff_shells (slope of log norm vs log(1+|g|)).
    pub decay_exponent: Option<f64>,
    pub total: Complex64,
    pub nearest: i64,
    pub distance: f64,
    pub empty_strata: usize,
    pub convergent: bool,
}

fn finish_report(
    contributions: Vec<Contribution>,
    shell_sums: std::collections::BTreeMap<u64, Complex64>,
    coeff_shells: Vec<(u64, f64)>,
    empty_strata: usize,
) -> IndexReport {
    let total: Complex64 = contributions.iter().map(|c| c.value).sum();
    let nearest = total.re.round() as i64;
    let distance = (total - Complex64::new(nearest as f64, 0.0)).norm();
    let decay = decay_exponent(&coeff_shells).ok();
    // convergent when the coefficients decay at all; a single-shell (or
    // immediately vanishing) character converges trivially
    let nonzero_shells = coeff_shells.iter().filter(|(_, s)| *s > 1e-300).count();
    let convergent = nonzero_shells <= 1 || decay.map_or(false, |d| d < -1.0);
    IndexReport {
        contributions,
        shell_sums: shell_sums.into_iter().collect(),
        coeff_shells,
        decay_exponent: decay,
        total,
        nearest,
        distance,
        empty_strata,
        convergent,
    }
}

fn coeff_shells_of(ch: &CrossedSymbol) -> Vec<(u64, f64)> {
    let mut shells: std::collections::BTreeMap<u64, f64> = std::collections::BTreeMap::new();
    for (g, t) in ch.terms() {
        let l = ch.group.word_length(g);
        let s = CrossedSymbol::term_sup(t);
        let e = shells.entry(l).or_insert(0.0);
        *e = (*e).max(s);
    }
    shells.into_iter().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum OddFlavor {
    /// Eq. (fixedp): Td and ch lambda_{-1} denominators, integral over S*M_g.
    FixedPoint,
    /// Eq. (local): A-hat and Pf-sin denominators, integral over X_g.
    Local,
}

/// Eq. (fixedp) evaluator for odd (circle-type) scenarios.
pub fn evaluate_fixedp(sigma: &CrossedSymbol, shell_max: u64) -> Result<IndexReport> {
    evaluate_odd(sigma, shell_max, OddFlavor::FixedPoint)
}

/// Eq. (local) evaluator; same structure with A-hat/Pf-sin in place of
/// Td/lambda_{-1}.
pub fn evaluate_local_odd(sigma: &CrossedSymbol, shell_max: u64) -> Result<IndexReport> {
    evaluate_odd(sigma, shell_max, OddFlavor::Local)
}

fn evaluate_odd(sigma: &CrossedSymbol, shell_max: u64, flavor: OddFlavor) -> Result<IndexReport> {
    match sigma.carrier {
        Carrier::CircleCosphere { .. } | Carrier::Circle { .. } => {}
        _ => {
            return Err(Error::UnsupportedGeometry(
                "odd evaluators expect a circle-type carrier".into(),
            ))
        }
    }
    let opts = InvertOptions::default();
    let ch = sigma.cs_character(0, &opts)?;
    let group = sigma.group.clone();
    let mut contributions = Vec::new();
    let mut shell_sums: std::collections::BTreeMap<u64, Complex64> =
        std::collections::BTreeMap::new();
    let mut empty_strata = 0usize;
    for (g, term) in ch.terms() {
        let l = group.word_length(g);
        if l > shell_max {
            continue;
        }
        let strata = fixed_strata(&group, g)?;
        let mut value = Complex64::new(0.0, 0.0);
        let mut kind = StratumKind::Empty;
        for stratum in &strata {
            match stratum.kind {
                StratumKind::Empty => {
                    empty_strata += 1;
                    continue;
                }
                StratumKind::PointSet => {
                    // the printed integral over an empty cosphere bundle is 0
                    empty_strata += 1;
                    continue;
                }
                StratumKind::WholeManifold => {
                    kind = StratumKind::WholeManifold;
                    // characteristic forms are the constant 1; denominator 1
                    // for the identity's empty normal bundle
                    let denom = match flavor {
                        OddFlavor::FixedPoint => {
                            if stratum.normal_angles.is_empty() {
                                1.0
                            } else {
                                stratum_as_denominator(stratum)?
                            }
                        }
                        OddFlavor::Local => {
                            if stratum.normal_angles.is_empty() {
                                1.0
                            } else {
                                stratum_pf_sin_denominator(stratum)?
                            }
                        }
                    };
                    let form = SampledForm {
                        degree: 1,
                        carrier: ch.carrier,
                        values: term
                            .index_axis(ndarray::Axis(3), 0)
                            .index_axis(ndarray::Axis(2), 0)
                            .to_owned(),
                    };
                    value += integrate_form_oriented(&form, ch.carrier)? / denom;
                }
                StratumKind::SubCircle => {
                    return Err(Error::UnsupportedGeometry(
                        "sub-circle strata integration is outside the odd evaluators' scope"
                            .into(),
                    ))
                }
            }
        }
        contributions.push(Contribution {
            g: g.clone(),
            stratum_kind: kind,
            value,
        });
        *shell_sums.entry(l).or_insert(Complex64::new(0.0, 0.0)) += value;
    }
    Ok(finish_report(
        contributions,
        shell_sums,
        coeff_shells_of(&ch),
        empty_strata,
    ))
}

/// Eq. (dirac1) evaluator on the even (torus) carrier.
pub fn evaluate_dirac_even(
    p: &CrossedSymbol,
    shell_max: u64,
    idempotent_tol: f64,
) -> Result<IndexReport> {
    match p.carrier {
        Carrier::Torus2 { .. } => {}
        _ => {
            return Err(Error::UnsupportedGeometry(
                "even evaluator expects the Torus2 carrier".into(),
            ))
        }
    }
    let ch = chern_projection(p, idempotent_tol)?;
    let ch2 = &ch[1]; // degree-2 coefficients
    let group = p.group.clone();
    let mut contributions = Vec::new();
    let mut shell_sums: std::collections::BTreeMap<u64, Complex64> =
        std::collections::BTreeMap::new();
    let mut empty_strata = 0usize;
    for (g, term) in ch2.terms() {
        let l = group.word_length(g);
        if l > shell_max {
            continue;
        }
        let strata = fixed_strata(&group, g)?;
        let mut value = Complex64::new(0.0, 0.0);
        let mut kind = StratumKind::Empty;
        for stratum in &strata {
            match stratum.kind {
                StratumKind::Empty | StratumKind::PointSet => {
                    empty_strata += 1;
                }
                StratumKind::WholeManifold => {
                    kind = StratumKind::WholeManifold;
                    let denom = if stratum.normal_angles.is_empty() {
                        1.0
                    } else {
                        stratum_pf_sin_denominator(stratum)?
                    };
                    let ncomp = form_basis(p.carrier.form_dim(), 2).len();
                    debug_assert_eq!(ncomp, 1);
                    let form = SampledForm {
                        degree: 2,
                        carrier: p.carrier,
                        values: term
                            .index_axis(ndarray::Axis(3), 0)
                            .index_axis(ndarray::Axis(2), 0)
                            .to_owned(),
                    };
                    value += integrate_form_oriented(&form, p.carrier)? / denom;
                }
                StratumKind::SubCircle => {
                    return Err(Error::UnsupportedGeometry(
                        "sub-circle strata do not occur on the torus".into(),
                    ))
                }
            }
        }
        contributions.push(Contribution {
            g: g.clone(),
            stratum_kind: kind,
            value,
        });
        *shell_sums.entry(l).or_insert(Complex64::new(0.0, 0.0)) += value;
    }
    Ok(finish_report(
        contributions,
        shell_sums,
        coeff_shells_of(ch2),
        empty_strata,
    ))
}
