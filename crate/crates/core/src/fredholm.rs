//! Fredholm index estimation from finite sections.
//!
//! Square finite sections are index-blind (they always have as many
//! near-kernel right vectors as left vectors), so the estimator classifies
//! each near-zero singular triplet individually: a right vector localized in
//! the interior of the mode window is a genuine kernel direction, one
//! localized in the artificial boundary layer is a truncation artifact, and
//! likewise for left vectors and the cokernel. A windowed heat supertrace
//! over a logarithmic t-sweep provides an independent second reading, and an
//! index is reported only when both methods agree on >= 3 consecutive
//! truncation sizes.

use ndarray::{Array1, Array2};
use ndarray_linalg::SVD;
use num_complex::Complex64;

use crate::error::{Error, PlateauDiagnostics, Result};
use crate::operator::{assemble, toeplitz, full_sections, model_ladder, OperatorSpec, TruncatedOperator};
use crate::symbol::CrossedSymbol;

#[derive(Clone, Debug)]
pub struct IndexEstimate {
    pub index: i64,
    pub heat_agrees: bool,
    pub svd_agrees: bool,
    /// Per-size readings: (truncation size, svd integer, heat integer).
    pub plateau: Vec<(usize, Option<i64>, Option<i64>)>,
    /// Relative spectral gap above the kernel cluster at the largest size.
    pub spectral_gap: f64,
    pub ker_dim: usize,
    pub coker_dim: usize,
}

#[derive(Clone, Debug, Default)]
pub struct EstimateOptions {
    /// Boundary layer width in modes; None derives it from the band.
    pub layer: Option<i64>,
}

struct SectionReading {
    svd_index: Option<i64>,
    heat_index: Option<i64>,
    rel_gap: f64,
    ker: usize,
    coker: usize,
}

fn layer_for(t: &TruncatedOperator, opts: &EstimateOptions) -> i64 {
    if let Some(l) = opts.layer {
        return l;
    }
    let radius = match t.window {
        crate::operator::ModeWindow::CircleFull { radius } => radius,
        crate::operator::ModeWindow::Hardy { max } => max,
        crate::operator::ModeWindow::TorusFull { radius } => radius,
    };
    t.band.max(2).min((radius / 4).max(1))
}

fn analyze_section(t: &TruncatedOperator, opts: &EstimateOptions) -> Result<SectionReading> {
    let d = t.dim();
    let (u, s, vt) = t
        .matrix
        .svd(true, true)
        .map_err(|e| Error::NotElliptic(format!("svd failed: {e}")))?;
    let u = u.unwrap();
    let vt = vt.unwrap();
    let smax = s.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return Ok(SectionReading {
            svd_index: Some(0),
            heat_index: Some(0),
            rel_gap: 0.0,
            ker: 0,
            coker: 0,
        });
    }
    // singular values come back descending; work with the ascending view
    let mut asc: Vec<(usize, f64)> = s.iter().cloned().enumerate().collect();
    asc.sort_by(|a, b| a.1.total_cmp(&b.1));
    let median = asc[d / 2].1;
    let tiny = smax * 1e-12;

    // near-zero cluster: exact zeros extended through the largest
    // multiplicative jump inside the small-singular-value region
    let mut cluster = asc.iter().take_while(|(_, v)| *v <= tiny).count();
    let mut best = (cluster, 30.0f64);
    for i in cluster.max(1)..d {
        if asc[i - 1].1 > 0.05 * median {
            break;
        }
        let r = asc[i].1 / asc[i - 1].1.max(tiny);
        if r > best.1 {
            best = (i, r);
        }
    }
    if best.0 > cluster {
        cluster = best.0;
    }

    let mask = t.interior_mask(layer_for(t, opts));
    let interior_mass = |row: ndarray::ArrayView1<Complex64>| -> f64 {
        let total: f64 = row.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let inner: f64 = row
            .iter()
            .zip(&mask)
            .filter(|(_, keep)| **keep)
            .map(|(v, _)| v.norm_sqr())
            .sum();
        inner / total
    };

    // interior spectral gap: the smallest singular value above the cluster
    // carried by interior vectors; edge-localized truncation artifacts do
    // not measure the symbol's spectrum
    let mut gap = 0.0;
    for (orig, sv) in asc.iter().skip(cluster) {
        if interior_mass(vt.row(*orig)) > 0.5 || interior_mass(u.column(*orig)) > 0.5 {
            gap = *sv;
            break;
        }
    }
    if gap == 0.0 && cluster < d {
        gap = asc[cluster].1;
    }
    let rel_gap = gap / smax;

    // tau sweep: the classified integer must be stable one decade either
    // side of the cluster boundary
    let tau_center = if cluster == 0 {
        tiny
    } else if cluster < d {
        (asc[cluster - 1].1.max(tiny) * asc[cluster].1).sqrt()
    } else {
        smax
    };
    let mut counts: Vec<(i64, usize, usize)> = Vec::new();
    for factor in [0.1, 1.0, 10.0] {
        let tau = tau_center * factor;
        let mut ker = 0usize;
        let mut coker = 0usize;
        for (orig, sv) in &asc {
            if *sv >= tau {
                continue;
            }
            if interior_mass(vt.row(*orig)) > 0.5 {
                ker += 1;
            }
            if interior_mass(u.column(*orig)) > 0.5 {
                coker += 1;
            }
        }
        counts.push((ker as i64 - coker as i64, ker, coker));
    }
    let svd_index = if counts.iter().all(|c| c.0 == counts[0].0) {
        Some(counts[0].0)
    } else {
        None
    };
    let (ker, coker) = (counts[1].1, counts[1].2);

    // windowed heat supertrace over a logarithmic t-sweep
    let heat_index = heat_reading(&s, &u, &vt, &asc, cluster, gap, &interior_mass);

    Ok(SectionReading {
        svd_index,
        heat_index,
        rel_gap,
        ker,
        coker,
    })
}

fn heat_reading(
    s: &Array1<f64>,
    u: &Array2<Complex64>,
    vt: &Array2<Complex64>,
    asc: &[(usize, f64)],
    cluster: usize,
    gap: f64,
    interior_mass: &impl Fn(ndarray::ArrayView1<Complex64>) -> f64,
) -> Option<i64> {
    if gap == 0.0 {
        return None;
    }
    let sigma_ker = if cluster > 0 { asc[cluster - 1].1 } else { 0.0 };
    // t valid when e^{-t gap^2} < 1e-8 and e^{-t sigma_ker^2} > 1 - 1e-6
    let t_lo = 8.0 * std::f64::consts::LN_10 / (gap * gap);
    let t_hi = if sigma_ker > 0.0 {
        -(1.0f64 - 1e-6).ln() / (sigma_ker * sigma_ker)
    } else {
        f64::INFINITY
    };
    if t_lo >= t_hi {
        return None;
    }
    // log sweep across the valid range (capped to 5 decades)
    let decades = (t_hi / t_lo).log10().min(5.0);
    if !(decades > 0.0) {
        return None;
    }
    let npts = 5usize;
    let mut values = Vec::with_capacity(npts);
    for p in 0..npts {
        let t = t_lo * 10f64.powf(decades * p as f64 / (npts - 1) as f64 * 0.999);
        let mut sum = 0.0;
        for (i, sv) in s.iter().enumerate() {
            let w = (-t * sv * sv).exp();
            if w < 1e-16 {
                continue;
            }
            sum += w * (interior_mass(vt.row(i)) - interior_mass(u.column(i)));
        }
        values.push(sum);
    }
    let rounded = values[0].round();
    if values.iter().all(|v| (v - rounded).abs() < 0.1) {
        Some(rounded as i64)
    } else {
        None
    }
}

/// Least-squares slope of ln(relative gap) against ln(truncation size).
fn gap_slope(gaps: &[(usize, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = gaps
        .iter()
        .filter(|(_, g)| *g > 1e-300)
        .map(|(n, g)| ((*n as f64).ln(), g.ln()))
        .collect();
    if pts.len() < gaps.len() {
        // a vanished gap counts as maximally closing
        return f64::NEG_INFINITY;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        0.0
    } else {
        (n * sxy - sx * sy) / denom
    }
}

/// Plateau protocol over a family of finite sections.
pub fn index_from_sections(
    sections: Vec<(usize, TruncatedOperator)>,
    opts: &EstimateOptions,
) -> Result<IndexEstimate> {
    assert!(sections.len() >= 3, "need at least 3 truncation sizes");
    let mut readings: Vec<(usize, Option<i64>, Option<i64>)> = Vec::new();
    let mut gaps: Vec<(usize, f64)> = Vec::new();
    let mut last = None;
    for (size, t) in &sections {
        let r = analyze_section(t, opts)?;
        readings.push((*size, r.svd_index, r.heat_index));
        gaps.push((*size, r.rel_gap));
        last = Some(r);
    }
    // a gap that shrinks like a power of the truncation size marks a
    // non-invertible symbol: the readings are then meaningless even if they
    // happen to agree
    let slope = gap_slope(&gaps);
    let last_gap = gaps.last().map(|g| g.1).unwrap_or(0.0);
    let closing_gap = slope < -0.4 || last_gap < 1e-9;

    // longest-suffix run where both methods agree on one integer
    let mut run = 0usize;
    let mut value = None;
    for (_, svd, heat) in readings.iter().rev() {
        match (svd, heat) {
            (Some(a), Some(b)) if a == b && (value.is_none() || value == Some(*a)) => {
                value = Some(*a);
                run += 1;
            }
            _ => break,
        }
    }
    if run >= 3 && !closing_gap {
        let last = last.unwrap();
        return Ok(IndexEstimate {
            index: value.unwrap(),
            heat_agrees: true,
            svd_agrees: true,
            plateau: readings,
            spectral_gap: last.rel_gap,
            ker_dim: last.ker,
            coker_dim: last.coker,
        });
    }
    Err(Error::NoPlateau(PlateauDiagnostics {
        gaps,
        readings,
        closing_gap,
    }))
}

/// Assemble-and-estimate over a truncation schedule, with discrete order
/// reduction for first- and higher-order specs.
pub fn estimate_index(
    spec: &OperatorSpec,
    n_list: &[i64],
    opts: &EstimateOptions,
) -> Result<IndexEstimate> {
    let mut sections = Vec::new();
    for &n in n_list {
        let mut t = assemble(spec, n)?;
        if spec.order > 0 {
            let p = spec.order as f64 / 2.0;
            t.compose_right_weight(|mode| {
                let n2: f64 = mode.iter().map(|q| (*q * *q) as f64).sum();
                (1.0 + n2).powf(-p)
            });
        }
        sections.push((n as usize, t));
    }
    index_from_sections(sections, opts)
}

/// Toeplitz (Hardy-compressed) index over a truncation schedule.
pub fn toeplitz_index(
    sigma: &CrossedSymbol,
    n_list: &[i64],
    opts: &EstimateOptions,
) -> Result<IndexEstimate> {
    let mut sections = Vec::new();
    for &n in n_list {
        sections.push((n as usize, toeplitz(sigma, n)?));
    }
    index_from_sections(sections, opts)
}

/// Two-sided finite sections of an order-0 circle symbol.
pub fn full_sections_index(
    sigma: &CrossedSymbol,
    n_list: &[i64],
    opts: &EstimateOptions,
) -> Result<IndexEstimate> {
    let mut sections = Vec::new();
    for &n in n_list {
        sections.push((n as usize, full_sections(sigma, n)?));
    }
    index_from_sections(sections, opts)
}

#[derive(Clone, Debug)]
pub struct ModelEulerReport {
    pub index: i64,
    pub kernel_dim: usize,
    pub adjoint_kernel_dim: usize,
    /// |<kernel vector, Hermite expansion of exp(-x^2/2)>|^2; the expansion
    /// is exactly the lowest Hermite function, i.e. the basis vector e_0.
    pub kernel_overlap: f64,
    /// Largest deviation of the heat supertrace from 1 over the t-sweep.
    pub supertrace_deviation: f64,
}

/// Exact index data for the model operator E = x + d/dx in the Hermite
/// ladder realization (index one, kernel exp(-x^2/2)).
pub fn model_euler_index(n_hermite: usize) -> Result<ModelEulerReport> {
    if n_hermite < 8 {
        return Err(Error::BadResolution {
            got: n_hermite,
            min: 8,
        });
    }
    let a = model_ladder(n_hermite);
    let (_, s, vt) = a
        .svd(true, true)
        .map_err(|e| Error::NotElliptic(format!("svd failed: {e}")))?;
    let vt = vt.unwrap();
    let smax = s.iter().cloned().fold(0.0f64, f64::max);
    // rows of vt beyond the singular-value count span the null space, along
    // with any vanishing singular values
    let mut null_rows: Vec<usize> = (s.len()..n_hermite + 1).collect();
    for (i, sv) in s.iter().enumerate() {
        if *sv <= smax * 1e-12 {
            null_rows.push(i);
        }
    }
    let kernel_dim = null_rows.len();
    let adjoint_kernel_dim = s.iter().filter(|sv| **sv <= smax * 1e-12).count();
    let mut kernel_overlap = 0.0;
    for r in &null_rows {
        kernel_overlap += vt[(*r, 0)].norm_sqr();
    }
    // heat supertrace: A*A and AA* are diagonal with spectra {0,2,...,2n}
    // and {2,...,2n}; the supertrace is exactly 1 for every t
    let ata = a.t().mapv(|v| v.conj()).dot(&a);
    let aat = a.dot(&a.t().mapv(|v| v.conj()));
    let mut supertrace_deviation = 0.0f64;
    for p in -2..=2 {
        let t = 10f64.powi(p);
        let tr1: f64 = (0..ata.nrows()).map(|i| (-t * ata[(i, i)].re).exp()).sum();
        let tr2: f64 = (0..aat.nrows()).map(|i| (-t * aat[(i, i)].re).exp()).sum();
        supertrace_deviation = supertrace_deviation.max((tr1 - tr2 - 1.0).abs());
    }
    Ok(ModelEulerReport {
        index: kernel_dim as i64 - adjoint_kernel_dim as i64,
        kernel_dim,
        adjoint_kernel_dim,
        kernel_overlap,
        supertrace_deviation,
    })
}
