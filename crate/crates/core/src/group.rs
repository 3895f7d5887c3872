//! Finitely generated isometry groups, word metric, growth and Diophantine
//! condition checkers, and fixed-point strata.
//!
//! Groups are restricted to free abelian and cyclic groups acting by rigid
//! motions: translations on flat factors and commuting axis rotations on the
//! sphere factor. Composition is exact integer arithmetic on exponent
//! vectors, so there is no numerical group closure to worry about.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{circle_dist, wrap_angle, ManifoldKind, ManifoldModel, TAU};

static GROUP_IDS: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupLaw {
    FreeAbelian { rank: usize },
    Cyclic { order: u64 },
}

/// A rigid motion generating the action: translation angles on the flat
/// coordinates and an axis rotation angle on the sphere factor (0 if none).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RigidMotion {
    pub flat_shift: Vec<f64>,
    pub sphere_angle: f64,
}

impl RigidMotion {
    pub fn circle_rotation(angle: f64) -> Self {
        RigidMotion {
            flat_shift: vec![angle],
            sphere_angle: 0.0,
        }
    }

    pub fn torus_translation(a: f64, b: f64) -> Self {
        RigidMotion {
            flat_shift: vec![a, b],
            sphere_angle: 0.0,
        }
    }

    /// Axis rotation on the sphere factor of S^2 x S^1 plus a circle shift.
    pub fn stretch_motion(sphere_angle: f64, circle_shift: f64) -> Self {
        RigidMotion {
            flat_shift: vec![circle_shift],
            sphere_angle,
        }
    }
}

#[derive(Debug)]
pub struct IsometryGroup {
    pub manifold: ManifoldModel,
    pub law: GroupLaw,
    pub generators: Vec<RigidMotion>,
    id: u64,
}

impl IsometryGroup {
    pub fn new(
        manifold: ManifoldModel,
        law: GroupLaw,
        generators: Vec<RigidMotion>,
    ) -> Result<Arc<Self>> {
        let expected = match law {
            GroupLaw::FreeAbelian { rank } => rank,
            GroupLaw::Cyclic { .. } => 1,
        };
        if generators.len() != expected {
            return Err(Error::ScenarioInvalid(format!(
                "group law expects {expected} generators, got {}",
                generators.len()
            )));
        }
        let flat_coords = match manifold.kind {
            ManifoldKind::Circle => 1,
            ManifoldKind::Torus2 => 2,
            ManifoldKind::SphereCrossCircle => 1,
        };
        for g in &generators {
            if g.flat_shift.len() != flat_coords {
                return Err(Error::ScenarioInvalid(format!(
                    "generator has {} flat shifts, manifold needs {flat_coords}",
                    g.flat_shift.len()
                )));
            }
            if g.sphere_angle != 0.0 && manifold.kind != ManifoldKind::SphereCrossCircle {
                return Err(Error::ScenarioInvalid(
                    "sphere rotation on a flat manifold".into(),
                ));
            }
        }
        let group = IsometryGroup {
            manifold,
            law,
            generators,
            id: GROUP_IDS.fetch_add(1, Ordering::Relaxed),
        };
        if let GroupLaw::Cyclic { order } = law {
            // the order-th power of the generator must act as the identity
            let g = GroupElement {
                group_id: group.id,
                exponents: vec![order as i64],
            };
            let total = group.total_motion(&g);
            for &s in &total.flat_shift {
                if circle_dist(s, 0.0) > 1e-12 {
                    return Err(Error::ScenarioInvalid(
                        "cyclic generator's order-th power is not the identity".into(),
                    ));
                }
            }
            if circle_dist(total.sphere_angle, 0.0) > 1e-12 {
                return Err(Error::ScenarioInvalid(
                    "cyclic generator's order-th power is not the identity".into(),
                ));
            }
        }
        Ok(Arc::new(group))
    }

    /// The trivial group acting on `manifold`.
    pub fn trivial(manifold: ManifoldModel) -> Arc<Self> {
        Arc::new(IsometryGroup {
            manifold,
            law: GroupLaw::FreeAbelian { rank: 0 },
            generators: vec![],
            id: GROUP_IDS.fetch_add(1, Ordering::Relaxed),
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn identity(self: &Arc<Self>) -> GroupElement {
        let rank = self.generators.len();
        GroupElement {
            group_id: self.id,
            exponents: vec![0; rank],
        }
    }

    pub fn element(self: &Arc<Self>, exponents: &[i64]) -> Result<GroupElement> {
        if exponents.len() != self.generators.len() {
            return Err(Error::ScenarioInvalid(format!(
                "element has {} exponents, group has {} generators",
                exponents.len(),
                self.generators.len()
            )));
        }
        let mut exps = exponents.to_vec();
        if let GroupLaw::Cyclic { order } = self.law {
            exps[0] = exps[0].rem_euclid(order as i64);
        }
        Ok(GroupElement {
            group_id: self.id,
            exponents: exps,
        })
    }

    /// Net rigid motion of an element (exact in the exponents; angles are
    /// reduced mod 2 pi at the very end).
    pub fn total_motion(&self, g: &GroupElement) -> RigidMotion {
        let flat_coords = self
            .generators
            .first()
            .map(|m| m.flat_shift.len())
            .unwrap_or(match self.manifold.kind {
                ManifoldKind::Torus2 => 2,
                _ => 1,
            });
        let mut flat = vec![0.0; flat_coords];
        let mut sphere = 0.0;
        for (gen, &e) in self.generators.iter().zip(&g.exponents) {
            for (f, s) in flat.iter_mut().zip(&gen.flat_shift) {
                *f += e as f64 * s;
            }
            sphere += e as f64 * gen.sphere_angle;
        }
        RigidMotion {
            flat_shift: flat.into_iter().map(wrap_angle).collect(),
            sphere_angle: wrap_angle(sphere),
        }
    }

    pub fn word_length(&self, g: &GroupElement) -> u64 {
        match self.law {
            GroupLaw::FreeAbelian { .. } => g.exponents.iter().map(|e| e.unsigned_abs()).sum(),
            GroupLaw::Cyclic { order } => {
                let r = g.exponents[0].rem_euclid(order as i64) as u64;
                r.min(order - r)
            }
        }
    }

    pub fn compose(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        if g.group_id != self.id || h.group_id != self.id {
            return Err(Error::GroupMismatch);
        }
        let mut exps: Vec<i64> = g
            .exponents
            .iter()
            .zip(&h.exponents)
            .map(|(a, b)| a + b)
            .collect();
        if let GroupLaw::Cyclic { order } = self.law {
            exps[0] = exps[0].rem_euclid(order as i64);
        }
        Ok(GroupElement {
            group_id: self.id,
            exponents: exps,
        })
    }

    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        let mut exps: Vec<i64> = g.exponents.iter().map(|e| -e).collect();
        if let GroupLaw::Cyclic { order } = self.law {
            exps[0] = exps[0].rem_euclid(order as i64);
        }
        GroupElement {
            group_id: self.id,
            exponents: exps,
        }
    }

    /// Point action x -> g(x) in angle coordinates.
    pub fn act_point(&self, g: &GroupElement, x: &[f64]) -> Vec<f64> {
        let motion = self.total_motion(g);
        match self.manifold.kind {
            ManifoldKind::Circle | ManifoldKind::Torus2 => x
                .iter()
                .zip(&motion.flat_shift)
                .map(|(xi, s)| wrap_angle(xi + s))
                .collect(),
            ManifoldKind::SphereCrossCircle => {
                // coordinates (theta, phi, s); axis rotation moves phi only
                vec![
                    x[0],
                    wrap_angle(x[1] + motion.sphere_angle),
                    wrap_angle(x[2] + motion.flat_shift[0]),
                ]
            }
        }
    }

    /// Cosphere action: the base action plus ((dg)*)^{-1} on the covector.
    /// For our rigid motions the covector components are unchanged in the
    /// natural orthonormal frame.
    pub fn act_cosphere(&self, g: &GroupElement, x: &[f64], xi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (self.act_point(g, x), xi.to_vec())
    }

    /// Elements of the closed word-metric ball of radius `r`.
    pub fn ball(self: &Arc<Self>, r: u64) -> Vec<GroupElement> {
        let mut out = Vec::new();
        match self.law {
            GroupLaw::FreeAbelian { rank } => {
                let mut cur = vec![0i64; rank];
                enumerate_ball(self, &mut cur, 0, r as i64, &mut out);
            }
            GroupLaw::Cyclic { order } => {
                for k in 0..order as i64 {
                    let g = self.element(&[k]).unwrap();
                    if self.word_length(&g) <= r {
                        out.push(g);
                    }
                }
            }
        }
        out.sort();
        out
    }
}

fn enumerate_ball(
    group: &Arc<IsometryGroup>,
    cur: &mut Vec<i64>,
    pos: usize,
    budget: i64,
    out: &mut Vec<GroupElement>,
) {
    if pos == cur.len() {
        out.push(group.element(cur).unwrap());
        return;
    }
    for v in -budget..=budget {
        cur[pos] = v;
        enumerate_ball(group, cur, pos + 1, budget - v.abs(), out);
    }
    cur[pos] = 0;
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    group_id: u64,
    pub exponents: Vec<i64>,
}

impl GroupElement {
    pub fn is_identity(&self) -> bool {
        self.exponents.iter().all(|e| *e == 0)
    }

    pub fn group_id(&self) -> u64 {
        self.group_id
    }
}

// ---------------------------------------------------------------------------
// growth
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct GrowthEstimate {
    pub exponent: f64,
    pub counts: Vec<(u64, u64)>,
}

/// Polynomial growth exponent from ball counts at dyadic radii.
///
/// The estimator is the log-log slope over the last doubling
/// k_max/2 -> k_max, which suppresses the lower-order terms that bias a
/// least-squares fit over small radii.
pub fn growth_check(group: &Arc<IsometryGroup>, k_max: u64) -> GrowthEstimate {
    assert!(k_max >= 8, "k_max must be at least 8");
    let mut counts = Vec::new();
    let mut k = 2;
    while k <= k_max {
        counts.push((k, ball_count(group, k)));
        k *= 2;
    }
    if counts.last().map(|c| c.0) != Some(k_max) {
        counts.push((k_max, ball_count(group, k_max)));
    }
    let (k1, c1) = counts[counts.len() - 2];
    let (k2, c2) = counts[counts.len() - 1];
    let exponent = ((c2 as f64) / (c1 as f64)).ln() / ((k2 as f64) / (k1 as f64)).ln();
    GrowthEstimate { exponent, counts }
}

fn ball_count(group: &Arc<IsometryGroup>, r: u64) -> u64 {
    match group.law {
        GroupLaw::FreeAbelian { rank } => {
            // exact l1-ball lattice counts; rank <= 3 covers everything in scope
            let rr = r as i64;
            let mut count = 0u64;
            match rank {
                0 => count = 1,
                1 => count = (2 * rr + 1) as u64,
                2 => {
                    for a in -rr..=rr {
                        count += (2 * (rr - a.abs()) + 1) as u64;
                    }
                }
                3 => {
                    for a in -rr..=rr {
                        for b in -(rr - a.abs())..=(rr - a.abs()) {
                            count += (2 * (rr - a.abs() - b.abs()) + 1) as u64;
                        }
                    }
                }
                _ => panic!("growth check supports rank <= 3"),
            }
            count
        }
        GroupLaw::Cyclic { order } => (2 * r + 1).min(order),
    }
}

// ---------------------------------------------------------------------------
// fixed strata
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StratumKind {
    WholeManifold,
    Empty,
    SubCircle,
    PointSet,
}

#[derive(Clone, Debug)]
pub enum StratumEmbedding {
    Whole,
    None,
    /// Pole circle {theta = 0 or pi} x S^1 in the stretch geometry.
    PoleCircle {
        north: bool,
    },
    Points(Vec<Vec<f64>>),
}

#[derive(Clone, Debug)]
pub struct FixedStratum {
    pub element: GroupElement,
    pub kind: StratumKind,
    pub embedding: StratumEmbedding,
    /// Normal rotation angles theta_j (radians, each nonzero mod 2 pi).
    pub normal_angles: Vec<f64>,
    pub normal_rank: usize,
}

impl FixedStratum {
    pub fn dim(&self, manifold: &ManifoldModel) -> usize {
        manifold.dim() - self.normal_rank
    }
}

/// Connected components of fix(g) with their normal rotation data.
pub fn fixed_strata(group: &Arc<IsometryGroup>, g: &GroupElement) -> Result<Vec<FixedStratum>> {
    if g.group_id != group.id {
        return Err(Error::GroupMismatch);
    }
    let motion = group.total_motion(g);
    let flat_fixed = motion
        .flat_shift
        .iter()
        .all(|s| circle_dist(*s, 0.0) < 1e-12);
    let sphere_fixed = circle_dist(motion.sphere_angle, 0.0) < 1e-12;
    match group.manifold.kind {
        ManifoldKind::Circle | ManifoldKind::Torus2 => {
            if flat_fixed {
                Ok(vec![FixedStratum {
                    element: g.clone(),
                    kind: StratumKind::WholeManifold,
                    embedding: StratumEmbedding::Whole,
                    normal_angles: vec![],
                    normal_rank: 0,
                }])
            } else {
                // a nontrivial translation of a flat torus is fixed-point free
                Ok(vec![FixedStratum {
                    element: g.clone(),
                    kind: StratumKind::Empty,
                    embedding: StratumEmbedding::None,
                    normal_angles: vec![],
                    normal_rank: group.manifold.dim(),
                }])
            }
        }
        ManifoldKind::SphereCrossCircle => {
            if flat_fixed && sphere_fixed {
                Ok(vec![FixedStratum {
                    element: g.clone(),
                    kind: StratumKind::WholeManifold,
                    embedding: StratumEmbedding::Whole,
                    normal_angles: vec![],
                    normal_rank: 0,
                }])
            } else if flat_fixed {
                // axis rotation: fixed set is the two pole circles, the
                // normal plane rotates by the sphere angle (real rank 2)
                let theta = signed_angle(motion.sphere_angle);
                Ok(vec![
                    FixedStratum {
                        element: g.clone(),
                        kind: StratumKind::SubCircle,
                        embedding: StratumEmbedding::PoleCircle { north: true },
                        normal_angles: vec![theta],
                        normal_rank: 2,
                    },
                    FixedStratum {
                        element: g.clone(),
                        kind: StratumKind::SubCircle,
                        embedding: StratumEmbedding::PoleCircle { north: false },
                        normal_angles: vec![-theta],
                        normal_rank: 2,
                    },
                ])
            } else {
                Ok(vec![FixedStratum {
                    element: g.clone(),
                    kind: StratumKind::Empty,
                    embedding: StratumEmbedding::None,
                    normal_angles: vec![],
                    normal_rank: 3,
                }])
            }
        }
    }
}

fn signed_angle(a: f64) -> f64 {
    let w = wrap_angle(a);
    if w > std::f64::consts::PI {
        w - TAU
    } else {
        w
    }
}

/// Distance from x to fix(g); 1 by convention when fix(g) is empty.
pub fn dist_to_fix(group: &Arc<IsometryGroup>, g: &GroupElement, x: &[f64]) -> Result<f64> {
    let strata = fixed_strata(group, g)?;
    let mut best: Option<f64> = None;
    for s in &strata {
        let d = match (&s.kind, &s.embedding) {
            (StratumKind::WholeManifold, _) => Some(0.0),
            (StratumKind::Empty, _) => None,
            (StratumKind::SubCircle, StratumEmbedding::PoleCircle { north }) => {
                // product metric: distance to the pole circle is the polar angle
                Some(if *north { x[0] } else { std::f64::consts::PI - x[0] })
            }
            (StratumKind::PointSet, StratumEmbedding::Points(pts)) => pts
                .iter()
                .map(|p| group.manifold.dist(x, p))
                .fold(None, |acc: Option<f64>, d| {
                    Some(acc.map_or(d, |a| a.min(d)))
                }),
            _ => None,
        };
        if let Some(d) = d {
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    }
    Ok(best.unwrap_or(1.0))
}

// ---------------------------------------------------------------------------
// Diophantine condition
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeRecord {
    pub word_length: u64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub enum DiophantineResult {
    /// dist(g x, x) >= C |g|^{-N} dist(x, fix g) holds over the tested range.
    Fit {
        c: f64,
        n: u32,
        records: Vec<EnvelopeRecord>,
    },
    /// The lower envelope decays faster than |g|^{-N_max} somewhere.
    Violation {
        worst_exponent: f64,
        records: Vec<EnvelopeRecord>,
    },
}

/// Largest power tested before declaring a violation.
pub const DIOPHANTINE_N_MAX: f64 = 6.0;

/// Empirical check of the Diophantine lower bound over |g| <= g_range.
///
/// The worst-case ratio per element is envelope-fitted against |g|^{-N}:
/// strictly decreasing record minima are kept, and the local decay exponent
/// between consecutive records decides between a power fit and a violation.
pub fn diophantine_check(
    group: &Arc<IsometryGroup>,
    g_range: u64,
    sample_count: usize,
) -> Result<DiophantineResult> {
    assert!(g_range >= 2 && sample_count >= 16);
    let samples = sample_points(&group.manifold, sample_count);
    let mut ratios: Vec<(u64, f64)> = Vec::new();
    for g in group.ball(g_range) {
        if g.is_identity() {
            continue;
        }
        let len = group.word_length(&g);
        if len == 0 || len > g_range {
            continue;
        }
        let mut worst = f64::INFINITY;
        for x in &samples {
            let moved = group.act_point(&g, x);
            let num = group.manifold.dist(&moved, x);
            let den = dist_to_fix(group, &g, x)?;
            if den > 1e-14 {
                worst = worst.min(num / den);
            }
        }
        if worst.is_finite() {
            ratios.push((len, worst));
        }
    }
    ratios.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    // strictly decreasing envelope of record minima
    let mut records: Vec<EnvelopeRecord> = Vec::new();
    for (len, r) in ratios {
        if records.last().map_or(true, |last| r < last.ratio) {
            if records.last().map_or(true, |last| len > last.word_length) {
                records.push(EnvelopeRecord {
                    word_length: len,
                    ratio: r,
                });
            } else if let Some(last) = records.last_mut() {
                last.ratio = last.ratio.min(r);
            }
        }
    }

    let mut worst_slope: f64 = 0.0;
    for pair in records.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.word_length == 0 || b.word_length <= a.word_length {
            continue;
        }
        let slope = (b.ratio / a.ratio).ln() / (b.word_length as f64 / a.word_length as f64).ln();
        worst_slope = worst_slope.min(slope);
    }

    if worst_slope < -DIOPHANTINE_N_MAX {
        return Ok(DiophantineResult::Violation {
            worst_exponent: -worst_slope,
            records,
        });
    }
    // smallest integer N compatible with the observed local decay
    let n = ((-worst_slope) - 0.3).ceil().max(0.0) as u32;
    let c = records
        .iter()
        .map(|r| r.ratio * (r.word_length as f64).powi(n as i32))
        .fold(f64::INFINITY, f64::min);
    let c = if c.is_finite() { c } else { 1.0 };
    Ok(DiophantineResult::Fit { c, n, records })
}

fn sample_points(manifold: &ManifoldModel, count: usize) -> Vec<Vec<f64>> {
    // deterministic low-discrepancy samples
    let mut pts = Vec::with_capacity(count);
    for i in 0..count {
        let t = (i as f64 + 0.5) / count as f64;
        match manifold.kind {
            ManifoldKind::Circle => pts.push(vec![TAU * t]),
            ManifoldKind::Torus2 => {
                pts.push(vec![TAU * t, TAU * ((t * 7.13) % 1.0)]);
            }
            ManifoldKind::SphereCrossCircle => {
                pts.push(vec![
                    std::f64::consts::PI * (0.05 + 0.9 * t),
                    TAU * ((t * 3.71) % 1.0),
                    TAU * ((t * 5.29) % 1.0),
                ]);
            }
        }
    }
    pts
}

/// 2 pi times the golden rotation number (sqrt(5)-1)/2.
pub fn golden_angle() -> f64 {
    TAU * (5.0f64.sqrt() - 1.0) / 2.0
}

/// 2 pi times the Liouville-type number sum_{k<=6} 2^{-k!}.
pub fn liouville_angle() -> f64 {
    let mut s = 0.0;
    let mut fact: u64 = 1;
    for k in 1..=6u64 {
        fact *= k;
        if fact < 1024 {
            s += 2f64.powi(-(fact as i32));
        } else {
            s += 2f64.powf(-(fact as f64));
        }
    }
    TAU * s
}
