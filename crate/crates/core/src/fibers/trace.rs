//! Preimage curves `m⁻¹(target)` traced as zero sets of the transverse
//! coordinates `φ`.
//!
//! Seeds are cell-face crossings of both components of `φ`, found by
//! bilinear root finding on each face. From a seed the curve is followed
//! along the Jacobian vector `D = ∇φ¹ × ∇φ²` with a predictor step and a
//! minimum-norm Newton corrector, which moves only in the plane transverse
//! to the local tangent. Each seed is consumed by exactly one curve.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::transverse::TargetFrame;
use super::winding::winding_of;
use crate::error::{HopfError, Result};
use crate::fields::{SpinorField, SpinorSource};
use crate::geometry::{BoxGrid, S3Grid, StereoChart, Vec3, Vec4};

/// Where fibers are traced: a box in the R³ of a stereographic chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberDomain {
    pub grid: BoxGrid,
    pub chart: StereoChart,
}

impl FiberDomain {
    pub fn new(grid: BoxGrid, chart: StereoChart) -> Self {
        Self { grid, chart }
    }

    /// A sampled field's own box in the identity chart.
    pub fn for_sampled(field: &SpinorField) -> Option<Self> {
        field
            .as_sampled()
            .map(|s| Self::new(*s.grid(), StereoChart::identity()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionOptions {
    /// Closed curves are retraced until they have at least this many segments.
    pub min_segments: usize,
    /// Nominal march step as a fraction of the smallest grid spacing.
    pub step_fraction: f64,
    /// Curves with fewer raw segments are rejected as noise.
    pub min_raw_segments: usize,
    /// Closure radius in cell diagonals.
    pub closure_diagonals: f64,
    /// Regularity floor for `|∇φ¹ × ∇φ²| / (|∇φ¹||∇φ²|)`.
    pub regularity_tol: f64,
    pub max_steps: usize,
    /// Number of jittered targets tried after a non-regular one.
    pub jitter_budget: usize,
    pub jitter_angle: f64,
    pub jitter_seed: u64,
    /// Probe-circle radius for winding numbers, in grid spacings.
    pub probe_radius: f64,
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        Self {
            min_segments: 256,
            step_fraction: 0.5,
            min_raw_segments: 6,
            closure_diagonals: 1.1,
            regularity_tol: 1e-6,
            max_steps: 2_000_000,
            jitter_budget: 8,
            jitter_angle: 2e-3,
            jitter_seed: 0x5eed,
            probe_radius: 1.5,
        }
    }
}

/// One preimage curve, oriented along `∇φ¹ × ∇φ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberCurve {
    pub points: Vec<Vec3>,
    pub closed: bool,
    pub winding: i32,
    pub target: Vec3,
}

impl FiberCurve {
    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.points.len()
        } else {
            self.points.len().saturating_sub(1)
        }
    }

    pub fn length(&self) -> f64 {
        let n = self.points.len();
        let mut len: f64 = self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        if self.closed && n > 1 {
            len += (self.points[0] - self.points[n - 1]).norm();
        }
        len
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self { points, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionMetadata {
    pub domain: FiberDomain,
    pub requested_target: Vec3,
    pub jitter_attempts: usize,
    pub step: f64,
    pub seeds: usize,
    pub rejected_short: usize,
    /// Seeds consumed by each returned curve (closed first, then open).
    pub claimed_seeds: Vec<usize>,
}

/// Closed preimage curves of one target, plus open curves that hit the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotFamily {
    pub target: Vec3,
    pub curves: Vec<FiberCurve>,
    pub open_curves: Vec<FiberCurve>,
    pub metadata: ExtractionMetadata,
}

impl KnotFamily {
    pub fn is_complete(&self) -> bool {
        self.open_curves.is_empty()
    }
}

#[derive(Clone, Copy)]
struct Probe {
    phi: [f64; 2],
    grad: [Vec3; 2],
}

impl Probe {
    fn tangent(&self) -> Vec3 {
        self.grad[0].cross(&self.grad[1])
    }

    fn regularity(&self) -> f64 {
        let d = self.tangent().norm();
        d / (self.grad[0].norm() * self.grad[1].norm()).max(f64::MIN_POSITIVE)
    }

    /// Minimum-norm Newton step `−Jᵀ(JJᵀ)⁻¹φ`.
    fn newton_step(&self) -> Option<Vec3> {
        let [g1, g2] = self.grad;
        let a = g1.dot(&g1);
        let b = g1.dot(&g2);
        let c = g2.dot(&g2);
        let det = a * c - b * b;
        if det <= 1e-300 {
            return None;
        }
        let [f1, f2] = self.phi;
        let y1 = (c * f1 - b * f2) / det;
        let y2 = (a * f2 - b * f1) / det;
        Some(-(g1 * y1 + g2 * y2))
    }
}

struct Tracer<'a> {
    field: &'a dyn SpinorSource,
    domain: FiberDomain,
    frame: TargetFrame,
    opts: ExtractionOptions,
    h: f64,
}

enum MarchEnd {
    Closed,
    Boundary,
}

impl<'a> Tracer<'a> {
    fn probe(&self, x: &Vec3) -> Result<Probe> {
        let jet = self.field.jet_in_space(x, &self.domain.chart)?;
        let (m, dm) = jet.m_jet();
        let (phi, dphi) = self.frame.coordinates_jet(&m, &dm)?;
        Ok(Probe {
            phi,
            grad: [
                Vec3::new(dphi[0][0], dphi[1][0], dphi[2][0]),
                Vec3::new(dphi[0][1], dphi[1][1], dphi[2][1]),
            ],
        })
    }

    fn phi(&self, x: &Vec3) -> Result<[f64; 2]> {
        Ok(self.probe(x)?.phi)
    }

    /// Newton projection onto the zero set; `None` if it does not converge.
    fn correct(&self, x0: &Vec3) -> Result<Option<(Vec3, Probe)>> {
        let mut x = *x0;
        for _ in 0..12 {
            let p = match self.probe(&x) {
                Ok(p) => p,
                Err(HopfError::ChartSingularity) | Err(HopfError::OutsideDomain(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let Some(dx) = p.newton_step() else {
                return Ok(None);
            };
            x += dx;
            if dx.norm() < 1e-12 * self.h.max(1.0) {
                let p = self.probe(&x)?;
                return Ok(Some((x, p)));
            }
            if (x - x0).norm() > 2.0 * self.h {
                return Ok(None);
            }
        }
        Ok(None)
    }

    fn check_regular(&self, p: &Probe) -> Result<()> {
        if p.regularity() < self.opts.regularity_tol {
            return Err(HopfError::NonRegularTarget(format!(
                "rank-deficient transverse jacobian (regularity {:.2e})",
                p.regularity()
            )));
        }
        Ok(())
    }

    /// March from a corrected start point along `direction * D`.
    fn march(
        &self,
        start: Vec3,
        start_probe: Probe,
        direction: f64,
        nominal: f64,
        allow_closure: bool,
    ) -> Result<(Vec<Vec3>, MarchEnd)> {
        let grid = &self.domain.grid;
        let close_radius = self.opts.closure_diagonals * grid.cell_diagonal();
        let min_step = nominal / 256.0;
        let mut pts = vec![start];
        let mut x = start;
        let mut probe = start_probe;
        let mut step = nominal;
        let mut left_start = false;
        for _ in 0..self.opts.max_steps {
            self.check_regular(&probe)?;
            let t = probe.tangent().normalize() * direction;
            if allow_closure && pts.len() > 6 {
                let to_start = start - x;
                let dist = to_start.norm();
                if dist > close_radius {
                    left_start = true;
                } else if left_start && to_start.dot(&t) <= step {
                    return Ok((pts, MarchEnd::Closed));
                }
            }
            let predicted = x + t * step;
            if !grid.contains(&predicted) {
                // land exactly on the boundary, then stop
                let mut s = step;
                for a in 0..3 {
                    if t[a] > 0.0 {
                        s = s.min((grid.bounds[a][1] - x[a]) / t[a]);
                    } else if t[a] < 0.0 {
                        s = s.min((grid.bounds[a][0] - x[a]) / t[a]);
                    }
                }
                if s > 1e-3 * nominal {
                    pts.push(x + t * s);
                }
                return Ok((pts, MarchEnd::Boundary));
            }
            let accepted = match self.correct(&predicted)? {
                Some((xn, pn)) => {
                    let tn = pn.tangent().normalize() * direction;
                    let bent = tn.dot(&t) < 0.94;
                    let drift = (xn - predicted).norm() > 0.5 * step;
                    if bent || drift || !grid.contains(&xn) {
                        None
                    } else {
                        Some((xn, pn))
                    }
                }
                None => None,
            };
            match accepted {
                Some((xn, pn)) => {
                    x = xn;
                    probe = pn;
                    pts.push(x);
                    step = (step * 1.5).min(nominal);
                }
                None => {
                    step *= 0.5;
                    if step < min_step {
                        return Err(HopfError::NonRegularTarget(format!(
                            "march stalled near ({:.4}, {:.4}, {:.4})",
                            x[0], x[1], x[2]
                        )));
                    }
                }
            }
        }
        Err(HopfError::NonRegularTarget("march exceeded the step budget".into()))
    }

    /// Full curve through a corrected seed: closed loop, or open arc
    /// between two boundary hits.
    fn trace(&self, seed: Vec3, probe: Probe, nominal: f64) -> Result<(Vec<Vec3>, bool)> {
        let (fwd, end) = self.march(seed, probe, 1.0, nominal, true)?;
        match end {
            MarchEnd::Closed => Ok((fwd, true)),
            MarchEnd::Boundary => {
                let (mut back, _) = self.march(seed, probe, -1.0, nominal, false)?;
                back.reverse();
                back.pop();
                back.extend(fwd);
                Ok((back, false))
            }
        }
    }

    fn winding(&self, point: &Vec3, tangent: &Vec3) -> Result<i32> {
        winding_of(
            |y| self.phi(y),
            point,
            tangent,
            self.opts.probe_radius * self.domain.grid.min_spacing(),
            64,
        )
    }
}

/// Roots in `[0,1]²` of two bilinear forms `c0 + c1 s + c2 t + c3 s t`.
pub(crate) fn bilinear_roots(p: [f64; 4], q: [f64; 4]) -> Vec<(f64, f64)> {
    let a = q[2] * p[3] - q[3] * p[2];
    let b = q[0] * p[3] + q[2] * p[1] - q[1] * p[2] - q[3] * p[0];
    let c = q[0] * p[1] - q[1] * p[0];
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    let mut ts = Vec::new();
    if a.abs() < 1e-12 * scale {
        if b.abs() > 1e-14 * scale {
            ts.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let r = -0.5 * (b + b.signum() * sq);
            ts.push(r / a);
            if r != 0.0 {
                ts.push(c / r);
            }
        }
    }
    let eps = 1e-10;
    let mut out = Vec::new();
    for t in ts {
        if !(-eps..=1.0 + eps).contains(&t) {
            continue;
        }
        let dp = p[1] + p[3] * t;
        let dq = q[1] + q[3] * t;
        let s = if dp.abs() >= dq.abs() {
            if dp == 0.0 {
                continue;
            }
            -(p[0] + p[2] * t) / dp
        } else {
            -(q[0] + q[2] * t) / dq
        };
        if (-eps..=1.0 + eps).contains(&s) {
            out.push((s.clamp(0.0, 1.0), t.clamp(0.0, 1.0)));
        }
    }
    out
}

fn bilinear_coeffs(f00: f64, f10: f64, f01: f64, f11: f64) -> [f64; 4] {
    [f00, f10 - f00, f01 - f00, f11 - f10 - f01 + f00]
}

fn changes_sign(v: [f64; 4]) -> bool {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    lo <= 0.0 && hi >= 0.0
}

/// Face crossings of the zero set of `φ` over the whole grid, in a fixed order.
fn face_crossings(grid: &BoxGrid, phi: &[Option<[f64; 2]>]) -> Vec<Vec3> {
    let h = grid.spacing();
    let dims = grid.dims;
    let mut faces = Vec::new();
    for axis in 0..3 {
        let b = (axis + 1) % 3;
        let c = (axis + 2) % 3;
        let count = dims[axis] * (dims[b] - 1) * (dims[c] - 1);
        faces.push((axis, b, c, count));
    }
    faces
        .into_iter()
        .flat_map(|(axis, b, c, count)| {
            (0..count)
                .into_par_iter()
                .flat_map_iter(move |f| {
                    let ia = f % dims[axis];
                    let ib = (f / dims[axis]) % (dims[b] - 1);
                    let ic = f / (dims[axis] * (dims[b] - 1));
                    let mut base = [0usize; 3];
                    base[axis] = ia;
                    base[b] = ib;
                    base[c] = ic;
                    let corner = |db: usize, dc: usize| {
                        let mut ijk = base;
                        ijk[b] += db;
                        ijk[c] += dc;
                        phi[grid.index(ijk)]
                    };
                    let vals = [corner(0, 0), corner(1, 0), corner(0, 1), corner(1, 1)];
                    let mut out = Vec::new();
                    if vals.iter().all(|v| v.is_some()) {
                        let v = vals.map(|x| x.unwrap());
                        let p = [v[0][0], v[1][0], v[2][0], v[3][0]];
                        let q = [v[0][1], v[1][1], v[2][1], v[3][1]];
                        if changes_sign(p) && changes_sign(q) {
                            let origin = grid.node(base);
                            for (s, t) in bilinear_roots(
                                bilinear_coeffs(p[0], p[1], p[2], p[3]),
                                bilinear_coeffs(q[0], q[1], q[2], q[3]),
                            ) {
                                let mut x = origin;
                                x[b] += s * h[b];
                                x[c] += t * h[c];
                                out.push(x);
                            }
                        }
                    }
                    out.into_iter()
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Spatial hash of traced points for seed consumption.
struct Claims {
    cell: f64,
    map: HashMap<[i64; 3], Vec<Vec3>>,
}

impl Claims {
    fn new(cell: f64) -> Self {
        Self {
            cell,
            map: HashMap::new(),
        }
    }

    fn key(&self, x: &Vec3) -> [i64; 3] {
        [
            (x[0] / self.cell).floor() as i64,
            (x[1] / self.cell).floor() as i64,
            (x[2] / self.cell).floor() as i64,
        ]
    }

    fn insert_polyline(&mut self, pts: &[Vec3], closed: bool) {
        let n = pts.len();
        let segs = if closed { n } else { n.saturating_sub(1) };
        for i in 0..segs {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            let sub = (((b - a).norm() / (0.25 * self.cell)).ceil() as usize).max(1);
            for k in 0..sub {
                let x = a + (b - a) * (k as f64 / sub as f64);
                let key = self.key(&x);
                self.map.entry(key).or_default().push(x);
            }
        }
        if n == 1 {
            let key = self.key(&pts[0]);
            self.map.entry(key).or_default().push(pts[0]);
        }
    }

    fn is_claimed(&self, x: &Vec3, radius: f64) -> bool {
        let k = self.key(x);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(v) = self.map.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        if v.iter().any(|p| (p - x).norm() < radius) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

/// Closed curves, open curves, seed count, rejected count, seeds claimed
/// by closed curves, nominal step.
type Extraction = (Vec<FiberCurve>, Vec<FiberCurve>, usize, usize, Vec<usize>, f64);

fn extract_once(
    field: &dyn SpinorSource,
    domain: &FiberDomain,
    target: &Vec3,
    opts: &ExtractionOptions,
) -> Result<Extraction> {
    let grid = domain.grid;
    let h = grid.min_spacing();
    let tracer = Tracer {
        field,
        domain: *domain,
        frame: TargetFrame::new(target)?,
        opts: *opts,
        h,
    };
    let phi: Vec<Option<[f64; 2]>> = (0..grid.node_count())
        .into_par_iter()
        .map(|idx| match tracer.phi(&grid.node(grid.ijk(idx))) {
            Ok(v) => Ok(Some(v)),
            Err(HopfError::ChartSingularity) | Err(HopfError::OutsideDomain(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let seeds = face_crossings(&grid, &phi);
    let nominal = opts.step_fraction * h;
    let claim_radius = 0.75 * grid.spacing().max();
    let mut claims = Claims::new(grid.spacing().max());
    let mut closed = Vec::new();
    let mut open = Vec::new();
    let mut claimed_closed = Vec::new();
    let mut claimed_open = Vec::new();
    let mut rejected = 0;
    let mut claimed_by: Vec<Option<usize>> = vec![None; seeds.len()];
    let mut curve_id = 0usize;
    for (si, seed) in seeds.iter().enumerate() {
        if claimed_by[si].is_some() {
            continue;
        }
        let Some((x0, p0)) = tracer.correct(seed)? else {
            continue;
        };
        if claims.is_claimed(&x0, claim_radius) || claims.is_claimed(seed, claim_radius) {
            claimed_by[si] = Some(usize::MAX);
            continue;
        }
        tracer.check_regular(&p0)?;
        let (mut pts, is_closed) = tracer.trace(x0, p0, nominal)?;
        claims.insert_polyline(&pts, is_closed);
        let raw_segments = if is_closed { pts.len() } else { pts.len() - 1 };
        // consume every remaining seed this curve passes through
        let mut consumed = 1;
        claimed_by[si] = Some(curve_id);
        for (sj, other) in seeds.iter().enumerate().skip(si + 1) {
            if claimed_by[sj].is_none() && claims.is_claimed(other, claim_radius) {
                claimed_by[sj] = Some(curve_id);
                consumed += 1;
            }
        }
        curve_id += 1;
        if raw_segments < opts.min_raw_segments {
            log::warn!("rejected a {raw_segments}-segment curve as noise");
            rejected += 1;
            continue;
        }
        if is_closed && pts.len() < opts.min_segments {
            // retrace finer so the polyline carries enough segments
            let length = FiberCurve {
                points: pts.clone(),
                closed: true,
                winding: 0,
                target: *target,
            }
            .length();
            let mut step = length / (opts.min_segments as f64 * 1.1);
            for _ in 0..4 {
                let (fine, still_closed) = tracer.trace(x0, p0, step)?;
                if !still_closed {
                    return Err(HopfError::NonRegularTarget(
                        "curve closed on a coarse trace but not on a fine one".into(),
                    ));
                }
                pts = fine;
                if pts.len() >= opts.min_segments {
                    break;
                }
                step *= 0.8;
            }
        }
        let tangent = tracer.probe(&pts[0])?.tangent();
        let winding = tracer.winding(&pts[0], &tangent)?;
        let curve = FiberCurve {
            points: pts,
            closed: is_closed,
            winding,
            target: *target,
        };
        if is_closed {
            closed.push(curve);
            claimed_closed.push(consumed);
        } else {
            open.push(curve);
            claimed_open.push(consumed);
        }
    }
    claimed_closed.extend(claimed_open);
    Ok((closed, open, seeds.len(), rejected, claimed_closed, nominal))
}

/// Extract the preimage family of `target`, jittering the target
/// deterministically when it turns out to be non-regular.
pub fn extract_fibers(
    field: &dyn SpinorSource,
    domain: &FiberDomain,
    target: &Vec3,
    opts: &ExtractionOptions,
) -> Result<KnotFamily> {
    let requested = target.normalize();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.jitter_seed);
    let mut current = requested;
    let mut last_err = None;
    for attempt in 0..=opts.jitter_budget {
        match extract_once(field, domain, &current, opts) {
            Ok((curves, open_curves, seeds, rejected, claimed, step)) => {
                if !open_curves.is_empty() {
                    log::info!(
                        "{} open curve(s) hit the domain boundary; excluded from linking sums",
                        open_curves.len()
                    );
                }
                return Ok(KnotFamily {
                    target: current,
                    curves,
                    open_curves,
                    metadata: ExtractionMetadata {
                        domain: *domain,
                        requested_target: requested,
                        jitter_attempts: attempt,
                        step,
                        seeds,
                        rejected_short: rejected,
                        claimed_seeds: claimed,
                    },
                });
            }
            Err(e @ HopfError::NonRegularTarget(_)) | Err(e @ HopfError::AmbiguousWinding) => {
                log::info!("target attempt {attempt} not regular: {e}");
                last_err = Some(e);
                let axis = Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                let perp = (axis - requested * axis.dot(&requested)).normalize();
                let angle = opts.jitter_angle * (attempt + 1) as f64;
                current = (requested * angle.cos() + perp * angle.sin()).normalize();
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| HopfError::NonRegularTarget("jitter budget exhausted".into())))
}

/// Chart pole whose image under `m` is as far as possible from every
/// target, so preimage curves stay compact in R³.
pub fn choose_chart(field: &dyn SpinorSource, targets: &[Vec3]) -> Result<StereoChart> {
    let grid = S3Grid::cubic(12)?;
    let mut best = (f64::NEG_INFINITY, Vec4::new(0.0, 0.0, 0.0, 1.0));
    for p in &grid.nodes {
        let m = field.jet_on_sphere(p, &[Vec4::zeros(); 3])?.z.hopf_projection();
        let score = targets
            .iter()
            .map(|t| m.dot(&t.normalize()).clamp(-1.0, 1.0).acos())
            .fold(f64::INFINITY, f64::min);
        if score > best.0 {
            best = (score, *p);
        }
    }
    Ok(StereoChart::with_pole(&best.1))
}

/// Automatic domain for fields defined on all of S³: choose the chart,
/// then grow the box until no curve of any target touches its boundary.
pub fn auto_domain(
    field: &dyn SpinorSource,
    targets: &[Vec3],
    cells: usize,
    opts: &ExtractionOptions,
) -> Result<(FiberDomain, Vec<KnotFamily>)> {
    let chart = choose_chart(field, targets)?;
    let mut last = None;
    for (half_width, scale) in [(3.0, 1.0), (6.0, 1.5), (12.0, 2.0)] {
        let n = ((cells as f64 * scale) as usize).max(8) + 1;
        let domain = FiberDomain::new(BoxGrid::cube(half_width, n)?, chart);
        let families = targets
            .iter()
            .map(|t| extract_fibers(field, &domain, t, opts))
            .collect::<Result<Vec<_>>>()?;
        if families.iter().all(|f| f.is_complete()) {
            return Ok((domain, families));
        }
        last = Some((domain, families));
    }
    Ok(last.expect("at least one domain attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_roots_on_simple_faces() {
        // p = s - 0.25, q = t - 0.75
        let r = bilinear_roots([-0.25, 1.0, 0.0, 0.0], [-0.75, 0.0, 1.0, 0.0]);
        assert_eq!(r.len(), 1);
        assert!((r[0].0 - 0.25).abs() < 1e-12 && (r[0].1 - 0.75).abs() < 1e-12);
        // p = s t - 0.1 , q = s - t  -> s = t = sqrt(0.1)
        let r = bilinear_roots([-0.1, 0.0, 0.0, 1.0], [0.0, 1.0, -1.0, 0.0]);
        let s = 0.1f64.sqrt();
        assert!(r.iter().any(|(a, b)| (a - s).abs() < 1e-12 && (b - s).abs() < 1e-12));
        // no root inside
        assert!(bilinear_roots([1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]).is_empty());
    }
}
