//! Linking, writhe, twist and self-linking of closed polylines, the
//! linking-sum form of H, and its Biot–Savart loop-integral form.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HopfError, Result};
use crate::fibers::{
    extract_fibers, transverse_plane, ExtractionOptions, FiberCurve, FiberDomain, KnotFamily, TargetFrame,
};
use crate::fields::SpinorSource;
use crate::geometry::Vec3;
use crate::invariant::{HopfEstimate, Method};
use crate::parallel::ordered_sum;

pub mod fixtures;

/// Curves closer than this fraction of their joint diameter count as touching.
pub const DISJOINT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkingRule {
    /// Exact solid angle of each straight segment pair.
    #[default]
    SolidAngle,
    /// Midpoint rule, one level of subdivision for near pairs.
    Midpoint,
}

fn segment(points: &[Vec3], i: usize) -> (Vec3, Vec3) {
    (points[i], points[(i + 1) % points.len()])
}

fn check_closed(c: &FiberCurve, index: usize) -> Result<()> {
    if !c.closed {
        return Err(HopfError::OpenCurve(index));
    }
    if c.points.len() < 3 {
        return Err(HopfError::InvalidParameter(format!(
            "curve {index} has fewer than three points"
        )));
    }
    Ok(())
}

fn diameter(points: impl Iterator<Item = Vec3>) -> f64 {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(&p);
        hi = hi.sup(&p);
    }
    (hi - lo).norm()
}

/// Distance between segments `[p1, p2]` and `[p3, p4]`.
pub fn segment_distance(p1: &Vec3, p2: &Vec3, p3: &Vec3, p4: &Vec3) -> f64 {
    let d1 = p2 - p1;
    let d2 = p4 - p3;
    let r = p1 - p3;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return r.norm();
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 1e-300 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    (p1 + d1 * s - (p3 + d2 * t)).norm()
}

/// Solid angle subtended by segment pair `(p1→p2, p3→p4)`; sums to
/// `4π Lk` over two closed polygons.
pub fn segment_pair_solid_angle(p1: &Vec3, p2: &Vec3, p3: &Vec3, p4: &Vec3) -> f64 {
    let r13 = p3 - p1;
    let r14 = p4 - p1;
    let r23 = p3 - p2;
    let r24 = p4 - p2;
    let n = [r13.cross(&r14), r14.cross(&r24), r24.cross(&r23), r23.cross(&r13)];
    let mut unit = [Vec3::zeros(); 4];
    for k in 0..4 {
        let len = n[k].norm();
        if len < 1e-300 {
            return 0.0;
        }
        unit[k] = n[k] / len;
    }
    let mut omega = 0.0;
    for k in 0..4 {
        omega += unit[k].dot(&unit[(k + 1) % 4]).clamp(-1.0, 1.0).asin();
    }
    let orient = (p4 - p3).cross(&(p2 - p1)).dot(&r13);
    if orient > 0.0 {
        omega
    } else if orient < 0.0 {
        -omega
    } else {
        0.0
    }
}

/// Gauss integrand `(x − y)·(dx × dy)/|x − y|³` for one segment pair by the midpoint rule.
fn midpoint_pair(a0: &Vec3, a1: &Vec3, b0: &Vec3, b1: &Vec3) -> f64 {
    let dx = a1 - a0;
    let dy = b1 - b0;
    let r = (a0 + a1) * 0.5 - (b0 + b1) * 0.5;
    let d = r.norm();
    r.dot(&dx.cross(&dy)) / (d * d * d)
}

fn midpoint_refined(a0: &Vec3, a1: &Vec3, b0: &Vec3, b1: &Vec3) -> f64 {
    let la = (a1 - a0).norm();
    let lb = (b1 - b0).norm();
    let mid = ((a0 + a1) - (b0 + b1)).norm() * 0.5;
    if mid >= 3.0 * la.max(lb) {
        return midpoint_pair(a0, a1, b0, b1);
    }
    const K: usize = 4;
    let mut s = 0.0;
    for i in 0..K {
        let x0 = a0 + (a1 - a0) * (i as f64 / K as f64);
        let x1 = a0 + (a1 - a0) * ((i + 1) as f64 / K as f64);
        for j in 0..K {
            let y0 = b0 + (b1 - b0) * (j as f64 / K as f64);
            let y1 = b0 + (b1 - b0) * ((j + 1) as f64 / K as f64);
            s += midpoint_pair(&x0, &x1, &y0, &y1);
        }
    }
    s
}

/// Gauss linking number `(1/4π)∮∮ (x − y)·(dx × dy)/|x − y|³` of two
/// closed polylines.
pub fn gauss_linking(a: &FiberCurve, b: &FiberCurve, rule: LinkingRule) -> Result<f64> {
    check_closed(a, 0)?;
    check_closed(b, 1)?;
    let tol = DISJOINT_TOL * diameter(a.points.iter().chain(b.points.iter()).copied());
    let (pa, pb) = (&a.points, &b.points);
    let closest = std::sync::Mutex::new(f64::INFINITY);
    let total = ordered_sum(pa.len(), |i| {
        let (a0, a1) = segment(pa, i);
        let la = (a1 - a0).norm();
        let mut s = 0.0;
        for j in 0..pb.len() {
            let (b0, b1) = segment(pb, j);
            let lb = (b1 - b0).norm();
            let mid = ((a0 + a1) - (b0 + b1)).norm() * 0.5;
            if mid < 0.5 * (la + lb) + tol {
                let d = segment_distance(&a0, &a1, &b0, &b1);
                if d <= tol {
                    let mut c = closest.lock().unwrap();
                    *c = c.min(d);
                }
            }
            s += match rule {
                LinkingRule::SolidAngle => segment_pair_solid_angle(&a0, &a1, &b0, &b1),
                LinkingRule::Midpoint => midpoint_refined(&a0, &a1, &b0, &b1),
            };
        }
        Ok(s)
    })?;
    let d = *closest.lock().unwrap();
    if d <= tol {
        return Err(HopfError::CurvesNotDisjoint(d));
    }
    Ok(total / (4.0 * PI))
}

/// Signed crossings between the projections of two segment sets along `d`,
/// or `None` when the projection is not generic.
fn signed_crossings(a: &[Vec3], a_closed: bool, b: &[Vec3], same: bool, d: &Vec3) -> Option<i64> {
    let (e1, e2) = transverse_plane(d);
    let d = d.normalize();
    let proj = |p: &Vec3| (p.dot(&e1), p.dot(&e2));
    let na = if a_closed { a.len() } else { a.len() - 1 };
    let nb = b.len();
    let mut total = 0i64;
    for i in 0..na {
        let (a0, a1) = segment(a, i);
        let (x0, x1) = (proj(&a0), proj(&a1));
        for j in 0..nb {
            if same {
                let diff = (i as i64 - j as i64).rem_euclid(na as i64);
                if j <= i || diff <= 1 || diff >= na as i64 - 1 {
                    continue;
                }
            }
            let (b0, b1) = segment(b, j);
            let (y0, y1) = (proj(&b0), proj(&b1));
            let rx = (x1.0 - x0.0, x1.1 - x0.1);
            let ry = (y1.0 - y0.0, y1.1 - y0.1);
            let den = rx.0 * ry.1 - rx.1 * ry.0;
            let q = (y0.0 - x0.0, y0.1 - x0.1);
            let scale = (rx.0.hypot(rx.1) * ry.0.hypot(ry.1)).max(f64::MIN_POSITIVE);
            if den.abs() < 1e-12 * scale {
                // parallel: only a problem when collinear and overlapping
                let off = q.0 * rx.1 - q.1 * rx.0;
                if off.abs() < 1e-12 * scale {
                    return None;
                }
                continue;
            }
            let s = (q.0 * ry.1 - q.1 * ry.0) / den;
            let t = (q.0 * rx.1 - q.1 * rx.0) / den;
            let eps = 1e-9;
            if s < -eps || s > 1.0 + eps || t < -eps || t > 1.0 + eps {
                continue;
            }
            if s.abs() < eps || (s - 1.0).abs() < eps || t.abs() < eps || (t - 1.0).abs() < eps {
                return None;
            }
            let pa = a0 + (a1 - a0) * s;
            let pb = b0 + (b1 - b0) * t;
            let ha = pa.dot(&d);
            let hb = pb.dot(&d);
            if (ha - hb).abs() < 1e-12 * (1.0 + ha.abs().max(hb.abs())) {
                return None;
            }
            let (over, under) = if ha > hb {
                (a1 - a0, b1 - b0)
            } else {
                (b1 - b0, a1 - a0)
            };
            total += if over.cross(&under).dot(&d) > 0.0 { 1 } else { -1 };
        }
    }
    Some(total)
}

fn jittered_direction(d: &Vec3, rng: &mut ChaCha8Rng, attempt: usize) -> Vec3 {
    let kick = Vec3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    (d.normalize() + kick * (1e-3 * (attempt + 1) as f64)).normalize()
}

/// Linking number as half the signed crossing count of a projection along
/// `direction`, retried with jittered directions if the projection is degenerate.
pub fn crossing_linking(a: &FiberCurve, b: &FiberCurve, direction: &Vec3) -> Result<i64> {
    check_closed(a, 0)?;
    check_closed(b, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x11c);
    let mut d = direction.normalize();
    const RETRIES: usize = 8;
    for attempt in 0..RETRIES {
        if let Some(n) = signed_crossings(&a.points, true, &b.points, false, &d) {
            if n % 2 == 0 {
                return Ok(n / 2);
            }
        }
        d = jittered_direction(direction, &mut rng, attempt);
    }
    Err(HopfError::DegenerateProjection(RETRIES))
}

/// Signed self-crossing count of one closed curve projected along `direction`.
pub fn directional_writhe(c: &FiberCurve, direction: &Vec3) -> Result<i64> {
    check_closed(c, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x3e1f);
    let mut d = direction.normalize();
    const RETRIES: usize = 8;
    for attempt in 0..RETRIES {
        if let Some(n) = signed_crossings(&c.points, true, &c.points, true, &d) {
            return Ok(n);
        }
        d = jittered_direction(direction, &mut rng, attempt);
    }
    Err(HopfError::DegenerateProjection(RETRIES))
}

/// Writhe: the Gauss double integral of a curve with itself, with
/// identical and adjacent segment pairs skipped.
pub fn writhe(c: &FiberCurve) -> Result<f64> {
    check_closed(c, 0)?;
    let p = &c.points;
    let n = p.len();
    let tol = DISJOINT_TOL * diameter(p.iter().copied());
    let closest = std::sync::Mutex::new(f64::INFINITY);
    let total = ordered_sum(n, |i| {
        let (a0, a1) = segment(p, i);
        let la = (a1 - a0).norm();
        let mut s = 0.0;
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (b0, b1) = segment(p, j);
            let lb = (b1 - b0).norm();
            let mid = ((a0 + a1) - (b0 + b1)).norm() * 0.5;
            if mid < 0.5 * (la + lb) + tol {
                let d = segment_distance(&a0, &a1, &b0, &b1);
                if d <= tol {
                    let mut c = closest.lock().unwrap();
                    *c = c.min(d);
                }
            }
            s += segment_pair_solid_angle(&a0, &a1, &b0, &b1);
        }
        Ok(s)
    })?;
    let d = *closest.lock().unwrap();
    if d <= tol {
        return Err(HopfError::SelfIntersection(d));
    }
    Ok(2.0 * total / (4.0 * PI))
}

/// A closed curve with a unit normal at every point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramedCurve {
    pub base: FiberCurve,
    pub framing: Vec<Vec3>,
}

/// Unit tangent at each vertex: normalized sum of the two adjacent edge directions.
pub fn vertex_tangents(points: &[Vec3]) -> Vec<Vec3> {
    let n = points.len();
    (0..n)
        .map(|i| {
            let prev = (points[i] - points[(i + n - 1) % n]).normalize();
            let next = (points[(i + 1) % n] - points[i]).normalize();
            let t = prev + next;
            if t.norm() > 1e-12 {
                t.normalize()
            } else {
                next
            }
        })
        .collect()
}

impl FramedCurve {
    /// Projects each framing vector off the tangent and normalizes; rejects
    /// tangent-parallel vectors and adjacent flips.
    pub fn new(base: FiberCurve, framing: Vec<Vec3>) -> Result<Self> {
        check_closed(&base, 0)?;
        if framing.len() != base.points.len() {
            return Err(HopfError::InvalidParameter(format!(
                "framing has {} vectors for {} points",
                framing.len(),
                base.points.len()
            )));
        }
        let tangents = vertex_tangents(&base.points);
        let mut out = Vec::with_capacity(framing.len());
        for (i, (v, t)) in framing.iter().zip(&tangents).enumerate() {
            let w = v - t * v.dot(t);
            if w.norm() < 1e-9 * v.norm().max(1e-300) || w.norm() == 0.0 {
                return Err(HopfError::InvalidParameter(format!(
                    "framing vector {i} is tangent to the curve"
                )));
            }
            out.push(w.normalize());
        }
        let n = out.len();
        for i in 0..n {
            if out[i].dot(&out[(i + 1) % n]) <= 0.0 {
                return Err(HopfError::InvalidParameter(format!(
                    "framing flips between points {i} and {}",
                    (i + 1) % n
                )));
            }
        }
        Ok(Self { base, framing: out })
    }

    /// Largest `|V·T|` over the points.
    pub fn orthogonality_defect(&self) -> f64 {
        vertex_tangents(&self.base.points)
            .iter()
            .zip(&self.framing)
            .map(|(t, v)| t.dot(v).abs())
            .fold(0.0, f64::max)
    }

    /// Base curve displaced by `delta` along the framing.
    pub fn offset(&self, delta: f64) -> FiberCurve {
        FiberCurve {
            points: self
                .base
                .points
                .iter()
                .zip(&self.framing)
                .map(|(p, v)| p + v * delta)
                .collect(),
            ..self.base.clone()
        }
    }
}

/// Smallest geometric feature: the tighter of the minimum radius of
/// curvature and the closest approach of parts of the curve that are far
/// apart along it.
pub fn min_feature(c: &FiberCurve) -> f64 {
    let p = &c.points;
    let n = p.len();
    let mut kappa_max: f64 = 0.0;
    for i in 0..n {
        let a = p[(i + n - 1) % n];
        let b = p[i];
        let d = p[(i + 1) % n];
        let e1 = b - a;
        let e2 = d - b;
        let turn = e1.cross(&e2).norm().atan2(e1.dot(&e2));
        let chord = (d - a).norm();
        if chord > 0.0 {
            kappa_max = kappa_max.max(4.0 * (turn * 0.5).sin() / chord);
        }
    }
    let mut arc = vec![0.0; n + 1];
    for i in 0..n {
        arc[i + 1] = arc[i] + (p[(i + 1) % n] - p[i]).norm();
    }
    let total = arc[n];
    let mut near = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let along = (arc[j] - arc[i]).min(total - (arc[j] - arc[i]));
            let d = (p[i] - p[j]).norm();
            if d < 0.5 * along {
                near = near.min(d);
            }
        }
    }
    let radius = if kappa_max > 0.0 {
        1.0 / kappa_max
    } else {
        f64::INFINITY
    };
    radius.min(near).min(total / (2.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfLinking {
    pub sl: i64,
    pub value: f64,
    pub delta: f64,
}

/// `SL = Lk(γ, γ + δV)` with `δ` a tenth of the smallest feature, halved
/// up to three times if the offset curve touches the base.
pub fn self_linking(framed: &FramedCurve) -> Result<SelfLinking> {
    let mut delta = 0.1 * min_feature(&framed.base);
    for _ in 0..4 {
        match gauss_linking(&framed.base, &framed.offset(delta), LinkingRule::SolidAngle) {
            Ok(v) => {
                return Ok(SelfLinking {
                    sl: v.round() as i64,
                    value: v,
                    delta,
                })
            }
            Err(HopfError::CurvesNotDisjoint(_)) => delta *= 0.5,
            Err(e) => return Err(e),
        }
    }
    Err(HopfError::PushOff(
        "offset curve intersects the base at every tried distance".into(),
    ))
}

/// Rotation taking unit vector `a` to unit vector `b` with the least angle, applied to `v`.
fn transport(a: &Vec3, b: &Vec3, v: &Vec3) -> Vec3 {
    let axis = a.cross(b);
    let s = axis.norm();
    let c = a.dot(b);
    if s < 1e-15 {
        return *v;
    }
    let k = axis / s;
    // Rodrigues
    v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c))
}

/// Twist `(1/2π)∮ (T × V)·V′ ds`: total rotation of the framing against
/// parallel transport, in turns.
pub fn twist(framed: &FramedCurve) -> f64 {
    let t = vertex_tangents(&framed.base.points);
    let v = &framed.framing;
    let n = v.len();
    let mut total = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        let moved = transport(&t[i], &t[j], &v[i]);
        let moved = (moved - t[j] * moved.dot(&t[j])).normalize();
        let w = (v[j] - t[j] * v[j].dot(&t[j])).normalize();
        total += moved.cross(&w).dot(&t[j]).atan2(moved.dot(&w));
    }
    total / (2.0 * PI)
}

/// Framing of each base curve toward the fiber of a target tilted by `eps`.
pub fn pushoff_framing(
    field: &dyn SpinorSource,
    domain: &FiberDomain,
    family: &KnotFamily,
    eps: f64,
    opts: &ExtractionOptions,
) -> Result<Vec<FramedCurve>> {
    if family.curves.is_empty() {
        return Ok(Vec::new());
    }
    let tilted = TargetFrame::new(&family.target)?.tilted(eps);
    let pushed = extract_fibers(field, domain, &tilted, opts)?;
    if pushed.curves.is_empty() {
        return Err(HopfError::PushOff("no closed fiber found at the tilted target".into()));
    }
    family
        .curves
        .iter()
        .map(|c| {
            let nearest_point = |q: &FiberCurve, p: &Vec3| {
                q.points
                    .iter()
                    .min_by(|a, b| (*a - p).norm().total_cmp(&(*b - p).norm()))
                    .copied()
                    .expect("non-empty curve")
            };
            let companion = pushed
                .curves
                .iter()
                .min_by(|a, b| {
                    let da: f64 = c.points.iter().map(|p| (nearest_point(a, p) - p).norm()).sum();
                    let db: f64 = c.points.iter().map(|p| (nearest_point(b, p) - p).norm()).sum();
                    da.total_cmp(&db)
                })
                .expect("non-empty pushed family");
            let framing = c.points.iter().map(|p| nearest_point(companion, p) - p).collect();
            FramedCurve::new(c.clone(), framing).map_err(|e| HopfError::PushOff(e.to_string()))
        })
        .collect()
}

/// Per-curve self-linking data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfTerms {
    pub sl: i64,
    pub sl_value: f64,
    pub twist: f64,
    pub writhe: f64,
    pub white_residual: f64,
    pub offset: f64,
}

pub const LINK_REPORT_VERSION: u32 = 1;

/// Pairwise linking matrix, self-linking terms and the linking-sum H.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub version: u32,
    pub windings: Vec<i32>,
    /// Off-diagonal: Gauss linking; diagonal: SL (NaN-free; `null` when unframed).
    pub linking: Vec<Vec<Option<f64>>>,
    pub self_terms: Vec<Option<SelfTerms>>,
    /// `Σ W_m² SL_m + Σ_{m≠n} W_m W_n Lk_mn`, when every curve is framed.
    pub h_link_sum: Option<f64>,
    pub h_rounded: Option<i64>,
}

/// Linking data for closed curves; framings are optional per curve.
pub fn link_report(curves: &[FiberCurve], framings: &[Option<Vec<Vec3>>], rule: LinkingRule) -> Result<LinkReport> {
    for (i, c) in curves.iter().enumerate() {
        check_closed(c, i)?;
    }
    let n = curves.len();
    let mut linking = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let lk = gauss_linking(&curves[i], &curves[j], rule)?;
            linking[i][j] = Some(lk);
            linking[j][i] = Some(lk);
        }
    }
    let mut self_terms = Vec::with_capacity(n);
    for (i, c) in curves.iter().enumerate() {
        let terms = match framings.get(i).cloned().flatten() {
            Some(f) => {
                let framed = FramedCurve::new(c.clone(), f)?;
                let sl = self_linking(&framed)?;
                let tw = twist(&framed);
                let wr = writhe(c)?;
                Some(SelfTerms {
                    sl: sl.sl,
                    sl_value: sl.value,
                    twist: tw,
                    writhe: wr,
                    white_residual: (sl.value - tw - wr).abs(),
                    offset: sl.delta,
                })
            }
            None => None,
        };
        linking[i][i] = terms.as_ref().map(|t| t.sl_value);
        self_terms.push(terms);
    }
    let windings: Vec<i32> = curves.iter().map(|c| c.winding).collect();
    let h = if self_terms.iter().all(|t| t.is_some()) {
        let mut h = 0.0;
        for m in 0..n {
            for k in 0..n {
                h += windings[m] as f64 * windings[k] as f64 * linking[m][k].expect("all entries present");
            }
        }
        Some(h)
    } else {
        None
    };
    Ok(LinkReport {
        version: LINK_REPORT_VERSION,
        windings,
        linking,
        self_terms,
        h_link_sum: h,
        h_rounded: h.map(|v| v.round() as i64),
    })
}

/// Linking-sum H of a fully framed family.
pub fn hopf_from_links(framed: &[FramedCurve], rule: LinkingRule) -> Result<LinkReport> {
    let curves: Vec<FiberCurve> = framed.iter().map(|f| f.base.clone()).collect();
    let framings: Vec<Option<Vec<Vec3>>> = framed.iter().map(|f| Some(f.framing.clone())).collect();
    link_report(&curves, &framings, rule)
}

/// Exact `∫ dy × (x − y)/|x − y|³` over the straight segment `a → b`.
pub fn segment_kernel(x: &Vec3, a: &Vec3, b: &Vec3) -> Vec3 {
    let r1 = x - a;
    let r2 = x - b;
    let n1 = r1.norm();
    let n2 = r2.norm();
    let den = n1 * n2 * (n1 * n2 + r1.dot(&r2));
    if den <= 0.0 {
        return Vec3::zeros();
    }
    (b - a).cross(&r1) * ((n1 + n2) / den)
}

/// Coulomb-gauge potential of the string current,
/// `A(x) = Σ_k W_k ∮ dy × (x − y)/|x − y|³`.
pub fn biot_savart_a(curves: &[FiberCurve], x: &Vec3) -> Result<Vec3> {
    let mut a = Vec3::zeros();
    for (k, c) in curves.iter().enumerate() {
        check_closed(c, k)?;
        let mut ak = Vec3::zeros();
        for i in 0..c.points.len() {
            let (p, q) = segment(&c.points, i);
            let len = (q - p).norm();
            if segment_distance(&p, &q, x, x) < len {
                return Err(HopfError::CurvesNotDisjoint(segment_distance(&p, &q, x, x)));
            }
            ak += segment_kernel(x, &p, &q);
        }
        a += ak * c.winding as f64;
    }
    Ok(a)
}

/// Same polygon with every segment cut into pieces no longer than `max_len`.
pub fn subdivide(c: &FiberCurve, max_len: f64) -> FiberCurve {
    let n = c.points.len();
    let segs = if c.closed { n } else { n - 1 };
    let mut pts = Vec::new();
    for i in 0..segs {
        let (a, b) = segment(&c.points, i);
        let k = ((b - a).norm() / max_len).ceil().max(1.0) as usize;
        for s in 0..k {
            pts.push(a + (b - a) * (s as f64 / k as f64));
        }
    }
    if !c.closed {
        pts.push(c.points[n - 1]);
    }
    FiberCurve {
        points: pts,
        ..c.clone()
    }
}

const GL3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// `H = (1/4π) Σ_k W_k ∮ A·dx`, each loop integrated along its framed
/// offset so the curve's own field is never evaluated on the curve.
pub fn hopf_loop_integral(framed: &[FramedCurve]) -> Result<HopfEstimate> {
    let mut offsets = Vec::with_capacity(framed.len());
    let mut min_delta = f64::INFINITY;
    for f in framed {
        let delta = self_linking(f)?.delta;
        min_delta = min_delta.min(delta);
        offsets.push(f.offset(delta));
    }
    // sources fine enough that every evaluation point is several segments away
    let sources: Vec<FiberCurve> = framed.iter().map(|f| subdivide(&f.base, 0.5 * min_delta)).collect();
    let mut total = 0.0;
    let mut segments = 0;
    for (k, path) in offsets.iter().enumerate() {
        let path = subdivide(path, 0.5 * min_delta);
        let pts = &path.points;
        segments += pts.len();
        let integral = ordered_sum(pts.len(), |i| {
            let (a, b) = segment(pts, i);
            let mut s = 0.0;
            for (t, w) in GL3 {
                let x = a + (b - a) * (0.5 * (t + 1.0));
                s += 0.5 * w * biot_savart_a(&sources, &x)?.dot(&(b - a));
            }
            Ok(s)
        })?;
        total += framed[k].base.winding as f64 * integral;
    }
    Ok(HopfEstimate::new(
        Method::LoopIntegral,
        total / (4.0 * PI),
        format!("{} curves, {} path segments", framed.len(), segments),
    ))
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn solid_angle_rule_agrees_with_midpoint_rule() {
        let (a, b) = hopf_link(256);
        let mid = gauss_linking(&a, &b, LinkingRule::Midpoint).unwrap();
        let exact = gauss_linking(&a, &b, LinkingRule::SolidAngle).unwrap();
        assert!((exact - 1.0).abs() < 1e-9, "{exact} {mid}");
        assert!((mid - 1.0).abs() < 1e-3, "{mid}");
    }

    #[test]
    fn segment_distance_cases() {
        let o = Vec3::zeros();
        let x = Vec3::x();
        let d = segment_distance(&o, &x, &Vec3::new(0.5, 1.0, -1.0), &Vec3::new(0.5, 1.0, 1.0));
        assert!((d - 1.0).abs() < 1e-15);
        let d = segment_distance(&o, &x, &Vec3::new(2.0, 0.0, 0.0), &Vec3::new(3.0, 0.0, 0.0));
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn touching_curves_are_rejected() {
        let a = circle(&Vec3::zeros(), &Vec3::z(), 1.0, 64);
        let b = circle(&Vec3::new(2.0, 0.0, 0.0), &Vec3::z(), 1.0, 64);
        assert!(matches!(
            gauss_linking(&a, &b, LinkingRule::SolidAngle),
            Err(HopfError::CurvesNotDisjoint(_))
        ));
    }

    #[test]
    fn segment_kernel_matches_quadrature() {
        let a = Vec3::new(0.1, -0.3, 0.2);
        let b = Vec3::new(0.7, 0.4, -0.1);
        let x = Vec3::new(0.3, 0.5, 0.9);
        let n = 20000;
        let mut q = Vec3::zeros();
        for i in 0..n {
            let y = a + (b - a) * ((i as f64 + 0.5) / n as f64);
            let r = x - y;
            q += (b - a).cross(&r) / (r.norm().powi(3) * n as f64);
        }
        assert!((segment_kernel(&x, &a, &b) - q).norm() < 1e-8);
    }

    #[test]
    fn twist_of_turning_framing() {
        for turns in [0, 1, 3] {
            let f = turning_unknot(512, turns);
            assert!((twist(&f) - turns as f64).abs() < 1e-9);
        }
    }
}
