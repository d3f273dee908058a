//! Smooth edge geometries, parametrized by arc length.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};

const ORTHONORMAL_TOL: f64 = 1e-9;

/// Closest point on (a parameter range of) an edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeHit {
    pub rho: f64,
    pub s: f64,
    pub foot: Vec3,
}

/// Polygonal chain with cached cumulative arc lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Vec3>,
    cumulative: Vec<f64>,
}

impl Polyline {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGeometry(
                "polyline needs at least two points".into(),
            ));
        }
        let mut cumulative = Vec::with_capacity(points.len());
        cumulative.push(0.0);
        for w in points.windows(2) {
            let len = (w[1] - w[0]).norm();
            if !(len > 0.0) || !len.is_finite() {
                return Err(Error::InvalidGeometry(
                    "polyline has a zero-length or non-finite segment".into(),
                ));
            }
            cumulative.push(cumulative.last().unwrap() + len);
        }
        Ok(Polyline { points, cumulative })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }

    /// Cumulative arc length at each point (first entry 0).
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn segment_at(&self, s: f64) -> usize {
        // last segment whose start is <= s
        let i = self.cumulative.partition_point(|&c| c <= s);
        i.saturating_sub(1).min(self.segment_count() - 1)
    }

    fn point_at(&self, s: f64) -> Vec3 {
        let i = self.segment_at(s);
        let (c0, c1) = (self.cumulative[i], self.cumulative[i + 1]);
        let t = ((s - c0) / (c1 - c0)).clamp(0.0, 1.0);
        self.points[i] + t * (self.points[i + 1] - self.points[i])
    }

    fn tangent_at(&self, s: f64) -> Vec3 {
        let i = self.segment_at(s);
        (self.points[i + 1] - self.points[i]).normalize()
    }

    fn closest_on_segment(&self, p: &Vec3, i: usize) -> EdgeHit {
        let (a, b) = (&self.points[i], &self.points[i + 1]);
        let (t, foot) = segment_projection(p, a, b);
        let s = if t == 0.0 {
            self.cumulative[i]
        } else if t == 1.0 {
            self.cumulative[i + 1]
        } else {
            self.cumulative[i] + t * (self.cumulative[i + 1] - self.cumulative[i])
        };
        EdgeHit { rho: (p - foot).norm(), s, foot }
    }
}

/// Circle arc `center + r (cos θ u + sin θ v)` for θ in `[start, start + span]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircularArc {
    pub center: Vec3,
    pub radius: f64,
    pub u: Vec3,
    pub v: Vec3,
    pub start_angle: f64,
    pub span: f64,
}

impl CircularArc {
    pub fn new(center: Vec3, radius: f64, u: Vec3, v: Vec3, start_angle: f64, span: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidGeometry("arc radius must be positive".into()));
        }
        if !(span > 0.0) || span > TAU * (1.0 + 1e-12) {
            return Err(Error::InvalidGeometry("arc span must lie in (0, 2π]".into()));
        }
        check_orthonormal(&u, &v)?;
        Ok(CircularArc { center, radius, u, v, start_angle, span: span.min(TAU) })
    }

    /// Arc in the plane with unit normal `normal`, starting in direction `u`.
    pub fn with_normal(center: Vec3, radius: f64, normal: Vec3, u: Vec3, start_angle: f64, span: f64) -> Result<Self> {
        let n = normal.normalize();
        let u = u.normalize();
        if n.dot(&u).abs() > ORTHONORMAL_TOL {
            return Err(Error::InvalidGeometry("arc u must lie in the arc plane".into()));
        }
        Self::new(center, radius, u, n.cross(&u), start_angle, span)
    }

    fn normal(&self) -> Vec3 {
        self.u.cross(&self.v)
    }

    fn at_angle(&self, theta: f64) -> Vec3 {
        self.center + self.radius * (theta.cos() * self.u + theta.sin() * self.v)
    }

    fn closest_in_range(&self, p: &Vec3, s0: f64, s1: f64) -> EdgeHit {
        let r = self.radius;
        let (ta, tb) = (self.start_angle + s0 / r, self.start_angle + s1 / r);
        let q = p - self.center;
        let (qu, qv, qn) = (q.dot(&self.u), q.dot(&self.v), q.dot(&self.normal()));
        let rp = qu.hypot(qv);
        if rp <= 1e-14 * (r + q.norm()) {
            // on the axis: every arc point is equidistant, take the lowest parameter
            return EdgeHit { rho: r.hypot(qn), s: s0, foot: self.at_angle(ta) };
        }
        let t = ta + (qv.atan2(qu) - ta).rem_euclid(TAU);
        if t <= tb {
            let s = if t == ta { s0 } else { ((t - self.start_angle) * r).clamp(s0, s1) };
            return EdgeHit { rho: (rp - r).hypot(qn), s, foot: self.at_angle(t) };
        }
        let (fa, fb) = (self.at_angle(ta), self.at_angle(tb));
        let (da, db) = ((p - fa).norm(), (p - fb).norm());
        if db < da {
            EdgeHit { rho: db, s: s1, foot: fb }
        } else {
            EdgeHit { rho: da, s: s0, foot: fa }
        }
    }
}

/// Circular helix `axis_point + r (cos θ u + sin θ v) + pitch (θ - start) / 2π · axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct Helix {
    pub axis_point: Vec3,
    pub axis: Vec3,
    pub radius: f64,
    /// Axial rise per full turn.
    pub pitch: f64,
    pub u: Vec3,
    pub v: Vec3,
    pub start_angle: f64,
    pub span: f64,
}

impl Helix {
    pub fn new(
        axis_point: Vec3,
        axis: Vec3,
        radius: f64,
        pitch: f64,
        u: Vec3,
        start_angle: f64,
        span: f64,
    ) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !pitch.is_finite() {
            return Err(Error::InvalidGeometry("helix radius must be positive".into()));
        }
        if !(span > 0.0) || !span.is_finite() {
            return Err(Error::InvalidGeometry("helix span must be positive".into()));
        }
        let w = axis.normalize();
        let u = u.normalize();
        if !w.iter().all(|c| c.is_finite()) || w.dot(&u).abs() > ORTHONORMAL_TOL {
            return Err(Error::InvalidGeometry("helix u must be perpendicular to the axis".into()));
        }
        Ok(Helix { axis_point, axis: w, radius, pitch, u, v: w.cross(&u), start_angle, span })
    }

    fn rise(&self) -> f64 {
        self.pitch / TAU
    }

    fn speed(&self) -> f64 {
        self.radius.hypot(self.rise())
    }

    fn at_angle(&self, theta: f64) -> Vec3 {
        self.axis_point
            + self.radius * (theta.cos() * self.u + theta.sin() * self.v)
            + self.rise() * (theta - self.start_angle) * self.axis
    }

    fn closest_in_range(&self, p: &Vec3, s0: f64, s1: f64) -> EdgeHit {
        let (r, k, speed) = (self.radius, self.rise(), self.speed());
        let (ta, tb) = (self.start_angle + s0 / speed, self.start_angle + s1 / speed);
        let q = p - self.axis_point;
        let (qu, qv, qw) = (q.dot(&self.u), q.dot(&self.v), q.dot(&self.axis));
        let t0 = self.start_angle;
        let d2 = |t: f64| {
            let (a, b, c) = (qu - r * t.cos(), qv - r * t.sin(), qw - k * (t - t0));
            a * a + b * b + c * c
        };
        // derivative of d²/2 and its derivative
        let g = |t: f64| r * qu * t.sin() - r * qv * t.cos() - k * (qw - k * (t - t0));
        let dg = |t: f64| r * qu * t.cos() + r * qv * t.sin() + k * k;

        let seeds = (16.0 * (tb - ta) / TAU).ceil().max(16.0) as usize;
        let step = (tb - ta) / seeds as f64;
        let mut best = (d2(ta), ta, s0);
        let consider = |dist2: f64, t: f64, s: f64, best: &mut (f64, f64, f64)| {
            if dist2 < best.0 {
                *best = (dist2, t, s);
            }
        };
        let mut left = ta;
        let mut g_left = g(left);
        for i in 1..=seeds {
            let right = if i == seeds { tb } else { ta + i as f64 * step };
            let g_right = g(right);
            if g_left < 0.0 && g_right >= 0.0 {
                let t = bracketed_newton(&g, &dg, left, right);
                consider(d2(t), t, ((t - t0) * speed).clamp(s0, s1), &mut best);
            }
            left = right;
            g_left = g_right;
        }
        consider(d2(tb), tb, s1, &mut best);
        let (dist2, t, s) = best;
        EdgeHit { rho: dist2.sqrt(), s, foot: self.at_angle(t) }
    }
}

/// Newton iteration on `g` kept inside a sign-change bracket, falling back
/// to bisection whenever the Newton step leaves it.
fn bracketed_newton<G: Fn(f64) -> f64, D: Fn(f64) -> f64>(g: &G, dg: &D, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let mut t = 0.5 * (lo + hi);
    for _ in 0..100 {
        let gt = g(t);
        if gt == 0.0 {
            return t;
        }
        if gt < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let slope = dg(t);
        let mut next = t - gt / slope;
        if !(slope > 0.0) || !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 4.0 * f64::EPSILON * (1.0 + t.abs()) || hi - lo <= 4.0 * f64::EPSILON * (1.0 + t.abs()) {
            return next;
        }
        t = next;
    }
    t
}

/// Parameter in [0, 1] and foot of the projection of `p` onto segment `ab`.
/// Clamped parameters return the endpoint itself.
pub(crate) fn segment_projection(p: &Vec3, a: &Vec3, b: &Vec3) -> (f64, Vec3) {
    let d = b - a;
    let t = (p - a).dot(&d) / d.norm_squared();
    if t <= 0.0 {
        (0.0, *a)
    } else if t >= 1.0 {
        (1.0, *b)
    } else {
        (t, a + t * d)
    }
}

fn check_orthonormal(u: &Vec3, v: &Vec3) -> Result<()> {
    if (u.norm() - 1.0).abs() > ORTHONORMAL_TOL
        || (v.norm() - 1.0).abs() > ORTHONORMAL_TOL
        || u.dot(v).abs() > ORTHONORMAL_TOL
    {
        return Err(Error::InvalidGeometry("arc basis must be orthonormal".into()));
    }
    Ok(())
}

/// One smooth edge of a curve graph.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeGeometry {
    Segment { a: Vec3, b: Vec3 },
    Polyline(Polyline),
    Arc(CircularArc),
    Helix(Helix),
}

impl EdgeGeometry {
    pub fn segment(a: Vec3, b: Vec3) -> Result<Self> {
        if a == b {
            return Err(Error::DegenerateEdge);
        }
        if !(a.iter().chain(b.iter()).all(|c| c.is_finite())) {
            return Err(Error::InvalidGeometry("non-finite segment endpoint".into()));
        }
        Ok(EdgeGeometry::Segment { a, b })
    }

    pub fn polyline(points: Vec<Vec3>) -> Result<Self> {
        Polyline::new(points).map(EdgeGeometry::Polyline)
    }

    pub fn arc_length(&self) -> f64 {
        match self {
            EdgeGeometry::Segment { a, b } => (b - a).norm(),
            EdgeGeometry::Polyline(pl) => pl.length(),
            EdgeGeometry::Arc(arc) => arc.radius * arc.span,
            EdgeGeometry::Helix(h) => h.speed() * h.span,
        }
    }

    /// Point at arc length `s`, clamped to the edge.
    pub(crate) fn point_at_clamped(&self, s: f64) -> Vec3 {
        let s = s.clamp(0.0, self.arc_length());
        match self {
            EdgeGeometry::Segment { a, b } => {
                let t = s / (b - a).norm();
                a + t * (b - a)
            }
            EdgeGeometry::Polyline(pl) => pl.point_at(s),
            EdgeGeometry::Arc(arc) => arc.at_angle(arc.start_angle + s / arc.radius),
            EdgeGeometry::Helix(h) => h.at_angle(h.start_angle + s / h.speed()),
        }
    }

    pub fn point_at_arclength(&self, s: f64) -> Result<Vec3> {
        let length = self.arc_length();
        if !(0.0..=length).contains(&s) {
            return Err(Error::OutOfRange { s, length });
        }
        Ok(self.point_at_clamped(s))
    }

    /// Unit tangent in the direction of increasing arc length.
    pub fn tangent_at(&self, s: f64) -> Vec3 {
        let s = s.clamp(0.0, self.arc_length());
        match self {
            EdgeGeometry::Segment { a, b } => (b - a).normalize(),
            EdgeGeometry::Polyline(pl) => pl.tangent_at(s),
            EdgeGeometry::Arc(arc) => {
                let t = arc.start_angle + s / arc.radius;
                -t.sin() * arc.u + t.cos() * arc.v
            }
            EdgeGeometry::Helix(h) => {
                let t = h.start_angle + s / h.speed();
                (h.radius * (-t.sin() * h.u + t.cos() * h.v) + h.rise() * h.axis) / h.speed()
            }
        }
    }

    /// Closest point among parameters in `[s0, s1]`. Polylines restrict to
    /// the whole segments overlapping the range. Ties resolve to the lowest
    /// parameter.
    pub(crate) fn closest_in_range(&self, p: &Vec3, s0: f64, s1: f64) -> EdgeHit {
        match self {
            EdgeGeometry::Segment { a, b } => {
                let (t, foot) = segment_projection(p, a, b);
                let len = (b - a).norm();
                let s = if t == 1.0 { len } else { t * len };
                EdgeHit { rho: (p - foot).norm(), s, foot }
            }
            EdgeGeometry::Polyline(pl) => {
                let mut best: Option<EdgeHit> = None;
                for i in 0..pl.segment_count() {
                    if pl.cumulative[i + 1] <= s0 || pl.cumulative[i] >= s1 {
                        continue;
                    }
                    let hit = pl.closest_on_segment(p, i);
                    if best.map_or(true, |b| hit.rho < b.rho) {
                        best = Some(hit);
                    }
                }
                best.expect("range overlaps at least one segment")
            }
            EdgeGeometry::Arc(arc) => arc.closest_in_range(p, s0, s1),
            EdgeGeometry::Helix(h) => h.closest_in_range(p, s0, s1),
        }
    }

    pub(crate) fn closest(&self, p: &Vec3) -> EdgeHit {
        self.closest_in_range(p, 0.0, self.arc_length())
    }

    /// Box containing the edge restricted to `[s0, s1]`.
    pub(crate) fn bounding_box(&self, s0: f64, s1: f64) -> Aabb {
        let mut bbox = Aabb::from_point(&self.point_at_clamped(s0));
        bbox.include(&self.point_at_clamped(s1));
        match self {
            EdgeGeometry::Segment { .. } => bbox,
            EdgeGeometry::Polyline(pl) => {
                for (pt, c) in pl.points.iter().zip(&pl.cumulative) {
                    if *c > s0 && *c < s1 {
                        bbox.include(pt);
                    }
                }
                bbox
            }
            // deviation of a curve from its chord is at most max|x''| Δ²/8 in
            // the angle parameter; |x''| = r for both arcs and helices
            EdgeGeometry::Arc(arc) => {
                let dt = (s1 - s0) / arc.radius;
                bbox.expanded(arc.radius * dt * dt / 8.0)
            }
            EdgeGeometry::Helix(h) => {
                let dt = (s1 - s0) / h.speed();
                bbox.expanded(h.radius * dt * dt / 8.0)
            }
        }
    }

    /// Natural pieces for the spatial index: one per polyline segment, angular
    /// slices of at most π/8 for arcs and helices.
    pub(crate) fn index_pieces(&self) -> Vec<(f64, f64)> {
        match self {
            EdgeGeometry::Segment { .. } => vec![(0.0, self.arc_length())],
            EdgeGeometry::Polyline(pl) => pl.cumulative.windows(2).map(|w| (w[0], w[1])).collect(),
            EdgeGeometry::Arc(arc) => split_range(self.arc_length(), (arc.span / (PI / 8.0)).ceil() as usize),
            EdgeGeometry::Helix(h) => split_range(self.arc_length(), (h.span / (PI / 8.0)).ceil() as usize),
        }
    }

    /// The same point set traversed in the opposite direction.
    pub fn reversed(&self) -> EdgeGeometry {
        match self {
            EdgeGeometry::Segment { a, b } => EdgeGeometry::Segment { a: *b, b: *a },
            EdgeGeometry::Polyline(pl) => {
                let mut pts = pl.points.clone();
                pts.reverse();
                EdgeGeometry::Polyline(Polyline::new(pts).expect("reversal keeps validity"))
            }
            // θ ↦ -θ with v ↦ -v retraces the arc backwards
            EdgeGeometry::Arc(arc) => EdgeGeometry::Arc(CircularArc {
                v: -arc.v,
                start_angle: -(arc.start_angle + arc.span),
                ..arc.clone()
            }),
            EdgeGeometry::Helix(h) => EdgeGeometry::Helix(Helix {
                axis_point: h.axis_point + h.rise() * h.span * h.axis,
                axis: -h.axis,
                v: -h.v,
                start_angle: -(h.start_angle + h.span),
                ..h.clone()
            }),
        }
    }
}

pub(crate) fn split_range(length: f64, n: usize) -> Vec<(f64, f64)> {
    let n = n.max(1);
    (0..n)
        .map(|i| {
            let a = if i == 0 { 0.0 } else { length * i as f64 / n as f64 };
            let b = if i + 1 == n { length } else { length * (i + 1) as f64 / n as f64 };
            (a, b)
        })
        .collect()
}
