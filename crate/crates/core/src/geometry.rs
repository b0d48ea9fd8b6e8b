//! Gauss linking integral of straight segments and polygonal curves, and its
//! directional derivative under a perturbation of the segment endpoints.
//!
//! The per-pair value uses the four-arcsine solid-angle form. Each arcsine of
//! a dot product of unit normals is evaluated as `atan2(u·w, |u×w|)` on the
//! unnormalized normals, and `|u×w|` reduces to `|V|·|e|` where `V` is the
//! signed tetrahedron volume and `e` the edge shared by the two normals. That
//! keeps nearly coplanar pairs (the flat cloth case) free of cancellation.
//!
//! The directional derivative is a forward difference with `ε ≈ 1e-8`. To keep
//! it reproducible to ~1e-12 under rigid motions, the increment
//! `G(X + εv) − G(X)` is accumulated term by term from double-double
//! intermediates instead of subtracting two rounded pair values.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::quadrature;

/// Relative tolerance under which four endpoints count as coplanar (`|V|`
/// against `|AB|·|AC|·|AD|`).
pub const COPLANAR_RTOL: f64 = 1e-12;

/// Relative tolerance under which a face normal counts as degenerate.
pub const DEGENERATE_NORMAL_RTOL: f64 = 1e-12;

/// Relative separation (against the summed segment lengths) under which two
/// segments are treated as intersecting.
pub const SINGULAR_RTOL: f64 = 1e-12;

const FOUR_PI: f64 = 4.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3::new(0.0, 0.0, 0.0);
    pub const E1: Point3 = Point3::new(1.0, 0.0, 0.0);
    pub const E2: Point3 = Point3::new(0.0, 1.0, 0.0);
    pub const E3: Point3 = Point3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Point3) -> Point3 {
        Point3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Point3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self / n)
    }

    /// Rotation by `angle` radians about the z-axis through the origin.
    pub fn rotated_z(self, angle: f64) -> Point3 {
        let (s, c) = angle.sin_cos();
        Point3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    fn lex_cmp(&self, other: &Point3) -> Ordering {
        self.x
            .total_cmp(&other.x)
            .then(self.y.total_cmp(&other.y))
            .then(self.z.total_cmp(&other.z))
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Point3::new(v[0], v[1], v[2])
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Point3 {
    fn add_assign(&mut self, o: Point3) {
        *self = *self + o;
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, k: f64) -> Point3 {
        Point3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Div<f64> for Point3 {
    type Output = Point3;
    fn div(self, k: f64) -> Point3 {
        Point3::new(self.x / k, self.y / k, self.z / k)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// Oriented straight segment with distinct finite endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    start: Point3,
    end: Point3,
}

impl Segment {
    pub fn new(start: Point3, end: Point3) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidGeometry("non-finite segment endpoint".into()));
        }
        if start == end {
            return Err(Error::InvalidGeometry("zero-length segment".into()));
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> Point3 {
        self.start
    }

    pub fn end(&self) -> Point3 {
        self.end
    }

    pub fn direction(&self) -> Point3 {
        self.end - self.start
    }

    pub fn length(&self) -> f64 {
        self.direction().norm()
    }

    pub fn reversed(&self) -> Segment {
        Segment {
            start: self.end,
            end: self.start,
        }
    }

    pub fn point_at(&self, s: f64) -> Point3 {
        self.start + self.direction() * s
    }

    fn lex_cmp(&self, other: &Segment) -> Ordering {
        self.start
            .lex_cmp(&other.start)
            .then(self.end.lex_cmp(&other.end))
    }
}

/// Ordered vertex chain; when `closed`, the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline3 {
    vertices: Vec<Point3>,
    closed: bool,
}

impl Polyline3 {
    pub fn new(vertices: Vec<Point3>, closed: bool) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidGeometry(format!(
                "polyline needs at least 2 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGeometry(format!("vertex {i} is not finite")));
        }
        if let Some(i) = vertices.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::InvalidGeometry(format!(
                "vertices {i} and {} coincide",
                i + 1
            )));
        }
        if closed && vertices.first() == vertices.last() {
            return Err(Error::InvalidGeometry(
                "closed polyline repeats its first vertex".into(),
            ));
        }
        Ok(Self { vertices, closed })
    }

    /// Builds a polyline without validation; callers guarantee the invariants.
    pub(crate) fn from_parts(vertices: Vec<Point3>, closed: bool) -> Self {
        Self { vertices, closed }
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }

    pub fn segment(&self, i: usize) -> Segment {
        let n = self.vertices.len();
        Segment {
            start: self.vertices[i],
            end: self.vertices[(i + 1) % n],
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        (0..self.segment_count()).map(|i| self.segment(i))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|s| s.length()).sum()
    }

    pub fn centroid(&self) -> Point3 {
        let sum = self.vertices.iter().fold(Point3::ORIGIN, |acc, &v| acc + v);
        sum / self.vertices.len() as f64
    }

    /// Applies `f` to every vertex, keeping the topology.
    pub fn map(&self, f: impl Fn(Point3) -> Point3) -> Polyline3 {
        Polyline3 {
            vertices: self.vertices.iter().map(|&v| f(v)).collect(),
            closed: self.closed,
        }
    }
}

/// `det(AB, AC, AD)`: six times the signed volume of the tetrahedron ABCD.
pub fn tetra_volume(a: Point3, b: Point3, c: Point3, d: Point3) -> f64 {
    (b - a).dot((c - a).cross(d - a))
}

/// Minimum Euclidean distance between two closed segments.
pub fn segment_distance(s1: &Segment, s2: &Segment) -> f64 {
    let (p, q) = closest_points(s1, s2);
    p.distance(q)
}

/// Closest points between two segments (clamped parametric minimization).
pub fn closest_points(s1: &Segment, s2: &Segment) -> (Point3, Point3) {
    let d1 = s1.direction();
    let d2 = s2.direction();
    let r = s1.start - s2.start;
    let a = d1.dot(d1);
    let e = d2.dot(d2);
    let b = d1.dot(d2);
    let c = d1.dot(r);
    let f = d2.dot(r);
    let denom = a * e - b * b;

    let mut s = if denom > 1e-14 * a * e {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    (s1.point_at(s), s2.point_at(t))
}

fn check_separated(s1: &Segment, s2: &Segment) -> Result<()> {
    let separation = segment_distance(s1, s2);
    if separation <= SINGULAR_RTOL * (s1.length() + s2.length()) {
        return Err(Error::SingularPair { separation });
    }
    Ok(())
}

fn canonical<'a>(s1: &'a Segment, s2: &'a Segment) -> (&'a Segment, &'a Segment) {
    if s2.lex_cmp(s1) == Ordering::Less {
        (s2, s1)
    } else {
        (s1, s2)
    }
}

#[derive(Debug, Clone, Copy)]
struct DdPoint {
    x: TwoFloat,
    y: TwoFloat,
    z: TwoFloat,
}

impl DdPoint {
    fn exact(p: Point3) -> Self {
        Self {
            x: TwoFloat::from(p.x),
            y: TwoFloat::from(p.y),
            z: TwoFloat::from(p.z),
        }
    }

    /// `p + eps·dir` with the product and sum carried in double-double.
    fn offset(p: Point3, dir: Point3, eps: f64) -> Self {
        Self {
            x: TwoFloat::from(p.x) + TwoFloat::new_mul(eps, dir.x),
            y: TwoFloat::from(p.y) + TwoFloat::new_mul(eps, dir.y),
            z: TwoFloat::from(p.z) + TwoFloat::new_mul(eps, dir.z),
        }
    }

    fn sub(self, o: DdPoint) -> DdPoint {
        DdPoint {
            x: self.x - o.x,
            y: self.y - o.y,
            z: self.z - o.z,
        }
    }

    fn dot(self, o: DdPoint) -> TwoFloat {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    fn cross(self, o: DdPoint) -> DdPoint {
        DdPoint {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    fn norm_squared(self) -> f64 {
        self.dot(self).hi()
    }
}

/// The four arcsine terms of the solid-angle form, kept as `(u·w, |V|·|e|)`
/// pairs so increments can be taken without rounding the angles first.
#[derive(Debug, Clone, Copy)]
struct SolidAngleTerms {
    dots: [TwoFloat; 4],
    spans: [TwoFloat; 4],
    active: [bool; 4],
    /// Signed volume; snapped to exactly zero for coplanar endpoints when
    /// requested.
    volume: TwoFloat,
}

impl SolidAngleTerms {
    /// Increments must not snap: a base volume of rounding size would
    /// otherwise be dropped on one side of the difference only.
    fn new(a: DdPoint, b: DdPoint, c: DdPoint, d: DdPoint, snap_coplanar: bool) -> Self {
        let ab = b.sub(a);
        let ac = c.sub(a);
        let ad = d.sub(a);
        let bc = c.sub(b);
        let bd = d.sub(b);

        let n_a = ac.cross(ad);
        let n_b = bd.cross(bc);
        let n_c = bc.cross(ac);
        let n_d = ad.cross(bd);

        let degenerate = |n: DdPoint, e1: DdPoint, e2: DdPoint| {
            n.norm_squared()
                <= DEGENERATE_NORMAL_RTOL
                    * DEGENERATE_NORMAL_RTOL
                    * e1.norm_squared()
                    * e2.norm_squared()
        };
        let deg_a = degenerate(n_a, ac, ad);
        let deg_b = degenerate(n_b, bd, bc);
        let deg_c = degenerate(n_c, bc, ac);
        let deg_d = degenerate(n_d, ad, bd);

        let raw_volume = ab.dot(n_a);
        let scale = (ab.norm_squared() * ac.norm_squared() * ad.norm_squared()).sqrt();
        let volume = if snap_coplanar && raw_volume.hi().abs() <= COPLANAR_RTOL * scale {
            TwoFloat::from(0.0)
        } else {
            raw_volume
        };
        let abs_volume = volume.abs();

        // (first normal, second normal, shared edge)
        let terms = [
            (n_a, n_d, ad, deg_a || deg_d),
            (n_d, n_b, bd, deg_d || deg_b),
            (n_b, n_c, bc, deg_b || deg_c),
            (n_c, n_a, ac, deg_c || deg_a),
        ];
        let mut dots = [TwoFloat::from(0.0); 4];
        let mut spans = [TwoFloat::from(0.0); 4];
        let mut active = [false; 4];
        for (k, (u, w, e, deg)) in terms.into_iter().enumerate() {
            if deg {
                continue;
            }
            dots[k] = u.dot(w);
            spans[k] = abs_volume * e.dot(e).sqrt();
            active[k] = true;
        }
        Self {
            dots,
            spans,
            active,
            volume,
        }
    }

    fn angle(&self, k: usize) -> f64 {
        if self.active[k] {
            self.dots[k].hi().atan2(self.spans[k].hi())
        } else {
            0.0
        }
    }

    /// Unsigned solid angle `Ω` of the quadrilateral seen from both segments.
    ///
    /// Each term is split into whole quarter turns and a small remainder so
    /// that a nearly flat quadrilateral keeps full relative accuracy.
    fn omega(&self) -> f64 {
        let mut quarters = 0i32;
        let mut rest = 0.0;
        for k in (0..4).filter(|&k| self.active[k]) {
            let (d, x) = (self.dots[k].hi(), self.spans[k].hi());
            if d == 0.0 {
                rest += d.atan2(x);
            } else {
                quarters += if d > 0.0 { 1 } else { -1 };
                rest -= (x / d).atan();
            }
        }
        f64::from(quarters) * FRAC_PI_2 + rest
    }

    fn sign(&self) -> f64 {
        let v = self.volume.hi();
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    fn gli(&self) -> f64 {
        self.sign() * self.omega() / FOUR_PI
    }

    /// `G(moved) − G(self)`, accumulated from per-term angle differences.
    fn increment_to(&self, moved: &SolidAngleTerms) -> f64 {
        let mut delta = 0.0;
        for k in 0..4 {
            delta += if self.active[k] && moved.active[k] {
                let (d0, x0) = (self.dots[k], self.spans[k]);
                let (d1, x1) = (moved.dots[k], moved.spans[k]);
                let sin = x0 * d1 - d0 * x1;
                let cos = d0 * d1 + x0 * x1;
                sin.hi().atan2(cos.hi())
            } else {
                moved.angle(k) - self.angle(k)
            };
        }
        let (s0, s1) = (self.sign(), moved.sign());
        if s0 == s1 {
            s0 * delta / FOUR_PI
        } else {
            let omega0 = self.omega();
            (s1 * (omega0 + delta) - s0 * omega0) / FOUR_PI
        }
    }
}

fn terms_of(s1: &Segment, s2: &Segment, snap_coplanar: bool) -> SolidAngleTerms {
    SolidAngleTerms::new(
        DdPoint::exact(s1.start),
        DdPoint::exact(s1.end),
        DdPoint::exact(s2.start),
        DdPoint::exact(s2.end),
        snap_coplanar,
    )
}

/// Gauss linking integral of two non-intersecting segments, normalized by 1/4π.
///
/// Symmetric in its arguments: both orders go through the same arithmetic.
pub fn segment_gli(s1: &Segment, s2: &Segment) -> Result<f64> {
    let (s1, s2) = canonical(s1, s2);
    check_separated(s1, s2)?;
    Ok(terms_of(s1, s2, true).gli())
}

/// Sum of [`segment_gli`] over every segment pair of the two curves.
pub fn curve_gli(c1: &Polyline3, c2: &Polyline3) -> Result<f64> {
    let mut total = 0.0;
    for s1 in c1.segments() {
        for s2 in c2.segments() {
            total += segment_gli(&s1, &s2)?;
        }
    }
    Ok(total)
}

/// Factorization pieces of the pair GLI: unit face normals, signed volume
/// `V = det(AB, AC, AD)` and kernel integral `I`, with `G = V·I`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentPairGeometry {
    /// `n_A, n_B, n_C, n_D`; `None` marks a degenerate (collinear) face.
    pub normals: [Option<Point3>; 4],
    pub volume: f64,
    pub kernel_integral: f64,
}

pub fn segment_pair_geometry(s1: &Segment, s2: &Segment) -> Result<SegmentPairGeometry> {
    check_separated(s1, s2)?;
    let (a, b, c, d) = (s1.start, s1.end, s2.start, s2.end);
    let unit = |n: Point3, e1: Point3, e2: Point3| {
        if n.norm() <= DEGENERATE_NORMAL_RTOL * e1.norm() * e2.norm() {
            None
        } else {
            n.normalized()
        }
    };
    let (ac, ad, bc, bd) = (c - a, d - a, c - b, d - b);
    let normals = [
        unit(ac.cross(ad), ac, ad),
        unit(bd.cross(bc), bd, bc),
        unit(bc.cross(ac), bc, ac),
        unit(ad.cross(bd), ad, bd),
    ];
    let volume = tetra_volume(a, b, c, d);
    let terms = terms_of(s1, s2, true);
    let kernel_integral = if terms.sign() != 0.0 {
        terms.gli() / volume
    } else {
        quadrature::kernel_integral(s1, s2, 48)
    };
    Ok(SegmentPairGeometry {
        normals,
        volume,
        kernel_integral,
    })
}

/// Perturbation used for the directional derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    direction: Point3,
    epsilon: f64,
    clamp_magnitude: f64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            direction: Point3::E3,
            epsilon: 1e-8,
            clamp_magnitude: 1e4,
        }
    }
}

impl PerturbationSpec {
    pub fn new(direction: Point3, epsilon: f64, clamp_magnitude: f64) -> Result<Self> {
        if !direction.is_finite() || (direction.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidPerturbation(format!(
                "direction must be a unit vector, got norm {}",
                direction.norm()
            )));
        }
        if !(epsilon > 0.0 && epsilon <= 1e-3) {
            return Err(Error::InvalidPerturbation(format!(
                "epsilon must lie in (0, 1e-3], got {epsilon}"
            )));
        }
        if !(clamp_magnitude > 0.0 && clamp_magnitude.is_finite()) {
            return Err(Error::InvalidPerturbation(format!(
                "clamp magnitude must be positive, got {clamp_magnitude}"
            )));
        }
        Ok(Self {
            direction,
            epsilon,
            clamp_magnitude,
        })
    }

    /// Same epsilon and clamp with a different (unit) direction.
    pub fn with_direction(&self, direction: Point3) -> Result<Self> {
        Self::new(direction, self.epsilon, self.clamp_magnitude)
    }

    pub fn direction(&self) -> Point3 {
        self.direction
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn clamp_magnitude(&self) -> f64 {
        self.clamp_magnitude
    }
}

/// Which endpoint of each segment receives the perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PerturbedEnds {
    /// `B` and `D`, the terminal endpoints.
    #[default]
    Terminal,
    /// `A` and `C`.
    Initial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DifferenceScheme {
    #[default]
    Forward,
    Central,
}

fn perturbed_terms(
    s1: &Segment,
    s2: &Segment,
    direction: Point3,
    eps: f64,
    ends: PerturbedEnds,
) -> Result<SolidAngleTerms> {
    let shift = direction * eps;
    let (m1, m2) = match ends {
        PerturbedEnds::Terminal => (
            Segment::new(s1.start, s1.end + shift)?,
            Segment::new(s2.start, s2.end + shift)?,
        ),
        PerturbedEnds::Initial => (
            Segment::new(s1.start + shift, s1.end)?,
            Segment::new(s2.start + shift, s2.end)?,
        ),
    };
    check_separated(&m1, &m2)?;
    let p = |q: Point3, moved: bool| {
        if moved {
            DdPoint::offset(q, direction, eps)
        } else {
            DdPoint::exact(q)
        }
    };
    let terminal = ends == PerturbedEnds::Terminal;
    Ok(SolidAngleTerms::new(
        p(s1.start, !terminal),
        p(s1.end, terminal),
        p(s2.start, !terminal),
        p(s2.end, terminal),
        false,
    ))
}

/// Finite-difference directional derivative of the pair GLI, unclamped.
///
/// Fails with [`Error::SingularPair`] when the original or a perturbed pair
/// intersects.
pub fn directional_gli(
    s1: &Segment,
    s2: &Segment,
    direction: Point3,
    epsilon: f64,
    ends: PerturbedEnds,
    scheme: DifferenceScheme,
) -> Result<f64> {
    let (s1, s2) = canonical(s1, s2);
    check_separated(s1, s2)?;
    let base = terms_of(s1, s2, false);
    let forward = base.increment_to(&perturbed_terms(s1, s2, direction, epsilon, ends)?);
    match scheme {
        DifferenceScheme::Forward => Ok(forward / epsilon),
        DifferenceScheme::Central => {
            let backward = base.increment_to(&perturbed_terms(s1, s2, direction, -epsilon, ends)?);
            Ok((forward - backward) / (2.0 * epsilon))
        }
    }
}

/// One dGLI entry, with a flag set when the value hit the clamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgliValue {
    pub value: f64,
    pub clamped: bool,
}

/// dGLI of two segments: forward difference with the terminal endpoints moved
/// along `p.direction()`, clamped to `±p.clamp_magnitude()`.
///
/// Singular pairs return `+clamp_magnitude` with the clamp flag set.
pub fn dgli_segments(s1: &Segment, s2: &Segment, p: &PerturbationSpec) -> DgliValue {
    let cap = p.clamp_magnitude;
    match directional_gli(
        s1,
        s2,
        p.direction,
        p.epsilon,
        PerturbedEnds::Terminal,
        DifferenceScheme::Forward,
    ) {
        Ok(v) if v.is_finite() && v.abs() <= cap => DgliValue {
            value: v,
            clamped: false,
        },
        Ok(v) if v.is_finite() => DgliValue {
            value: cap.copysign(v),
            clamped: true,
        },
        _ => DgliValue {
            value: cap,
            clamped: true,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: [f64; 3], b: [f64; 3]) -> Segment {
        Segment::new(a.into(), b.into()).unwrap()
    }

    #[test]
    fn volume_of_unit_basis_is_one() {
        let v = tetra_volume(Point3::ORIGIN, Point3::E1, Point3::E2, Point3::E3);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn volume_vanishes_for_coplanar_points() {
        let v = tetra_volume(
            Point3::new(0.1, 0.2, 0.0),
            Point3::new(3.0, -1.0, 0.0),
            Point3::new(-2.0, 0.5, 0.0),
            Point3::new(0.7, 0.7, 0.0),
        );
        assert_eq!(v, 0.0);
    }

    #[test]
    fn volume_is_antisymmetric_in_b_and_c() {
        let (a, b, c, d) = (
            Point3::new(0.3, -0.2, 0.9),
            Point3::new(1.1, 0.4, -0.3),
            Point3::new(-0.5, 0.8, 0.2),
            Point3::new(0.2, 0.1, 1.7),
        );
        assert_eq!(tetra_volume(a, b, c, d), -tetra_volume(a, c, b, d));
    }

    #[test]
    fn rejects_degenerate_segment() {
        assert!(Segment::new(Point3::E1, Point3::E1).is_err());
        assert!(Segment::new(Point3::E1, Point3::new(f64::NAN, 0.0, 0.0)).is_err());
    }

    #[test]
    fn parallel_coplanar_segments_have_zero_gli() {
        let s1 = seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let s2 = seg([0.0, 1.0, 0.0], [1.0, 1.0, 0.0]);
        assert_eq!(segment_gli(&s1, &s2).unwrap(), 0.0);
        let d = dgli_segments(&s1, &s2, &PerturbationSpec::default());
        assert_eq!(d.value, 0.0);
        assert!(!d.clamped);
    }

    #[test]
    fn intersecting_segments_are_singular() {
        let s1 = seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let s2 = seg([0.5, -1.0, 0.0], [0.5, 1.0, 0.0]);
        assert!(matches!(
            segment_gli(&s1, &s2),
            Err(Error::SingularPair { .. })
        ));
        let d = dgli_segments(&s1, &s2, &PerturbationSpec::default());
        assert!(d.clamped);
        assert_eq!(d.value, 1e4);
    }

    #[test]
    fn touching_segments_are_singular() {
        let s1 = seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let s2 = seg([1.0, 0.0, 0.0], [1.0, 1.0, 0.0]);
        assert!(segment_gli(&s1, &s2).is_err());
    }

    #[test]
    fn gli_sign_follows_volume() {
        let s1 = seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let s2 = seg([0.5, -0.5, 0.5], [0.5, 0.5, 0.5]);
        let g = segment_gli(&s1, &s2).unwrap();
        let v = tetra_volume(s1.start(), s1.end(), s2.start(), s2.end());
        assert!(g != 0.0);
        assert_eq!(g.signum(), v.signum());
        let flipped = segment_gli(&s1, &s2.reversed()).unwrap();
        assert!((g + flipped).abs() < 1e-15);
    }

    #[test]
    fn pair_geometry_factorizes_gli() {
        let s1 = seg([0.0, 0.0, 0.0], [1.0, 0.2, 0.1]);
        let s2 = seg([0.3, -0.5, 0.6], [0.5, 0.7, 0.4]);
        let geo = segment_pair_geometry(&s1, &s2).unwrap();
        let g = segment_gli(&s1, &s2).unwrap();
        assert!((geo.volume * geo.kernel_integral - g).abs() < 1e-14);
        for n in geo.normals {
            assert!((n.unwrap().norm() - 1.0).abs() < 1e-12);
        }
        let quad = quadrature::kernel_integral(&s1, &s2, 48);
        assert!((quad - geo.kernel_integral).abs() < 1e-8 * quad.abs());
    }

    #[test]
    fn pair_geometry_flags_collinear_faces() {
        // A, C, D collinear: n_A degenerates.
        let s1 = seg([0.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let s2 = seg([1.0, 0.0, 0.0], [2.0, 0.0, 0.0]);
        let geo = segment_pair_geometry(&s1, &s2).unwrap();
        assert!(geo.normals[0].is_none());
        assert!(geo.kernel_integral > 0.0);
    }

    #[test]
    fn perturbation_spec_validates() {
        assert!(PerturbationSpec::new(Point3::new(0.0, 0.0, 2.0), 1e-8, 1e4).is_err());
        assert!(PerturbationSpec::new(Point3::E3, 0.0, 1e4).is_err());
        assert!(PerturbationSpec::new(Point3::E3, 1e-2, 1e4).is_err());
        assert!(PerturbationSpec::new(Point3::E3, 1e-8, -1.0).is_err());
        let p = PerturbationSpec::default();
        assert_eq!(p.direction(), Point3::E3);
        assert_eq!(p.epsilon(), 1e-8);
        assert_eq!(p.clamp_magnitude(), 1e4);
    }

    #[test]
    fn clamp_caps_near_contact_pairs() {
        let s1 = seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let s2 = seg([1.0, 1e-5, 1e-5], [1.0, 1.0, 0.3]);
        let p = PerturbationSpec::new(Point3::E3, 1e-8, 10.0).unwrap();
        let raw = directional_gli(
            &s1,
            &s2,
            Point3::E3,
            1e-8,
            PerturbedEnds::Terminal,
            DifferenceScheme::Forward,
        )
        .unwrap();
        assert!(raw.abs() > 10.0, "raw {raw}");
        let d = dgli_segments(&s1, &s2, &p);
        assert!(d.clamped);
        assert_eq!(d.value.abs(), 10.0);
    }

    #[test]
    fn closest_points_of_skew_segments() {
        let s1 = seg([0.0, 0.0, 0.0], [2.0, 0.0, 0.0]);
        let s2 = seg([1.0, -1.0, 3.0], [1.0, 1.0, 3.0]);
        let (p, q) = closest_points(&s1, &s2);
        assert!((p - Point3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((q - Point3::new(1.0, 0.0, 3.0)).norm() < 1e-15);
        assert_eq!(segment_distance(&s1, &s2), 3.0);
    }

    #[test]
    fn polyline_validation() {
        assert!(Polyline3::new(vec![Point3::ORIGIN], false).is_err());
        assert!(Polyline3::new(vec![Point3::ORIGIN, Point3::ORIGIN], false).is_err());
        assert!(Polyline3::new(vec![Point3::ORIGIN, Point3::E1, Point3::ORIGIN], true).is_err());
        let sq = Polyline3::new(
            vec![
                Point3::ORIGIN,
                Point3::E1,
                Point3::new(1.0, 1.0, 0.0),
                Point3::E2,
            ],
            true,
        )
        .unwrap();
        assert_eq!(sq.segment_count(), 4);
        assert_eq!(sq.length(), 4.0);
        assert_eq!(sq.segment(3).end(), Point3::ORIGIN);
    }
}
