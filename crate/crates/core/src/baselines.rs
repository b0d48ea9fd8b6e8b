//! Competing representations: edge distances, corner distances and
//! aligned-boundary curve distances.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::cloth::{ClothConfiguration, EdgeSelection};
use crate::error::{Error, Result};
use crate::geometry::{segment_distance, Point3, Polyline3};
use crate::metrics;

/// Default number of resampled boundary points for curve distances.
pub const BOUNDARY_SAMPLES: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RepresentationKind {
    Dgli,
    Edges,
    Corners,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairedDistance {
    Spearman,
    Euclidean,
}

impl PairedDistance {
    pub fn eval(self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self {
            PairedDistance::Spearman => metrics::spearman_distance(x, y),
            PairedDistance::Euclidean => metrics::euclidean_distance(x, y),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub kind: RepresentationKind,
    pub distance: PairedDistance,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, kind: RepresentationKind, distance: PairedDistance) -> Self {
        Self {
            values,
            kind,
            distance,
        }
    }

    pub fn distance_to(&self, other: &FeatureVector) -> Result<f64> {
        self.distance.eval(&self.values, &other.values)
    }
}

/// Pairwise minimum distances between the selected segments, upper-triangle order.
pub fn edge_min_distances(
    config: &ClothConfiguration,
    sel: &EdgeSelection,
) -> Result<FeatureVector> {
    let n = config.segment_count();
    if let Some(i) = sel.indices().iter().find(|&&i| i >= n) {
        return Err(Error::InvalidSelection(format!(
            "segment index {i} out of range for {n} segments"
        )));
    }
    let segments: Vec<_> = sel.indices().iter().map(|&i| config.segment(i)).collect();
    let mut values = Vec::with_capacity(segments.len() * (segments.len() - 1) / 2);
    for i in 0..segments.len() {
        for j in (i + 1)..segments.len() {
            values.push(segment_distance(&segments[i], &segments[j]));
        }
    }
    Ok(FeatureVector::new(
        values,
        RepresentationKind::Edges,
        PairedDistance::Spearman,
    ))
}

/// The six corner-to-corner distances in order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
pub fn corner_distances(config: &ClothConfiguration) -> FeatureVector {
    let c = config.corner_points();
    let mut values = Vec::with_capacity(6);
    for i in 0..4 {
        for j in (i + 1)..4 {
            values.push(c[i].distance(c[j]));
        }
    }
    FeatureVector::new(
        values,
        RepresentationKind::Corners,
        PairedDistance::Spearman,
    )
}

/// Two curves centered at the origin, `curve_b` rotated onto `curve_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedCurvePair {
    pub curve_a: Polyline3,
    pub curve_b: Polyline3,
    /// Rotation applied to the centered `b`.
    pub rotation: Matrix3<f64>,
    /// Root-mean-square vertex distance after alignment.
    pub residual: f64,
}

fn to_vec(p: Point3) -> Vector3<f64> {
    Vector3::new(p.x, p.y, p.z)
}

fn centered(c: &Polyline3) -> Vec<Point3> {
    let m = c.centroid();
    c.vertices().iter().map(|&p| p - m).collect()
}

/// Optimal proper rotation `R` minimising `Σ |R bᵢ − aᵢ|²`.
pub fn kabsch(a: &[Point3], b: &[Point3]) -> Matrix3<f64> {
    let mut h = Matrix3::zeros();
    for (pa, pb) in a.iter().zip(b) {
        h += to_vec(*pb) * to_vec(*pa).transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let d = if d == 0.0 { 1.0 } else { d };
    v * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * u.transpose()
}

pub fn align_rigid(a: &Polyline3, b: &Polyline3) -> Result<AlignedCurvePair> {
    if a.len() != b.len() {
        return Err(Error::ResampleRequired {
            left: a.len(),
            right: b.len(),
        });
    }
    let ca = centered(a);
    let cb = centered(b);
    let rotation = if ca == cb {
        Matrix3::identity()
    } else {
        kabsch(&ca, &cb)
    };
    let rb: Vec<Point3> = cb
        .iter()
        .map(|&p| {
            let v = rotation * to_vec(p);
            Point3::new(v.x, v.y, v.z)
        })
        .collect();
    let residual = (ca
        .iter()
        .zip(&rb)
        .map(|(p, q)| (*p - *q).norm().powi(2))
        .sum::<f64>()
        / ca.len() as f64)
        .sqrt();
    Ok(AlignedCurvePair {
        curve_a: Polyline3::from_parts(ca, a.is_closed()),
        curve_b: Polyline3::from_parts(rb, b.is_closed()),
        rotation,
        residual,
    })
}

/// `n` points equally spaced by arc length, starting at the first vertex.
///
/// Closed curves are sampled around the full loop (the start is not
/// repeated); open curves include both endpoints.
pub fn resample_by_arclength(c: &Polyline3, n: usize) -> Result<Polyline3> {
    if n < 2 {
        return Err(Error::TooShort { len: n, min: 2 });
    }
    let total = c.length();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::EmptyCurve);
    }
    let v = c.vertices();
    let edges: Vec<(Point3, Point3)> = (0..c.segment_count())
        .map(|i| (v[i], v[(i + 1) % v.len()]))
        .collect();
    let step = if c.is_closed() {
        total / n as f64
    } else {
        total / (n - 1) as f64
    };
    let mut out = Vec::with_capacity(n);
    let mut edge = 0;
    let mut walked = 0.0;
    for k in 0..n {
        let target = k as f64 * step;
        loop {
            let (p, q) = edges[edge];
            let len = p.distance(q);
            if target <= walked + len || edge + 1 == edges.len() {
                let t = if len > 0.0 {
                    ((target - walked) / len).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                out.push(p + (q - p) * t);
                break;
            }
            walked += len;
            edge += 1;
        }
    }
    Ok(Polyline3::from_parts(out, c.is_closed()))
}

/// Discrete Fréchet distance over the vertex sequences.
pub fn frechet_distance(a: &Polyline3, b: &Polyline3) -> Result<f64> {
    discrete_frechet(a.vertices(), b.vertices())
}

pub fn discrete_frechet(a: &[Point3], b: &[Point3]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let m = b.len();
    let mut prev = vec![0.0_f64; m];
    let mut cur = vec![0.0_f64; m];
    for (i, pa) in a.iter().enumerate() {
        for (j, pb) in b.iter().enumerate() {
            let d = pa.distance(*pb);
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// Symmetric Hausdorff distance between the vertex sets.
pub fn hausdorff_distance(a: &Polyline3, b: &Polyline3) -> Result<f64> {
    discrete_hausdorff(a.vertices(), b.vertices())
}

pub fn discrete_hausdorff(a: &[Point3], b: &[Point3]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let directed = |x: &[Point3], y: &[Point3]| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| p.distance(*q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0_f64, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

/// Boundary resampled to `n` points starting at corner 0.
pub fn boundary_curve(config: &ClothConfiguration, n: usize) -> Result<Polyline3> {
    resample_by_arclength(&config.boundary_from_corner0(), n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveDistance {
    Frechet,
    Hausdorff,
}

impl CurveDistance {
    /// Distance after centering and rigidly aligning `b` onto `a`.
    pub fn eval(self, a: &Polyline3, b: &Polyline3) -> Result<f64> {
        let pair = align_rigid(a, b)?;
        match self {
            CurveDistance::Frechet => frechet_distance(&pair.curve_a, &pair.curve_b),
            CurveDistance::Hausdorff => hausdorff_distance(&pair.curve_a, &pair.curve_b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Segment;

    fn unit_square4() -> Polyline3 {
        Polyline3::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(1.0, 1.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            true,
        )
        .unwrap()
    }

    #[test]
    fn parallel_segments_at_unit_offset() {
        let s1 = Segment::new(Point3::ORIGIN, Point3::E1).unwrap();
        let s2 = Segment::new(Point3::E2, Point3::new(1.0, 1.0, 0.0)).unwrap();
        assert!((segment_distance(&s1, &s2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn resample_square_at_half_steps() {
        let r = resample_by_arclength(&unit_square4(), 8).unwrap();
        let expect = [
            (0.0, 0.0),
            (0.5, 0.0),
            (1.0, 0.0),
            (1.0, 0.5),
            (1.0, 1.0),
            (0.5, 1.0),
            (0.0, 1.0),
            (0.0, 0.5),
        ];
        for (p, (x, y)) in r.vertices().iter().zip(expect) {
            assert!((p.x - x).abs() < 1e-15 && (p.y - y).abs() < 1e-15);
        }
        let same = resample_by_arclength(&unit_square4(), 4).unwrap();
        for (p, q) in same.vertices().iter().zip(unit_square4().vertices()) {
            assert!(p.distance(*q) < 1e-12);
        }
    }

    #[test]
    fn open_resample_keeps_endpoints() {
        let c = Polyline3::new(vec![Point3::ORIGIN, Point3::new(3.0, 0.0, 0.0)], false).unwrap();
        let r = resample_by_arclength(&c, 4).unwrap();
        assert_eq!(r.vertices()[3], Point3::new(3.0, 0.0, 0.0));
        assert!((r.length() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn align_recovers_rigid_copy() {
        let a = resample_by_arclength(&unit_square4(), 12).unwrap();
        let a = a.map(|p| Point3::new(p.x, p.y, p.x * p.y));
        let b = a.map(|p| p.rotated_z(std::f64::consts::FRAC_PI_2) + Point3::new(3.0, -1.0, 2.0));
        let pair = align_rigid(&a, &b).unwrap();
        assert!(pair.residual < 1e-9);
        assert!((pair.rotation.determinant() - 1.0).abs() < 1e-9);
        let expect = Matrix3::new(0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert!((pair.rotation - expect).abs().max() < 1e-9);
        assert!(pair.curve_a.centroid().norm() < 1e-12);
        assert!(pair.curve_b.centroid().norm() < 1e-12);
    }

    #[test]
    fn unequal_counts_need_resampling() {
        let a = unit_square4();
        let b = resample_by_arclength(&a, 8).unwrap();
        assert!(matches!(
            align_rigid(&a, &b),
            Err(Error::ResampleRequired { left: 4, right: 8 })
        ));
    }

    #[test]
    fn curve_distance_examples() {
        let a = [Point3::ORIGIN];
        let b = [Point3::new(3.0, 4.0, 0.0)];
        assert_eq!(discrete_hausdorff(&a, &b).unwrap(), 5.0);
        let line: Vec<Point3> = (0..5).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        let shifted: Vec<Point3> = line
            .iter()
            .map(|&p| p + Point3::new(0.0, 0.25, 0.0))
            .collect();
        assert_eq!(discrete_frechet(&line, &shifted).unwrap(), 0.25);
        assert_eq!(discrete_frechet(&line, &line).unwrap(), 0.0);
        assert!(discrete_frechet(&[], &line).is_err());
    }
}
