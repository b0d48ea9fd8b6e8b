//! Cloth configurations and their dGLI coordinates.

use crate::error::{Error, Result};
use crate::geometry::{
    dgli_segments, segment_distance, PerturbationSpec, Point3, Polyline3, Segment, SINGULAR_RTOL,
};

/// Minimum number of segments on each side between consecutive corners.
pub const MIN_SIDE_SEGMENTS: usize = 3;

/// One cloth state: a closed boundary polyline with four labeled corners.
///
/// Corner `k` sits at vertex `corners[k]`; side `k` runs from corner `k` to
/// corner `k + 1` (wrapping), and segment `i` runs from vertex `i` to `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClothConfiguration {
    boundary: Polyline3,
    corners: [usize; 4],
    pub name: String,
    pub class_label: Option<String>,
    pub frame_index: Option<u32>,
}

impl ClothConfiguration {
    pub fn new(boundary: Polyline3, corners: [usize; 4], name: impl Into<String>) -> Result<Self> {
        if !boundary.is_closed() {
            return Err(Error::InvalidConfiguration("open boundary".into()));
        }
        let n = boundary.len();
        if corners.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfiguration(format!(
                "corners not increasing: {corners:?}"
            )));
        }
        if corners[3] >= n {
            return Err(Error::InvalidConfiguration(format!(
                "corner index {} out of range for {n} vertices",
                corners[3]
            )));
        }
        let config = Self {
            boundary,
            corners,
            name: name.into(),
            class_label: None,
            frame_index: None,
        };
        for side in 0..4 {
            let segments = config.side_len(side);
            if segments < MIN_SIDE_SEGMENTS {
                return Err(Error::SideTooCoarse {
                    side,
                    segments,
                    required: MIN_SIDE_SEGMENTS,
                });
            }
        }
        if !config.is_simple(SINGULAR_RTOL) {
            return Err(Error::InvalidConfiguration(
                "boundary self-intersects".into(),
            ));
        }
        Ok(config)
    }

    pub fn with_class(mut self, label: impl Into<String>) -> Self {
        self.class_label = Some(label.into());
        self
    }

    pub fn with_frame(mut self, frame: u32) -> Self {
        self.frame_index = Some(frame);
        self
    }

    pub fn boundary(&self) -> &Polyline3 {
        &self.boundary
    }

    pub fn corners(&self) -> [usize; 4] {
        self.corners
    }

    pub fn corner_points(&self) -> [Point3; 4] {
        self.corners.map(|i| self.boundary.vertices()[i])
    }

    pub fn vertex_count(&self) -> usize {
        self.boundary.len()
    }

    pub fn segment_count(&self) -> usize {
        self.boundary.segment_count()
    }

    pub fn segment(&self, i: usize) -> Segment {
        self.boundary.segment(i)
    }

    /// Number of segments on side `side` (0..4).
    pub fn side_len(&self, side: usize) -> usize {
        let n = self.boundary.len();
        let from = self.corners[side];
        let to = self.corners[(side + 1) % 4];
        (to + n - from) % n
    }

    /// Boundary vertices listed from corner 0 onwards.
    pub fn boundary_from_corner0(&self) -> Polyline3 {
        let v = self.boundary.vertices();
        let start = self.corners[0];
        let rotated = v[start..].iter().chain(&v[..start]).copied().collect();
        Polyline3::from_parts(rotated, true)
    }

    /// Same configuration with every vertex mapped through `f`.
    pub fn map_vertices(&self, f: impl Fn(Point3) -> Point3) -> Result<Self> {
        let moved = Polyline3::new(self.boundary.map(f).vertices().to_vec(), true)?;
        Ok(Self {
            boundary: moved,
            ..self.clone()
        })
    }

    /// Rotation about the z-axis through the origin followed by a translation.
    pub fn rigid_z(&self, angle: f64, translation: Point3) -> Result<Self> {
        self.map_vertices(|p| p.rotated_z(angle) + translation)
    }

    /// Uniform scaling about the vertex centroid.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let c = self.boundary.centroid();
        self.map_vertices(|p| c + (p - c) * factor)
    }

    /// Smallest distance between two non-adjacent boundary segments.
    pub fn min_nonadjacent_separation(&self) -> f64 {
        let n = self.segment_count();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let si = self.segment(i);
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                best = best.min(segment_distance(&si, &self.segment(j)));
            }
        }
        best
    }

    /// True when no two non-adjacent segments come closer than `rtol` times
    /// the boundary length.
    pub fn is_simple(&self, rtol: f64) -> bool {
        self.min_nonadjacent_separation() > rtol * self.boundary.length()
    }
}

/// Ordered set of boundary segment indices whose pairwise dGLI form the coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSelection {
    indices: Vec<usize>,
}

impl EdgeSelection {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.len() < 2 {
            return Err(Error::InvalidSelection(format!(
                "need at least 2 segments, got {}",
                indices.len()
            )));
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSelection(format!(
                "duplicate segment index in {indices:?}"
            )));
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    fn check_against(&self, config: &ClothConfiguration) -> Result<()> {
        let n = config.segment_count();
        match self.indices.iter().find(|&&i| i >= n) {
            Some(i) => Err(Error::InvalidSelection(format!(
                "segment index {i} out of range for {n} segments"
            ))),
            None => Ok(()),
        }
    }
}

/// The eight segments one step in from the corners: on every side, the
/// second segment after its start corner and the second-to-last before its
/// end corner, listed in traversal order from corner 0.
///
/// Sides need at least four segments; with three, both picks would land on
/// the middle segment.
pub fn default_edge_selection(config: &ClothConfiguration) -> Result<EdgeSelection> {
    let n = config.segment_count();
    let mut indices = Vec::with_capacity(8);
    for side in 0..4 {
        let len = config.side_len(side);
        if len < 4 {
            return Err(Error::SideTooCoarse {
                side,
                segments: len,
                required: 4,
            });
        }
        let start = config.corners()[side];
        indices.push((start + 1) % n);
        indices.push((start + len - 2) % n);
    }
    EdgeSelection::new(indices)
}

/// Upper-triangle dGLI values for a selection of `m` segments, stored row-major:
/// `(0,1), (0,2), …, (0,m−1), (1,2), …, (m−2,m−1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DgliCoordinates {
    values: Vec<f64>,
    clamped: Vec<bool>,
    m: usize,
}

impl DgliCoordinates {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Per-entry clamp flags, same order as [`values`](Self::values).
    pub fn clamped(&self) -> &[bool] {
        &self.clamped
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn clamped_count(&self) -> usize {
        self.clamped.iter().filter(|&&c| c).count()
    }

    /// Every entry hit the clamp; the vector carries no ordering information.
    pub fn all_clamped(&self) -> bool {
        self.clamped.iter().all(|&c| c)
    }

    /// Position of pair `(i, j)`, `i < j < m`, in the flat vector.
    pub fn pair_index(m: usize, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < m);
        i * (2 * m - i - 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.values[Self::pair_index(self.m, i, j)]
    }

    /// `m × m` layout with the strict upper triangle filled in.
    pub fn upper_triangle(&self) -> Vec<Vec<Option<f64>>> {
        (0..self.m)
            .map(|i| {
                (0..self.m)
                    .map(|j| (j > i).then(|| self.get(i, j)))
                    .collect()
            })
            .collect()
    }
}

/// dGLI coordinates along the perturbation direction stored in `p`.
pub fn compute_coordinates(
    config: &ClothConfiguration,
    selection: &EdgeSelection,
    p: &PerturbationSpec,
) -> Result<DgliCoordinates> {
    selection.check_against(config)?;
    let segments: Vec<Segment> = selection
        .indices()
        .iter()
        .map(|&i| config.segment(i))
        .collect();
    let m = segments.len();
    let mut values = Vec::with_capacity(m * (m - 1) / 2);
    let mut clamped = Vec::with_capacity(values.capacity());
    for i in 0..m {
        for j in (i + 1)..m {
            let d = dgli_segments(&segments[i], &segments[j], p);
            values.push(d.value);
            clamped.push(d.clamped);
        }
    }
    Ok(DgliCoordinates { values, clamped, m })
}

/// dGLI coordinates along an arbitrary unit direction, keeping `p`'s epsilon and clamp.
pub fn compute_coordinates_general_v(
    config: &ClothConfiguration,
    selection: &EdgeSelection,
    direction: Point3,
    p: &PerturbationSpec,
) -> Result<DgliCoordinates> {
    compute_coordinates(config, selection, &p.with_direction(direction)?)
}

/// Default selection and default perturbation in one call.
pub fn cloth_coordinates(config: &ClothConfiguration) -> Result<DgliCoordinates> {
    let selection = default_edge_selection(config)?;
    compute_coordinates(config, &selection, &PerturbationSpec::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(per_side: usize) -> ClothConfiguration {
        rectangle(1.0, 1.0, per_side, per_side)
    }

    fn rectangle(w: f64, h: f64, nx: usize, ny: usize) -> ClothConfiguration {
        let mut v = Vec::new();
        for i in 0..nx {
            v.push(Point3::new(w * i as f64 / nx as f64, 0.0, 0.0));
        }
        for i in 0..ny {
            v.push(Point3::new(w, h * i as f64 / ny as f64, 0.0));
        }
        for i in 0..nx {
            v.push(Point3::new(w - w * i as f64 / nx as f64, h, 0.0));
        }
        for i in 0..ny {
            v.push(Point3::new(0.0, h - h * i as f64 / ny as f64, 0.0));
        }
        let corners = [0, nx, nx + ny, 2 * nx + ny];
        ClothConfiguration::new(Polyline3::new(v, true).unwrap(), corners, "rect").unwrap()
    }

    #[test]
    fn default_selection_on_five_per_side() {
        let sel = default_edge_selection(&square(5)).unwrap();
        assert_eq!(sel.indices(), &[1, 3, 6, 8, 11, 13, 16, 18]);
    }

    #[test]
    fn three_segment_side_is_too_coarse_for_selection() {
        let config = square(3);
        assert!(matches!(
            default_edge_selection(&config),
            Err(Error::SideTooCoarse { required: 4, .. })
        ));
    }

    #[test]
    fn rectangular_selection_has_two_per_side() {
        let config = rectangle(2.0, 1.0, 6, 4);
        let sel = default_edge_selection(&config).unwrap();
        assert_eq!(sel.indices(), &[1, 4, 7, 8, 11, 14, 17, 18]);
    }

    #[test]
    fn selection_starts_at_corner_zero_when_it_is_not_vertex_zero() {
        let base = square(5);
        let v = base.boundary().vertices();
        let shifted: Vec<Point3> = v[18..].iter().chain(&v[..18]).copied().collect();
        let config = ClothConfiguration::new(
            Polyline3::new(shifted, true).unwrap(),
            [2, 7, 12, 17],
            "shifted",
        )
        .unwrap();
        let sel = default_edge_selection(&config).unwrap();
        assert_eq!(sel.indices(), &[3, 5, 8, 10, 13, 15, 18, 0]);
        assert_eq!(
            cloth_coordinates(&config).unwrap(),
            cloth_coordinates(&base).unwrap()
        );
    }

    #[test]
    fn configuration_validation() {
        let base = square(5);
        let poly = base.boundary().clone();
        assert!(matches!(
            ClothConfiguration::new(poly.clone(), [0, 5, 5, 15], "x"),
            Err(Error::InvalidConfiguration(_))
        ));
        assert!(matches!(
            ClothConfiguration::new(poly.clone(), [0, 2, 10, 15], "x"),
            Err(Error::SideTooCoarse { side: 0, .. })
        ));
        assert!(ClothConfiguration::new(poly.clone(), [0, 5, 10, 25], "x").is_err());
        let open = Polyline3::new(poly.vertices().to_vec(), false).unwrap();
        assert!(ClothConfiguration::new(open, [0, 5, 10, 15], "x").is_err());
    }

    #[test]
    fn selection_rejects_duplicates() {
        assert!(EdgeSelection::new(vec![1, 3, 1]).is_err());
        assert!(EdgeSelection::new(vec![4]).is_err());
        let sel = EdgeSelection::new(vec![0, 99]).unwrap();
        assert!(compute_coordinates(&square(5), &sel, &PerturbationSpec::default()).is_err());
    }

    #[test]
    fn pair_index_is_row_major() {
        let m = 8;
        let mut k = 0;
        for i in 0..m {
            for j in (i + 1)..m {
                assert_eq!(DgliCoordinates::pair_index(m, i, j), k);
                k += 1;
            }
        }
        assert_eq!(k, 28);
    }

    #[test]
    fn flat_square_has_28_unclamped_coordinates() {
        let c = cloth_coordinates(&square(5)).unwrap();
        assert_eq!(c.len(), 28);
        assert_eq!(c.m(), 8);
        assert_eq!(c.clamped_count(), 0);
        // Same-side pairs are collinear and stay coplanar under the push.
        for (i, j) in [(0, 1), (2, 3), (4, 5), (6, 7)] {
            assert_eq!(c.get(i, j), 0.0);
        }
        assert!(c.values().iter().any(|v| v.abs() > 0.1));
        let tri = c.upper_triangle();
        assert_eq!(tri[0][1], Some(c.get(0, 1)));
        assert_eq!(tri[1][0], None);
    }

    #[test]
    fn four_per_side_clamps_touching_picks() {
        let c = cloth_coordinates(&square(4)).unwrap();
        assert_eq!(c.clamped_count(), 4);
        assert!(!c.all_clamped());
    }

    #[test]
    fn self_intersecting_boundary_is_rejected() {
        let base = square(5);
        let mut v = base.boundary().vertices().to_vec();
        // Drag a bottom vertex up through the top side.
        v[2] = Point3::new(0.4, 1.5, 0.0);
        let poly = Polyline3::new(v, true).unwrap();
        assert!(matches!(
            ClothConfiguration::new(poly, [0, 5, 10, 15], "x"),
            Err(Error::InvalidConfiguration(_))
        ));
    }

    #[test]
    fn reversed_direction_negates_coordinates() {
        let config = square(5)
            .map_vertices(|p| Point3::new(p.x, p.y, 0.2 * p.x * p.y))
            .unwrap();
        let sel = default_edge_selection(&config).unwrap();
        let p = PerturbationSpec::default();
        let up = compute_coordinates_general_v(&config, &sel, Point3::E3, &p).unwrap();
        let down = compute_coordinates_general_v(&config, &sel, -Point3::E3, &p).unwrap();
        assert_eq!(up, compute_coordinates(&config, &sel, &p).unwrap());
        for (a, b) in up.values().iter().zip(down.values()) {
            assert!((a + b).abs() <= 1e-6 * a.abs().max(1e-9), "{a} vs {b}");
        }
    }

    #[test]
    fn in_plane_direction_gives_zero_on_flat_cloth() {
        let config = square(5);
        let sel = default_edge_selection(&config).unwrap();
        let c =
            compute_coordinates_general_v(&config, &sel, Point3::E1, &PerturbationSpec::default())
                .unwrap();
        assert!(c.values().iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn boundary_from_corner0_starts_at_corner() {
        let base = square(5);
        let b = base.boundary_from_corner0();
        assert_eq!(b.vertices()[0], base.corner_points()[0]);
        assert!(base.is_simple(1e-9));
    }
}
