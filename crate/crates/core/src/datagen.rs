//! Kinematic fold generator: flat rectangles, rigid hinge folds, the
//! 12-class synthetic database and the three folding sequences.
//!
//! The cloth is a unit square with five segments per side unless stated
//! otherwise. Every hinge in the catalog crosses the boundary inside the
//! middle segment of a side, so the segments picked by
//! [`default_edge_selection`](crate::cloth::default_edge_selection) are never split.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloth::ClothConfiguration;
use crate::error::{Error, Result};
use crate::geometry::{Point3, Polyline3};

/// Layer offset as a fraction of the shorter side.
pub const DEFAULT_LAYER_OFFSET_FRACTION: f64 = 1e-3;
/// Relative separation below which a generated boundary counts as self-intersecting.
pub const SIMPLE_RTOL: f64 = 1e-9;
/// Attempts per sample before a jittered recipe is reported as degenerate.
pub const RETRY_CAP: usize = 20;
pub const DEFAULT_SEGMENTS_PER_SIDE: usize = 5;
pub const DEFAULT_JITTER: f64 = 0.03;
pub const DEFAULT_SAMPLES_PER_CLASS: usize = 10;
pub const DEFAULT_SEED: u64 = 7;

/// Flat `width × height` rectangle in `z = 0`, counterclockwise from the
/// origin corner, `segments_per_side` equal segments on every side.
pub fn make_flat(width: f64, height: f64, segments_per_side: usize) -> Result<ClothConfiguration> {
    if !(width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0) {
        return Err(Error::InvalidConfiguration(format!(
            "invalid dimensions {width} × {height}"
        )));
    }
    let n = segments_per_side;
    if n < 3 {
        return Err(Error::SideTooCoarse {
            side: 0,
            segments: n,
            required: 3,
        });
    }
    let t = |i: usize| i as f64 / n as f64;
    let mut v = Vec::with_capacity(4 * n);
    v.extend((0..n).map(|i| Point3::new(width * t(i), 0.0, 0.0)));
    v.extend((0..n).map(|i| Point3::new(width, height * t(i), 0.0)));
    v.extend((0..n).map(|i| Point3::new(width * (1.0 - t(i)), height, 0.0)));
    v.extend((0..n).map(|i| Point3::new(0.0, height * (1.0 - t(i)), 0.0)));
    ClothConfiguration::new(Polyline3::new(v, true)?, [0, n, 2 * n, 3 * n], "flat")
}

/// Which side of the directed hinge line moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MovingSide {
    Left,
    Right,
}

/// Whether the moving part swings up over the cloth or down beneath it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldSense {
    Over,
    Under,
}

/// A rigid fold about a line in the table plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldSpec {
    pub hinge_point: [f64; 2],
    pub hinge_direction: [f64; 2],
    pub angle: f64,
    pub side: MovingSide,
    pub sense: FoldSense,
    pub layer_offset: f64,
}

impl FoldSpec {
    /// Fold of everything on the side of `a → b` that contains `target`.
    pub fn through(a: [f64; 2], b: [f64; 2], target: [f64; 2], sense: FoldSense) -> Self {
        let d = [b[0] - a[0], b[1] - a[1]];
        let s = d[0] * (target[1] - a[1]) - d[1] * (target[0] - a[0]);
        Self {
            hinge_point: a,
            hinge_direction: d,
            angle: PI,
            side: if s > 0.0 {
                MovingSide::Left
            } else {
                MovingSide::Right
            },
            sense,
            layer_offset: DEFAULT_LAYER_OFFSET_FRACTION,
        }
    }

    pub fn with_angle(mut self, angle: f64) -> Self {
        self.angle = angle;
        self
    }

    pub fn with_layer_offset(mut self, offset: f64) -> Self {
        self.layer_offset = offset;
        self
    }

    fn validate(&self) -> Result<[f64; 2]> {
        if !(self.angle.is_finite() && (0.0..=PI).contains(&self.angle)) {
            return Err(Error::InvalidFold(format!(
                "angle {} outside [0, π]",
                self.angle
            )));
        }
        if !(self.layer_offset.is_finite() && self.layer_offset > 0.0) {
            return Err(Error::InvalidFold(format!(
                "layer offset {} must be positive",
                self.layer_offset
            )));
        }
        let [dx, dy] = self.hinge_direction;
        let len = dx.hypot(dy);
        if !(len.is_finite() && len > 0.0) || !self.hinge_point.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidFold("degenerate hinge line".into()));
        }
        Ok([dx / len, dy / len])
    }
}

/// Rotate the part of the cloth on `f.side` of the hinge line by `f.angle`.
///
/// Segments crossing the hinge are split at the crossing; the new vertices
/// and any vertex on the line stay put. The rotation axis sits at the mean
/// height of those hinge vertices. At `angle = π` the moving part is
/// reflected exactly and then shifted so it rests `layer_offset` above
/// (over) or below (under) every fixed vertex.
pub fn apply_fold(config: &ClothConfiguration, f: &FoldSpec) -> Result<ClothConfiguration> {
    let dir = f.validate()?;
    if f.angle == 0.0 {
        return Ok(config.clone());
    }
    let normal = [-dir[1], dir[0]];
    let [hx, hy] = f.hinge_point;
    let side_of = |p: Point3| (p.x - hx) * normal[0] + (p.y - hy) * normal[1];
    let tol = 1e-12 * config.boundary().length();
    let moving_sign = match f.side {
        MovingSide::Left => 1.0,
        MovingSide::Right => -1.0,
    };
    let class = |s: f64| {
        if s.abs() <= tol {
            0
        } else if s * moving_sign > 0.0 {
            1
        } else {
            -1
        }
    };

    let old = config.boundary().vertices();
    let n = old.len();
    let mut verts = Vec::with_capacity(n + 4);
    let mut kinds = Vec::with_capacity(n + 4);
    let mut new_index = Vec::with_capacity(n);
    for i in 0..n {
        let p = old[i];
        let q = old[(i + 1) % n];
        let (sp, sq) = (side_of(p), side_of(q));
        new_index.push(verts.len());
        verts.push(p);
        kinds.push(class(sp));
        if class(sp) * class(sq) < 0 {
            let t = sp / (sp - sq);
            verts.push(p + (q - p) * t);
            kinds.push(0);
        }
    }
    if !kinds.contains(&1) {
        return Err(Error::InvalidFold(
            "hinge leaves nothing on the moving side".into(),
        ));
    }
    if !kinds.contains(&-1) {
        return Err(Error::InvalidFold(
            "hinge leaves nothing on the fixed side".into(),
        ));
    }
    let hinge_z: Vec<f64> = verts
        .iter()
        .zip(&kinds)
        .filter(|(_, &k)| k == 0)
        .map(|(p, _)| p.z)
        .collect();
    let zh = hinge_z.iter().sum::<f64>() / hinge_z.len() as f64;

    if f.angle == PI {
        for (p, _) in verts.iter_mut().zip(&kinds).filter(|(_, &k)| k == 1) {
            let s = side_of(*p);
            *p = Point3::new(
                p.x - 2.0 * s * normal[0],
                p.y - 2.0 * s * normal[1],
                2.0 * zh - p.z,
            );
        }
        let fixed = || {
            verts
                .iter()
                .zip(&kinds)
                .filter(|(_, &k)| k != 1)
                .map(|(p, _)| p.z)
        };
        let moving = || {
            verts
                .iter()
                .zip(&kinds)
                .filter(|(_, &k)| k == 1)
                .map(|(p, _)| p.z)
        };
        let shift = match f.sense {
            FoldSense::Over => {
                fixed().fold(f64::NEG_INFINITY, f64::max) + f.layer_offset
                    - moving().fold(f64::INFINITY, f64::min)
            }
            FoldSense::Under => {
                fixed().fold(f64::INFINITY, f64::min)
                    - f.layer_offset
                    - moving().fold(f64::NEG_INFINITY, f64::max)
            }
        };
        for (p, _) in verts.iter_mut().zip(&kinds).filter(|(_, &k)| k == 1) {
            p.z += shift;
        }
    } else {
        // Positive rotation about the hinge direction lifts the left side.
        let up = match (f.side, f.sense) {
            (MovingSide::Left, FoldSense::Over) | (MovingSide::Right, FoldSense::Under) => 1.0,
            _ => -1.0,
        };
        let theta = up * f.angle;
        let (sin, cos) = theta.sin_cos();
        let u = Point3::new(dir[0], dir[1], 0.0);
        let origin = Point3::new(hx, hy, zh);
        for (p, _) in verts.iter_mut().zip(&kinds).filter(|(_, &k)| k == 1) {
            let r = *p - origin;
            let rotated = r * cos + u.cross(r) * sin + u * (u.dot(r) * (1.0 - cos));
            *p = origin + rotated;
        }
    }

    let corners = config.corners().map(|c| new_index[c]);
    let boundary = Polyline3::new(verts, true)?;
    let mut out = ClothConfiguration::new(boundary, corners, config.name.clone())?;
    out.class_label = config.class_label.clone();
    out.frame_index = config.frame_index;
    Ok(out)
}

pub fn apply_folds(config: &ClothConfiguration, folds: &[FoldSpec]) -> Result<ClothConfiguration> {
    folds
        .iter()
        .try_fold(config.clone(), |c, f| apply_fold(&c, f))
}

/// Hinge cutting off corner `k` of the unit square, crossing both adjacent
/// sides at distance `a` from the corner.
pub fn corner_fold(k: usize, a: f64, sense: FoldSense) -> FoldSpec {
    let c = UNIT_CORNERS[k % 4];
    let prev = UNIT_CORNERS[(k + 3) % 4];
    let next = UNIT_CORNERS[(k + 1) % 4];
    let toward = |q: [f64; 2]| [c[0] + a * (q[0] - c[0]), c[1] + a * (q[1] - c[1])];
    FoldSpec::through(toward(next), toward(prev), c, sense)
}

const UNIT_CORNERS: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

/// Offset of half-fold hinges from the midline, toward the moving half.
pub const HALF_FOLD_MARGIN: f64 = 0.04;

/// Fold of the unit square roughly in half, vertical (`x` = const) or
/// horizontal, moving the part containing `target`. The hinge sits
/// [`HALF_FOLD_MARGIN`] past the midline so the folded flap ends inside the
/// fixed layer rather than flush with its edge.
pub fn half_fold(vertical: bool, target: [f64; 2], sense: FoldSense) -> FoldSpec {
    let axis = if vertical { target[0] } else { target[1] };
    let h = 0.5 + HALF_FOLD_MARGIN * (axis - 0.5).signum();
    if vertical {
        FoldSpec::through([h, 0.0], [h, 1.0], target, sense)
    } else {
        FoldSpec::through([0.0, h], [1.0, h], target, sense)
    }
}

/// Recipe for one class of the synthetic database. Sample `i` uses
/// variant `i mod variants.len()`. Jitter perturbs each fold's angle and
/// hinge tilt by up to `jitter` radians and shifts the hinge by up to
/// `jitter` side lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRecipe {
    pub class_id: u8,
    pub description: String,
    pub variants: Vec<Vec<FoldSpec>>,
    pub jitter: f64,
}

impl ClassRecipe {
    pub fn label(&self) -> String {
        format!("{:02}", self.class_id)
    }

    fn validate(&self) -> Result<()> {
        if !(1..=12).contains(&self.class_id) {
            return Err(Error::InvalidFold(format!(
                "class id {} not in 1..12",
                self.class_id
            )));
        }
        if !(self.jitter.is_finite() && self.jitter >= 0.0) {
            return Err(Error::InvalidFold(format!(
                "jitter {} must be ≥ 0",
                self.jitter
            )));
        }
        if self.variants.is_empty() {
            return Err(Error::InvalidFold("recipe has no variants".into()));
        }
        for f in self.variants.iter().flatten() {
            f.validate()?;
        }
        Ok(())
    }
}

/// The twelve class recipes, with the given jitter.
pub fn class_catalog(jitter: f64) -> Vec<ClassRecipe> {
    use FoldSense::{Over, Under};
    let recipe = |id: u8, description: &str, variants: Vec<Vec<FoldSpec>>| ClassRecipe {
        class_id: id,
        description: description.into(),
        variants,
        jitter,
    };
    let top = [0.5, 1.0];
    let bottom = [0.5, 0.0];
    let left = [0.0, 0.5];
    let right = [1.0, 0.5];
    vec![
        recipe(
            1,
            "flat",
            vec![vec![half_fold(false, top, Over).with_angle(0.0)]],
        ),
        recipe(
            2,
            "upper-right corner folded over",
            vec![vec![corner_fold(2, 0.5, Over)]],
        ),
        recipe(
            3,
            "top half folded over the bottom half",
            vec![vec![half_fold(false, top, Over)]],
        ),
        recipe(
            4,
            "upper-right corner partially lifted",
            vec![vec![corner_fold(2, 0.5, Over).with_angle(0.35 * PI)]],
        ),
        recipe(
            5,
            "two adjacent corners folded over, not crossing",
            vec![
                vec![corner_fold(2, 0.45, Over), corner_fold(3, 0.45, Over)],
                vec![corner_fold(1, 0.45, Over), corner_fold(2, 0.45, Over)],
                vec![corner_fold(3, 0.45, Over), corner_fold(0, 0.45, Over)],
            ],
        ),
        recipe(
            6,
            "right half folded over the left half",
            vec![vec![half_fold(true, right, Over)]],
        ),
        recipe(
            7,
            "two opposite corners folded over",
            vec![
                vec![corner_fold(0, 0.45, Over), corner_fold(2, 0.45, Over)],
                vec![corner_fold(1, 0.45, Over), corner_fold(3, 0.45, Over)],
                vec![corner_fold(2, 0.45, Over), corner_fold(0, 0.45, Over)],
            ],
        ),
        recipe(
            8,
            "three corners folded over",
            vec![
                vec![
                    corner_fold(1, 0.45, Over),
                    corner_fold(2, 0.45, Over),
                    corner_fold(3, 0.45, Over),
                ],
                vec![
                    corner_fold(2, 0.45, Over),
                    corner_fold(3, 0.45, Over),
                    corner_fold(0, 0.45, Over),
                ],
                vec![
                    corner_fold(3, 0.45, Over),
                    corner_fold(0, 0.45, Over),
                    corner_fold(1, 0.45, Over),
                ],
            ],
        ),
        recipe(
            9,
            "left half folded under the right half",
            vec![vec![half_fold(true, left, Under)]],
        ),
        recipe(
            10,
            "upper-left corner folded under",
            vec![vec![corner_fold(3, 0.5, Under)]],
        ),
        recipe(
            11,
            "bottom half folded under the top half",
            vec![vec![half_fold(false, bottom, Under)]],
        ),
        recipe(
            12,
            "two top corners folded under, crossing",
            vec![vec![
                corner_fold(2, 0.55, Under),
                corner_fold(3, 0.55, Under),
            ]],
        ),
    ]
}

/// Class ids whose samples fall into visibly separate subgroups.
pub const DISPERSED_CLASSES: [u8; 3] = [5, 7, 8];

/// Representatives per class for nearest-representative classification.
pub fn default_representative_counts() -> BTreeMap<String, usize> {
    DISPERSED_CLASSES
        .iter()
        .map(|id| (format!("{id:02}"), 3))
        .collect()
}

fn jittered(f: &FoldSpec, jitter: f64, side: f64, rng: &mut ChaCha8Rng) -> FoldSpec {
    let mut g = *f;
    if jitter > 0.0 {
        let [dx, dy] = f.hinge_direction;
        let len = dx.hypot(dy);
        let shift = rng.gen_range(-jitter..=jitter) * side;
        g.hinge_point = [
            f.hinge_point[0] - dy / len * shift,
            f.hinge_point[1] + dx / len * shift,
        ];
        let (sin, cos) = rng.gen_range(-jitter..=jitter).sin_cos();
        g.hinge_direction = [dx * cos - dy * sin, dx * sin + dy * cos];
        g.angle = (f.angle + rng.gen_range(-jitter..=jitter)).clamp(0.0, PI);
    }
    g
}

fn class_seed(seed: u64, class_id: u8) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ u64::from(class_id)
}

/// `n_samples` jittered configurations of one class, named `cNN_sMM`.
pub fn generate_class(
    recipe: &ClassRecipe,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<ClothConfiguration>> {
    recipe.validate()?;
    let flat = make_flat(1.0, 1.0, DEFAULT_SEGMENTS_PER_SIDE)?;
    let mut rng = ChaCha8Rng::seed_from_u64(class_seed(seed, recipe.class_id));
    let label = recipe.label();
    let mut out = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let folds = &recipe.variants[i % recipe.variants.len()];
        let mut last = String::new();
        let mut sample = None;
        for _ in 0..RETRY_CAP {
            let js: Vec<FoldSpec> = folds
                .iter()
                .map(|f| jittered(f, recipe.jitter, 1.0, &mut rng))
                .collect();
            match apply_folds(&flat, &js) {
                Ok(c) if c.is_simple(SIMPLE_RTOL) => {
                    sample = Some(c);
                    break;
                }
                Ok(_) => last = "boundary self-intersects".into(),
                Err(e) => last = e.to_string(),
            }
        }
        let mut c = sample.ok_or(Error::DegenerateFold {
            attempts: RETRY_CAP,
            reason: last,
        })?;
        c.name = format!("c{label}_s{i:02}");
        out.push(c.with_class(label.clone()));
    }
    Ok(out)
}

/// All twelve classes, `n_per_class` samples each, ordered by class.
pub fn generate_database(
    n_per_class: usize,
    jitter: f64,
    seed: u64,
) -> Result<Vec<ClothConfiguration>> {
    let mut all = Vec::with_capacity(12 * n_per_class);
    for recipe in class_catalog(jitter) {
        all.extend(generate_class(&recipe, n_per_class, seed)?);
    }
    Ok(all)
}

/// Frames of a folding motion: frame 0 is `base`, then each fold sweeps
/// its angle from `π / (frames_per_fold − 1)` up to `π`, applied on top of
/// the previous folds at `π`.
pub fn generate_sequence(
    base: &ClothConfiguration,
    folds: &[FoldSpec],
    frames_per_fold: usize,
) -> Result<Vec<ClothConfiguration>> {
    if frames_per_fold < 2 {
        return Err(Error::InvalidFold(format!(
            "frames per fold {frames_per_fold} < 2"
        )));
    }
    let mut frames = vec![base.clone()];
    let mut done = base.clone();
    for f in folds {
        let steps = frames_per_fold - 1;
        for k in 1..=steps {
            let angle = if k == steps {
                PI
            } else {
                PI * k as f64 / steps as f64
            };
            frames.push(apply_fold(&done, &f.with_angle(angle))?);
        }
        done = frames.last().expect("non-empty").clone();
    }
    for (i, fr) in frames.iter_mut().enumerate() {
        fr.frame_index = Some(i as u32);
        fr.name = format!("frame{i:03}");
    }
    Ok(frames)
}

/// The three built-in folding motions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BuiltinSequence {
    /// Two opposite corners, one after the other.
    OppositeCorners = 1,
    /// All four corners folded inwards.
    FourCorners = 2,
    /// Right half folded over the left half.
    FoldInHalf = 3,
}

impl BuiltinSequence {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Self::OppositeCorners),
            2 => Ok(Self::FourCorners),
            3 => Ok(Self::FoldInHalf),
            _ => Err(Error::InvalidFold(format!("no built-in sequence {i}"))),
        }
    }

    pub fn folds(self) -> Vec<FoldSpec> {
        use FoldSense::Over;
        match self {
            Self::OppositeCorners => vec![corner_fold(0, 0.45, Over), corner_fold(2, 0.45, Over)],
            Self::FourCorners => (0..4).map(|k| corner_fold(k, 0.45, Over)).collect(),
            Self::FoldInHalf => vec![half_fold(true, [1.0, 0.5], Over)],
        }
    }

    pub fn generate(self, frames_per_fold: usize) -> Result<Vec<ClothConfiguration>> {
        let flat = make_flat(1.0, 1.0, DEFAULT_SEGMENTS_PER_SIDE)?;
        generate_sequence(&flat, &self.folds(), frames_per_fold)
    }
}
