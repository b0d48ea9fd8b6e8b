//! Browser bindings: fold a square cloth, look at its dGLI coordinates,
//! classify it against the synthetic database, and render a sequence
//! confusion matrix.

use std::cell::OnceCell;

use dgli_core::analysis::{
    choose_representatives, classify_nearest, confusion_matrix, extract, extract_all,
    sign_change_frames, Features, Metric, Representation, RepresentativeSet,
};
use dgli_core::cloth::{cloth_coordinates, default_edge_selection, ClothConfiguration};
use dgli_core::datagen::{
    apply_fold, class_catalog, corner_fold, default_representative_counts, generate_database,
    make_flat, BuiltinSequence, FoldSense, DEFAULT_JITTER, DEFAULT_SEED,
};
use dgli_core::io::heatmap_svg;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const DEMO_SAMPLES_PER_CLASS: usize = 6;

#[derive(Serialize)]
struct FoldView {
    vertices: Vec<[f64; 3]>,
    corners: [usize; 4],
    selection: Vec<usize>,
    coords: Vec<f64>,
    clamped: Vec<bool>,
}

#[derive(Serialize)]
struct Verdict {
    label: String,
    description: String,
}

#[derive(Serialize)]
struct SequenceView {
    svg: String,
    frames: usize,
    sign_changes: Vec<usize>,
}

/// Unit square, 5 segments per side, with corner `corner` folded along a
/// hinge `hinge` side lengths from it, by `angle_deg` degrees.
pub fn folded_square(
    corner: u8,
    hinge: f64,
    angle_deg: f64,
    over: bool,
) -> Result<ClothConfiguration, String> {
    if corner > 3 {
        return Err(format!("corner {corner} not in 0..4"));
    }
    if !(0.05..=0.95).contains(&hinge) {
        return Err(format!("hinge {hinge} not in [0.05, 0.95]"));
    }
    let flat = make_flat(1.0, 1.0, 5).map_err(|e| e.to_string())?;
    let sense = if over {
        FoldSense::Over
    } else {
        FoldSense::Under
    };
    let fold = corner_fold(usize::from(corner), hinge, sense).with_angle(angle_deg.to_radians());
    let mut folded = apply_fold(&flat, &fold).map_err(|e| e.to_string())?;
    folded.name = format!("corner{corner}_{angle_deg:.0}deg");
    Ok(folded)
}

pub fn fold_view(corner: u8, hinge: f64, angle_deg: f64, over: bool) -> Result<String, String> {
    let config = folded_square(corner, hinge, angle_deg, over)?;
    let coords = cloth_coordinates(&config).map_err(|e| e.to_string())?;
    let view = FoldView {
        vertices: config
            .boundary()
            .vertices()
            .iter()
            .map(|p| p.to_array())
            .collect(),
        corners: config.corners(),
        selection: default_edge_selection(&config)
            .map_err(|e| e.to_string())?
            .indices()
            .to_vec(),
        coords: coords.values().to_vec(),
        clamped: coords.clamped().to_vec(),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

thread_local! {
    static REPRESENTATIVES: OnceCell<RepresentativeSet> = const { OnceCell::new() };
}

fn build_representatives() -> Result<RepresentativeSet, String> {
    let db = generate_database(DEMO_SAMPLES_PER_CLASS, DEFAULT_JITTER, DEFAULT_SEED)
        .map_err(|e| e.to_string())?;
    let labels: Vec<String> = db
        .iter()
        .map(|c| c.class_label.clone().unwrap_or_default())
        .collect();
    let features = extract_all(&db, Representation::Dgli).map_err(|e| e.to_string())?;
    choose_representatives(
        &features,
        &labels,
        Metric::Spearman,
        &default_representative_counts(),
    )
    .map_err(|e| e.to_string())
}

pub fn classify_view(corner: u8, hinge: f64, angle_deg: f64, over: bool) -> Result<String, String> {
    let config = folded_square(corner, hinge, angle_deg, over)?;
    let query: Features = extract(&config, Representation::Dgli).map_err(|e| e.to_string())?;
    let label = REPRESENTATIVES.with(|cell| {
        if cell.get().is_none() {
            let _ = cell.set(build_representatives()?);
        }
        let reps = cell.get().expect("initialized above");
        classify_nearest(&query, reps, Metric::Spearman).map_err(|e| e.to_string())
    })?;
    let description = class_catalog(0.0)
        .into_iter()
        .find(|r| r.label() == label)
        .map(|r| r.description)
        .unwrap_or_default();
    serde_json::to_string(&Verdict { label, description }).map_err(|e| e.to_string())
}

pub fn sequence_view(index: u8, frames_per_fold: usize) -> Result<String, String> {
    if !(2..=60).contains(&frames_per_fold) {
        return Err(format!("frames per fold {frames_per_fold} not in 2..=60"));
    }
    let frames = BuiltinSequence::from_index(index)
        .and_then(|s| s.generate(frames_per_fold))
        .map_err(|e| e.to_string())?;
    let features = extract_all(&frames, Representation::Dgli).map_err(|e| e.to_string())?;
    let ids: Vec<String> = frames.iter().map(|c| c.name.clone()).collect();
    let m = confusion_matrix(&features, &ids, Metric::Spearman).map_err(|e| e.to_string())?;
    let coords: Vec<Vec<f64>> = features
        .iter()
        .filter_map(|f| f.as_vector().map(<[f64]>::to_vec))
        .collect();
    let view = SequenceView {
        svg: heatmap_svg(&m, None).map_err(|e| e.to_string())?,
        frames: frames.len(),
        sign_changes: sign_change_frames(&coords, 1e-9),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

/// JSON with the folded boundary and its 28 dGLI coordinates.
#[wasm_bindgen]
pub fn fold(corner: u8, hinge: f64, angle_deg: f64, over: bool) -> Result<String, JsError> {
    fold_view(corner, hinge, angle_deg, over).map_err(|e| JsError::new(&e))
}

/// JSON `{label, description}` of the nearest synthetic class.
#[wasm_bindgen]
pub fn classify(corner: u8, hinge: f64, angle_deg: f64, over: bool) -> Result<String, JsError> {
    classify_view(corner, hinge, angle_deg, over).map_err(|e| JsError::new(&e))
}

/// JSON with an SVG heatmap of a built-in sequence and its sign-change frames.
#[wasm_bindgen]
pub fn sequence(index: u8, frames_per_fold: usize) -> Result<String, JsError> {
    sequence_view(index, frames_per_fold).map_err(|e| JsError::new(&e))
}
