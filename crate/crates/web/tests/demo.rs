use dgli_core::cloth::cloth_coordinates;
use dgli_core::datagen::make_flat;
use dgli_web::{classify_view, fold_view, sequence_view};
use serde_json::Value;

fn json(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn unfolded_view_matches_the_flat_square() {
    let v = json(fold_view(2, 0.5, 0.0, true).unwrap());
    let coords: Vec<f64> = v["coords"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let flat = cloth_coordinates(&make_flat(1.0, 1.0, 5).unwrap()).unwrap();
    assert_eq!(coords, flat.values());
    assert_eq!(v["selection"].as_array().unwrap().len(), 8);
}

#[test]
fn fold_view_lifts_the_corner() {
    let v = json(fold_view(1, 0.4, 90.0, true).unwrap());
    let verts = v["vertices"].as_array().unwrap();
    let corner = v["corners"][1].as_u64().unwrap() as usize;
    assert!(verts[corner][2].as_f64().unwrap() > 0.2);
    assert_eq!(v["coords"].as_array().unwrap().len(), 28);
}

#[test]
fn full_corner_folds_land_in_their_classes() {
    for (corner, over, label) in [(2, true, "02"), (3, false, "10")] {
        let v = json(classify_view(corner, 0.5, 180.0, over).unwrap());
        println!("corner {corner}: {v}");
        assert_eq!(v["label"], label);
    }
}

#[test]
fn bad_inputs_are_reported() {
    assert!(fold_view(4, 0.5, 90.0, true).is_err());
    assert!(fold_view(0, 1.5, 90.0, true).is_err());
    assert!(sequence_view(9, 10).is_err());
    assert!(sequence_view(1, 1).is_err());
}

#[test]
fn fold_in_half_sequence_changes_sign_mid_fold() {
    let v = json(sequence_view(3, 30).unwrap());
    assert_eq!(v["frames"], 30);
    assert_eq!(v["sign_changes"][0], 15);
    assert!(v["svg"].as_str().unwrap().starts_with("<svg"));
}
