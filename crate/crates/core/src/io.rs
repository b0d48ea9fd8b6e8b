//! Configuration and manifest JSON, CSV matrices and SVG heatmaps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::analysis::{ConfusionMatrix, Metric, Representation};
use crate::cloth::ClothConfiguration;
use crate::error::{Error, Result};
use crate::geometry::{Point3, Polyline3};

#[derive(Serialize)]
struct ConfigurationOut<'a> {
    name: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    class: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frame: Option<u32>,
    vertices: Vec<[f64; 3]>,
    corner_indices: [usize; 4],
    closed: bool,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn schema(path: &Path, field: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_path_buf(),
        field: field.into(),
        message: message.into(),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {} column {}: {e}", e.line(), e.column()),
    })
}

/// Serialize a configuration. Numbers are written in shortest round-trip
/// form, so loading the text back gives bit-identical coordinates.
pub fn configuration_to_json(config: &ClothConfiguration) -> String {
    let out = ConfigurationOut {
        name: &config.name,
        class: config.class_label.as_deref(),
        frame: config.frame_index,
        vertices: config
            .boundary()
            .vertices()
            .iter()
            .map(|p| p.to_array())
            .collect(),
        corner_indices: config.corners(),
        closed: true,
    };
    let mut s = serde_json::to_string(&out).expect("configuration serializes");
    s.push('\n');
    s
}

pub fn save_configuration(config: &ClothConfiguration, path: &Path) -> Result<()> {
    write_file(path, configuration_to_json(config).as_bytes())
}

pub fn configuration_from_json(text: &str, path: &Path) -> Result<ClothConfiguration> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {} column {}: {e}", e.line(), e.column()),
    })?;
    configuration_from_value(&value, path)
}

pub fn load_configuration(path: &Path) -> Result<ClothConfiguration> {
    configuration_from_value(&read_json(path)?, path)
}

fn object<'a>(v: &'a Value, path: &Path) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| schema(path, "$", "expected a JSON object"))
}

fn configuration_from_value(v: &Value, path: &Path) -> Result<ClothConfiguration> {
    let obj = object(v, path)?;
    let name = match obj.get("name") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(schema(path, "name", "expected a string")),
        None => return Err(schema(path, "name", "missing")),
    };
    let class = match obj.get("class") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(schema(path, "class", "expected a string")),
    };
    let frame = match obj.get("frame") {
        None | Some(Value::Null) => None,
        Some(f) => Some(
            f.as_u64()
                .and_then(|f| u32::try_from(f).ok())
                .ok_or_else(|| schema(path, "frame", "expected a non-negative integer"))?,
        ),
    };
    match obj.get("closed") {
        Some(Value::Bool(true)) => {}
        Some(Value::Bool(false)) => {
            return Err(Error::InvalidConfiguration(format!(
                "{}: open boundary",
                path.display()
            )))
        }
        Some(_) => return Err(schema(path, "closed", "expected a boolean")),
        None => return Err(schema(path, "closed", "missing")),
    }
    let raw_vertices = obj
        .get("vertices")
        .ok_or_else(|| schema(path, "vertices", "missing"))?
        .as_array()
        .ok_or_else(|| schema(path, "vertices", "expected an array"))?;
    let mut vertices = Vec::with_capacity(raw_vertices.len());
    for (i, p) in raw_vertices.iter().enumerate() {
        let field = format!("vertices[{i}]");
        let coords = p
            .as_array()
            .filter(|a| a.len() == 3)
            .ok_or_else(|| schema(path, &field, "expected [x, y, z]"))?;
        let mut xyz = [0.0; 3];
        for (k, c) in coords.iter().enumerate() {
            xyz[k] = c
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| schema(path, &field, "coordinates must be finite numbers"))?;
        }
        vertices.push(Point3::from(xyz));
    }
    let raw_corners = obj
        .get("corner_indices")
        .ok_or_else(|| schema(path, "corner_indices", "missing"))?
        .as_array()
        .ok_or_else(|| schema(path, "corner_indices", "expected an array"))?;
    if raw_corners.len() != 4 {
        return Err(schema(
            path,
            "corner_indices",
            format!("expected 4 indices, got {}", raw_corners.len()),
        ));
    }
    let mut corners = [0usize; 4];
    for (k, c) in raw_corners.iter().enumerate() {
        corners[k] = c
            .as_u64()
            .and_then(|c| usize::try_from(c).ok())
            .ok_or_else(|| schema(path, "corner_indices", "expected non-negative integers"))?;
    }
    let boundary = Polyline3::new(vertices, true).map_err(|e| context(path, e))?;
    let mut config =
        ClothConfiguration::new(boundary, corners, name).map_err(|e| context(path, e))?;
    config.class_label = class;
    config.frame_index = frame;
    Ok(config)
}

fn context(path: &Path, e: Error) -> Error {
    match e {
        Error::InvalidConfiguration(m) => {
            Error::InvalidConfiguration(format!("{}: {m}", path.display()))
        }
        Error::InvalidGeometry(m) => Error::InvalidGeometry(format!("{}: {m}", path.display())),
        other => other,
    }
}

/// A list of configuration files with optional class overrides and
/// default comparison settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub representation: Option<Representation>,
    pub metric: Option<Metric>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    /// Resolved against the manifest's directory.
    pub path: PathBuf,
    pub class: Option<String>,
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let v = read_json(path)?;
    let obj = object(&v, path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let entries = obj
        .get("entries")
        .ok_or_else(|| schema(path, "entries", "missing"))?
        .as_array()
        .ok_or_else(|| schema(path, "entries", "expected an array"))?;
    let mut out = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        let field = format!("entries[{i}]");
        let (p, class) = match e {
            Value::String(s) => (s.as_str(), None),
            Value::Object(o) => {
                let p = o
                    .get("path")
                    .and_then(Value::as_str)
                    .ok_or_else(|| schema(path, &field, "missing string `path`"))?;
                let class = match o.get("class") {
                    None | Some(Value::Null) => None,
                    Some(Value::String(s)) => Some(s.clone()),
                    Some(_) => return Err(schema(path, &field, "`class` must be a string")),
                };
                (p, class)
            }
            _ => return Err(schema(path, &field, "expected a path or an object")),
        };
        out.push(ManifestEntry {
            path: base.join(p),
            class,
        });
    }
    let parse_opt = |key: &str| -> Result<Option<String>> {
        match obj.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(schema(path, key, "expected a string")),
        }
    };
    let representation = parse_opt("representation")?
        .map(|s| {
            s.parse()
                .map_err(|e: Error| schema(path, "representation", e.to_string()))
        })
        .transpose()?;
    let metric = parse_opt("metric")?
        .map(|s| {
            s.parse()
                .map_err(|e: Error| schema(path, "metric", e.to_string()))
        })
        .transpose()?;
    Ok(DatasetManifest {
        entries: out,
        representation,
        metric,
    })
}

/// Load every configuration listed in a manifest, applying class overrides.
pub fn load_dataset(manifest: &DatasetManifest) -> Result<Vec<ClothConfiguration>> {
    manifest
        .entries
        .iter()
        .map(|e| {
            let mut c = load_configuration(&e.path)?;
            if let Some(class) = &e.class {
                c.class_label = Some(class.clone());
            }
            Ok(c)
        })
        .collect()
}

/// Manifest JSON listing `files` (relative paths) with their classes.
pub fn manifest_to_json(
    files: &[(String, Option<String>)],
    representation: Option<Representation>,
    metric: Option<Metric>,
) -> String {
    let entries: Vec<Value> = files
        .iter()
        .map(|(p, c)| {
            let mut o = Map::new();
            o.insert("path".into(), Value::String(p.clone()));
            if let Some(c) = c {
                o.insert("class".into(), Value::String(c.clone()));
            }
            Value::Object(o)
        })
        .collect();
    let mut root = Map::new();
    root.insert("entries".into(), Value::Array(entries));
    if let Some(r) = representation {
        root.insert("representation".into(), Value::String(r.name().into()));
    }
    if let Some(m) = metric {
        root.insert("metric".into(), Value::String(m.name().into()));
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("manifest serializes");
    s.push('\n');
    s
}

/// Write one JSON file per configuration plus `manifest.json` into `dir`.
/// Returns every path written, manifest last.
pub fn write_dataset(dir: &Path, configs: &[ClothConfiguration]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::with_capacity(configs.len() + 1);
    let mut files = Vec::with_capacity(configs.len());
    let result = (|| {
        for c in configs {
            let file = format!("{}.json", c.name);
            let path = dir.join(&file);
            save_configuration(c, &path)?;
            written.push(path);
            files.push((file, c.class_label.clone()));
        }
        let manifest = dir.join("manifest.json");
        write_file(&manifest, manifest_to_json(&files, None, None).as_bytes())?;
        written.push(manifest);
        Ok(())
    })();
    match result {
        Ok(()) => Ok(written),
        Err(e) => {
            remove_all(&written);
            Err(e)
        }
    }
}

/// Best-effort removal of partially written outputs.
pub fn remove_all(paths: &[PathBuf]) {
    for p in paths {
        let _ = fs::remove_file(p);
    }
}

/// Write through a temporary sibling and rename, so a failed write leaves nothing behind.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".part");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)
        .and_then(|_| fs::rename(&tmp, path))
        .map_err(|e| {
            let _ = fs::remove_file(&tmp);
            Error::Io {
                path: path.to_path_buf(),
                source: e,
            }
        })
}

/// Matrix as CSV: header row and first column hold sample ids, cells carry
/// 9 significant digits.
pub fn matrix_to_csv(m: &ConfusionMatrix) -> String {
    let mut s = String::new();
    s.push_str("id");
    for id in &m.sample_ids {
        s.push(',');
        s.push_str(id);
    }
    s.push('\n');
    for (id, row) in m.sample_ids.iter().zip(&m.entries) {
        s.push_str(id);
        for v in row {
            let _ = write!(s, ",{v:.8e}");
        }
        s.push('\n');
    }
    s
}

pub fn write_matrix_csv(m: &ConfusionMatrix, path: &Path) -> Result<()> {
    write_file(path, matrix_to_csv(m).as_bytes())
}

/// Parse a CSV written by [`matrix_to_csv`].
pub fn matrix_from_csv(text: &str, path: &Path) -> Result<ConfusionMatrix> {
    let bad = |line: usize, msg: &str| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {line}: {msg}"),
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let sample_ids: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
    let mut entries = Vec::with_capacity(sample_ids.len());
    for (k, line) in lines.enumerate() {
        let mut cells = line.split(',');
        cells.next();
        let row: Vec<f64> = cells
            .map(|c| c.parse::<f64>().map_err(|_| bad(k + 2, "bad number")))
            .collect::<Result<_>>()?;
        if row.len() != sample_ids.len() {
            return Err(bad(k + 2, "row length differs from header"));
        }
        entries.push(row);
    }
    if entries.len() != sample_ids.len() {
        return Err(bad(entries.len() + 1, "matrix is not square"));
    }
    Ok(ConfusionMatrix {
        entries,
        sample_ids,
    })
}

const CELL: usize = 8;

fn ramp(t: f64) -> String {
    // Dark blue (near) to pale yellow (far).
    let lo = [8.0, 29.0, 88.0];
    let hi = [255.0, 255.0, 204.0];
    let c: Vec<u8> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| (a + (b - a) * t).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Heatmap with one `<rect>` per cell and a linear color ramp from the
/// smallest to the largest entry. With `labels`, lines mark class changes.
pub fn heatmap_svg(m: &ConfusionMatrix, labels: Option<&[String]>) -> Result<String> {
    let n = m.len();
    if n == 0 {
        return Err(Error::InvalidDataset("empty matrix".into()));
    }
    let (lo, hi) = m
        .entries
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let span = hi - lo;
    let size = n * CELL;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    for (i, row) in m.entries.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let t = if span > 0.0 { (v - lo) / span } else { 0.0 };
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{}"><title>{} / {}: {v:.4}</title></rect>"#,
                j * CELL,
                i * CELL,
                ramp(t),
                m.sample_ids[i],
                m.sample_ids[j],
            );
        }
    }
    if let Some(labels) = labels {
        for k in 1..n.min(labels.len()) {
            if labels[k] != labels[k - 1] {
                let p = k * CELL;
                let _ = writeln!(
                    s,
                    r##"<line x1="{p}" y1="0" x2="{p}" y2="{size}" stroke="#d62728" stroke-width="1"/>"##
                );
                let _ = writeln!(
                    s,
                    r##"<line x1="0" y1="{p}" x2="{size}" y2="{p}" stroke="#d62728" stroke-width="1"/>"##
                );
            }
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn write_heatmap_svg(
    m: &ConfusionMatrix,
    labels: Option<&[String]>,
    path: &Path,
) -> Result<()> {
    write_file(path, heatmap_svg(m, labels)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{apply_fold, corner_fold, make_flat, FoldSense};

    fn folded() -> ClothConfiguration {
        let flat = make_flat(1.0, 1.0, 5).unwrap();
        apply_fold(
            &flat,
            &corner_fold(2, 0.5, FoldSense::Over).with_angle(1.234),
        )
        .unwrap()
        .with_class("04")
        .with_frame(3)
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let c = folded();
        let back =
            configuration_from_json(&configuration_to_json(&c), Path::new("x.json")).unwrap();
        assert_eq!(back, c);
        for (p, q) in back
            .boundary()
            .vertices()
            .iter()
            .zip(c.boundary().vertices())
        {
            assert_eq!(
                p.to_array().map(f64::to_bits),
                q.to_array().map(f64::to_bits)
            );
        }
    }

    #[test]
    fn schema_errors_name_the_field() {
        let text = configuration_to_json(&folded())
            .replace("\"corner_indices\":[0,", "\"corner_indices\":[");
        let err = configuration_from_json(&text, Path::new("c.json")).unwrap_err();
        assert!(
            matches!(&err, Error::Schema { field, .. } if field == "corner_indices"),
            "{err}"
        );
        let err = configuration_from_json("{\"name\": 3}", Path::new("c.json")).unwrap_err();
        assert!(matches!(&err, Error::Schema { field, .. } if field == "name"));
        let err = configuration_from_json("{\"name\": ", Path::new("c.json")).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn csv_cells_and_round_trip() {
        let m = ConfusionMatrix {
            entries: vec![vec![0.0, 1.0 / 3.0], vec![1.0 / 3.0, 0.0]],
            sample_ids: vec!["a".into(), "b".into()],
        };
        let csv = matrix_to_csv(&m);
        assert_eq!(
            csv,
            "id,a,b\na,0.00000000e0,3.33333333e-1\nb,3.33333333e-1,0.00000000e0\n"
        );
        let back = matrix_from_csv(&csv, Path::new("m.csv")).unwrap();
        assert_eq!(back.sample_ids, m.sample_ids);
        assert!((back.get(0, 1) - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn heatmap_cells() {
        let zero = ConfusionMatrix {
            entries: vec![vec![0.0; 2]; 2],
            sample_ids: vec!["a".into(), "b".into()],
        };
        let svg = heatmap_svg(&zero, None).unwrap();
        assert_eq!(svg.matches("<rect").count(), 4);
        assert_eq!(svg.matches("fill=\"#081d58\"").count(), 4);
    }
}
