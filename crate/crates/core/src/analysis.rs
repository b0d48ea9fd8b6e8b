//! Confusion matrices, Davies–Bouldin index, representatives and
//! nearest-representative classification.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{
    align_rigid, boundary_curve, corner_distances, edge_min_distances, CurveDistance,
    BOUNDARY_SAMPLES,
};
use crate::cloth::{compute_coordinates, default_edge_selection, ClothConfiguration};
use crate::error::{Error, Result};
use crate::geometry::{PerturbationSpec, Point3, Polyline3};
use crate::metrics;

/// What is extracted from a configuration before comparing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Dgli,
    Edges,
    Corners,
    Boundary,
}

/// How two extracted features are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Spearman,
    Euclidean,
    Frechet,
    Hausdorff,
}

impl Representation {
    pub const ALL: [Representation; 4] = [
        Representation::Dgli,
        Representation::Edges,
        Representation::Corners,
        Representation::Boundary,
    ];

    pub fn default_metric(self) -> Metric {
        match self {
            Representation::Boundary => Metric::Frechet,
            _ => Metric::Spearman,
        }
    }

    pub fn accepts(self, metric: Metric) -> bool {
        let curve = matches!(metric, Metric::Frechet | Metric::Hausdorff);
        curve == (self == Representation::Boundary)
    }

    pub fn name(self) -> &'static str {
        match self {
            Representation::Dgli => "dgli",
            Representation::Edges => "edges",
            Representation::Corners => "corners",
            Representation::Boundary => "boundary",
        }
    }
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Spearman => "spearman",
            Metric::Euclidean => "euclidean",
            Metric::Frechet => "frechet",
            Metric::Hausdorff => "hausdorff",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Representation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Representation::ALL
            .into_iter()
            .find(|r| r.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidDataset(format!("unknown representation `{s}`")))
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            Metric::Spearman,
            Metric::Euclidean,
            Metric::Frechet,
            Metric::Hausdorff,
        ]
        .into_iter()
        .find(|m| m.name() == s.to_ascii_lowercase())
        .ok_or_else(|| Error::InvalidDataset(format!("unknown metric `{s}`")))
    }
}

/// A (representation, metric) pair as compared in the DB table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scheme {
    pub representation: Representation,
    pub metric: Metric,
}

impl Scheme {
    pub const fn new(representation: Representation, metric: Metric) -> Self {
        Self {
            representation,
            metric,
        }
    }

    /// Row label as printed in the comparison table.
    pub fn label(&self) -> String {
        match (self.representation, self.metric) {
            (Representation::Dgli, Metric::Spearman) => "dGLI".into(),
            (Representation::Edges, Metric::Spearman) => "Edges".into(),
            (Representation::Corners, Metric::Spearman) => "Corners".into(),
            (Representation::Boundary, Metric::Frechet) => "Frechet".into(),
            (Representation::Boundary, Metric::Hausdorff) => "Hausdorff".into(),
            (r, m) => format!("{r}/{m}"),
        }
    }
}

/// The five rows of the comparison table.
pub const TABLE_SCHEMES: [Scheme; 5] = [
    Scheme::new(Representation::Dgli, Metric::Spearman),
    Scheme::new(Representation::Edges, Metric::Spearman),
    Scheme::new(Representation::Corners, Metric::Spearman),
    Scheme::new(Representation::Boundary, Metric::Frechet),
    Scheme::new(Representation::Boundary, Metric::Hausdorff),
];

/// Extracted feature of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    Vector(Vec<f64>),
    Curve(Polyline3),
}

impl Features {
    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Features::Vector(v) => Some(v),
            Features::Curve(_) => None,
        }
    }
}

pub fn extract(config: &ClothConfiguration, repr: Representation) -> Result<Features> {
    Ok(match repr {
        Representation::Dgli => {
            let sel = default_edge_selection(config)?;
            Features::Vector(
                compute_coordinates(config, &sel, &PerturbationSpec::default())?.into_values(),
            )
        }
        Representation::Edges => {
            let sel = default_edge_selection(config)?;
            Features::Vector(edge_min_distances(config, &sel)?.values)
        }
        Representation::Corners => Features::Vector(corner_distances(config).values),
        Representation::Boundary => Features::Curve(boundary_curve(config, BOUNDARY_SAMPLES)?),
    })
}

pub fn extract_all(configs: &[ClothConfiguration], repr: Representation) -> Result<Vec<Features>> {
    configs.iter().map(|c| extract(c, repr)).collect()
}

pub fn distance(a: &Features, b: &Features, metric: Metric) -> Result<f64> {
    match (a, b, metric) {
        (Features::Vector(x), Features::Vector(y), Metric::Spearman) => {
            metrics::spearman_distance(x, y)
        }
        (Features::Vector(x), Features::Vector(y), Metric::Euclidean) => {
            metrics::euclidean_distance(x, y)
        }
        (Features::Curve(x), Features::Curve(y), Metric::Frechet) => {
            CurveDistance::Frechet.eval(x, y)
        }
        (Features::Curve(x), Features::Curve(y), Metric::Hausdorff) => {
            CurveDistance::Hausdorff.eval(x, y)
        }
        _ => Err(Error::InvalidDataset(format!(
            "metric {metric} does not apply to this feature kind"
        ))),
    }
}

/// Symmetric pairwise distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub entries: Vec<Vec<f64>>,
    pub sample_ids: Vec<String>,
}

impl ConfusionMatrix {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    /// Mean over all off-diagonal entries.
    pub fn off_diagonal_mean(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let sum: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.entries[i][j])
            .sum();
        sum / (n * (n - 1)) as f64
    }
}

pub fn confusion_matrix(
    features: &[Features],
    ids: &[String],
    metric: Metric,
) -> Result<ConfusionMatrix> {
    if features.len() < 2 {
        return Err(Error::TooShort {
            len: features.len(),
            min: 2,
        });
    }
    if ids.len() != features.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: ids.len(),
        });
    }
    let n = features.len();
    let mut entries = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d =
                distance(&features[i], &features[j], metric).map_err(|e| Error::PairDistance {
                    i,
                    j,
                    source: Box::new(e),
                })?;
            entries[i][j] = d;
            entries[j][i] = d;
        }
    }
    Ok(ConfusionMatrix {
        entries,
        sample_ids: ids.to_vec(),
    })
}

/// Mean of a group of features. Vectors average coordinate-wise; curves are
/// first centered and rigidly aligned to the first member, then averaged
/// point-wise.
pub fn centroid(members: &[&Features]) -> Result<Features> {
    let first = members.first().ok_or(Error::EmptyCurve)?;
    match first {
        Features::Vector(v0) => {
            let mut sum = vec![0.0; v0.len()];
            for m in members {
                let v = m.as_vector().ok_or_else(mixed)?;
                if v.len() != sum.len() {
                    return Err(Error::LengthMismatch {
                        left: sum.len(),
                        right: v.len(),
                    });
                }
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
            }
            let n = members.len() as f64;
            Ok(Features::Vector(sum.into_iter().map(|s| s / n).collect()))
        }
        Features::Curve(c0) => {
            let mut sum = vec![Point3::ORIGIN; c0.len()];
            for m in members {
                let Features::Curve(c) = m else {
                    return Err(mixed());
                };
                let pair = align_rigid(c0, c)?;
                for (s, p) in sum.iter_mut().zip(pair.curve_b.vertices()) {
                    *s += *p;
                }
            }
            let n = members.len() as f64;
            let mean = sum.into_iter().map(|p| p / n).collect();
            Ok(Features::Curve(Polyline3::new(mean, c0.is_closed())?))
        }
    }
}

fn mixed() -> Error {
    Error::InvalidDataset("mixed feature kinds in one group".into())
}

/// Class labels in sorted order with member indices.
pub fn group_by_label(labels: &[String]) -> BTreeMap<String, Vec<usize>> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(l.clone()).or_default().push(i);
    }
    groups
}

/// Davies–Bouldin index with arithmetic-mean centroids and the given paired distance.
pub fn db_index(features: &[Features], labels: &[String], metric: Metric) -> Result<f64> {
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    let groups = group_by_label(labels);
    if groups.len() < 2 {
        return Err(Error::InvalidDataset(format!(
            "need at least 2 classes, got {}",
            groups.len()
        )));
    }
    let names: Vec<&String> = groups.keys().collect();
    let mut centroids = Vec::with_capacity(groups.len());
    let mut sigmas = Vec::with_capacity(groups.len());
    for idx in groups.values() {
        let members: Vec<&Features> = idx.iter().map(|&i| &features[i]).collect();
        let c = centroid(&members)?;
        let mut s = 0.0;
        for m in &members {
            s += distance(m, &c, metric)?;
        }
        sigmas.push(s / members.len() as f64);
        centroids.push(c);
    }
    let n = centroids.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut worst = 0.0_f64;
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = distance(&centroids[i], &centroids[j], metric)?;
            if d <= 0.0 {
                return Err(Error::DegenerateSeparation {
                    a: names[i].clone(),
                    b: names[j].clone(),
                });
            }
            worst = worst.max((sigmas[i] + sigmas[j]) / d);
        }
        total += worst;
    }
    Ok(total / n as f64)
}

/// DB index of every comparison scheme on one labeled dataset. Feature
/// extraction errors abort; per-scheme index errors are returned in place.
pub fn db_table(
    configs: &[ClothConfiguration],
    labels: &[String],
) -> Result<Vec<(Scheme, Result<f64>)>> {
    let mut rows = Vec::with_capacity(TABLE_SCHEMES.len());
    let mut cache: BTreeMap<Representation, Vec<Features>> = BTreeMap::new();
    for scheme in TABLE_SCHEMES {
        if let Entry::Vacant(slot) = cache.entry(scheme.representation) {
            slot.insert(extract_all(configs, scheme.representation)?);
        }
        let features = &cache[&scheme.representation];
        rows.push((scheme, db_index(features, labels, scheme.metric)));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Representative {
    pub label: String,
    /// Index of the chosen sample in the dataset.
    pub sample: usize,
    pub features: Features,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentativeSet {
    pub reps: Vec<Representative>,
}

impl RepresentativeSet {
    pub fn labels(&self) -> Vec<&str> {
        let mut l: Vec<&str> = self.reps.iter().map(|r| r.label.as_str()).collect();
        l.dedup();
        l
    }
}

fn argmin_by(items: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, d) in items {
        match best {
            Some((_, bd)) if d >= bd => {}
            _ => best = Some((i, d)),
        }
    }
    best.map(|(i, _)| i)
}

/// Medoids of one class. `members` are dataset indices in ascending order.
fn class_medoids(
    features: &[Features],
    members: &[usize],
    k: usize,
    metric: Metric,
) -> Result<Vec<usize>> {
    if k >= members.len() {
        return Ok(members.to_vec());
    }
    let refs: Vec<&Features> = members.iter().map(|&i| &features[i]).collect();
    let c = centroid(&refs)?;
    let to_centroid: Vec<f64> = refs
        .iter()
        .map(|f| distance(f, &c, metric))
        .collect::<Result<_>>()?;
    let first = argmin_by(to_centroid.iter().copied().enumerate()).expect("non-empty class");
    if k == 1 {
        return Ok(vec![members[first]]);
    }
    let n = members.len();
    let mut d = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let v = distance(refs[a], refs[b], metric)?;
            d[a][b] = v;
            d[b][a] = v;
        }
    }
    // Greedy farthest-point seeding from the centroid-closest member.
    let mut chosen = vec![first];
    while chosen.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for a in (0..n).filter(|a| !chosen.contains(a)) {
            let near = chosen
                .iter()
                .map(|&c| d[a][c])
                .fold(f64::INFINITY, f64::min);
            if best.is_none_or(|(_, bd)| near > bd) {
                best = Some((a, near));
            }
        }
        chosen.push(best.expect("k < n").0);
    }
    // One refinement sweep: reassign, then re-pick each cluster's medoid.
    let owner: Vec<usize> = (0..n)
        .map(|a| argmin_by(chosen.iter().map(|&c| d[a][c]).enumerate()).expect("k ≥ 1"))
        .collect();
    for (slot, medoid) in chosen.iter_mut().enumerate() {
        let cluster: Vec<usize> = (0..n).filter(|&a| owner[a] == slot).collect();
        if let Some(best) = argmin_by(
            cluster
                .iter()
                .map(|&a| (a, cluster.iter().map(|&b| d[a][b]).sum::<f64>())),
        ) {
            *medoid = best;
        }
    }
    let mut out: Vec<usize> = chosen.into_iter().map(|a| members[a]).collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Per class: the member closest to the class centroid when one
/// representative is requested, k-medoids otherwise. Classes missing from
/// `counts` get one representative.
pub fn choose_representatives(
    features: &[Features],
    labels: &[String],
    metric: Metric,
    counts: &BTreeMap<String, usize>,
) -> Result<RepresentativeSet> {
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    let mut reps = Vec::new();
    for (label, members) in group_by_label(labels) {
        let k = counts.get(&label).copied().unwrap_or(1);
        if k == 0 || k > members.len() {
            return Err(Error::InvalidDataset(format!(
                "class {label}: {k} representatives requested from {} members",
                members.len()
            )));
        }
        for sample in class_medoids(features, &members, k, metric)? {
            reps.push(Representative {
                label: label.clone(),
                sample,
                features: features[sample].clone(),
            });
        }
    }
    Ok(RepresentativeSet { reps })
}

/// Label of the nearest representative; equal distances go to the
/// lexicographically smaller label. Representatives whose distance to the
/// query is undefined are skipped.
pub fn classify_nearest(
    query: &Features,
    reps: &RepresentativeSet,
    metric: Metric,
) -> Result<String> {
    let mut best: Option<(f64, &str)> = None;
    let mut last_err = None;
    for r in &reps.reps {
        match distance(query, &r.features, metric) {
            Ok(d) => {
                let better = match best {
                    None => true,
                    Some((bd, bl)) => d < bd || (d == bd && r.label.as_str() < bl),
                };
                if better {
                    best = Some((d, &r.label));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match (best, last_err) {
        (Some((_, l)), _) => Ok(l.to_string()),
        (None, Some(e)) => Err(e),
        (None, None) => Err(Error::InvalidDataset("empty representative set".into())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeaveOneOut {
    pub predictions: Vec<String>,
    pub correct: usize,
}

impl LeaveOneOut {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.predictions.len() as f64
    }

    /// `(index, true label, predicted label)` for every miss.
    pub fn misses<'a>(&'a self, labels: &'a [String]) -> Vec<(usize, &'a str, &'a str)> {
        self.predictions
            .iter()
            .zip(labels)
            .enumerate()
            .filter(|(_, (p, l))| p != l)
            .map(|(i, (p, l))| (i, l.as_str(), p.as_str()))
            .collect()
    }
}

/// Classify each sample against representatives chosen from all the others.
/// Representative counts are capped at the remaining class size.
pub fn leave_one_out(
    features: &[Features],
    labels: &[String],
    metric: Metric,
    counts: &BTreeMap<String, usize>,
) -> Result<LeaveOneOut> {
    let mut predictions = Vec::with_capacity(features.len());
    let mut correct = 0;
    for i in 0..features.len() {
        let keep: Vec<usize> = (0..features.len()).filter(|&j| j != i).collect();
        let f: Vec<Features> = keep.iter().map(|&j| features[j].clone()).collect();
        let l: Vec<String> = keep.iter().map(|&j| labels[j].clone()).collect();
        let groups = group_by_label(&l);
        let capped: BTreeMap<String, usize> = groups
            .iter()
            .map(|(k, m)| (k.clone(), counts.get(k).copied().unwrap_or(1).min(m.len())))
            .collect();
        let reps = choose_representatives(&f, &l, metric, &capped)?;
        let p = classify_nearest(&features[i], &reps, metric)?;
        if p == labels[i] {
            correct += 1;
        }
        predictions.push(p);
    }
    Ok(LeaveOneOut {
        predictions,
        correct,
    })
}

/// Off-diagonal means inside and across blocks, given a block id per row.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStats {
    pub intra_mean: f64,
    pub inter_mean: f64,
    pub global_mean: f64,
    /// Mean of each diagonal block's off-diagonal entries, by block id.
    pub block_means: BTreeMap<usize, f64>,
}

pub fn block_stats(m: &ConfusionMatrix, block_of: &[usize]) -> BlockStats {
    let n = m.len();
    let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0usize, 0.0, 0usize);
    let mut per: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = m.entries[i][j];
            if block_of[i] == block_of[j] {
                intra += v;
                ni += 1;
                let e = per.entry(block_of[i]).or_default();
                e.0 += v;
                e.1 += 1;
            } else {
                inter += v;
                nx += 1;
            }
        }
    }
    let mean = |s: f64, c: usize| if c == 0 { 0.0 } else { s / c as f64 };
    BlockStats {
        intra_mean: mean(intra, ni),
        inter_mean: mean(inter, nx),
        global_mean: m.off_diagonal_mean(),
        block_means: per.into_iter().map(|(k, (s, c))| (k, mean(s, c))).collect(),
    }
}

/// Block id per sample from its class label, blocks numbered in sorted label order.
pub fn blocks_from_labels(labels: &[String]) -> Vec<usize> {
    let keys: Vec<String> = group_by_label(labels).into_keys().collect();
    labels
        .iter()
        .map(|l| keys.binary_search(l).expect("label present"))
        .collect()
}

/// Frames `k ≥ 1` at which some coordinate changes sign relative to frame
/// `k − 1`. Entries within `floor` of zero count as no sign.
pub fn sign_change_frames(frames: &[Vec<f64>], floor: f64) -> Vec<usize> {
    let sign = |v: f64| {
        if v > floor {
            1
        } else if v < -floor {
            -1
        } else {
            0
        }
    };
    (1..frames.len())
        .filter(|&k| {
            frames[k - 1]
                .iter()
                .zip(&frames[k])
                .any(|(&a, &b)| sign(a) * sign(b) < 0)
        })
        .collect()
}
