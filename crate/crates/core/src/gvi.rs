//! Green View Index computation.
//!
//! A view's GVI is the share of greenery pixels in its segmented image, in
//! percent. A node's GVI is the plain mean over the headings captured there.
//! Node and edge GVIs are then classified into four satisfaction bands.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::NodeId;

/// Class count of the shipped segmentation label set.
pub const DEFAULT_CLASS_COUNT: u16 = 19;

const DEFAULT_CLASS_NAMES: [&str; 19] = [
    "road",
    "sidewalk",
    "building",
    "wall",
    "fence",
    "pole",
    "traffic light",
    "traffic sign",
    "vegetation",
    "terrain",
    "sky",
    "person",
    "rider",
    "car",
    "truck",
    "bus",
    "train",
    "motorcycle",
    "bicycle",
];

#[derive(Debug, Error)]
pub enum GviError {
    #[error("malformed raster: {0}")]
    MalformedRaster(String),
    #[error("malformed class table: {0}")]
    MalformedClassTable(String),
    #[error("class {class} is not below class count {count}")]
    ClassOutOfRange { class: u32, count: u16 },
    #[error("greenery class set is empty")]
    EmptyClassSet,
    #[error("unknown class name {0:?}")]
    UnknownClassName(String),
    #[error("invalid observation: {0}")]
    InvalidObservation(String),
    #[error("no observations for node")]
    EmptyObservationSet,
    #[error("observations belong to different nodes ({0} and {1})")]
    MixedNodeIds(NodeId, NodeId),
    #[error("heading {0} given twice")]
    DuplicateHeading(f64),
    #[error("GVI {0} is outside [0, 100]")]
    OutOfRange(f64),
    #[error("empty input")]
    EmptyInput,
    #[error("raster dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("no class is present in either raster")]
    NoClassesPresent,
    #[error("observation table row {row}: {message}")]
    MalformedRow { row: usize, message: String },
}

/// Segmented image: one class index per pixel, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassRaster {
    width: usize,
    height: usize,
    class_count: u16,
    pixels: Vec<u16>,
}

impl ClassRaster {
    pub fn new(width: usize, height: usize, class_count: u16, pixels: Vec<u16>) -> Result<Self, GviError> {
        if width == 0 || height == 0 {
            return Err(GviError::MalformedRaster(format!("empty raster {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(GviError::MalformedRaster(format!(
                "{} pixels for a {width}x{height} raster",
                pixels.len()
            )));
        }
        if let Some(&bad) = pixels.iter().find(|&&p| p >= class_count) {
            return Err(GviError::ClassOutOfRange { class: bad as u32, count: class_count });
        }
        Ok(ClassRaster { width, height, class_count, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn class_count(&self) -> u16 {
        self.class_count
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    pub fn total_pixels(&self) -> u64 {
        self.pixels.len() as u64
    }

    /// Parses the text raster format: a `W H C` header line followed by `H`
    /// lines of `W` whitespace-separated class indices.
    pub fn parse(input: &str) -> Result<Self, GviError> {
        let mut lines = input.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| GviError::MalformedRaster("missing header".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| GviError::MalformedRaster(format!("header {header:?}: {e}")))?;
        let [width, height, classes] = dims[..] else {
            return Err(GviError::MalformedRaster(format!("header {header:?} needs W H C")));
        };
        let class_count = u16::try_from(classes)
            .map_err(|_| GviError::MalformedRaster(format!("class count {classes} too large")))?;
        let mut pixels = Vec::with_capacity(width.saturating_mul(height));
        let mut rows = 0;
        for (r, line) in lines.enumerate() {
            let before = pixels.len();
            for tok in line.split_whitespace() {
                let v: u32 = tok
                    .parse()
                    .map_err(|e| GviError::MalformedRaster(format!("row {r}: {tok:?}: {e}")))?;
                if v >= classes as u32 {
                    return Err(GviError::ClassOutOfRange { class: v, count: class_count });
                }
                pixels.push(v as u16);
            }
            if pixels.len() - before != width {
                return Err(GviError::MalformedRaster(format!(
                    "row {r} has {} values, expected {width}",
                    pixels.len() - before
                )));
            }
            rows += 1;
        }
        if rows != height {
            return Err(GviError::MalformedRaster(format!("{rows} rows, expected {height}")));
        }
        ClassRaster::new(width, height, class_count, pixels)
    }
}

/// Class index to name mapping shipped alongside rasters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassTable {
    names: Vec<String>,
}

impl Default for ClassTable {
    fn default() -> Self {
        ClassTable { names: DEFAULT_CLASS_NAMES.iter().map(|s| s.to_string()).collect() }
    }
}

impl ClassTable {
    /// Parses `<index> <name>` lines; `#` starts a comment. Indices must
    /// cover `0..C` exactly once.
    pub fn parse(input: &str) -> Result<Self, GviError> {
        let mut entries = BTreeMap::new();
        for line in input.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (idx, name) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| GviError::MalformedClassTable(format!("line {line:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|e| GviError::MalformedClassTable(format!("index {idx:?}: {e}")))?;
            if entries.insert(idx, name.trim().to_string()).is_some() {
                return Err(GviError::MalformedClassTable(format!("index {idx} repeated")));
            }
        }
        if entries.is_empty() || entries.keys().enumerate().any(|(i, &k)| i != k) {
            return Err(GviError::MalformedClassTable("indices must be 0..C without gaps".into()));
        }
        Ok(ClassTable { names: entries.into_values().collect() })
    }

    pub fn class_count(&self) -> u16 {
        self.names.len() as u16
    }

    pub fn index_of(&self, name: &str) -> Option<u16> {
        self.names.iter().position(|n| n == name).map(|i| i as u16)
    }

    pub fn name(&self, index: u16) -> Option<&str> {
        self.names.get(index as usize).map(String::as_str)
    }
}

/// Classes whose pixels count as greenery.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreeneryClassSet {
    mask: Vec<bool>,
}

impl GreeneryClassSet {
    pub fn new(class_count: u16, classes: &[u16]) -> Result<Self, GviError> {
        if classes.is_empty() {
            return Err(GviError::EmptyClassSet);
        }
        let mut mask = vec![false; class_count as usize];
        for &c in classes {
            *mask
                .get_mut(c as usize)
                .ok_or(GviError::ClassOutOfRange { class: c as u32, count: class_count })? = true;
        }
        Ok(GreeneryClassSet { mask })
    }

    /// Resolves classes by name against a class table.
    pub fn from_names(table: &ClassTable, names: &[&str]) -> Result<Self, GviError> {
        let classes = names
            .iter()
            .map(|n| table.index_of(n).ok_or_else(|| GviError::UnknownClassName(n.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        GreeneryClassSet::new(table.class_count(), &classes)
    }

    /// Vegetation and terrain in the given table.
    pub fn default_for(table: &ClassTable) -> Result<Self, GviError> {
        GreeneryClassSet::from_names(table, &["vegetation", "terrain"])
    }

    pub fn contains(&self, class: u16) -> bool {
        self.mask.get(class as usize).copied().unwrap_or(false)
    }

    pub fn count_in(&self, raster: &ClassRaster) -> u64 {
        raster.pixels().iter().filter(|&&p| self.contains(p)).count() as u64
    }
}

/// `100 * greenery / total`; the product is exact in integers so only the
/// final division rounds.
pub fn percent_of(greenery: u64, total: u64) -> f64 {
    debug_assert!(total > 0 && greenery <= total);
    (greenery * 100) as f64 / total as f64
}

/// GVI of one segmented view, in percent.
pub fn compute_view_gvi(raster: &ClassRaster, greenery: &GreeneryClassSet) -> f64 {
    percent_of(greenery.count_in(raster), raster.total_pixels())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Measurement {
    Pixels { greenery: u64, total: u64 },
    Percent(f64),
}

/// One camera heading at one node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewObservation {
    pub node: NodeId,
    pub heading_deg: f64,
    pub measurement: Measurement,
}

impl ViewObservation {
    pub fn from_pixels(node: NodeId, heading_deg: f64, greenery: u64, total: u64) -> Result<Self, GviError> {
        let obs = ViewObservation { node, heading_deg, measurement: Measurement::Pixels { greenery, total } };
        obs.validate()?;
        Ok(obs)
    }

    pub fn from_percent(node: NodeId, heading_deg: f64, gvi_percent: f64) -> Result<Self, GviError> {
        let obs = ViewObservation { node, heading_deg, measurement: Measurement::Percent(gvi_percent) };
        obs.validate()?;
        Ok(obs)
    }

    pub fn validate(&self) -> Result<(), GviError> {
        if !(0.0..360.0).contains(&self.heading_deg) {
            return Err(GviError::InvalidObservation(format!("heading {} not in [0, 360)", self.heading_deg)));
        }
        match self.measurement {
            Measurement::Pixels { greenery, total } => {
                if total == 0 || greenery > total {
                    return Err(GviError::InvalidObservation(format!(
                        "greenery {greenery} of total {total} pixels"
                    )));
                }
            }
            Measurement::Percent(p) => {
                if !(0.0..=100.0).contains(&p) {
                    return Err(GviError::OutOfRange(p));
                }
            }
        }
        Ok(())
    }

    pub fn gvi_percent(&self) -> f64 {
        match self.measurement {
            Measurement::Pixels { greenery, total } => percent_of(greenery, total),
            Measurement::Percent(p) => p,
        }
    }
}

/// Per-node aggregate over all captured headings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeGvi {
    pub node: NodeId,
    /// `(heading_deg, gvi_percent)`, sorted by heading.
    pub per_heading: Vec<(f64, f64)>,
    pub gvi_avg: f64,
}

impl NodeGvi {
    pub fn band(&self) -> GviBand {
        GviBand::of(self.gvi_avg)
    }
}

/// Averages one node's views. The mean is taken in heading order so the
/// result does not depend on the order observations arrive in.
pub fn node_gvi(observations: &[ViewObservation]) -> Result<NodeGvi, GviError> {
    let first = observations.first().ok_or(GviError::EmptyObservationSet)?;
    let mut per_heading = Vec::with_capacity(observations.len());
    for obs in observations {
        if obs.node != first.node {
            return Err(GviError::MixedNodeIds(first.node, obs.node));
        }
        obs.validate()?;
        per_heading.push((obs.heading_deg, obs.gvi_percent()));
    }
    per_heading.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = per_heading.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(GviError::DuplicateHeading(w[0].0));
    }
    let sum: f64 = per_heading.iter().map(|&(_, g)| g).sum();
    let gvi_avg = (sum / per_heading.len() as f64).clamp(0.0, 100.0);
    Ok(NodeGvi { node: first.node, per_heading, gvi_avg })
}

/// Groups observations by node and aggregates each group.
pub fn node_gvis(observations: &[ViewObservation]) -> Result<BTreeMap<NodeId, NodeGvi>, GviError> {
    let mut groups: BTreeMap<NodeId, Vec<ViewObservation>> = BTreeMap::new();
    for obs in observations {
        groups.entry(obs.node).or_default().push(*obs);
    }
    groups
        .into_iter()
        .map(|(node, obs)| node_gvi(&obs).map(|g| (node, g)))
        .collect()
}

/// Satisfaction band. Intervals are low-inclusive: `[0,10)`, `[10,18)`,
/// `[18,25)`, `[25,100]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GviBand {
    Low,
    Moderate,
    Good,
    Satisfied,
}

impl GviBand {
    pub const ALL: [GviBand; 4] = [GviBand::Low, GviBand::Moderate, GviBand::Good, GviBand::Satisfied];

    /// Band of a value already known to be in `[0, 100]`.
    pub fn of(gvi_percent: f64) -> GviBand {
        if gvi_percent < 10.0 {
            GviBand::Low
        } else if gvi_percent < 18.0 {
            GviBand::Moderate
        } else if gvi_percent < 25.0 {
            GviBand::Good
        } else {
            GviBand::Satisfied
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GviBand::Low => "Low",
            GviBand::Moderate => "Moderate",
            GviBand::Good => "Good",
            GviBand::Satisfied => "Satisfied",
        }
    }

    pub fn range_label(self) -> &'static str {
        match self {
            GviBand::Low => "[0, 10)",
            GviBand::Moderate => "[10, 18)",
            GviBand::Good => "[18, 25)",
            GviBand::Satisfied => "[25, 100]",
        }
    }

    /// Fixed four-color ramp, red to green.
    pub fn color(self) -> &'static str {
        match self {
            GviBand::Low => "#d7191c",
            GviBand::Moderate => "#fdae61",
            GviBand::Good => "#a6d96a",
            GviBand::Satisfied => "#1a9641",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for GviBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn classify_band(gvi_percent: f64) -> Result<GviBand, GviError> {
    if !(0.0..=100.0).contains(&gvi_percent) {
        return Err(GviError::OutOfRange(gvi_percent));
    }
    Ok(GviBand::of(gvi_percent))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandDistribution {
    pub total: usize,
    pub counts: [usize; 4],
    pub percentages: [f64; 4],
}

impl BandDistribution {
    /// One line per band: `Low 2 (40.00%) [0, 10)`.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for band in GviBand::ALL {
            let i = band.index();
            out.push_str(&format!(
                "{} {} ({:.2}%) {}\n",
                band.label(),
                self.counts[i],
                self.percentages[i],
                band.range_label()
            ));
        }
        out.push_str(&format!("total {}\n", self.total));
        out
    }
}

/// Band counts and percentages over raw GVI values.
pub fn band_distribution<I: IntoIterator<Item = f64>>(values: I) -> Result<BandDistribution, GviError> {
    let mut counts = [0usize; 4];
    let mut total = 0;
    for v in values {
        counts[classify_band(v)?.index()] += 1;
        total += 1;
    }
    if total == 0 {
        return Err(GviError::EmptyInput);
    }
    let percentages = counts.map(|c| c as f64 * 100.0 / total as f64);
    Ok(BandDistribution { total, counts, percentages })
}

pub fn gvi_distribution(node_gvis: &[NodeGvi]) -> Result<BandDistribution, GviError> {
    band_distribution(node_gvis.iter().map(|g| g.gvi_avg))
}

/// Per-class pixel confusion between a prediction and a label raster.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn between(pred: &ClassRaster, label: &ClassRaster, class: u16) -> Result<Self, GviError> {
        if pred.width != label.width || pred.height != label.height {
            return Err(GviError::DimensionMismatch(pred.width, pred.height, label.width, label.height));
        }
        let mut c = ConfusionCounts::default();
        for (&p, &l) in pred.pixels.iter().zip(&label.pixels) {
            match (p == class, l == class) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => {}
            }
        }
        Ok(c)
    }

    pub fn is_empty(&self) -> bool {
        self.tp + self.fp + self.fn_ == 0
    }

    /// `TP / (TP + FP + FN)`; 1.0 when the class appears in neither raster.
    pub fn iou(&self) -> f64 {
        let union = self.tp + self.fp + self.fn_;
        if union == 0 {
            1.0
        } else {
            self.tp as f64 / union as f64
        }
    }
}

pub fn compute_iou(pred: &ClassRaster, label: &ClassRaster, class: u16) -> Result<f64, GviError> {
    Ok(ConfusionCounts::between(pred, label, class)?.iou())
}

/// Mean IoU over the given classes, skipping classes absent from both.
pub fn mean_iou(pred: &ClassRaster, label: &ClassRaster, classes: &[u16]) -> Result<f64, GviError> {
    let mut sum = 0.0;
    let mut present = 0usize;
    for &class in classes {
        let c = ConfusionCounts::between(pred, label, class)?;
        if !c.is_empty() {
            sum += c.iou();
            present += 1;
        }
    }
    if present == 0 {
        return Err(GviError::NoClassesPresent);
    }
    Ok(sum / present as f64)
}

/// Rows from an observation table, before node ids are resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationRow {
    pub node: String,
    pub heading_deg: f64,
    pub measurement: Measurement,
}

pub const OBSERVATION_HEADER: &str = "node_id,heading_deg,greenery_pixels,total_pixels,gvi_percent";

/// Parses the observation table. Each row is either
/// `node_id,heading_deg,greenery_pixels,total_pixels` or
/// `node_id,heading_deg,,,gvi_percent`. The header row is required.
pub fn parse_observation_table(input: &str) -> Result<Vec<ObservationRow>, GviError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| GviError::MalformedRow { row: 0, message: e.to_string() })?
        .clone();
    if headers.get(0) != Some("node_id") || headers.get(1) != Some("heading_deg") {
        return Err(GviError::MalformedRow {
            row: 0,
            message: format!("header must start with node_id,heading_deg, got {:?}", headers.as_slice()),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let bad = |message: String| GviError::MalformedRow { row, message };
        let record = record.map_err(|e| bad(e.to_string()))?;
        let field = |k: usize| record.get(k).unwrap_or("");
        let node = field(0).to_string();
        if node.is_empty() {
            return Err(bad("empty node_id".into()));
        }
        let heading_deg: f64 = field(1).parse().map_err(|e| bad(format!("heading {:?}: {e}", field(1))))?;
        let (g, t, p) = (field(2), field(3), field(4));
        let measurement = match (g.is_empty(), t.is_empty(), p.is_empty()) {
            (false, false, true) => Measurement::Pixels {
                greenery: g.parse().map_err(|e| bad(format!("greenery_pixels {g:?}: {e}")))?,
                total: t.parse().map_err(|e| bad(format!("total_pixels {t:?}: {e}")))?,
            },
            (true, true, false) => {
                Measurement::Percent(p.parse().map_err(|e| bad(format!("gvi_percent {p:?}: {e}")))?)
            }
            _ => return Err(bad("need either pixel counts or a percent, not both or neither".into())),
        };
        let check = ViewObservation { node: NodeId(0), heading_deg, measurement };
        check.validate().map_err(|e| bad(e.to_string()))?;
        rows.push(ObservationRow { node, heading_deg, measurement });
    }
    Ok(rows)
}

/// Writes observations back in table form, using `external` to name nodes.
pub fn write_observation_table<'a, F>(observations: &[ViewObservation], external: F) -> String
where
    F: Fn(NodeId) -> &'a str,
{
    let mut out = String::from(OBSERVATION_HEADER);
    out.push('\n');
    for obs in observations {
        let node = external(obs.node);
        match obs.measurement {
            Measurement::Pixels { greenery, total } => {
                out.push_str(&format!("{node},{},{greenery},{total}\n", obs.heading_deg))
            }
            Measurement::Percent(p) => out.push_str(&format!("{node},{},,,{p}\n", obs.heading_deg)),
        }
    }
    out
}
