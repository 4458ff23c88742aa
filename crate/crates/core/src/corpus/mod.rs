//! Synthetic labeled chart corpus.
//!
//! Every item is a pure function of `(class, seed)`: [`sample_spec`] draws a
//! randomized [`ChartSpec`], [`render`] rasterizes it and records a
//! [`GroundTruth`] sidecar, and [`generate_corpus`] writes images, sidecars
//! and `manifest.json` to disk.

mod render;
mod words;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use render::{layout, palette_color, render, HEAT_RAMP, PALETTE};

use crate::chart::{Categories, ChartClass, ChartSpec, HeatGrid, Series};
use crate::error::{Error, Result};
use crate::raster::{text_bbox, write_image, BBox, TextOrientation};

pub const GENERATOR_VERSION: &str = "g2l-corpus/1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextRole {
    Title,
    XLabel,
    YLabel,
    TickLabel,
    LegendEntry,
    SliceLabel,
    CellValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextItem {
    pub text: String,
    pub bbox: BBox,
    pub orientation: TextOrientation,
    pub role: TextRole,
}

/// Everything the renderer drew, plus the parameters needed to rebuild the
/// spec (palette, heat grid, overlay flag).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub class: ChartClass,
    pub title: String,
    pub x_label: Option<String>,
    pub y_label: Option<String>,
    pub legend: bool,
    pub legend_entries: Vec<String>,
    pub categories: Categories,
    pub series: Vec<Series>,
    pub text_items: Vec<TextItem>,
    pub seed: u64,
    pub palette_id: u32,
    pub grid: Option<HeatGrid>,
    pub overlay_cell_values: bool,
}

impl GroundTruth {
    fn from_spec(spec: &ChartSpec, text_items: Vec<TextItem>) -> Self {
        let legend_entries = if spec.legend {
            spec.series
                .iter()
                .filter(|s| !s.name.trim().is_empty())
                .map(|s| s.name.clone())
                .collect()
        } else {
            Vec::new()
        };
        GroundTruth {
            class: spec.class,
            title: spec.title.clone(),
            x_label: spec.x_label.clone(),
            y_label: spec.y_label.clone(),
            legend: spec.legend,
            legend_entries,
            categories: spec.categories.clone(),
            series: spec.series.clone(),
            text_items,
            seed: spec.seed,
            palette_id: spec.palette_id,
            grid: spec.grid.clone(),
            overlay_cell_values: spec.overlay_cell_values,
        }
    }

    pub fn to_spec(&self) -> ChartSpec {
        ChartSpec {
            class: self.class,
            title: self.title.clone(),
            x_label: self.x_label.clone(),
            y_label: self.y_label.clone(),
            categories: self.categories.clone(),
            series: self.series.clone(),
            legend: self.legend,
            grid: self.grid.clone(),
            overlay_cell_values: self.overlay_cell_values,
            palette_id: self.palette_id,
            seed: self.seed,
        }
    }

    pub fn items_with_role(&self, role: TextRole) -> impl Iterator<Item = &TextItem> {
        self.text_items.iter().filter(move |t| t.role == role)
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// FNV-1a over `master_seed` (8 bytes LE), the class name, and `index` (8 bytes LE).
pub fn item_seed(master_seed: u64, class: ChartClass, index: u64) -> u64 {
    let mut buf = Vec::with_capacity(32);
    buf.extend_from_slice(&master_seed.to_le_bytes());
    buf.extend_from_slice(class.name().as_bytes());
    buf.extend_from_slice(&index.to_le_bytes());
    fnv1a64(&buf)
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn pick_distinct(rng: &mut ChaCha8Rng, pool: &[&str], n: usize) -> Vec<String> {
    pool.choose_multiple(rng, n).map(|s| s.to_string()).collect()
}

fn sample_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(1..=100) as f64).collect()
}

fn sample_title(rng: &mut ChaCha8Rng, class: ChartClass) -> String {
    let max_w = layout::WIDTH as i32 - 40;
    if class.is_scatter() && rng.gen_bool(0.1) {
        let pair = pick_distinct(rng, words::MEASURES, 2);
        return format!("{} vs {}", pair[0], pair[1]);
    }
    loop {
        let n = rng.gen_range(2..=4);
        let title = pick_distinct(rng, words::TITLE_WORDS, n).join(" ");
        let w = text_bbox((0, 0), &title, layout::TITLE_SCALE, TextOrientation::Horizontal)
            .map(|b| b.w)
            .unwrap_or(i32::MAX);
        if w <= max_w {
            return title;
        }
    }
}

/// Draws a random valid spec for `class`. Deterministic in `(class, seed)`.
pub fn sample_spec(class: ChartClass, seed: u64) -> ChartSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let palette_id = rng.gen_range(0..PALETTE.len() as u32);
    let title = sample_title(&mut rng, class);
    let (x_label, y_label) = if class.has_axes() {
        let x = rng.gen_bool(0.85).then(|| pick(&mut rng, words::X_LABELS).to_string());
        let y = rng.gen_bool(0.85).then(|| pick(&mut rng, words::Y_LABELS).to_string());
        (x, y)
    } else {
        (None, None)
    };

    let mut spec = ChartSpec {
        class,
        title,
        x_label,
        y_label,
        categories: Categories::default(),
        series: Vec::new(),
        legend: false,
        grid: None,
        overlay_cell_values: false,
        palette_id,
        seed,
    };

    if class == ChartClass::Heatmap {
        let rows = rng.gen_range(4..=8);
        let cols = rng.gen_range(4..=8);
        spec.grid = Some(HeatGrid {
            rows,
            cols,
            cell_values: sample_values(&mut rng, rows * cols),
        });
        spec.overlay_cell_values = rng.gen_bool(0.5);
        return spec;
    }

    let n = rng.gen_range(3..=8);
    spec.categories = if class.is_scatter() {
        let step = *[1.0, 2.0, 5.0, 10.0, 20.0, 25.0, 50.0].choose(&mut rng).unwrap();
        let start = rng.gen_range(0..=3) as f64 * step;
        Categories::Numeric((0..n).map(|i| start + i as f64 * step).collect())
    } else {
        Categories::Labels(pick_distinct(&mut rng, words::CATEGORY_WORDS, n))
    };
    let k = if class.is_multi_series() { rng.gen_range(2..=4) } else { 1 };
    let names = pick_distinct(&mut rng, words::SERIES_WORDS, k);
    spec.series = names
        .into_iter()
        .map(|name| Series {
            name,
            values: sample_values(&mut rng, n),
        })
        .collect();
    spec.legend = class.is_multi_series() && rng.gen_bool(0.9);
    spec
}

/// Number of items per class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub counts: BTreeMap<ChartClass, usize>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        let counts = [
            (ChartClass::Bar, 300),
            (ChartClass::Scatter, 300),
            (ChartClass::Pie, 200),
            (ChartClass::Heatmap, 200),
            (ChartClass::StackedBar, 200),
            (ChartClass::GroupedBar, 200),
            (ChartClass::GroupedScatter, 200),
        ];
        CorpusConfig {
            counts: counts.into_iter().collect(),
        }
    }
}

impl CorpusConfig {
    pub fn uniform(n: usize) -> Self {
        CorpusConfig {
            counts: ChartClass::ALL.iter().map(|&c| (c, n)).collect(),
        }
    }

    /// Parses `bar=300,scatter=300,...`. Unlisted classes get zero.
    pub fn parse(s: &str) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected class=count, got {part:?}")))?;
            let class: ChartClass = k.parse()?;
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad count {v:?} for {k}")))?;
            *counts.entry(class).or_insert(0) += n;
        }
        Ok(CorpusConfig { counts })
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestItem {
    /// Relative to the manifest's directory.
    pub image_path: String,
    pub truth_path: String,
    pub class: ChartClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub items: Vec<ManifestItem>,
    pub counts: BTreeMap<ChartClass, usize>,
    pub generator_version: String,
    pub master_seed: u64,
    /// Directory the relative paths resolve against. Not serialized.
    #[serde(skip)]
    pub root: PathBuf,
}

impl CorpusManifest {
    /// Loads `manifest.json` from a corpus directory or a direct file path.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        let mut m: CorpusManifest = serde_json::from_str(&text).map_err(|e| Error::json(&file, e))?;
        m.root = file.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(m)
    }

    pub fn image_path(&self, item: &ManifestItem) -> PathBuf {
        self.root.join(&item.image_path)
    }

    pub fn truth_path(&self, item: &ManifestItem) -> PathBuf {
        self.root.join(&item.truth_path)
    }

    pub fn load_truth(&self, item: &ManifestItem) -> Result<GroundTruth> {
        let p = self.truth_path(item);
        let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(&p, e))
    }

    pub fn histogram(&self) -> BTreeMap<ChartClass, usize> {
        let mut h = BTreeMap::new();
        for it in &self.items {
            *h.entry(it.class).or_insert(0) += 1;
        }
        h
    }
}

/// Renders and writes every configured item, then `manifest.json`.
pub fn generate_corpus(config: &CorpusConfig, master_seed: u64, out_dir: impl AsRef<Path>) -> Result<CorpusManifest> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let total = config.total();
    let mut items = Vec::with_capacity(total);
    let partial = |done: usize, e: Error| Error::Corpus(format!("aborted after writing {done} of {total} items: {e}"));

    for (&class, &n) in &config.counts {
        for i in 0..n {
            let seed = item_seed(master_seed, class, i as u64);
            let spec = sample_spec(class, seed);
            let (img, truth) = render(&spec).map_err(|e| partial(items.len(), e))?;
            let stem = format!("{}_{:05}", class.name(), i);
            let item = ManifestItem {
                image_path: format!("images/{stem}.png"),
                truth_path: format!("truth/{stem}.json"),
                class,
            };
            let write = || -> Result<()> {
                for sub in ["images", "truth"] {
                    let d = out_dir.join(sub);
                    fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
                }
                write_image(&img, out_dir.join(&item.image_path))?;
                let json = serde_json::to_string_pretty(&truth).map_err(|e| Error::json(&item.truth_path, e))?;
                let p = out_dir.join(&item.truth_path);
                fs::write(&p, json).map_err(|e| Error::io(&p, e))
            };
            write().map_err(|e| partial(items.len(), e))?;
            items.push(item);
        }
    }

    let manifest = CorpusManifest {
        items,
        counts: config.counts.iter().map(|(&c, &n)| (c, n)).collect(),
        generator_version: GENERATOR_VERSION.to_string(),
        master_seed,
        root: out_dir.to_path_buf(),
    };
    let p = out_dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::json(&p, e))?;
    fs::write(&p, json).map_err(|e| partial(manifest.items.len(), Error::io(&p, e)))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::validate;

    #[test]
    fn fnv_reference_vectors() {
        // Published FNV-1a 64-bit test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn item_seeds_differ_by_class_and_index() {
        let a = item_seed(7, ChartClass::Bar, 0);
        assert_ne!(a, item_seed(7, ChartClass::Bar, 1));
        assert_ne!(a, item_seed(7, ChartClass::Pie, 0));
        assert_ne!(a, item_seed(8, ChartClass::Bar, 0));
        assert_eq!(a, item_seed(7, ChartClass::Bar, 0));
    }

    #[test]
    fn sampling_is_deterministic_and_valid() {
        for class in ChartClass::ALL {
            for seed in 0..40 {
                let a = sample_spec(class, seed);
                assert_eq!(a, sample_spec(class, seed));
                assert!(validate(&a).is_empty(), "{class} {seed}: {:?}", validate(&a));
                assert_eq!(a.class, class);
            }
        }
    }

    #[test]
    fn nearby_seeds_differ() {
        let a = sample_spec(ChartClass::Bar, 1);
        let b = sample_spec(ChartClass::Bar, 2);
        assert!(a.title != b.title || a.series != b.series);
    }

    #[test]
    fn sampled_dimensions_in_range() {
        for class in ChartClass::ALL {
            for seed in 0..200 {
                let s = sample_spec(class, seed);
                let words = s.title.split(' ').count();
                assert!((2..=4).contains(&words) || s.title.contains(" vs "), "{}", s.title);
                match class {
                    ChartClass::Heatmap => {
                        let g = s.grid.as_ref().unwrap();
                        assert!((4..=8).contains(&g.rows) && (4..=8).contains(&g.cols));
                    }
                    _ => {
                        assert!((3..=8).contains(&s.categories.len()));
                        let k = s.series.len();
                        if class.is_multi_series() {
                            assert!((2..=4).contains(&k));
                        } else {
                            assert_eq!(k, 1);
                        }
                        for v in s.series.iter().flat_map(|s| &s.values) {
                            assert!((1.0..=100.0).contains(v));
                        }
                    }
                }
                if class == ChartClass::Pie {
                    assert!(s.series[0].values.iter().all(|&v| v > 0.0));
                }
            }
        }
    }

    #[test]
    fn some_scatter_titles_use_vs() {
        let n = (0..400)
            .filter(|&s| sample_spec(ChartClass::Scatter, s).title.contains(" vs "))
            .count();
        assert!((15..=70).contains(&n), "{n} of 400");
    }

    #[test]
    fn config_parsing() {
        let c = CorpusConfig::parse("bar=300, scatter=300,pie=200,heatmap=200").unwrap();
        assert_eq!(c.total(), 1000);
        assert_eq!(c.counts[&ChartClass::Bar], 300);
        assert!(CorpusConfig::parse("bar").is_err());
        assert!(CorpusConfig::parse("donut=3").is_err());
        assert_eq!(CorpusConfig::default().total(), 1600);
    }
}
