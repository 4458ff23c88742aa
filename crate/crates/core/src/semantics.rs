//! Positional rules that turn OCR phrases into chart semantics.
//!
//! All thresholds are fractions of the image size so the rules carry over
//! to images that were not drawn by our renderer.

use serde::{Deserialize, Serialize};

use crate::chart::ChartClass;
use crate::ocr::{OcrResult, Phrase, Word};
use crate::raster::{BBox, TextOrientation};

pub const DEFAULT_TITLE: &str = "Title";
pub const DEFAULT_N_CATEGORIES: usize = 5;

/// Top edge above this fraction of the height counts as "top".
pub const TITLE_TOP_FRAC: f64 = 0.15;
/// Horizontal center must fall in this band to count as "center".
pub const TITLE_CENTER_BAND: (f64, f64) = (0.25, 0.75);
/// A vertical phrase whose right edge is left of this is a y-axis label.
pub const Y_LABEL_RIGHT_FRAC: f64 = 0.12;
/// Horizontal text starting below this is an x-axis label.
pub const X_LABEL_TOP_FRAC: f64 = 0.92;
/// Tick labels start inside this band.
pub const TICK_BAND: (f64, f64) = (0.75, 0.92);
/// Legends live between the title band and the tick band.
pub const LEGEND_BAND: (f64, f64) = (0.12, 0.75);
pub const LEGEND_MAX_WORDS: usize = 3;
pub const LEGEND_MIN_X_OVERLAP: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticSummary {
    pub class: ChartClass,
    pub title: String,
    pub x_label: Option<String>,
    pub y_label: Option<String>,
    pub legend: bool,
    pub legend_entries: Vec<String>,
    pub x_tick_labels: Vec<String>,
    pub n_categories: usize,
    pub slice_labels: Vec<String>,
}

impl SemanticSummary {
    /// Every field at its fallback value.
    pub fn defaults(class: ChartClass) -> Self {
        SemanticSummary {
            class,
            title: DEFAULT_TITLE.to_string(),
            x_label: None,
            y_label: None,
            legend: false,
            legend_entries: Vec::new(),
            x_tick_labels: Vec::new(),
            n_categories: DEFAULT_N_CATEGORIES,
            slice_labels: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AxisLabels {
    pub x_label: Option<String>,
    pub y_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Legend {
    pub present: bool,
    pub entries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ticks {
    pub x_tick_labels: Vec<String>,
    pub n_categories: usize,
}

fn dims(ocr: &OcrResult) -> (f64, f64) {
    (ocr.image_dims.w as f64, ocr.image_dims.h as f64)
}

fn origin(b: &BBox) -> (i32, i32) {
    (b.y, b.x)
}

fn sorted_phrases(ocr: &OcrResult) -> Vec<&Phrase> {
    let mut v: Vec<&Phrase> = ocr.phrases.iter().collect();
    v.sort_by_key(|p| origin(&p.bbox));
    v
}

fn is_top_center(p: &Phrase, w: f64, h: f64) -> bool {
    let cx = p.bbox.center_x();
    (p.bbox.y as f64) < TITLE_TOP_FRAC * h && cx >= TITLE_CENTER_BAND.0 * w && cx <= TITLE_CENTER_BAND.1 * w
}

fn title_phrase(ocr: &OcrResult) -> Option<&Phrase> {
    let (w, h) = dims(ocr);
    sorted_phrases(ocr)
        .into_iter()
        .find(|p| p.word_count() > 1 && is_top_center(p, w, h))
}

/// Lowercased alphanumerics only, so "VS." matches "vs".
fn normalized(word: &str) -> String {
    word.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

fn is_versus(word: &Word) -> bool {
    matches!(normalized(&word.text).as_str(), "vs" | "v")
}

/// Scans for a multi-word top-center phrase, then for "A vs B" on one row,
/// then falls back to the default title.
pub fn find_title(ocr: &OcrResult) -> String {
    if let Some(p) = title_phrase(ocr) {
        return p.text.clone();
    }
    let mut hits: Vec<(&Phrase, usize)> = Vec::new();
    for p in &ocr.phrases {
        if p.orientation != TextOrientation::Horizontal {
            continue;
        }
        for i in 1..p.words.len().saturating_sub(1) {
            if is_versus(&p.words[i]) {
                hits.push((p, i));
            }
        }
    }
    hits.sort_by_key(|(p, i)| origin(&p.words[*i].bbox));
    if let Some((p, i)) = hits.first() {
        let w = &p.words;
        return format!("{} {} {}", w[i - 1].text, w[*i].text, w[i + 1].text);
    }
    DEFAULT_TITLE.to_string()
}

pub fn find_axis_labels(ocr: &OcrResult, class: ChartClass) -> AxisLabels {
    if !class.has_axes() {
        return AxisLabels::default();
    }
    let (w, h) = dims(ocr);
    let phrases = sorted_phrases(ocr);
    let y_label = phrases
        .iter()
        .filter(|p| p.orientation == TextOrientation::Vertical && (p.bbox.right() as f64) < Y_LABEL_RIGHT_FRAC * w)
        .min_by_key(|p| (p.bbox.x, p.bbox.y))
        .map(|p| p.text.clone());
    let x_label = phrases
        .iter()
        .filter(|p| p.orientation == TextOrientation::Horizontal && p.bbox.y as f64 > X_LABEL_TOP_FRAC * h)
        .min_by(|a, b| {
            let da = (a.bbox.center_x() - w / 2.0).abs();
            let db = (b.bbox.center_x() - w / 2.0).abs();
            da.total_cmp(&db)
        })
        .map(|p| p.text.clone());
    AxisLabels { x_label, y_label }
}

fn x_overlap(a: &BBox, b: &BBox) -> f64 {
    let o = a.right().min(b.right()) - a.x.max(b.x);
    let narrow = a.w.min(b.w);
    if o <= 0 || narrow <= 0 {
        0.0
    } else {
        o as f64 / narrow as f64
    }
}

fn stacked(a: &Phrase, b: &Phrase) -> bool {
    let (top, bottom) = if a.bbox.y <= b.bbox.y { (a, b) } else { (b, a) };
    let gap = bottom.bbox.y - top.bbox.bottom();
    let limit = 2 * a.glyph_height().max(b.glyph_height());
    x_overlap(&a.bbox, &b.bbox) >= LEGEND_MIN_X_OVERLAP && gap >= 0 && gap <= limit
}

/// Looks for a column of short phrases in the right half of the plot area.
/// Pie charts never report a legend: their slice labels are the key.
pub fn detect_legend(ocr: &OcrResult, class: ChartClass) -> Legend {
    if class == ChartClass::Pie {
        return Legend::default();
    }
    let (w, h) = dims(ocr);
    let cands: Vec<&Phrase> = sorted_phrases(ocr)
        .into_iter()
        .filter(|p| {
            p.orientation == TextOrientation::Horizontal
                && p.word_count() <= LEGEND_MAX_WORDS
                && p.bbox.x as f64 >= 0.5 * w
                && p.bbox.y as f64 >= LEGEND_BAND.0 * h
                && (p.bbox.bottom() as f64) <= LEGEND_BAND.1 * h
        })
        .collect();
    // Connected runs of stacked phrases; the longest run wins, the
    // topmost on ties.
    let n = cands.len();
    let mut group = (0..n).collect::<Vec<usize>>();
    for i in 0..n {
        for j in (i + 1)..n {
            if stacked(cands[i], cands[j]) {
                let (gi, gj) = (group[i], group[j]);
                for g in group.iter_mut() {
                    if *g == gj {
                        *g = gi;
                    }
                }
            }
        }
    }
    let mut best: Option<Vec<&Phrase>> = None;
    for root in 0..n {
        let members: Vec<&Phrase> = (0..n).filter(|&i| group[i] == root).map(|i| cands[i]).collect();
        if members.len() >= 2 && best.as_ref().is_none_or(|b| members.len() > b.len()) {
            best = Some(members);
        }
    }
    match best {
        Some(mut members) => {
            members.sort_by_key(|p| origin(&p.bbox));
            Legend {
                present: true,
                entries: members.iter().map(|p| p.text.clone()).collect(),
            }
        }
        None => Legend::default(),
    }
}

pub fn count_ticks(ocr: &OcrResult) -> Ticks {
    let (_, h) = dims(ocr);
    let mut ticks: Vec<&Phrase> = ocr
        .phrases
        .iter()
        .filter(|p| {
            let top = p.bbox.y as f64;
            p.orientation == TextOrientation::Horizontal
                && p.word_count() == 1
                && top >= TICK_BAND.0 * h
                && top <= TICK_BAND.1 * h
        })
        .collect();
    ticks.sort_by_key(|p| (p.bbox.x, p.bbox.y));
    let x_tick_labels: Vec<String> = ticks.iter().map(|p| p.text.clone()).collect();
    let n_categories = if x_tick_labels.is_empty() {
        DEFAULT_N_CATEGORIES
    } else {
        x_tick_labels.len()
    };
    Ticks {
        x_tick_labels,
        n_categories,
    }
}

/// Every phrase except the title, in reading order.
fn slice_labels(ocr: &OcrResult) -> Vec<String> {
    let title = title_phrase(ocr).map(|p| p.bbox);
    sorted_phrases(ocr)
        .into_iter()
        .filter(|p| Some(p.bbox) != title)
        .map(|p| p.text.clone())
        .collect()
}

pub fn analyze(class: ChartClass, ocr: &OcrResult) -> SemanticSummary {
    let title = find_title(ocr);
    let labels = find_axis_labels(ocr, class);
    let legend = detect_legend(ocr, class);
    let (x_tick_labels, slice_labels, n_categories) = if class == ChartClass::Pie {
        let slices = slice_labels(ocr);
        let n = if slices.is_empty() { DEFAULT_N_CATEGORIES } else { slices.len() };
        (Vec::new(), slices, n)
    } else {
        let t = count_ticks(ocr);
        (t.x_tick_labels, Vec::new(), t.n_categories)
    };
    SemanticSummary {
        class,
        title,
        x_label: labels.x_label,
        y_label: labels.y_label,
        legend: legend.present,
        legend_entries: legend.entries,
        x_tick_labels,
        n_categories,
        slice_labels,
    }
}
