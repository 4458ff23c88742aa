//! End-to-end inference, evaluation and the round-trip harness.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::chart::ChartClass;
use crate::cnn::{load_model, CnnModel};
use crate::codegen::{instantiate, lint_artifact, CodeArtifact, TemplateSet};
use crate::corpus::{item_seed, render, sample_spec, CorpusManifest};
use crate::error::{Error, Result, Stage};
use crate::ocr::{ocr_image, OcrResult};
use crate::raster::{decode_image, read_image, BBox, BitmapFont, RasterImage, TextOrientation};
use crate::semantics::{analyze, SemanticSummary};

/// Below this classifier confidence the report carries a warning.
pub const LOW_CONFIDENCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseDigest {
    pub text: String,
    pub bbox: BBox,
    pub orientation: TextOrientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcrDigest {
    pub n_words: usize,
    pub phrases: Vec<PhraseDigest>,
}

impl From<&OcrResult> for OcrDigest {
    fn from(r: &OcrResult) -> Self {
        OcrDigest {
            n_words: r.words.len(),
            phrases: r
                .phrases
                .iter()
                .map(|p| PhraseDigest {
                    text: p.text.clone(),
                    bbox: p.bbox,
                    orientation: p.orientation,
                })
                .collect(),
        }
    }
}

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub decode_ms: f64,
    pub classify_ms: f64,
    pub ocr_ms: f64,
    pub semantics_ms: f64,
    pub codegen_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub class: ChartClass,
    pub confidence: f64,
    pub ocr: OcrDigest,
    pub summary: SemanticSummary,
    pub artifact: CodeArtifact,
    pub timings: Timings,
}

/// The JSON body of the HTTP generate endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub chart_class: ChartClass,
    pub confidence: f64,
    pub title: String,
    pub x_label: Option<String>,
    pub y_label: Option<String>,
    pub legend: bool,
    pub legend_entries: Vec<String>,
    pub code: String,
    pub warnings: Vec<String>,
}

impl From<&InferenceReport> for GenerateResponse {
    fn from(r: &InferenceReport) -> Self {
        GenerateResponse {
            chart_class: r.class,
            confidence: r.confidence,
            title: r.summary.title.clone(),
            x_label: r.summary.x_label.clone(),
            y_label: r.summary.y_label.clone(),
            legend: r.summary.legend,
            legend_entries: r.summary.legend_entries.clone(),
            code: r.artifact.code.clone(),
            warnings: r.artifact.warnings.clone(),
        }
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

/// A loaded model plus templates. Immutable, so one instance can serve
/// concurrent requests.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub model: CnnModel,
    pub templates: TemplateSet,
}

impl Pipeline {
    pub fn new(model: CnnModel, templates: TemplateSet) -> Self {
        Pipeline { model, templates }
    }

    /// Loads a model file and uses the built-in templates.
    pub fn load(model_path: impl AsRef<Path>) -> Result<Self> {
        let model = load_model(model_path).map_err(|e| e.at(Stage::Load))?;
        Ok(Pipeline::new(model, TemplateSet::builtin()))
    }

    pub fn infer_path(&self, path: impl AsRef<Path>) -> Result<InferenceReport> {
        let t = Instant::now();
        let img = read_image(path).map_err(|e| e.at(Stage::Decode))?;
        let decode_ms = ms(t);
        self.run(&img, decode_ms, t)
    }

    pub fn infer_bytes(&self, bytes: &[u8]) -> Result<InferenceReport> {
        let t = Instant::now();
        let img = decode_image(bytes).map_err(|e| e.at(Stage::Decode))?;
        let decode_ms = ms(t);
        self.run(&img, decode_ms, t)
    }

    pub fn infer_image(&self, img: &RasterImage) -> Result<InferenceReport> {
        self.run(img, 0.0, Instant::now())
    }

    fn run(&self, img: &RasterImage, decode_ms: f64, start: Instant) -> Result<InferenceReport> {
        let t = Instant::now();
        let pred = self.model.predict(img).map_err(|e| e.at(Stage::Classify))?;
        let classify_ms = ms(t);

        let t = Instant::now();
        let ocr = ocr_image(img, BitmapFont::embedded());
        let ocr_ms = ms(t);

        let t = Instant::now();
        let summary = analyze(pred.class, &ocr);
        let semantics_ms = ms(t);

        let t = Instant::now();
        let template = self.templates.template_for(pred.class).map_err(|e| e.at(Stage::Codegen))?;
        let mut artifact = instantiate(template, &summary).map_err(|e| e.at(Stage::Codegen))?;
        let issues = lint_artifact(&artifact);
        if !issues.is_empty() {
            let list: Vec<String> = issues.iter().map(ToString::to_string).collect();
            return Err(Error::Internal(format!("generated code failed lint: {}", list.join("; "))).at(Stage::Lint));
        }
        if pred.confidence < LOW_CONFIDENCE {
            artifact.warnings.push(format!(
                "low classifier confidence {:.2} (below {LOW_CONFIDENCE:.2}); the chart type may be wrong",
                pred.confidence
            ));
        }
        let codegen_ms = ms(t);

        Ok(InferenceReport {
            class: pred.class,
            confidence: pred.confidence,
            ocr: OcrDigest::from(&ocr),
            summary,
            artifact,
            timings: Timings {
                decode_ms,
                classify_ms,
                ocr_ms,
                semantics_ms,
                codegen_ms,
                total_ms: ms(start),
            },
        })
    }
}

pub fn infer(image_path: impl AsRef<Path>, model_path: impl AsRef<Path>) -> Result<InferenceReport> {
    Pipeline::load(model_path)?.infer_path(image_path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Row and column order of `confusion`.
    pub classes: Vec<ChartClass>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub per_class_accuracy: BTreeMap<ChartClass, f64>,
    pub overall_accuracy: f64,
    pub n: usize,
    pub skipped: Vec<String>,
}

impl EvalReport {
    pub fn from_pairs(pairs: &[(ChartClass, ChartClass)], skipped: Vec<String>) -> Self {
        let classes = ChartClass::ALL.to_vec();
        let mut confusion = vec![vec![0usize; classes.len()]; classes.len()];
        for &(t, p) in pairs {
            confusion[t.index()][p.index()] += 1;
        }
        let mut per_class_accuracy = BTreeMap::new();
        for &c in &classes {
            let row = &confusion[c.index()];
            let total: usize = row.iter().sum();
            if total > 0 {
                per_class_accuracy.insert(c, row[c.index()] as f64 / total as f64);
            }
        }
        let n = pairs.len();
        let correct: usize = (0..classes.len()).map(|i| confusion[i][i]).sum();
        EvalReport {
            classes,
            confusion,
            per_class_accuracy,
            overall_accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
            n,
            skipped,
        }
    }

    /// Fixed-width confusion matrix, rows are true classes.
    pub fn confusion_table(&self) -> String {
        let w = self.classes.iter().map(|c| c.name().len()).max().unwrap_or(4) + 1;
        let mut s = format!("{:w$}", "true\\pred");
        for c in &self.classes {
            s.push_str(&format!("{:>w$}", c.name()));
        }
        s.push('\n');
        for (i, c) in self.classes.iter().enumerate() {
            s.push_str(&format!("{:w$}", c.name()));
            for v in &self.confusion[i] {
                s.push_str(&format!("{v:>w$}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Classifies every corpus item. Unreadable items are listed; more than
/// 5% unreadable aborts.
pub fn evaluate(manifest: &CorpusManifest, model: &CnnModel) -> Result<EvalReport> {
    if manifest.items.is_empty() {
        return Err(Error::InvalidInput("corpus manifest has no items".into()));
    }
    let mut pairs = Vec::with_capacity(manifest.items.len());
    let mut skipped = Vec::new();
    for item in &manifest.items {
        let path = manifest.image_path(item);
        match read_image(&path).and_then(|img| model.predict(&img)) {
            Ok(p) => pairs.push((item.class, p.class)),
            Err(e) => skipped.push(format!("{}: {e}", path.display())),
        }
    }
    if skipped.len() * 20 > manifest.items.len() {
        return Err(Error::Corpus(format!(
            "{} of {} items unreadable, first: {}",
            skipped.len(),
            manifest.items.len(),
            skipped[0]
        )));
    }
    Ok(EvalReport::from_pairs(&pairs, skipped))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripFailure {
    pub index: usize,
    pub class: ChartClass,
    pub seed: u64,
    pub diffs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub n: usize,
    pub class_recovery_rate: f64,
    pub title_exact_rate: f64,
    pub y_label_exact_rate: f64,
    pub legend_agreement_rate: f64,
    /// Share of items whose code was produced and passed lint.
    pub lint_pass_rate: f64,
    pub failures: Vec<RoundTripFailure>,
}

/// Compares recovered semantics against the generator's ground truth for
/// `n` specs, cycling through the classes.
pub fn roundtrip(n: usize, master_seed: u64, pipeline: &Pipeline) -> Result<RoundTripReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("round trip needs n >= 1".into()));
    }
    let mut ok = [0usize; 5];
    let mut failures = Vec::new();
    for i in 0..n {
        let class = ChartClass::ALL[i % ChartClass::ALL.len()];
        let seed = item_seed(master_seed, class, i as u64);
        let (img, truth) = render(&sample_spec(class, seed))?;
        let mut diffs = Vec::new();
        match pipeline.infer_image(&img) {
            Ok(r) => {
                let s = &r.summary;
                let checks = [
                    ("class", r.class == truth.class, format!("{} != {}", r.class, truth.class)),
                    ("title", s.title == truth.title, format!("{:?} != {:?}", s.title, truth.title)),
                    ("y_label", s.y_label == truth.y_label, format!("{:?} != {:?}", s.y_label, truth.y_label)),
                    (
                        "legend",
                        s.legend == truth.legend && (!truth.legend || s.legend_entries == truth.legend_entries),
                        format!("{} {:?} != {} {:?}", s.legend, s.legend_entries, truth.legend, truth.legend_entries),
                    ),
                ];
                for (k, (field, good, diff)) in checks.into_iter().enumerate() {
                    if good {
                        ok[k] += 1;
                    } else {
                        diffs.push(format!("{field}: {diff}"));
                    }
                }
                ok[4] += 1;
            }
            Err(e) => diffs.push(format!("pipeline: {e}")),
        }
        if !diffs.is_empty() {
            failures.push(RoundTripFailure { index: i, class, seed, diffs });
        }
    }
    let rate = |k: usize| ok[k] as f64 / n as f64;
    Ok(RoundTripReport {
        n,
        class_recovery_rate: rate(0),
        title_exact_rate: rate(1),
        y_label_exact_rate: rate(2),
        legend_agreement_rate: rate(3),
        lint_pass_rate: rate(4),
        failures,
    })
}
