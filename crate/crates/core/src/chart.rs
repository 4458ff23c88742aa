//! Chart intermediate representation.
//!
//! A [`ChartSpec`] describes one single-panel chart. [`layer_view`] projects
//! it onto the seven grammar-of-graphics layers (data, aesthetics, scale,
//! geometric object, statistics, facets, coordinate system).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartClass {
    Bar,
    StackedBar,
    GroupedBar,
    Scatter,
    GroupedScatter,
    Pie,
    Heatmap,
}

impl ChartClass {
    pub const ALL: [ChartClass; 7] = [
        ChartClass::Bar,
        ChartClass::StackedBar,
        ChartClass::GroupedBar,
        ChartClass::Scatter,
        ChartClass::GroupedScatter,
        ChartClass::Pie,
        ChartClass::Heatmap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChartClass::Bar => "bar",
            ChartClass::StackedBar => "stacked_bar",
            ChartClass::GroupedBar => "grouped_bar",
            ChartClass::Scatter => "scatter",
            ChartClass::GroupedScatter => "grouped_scatter",
            ChartClass::Pie => "pie",
            ChartClass::Heatmap => "heatmap",
        }
    }

    pub fn index(self) -> usize {
        ChartClass::ALL.iter().position(|&c| c == self).unwrap()
    }

    /// Classes drawn on x/y axes (everything but pie).
    pub fn has_axes(self) -> bool {
        self != ChartClass::Pie
    }

    pub fn is_multi_series(self) -> bool {
        matches!(
            self,
            ChartClass::StackedBar | ChartClass::GroupedBar | ChartClass::GroupedScatter
        )
    }

    pub fn is_scatter(self) -> bool {
        matches!(self, ChartClass::Scatter | ChartClass::GroupedScatter)
    }
}

impl fmt::Display for ChartClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChartClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        match norm.as_str() {
            // "color map" is treated as another name for a heat map
            "color_map" | "colormap" | "heat_map" => return Ok(ChartClass::Heatmap),
            _ => {}
        }
        ChartClass::ALL
            .into_iter()
            .find(|c| c.name() == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown chart class {s:?}")))
    }
}

/// Bar/pie categories are labels; scatter categories are numeric x positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Categories {
    Labels(Vec<String>),
    Numeric(Vec<f64>),
}

impl Categories {
    pub fn len(&self) -> usize {
        match self {
            Categories::Labels(v) => v.len(),
            Categories::Numeric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Text shown on the axis for each category.
    pub fn display_labels(&self) -> Vec<String> {
        match self {
            Categories::Labels(v) => v.clone(),
            Categories::Numeric(v) => v.iter().map(|x| format_number(*x)).collect(),
        }
    }
}

impl Default for Categories {
    fn default() -> Self {
        Categories::Labels(Vec::new())
    }
}

/// Integers print without a decimal point; everything else with one digit.
pub fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.1}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatGrid {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, `rows * cols` entries.
    pub cell_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub class: ChartClass,
    pub title: String,
    pub x_label: Option<String>,
    pub y_label: Option<String>,
    pub categories: Categories,
    pub series: Vec<Series>,
    pub legend: bool,
    pub grid: Option<HeatGrid>,
    #[serde(default)]
    pub overlay_cell_values: bool,
    pub palette_id: u32,
    pub seed: u64,
}

/// One broken invariant: which field, and which rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Violation {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

pub fn is_drawable(s: &str) -> bool {
    s.chars().all(|c| (' '..='~').contains(&c))
}

/// Checks every ChartSpec invariant. An empty vector means the spec is valid.
pub fn validate(spec: &ChartSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut text = |field: &str, s: &str| {
        if !is_drawable(s) {
            out.push(Violation::new(field, "string must be printable ASCII"));
        }
    };
    text("title", &spec.title);
    if let Some(l) = &spec.x_label {
        text("x_label", l);
    }
    if let Some(l) = &spec.y_label {
        text("y_label", l);
    }
    if let Categories::Labels(labels) = &spec.categories {
        for l in labels {
            text("categories", l);
        }
    }
    for s in &spec.series {
        text("series.name", &s.name);
    }

    if spec.legend && !spec.series.iter().any(|s| !s.name.trim().is_empty()) {
        out.push(Violation::new("legend", "legend requires at least one named series"));
    }
    for s in &spec.series {
        if s.values.iter().any(|v| !v.is_finite()) {
            out.push(Violation::new("series.values", "values must be finite"));
        } else if spec.class != ChartClass::Pie && s.values.iter().any(|&v| v < 0.0) {
            out.push(Violation::new("series.values", "values must be non-negative"));
        }
    }
    if let Categories::Numeric(xs) = &spec.categories {
        if xs.iter().any(|x| !x.is_finite()) {
            out.push(Violation::new("categories", "numeric categories must be finite"));
        }
        if !spec.class.is_scatter() {
            out.push(Violation::new("categories", "numeric categories are only valid for scatter classes"));
        }
    }

    match spec.class {
        ChartClass::Heatmap => {
            match &spec.grid {
                None => out.push(Violation::new("grid", "heatmap requires a grid")),
                Some(g) => {
                    if g.rows == 0 || g.cols == 0 {
                        out.push(Violation::new("grid", "grid must have at least one row and column"));
                    }
                    if g.cell_values.len() != g.rows * g.cols {
                        out.push(Violation::new("grid.cell_values", "cell count must equal rows x cols"));
                    }
                    if g.cell_values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                        out.push(Violation::new("grid.cell_values", "cell values must be finite and non-negative"));
                    }
                }
            }
            if !spec.series.is_empty() || !spec.categories.is_empty() {
                out.push(Violation::new("series", "heatmap must not carry series or categories"));
            }
        }
        class => {
            if spec.grid.is_some() {
                out.push(Violation::new("grid", "grid is only valid for heatmaps"));
            }
            if spec.overlay_cell_values {
                out.push(Violation::new("overlay_cell_values", "only valid for heatmaps"));
            }
            if spec.series.is_empty() {
                out.push(Violation::new("series", "at least one series is required"));
            }
            if spec.categories.is_empty() {
                out.push(Violation::new("categories", "at least one category is required"));
            }
            let n = spec.categories.len();
            if spec.series.iter().any(|s| s.values.len() != n) {
                out.push(Violation::new("series", "series length mismatch"));
            }
            if class == ChartClass::Pie {
                if spec.series.len() != 1 {
                    out.push(Violation::new("series", "pie must have exactly one series"));
                }
                if spec.series.iter().flat_map(|s| &s.values).any(|&v| v <= 0.0) {
                    out.push(Violation::new("series.values", "pie values must be positive"));
                }
                if spec.x_label.is_some() || spec.y_label.is_some() {
                    out.push(Violation::new("x_label", "pie charts have no axis labels"));
                }
            }
        }
    }
    out
}

pub fn ensure_valid(spec: &ChartSpec) -> Result<()> {
    let v = validate(spec);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarLayers {
    pub data: String,
    pub aesthetics: String,
    pub scale: String,
    pub geometric_object: String,
    pub statistics: String,
    pub facets: String,
    pub coordinate_system: String,
}

pub fn layer_view(spec: &ChartSpec) -> Result<GrammarLayers> {
    ensure_valid(spec)?;
    let class = spec.class;
    let data = match class {
        ChartClass::Heatmap => {
            let g = spec.grid.as_ref().expect("validated");
            format!("{}x{} grid", g.rows, g.cols)
        }
        _ => format!(
            "{} series x {} categories",
            spec.series.len(),
            spec.categories.len()
        ),
    };
    let aesthetics = match class {
        ChartClass::Bar => "x=category, y=value",
        ChartClass::StackedBar | ChartClass::GroupedBar => "x=category, y=value, fill=series",
        ChartClass::Scatter => "x=x_value, y=value",
        ChartClass::GroupedScatter => "x=x_value, y=value, color=series",
        ChartClass::Pie => "angle=value, fill=category",
        ChartClass::Heatmap => "x=column, y=row, fill=value",
    };
    let scale = match class {
        ChartClass::Bar | ChartClass::StackedBar | ChartClass::GroupedBar => "discrete x, linear y",
        ChartClass::Scatter | ChartClass::GroupedScatter => "linear x, linear y",
        ChartClass::Pie => "linear angle",
        ChartClass::Heatmap => "discrete x, discrete y, sequential color",
    };
    let geometric_object = match class {
        ChartClass::Bar | ChartClass::StackedBar | ChartClass::GroupedBar => "bar",
        ChartClass::Scatter | ChartClass::GroupedScatter => "point",
        ChartClass::Pie => "wedge",
        ChartClass::Heatmap => "tile",
    };
    let statistics = match class {
        ChartClass::StackedBar => "stack",
        ChartClass::GroupedBar => "dodge",
        _ => "identity",
    };
    Ok(GrammarLayers {
        data,
        aesthetics: aesthetics.into(),
        scale: scale.into(),
        geometric_object: geometric_object.into(),
        statistics: statistics.into(),
        facets: "none".into(),
        coordinate_system: if class == ChartClass::Pie { "polar" } else { "cartesian" }.into(),
    })
}
