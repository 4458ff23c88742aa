use super::{GroundTruth, TextItem, TextRole};
use crate::chart::{ensure_valid, ChartClass, ChartSpec, Categories};
use crate::error::Result;
use crate::raster::{text_bbox, BBox, BitmapFont, RasterImage, Rgb, Shape, TextOrientation};

/// Fixed chart geometry. Plot y grows downward.
pub mod layout {
    pub const WIDTH: u32 = 640;
    pub const HEIGHT: u32 = 480;
    pub const PLOT_LEFT: i32 = 80;
    pub const PLOT_RIGHT: i32 = 560;
    pub const PLOT_TOP: i32 = 60;
    pub const PLOT_BOTTOM: i32 = 420;
    pub const TITLE_Y: i32 = 12;
    pub const TITLE_SCALE: u32 = 2;
    pub const LABEL_SCALE: u32 = 2;
    pub const Y_LABEL_X: i32 = 16;
    pub const X_LABEL_Y: i32 = 448;
    pub const TICK_Y: i32 = 428;
    pub const SMALL_SCALE: u32 = 1;
    /// Value axis tops out at this multiple of the largest value, leaving the
    /// upper part of the plot free for the legend.
    pub const HEADROOM: f64 = 1.3;
    pub const LEGEND_TOP: i32 = 68;
    pub const LEGEND_PITCH: i32 = 14;
    pub const LEGEND_SWATCH: i32 = 9;
    pub const LEGEND_GAP: i32 = 6;
    pub const LEGEND_MARGIN: i32 = 8;
    pub const MARKER_RADIUS: i32 = 4;
    pub const PIE_RADIUS: i32 = 130;
    pub const PIE_LABEL_OFFSET: i32 = 12;

    pub fn plot_width() -> i32 {
        PLOT_RIGHT - PLOT_LEFT
    }

    pub fn plot_height() -> i32 {
        PLOT_BOTTOM - PLOT_TOP
    }

    pub fn plot_center() -> (i32, i32) {
        ((PLOT_LEFT + PLOT_RIGHT) / 2, (PLOT_TOP + PLOT_BOTTOM) / 2)
    }
}

use layout::*;

pub const PALETTE: [Rgb; 8] = [
    Rgb(31, 119, 180),
    Rgb(255, 127, 14),
    Rgb(44, 160, 44),
    Rgb(214, 39, 40),
    Rgb(148, 103, 189),
    Rgb(140, 86, 75),
    Rgb(227, 119, 194),
    Rgb(127, 127, 127),
];

/// Light sequential ramp; every step stays above the OCR ink threshold so
/// black cell annotations remain legible.
pub const HEAT_RAMP: [Rgb; 8] = [
    Rgb(255, 255, 229),
    Rgb(255, 247, 188),
    Rgb(254, 235, 160),
    Rgb(254, 222, 130),
    Rgb(254, 205, 100),
    Rgb(254, 188, 80),
    Rgb(250, 170, 70),
    Rgb(245, 155, 65),
];

pub fn palette_color(palette_id: u32, k: usize) -> Rgb {
    PALETTE[(palette_id as usize + k) % PALETTE.len()]
}

struct Canvas<'a> {
    img: RasterImage,
    font: &'a BitmapFont,
    items: Vec<TextItem>,
}

impl Canvas<'_> {
    fn text(&mut self, anchor: (i32, i32), text: &str, scale: u32, orientation: TextOrientation, role: TextRole) -> Result<BBox> {
        let bbox = self
            .img
            .draw_text(self.font, anchor, text, scale, orientation, Rgb::BLACK)?;
        self.items.push(TextItem {
            text: text.to_string(),
            bbox,
            orientation,
            role,
        });
        Ok(bbox)
    }

    fn centered_text(&mut self, cx: i32, y: i32, text: &str, scale: u32, role: TextRole) -> Result<BBox> {
        let w = text_bbox((0, 0), text, scale, TextOrientation::Horizontal)?.w;
        self.text((cx - w / 2, y), text, scale, TextOrientation::Horizontal, role)
    }
}

/// Renders a valid spec onto a 640x480 RGB canvas and records every string
/// drawn, with its exact text box.
pub fn render(spec: &ChartSpec) -> Result<(RasterImage, GroundTruth)> {
    ensure_valid(spec)?;
    let mut cv = Canvas {
        img: RasterImage::new(WIDTH, HEIGHT, 3, 255)?,
        font: BitmapFont::embedded(),
        items: Vec::new(),
    };

    cv.centered_text(WIDTH as i32 / 2, TITLE_Y, &spec.title, TITLE_SCALE, TextRole::Title)?;

    match spec.class {
        ChartClass::Bar | ChartClass::StackedBar | ChartClass::GroupedBar => {
            draw_axes(&mut cv.img);
            draw_bars(&mut cv, spec)?;
        }
        ChartClass::Scatter | ChartClass::GroupedScatter => {
            draw_axes(&mut cv.img);
            draw_scatter(&mut cv, spec)?;
        }
        ChartClass::Pie => draw_pie(&mut cv, spec)?,
        ChartClass::Heatmap => draw_heatmap(&mut cv, spec)?,
    }

    if spec.class.has_axes() {
        if let Some(label) = &spec.y_label {
            let h = text_bbox((0, 0), label, LABEL_SCALE, TextOrientation::Vertical)?.h;
            let (_, cy) = plot_center();
            cv.text((Y_LABEL_X, cy - h / 2), label, LABEL_SCALE, TextOrientation::Vertical, TextRole::YLabel)?;
        }
        if let Some(label) = &spec.x_label {
            cv.centered_text(plot_center().0, X_LABEL_Y, label, LABEL_SCALE, TextRole::XLabel)?;
        }
    }
    if spec.legend && spec.class != ChartClass::Pie && spec.class != ChartClass::Heatmap {
        draw_legend(&mut cv, spec)?;
    }

    let truth = GroundTruth::from_spec(spec, cv.items);
    Ok((cv.img, truth))
}

fn draw_axes(img: &mut RasterImage) {
    img.draw(
        Shape::Line { x0: PLOT_LEFT, y0: PLOT_TOP, x1: PLOT_LEFT, y1: PLOT_BOTTOM },
        Rgb::BLACK,
    );
    img.draw(
        Shape::Line { x0: PLOT_LEFT, y0: PLOT_BOTTOM, x1: PLOT_RIGHT, y1: PLOT_BOTTOM },
        Rgb::BLACK,
    );
}

fn value_to_px(v: f64, vmax: f64) -> i32 {
    (v / vmax * plot_height() as f64).round() as i32
}

fn draw_bars(cv: &mut Canvas<'_>, spec: &ChartSpec) -> Result<()> {
    let n = spec.categories.len();
    let slot = plot_width() as f64 / n as f64;
    let k = spec.series.len();
    let vmax = match spec.class {
        ChartClass::StackedBar => (0..n)
            .map(|i| spec.series.iter().map(|s| s.values[i]).sum::<f64>())
            .fold(0.0, f64::max),
        _ => spec.series.iter().flat_map(|s| &s.values).copied().fold(0.0, f64::max),
    }
    .max(1e-9)
        * HEADROOM;
    let base = PLOT_BOTTOM - 1;

    for i in 0..n {
        let center = PLOT_LEFT as f64 + (i as f64 + 0.5) * slot;
        match spec.class {
            ChartClass::GroupedBar => {
                let group = slot * 0.8;
                let bw = group / k as f64;
                for (j, s) in spec.series.iter().enumerate() {
                    let x0 = (center - group / 2.0 + j as f64 * bw).round() as i32;
                    let x1 = (center - group / 2.0 + (j + 1) as f64 * bw).round() as i32 - 1;
                    let h = value_to_px(s.values[i], vmax);
                    if h > 0 {
                        cv.img.draw(Shape::Rect { x0, y0: base - h + 1, x1, y1: base }, palette_color(spec.palette_id, j));
                    }
                }
            }
            _ => {
                let half = slot * 0.3;
                let x0 = (center - half).round() as i32;
                let x1 = (center + half).round() as i32 - 1;
                let mut acc = 0.0;
                for (j, s) in spec.series.iter().enumerate() {
                    let lo = value_to_px(acc, vmax);
                    acc += s.values[i];
                    let hi = value_to_px(acc, vmax);
                    if hi > lo {
                        cv.img.draw(
                            Shape::Rect { x0, y0: base - hi + 1, x1, y1: base - lo },
                            palette_color(spec.palette_id, j),
                        );
                    }
                }
            }
        }
    }
    for (i, label) in spec.categories.display_labels().iter().enumerate() {
        let center = PLOT_LEFT as f64 + (i as f64 + 0.5) * slot;
        cv.centered_text(center.round() as i32, TICK_Y, label, SMALL_SCALE, TextRole::TickLabel)?;
    }
    Ok(())
}

fn scatter_x_positions(spec: &ChartSpec) -> Vec<i32> {
    let n = spec.categories.len();
    let xs: Vec<f64> = match &spec.categories {
        Categories::Numeric(v) => v.clone(),
        Categories::Labels(_) => (0..n).map(|i| i as f64).collect(),
    };
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = if n > 1 && hi > lo { (hi - lo) / (n - 1) as f64 } else { 1.0 };
    let (lo, hi) = (lo - pad, hi + pad);
    xs.iter()
        .map(|x| (PLOT_LEFT as f64 + (x - lo) / (hi - lo) * plot_width() as f64).round() as i32)
        .collect()
}

fn draw_scatter(cv: &mut Canvas<'_>, spec: &ChartSpec) -> Result<()> {
    let xs = scatter_x_positions(spec);
    let vmax = spec
        .series
        .iter()
        .flat_map(|s| &s.values)
        .copied()
        .fold(0.0, f64::max)
        .max(1e-9)
        * HEADROOM;
    for (j, s) in spec.series.iter().enumerate() {
        let color = palette_color(spec.palette_id, j);
        for (&px, &v) in xs.iter().zip(&s.values) {
            let py = PLOT_BOTTOM - 1 - value_to_px(v, vmax);
            // keep markers clear of the axis lines
            let py = py.min(PLOT_BOTTOM - 2 - MARKER_RADIUS);
            cv.img.draw(Shape::Disc { cx: px, cy: py, r: MARKER_RADIUS }, color);
        }
    }
    for (label, &px) in spec.categories.display_labels().iter().zip(&xs) {
        cv.centered_text(px, TICK_Y, label, SMALL_SCALE, TextRole::TickLabel)?;
    }
    Ok(())
}

fn draw_legend(cv: &mut Canvas<'_>, spec: &ChartSpec) -> Result<()> {
    let names: Vec<&str> = spec
        .series
        .iter()
        .map(|s| s.name.as_str())
        .filter(|n| !n.trim().is_empty())
        .collect();
    let max_w = names
        .iter()
        .map(|n| text_bbox((0, 0), n, SMALL_SCALE, TextOrientation::Horizontal).map(|b| b.w))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let x = PLOT_RIGHT - LEGEND_MARGIN - (LEGEND_SWATCH + LEGEND_GAP + max_w);
    for (k, s) in spec.series.iter().enumerate() {
        if s.name.trim().is_empty() {
            continue;
        }
        let y = LEGEND_TOP + k as i32 * LEGEND_PITCH;
        cv.img.draw(
            Shape::Rect { x0: x, y0: y, x1: x + LEGEND_SWATCH - 1, y1: y + LEGEND_SWATCH - 1 },
            palette_color(spec.palette_id, k),
        );
        cv.text((x + LEGEND_SWATCH + LEGEND_GAP, y + 1), &s.name, SMALL_SCALE, TextOrientation::Horizontal, TextRole::LegendEntry)?;
    }
    Ok(())
}

fn draw_pie(cv: &mut Canvas<'_>, spec: &ChartSpec) -> Result<()> {
    let (cx, cy) = plot_center();
    let values = &spec.series[0].values;
    let total: f64 = values.iter().sum();
    let mut start = 90.0;
    let mut mids = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        let sweep = v / total * 360.0;
        cv.img.draw(
            Shape::Wedge { cx, cy, r: PIE_RADIUS, start_deg: start, end_deg: start + sweep },
            palette_color(spec.palette_id, i),
        );
        mids.push(start + sweep / 2.0);
        start += sweep;
    }

    // Labels sit outside the rim at each slice's mid-angle, pushed outward
    // until they clear the disc and every earlier label.
    let mut placed: Vec<BBox> = Vec::new();
    for (label, mid) in spec.categories.display_labels().iter().zip(mids) {
        let size = text_bbox((0, 0), label, SMALL_SCALE, TextOrientation::Horizontal)?;
        let (c, s) = (mid.to_radians().cos(), mid.to_radians().sin());
        let mut dist = (PIE_RADIUS + PIE_LABEL_OFFSET) as f64;
        let bbox = loop {
            let px = cx as f64 + dist * c;
            let py = cy as f64 - dist * s;
            let x = (px + (c * 0.5 - 0.5) * size.w as f64).round() as i32;
            let y = (py - size.h as f64 / 2.0 - s * size.h as f64 / 2.0).round() as i32;
            let b = BBox::new(x, y, size.w, size.h);
            let clear_of_disc = min_dist_sq(cx, cy, &b) > ((PIE_RADIUS + 3) as i64).pow(2);
            let clear_of_labels = placed.iter().all(|p| !near(p, &b));
            if (clear_of_disc && clear_of_labels) || dist > 400.0 {
                break b;
            }
            dist += 4.0;
        };
        placed.push(bbox);
        cv.text((bbox.x, bbox.y), label, SMALL_SCALE, TextOrientation::Horizontal, TextRole::SliceLabel)?;
    }
    Ok(())
}

fn min_dist_sq(cx: i32, cy: i32, b: &BBox) -> i64 {
    let dx = (b.x - cx).max(0).max(cx - (b.right() - 1)) as i64;
    let dy = (b.y - cy).max(0).max(cy - (b.bottom() - 1)) as i64;
    dx * dx + dy * dy
}

/// Labels must stay far enough apart to read as separate phrases.
fn near(a: &BBox, b: &BBox) -> bool {
    let grow = BBox::new(a.x - 24, a.y - 6, a.w + 48, a.h + 12);
    grow.intersection_area(b) > 0
}

fn draw_heatmap(cv: &mut Canvas<'_>, spec: &ChartSpec) -> Result<()> {
    let g = spec.grid.as_ref().expect("validated heatmap");
    let lo = g.cell_values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = g.cell_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-9);
    let col_x = |c: usize| PLOT_LEFT + (c as i32 * plot_width()) / g.cols as i32;
    let row_y = |r: usize| PLOT_TOP + (r as i32 * plot_height()) / g.rows as i32;
    for r in 0..g.rows {
        for c in 0..g.cols {
            let v = g.cell_values[r * g.cols + c];
            let level = (((v - lo) / span) * HEAT_RAMP.len() as f64).floor() as usize;
            let color = HEAT_RAMP[level.min(HEAT_RAMP.len() - 1)];
            cv.img.draw(
                Shape::Rect { x0: col_x(c), y0: row_y(r), x1: col_x(c + 1) - 1, y1: row_y(r + 1) - 1 },
                color,
            );
        }
    }
    if spec.overlay_cell_values {
        for r in 0..g.rows {
            for c in 0..g.cols {
                let text = crate::chart::format_number(g.cell_values[r * g.cols + c]);
                let cx = (col_x(c) + col_x(c + 1)) / 2;
                let cy = (row_y(r) + row_y(r + 1)) / 2;
                cv.centered_text(cx, cy - 3, &text, SMALL_SCALE, TextRole::CellValue)?;
            }
        }
    }
    Ok(())
}
