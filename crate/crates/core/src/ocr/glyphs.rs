//! Glyph candidates and template matching.
//!
//! Components are first merged into glyph candidates (stacked parts such as
//! the dot of an `i` or the bars of `=`), separately for each reading
//! orientation. Each candidate is then compared against every font glyph
//! whose ink extent, scaled by an integer factor, equals the candidate's.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::Component;
use crate::raster::{BBox, BitmapFont, TextOrientation, GLYPH_HEIGHT, GLYPH_WIDTH};

pub const MATCH_THRESHOLD: f64 = 0.9;
pub const MAX_SCALE: i32 = 4;

/// A recognized glyph. `bbox` is the full glyph cell, reconstructed from the
/// ink box and the glyph's ink offset within its cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlyphMatch {
    pub ch: char,
    pub bbox: BBox,
    pub ink: BBox,
    pub orientation: TextOrientation,
    pub score: f64,
    pub scale: i32,
    /// Indices into the component list this glyph was built from.
    pub components: Vec<usize>,
}

/// Ink crop of one glyph in one orientation, in font units.
#[derive(Debug, Clone)]
pub(crate) struct Template {
    pub ch: char,
    pub orientation: TextOrientation,
    pub w: i32,
    pub h: i32,
    /// Offset of the crop inside the glyph cell.
    pub dx: i32,
    pub dy: i32,
    pub bits: Vec<bool>,
}

impl Template {
    fn at(&self, x: i32, y: i32) -> bool {
        self.bits[(y * self.w + x) as usize]
    }
}

/// Cell size in font units for an orientation.
pub(crate) fn cell_units(o: TextOrientation) -> (i32, i32) {
    match o {
        TextOrientation::Horizontal => (GLYPH_WIDTH as i32, GLYPH_HEIGHT as i32),
        TextOrientation::Vertical => (GLYPH_HEIGHT as i32, GLYPH_WIDTH as i32),
    }
}

pub(crate) fn templates(font: &BitmapFont) -> Vec<Template> {
    let mut out = Vec::new();
    for g in font.glyphs().iter().filter(|g| !g.is_blank()) {
        for orientation in [TextOrientation::Horizontal, TextOrientation::Vertical] {
            let (cw, ch) = cell_units(orientation);
            let mut cell = vec![false; (cw * ch) as usize];
            for (gy, row) in g.rows().iter().enumerate() {
                for (gx, &on) in row.iter().enumerate() {
                    if on {
                        // 90 degrees counterclockwise: (x, y) -> (y, W-1-x)
                        let (x, y) = match orientation {
                            TextOrientation::Horizontal => (gx as i32, gy as i32),
                            TextOrientation::Vertical => (gy as i32, GLYPH_WIDTH as i32 - 1 - gx as i32),
                        };
                        cell[(y * cw + x) as usize] = true;
                    }
                }
            }
            let on = |x: i32, y: i32| cell[(y * cw + x) as usize];
            let xs: Vec<i32> = (0..cw).filter(|&x| (0..ch).any(|y| on(x, y))).collect();
            let ys: Vec<i32> = (0..ch).filter(|&y| (0..cw).any(|x| on(x, y))).collect();
            let (x0, x1) = (xs[0], *xs.last().unwrap());
            let (y0, y1) = (ys[0], *ys.last().unwrap());
            let (w, h) = (x1 - x0 + 1, y1 - y0 + 1);
            let mut bits = Vec::with_capacity((w * h) as usize);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    bits.push(on(x, y));
                }
            }
            out.push(Template {
                ch: g.ch(),
                orientation,
                w,
                h,
                dx: x0,
                dy: y0,
                bits,
            });
        }
    }
    out
}

fn embedded_templates() -> &'static [Template] {
    static T: OnceLock<Vec<Template>> = OnceLock::new();
    T.get_or_init(|| templates(BitmapFont::embedded()))
}

/// Shortest horizontal or vertical ink run; for clean text this is the scale.
pub(crate) fn min_run(c: &Component) -> i32 {
    let b = c.bbox;
    let bits = c.bitmap();
    let at = |x: i32, y: i32| bits[(y * b.w + x) as usize];
    let mut best = i32::MAX;
    for y in 0..b.h {
        let mut run = 0;
        for x in 0..=b.w {
            if x < b.w && at(x, y) {
                run += 1;
            } else if run > 0 {
                best = best.min(run);
                run = 0;
            }
        }
    }
    for x in 0..b.w {
        let mut run = 0;
        for y in 0..=b.h {
            if y < b.h && at(x, y) {
                run += 1;
            } else if run > 0 {
                best = best.min(run);
                run = 0;
            }
        }
    }
    best.max(1)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut i = i;
        while self.0[i] != r {
            let next = self.0[i];
            self.0[i] = r;
            i = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

fn span_overlap(a0: i32, a1: i32, b0: i32, b1: i32) -> i32 {
    a1.min(b1) - a0.max(b0)
}

/// Whether two components look like stacked parts of one glyph read in
/// `orientation` (across-line direction for that orientation).
fn stackable(a: &Component, b: &Component, ra: i32, rb: i32, o: TextOrientation) -> bool {
    let s = ra.min(rb);
    let (a, b) = (a.bbox, b.bbox);
    // "along" is the reading direction; parts must overlap along it and be
    // close across it.
    let (along_a, along_b, across_a, across_b) = match o {
        TextOrientation::Horizontal => ((a.x, a.right()), (b.x, b.right()), (a.y, a.bottom()), (b.y, b.bottom())),
        TextOrientation::Vertical => ((a.y, a.bottom()), (b.y, b.bottom()), (a.x, a.right()), (b.x, b.right())),
    };
    let overlap = span_overlap(along_a.0, along_a.1, along_b.0, along_b.1);
    let narrow = (along_a.1 - along_a.0).min(along_b.1 - along_b.0);
    if overlap <= 0 || 2 * overlap < narrow {
        return false;
    }
    let gap = -span_overlap(across_a.0, across_a.1, across_b.0, across_b.1);
    let extent = across_a.1.max(across_b.1) - across_a.0.min(across_b.0);
    gap <= 2 * s && extent <= GLYPH_HEIGHT as i32 * s
}

/// Groups components into glyph candidates for one orientation.
pub(crate) fn candidates(components: &[Component], runs: &[i32], o: TextOrientation) -> Vec<Vec<usize>> {
    let n = components.len();
    let mut uf = UnionFind::new(n);
    // Components are ordered by bbox origin; only nearby ones can stack, so
    // scanning all pairs within a window is enough but n is small anyway.
    for i in 0..n {
        for j in (i + 1)..n {
            if stackable(&components[i], &components[j], runs[i], runs[j], o) {
                uf.union(i, j);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = uf.find(i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Best template for a candidate in one orientation, if any reaches the threshold.
pub(crate) fn match_candidate(
    components: &[Component],
    members: &[usize],
    o: TextOrientation,
    templates: &[Template],
) -> Option<GlyphMatch> {
    let ink = members
        .iter()
        .map(|&i| components[i].bbox)
        .reduce(|a, b| a.union(&b))?;
    if ink.w <= 0 || ink.h <= 0 {
        return None;
    }
    let mut bits = vec![false; (ink.w * ink.h) as usize];
    for &i in members {
        for &(x, y) in &components[i].pixels {
            bits[((y - ink.y) * ink.w + (x - ink.x)) as usize] = true;
        }
    }
    let area = (ink.w * ink.h) as f64;
    let mut best: Option<(f64, &Template, i32)> = None;
    for t in templates.iter().filter(|t| t.orientation == o) {
        if ink.w % t.w != 0 || ink.h % t.h != 0 {
            continue;
        }
        let s = ink.w / t.w;
        if s != ink.h / t.h || !(1..=MAX_SCALE).contains(&s) {
            continue;
        }
        let mut agree = 0usize;
        for y in 0..ink.h {
            for x in 0..ink.w {
                if bits[(y * ink.w + x) as usize] == t.at(x / s, y / s) {
                    agree += 1;
                }
            }
        }
        let score = agree as f64 / area;
        if best.is_none_or(|(b, _, _)| score > b) {
            best = Some((score, t, s));
        }
    }
    let (score, t, s) = best?;
    if score < MATCH_THRESHOLD {
        return None;
    }
    let (cw, ch) = cell_units(o);
    Some(GlyphMatch {
        ch: t.ch,
        bbox: BBox::new(ink.x - t.dx * s, ink.y - t.dy * s, cw * s, ch * s),
        ink,
        orientation: o,
        score,
        scale: s,
        components: members.to_vec(),
    })
}

/// Matches every candidate in both orientations. A component can therefore
/// appear in up to two matches (one per orientation); word assembly decides.
pub fn recognize_glyphs(components: &[Component], font: &BitmapFont) -> Vec<GlyphMatch> {
    let owned;
    let templates: &[Template] = if std::ptr::eq(font, BitmapFont::embedded()) {
        embedded_templates()
    } else {
        owned = templates(font);
        &owned
    };
    let runs: Vec<i32> = components.iter().map(min_run).collect();
    let mut out = Vec::new();
    for o in [TextOrientation::Horizontal, TextOrientation::Vertical] {
        for members in candidates(components, &runs, o) {
            if let Some(m) = match_candidate(components, &members, o, templates) {
                out.push(m);
            }
        }
    }
    out
}
