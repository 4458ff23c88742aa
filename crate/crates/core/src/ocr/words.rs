//! Word and phrase assembly from glyph matches.

use serde::{Deserialize, Serialize};

use super::{GlyphMatch, ImageDims};
use crate::raster::{BBox, TextOrientation, GLYPH_HEIGHT, GLYPH_WIDTH};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Word {
    pub text: String,
    /// Union of the glyph cells.
    pub bbox: BBox,
    pub orientation: TextOrientation,
    pub scale: i32,
    /// Mean glyph match score.
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phrase {
    pub text: String,
    pub words: Vec<Word>,
    pub bbox: BBox,
    pub orientation: TextOrientation,
}

impl Phrase {
    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    /// Largest glyph height among the words, in pixels, measured across the
    /// reading direction.
    pub fn glyph_height(&self) -> i32 {
        self.words.iter().map(|w| w.scale).max().unwrap_or(1) * GLYPH_HEIGHT as i32
    }
}

/// Interval gap between `[a0, a1)` and `[b0, b1)`; negative when they overlap.
fn gap(a0: i32, a1: i32, b0: i32, b1: i32) -> i32 {
    a0.max(b0) - a1.min(b1)
}

/// (along-start, along-end, across-center) for a box read in `o`.
fn axes(b: &BBox, o: TextOrientation) -> (i32, i32, f64) {
    match o {
        TextOrientation::Horizontal => (b.x, b.right(), b.center_y()),
        TextOrientation::Vertical => (b.y, b.bottom(), b.center_x()),
    }
}

fn adjacent(a: &GlyphMatch, b: &GlyphMatch) -> bool {
    if a.orientation != b.orientation || a.scale != b.scale {
        return false;
    }
    let s = a.scale;
    let (a0, a1, ac) = axes(&a.bbox, a.orientation);
    let (b0, b1, bc) = axes(&b.bbox, b.orientation);
    let g = gap(a0, a1, b0, b1);
    (ac - bc).abs() <= s as f64 / 2.0 && g >= 0 && 2 * g <= 5 * s
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut i = i;
    while parent[i] != r {
        let next = parent[i];
        parent[i] = r;
        i = next;
    }
    r
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// Linked runs of glyphs, each in reading order.
fn chains(matches: &[&GlyphMatch]) -> Vec<Vec<usize>> {
    let n = matches.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if adjacent(matches[i], matches[j]) {
                union(&mut parent, i, j);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    for g in &mut groups {
        let o = matches[g[0]].orientation;
        match o {
            TextOrientation::Horizontal => g.sort_by_key(|&i| matches[i].bbox.x),
            TextOrientation::Vertical => g.sort_by_key(|&i| -matches[i].bbox.y),
        }
    }
    groups
}

/// Assembles words. Every glyph appears in at most one word and a component
/// is read in one orientation only: chains that use more components win,
/// then higher mean score, then horizontal.
pub fn group_words(matches: &[GlyphMatch]) -> Vec<Word> {
    let n_comp = matches
        .iter()
        .flat_map(|m| m.components.iter().copied())
        .max()
        .map_or(0, |m| m + 1);
    let mut claimed = vec![false; n_comp];
    let mut live: Vec<bool> = vec![true; matches.len()];
    let mut words = Vec::new();
    loop {
        let idx: Vec<usize> = (0..matches.len()).filter(|&i| live[i]).collect();
        if idx.is_empty() {
            break;
        }
        let refs: Vec<&GlyphMatch> = idx.iter().map(|&i| &matches[i]).collect();
        let best = chains(&refs)
            .into_iter()
            .map(|c| {
                let comps: usize = c.iter().map(|&i| refs[i].components.len()).sum();
                let mean = c.iter().map(|&i| refs[i].score).sum::<f64>() / c.len() as f64;
                let horiz = refs[c[0]].orientation == TextOrientation::Horizontal;
                (c, comps, mean, horiz)
            })
            .max_by(|a, b| {
                a.1.cmp(&b.1)
                    .then(a.2.total_cmp(&b.2))
                    .then(a.3.cmp(&b.3))
                    // earliest chain on full ties keeps the result stable
                    .then(refs[b.0[0]].bbox.y.cmp(&refs[a.0[0]].bbox.y))
                    .then(refs[b.0[0]].bbox.x.cmp(&refs[a.0[0]].bbox.x))
            });
        let Some((chain, _, mean, _)) = best else { break };
        let glyphs: Vec<&GlyphMatch> = chain.iter().map(|&i| refs[i]).collect();
        for g in &glyphs {
            for &c in &g.components {
                claimed[c] = true;
            }
        }
        words.push(Word {
            text: glyphs.iter().map(|g| g.ch).collect(),
            bbox: glyphs.iter().map(|g| g.bbox).reduce(|a, b| a.union(&b)).unwrap(),
            orientation: glyphs[0].orientation,
            scale: glyphs[0].scale,
            confidence: mean,
        });
        for &i in &idx {
            if matches[i].components.iter().any(|&c| claimed[c]) {
                live[i] = false;
            }
        }
    }
    words.sort_by_key(|w| (w.bbox.y, w.bbox.x));
    words
}

fn same_phrase(a: &Word, b: &Word) -> bool {
    if a.orientation != b.orientation {
        return false;
    }
    let s = a.scale.max(b.scale);
    let (a0, a1, ac) = axes(&a.bbox, a.orientation);
    let (b0, b1, bc) = axes(&b.bbox, b.orientation);
    (ac - bc).abs() <= 0.5 * (GLYPH_HEIGHT as i32 * s) as f64
        && gap(a0, a1, b0, b1) <= 4 * GLYPH_WIDTH as i32 * s
}

/// Joins words on a shared baseline into phrases, ordered by (y, x).
pub fn group_phrases(words: &[Word], _dims: ImageDims) -> Vec<Phrase> {
    let n = words.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if same_phrase(&words[i], &words[j]) {
                union(&mut parent, i, j);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    let mut phrases: Vec<Phrase> = groups
        .into_iter()
        .map(|g| {
            let mut ws: Vec<Word> = g.iter().map(|&i| words[i].clone()).collect();
            let o = ws[0].orientation;
            match o {
                TextOrientation::Horizontal => ws.sort_by_key(|w| w.bbox.x),
                TextOrientation::Vertical => ws.sort_by_key(|w| -w.bbox.y),
            }
            Phrase {
                text: ws.iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" "),
                bbox: ws.iter().map(|w| w.bbox).reduce(|a, b| a.union(&b)).unwrap(),
                orientation: o,
                words: ws,
            }
        })
        .collect();
    phrases.sort_by_key(|p| (p.bbox.y, p.bbox.x));
    phrases
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gm(ch: char, x: i32, y: i32, s: i32, o: TextOrientation, comp: usize) -> GlyphMatch {
        let (w, h) = match o {
            TextOrientation::Horizontal => (5 * s, 7 * s),
            TextOrientation::Vertical => (7 * s, 5 * s),
        };
        let b = BBox::new(x, y, w, h);
        GlyphMatch {
            ch,
            bbox: b,
            ink: b,
            orientation: o,
            score: 1.0,
            scale: s,
            components: vec![comp],
        }
    }

    #[test]
    fn horizontal_run_splits_on_space() {
        let h = TextOrientation::Horizontal;
        // "ab cd" at scale 1: cells every 6 px, space skips one cell.
        let ms = vec![
            gm('a', 0, 0, 1, h, 0),
            gm('b', 6, 0, 1, h, 1),
            gm('c', 18, 0, 1, h, 2),
            gm('d', 24, 0, 1, h, 3),
        ];
        let ws = group_words(&ms);
        let t: Vec<&str> = ws.iter().map(|w| w.text.as_str()).collect();
        assert_eq!(t, ["ab", "cd"]);
        let ps = group_phrases(&ws, ImageDims { w: 100, h: 100 });
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].text, "ab cd");
        assert_eq!(ps[0].bbox, BBox::new(0, 0, 29, 7));
    }

    #[test]
    fn vertical_reads_bottom_up() {
        let v = TextOrientation::Vertical;
        let ms = vec![gm('y', 0, 0, 1, v, 0), gm('x', 0, 6, 1, v, 1)];
        let ws = group_words(&ms);
        assert_eq!(ws.len(), 1);
        assert_eq!(ws[0].text, "xy");
    }

    #[test]
    fn longer_chain_claims_shared_components() {
        let h = TextOrientation::Horizontal;
        let v = TextOrientation::Vertical;
        let ms = vec![
            gm('a', 0, 0, 1, h, 0),
            gm('b', 6, 0, 1, h, 1),
            gm('-', 0, 0, 1, v, 0),
        ];
        let ws = group_words(&ms);
        assert_eq!(ws.len(), 1);
        assert_eq!(ws[0].text, "ab");
    }

    #[test]
    fn scale_mismatch_does_not_link() {
        let h = TextOrientation::Horizontal;
        let ms = vec![gm('a', 0, 0, 1, h, 0), gm('b', 6, 0, 2, h, 1)];
        assert_eq!(group_words(&ms).len(), 2);
    }

    #[test]
    fn distant_rows_are_separate_phrases() {
        let h = TextOrientation::Horizontal;
        let ms = vec![gm('a', 0, 0, 1, h, 0), gm('b', 0, 20, 1, h, 1), gm('c', 60, 20, 1, h, 2)];
        let ws = group_words(&ms);
        let ps = group_phrases(&ws, ImageDims { w: 100, h: 100 });
        let t: Vec<&str> = ps.iter().map(|p| p.text.as_str()).collect();
        assert_eq!(t, ["a", "b", "c"]);
    }
}
