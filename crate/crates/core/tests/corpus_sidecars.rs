//! Corpus on disk: determinism, sidecar consistency, and semantics recovered
//! from the rendered pixels.

use std::fs;

use g2l_core::corpus::{generate_corpus, render, CorpusConfig, CorpusManifest, TextRole};
use g2l_core::ocr::ocr_image;
use g2l_core::raster::{read_image, BitmapFont};
use g2l_core::semantics::analyze;
use g2l_core::ChartClass;

#[test]
fn same_seed_same_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = generate_corpus(&CorpusConfig::uniform(2), 5, a.path()).unwrap();
    let mb = generate_corpus(&CorpusConfig::uniform(2), 5, b.path()).unwrap();
    assert_eq!(ma.items, mb.items);
    for item in &ma.items {
        assert_eq!(fs::read(ma.image_path(item)).unwrap(), fs::read(mb.image_path(item)).unwrap());
        assert_eq!(fs::read(ma.truth_path(item)).unwrap(), fs::read(mb.truth_path(item)).unwrap());
    }
}

#[test]
fn different_seed_different_corpus() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = generate_corpus(&CorpusConfig::uniform(1), 5, a.path()).unwrap();
    let mb = generate_corpus(&CorpusConfig::uniform(1), 6, b.path()).unwrap();
    let differ = ma
        .items
        .iter()
        .zip(&mb.items)
        .any(|(x, y)| fs::read(ma.image_path(x)).unwrap() != fs::read(mb.image_path(y)).unwrap());
    assert!(differ);
}

#[test]
fn sidecars_rebuild_the_image() {
    let dir = tempfile::tempdir().unwrap();
    generate_corpus(&CorpusConfig::uniform(2), 9, dir.path()).unwrap();
    let m = CorpusManifest::load(dir.path()).unwrap();
    assert_eq!(m.histogram().values().sum::<usize>(), 14);
    for item in &m.items {
        let truth = m.load_truth(item).unwrap();
        assert_eq!(truth.class, item.class);
        let (img, again) = render(&truth.to_spec()).unwrap();
        assert_eq!(again, truth);
        assert_eq!(img, read_image(m.image_path(item)).unwrap());
    }
}

#[test]
fn semantics_recover_sidecar_fields() {
    let dir = tempfile::tempdir().unwrap();
    let m = generate_corpus(&CorpusConfig::uniform(4), 21, dir.path()).unwrap();
    let font = BitmapFont::embedded();
    for item in &m.items {
        let truth = m.load_truth(item).unwrap();
        let img = read_image(m.image_path(item)).unwrap();
        let s = analyze(truth.class, &ocr_image(&img, font));
        assert_eq!(s.title, truth.title, "{}", item.image_path);
        assert_eq!(s.y_label, truth.y_label, "{}", item.image_path);
        assert_eq!(s.x_label, truth.x_label, "{}", item.image_path);
        assert_eq!(s.legend, truth.legend, "{}", item.image_path);
        if truth.legend {
            assert_eq!(s.legend_entries, truth.legend_entries, "{}", item.image_path);
        }
        if truth.class == ChartClass::Pie {
            let want: Vec<_> = truth.items_with_role(TextRole::SliceLabel).map(|t| t.text.clone()).collect();
            let mut got = s.slice_labels.clone();
            got.sort();
            let mut want = want;
            want.sort();
            assert_eq!(got, want, "{}", item.image_path);
        }
    }
}
