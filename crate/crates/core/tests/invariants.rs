//! Property tests over generated specs, templates and geometry.

use g2l_core::chart::validate;
use g2l_core::cnn::softmax;
use g2l_core::codegen::{instantiate, lint_artifact, template_for};
use g2l_core::corpus::sample_spec;
use g2l_core::raster::BBox;
use g2l_core::semantics::SemanticSummary;
use g2l_core::ChartClass;
use proptest::prelude::*;

fn class() -> impl Strategy<Value = ChartClass> {
    (0..ChartClass::ALL.len()).prop_map(|i| ChartClass::ALL[i])
}

fn printable() -> impl Strategy<Value = String> {
    "[ -~]{0,24}"
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sampled_specs_are_valid(c in class(), seed in any::<u64>()) {
        let spec = sample_spec(c, seed);
        prop_assert!(validate(&spec).is_empty(), "{:?}", validate(&spec));
        prop_assert_eq!(spec.class, c);
        prop_assert_eq!(sample_spec(c, seed), spec);
    }

    #[test]
    fn any_recovered_text_yields_lint_clean_code(
        c in class(),
        title in printable(),
        x in proptest::option::of(printable()),
        y in proptest::option::of(printable()),
        entries in proptest::collection::vec(printable(), 0..4),
        ticks in proptest::collection::vec(printable(), 0..8),
        n in 1usize..10,
    ) {
        let mut s = SemanticSummary::defaults(c);
        s.title = title;
        s.x_label = x;
        s.y_label = y;
        s.legend = !entries.is_empty();
        s.legend_entries = entries;
        s.x_tick_labels = ticks.clone();
        s.slice_labels = ticks;
        s.n_categories = n;
        let artifact = instantiate(&template_for(c).unwrap(), &s).unwrap();
        let issues = lint_artifact(&artifact);
        prop_assert!(issues.is_empty(), "{:?}", issues);
    }

    #[test]
    fn iou_is_symmetric_and_bounded(
        a in (0i32..50, 0i32..50, 1i32..40, 1i32..40),
        b in (0i32..50, 0i32..50, 1i32..40, 1i32..40),
    ) {
        let (a, b) = (BBox::new(a.0, a.1, a.2, a.3), BBox::new(b.0, b.1, b.2, b.3));
        let (ab, ba) = (a.iou(&b), b.iou(&a));
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((a.iou(&a) - 1.0).abs() < 1e-12);
        let u = a.union(&b);
        prop_assert!(u.area() >= a.area().max(b.area()));
    }

    #[test]
    fn softmax_is_a_distribution(z in proptest::collection::vec(-80.0f64..80.0, 1..12), c in -500.0f64..500.0) {
        let p = softmax(&z);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        let q = softmax(&z.iter().map(|v| v + c).collect::<Vec<_>>());
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }
}
