//! Small end-to-end training runs.

use g2l_core::cnn::{model_to_json, preprocess, train_samples, HyperParams, Tensor};
use g2l_core::corpus::{render, sample_spec};
use g2l_core::ChartClass;

fn samples(n_per_class: usize) -> Vec<(Tensor<f32>, ChartClass)> {
    let mut out = Vec::new();
    for class in [ChartClass::Pie, ChartClass::Heatmap] {
        for seed in 0..n_per_class as u64 {
            let (img, _) = render(&sample_spec(class, seed)).unwrap();
            out.push((preprocess(&img).unwrap(), class));
        }
    }
    out
}

fn hp(epochs: usize) -> HyperParams {
    HyperParams {
        epochs_max: epochs,
        batch: 4,
        val_fraction: 0.0,
        ..HyperParams::default()
    }
}

#[test]
fn loss_decreases_on_two_classes() {
    let data = samples(10);
    let mut losses = Vec::new();
    let (_, report) = train_samples(&data, &hp(6), 1, |e| losses.push(e.train_loss)).unwrap();
    assert!(!losses.is_empty());
    assert!(losses.last().unwrap() < &losses[0], "{losses:?}");
    assert!(report.final_train_accuracy >= 0.9, "{}", report.final_train_accuracy);
    assert_eq!(report.classes, vec![ChartClass::Pie, ChartClass::Heatmap]);
}

#[test]
fn training_is_deterministic() {
    let data = samples(4);
    let (a, ra) = train_samples(&data, &hp(2), 3, |_| {}).unwrap();
    let (b, rb) = train_samples(&data, &hp(2), 3, |_| {}).unwrap();
    assert_eq!(model_to_json(&a).unwrap(), model_to_json(&b).unwrap());
    assert_eq!(ra, rb);
    let (c, _) = train_samples(&data, &hp(2), 4, |_| {}).unwrap();
    assert_ne!(model_to_json(&a).unwrap(), model_to_json(&c).unwrap());
}

#[test]
fn one_class_is_rejected() {
    let data: Vec<_> = samples(2).into_iter().filter(|(_, c)| *c == ChartClass::Pie).collect();
    assert!(train_samples(&data, &hp(1), 1, |_| {}).is_err());
}
