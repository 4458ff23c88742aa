//! Seeded, single-threaded mini-batch SGD with momentum.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{default_architecture, preprocess, CnnModel, InputNorm, Network, Tensor, INPUT_SIZE};
use crate::chart::ChartClass;
use crate::corpus::CorpusManifest;
use crate::error::{Error, Result};
use crate::raster::read_image;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub epochs_max: usize,
    pub batch: usize,
    pub lr: f32,
    pub momentum: f32,
    pub val_fraction: f64,
    /// Training stops once an epoch's running accuracy reaches this.
    pub target_accuracy: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            epochs_max: 50,
            batch: 32,
            lr: 0.01,
            momentum: 0.9,
            val_fraction: 0.15,
            target_accuracy: 0.99,
        }
    }
}

impl HyperParams {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.epochs_max == 0 {
            return bad("epochs_max must be at least 1");
        }
        if self.batch == 0 {
            return bad("batch must be at least 1");
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return bad("lr must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must be in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return bad("val_fraction must be in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    /// Accuracy of the final weights over the whole training split.
    pub final_train_accuracy: f64,
    /// `None` when the validation split is empty.
    pub heldout_accuracy: Option<f64>,
    pub epochs_run: usize,
    pub seed: u64,
    pub n_train: usize,
    pub n_val: usize,
    pub classes: Vec<ChartClass>,
    /// Corpus items that could not be read, with the reason.
    pub skipped: Vec<String>,
}

// Independent random streams derived from the one seed.
const SPLIT_STREAM: u64 = 1;
const INIT_STREAM: u64 = 2;
const SHUFFLE_STREAM: u64 = 3;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Trains on a corpus. Unreadable items are skipped and listed; more than
/// 5% unreadable aborts.
pub fn train(manifest: &CorpusManifest, hp: &HyperParams, seed: u64) -> Result<(CnnModel, TrainReport)> {
    train_with(manifest, hp, seed, |_| {})
}

pub fn train_with(
    manifest: &CorpusManifest,
    hp: &HyperParams,
    seed: u64,
    on_epoch: impl FnMut(&EpochStats),
) -> Result<(CnnModel, TrainReport)> {
    hp.validate()?;
    if manifest.items.is_empty() {
        return Err(Error::InvalidInput("corpus manifest has no items".into()));
    }
    let mut samples = Vec::with_capacity(manifest.items.len());
    let mut skipped = Vec::new();
    for item in &manifest.items {
        let path = manifest.image_path(item);
        match read_image(&path).and_then(|img| preprocess(&img)) {
            Ok(t) => samples.push((t, item.class)),
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
    let (model, mut report) = train_samples(&samples, hp, seed, on_epoch)?;
    report.skipped = skipped;
    Ok((model, report))
}

/// Trains on already preprocessed (unstandardized) inputs.
pub fn train_samples(
    samples: &[(Tensor<f32>, ChartClass)],
    hp: &HyperParams,
    seed: u64,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<(CnnModel, TrainReport)> {
    hp.validate()?;
    let classes: Vec<ChartClass> = ChartClass::ALL
        .into_iter()
        .filter(|c| samples.iter().any(|(_, k)| k == c))
        .collect();
    if classes.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "training needs at least 2 classes, found {}",
            classes.len()
        )));
    }
    let label = |c: ChartClass| classes.iter().position(|&k| k == c).unwrap();

    // Stratified split.
    let mut split_rng = rng(seed, SPLIT_STREAM);
    let (mut train_idx, mut val_idx) = (Vec::new(), Vec::new());
    for &c in &classes {
        let mut idx: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].1 == c).collect();
        idx.shuffle(&mut split_rng);
        let n_val = ((idx.len() as f64 * hp.val_fraction).round() as usize).min(idx.len() - 1);
        val_idx.extend_from_slice(&idx[..n_val]);
        train_idx.extend_from_slice(&idx[n_val..]);
    }
    train_idx.sort_unstable();
    val_idx.sort_unstable();

    let norm = InputNorm::fit(train_idx.iter().map(|&i| &samples[i].0));
    let data: Vec<(Tensor<f32>, usize)> = samples
        .iter()
        .map(|(t, c)| (t.map(|v| (v - norm.mean) / norm.std), label(*c)))
        .collect();

    let mut net = Network::<f32>::init(
        &[1, INPUT_SIZE, INPUT_SIZE],
        &default_architecture(classes.len()),
        &mut rng(seed, INIT_STREAM),
    )?;
    let mut velocity = net.zero_grads();
    let mut shuffle_rng = rng(seed, SHUFFLE_STREAM);
    let mut order = train_idx.clone();
    let mut epochs = Vec::new();

    for epoch in 1..=hp.epochs_max {
        order.shuffle(&mut shuffle_rng);
        let (mut loss_sum, mut correct) = (0f64, 0usize);
        for chunk in order.chunks(hp.batch) {
            let mut grads = net.zero_grads();
            for &i in chunk {
                let (t, y) = &data[i];
                let (loss, pred) = net.accumulate(t, *y, &mut grads)?;
                if !loss.is_finite() {
                    return Err(Error::NonFinite("training loss"));
                }
                loss_sum += loss as f64;
                correct += usize::from(pred == *y);
            }
            let step = hp.lr / chunk.len() as f32;
            for ((layer, (gw, gb)), (vw, vb)) in net.layers.iter_mut().zip(&grads.layers).zip(&mut velocity.layers) {
                for ((w, &g), v) in layer.weights.iter_mut().zip(gw).zip(vw.iter_mut()) {
                    *v = hp.momentum * *v - step * g;
                    *w += *v;
                }
                for ((b, &g), v) in layer.bias.iter_mut().zip(gb).zip(vb.iter_mut()) {
                    *v = hp.momentum * *v - step * g;
                    *b += *v;
                }
            }
        }
        let stats = EpochStats {
            epoch,
            train_loss: loss_sum / order.len() as f64,
            train_accuracy: correct as f64 / order.len() as f64,
        };
        on_epoch(&stats);
        epochs.push(stats);
        if stats.train_accuracy >= hp.target_accuracy {
            break;
        }
    }

    let model = CnnModel::new(classes.clone(), norm, net)?;
    let accuracy = |idx: &[usize]| -> Result<Option<f64>> {
        if idx.is_empty() {
            return Ok(None);
        }
        let mut ok = 0usize;
        for &i in idx {
            let p = model.forward(&data[i].0)?;
            ok += usize::from(super::argmax(&p) == data[i].1);
        }
        Ok(Some(ok as f64 / idx.len() as f64))
    };
    let report = TrainReport {
        final_train_accuracy: accuracy(&train_idx)?.unwrap_or(0.0),
        heldout_accuracy: accuracy(&val_idx)?,
        epochs_run: epochs.len(),
        epochs,
        seed,
        n_train: train_idx.len(),
        n_val: val_idx.len(),
        classes,
        skipped: Vec::new(),
    };
    Ok((model, report))
}
