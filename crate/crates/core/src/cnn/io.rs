//! JSON model files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{CnnModel, InputNorm, LayerSpec, Network};
use crate::chart::ChartClass;
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "g2l-cnn";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct InputDims {
    channels: usize,
    height: usize,
    width: usize,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    kind: String,
    #[serde(default)]
    params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    weights: Vec<f32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    bias: Vec<f32>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    classes: Vec<String>,
    input_norm: InputNorm,
    input: InputDims,
    layers: Vec<LayerFile>,
}

fn params_of(spec: &LayerSpec) -> Map<String, Value> {
    let mut m = Map::new();
    match *spec {
        LayerSpec::Conv { filters, k, stride } => {
            m.insert("filters".into(), filters.into());
            m.insert("k".into(), k.into());
            m.insert("stride".into(), stride.into());
        }
        LayerSpec::Maxpool { k } => {
            m.insert("k".into(), k.into());
        }
        LayerSpec::Dense { units } => {
            m.insert("units".into(), units.into());
        }
        LayerSpec::Relu | LayerSpec::Flatten | LayerSpec::Softmax => {}
    }
    m
}

fn spec_of(i: usize, layer: &LayerFile) -> Result<LayerSpec> {
    let get = |name: &str| -> Result<usize> {
        layer
            .params
            .get(name)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| Error::Model(format!("layer {i} ({}): missing integer param \"{name}\"", layer.kind)))
    };
    Ok(match layer.kind.as_str() {
        "conv" => LayerSpec::Conv {
            filters: get("filters")?,
            k: get("k")?,
            stride: if layer.params.contains_key("stride") { get("stride")? } else { 1 },
        },
        "relu" => LayerSpec::Relu,
        "maxpool" => LayerSpec::Maxpool { k: get("k")? },
        "flatten" => LayerSpec::Flatten,
        "dense" => LayerSpec::Dense { units: get("units")? },
        "softmax" => LayerSpec::Softmax,
        other => return Err(Error::Model(format!("layer {i}: unknown layer kind \"{other}\""))),
    })
}

pub fn model_to_json(model: &CnnModel) -> Result<String> {
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        classes: model.classes.iter().map(|c| c.name().to_string()).collect(),
        input_norm: model.input_norm,
        input: InputDims {
            channels: model.net.input_shape[0],
            height: model.net.input_shape[1],
            width: model.net.input_shape[2],
        },
        layers: model
            .net
            .layers
            .iter()
            .map(|l| LayerFile {
                kind: l.spec.kind().into(),
                params: params_of(&l.spec),
                weights: l.weights.clone(),
                bias: l.bias.clone(),
            })
            .collect(),
    };
    serde_json::to_string(&file).map_err(|e| Error::Model(format!("cannot serialize model: {e}")))
}

pub fn model_from_json(text: &str) -> Result<CnnModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Model(format!("malformed model file: {e}")))?;
    if file.format != MODEL_FORMAT {
        return Err(Error::Model(format!("format is \"{}\", expected \"{MODEL_FORMAT}\"", file.format)));
    }
    if file.version != MODEL_VERSION {
        return Err(Error::Model(format!(
            "model version {} is not supported (expected {MODEL_VERSION})",
            file.version
        )));
    }
    let classes = file
        .classes
        .iter()
        .map(|s| s.parse::<ChartClass>().map_err(|_| Error::Model(format!("unknown class \"{s}\""))))
        .collect::<Result<Vec<_>>>()?;
    let specs = file
        .layers
        .iter()
        .enumerate()
        .map(|(i, l)| spec_of(i, l))
        .collect::<Result<Vec<_>>>()?;
    let input = [file.input.channels, file.input.height, file.input.width];
    let mut net = Network::<f32>::zeros(&input, &specs)?;
    for (i, (layer, lf)) in net.layers.iter_mut().zip(file.layers).enumerate() {
        if lf.weights.len() != layer.weights.len() || lf.bias.len() != layer.bias.len() {
            return Err(Error::Model(format!(
                "layer {i} ({}): expected {} weights and {} biases, found {} and {}",
                lf.kind,
                layer.weights.len(),
                layer.bias.len(),
                lf.weights.len(),
                lf.bias.len()
            )));
        }
        layer.weights = lf.weights;
        layer.bias = lf.bias;
    }
    CnnModel::new(classes, file.input_norm, net)
}

pub fn save_model(model: &CnnModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<CnnModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnn::{default_architecture, Tensor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model(seed: u64) -> CnnModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = Network::init(&[1, 64, 64], &default_architecture(7), &mut rng).unwrap();
        CnnModel::new(ChartClass::ALL.to_vec(), InputNorm { mean: 0.91, std: 0.17 }, net).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = model(5);
        let back = model_from_json(&model_to_json(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = Tensor::new(vec![1, 64, 64], (0..4096).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
        assert_eq!(m.forward(&x).unwrap(), back.forward(&x).unwrap());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        let m = model(6);
        save_model(&m, &p).unwrap();
        assert_eq!(load_model(&p).unwrap(), m);
    }

    fn edit(f: impl FnOnce(&mut Value)) -> Result<CnnModel> {
        let mut v: Value = serde_json::from_str(&model_to_json(&model(1)).unwrap()).unwrap();
        f(&mut v);
        model_from_json(&v.to_string())
    }

    fn message(r: Result<CnnModel>) -> String {
        match r {
            Err(Error::Model(m)) => m,
            other => panic!("expected a model error, got {other:?}"),
        }
    }

    #[test]
    fn class_count_mismatch_is_rejected() {
        let m = message(edit(|v| {
            v["classes"].as_array_mut().unwrap().pop();
        }));
        assert!(m.contains("6 classes") && m.contains("7 outputs"), "{m}");
    }

    #[test]
    fn unknown_kind_is_named() {
        let m = message(edit(|v| v["layers"][1]["kind"] = "gelu".into()));
        assert!(m.contains("gelu"), "{m}");
    }

    #[test]
    fn version_and_format_are_checked() {
        assert!(message(edit(|v| v["version"] = 2.into())).contains("version 2"));
        assert!(message(edit(|v| v["format"] = "other".into())).contains("other"));
    }

    #[test]
    fn truncated_weights_are_rejected() {
        let m = message(edit(|v| {
            v["layers"][0]["weights"].as_array_mut().unwrap().pop();
        }));
        assert!(m.contains("layer 0"), "{m}");
    }

    #[test]
    fn broken_shape_chain_is_rejected() {
        assert!(edit(|v| v["layers"][7]["params"]["units"] = 65.into()).is_err());
        assert!(edit(|v| {
            v["layers"].as_array_mut().unwrap().remove(6);
        })
        .is_err());
    }
}
