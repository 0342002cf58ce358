//! On-disk formats: tensor files, network JSON and hardware JSON.
//!
//! A tensor file is a 16-byte ASCII prefix holding the length of a JSON
//! header (decimal, space padded), the header `{"c":..,"t":..,"scale":..}`,
//! then `c * t` int8 bytes in TC order. Conv weights are stored as a tensor
//! with `c = k * c_in` and `t = c_out`, so the payload is `W[m][i][l]`
//! row-major; linear weights use `c = in_features`, `t = out_features`.
//! Weight paths in a network file are relative to that file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use tcn_core::{
    ConvLayerSpec, ConvWeights, HardwareModel, Layer, LinearSpec, NetworkSpec, PoolSpec, QuantTensorTC, RequantParams,
};

use crate::error::{Result, ToolError};

const PREFIX_LEN: usize = 16;

#[derive(Debug, Serialize, Deserialize)]
struct TensorHeader {
    c: usize,
    t: usize,
    scale: f32,
}

pub fn encode_tensor(x: &QuantTensorTC) -> Vec<u8> {
    let header = serde_json::to_string(&TensorHeader { c: x.channels(), t: x.timesteps(), scale: x.scale() })
        .expect("header serializes");
    let mut out = format!("{:<PREFIX_LEN$}", header.len()).into_bytes();
    out.extend_from_slice(header.as_bytes());
    out.extend(x.data().iter().map(|&v| v as u8));
    out
}

/// Decodes a tensor file; `path` is only used in error messages.
pub fn decode_tensor(bytes: &[u8], path: &Path) -> Result<QuantTensorTC> {
    let err = |msg: String| ToolError::parse(path, msg);
    if bytes.len() < PREFIX_LEN {
        return Err(err(format!("file is {} bytes, shorter than the {PREFIX_LEN}-byte length prefix", bytes.len())));
    }
    let prefix = std::str::from_utf8(&bytes[..PREFIX_LEN]).map_err(|_| err("length prefix is not ASCII".into()))?;
    let header_len: usize =
        prefix.trim().parse().map_err(|_| err(format!("length prefix {:?} is not a decimal number", prefix.trim())))?;
    let body = &bytes[PREFIX_LEN..];
    if body.len() < header_len {
        return Err(err(format!("header announces {header_len} bytes, only {} follow the prefix", body.len())));
    }
    let header: TensorHeader =
        serde_json::from_slice(&body[..header_len]).map_err(|e| err(format!("tensor header: {e}")))?;
    let payload = &body[header_len..];
    let want = header.c.checked_mul(header.t).ok_or_else(|| err("header c*t overflows".into()))?;
    if payload.len() != want {
        return Err(err(format!(
            "{} payload: header c={} t={} needs {want} bytes, found {}",
            if payload.len() < want { "truncated" } else { "oversized" },
            header.c,
            header.t,
            payload.len()
        )));
    }
    let data = payload.iter().map(|&b| b as i8).collect();
    QuantTensorTC::new(header.c, header.t, data, header.scale).map_err(|e| err(e.to_string()))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| ToolError::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| ToolError::io(path, e))
}

pub fn read_tensor(path: &Path) -> Result<QuantTensorTC> {
    decode_tensor(&read_bytes(path)?, path)
}

pub fn write_tensor(path: &Path, x: &QuantTensorTC) -> Result<()> {
    write_bytes(path, &encode_tensor(x))
}

/// A float written with exactly four decimals.
pub(crate) fn fixed4(v: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{v:.4}")).expect("formatted float is valid JSON")
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HwIn {
    n_cores: usize,
    l1_bytes: usize,
    l2_bytes: usize,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    epsilon: f64,
    gamma_prime: Option<f64>,
    offset_bytes: usize,
}

#[derive(Serialize)]
struct HwOut {
    n_cores: usize,
    l1_bytes: usize,
    l2_bytes: usize,
    alpha: Box<RawValue>,
    beta: Box<RawValue>,
    gamma: Box<RawValue>,
    delta: Box<RawValue>,
    epsilon: Box<RawValue>,
    gamma_prime: Box<RawValue>,
    offset_bytes: usize,
}

/// Parses hardware JSON. `gamma_prime` is optional and defaults to the
/// value of [`HardwareModel::default`].
pub fn parse_hardware(text: &str, path: &Path) -> Result<HardwareModel> {
    let h: HwIn = serde_json::from_str(text).map_err(|e| ToolError::parse(path, format!("hardware: {e}")))?;
    let hw = HardwareModel {
        n_cores: h.n_cores,
        l1_bytes: h.l1_bytes,
        l2_bytes: h.l2_bytes,
        alpha: h.alpha,
        beta: h.beta,
        gamma: h.gamma,
        delta: h.delta,
        epsilon: h.epsilon,
        gamma_prime: h.gamma_prime.unwrap_or(HardwareModel::default().gamma_prime),
        offset_bytes: h.offset_bytes,
    };
    hw.validate().map_err(|e| ToolError::parse(path, e.to_string()))?;
    Ok(hw)
}

pub fn hardware_json(hw: &HardwareModel) -> String {
    let out = HwOut {
        n_cores: hw.n_cores,
        l1_bytes: hw.l1_bytes,
        l2_bytes: hw.l2_bytes,
        alpha: fixed4(hw.alpha),
        beta: fixed4(hw.beta),
        gamma: fixed4(hw.gamma),
        delta: fixed4(hw.delta),
        epsilon: fixed4(hw.epsilon),
        gamma_prime: fixed4(hw.gamma_prime),
        offset_bytes: hw.offset_bytes,
    };
    let mut s = serde_json::to_string_pretty(&out).expect("hardware serializes");
    s.push('\n');
    s
}

pub fn read_hardware(path: &Path) -> Result<HardwareModel> {
    let text = fs::read_to_string(path).map_err(|e| ToolError::io(path, e))?;
    parse_hardware(&text, path)
}

pub fn write_hardware(path: &Path, hw: &HardwareModel) -> Result<()> {
    write_bytes(path, hardware_json(hw).as_bytes())
}

fn one() -> usize {
    1
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum LayerFile {
    Conv1d {
        c_in: usize,
        c_out: usize,
        t_in: usize,
        k: usize,
        d: usize,
        #[serde(default = "one")]
        stride: usize,
        weights: String,
        mult: Vec<i32>,
        bias: Vec<i32>,
        shift: u32,
        relu: bool,
    },
    Linear {
        in_features: usize,
        out_features: usize,
        weights: String,
        mult: Vec<i32>,
        bias: Vec<i32>,
        shift: u32,
        relu: bool,
    },
    Avgpool {
        window: usize,
        #[serde(default)]
        stride: Option<usize>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct Dims {
    c: usize,
    t: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct NetworkFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input: Option<Dims>,
    layers: Vec<LayerFile>,
}

fn load_weights(base: &Path, rel: &str, c: usize, t: usize, what: &str, net_path: &Path) -> Result<Vec<i8>> {
    let w = read_tensor(&base.join(rel))?;
    if w.channels() != c || w.timesteps() != t {
        return Err(ToolError::parse(
            net_path,
            format!(
                "{what}: weights file {rel} holds c={} t={}, expected c={c} t={t}",
                w.channels(),
                w.timesteps()
            ),
        ));
    }
    Ok(w.into_data())
}

/// Loads a network file and the weight tensors it references.
pub fn load_network(path: &Path) -> Result<NetworkSpec> {
    let text = fs::read_to_string(path).map_err(|e| ToolError::io(path, e))?;
    let file: NetworkFile =
        serde_json::from_str(&text).map_err(|e| ToolError::parse(path, format!("network: {e}")))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut layers = Vec::with_capacity(file.layers.len());
    for (i, l) in file.layers.into_iter().enumerate() {
        let what = format!("layers[{i}]");
        let bad = |e: tcn_core::Error| ToolError::parse(path, format!("{what}: {e}"));
        layers.push(match l {
            LayerFile::Conv1d { c_in, c_out, t_in, k, d, stride, weights, mult, bias, shift, relu } => {
                let w = load_weights(base, &weights, k * c_in, c_out, &what, path)?;
                let requant = RequantParams::new(mult, bias, shift, relu).map_err(bad)?;
                let w = ConvWeights::new(c_out, k, c_in, w).map_err(bad)?;
                Layer::Conv1D(ConvLayerSpec::new(c_in, c_out, t_in, k, d, stride, w, requant).map_err(bad)?)
            }
            LayerFile::Linear { in_features, out_features, weights, mult, bias, shift, relu } => {
                let w = load_weights(base, &weights, in_features, out_features, &what, path)?;
                let requant = RequantParams::new(mult, bias, shift, relu).map_err(bad)?;
                Layer::Linear(LinearSpec::new(in_features, out_features, w, requant).map_err(bad)?)
            }
            LayerFile::Avgpool { window, stride } => {
                Layer::AvgPool1D(PoolSpec { window, stride: stride.unwrap_or(window) })
            }
        });
    }
    let net = match file.input {
        Some(Dims { c, t }) => NetworkSpec::with_input(layers, c, t),
        None => NetworkSpec::new(layers),
    };
    net.map_err(|e| ToolError::parse(path, e.to_string()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| ToolError::io(dir, e))
}

/// Writes `net` as `dir/<name>.json` plus one weight tensor per layer.
/// Returns the path of the network file.
pub fn store_network(net: &NetworkSpec, dir: &Path, name: &str) -> Result<PathBuf> {
    create_dir(dir)?;
    let mut layers = Vec::with_capacity(net.layers().len());
    for (i, layer) in net.layers().iter().enumerate() {
        let weights_name = format!("{name}.layer{i}.weights.tensor");
        layers.push(match layer {
            Layer::Conv1D(s) => {
                let w = QuantTensorTC::new(s.k * s.c_in, s.c_out, s.weights.data().to_vec(), 1.0)?;
                write_tensor(&dir.join(&weights_name), &w)?;
                LayerFile::Conv1d {
                    c_in: s.c_in,
                    c_out: s.c_out,
                    t_in: s.t_in,
                    k: s.k,
                    d: s.d,
                    stride: s.stride,
                    weights: weights_name,
                    mult: s.requant.mult.clone(),
                    bias: s.requant.bias.clone(),
                    shift: s.requant.shift,
                    relu: s.requant.relu,
                }
            }
            Layer::Linear(s) => {
                let w = QuantTensorTC::new(s.in_features, s.out_features, s.weights.clone(), 1.0)?;
                write_tensor(&dir.join(&weights_name), &w)?;
                LayerFile::Linear {
                    in_features: s.in_features,
                    out_features: s.out_features,
                    weights: weights_name,
                    mult: s.requant.mult.clone(),
                    bias: s.requant.bias.clone(),
                    shift: s.requant.shift,
                    relu: s.requant.relu,
                }
            }
            Layer::AvgPool1D(p) => LayerFile::Avgpool { window: p.window, stride: Some(p.stride) },
        });
    }
    let (c, t) = net.input_dims();
    let inferred = match net.layers().first() {
        Some(Layer::Conv1D(s)) => Some((s.c_in, s.t_in)),
        Some(Layer::Linear(s)) => Some((s.in_features, 1)),
        _ => None,
    };
    let input = (inferred != Some((c, t))).then_some(Dims { c, t });
    let path = dir.join(format!("{name}.json"));
    let mut text = serde_json::to_string_pretty(&NetworkFile { input, layers }).expect("network serializes");
    text.push('\n');
    write_bytes(&path, text.as_bytes())?;
    Ok(path)
}
