//! Plain-text parameter checkpoints.
//!
//! ```text
//! c2st-mlp 1
//! scalar f64
//! input 6
//! hidden 64
//! depth 3
//! activation relu
//! params 8769
//! <one value per line>
//! ```
//!
//! Values are written in shortest round-trip decimal form, so a save/load
//! cycle reproduces every parameter bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::mlp::{Activation, Mlp, MlpShape};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &str = "c2st-mlp";
pub const FORMAT_VERSION: u32 = 1;

pub fn checkpoint_to_string<T: Scalar>(model: &Mlp<T>) -> String {
    let s = model.shape();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {FORMAT_VERSION}");
    let _ = writeln!(out, "scalar {}", T::TAG);
    let _ = writeln!(out, "input {}", s.input);
    let _ = writeln!(out, "hidden {}", s.hidden);
    let _ = writeln!(out, "depth {}", s.depth);
    let _ = writeln!(out, "activation {}", s.activation.tag());
    let _ = writeln!(out, "params {}", model.params().len());
    for p in model.params() {
        let _ = writeln!(out, "{p}");
    }
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

fn header_field<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<&'a str> {
    let line = lines
        .next()
        .ok_or_else(|| bad(format!("missing `{key}` line")))?;
    match line.split_once(' ') {
        Some((k, v)) if k == key => Ok(v.trim()),
        _ => Err(bad(format!("expected `{key} <value>`, found `{line}`"))),
    }
}

fn header_usize<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<usize> {
    let v = header_field(lines, key)?;
    v.parse()
        .map_err(|_| bad(format!("`{key}` is not a count: `{v}`")))
}

pub fn checkpoint_from_str<T: Scalar>(text: &str) -> Result<Mlp<T>> {
    let mut lines = text.lines();
    let version = header_field(&mut lines, MAGIC)?;
    if version != FORMAT_VERSION.to_string() {
        return Err(bad(format!("unsupported format version {version}")));
    }
    let tag = header_field(&mut lines, "scalar")?;
    if tag != T::TAG {
        return Err(bad(format!(
            "checkpoint holds {tag} parameters, expected {}",
            T::TAG
        )));
    }
    let input = header_usize(&mut lines, "input")?;
    let hidden = header_usize(&mut lines, "hidden")?;
    let depth = header_usize(&mut lines, "depth")?;
    let activation = match header_field(&mut lines, "activation")? {
        "relu" => Activation::Relu,
        other => return Err(bad(format!("unknown activation `{other}`"))),
    };
    let count = header_usize(&mut lines, "params")?;
    let params = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| T::from_str_radix(l.trim(), 10).map_err(|_| bad(format!("bad parameter `{l}`"))))
        .collect::<Result<Vec<T>>>()?;
    if params.len() != count {
        return Err(bad(format!(
            "header declares {count} parameters, found {}",
            params.len()
        )));
    }
    let shape = MlpShape {
        input,
        hidden,
        depth,
        activation,
    };
    Mlp::from_params(shape, params)
}

pub fn save_checkpoint<T: Scalar>(model: &Mlp<T>, path: &Path) -> Result<()> {
    fs::write(path, checkpoint_to_string(model))?;
    Ok(())
}

pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<Mlp<T>> {
    checkpoint_from_str(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    fn random_net<T: Scalar>() -> Mlp<T> {
        Mlp::init_uniform(MlpShape::new(4, 5), &mut RngStream::new(1, 2).rng()).unwrap()
    }

    #[test]
    fn round_trip_is_bitwise_f64() {
        let net = random_net::<f64>();
        let back: Mlp<f64> = checkpoint_from_str(&checkpoint_to_string(&net)).unwrap();
        assert_eq!(back.shape(), net.shape());
        assert!(net
            .params()
            .iter()
            .zip(back.params())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn round_trip_is_bitwise_f32() {
        let net = random_net::<f32>();
        let back: Mlp<f32> = checkpoint_from_str(&checkpoint_to_string(&net)).unwrap();
        assert!(net
            .params()
            .iter()
            .zip(back.params())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn header_mismatches_are_rejected() {
        let text = checkpoint_to_string(&random_net::<f64>());
        assert!(checkpoint_from_str::<f32>(&text).is_err());
        assert!(checkpoint_from_str::<f64>(&text.replacen("c2st-mlp 1", "c2st-mlp 9", 1)).is_err());
        assert!(checkpoint_from_str::<f64>(&text.replacen("relu", "tanh", 1)).is_err());
        let truncated: String = text.lines().take(20).map(|l| format!("{l}\n")).collect();
        assert!(checkpoint_from_str::<f64>(&truncated).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.txt");
        let net = random_net::<f64>();
        save_checkpoint(&net, &path).unwrap();
        assert_eq!(
            load_checkpoint::<f64>(&path).unwrap().params(),
            net.params()
        );
    }
}
