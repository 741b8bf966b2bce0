use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::params::{Architecture, ModelConfig, ModelParams, PredictorKind};
use super::ModelError;
use crate::scalar::Real;

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &str = "lpsim-checkpoint";

/// Writes a text tensor dump: a header, then per tensor a
/// `tensor <name> <shape..>` line followed by its rows. Values use the
/// shortest decimal form that parses back to the same bits.
pub fn write_checkpoint<T: Real>(params: &ModelParams<T>, path: &Path) -> Result<(), ModelError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{MAGIC} {CHECKPOINT_VERSION}")?;
    writeln!(w, "architecture {}", params.architecture())?;
    writeln!(w, "predictor {}", params.predictor_kind())?;
    for ((name, shape), data) in params.tensor_specs().into_iter().zip(params.tensors()) {
        let dims: Vec<String> = shape.iter().map(usize::to_string).collect();
        writeln!(w, "tensor {name} {}", dims.join(" "))?;
        let cols = *shape.last().expect("tensors have a shape");
        for row in data.chunks(cols) {
            let vals: Vec<String> = row.iter().map(|x| x.as_f64().to_string()).collect();
            writeln!(w, "{}", vals.join(" "))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn bad(msg: impl Into<String>) -> ModelError {
    ModelError::Checkpoint(msg.into())
}

struct RawTensor {
    name: String,
    shape: Vec<usize>,
    values: Vec<f64>,
}

pub fn read_checkpoint<T: Real>(path: &Path) -> Result<ModelParams<T>, ModelError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))?;
    match header.split_once(' ') {
        Some((MAGIC, v)) if v.parse() == Ok(CHECKPOINT_VERSION) => {}
        _ => return Err(bad(format!("unrecognized header {header:?}"))),
    }
    let mut field = |key: &str| -> Result<String, ModelError> {
        let line = lines.next().ok_or_else(|| bad(format!("missing {key}")))?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.to_string()),
            _ => Err(bad(format!("expected {key}, found {line:?}"))),
        }
    };
    let architecture: Architecture = field("architecture")?.parse().map_err(bad)?;
    let predictor: PredictorKind = field("predictor")?.parse().map_err(bad)?;

    let mut raw: Vec<RawTensor> = Vec::new();
    for line in lines {
        if let Some(rest) = line.strip_prefix("tensor ") {
            let mut parts = rest.split_whitespace();
            let name = parts.next().ok_or_else(|| bad("tensor without name"))?.to_string();
            let shape = parts
                .map(|d| d.parse::<usize>().map_err(|_| bad(format!("bad dimension {d:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            raw.push(RawTensor {
                name,
                shape,
                values: Vec::new(),
            });
        } else {
            let t = raw.last_mut().ok_or_else(|| bad("values before first tensor"))?;
            for tok in line.split_whitespace() {
                t.values.push(tok.parse().map_err(|_| bad(format!("bad value {tok:?}")))?);
            }
        }
    }

    let encoder = raw.iter().filter(|t| t.name.starts_with("encoder.")).count() / 2;
    let first = raw.first().ok_or_else(|| bad("no tensors"))?;
    if first.shape.len() != 2 {
        return Err(bad("first tensor is not a matrix"));
    }
    let width = match architecture {
        Architecture::Gcn => 1,
        Architecture::Sage => 2,
    };
    let cfg = ModelConfig {
        architecture,
        predictor,
        input_dim: first.shape[0] / width,
        hidden_dim: first.shape[1],
        num_layers: encoder,
    };
    let mut params = ModelParams::<T>::zeros(&cfg);
    let specs = params.tensor_specs();
    if specs.len() != raw.len() {
        return Err(bad(format!("expected {} tensors, found {}", specs.len(), raw.len())));
    }
    for (((name, shape), dst), t) in specs.into_iter().zip(params.tensors_mut()).zip(&raw) {
        if t.name != name || t.shape != shape {
            return Err(bad(format!(
                "tensor {} {:?} does not match expected {name} {shape:?}",
                t.name, t.shape
            )));
        }
        if t.values.len() != dst.len() {
            return Err(bad(format!(
                "tensor {name}: expected {} values, found {}",
                dst.len(),
                t.values.len()
            )));
        }
        for (d, &x) in dst.iter_mut().zip(&t.values) {
            *d = T::of(x);
        }
    }
    if !params.is_finite() {
        return Err(bad("non-finite parameter"));
    }
    Ok(params)
}
