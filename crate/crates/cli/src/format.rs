//! The on-disk model format: one JSON document with a `blocks` array.
//!
//! Internal blocks carry `type = "internal"`, `weights` (one row per output
//! neuron, entries +1/-1), `bias`, `bn_alpha`, `bn_gamma`, `bn_mu`,
//! `bn_sigma`; the final block carries `type = "output"` with `weights` (one
//! row per class) and `bias`. Input samples are plain text files of `0`/`1`
//! characters.

use std::fs;
use std::path::Path;

use bnnbdd_core::model::{BnnModel, InputSample, InternalBlock, ModelError, OutputBlock};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Deserialize)]
struct ModelFile {
    blocks: Vec<BlockFile>,
}

#[derive(Deserialize)]
#[serde(tag = "type")]
enum BlockFile {
    #[serde(rename = "internal")]
    Internal {
        weights: Vec<Vec<f64>>,
        bias: Vec<f64>,
        bn_alpha: Vec<f64>,
        bn_gamma: Vec<f64>,
        bn_mu: Vec<f64>,
        bn_sigma: Vec<f64>,
    },
    #[serde(rename = "output")]
    Output { weights: Vec<Vec<f64>>, bias: Vec<f64> },
}

#[derive(Serialize)]
struct ModelFileOut<'a> {
    blocks: Vec<BlockFileOut<'a>>,
}

#[derive(Serialize)]
#[serde(tag = "type")]
enum BlockFileOut<'a> {
    #[serde(rename = "internal")]
    Internal {
        weights: &'a [Vec<i8>],
        bias: &'a [f64],
        bn_alpha: &'a [f64],
        bn_gamma: &'a [f64],
        bn_mu: &'a [f64],
        bn_sigma: &'a [f64],
    },
    #[serde(rename = "output")]
    Output { weights: &'a [Vec<i8>], bias: &'a [f64] },
}

fn convert_weights(raw: Vec<Vec<f64>>, block: usize) -> Result<Vec<Vec<i8>>, ModelError> {
    raw.into_iter()
        .enumerate()
        .map(|(r, row)| {
            row.into_iter()
                .enumerate()
                .map(|(c, w)| {
                    if w == 1.0 {
                        Ok(1i8)
                    } else if w == -1.0 {
                        Ok(-1i8)
                    } else {
                        Err(ModelError::BadWeight { block, row: r + 1, col: c + 1, value: w })
                    }
                })
                .collect()
        })
        .collect()
}

pub fn load_model(path: &Path) -> Result<BnnModel, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let total = file.blocks.len();
    let mut internal = Vec::new();
    let mut output = None;
    for (i, block) in file.blocks.into_iter().enumerate() {
        match block {
            BlockFile::Internal { weights, bias, bn_alpha, bn_gamma, bn_mu, bn_sigma } => {
                if output.is_some() {
                    return Err(CliError::Data(format!(
                        "{}: block {}: internal block after the output block",
                        path.display(),
                        i + 1
                    )));
                }
                internal.push(InternalBlock {
                    weights: convert_weights(weights, i + 1).map_err(locus(path))?,
                    bias,
                    bn_alpha,
                    bn_gamma,
                    bn_mu,
                    bn_sigma,
                });
            }
            BlockFile::Output { weights, bias } => {
                if i + 1 != total {
                    return Err(CliError::Data(format!(
                        "{}: block {}: output block must come last",
                        path.display(),
                        i + 1
                    )));
                }
                output = Some(OutputBlock {
                    weights: convert_weights(weights, i + 1).map_err(locus(path))?,
                    bias,
                });
            }
        }
    }
    let output = output.ok_or_else(|| {
        CliError::Data(format!("{}: missing output block", path.display()))
    })?;
    BnnModel::new(internal, output).map_err(locus(path))
}

fn locus(path: &Path) -> impl Fn(ModelError) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}

pub fn save_model(model: &BnnModel, path: &Path) -> Result<(), CliError> {
    let blocks: Vec<BlockFileOut<'_>> = model
        .internal_blocks()
        .iter()
        .map(|b| BlockFileOut::Internal {
            weights: &b.weights,
            bias: &b.bias,
            bn_alpha: &b.bn_alpha,
            bn_gamma: &b.bn_gamma,
            bn_mu: &b.bn_mu,
            bn_sigma: &b.bn_sigma,
        })
        .chain(std::iter::once(BlockFileOut::Output {
            weights: &model.output_block().weights,
            bias: &model.output_block().bias,
        }))
        .collect();
    let text = serde_json::to_string_pretty(&ModelFileOut { blocks })
        .expect("model serialization cannot fail");
    fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn load_input(path: &Path, width: usize) -> Result<InputSample, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    InputSample::parse(&text, width).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}
