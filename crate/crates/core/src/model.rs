//! BNN models and binary input samples.
//!
//! A model is a chain of internal blocks (±1 linear layer, batch
//! normalization, sign binarization) followed by one output block (±1 linear
//! layer, first-occurrence argmax). Weight rows are stored per output neuron,
//! so row `j` of a block holds the incoming weights of neuron `j`.
//!
//! Everything here is pure data plus validation and seeded random
//! generation; the on-disk format lives in the std companion crate.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Validation and parsing failures, with the offending location.
/// Blocks, rows, columns and positions are reported 1-based.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    NoInternalBlocks,
    TooFewClasses { found: usize },
    EmptyLayer { block: usize },
    RaggedWeights { block: usize, row: usize, expected: usize, found: usize },
    BadWeight { block: usize, row: usize, col: usize, value: f64 },
    VectorLength { block: usize, field: &'static str, expected: usize, found: usize },
    NonFinite { block: usize, field: &'static str, index: usize },
    NonPositiveSigma { block: usize, index: usize },
    WidthMismatch { block: usize, expected: usize, found: usize },
    BadArch { reason: String },
    SampleLength { expected: usize, found: usize },
    SampleChar { position: usize, ch: char },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NoInternalBlocks => write!(f, "model needs at least one internal block"),
            ModelError::TooFewClasses { found } => {
                write!(f, "output block must have at least 2 classes, found {found}")
            }
            ModelError::EmptyLayer { block } => write!(f, "block {block}: empty layer"),
            ModelError::RaggedWeights { block, row, expected, found } => write!(
                f,
                "block {block}, weight row {row}: expected {expected} entries, found {found}"
            ),
            ModelError::BadWeight { block, row, col, value } => write!(
                f,
                "block {block}, weight row {row}, column {col}: value {value} is not +1 or -1"
            ),
            ModelError::VectorLength { block, field, expected, found } => write!(
                f,
                "block {block}, field {field}: expected length {expected}, found {found}"
            ),
            ModelError::NonFinite { block, field, index } => {
                write!(f, "block {block}, field {field}, entry {index}: not a finite number")
            }
            ModelError::NonPositiveSigma { block, index } => write!(
                f,
                "block {block}, bn_sigma entry {index}: must be positive when bn_alpha is nonzero"
            ),
            ModelError::WidthMismatch { block, expected, found } => write!(
                f,
                "block {block}: input width {found} does not chain with previous output width {expected}"
            ),
            ModelError::BadArch { reason } => write!(f, "bad architecture: {reason}"),
            ModelError::SampleLength { expected, found } => {
                write!(f, "input sample: expected {expected} bits, found {found}")
            }
            ModelError::SampleChar { position, ch } => {
                write!(f, "input sample: illegal character {ch:?} at position {position}")
            }
        }
    }
}

impl core::error::Error for ModelError {}

/// LIN → BN → BIN block. Weight entries are ±1; the batch-norm parameters
/// are per output neuron.
#[derive(Clone, Debug, PartialEq)]
pub struct InternalBlock {
    pub weights: Vec<Vec<i8>>,
    pub bias: Vec<f64>,
    pub bn_alpha: Vec<f64>,
    pub bn_gamma: Vec<f64>,
    pub bn_mu: Vec<f64>,
    pub bn_sigma: Vec<f64>,
}

impl InternalBlock {
    pub fn input_width(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn output_width(&self) -> usize {
        self.weights.len()
    }

    fn validate(&self, block: usize) -> Result<(), ModelError> {
        let n_out = self.output_width();
        let n_in = self.input_width();
        if n_out == 0 || n_in == 0 {
            return Err(ModelError::EmptyLayer { block });
        }
        validate_weights(&self.weights, block, n_in)?;
        for (field, v) in [
            ("bias", &self.bias),
            ("bn_alpha", &self.bn_alpha),
            ("bn_gamma", &self.bn_gamma),
            ("bn_mu", &self.bn_mu),
            ("bn_sigma", &self.bn_sigma),
        ] {
            if v.len() != n_out {
                return Err(ModelError::VectorLength {
                    block,
                    field,
                    expected: n_out,
                    found: v.len(),
                });
            }
            for (i, x) in v.iter().enumerate() {
                if !x.is_finite() {
                    return Err(ModelError::NonFinite { block, field, index: i + 1 });
                }
            }
        }
        for j in 0..n_out {
            if self.bn_alpha[j] != 0.0 && self.bn_sigma[j] <= 0.0 {
                return Err(ModelError::NonPositiveSigma { block, index: j + 1 });
            }
        }
        Ok(())
    }
}

/// LIN → ARGMAX block; row `j` holds the weights of class `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputBlock {
    pub weights: Vec<Vec<i8>>,
    pub bias: Vec<f64>,
}

impl OutputBlock {
    pub fn input_width(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn class_count(&self) -> usize {
        self.weights.len()
    }

    fn validate(&self, block: usize) -> Result<(), ModelError> {
        let s = self.class_count();
        if s < 2 {
            return Err(ModelError::TooFewClasses { found: s });
        }
        let n_in = self.input_width();
        if n_in == 0 {
            return Err(ModelError::EmptyLayer { block });
        }
        validate_weights(&self.weights, block, n_in)?;
        if self.bias.len() != s {
            return Err(ModelError::VectorLength {
                block,
                field: "bias",
                expected: s,
                found: self.bias.len(),
            });
        }
        for (i, x) in self.bias.iter().enumerate() {
            if !x.is_finite() {
                return Err(ModelError::NonFinite { block, field: "bias", index: i + 1 });
            }
        }
        Ok(())
    }
}

fn validate_weights(weights: &[Vec<i8>], block: usize, n_in: usize) -> Result<(), ModelError> {
    for (r, row) in weights.iter().enumerate() {
        if row.len() != n_in {
            return Err(ModelError::RaggedWeights {
                block,
                row: r + 1,
                expected: n_in,
                found: row.len(),
            });
        }
        for (c, &w) in row.iter().enumerate() {
            if w != 1 && w != -1 {
                return Err(ModelError::BadWeight {
                    block,
                    row: r + 1,
                    col: c + 1,
                    value: w as f64,
                });
            }
        }
    }
    Ok(())
}

/// A validated feed-forward BNN: `d ≥ 1` internal blocks and one output block
/// with chained widths.
#[derive(Clone, Debug, PartialEq)]
pub struct BnnModel {
    internal: Vec<InternalBlock>,
    output: OutputBlock,
}

impl BnnModel {
    pub fn new(internal: Vec<InternalBlock>, output: OutputBlock) -> Result<Self, ModelError> {
        if internal.is_empty() {
            return Err(ModelError::NoInternalBlocks);
        }
        let mut prev_out = None;
        for (i, block) in internal.iter().enumerate() {
            block.validate(i + 1)?;
            if let Some(expected) = prev_out {
                if block.input_width() != expected {
                    return Err(ModelError::WidthMismatch {
                        block: i + 1,
                        expected,
                        found: block.input_width(),
                    });
                }
            }
            prev_out = Some(block.output_width());
        }
        let out_index = internal.len() + 1;
        output.validate(out_index)?;
        if output.input_width() != prev_out.unwrap() {
            return Err(ModelError::WidthMismatch {
                block: out_index,
                expected: prev_out.unwrap(),
                found: output.input_width(),
            });
        }
        Ok(BnnModel { internal, output })
    }

    pub fn internal_blocks(&self) -> &[InternalBlock] {
        &self.internal
    }

    pub fn output_block(&self) -> &OutputBlock {
        &self.output
    }

    pub fn input_width(&self) -> usize {
        self.internal[0].input_width()
    }

    pub fn class_count(&self) -> usize {
        self.output.class_count()
    }

    /// Widths of the input layer and every block output layer:
    /// `[n1, ..., n_{d+1}]`.
    pub fn layer_widths(&self) -> Vec<usize> {
        let mut w: Vec<usize> = alloc::vec![self.input_width()];
        w.extend(self.internal.iter().map(InternalBlock::output_width));
        w
    }

    /// `n1:...:n_{d+1}:s`
    pub fn arch(&self) -> Arch {
        Arch { widths: self.layer_widths(), classes: self.class_count() }
    }
}

/// Architecture descriptor `n1:...:n_{d+1}:s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arch {
    pub widths: Vec<usize>,
    pub classes: usize,
}

impl Arch {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let bad = |reason: &str| ModelError::BadArch { reason: String::from(reason) };
        let mut parts = Vec::new();
        for p in text.split(':') {
            let v: usize = p.trim().parse().map_err(|_| bad("widths must be positive integers"))?;
            parts.push(v);
        }
        if parts.len() < 3 {
            return Err(bad("need at least n1:n2:s"));
        }
        let classes = parts.pop().unwrap();
        if classes < 2 {
            return Err(bad("class count must be at least 2"));
        }
        if parts.contains(&0) {
            return Err(bad("widths must be at least 1"));
        }
        Ok(Arch { widths: parts, classes })
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in &self.widths {
            write!(f, "{w}:")?;
        }
        write!(f, "{}", self.classes)
    }
}

/// A deterministic random model for the given architecture and seed.
///
/// Weights are uniform over ±1; `bias`, `bn_gamma` and `bn_mu` are uniform in
/// [-2, 2], `bn_sigma` in [0.5, 2], and `bn_alpha` is forced to exactly 0
/// with probability 0.05 (otherwise uniform in [-2, 2]) so the degenerate
/// constant neurons are exercised.
pub fn generate_random(arch: &Arch, seed: u64) -> BnnModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut internal = Vec::new();
    for d in 0..arch.widths.len() - 1 {
        let (n_in, n_out) = (arch.widths[d], arch.widths[d + 1]);
        internal.push(InternalBlock {
            weights: random_weights(&mut rng, n_out, n_in),
            bias: random_reals(&mut rng, n_out),
            bn_alpha: (0..n_out)
                .map(|_| if rng.gen_bool(0.05) { 0.0 } else { rng.gen_range(-2.0..=2.0) })
                .collect(),
            bn_gamma: random_reals(&mut rng, n_out),
            bn_mu: random_reals(&mut rng, n_out),
            bn_sigma: (0..n_out).map(|_| rng.gen_range(0.5..=2.0)).collect(),
        });
    }
    let n_last = *arch.widths.last().unwrap();
    let output = OutputBlock {
        weights: random_weights(&mut rng, arch.classes, n_last),
        bias: random_reals(&mut rng, arch.classes),
    };
    BnnModel::new(internal, output).expect("generated model is valid by construction")
}

fn random_weights(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<i8>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect())
        .collect()
}

fn random_reals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-2.0..=2.0)).collect()
}

/// A binarized input vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputSample {
    bits: Vec<bool>,
}

impl InputSample {
    pub fn new(bits: Vec<bool>) -> Self {
        InputSample { bits }
    }

    /// Parses a string of `0`/`1` characters; whitespace is ignored.
    /// Character positions in errors are 1-based and count non-whitespace.
    pub fn parse(text: &str, width: usize) -> Result<Self, ModelError> {
        let mut bits = Vec::with_capacity(width);
        for ch in text.chars().filter(|c| !c.is_whitespace()) {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(ModelError::SampleChar { position: bits.len() + 1, ch }),
            }
        }
        if bits.len() != width {
            return Err(ModelError::SampleLength { expected: width, found: bits.len() });
        }
        Ok(InputSample { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

impl fmt::Display for InputSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}
