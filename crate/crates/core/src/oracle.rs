//! Direct reference evaluation of a BNN and exhaustive region enumeration.
//!
//! This is the ground truth the symbolic pipeline is tested against, so it
//! follows the layer definitions literally and does nothing clever. It uses
//! the same 64-bit float arithmetic as the encoder's threshold computation,
//! so semantic-equality tests compare like with like.

use alloc::vec::Vec;

use itertools::Itertools;

use crate::encoder::Region;
use crate::model::{BnnModel, InputSample, InternalBlock, ModelError, OutputBlock};

/// Output bits of one internal block for a Boolean input vector:
/// `sign(BN(LIN(2x - 1)))`, with `sign(0) = +1` mapped to `true`.
pub fn internal_block_output(block: &InternalBlock, input: &[bool]) -> Vec<bool> {
    debug_assert_eq!(input.len(), block.input_width());
    (0..block.output_width())
        .map(|j| {
            let lin = linear(&block.weights[j], block.bias[j], input);
            let alpha = block.bn_alpha[j];
            // Division by sigma only happens scaled by a nonzero alpha.
            let bn = if alpha == 0.0 {
                block.bn_gamma[j]
            } else {
                alpha * ((lin - block.bn_mu[j]) / block.bn_sigma[j]) + block.bn_gamma[j]
            };
            bn >= 0.0
        })
        .collect()
}

/// Per-class scores of the output block for a Boolean input vector.
pub fn output_scores(block: &OutputBlock, input: &[bool]) -> Vec<f64> {
    debug_assert_eq!(input.len(), block.input_width());
    (0..block.class_count())
        .map(|j| linear(&block.weights[j], block.bias[j], input))
        .collect()
}

fn linear(row: &[i8], bias: f64, input: &[bool]) -> f64 {
    let mut acc = bias;
    for (w, &x) in row.iter().zip(input) {
        let v = if x { 1.0 } else { -1.0 };
        acc += *w as f64 * v;
    }
    acc
}

/// Index of the largest entry, first occurrence on ties.
pub fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// The class (0-based) the network assigns to the input.
pub fn eval(model: &BnnModel, input: &InputSample) -> Result<usize, ModelError> {
    if input.len() != model.input_width() {
        return Err(ModelError::SampleLength {
            expected: model.input_width(),
            found: input.len(),
        });
    }
    Ok(eval_bits(model, input.bits()))
}

/// Like [`eval`] but on a raw bit slice of the right width.
pub fn eval_bits(model: &BnnModel, input: &[bool]) -> usize {
    let mut current = input.to_vec();
    for block in model.internal_blocks() {
        current = internal_block_output(block, &current);
    }
    argmax_first(&output_scores(model.output_block(), &current))
}

/// Streams every point of the region exactly once.
///
/// Feasibility is the caller's concern; this is meant for regions of at most
/// a few million points.
pub fn enumerate_region(region: &Region) -> RegionIter<'_> {
    match region {
        Region::HammingBall { center, radius } => RegionIter::Hamming {
            center,
            radius: *radius,
            flips: 0,
            combos: (0..center.len()).combinations(0),
        },
        Region::FixedIndices { center, free } => RegionIter::Fixed {
            center,
            free,
            odometer: alloc::vec![false; free.len()],
            done: false,
        },
    }
}

pub enum RegionIter<'a> {
    Hamming {
        center: &'a InputSample,
        radius: usize,
        flips: usize,
        combos: itertools::Combinations<core::ops::Range<usize>>,
    },
    Fixed {
        center: &'a InputSample,
        free: &'a [usize],
        odometer: Vec<bool>,
        done: bool,
    },
}

impl Iterator for RegionIter<'_> {
    type Item = Vec<bool>;

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            RegionIter::Hamming { center, radius, flips, combos } => loop {
                if let Some(positions) = combos.next() {
                    let mut bits = center.bits().to_vec();
                    for p in positions {
                        bits[p] = !bits[p];
                    }
                    return Some(bits);
                }
                if *flips >= *radius {
                    return None;
                }
                *flips += 1;
                *combos = (0..center.len()).combinations(*flips);
            },
            RegionIter::Fixed { center, free, odometer, done } => {
                if *done {
                    return None;
                }
                let mut bits = center.bits().to_vec();
                for (slot, &idx) in odometer.iter().zip(free.iter()) {
                    bits[idx] = *slot;
                }
                // Advance the odometer; mark the stream done on wrap.
                let mut carried = true;
                for slot in odometer.iter_mut() {
                    if *slot {
                        *slot = false;
                    } else {
                        *slot = true;
                        carried = false;
                        break;
                    }
                }
                if carried {
                    *done = true;
                }
                Some(bits)
            }
        }
    }
}
