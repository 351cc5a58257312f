//! Per-layer variable ranges.
//!
//! Layer 0 owns one variable per network input and occupies the lowest
//! indices; each following layer owns a fresh contiguous range for its block
//! outputs, in block order. The ranges are disjoint and cover the whole
//! variable space of the manager a build runs in.

use alloc::vec::Vec;
use core::ops::Range;

use crate::bdd::Var;
use crate::model::BnnModel;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableLayout {
    offsets: Vec<u32>,
    widths: Vec<u32>,
}

impl VariableLayout {
    /// Layout for the given layer widths, inputs first.
    pub fn new(widths: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(widths.len());
        let mut next = 0u32;
        let mut ws = Vec::with_capacity(widths.len());
        for &w in widths {
            offsets.push(next);
            next += w as u32;
            ws.push(w as u32);
        }
        VariableLayout { offsets, widths: ws }
    }

    /// Layout covering a model's input layer and every block output layer.
    pub fn for_model(model: &BnnModel) -> Self {
        Self::new(&model.layer_widths())
    }

    /// Number of layers (input layer included).
    pub fn layer_count(&self) -> usize {
        self.offsets.len()
    }

    pub fn layer_width(&self, layer: usize) -> usize {
        self.widths[layer] as usize
    }

    fn layer_range(&self, layer: usize) -> Range<u32> {
        let start = self.offsets[layer];
        start..start + self.widths[layer]
    }

    /// All variables of one layer, ascending.
    pub fn layer_vars(&self, layer: usize) -> Vec<Var> {
        self.layer_range(layer).map(Var).collect()
    }

    /// The variable carrying output `index` of `layer`.
    pub fn var(&self, layer: usize, index: usize) -> Var {
        debug_assert!(index < self.widths[layer] as usize);
        Var(self.offsets[layer] + index as u32)
    }

    pub fn input_vars(&self) -> Vec<Var> {
        self.layer_vars(0)
    }

    pub fn total_vars(&self) -> u32 {
        match self.offsets.last() {
            Some(last) => last + self.widths[self.widths.len() - 1],
            None => 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_are_contiguous_and_disjoint() {
        let layout = VariableLayout::new(&[4, 3, 2]);
        assert_eq!(layout.layer_count(), 3);
        assert_eq!(layout.total_vars(), 9);
        assert_eq!(layout.input_vars(), (0..4).map(Var).collect::<Vec<_>>());
        assert_eq!(layout.layer_vars(1), (4..7).map(Var).collect::<Vec<_>>());
        assert_eq!(layout.layer_vars(2), (7..9).map(Var).collect::<Vec<_>>());
        assert_eq!(layout.var(1, 2), Var(6));
    }
}
