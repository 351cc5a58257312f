//! From network blocks and input regions to cardinality constraints, and
//! from cardinality constraints to BDDs.
//!
//! Every neuron and both region kinds reduce to the single intermediate form
//! `Σ ℓ_j ≥ k` over literals, which is compiled by a grid-shaped construction
//! whose result has at most `k·(n-k+1)` non-terminal nodes.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{One, Zero};

use crate::bdd::{BddError, BddHandle, BddManager, Literal, Var};
use crate::layout::VariableLayout;
use crate::model::{InputSample, InternalBlock, ModelError, OutputBlock};

/// `Σ literals ≥ k`, or one of the two constant constraints.
///
/// Thresholds outside `[1, n]` only exist transiently: construction clamps
/// `k ≤ 0` to `ConstTrue` and `k > n` to `ConstFalse`, which keeps the grid
/// construction well-formed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CardinalityConstraint {
    ConstTrue,
    ConstFalse,
    Threshold { literals: Vec<Literal>, k: usize },
}

impl CardinalityConstraint {
    /// Normalized constraint `Σ literals ≥ k`. Literals are sorted by
    /// variable; duplicate variables are rejected.
    pub fn at_least(mut literals: Vec<Literal>, k: i64) -> Result<Self, BddError> {
        literals.sort_by_key(|l| l.var);
        for w in literals.windows(2) {
            if w[0].var == w[1].var {
                return Err(BddError::DuplicateVariable { var: w[0].var.0 });
            }
        }
        if k <= 0 {
            return Ok(CardinalityConstraint::ConstTrue);
        }
        if k as u128 > literals.len() as u128 {
            return Ok(CardinalityConstraint::ConstFalse);
        }
        Ok(CardinalityConstraint::Threshold { literals, k: k as usize })
    }

    /// True iff the assignment (dense, indexed by variable index) satisfies
    /// the constraint.
    pub fn holds_in(&self, assignment: &[bool]) -> bool {
        match self {
            CardinalityConstraint::ConstTrue => true,
            CardinalityConstraint::ConstFalse => false,
            CardinalityConstraint::Threshold { literals, k } => {
                literals.iter().filter(|l| l.holds_in(assignment)).count() >= *k
            }
        }
    }
}

/// Snaps values that are within 1e-9 of an integer onto that integer.
/// Batch-norm parameters are floats, so thresholds that are mathematically
/// integral can land a few ulps off; downstream ceilings and the integrality
/// test for strict comparisons go through this first.
fn snap(x: f64) -> f64 {
    let r = libm::round(x);
    if libm::fabs(x - r) < 1e-9 {
        r
    } else {
        x
    }
}

fn is_integer(x: f64) -> bool {
    x == libm::round(x)
}

/// Builds the constraint `Σ literals ≥ bound` where `bound` is an
/// integral-valued float (possibly infinite or huge; clamping happens here,
/// before any integer conversion could overflow).
fn cc_from_bound(literals: Vec<Literal>, bound: f64) -> CardinalityConstraint {
    if bound.is_nan() || bound <= 0.0 {
        return CardinalityConstraint::ConstTrue;
    }
    if bound > literals.len() as f64 {
        return CardinalityConstraint::ConstFalse;
    }
    CardinalityConstraint::Threshold { literals, k: bound as usize }
}

/// Compiles `Σ ℓ_j ≥ k` to a BDD by filling the solution grid bottom-up and
/// right-to-left: cell `(i, j)` tests literal `ℓ_{i+j-1}`, its solid edge
/// moves one row down (literal true), its dashed edge one column right.
/// Boundary rows/columns are the constant leaves. The result has at most
/// `k·(n-k+1)` non-terminal nodes.
pub fn cc_to_bdd(
    mgr: &mut BddManager,
    cc: &CardinalityConstraint,
) -> Result<BddHandle, BddError> {
    let (literals, k) = match cc {
        CardinalityConstraint::ConstTrue => return Ok(mgr.true_handle()),
        CardinalityConstraint::ConstFalse => return Ok(mgr.false_handle()),
        CardinalityConstraint::Threshold { literals, k } => (literals, *k),
    };
    let n = literals.len();
    debug_assert!(k >= 1 && k <= n);
    let width = n - k + 2;
    // Row k+1 is constant true; the last column of every working row is
    // constant false.
    let mut above: Vec<BddHandle> = alloc::vec![mgr.true_handle(); width];
    let mut row: Vec<BddHandle> = alloc::vec![mgr.false_handle(); width];
    for i in (1..=k).rev() {
        for slot in row.iter_mut() {
            *slot = mgr.false_handle();
        }
        for j in (1..=n - k + 1).rev() {
            let lit = literals[i + j - 2];
            let down = above[j - 1]; // literal true: one more satisfied
            let right = row[j]; // literal false: one fewer chance
            row[j - 1] = if lit.positive {
                mgr.ite_var(lit.var, down, right)?
            } else {
                mgr.ite_var(lit.var, right, down)?
            };
        }
        core::mem::swap(&mut above, &mut row);
    }
    Ok(above[0])
}

/// One cardinality constraint per output neuron of an internal block:
/// neuron `j` fires exactly when its constraint holds over the block's
/// input variables.
///
/// The four-way case split on the batch-norm scale: positive scale keeps the
/// weight-signed literals, zero scale degenerates to a constant by the sign
/// of the shift, negative scale flips every literal and mirrors the
/// threshold.
pub fn internal_block_to_ccs(
    block: &InternalBlock,
    layout: &VariableLayout,
    block_index: usize,
) -> Vec<CardinalityConstraint> {
    let n_in = block.input_width();
    let in_layer = block_index;
    let mut ccs = Vec::with_capacity(block.output_width());
    for j in 0..block.output_width() {
        let alpha = block.bn_alpha[j];
        let gamma = block.bn_gamma[j];
        let mu = block.bn_mu[j];
        let sigma = block.bn_sigma[j];
        let bias = block.bias[j];
        let row = &block.weights[j];
        let cc = if alpha == 0.0 {
            if gamma >= 0.0 {
                CardinalityConstraint::ConstTrue
            } else {
                CardinalityConstraint::ConstFalse
            }
        } else {
            let positive_scale = alpha > 0.0;
            let literals: Vec<Literal> = (0..n_in)
                .map(|kk| Literal {
                    var: layout.var(in_layer, kk),
                    positive: (row[kk] > 0) == positive_scale,
                })
                .collect();
            let t = if positive_scale {
                0.5 * (n_in as f64 + mu - bias - gamma * sigma / alpha)
            } else {
                0.5 * (n_in as f64 - mu + bias + gamma * sigma / alpha)
            };
            cc_from_bound(literals, libm::ceil(snap(t)))
        };
        ccs.push(cc);
    }
    ccs
}

/// The `s-1` cardinality constraints whose conjunction says "class `target`
/// wins the argmax", over the last layer's variables.
///
/// For an earlier class `j' < target` the comparison is strict (argmax
/// returns the first maximal entry), which on an integral threshold shifts
/// the bound by one instead of taking a ceiling.
pub fn output_block_to_ccs(
    block: &OutputBlock,
    layout: &VariableLayout,
    target: usize,
) -> Vec<CardinalityConstraint> {
    let s = block.class_count();
    debug_assert!(target < s);
    let n = block.input_width();
    let last_layer = layout.layer_count() - 1;
    let mut ccs = Vec::with_capacity(s - 1);
    for rival in 0..s {
        if rival == target {
            continue;
        }
        let mut literals = Vec::new();
        let mut negatives = 0usize;
        let mut diff_sum = 0i64;
        for k in 0..n {
            let diff = block.weights[target][k] as i64 - block.weights[rival][k] as i64;
            diff_sum += diff;
            match diff {
                2 => literals.push(Literal::pos(layout.var(last_layer, k))),
                -2 => {
                    literals.push(Literal::neg(layout.var(last_layer, k)));
                    negatives += 1;
                }
                _ => {} // equal weights contribute nothing
            }
        }
        let t = snap(0.25 * (block.bias[rival] - block.bias[target] + diff_sum as f64));
        let bound = if rival < target && is_integer(t) {
            t + 1.0 + negatives as f64
        } else {
            libm::ceil(t) + negatives as f64
        };
        ccs.push(cc_from_bound(literals, bound));
    }
    ccs
}

/// The input region: a Hamming ball around a sample, or the set of samples
/// agreeing with a center outside a set of free indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Region {
    HammingBall { center: InputSample, radius: usize },
    FixedIndices { center: InputSample, free: Vec<usize> },
}

impl Region {
    pub fn hamming(center: InputSample, radius: usize) -> Result<Self, ModelError> {
        if radius > center.len() {
            return Err(ModelError::BadArch {
                reason: alloc::format!(
                    "hamming radius {radius} exceeds input width {}",
                    center.len()
                ),
            });
        }
        Ok(Region::HammingBall { center, radius })
    }

    /// Free indices are 0-based here; the CLI converts from its 1-based
    /// flags.
    pub fn fixed(center: InputSample, mut free: Vec<usize>) -> Result<Self, ModelError> {
        free.sort_unstable();
        free.dedup();
        if let Some(&last) = free.last() {
            if last >= center.len() {
                return Err(ModelError::BadArch {
                    reason: alloc::format!(
                        "free index {last} out of range for input width {}",
                        center.len()
                    ),
                });
            }
        }
        Ok(Region::FixedIndices { center, free })
    }

    /// The whole input space, expressed as a maximal Hamming ball.
    pub fn full(width: usize) -> Self {
        Region::HammingBall {
            center: InputSample::new(alloc::vec![false; width]),
            radius: width,
        }
    }

    pub fn center(&self) -> &InputSample {
        match self {
            Region::HammingBall { center, .. } => center,
            Region::FixedIndices { center, .. } => center,
        }
    }

    pub fn width(&self) -> usize {
        self.center().len()
    }

    /// Membership test, for oracles and tests.
    pub fn contains(&self, bits: &[bool]) -> bool {
        match self {
            Region::HammingBall { center, radius } => {
                let dist = center.bits().iter().zip(bits).filter(|(a, b)| a != b).count();
                dist <= *radius
            }
            Region::FixedIndices { center, free } => center
                .bits()
                .iter()
                .zip(bits)
                .enumerate()
                .all(|(i, (a, b))| a == b || free.binary_search(&i).is_ok()),
        }
    }
}

/// Region membership as a BDD over the input variables.
///
/// A Hamming ball `HM(x, u) ≤ r` is the cardinality constraint
/// `Σ ℓ_j ≥ n1 - r` with `ℓ_j` positive exactly when `u_j` is set, so the
/// same grid construction serves neurons and regions; a fixed-index region
/// is the cube pinning every non-free bit.
pub fn region_to_bdd(mgr: &mut BddManager, region: &Region) -> Result<BddHandle, BddError> {
    match region {
        Region::HammingBall { center, radius } => {
            let literals: Vec<Literal> = center
                .bits()
                .iter()
                .enumerate()
                .map(|(j, &bit)| Literal { var: Var(j as u32), positive: bit })
                .collect();
            let k = center.len() as i64 - *radius as i64;
            let cc = CardinalityConstraint::at_least(literals, k)?;
            cc_to_bdd(mgr, &cc)
        }
        Region::FixedIndices { center, free } => {
            let literals: Vec<Literal> = center
                .bits()
                .iter()
                .enumerate()
                .filter(|(i, _)| free.binary_search(i).is_err())
                .map(|(i, &bit)| Literal { var: Var(i as u32), positive: bit })
                .collect();
            mgr.mk_cube(&literals)
        }
    }
}

/// Exact number of points in the region, computed analytically (binomial
/// sums and powers of two), independent of any BDD.
pub fn region_size(region: &Region) -> BigUint {
    match region {
        Region::HammingBall { center, radius } => {
            let n = BigUint::from(center.len());
            let mut total = BigUint::zero();
            for i in 0..=*radius {
                total += binomial(n.clone(), BigUint::from(i));
            }
            total
        }
        Region::FixedIndices { free, .. } => BigUint::one() << free.len(),
    }
}
