//! Compiles a (model, region) pair into the per-class BDDs.
//!
//! Block by block: the block's cardinality constraints are conjoined by
//! divide and conquer, each internal constraint is tied to its fresh output
//! variable with an XNOR, feasible inputs are propagated forward by
//! projecting the block relation onto its outputs, and the running relation
//! is composed via relational products that eliminate the just-consumed
//! layer's variables. The s class BDDs are then built from the shared
//! internal relation, never from scratch per class.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;

use crate::bdd::{BddError, BddHandle, BddManager, Var};
use crate::encoder::{
    cc_to_bdd, internal_block_to_ccs, output_block_to_ccs, region_size, region_to_bdd,
    CardinalityConstraint, Region,
};
use crate::layout::VariableLayout;
use crate::model::BnnModel;

/// Per-build accounting. Node counts are sampled at block boundaries; the
/// store never shrinks, so the peak equals the last sample. Times are zero
/// unless a clock was supplied in [`BuildOptions`].
#[derive(Clone, Debug, Default)]
pub struct BuildStats {
    pub block_nodes: Vec<usize>,
    pub block_seconds: Vec<f64>,
    pub peak_nodes: usize,
    pub total_seconds: f64,
}

/// The s class BDDs over the input variables, plus the region they
/// partition.
#[derive(Clone, Debug)]
pub struct ClassPartition {
    pub class_bdds: Vec<BddHandle>,
    pub region_bdd: BddHandle,
    pub region_size: BigUint,
    pub layout: VariableLayout,
    pub stats: BuildStats,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuildErrorKind {
    Bdd(BddError),
    RegionWidth { expected: usize, found: usize },
    ManagerTooSmall { needed: u32, available: u32 },
}

impl fmt::Display for BuildErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildErrorKind::Bdd(e) => write!(f, "{e}"),
            BuildErrorKind::RegionWidth { expected, found } => {
                write!(f, "region width {found} does not match model input width {expected}")
            }
            BuildErrorKind::ManagerTooSmall { needed, available } => {
                write!(f, "manager has {available} variables but the build needs {needed}")
            }
        }
    }
}

/// A failed build still reports what it did before dying, so budget
/// exhaustion surfaces with partial statistics instead of silence.
#[derive(Clone, Debug)]
pub struct BuildFailure {
    pub kind: BuildErrorKind,
    pub stats: BuildStats,
}

impl fmt::Display for BuildFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "build failed: {}", self.kind)
    }
}

impl core::error::Error for BuildFailure {}

impl From<BuildFailure> for BuildErrorKind {
    fn from(f: BuildFailure) -> Self {
        f.kind
    }
}

pub struct BuildOptions<'a> {
    /// Conjoin each constraint BDD with the block's reachable-input set.
    /// Disabling this (for differential testing) still seeds the first block
    /// with the region; the final class BDDs are identical either way.
    pub feasible_propagation: bool,
    /// Monotone seconds source for the per-block timing stats; the core is
    /// `no_std` and has no clock of its own.
    pub clock: Option<&'a dyn Fn() -> f64>,
}

impl Default for BuildOptions<'_> {
    fn default() -> Self {
        BuildOptions { feasible_propagation: true, clock: None }
    }
}

/// Conjunction of a block's constraints against the feasible inputs, split
/// divide-and-conquer (the same BDD as a left fold, usually faster to
/// reach). For internal blocks, `out_vars[m]` is XNOR-tied to constraint
/// `m`; the output block passes `None` and gets the plain conjunction.
pub fn block_to_bdd(
    mgr: &mut BddManager,
    ccs: &[CardinalityConstraint],
    feasible_in: BddHandle,
    out_vars: Option<&[Var]>,
) -> Result<BddHandle, BddError> {
    assert!(!ccs.is_empty(), "block without constraints");
    if let Some(vars) = out_vars {
        assert_eq!(vars.len(), ccs.len());
    }
    block_range(mgr, ccs, 0, ccs.len() - 1, feasible_in, out_vars)
}

fn block_range(
    mgr: &mut BddManager,
    ccs: &[CardinalityConstraint],
    m: usize,
    n: usize,
    feasible_in: BddHandle,
    out_vars: Option<&[Var]>,
) -> Result<BddHandle, BddError> {
    if m == n {
        let g1 = cc_to_bdd(mgr, &ccs[m])?;
        // For internal blocks the fresh output variable is tied to the
        // constraint before conjoining the feasible inputs; the other order
        // would leave every out-of-region input related to the all-zeros
        // output vector, and the class BDDs would leak points outside the
        // region.
        let g = match out_vars {
            Some(vars) => {
                let out = mgr.mk_var(vars[m])?;
                let tied = mgr.xnor(out, g1)?;
                mgr.and(tied, feasible_in)?
            }
            None => mgr.and(g1, feasible_in)?,
        };
        return Ok(g);
    }
    let mid = m + (n - m) / 2;
    let left = block_range(mgr, ccs, m, mid, feasible_in, out_vars)?;
    let right = block_range(mgr, ccs, mid + 1, n, feasible_in, out_vars)?;
    mgr.and(left, right)
}

/// Compiles the model restricted to the region into one BDD per class.
pub fn build(
    mgr: &mut BddManager,
    model: &BnnModel,
    region: &Region,
    opts: &BuildOptions<'_>,
) -> Result<ClassPartition, BuildFailure> {
    if region.width() != model.input_width() {
        return Err(BuildFailure {
            kind: BuildErrorKind::RegionWidth {
                expected: model.input_width(),
                found: region.width(),
            },
            stats: BuildStats::default(),
        });
    }
    let fail = |kind: BddError, stats: &BuildStats| BuildFailure {
        kind: BuildErrorKind::Bdd(kind),
        stats: stats.clone(),
    };
    let mut stats = BuildStats::default();
    let region_bdd = region_to_bdd(mgr, region).map_err(|e| fail(e, &stats))?;
    match build_with_region_bdd(mgr, model, region_bdd, opts, &mut stats) {
        Ok(class_bdds) => Ok(ClassPartition {
            class_bdds,
            region_bdd,
            region_size: region_size(region),
            layout: VariableLayout::for_model(model),
            stats,
        }),
        Err(e) => Err(fail(e, &stats)),
    }
}

/// The inner compilation: region already encoded. Used directly by the
/// maximal-safe-distance search, whose shell regions are set differences
/// rather than plain balls.
pub(crate) fn build_with_region_bdd(
    mgr: &mut BddManager,
    model: &BnnModel,
    region_bdd: BddHandle,
    opts: &BuildOptions<'_>,
    stats: &mut BuildStats,
) -> Result<Vec<BddHandle>, BddError> {
    let layout = VariableLayout::for_model(model);
    if layout.total_vars() > mgr.num_vars() {
        // Reported through the same channel as width errors by `build`.
        return Err(BddError::VarOutOfRange {
            var: layout.total_vars() - 1,
            limit: mgr.num_vars(),
        });
    }
    let now = || opts.clock.map(|c| c()).unwrap_or(0.0);
    let start = now();
    let mut last_mark = start;
    let record = |stats: &mut BuildStats, mgr: &BddManager, mark: &mut f64, t: f64| {
        stats.block_nodes.push(mgr.node_count());
        stats.block_seconds.push(t - *mark);
        *mark = t;
        stats.peak_nodes = stats.peak_nodes.max(mgr.node_count());
        stats.total_seconds = t - start;
    };

    let truth = mgr.true_handle();
    let mut feasible = region_bdd;
    let mut relation = truth;
    for (i, block) in model.internal_blocks().iter().enumerate() {
        let ccs = internal_block_to_ccs(block, &layout, i);
        let out_vars = layout.layer_vars(i + 1);
        let seed = if opts.feasible_propagation || i == 0 { feasible } else { truth };
        let block_rel = block_to_bdd(mgr, &ccs, seed, Some(&out_vars))?;
        if opts.feasible_propagation {
            feasible = mgr.exists(block_rel, &layout.layer_vars(i))?;
        } else {
            feasible = truth;
        }
        relation = if i == 0 {
            block_rel
        } else {
            mgr.rel_product(relation, block_rel, &layout.layer_vars(i))?
        };
        record(stats, mgr, &mut last_mark, now());
    }

    let last_layer = layout.layer_count() - 1;
    let last_vars = layout.layer_vars(last_layer);
    let mut class_bdds = Vec::with_capacity(model.class_count());
    for class in 0..model.class_count() {
        let ccs = output_block_to_ccs(model.output_block(), &layout, class);
        let class_rel = block_to_bdd(mgr, &ccs, feasible, None)?;
        class_bdds.push(mgr.rel_product(class_rel, relation, &last_vars)?);
    }
    record(stats, mgr, &mut last_mark, now());
    Ok(class_bdds)
}
