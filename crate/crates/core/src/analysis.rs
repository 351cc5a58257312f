//! Queries over a class partition: exact counting, robustness, targeted
//! robustness, maximal safe Hamming distance, and explanations.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use crate::bdd::{BddError, BddManager, Literal};
use crate::builder::{self, BuildErrorKind, BuildOptions, BuildStats, ClassPartition};
use crate::encoder::{region_size, region_to_bdd, Region};
use crate::model::{BnnModel, InputSample};
use crate::rational::ratio_or_zero;

#[derive(Clone, Debug)]
pub enum AnalysisError {
    ClassOutOfRange { class: usize, classes: usize },
    /// The queried class has no points in the region, so an explanation
    /// would be vacuous.
    EmptyClass { class: usize },
    Bdd(BddError),
    Build(BuildErrorKind),
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::ClassOutOfRange { class, classes } => {
                write!(f, "class {class} out of range (model has {classes} classes)")
            }
            AnalysisError::EmptyClass { class } => {
                write!(f, "class {class} unreachable in region")
            }
            AnalysisError::Bdd(e) => write!(f, "{e}"),
            AnalysisError::Build(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for AnalysisError {}

impl From<BddError> for AnalysisError {
    fn from(e: BddError) -> Self {
        AnalysisError::Bdd(e)
    }
}

/// Exact per-class accounting of a region against a ground-truth class.
#[derive(Clone, Debug)]
pub struct RobustnessReport {
    pub ground_truth: usize,
    pub class_counts: Vec<BigUint>,
    pub region_size: BigUint,
    /// `|region| - |class g|`: how many region points are misclassified.
    pub adversarial: BigUint,
    /// Adversarial proportion as an exact fraction in [0, 1].
    pub adversarial_ratio: BigRational,
    pub robust: bool,
}

fn check_class(class: usize, classes: usize) -> Result<(), AnalysisError> {
    if class < classes {
        Ok(())
    } else {
        Err(AnalysisError::ClassOutOfRange { class, classes })
    }
}

fn count_classes(
    mgr: &BddManager,
    part: &ClassPartition,
) -> Result<Vec<BigUint>, AnalysisError> {
    let inputs = part.layout.input_vars();
    part.class_bdds
        .iter()
        .map(|&g| mgr.sat_count(g, &inputs).map_err(AnalysisError::from))
        .collect()
}

/// How the region splits across predicted classes, and how much of it
/// escapes the ground truth.
pub fn class_distribution(
    mgr: &BddManager,
    part: &ClassPartition,
    ground_truth: usize,
) -> Result<RobustnessReport, AnalysisError> {
    check_class(ground_truth, part.class_bdds.len())?;
    let class_counts = count_classes(mgr, part)?;
    Ok(report_from_counts(class_counts, part.region_size.clone(), ground_truth))
}

fn report_from_counts(
    class_counts: Vec<BigUint>,
    region_size: BigUint,
    ground_truth: usize,
) -> RobustnessReport {
    let adversarial = region_size.clone() - class_counts[ground_truth].clone();
    let misclassified: BigUint = class_counts
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != ground_truth)
        .map(|(_, c)| c.clone())
        .sum();
    let adversarial_ratio = ratio_or_zero(&misclassified, &region_size);
    RobustnessReport {
        ground_truth,
        robust: adversarial.is_zero(),
        class_counts,
        region_size,
        adversarial,
        adversarial_ratio,
    }
}

/// Number of region points the network sends to the target class; the
/// region is `t`-target-robust exactly when this is zero.
pub fn targeted_count(
    mgr: &BddManager,
    part: &ClassPartition,
    target: usize,
) -> Result<BigUint, AnalysisError> {
    check_class(target, part.class_bdds.len())?;
    let inputs = part.layout.input_vars();
    mgr.sat_count(part.class_bdds[target], &inputs).map_err(AnalysisError::from)
}

/// One radius probed by the maximal-safe-distance search.
#[derive(Clone, Debug)]
pub struct RadiusStep {
    pub radius: i64,
    pub adversarial: BigUint,
    pub region_size: BigUint,
    pub ratio: BigRational,
}

/// Outcome of the maximal-safe-distance search. `safe_distance` is -1 when
/// even the center alone violates the threshold (a misclassified input).
/// When a resource budget dies mid-search, `complete` is false and
/// `safe_distance` is the best radius certified before the failure.
#[derive(Clone, Debug)]
pub struct MaxHdReport {
    pub safe_distance: i64,
    pub complete: bool,
    pub trace: Vec<RadiusStep>,
    pub stats: BuildStats,
}

/// Largest Hamming radius (under the locally-maximal semantics reachable
/// from `start_radius`) whose adversarial proportion stays within `epsilon`.
///
/// Incremental in both directions: shrinking conjoins the smaller ball onto
/// the existing class BDDs, growing builds only the new shell
/// `R(u,r) \ R(u,r-1)` and ORs it in. Proportions are exact rationals; the
/// empty region below radius 0 has proportion 0 by convention, which is what
/// makes the -1 answer fall out of the shrink loop.
pub fn max_safe_hamming(
    mgr: &mut BddManager,
    model: &BnnModel,
    center: &InputSample,
    start_radius: usize,
    epsilon: &BigRational,
    ground_truth: usize,
    opts: &BuildOptions<'_>,
) -> Result<MaxHdReport, AnalysisError> {
    check_class(ground_truth, model.class_count())?;
    let n1 = model.input_width();
    let start_radius = start_radius.min(n1);
    let region = Region::hamming(center.clone(), start_radius).expect("radius clamped to width");

    let mut stats = BuildStats::default();
    let mut trace = Vec::new();
    let partial = |trace: &Vec<RadiusStep>, stats: &BuildStats, best: Option<i64>| MaxHdReport {
        safe_distance: best.unwrap_or(-1),
        complete: false,
        trace: trace.clone(),
        stats: stats.clone(),
    };

    let region_bdd = match region_to_bdd(mgr, &region) {
        Ok(b) => b,
        Err(_) => return Ok(partial(&trace, &stats, None)),
    };
    let mut class_bdds =
        match builder::build_with_region_bdd(mgr, model, region_bdd, opts, &mut stats) {
            Ok(b) => b,
            Err(BddError::NodeBudgetExceeded { .. }) | Err(BddError::Aborted) => {
                return Ok(partial(&trace, &stats, None))
            }
            Err(e) => return Err(e.into()),
        };

    let inputs = crate::layout::VariableLayout::for_model(model).input_vars();
    let step = |mgr: &BddManager, class_bdds: &[crate::bdd::BddHandle], r: i64| -> Result<RadiusStep, BddError> {
        let mut misclassified = BigUint::zero();
        for (i, &g) in class_bdds.iter().enumerate() {
            if i != ground_truth {
                misclassified += mgr.sat_count(g, &inputs)?;
            }
        }
        let size = if r < 0 {
            BigUint::zero()
        } else {
            region_size(&Region::hamming(center.clone(), r as usize).expect("radius in range"))
        };
        let ratio = ratio_or_zero(&misclassified, &size);
        Ok(RadiusStep { radius: r, adversarial: misclassified, region_size: size, ratio })
    };

    let first = step(mgr, &class_bdds, start_radius as i64)?;
    let start_violates = first.ratio > *epsilon;
    trace.push(first);

    if start_violates {
        // Shrink until the proportion drops within the threshold; radius -1
        // is the empty region with proportion 0, so the loop always answers.
        let mut r = start_radius as i64;
        while r >= 0 {
            r -= 1;
            let ball = if r < 0 {
                mgr.false_handle()
            } else {
                let smaller = Region::hamming(center.clone(), r as usize).expect("radius in range");
                match region_to_bdd(mgr, &smaller) {
                    Ok(b) => b,
                    Err(BddError::NodeBudgetExceeded { .. }) | Err(BddError::Aborted) => {
                        return Ok(partial(&trace, &stats, None))
                    }
                    Err(e) => return Err(e.into()),
                }
            };
            for g in class_bdds.iter_mut() {
                match mgr.and(ball, *g) {
                    Ok(smaller) => *g = smaller,
                    Err(BddError::NodeBudgetExceeded { .. }) | Err(BddError::Aborted) => {
                        return Ok(partial(&trace, &stats, None))
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            let probe = step(mgr, &class_bdds, r)?;
            let ok = probe.ratio <= *epsilon;
            trace.push(probe);
            if ok {
                return Ok(MaxHdReport { safe_distance: r, complete: true, trace, stats });
            }
        }
        // Unreachable: r = -1 always satisfies (empty region).
        Ok(MaxHdReport { safe_distance: -1, complete: true, trace, stats })
    } else {
        // Grow shell by shell until the threshold breaks or the whole space
        // is certified.
        let mut best = start_radius as i64;
        let mut r = start_radius;
        while r < n1 {
            r += 1;
            let shell = match shell_bdd(mgr, center, r) {
                Ok(b) => b,
                Err(BddError::NodeBudgetExceeded { .. }) | Err(BddError::Aborted) => {
                    return Ok(partial(&trace, &stats, Some(best)))
                }
                Err(e) => return Err(e.into()),
            };
            let shell_classes =
                match builder::build_with_region_bdd(mgr, model, shell, opts, &mut stats) {
                    Ok(b) => b,
                    Err(BddError::NodeBudgetExceeded { .. }) | Err(BddError::Aborted) => {
                        return Ok(partial(&trace, &stats, Some(best)))
                    }
                    Err(e) => return Err(e.into()),
                };
            for (g, shell_g) in class_bdds.iter_mut().zip(shell_classes) {
                match mgr.or(*g, shell_g) {
                    Ok(grown) => *g = grown,
                    Err(BddError::NodeBudgetExceeded { .. }) | Err(BddError::Aborted) => {
                        return Ok(partial(&trace, &stats, Some(best)))
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            let probe = step(mgr, &class_bdds, r as i64)?;
            let violated = probe.ratio > *epsilon;
            trace.push(probe);
            if violated {
                return Ok(MaxHdReport { safe_distance: r as i64 - 1, complete: true, trace, stats });
            }
            best = r as i64;
        }
        Ok(MaxHdReport { safe_distance: n1 as i64, complete: true, trace, stats })
    }
}

/// `R(u,r) \ R(u,r-1)`: the sphere at exactly distance `r`, as the
/// conjunction of the outer ball with the complement of the inner one.
pub fn shell_bdd(
    mgr: &mut BddManager,
    center: &InputSample,
    radius: usize,
) -> Result<crate::bdd::BddHandle, BddError> {
    let outer_region = Region::hamming(center.clone(), radius).expect("radius in range");
    let outer = region_to_bdd(mgr, &outer_region)?;
    if radius == 0 {
        return Ok(outer);
    }
    let inner_region = Region::hamming(center.clone(), radius - 1).expect("radius in range");
    let inner = region_to_bdd(mgr, &inner_region)?;
    let not_inner = mgr.not(inner)?;
    mgr.and(outer, not_inner)
}

/// What an explanation talks about.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum ExplanationKind {
    /// Sufficient: region points satisfying the cube land in the class.
    PrimeImplicant,
    /// Necessary: every region point of the class satisfies the literals.
    EssentialFeatures,
}

#[derive(Clone, Debug)]
pub struct Explanation {
    pub kind: ExplanationKind,
    pub class: usize,
    pub literals: Vec<Literal>,
}

/// A minimal cube of input literals that, within the region, forces
/// classification into the target class.
///
/// Computed as a prime implicant of `region → class BDD`, seeded from the
/// lexicographically smallest point of the class (so results are
/// deterministic). Sufficiency and per-literal minimality both follow from
/// the prime-implicant contract.
pub fn pi_explanation(
    mgr: &mut BddManager,
    part: &ClassPartition,
    target: usize,
) -> Result<Explanation, AnalysisError> {
    check_class(target, part.class_bdds.len())?;
    let class_bdd = part.class_bdds[target];
    let inputs = part.layout.input_vars();
    let seed = mgr
        .lex_min_assignment(class_bdd, &inputs)?
        .ok_or(AnalysisError::EmptyClass { class: target })?;
    let not_region = mgr.not(part.region_bdd)?;
    let implication = mgr.or(not_region, class_bdd)?;
    let literals = mgr.prime_implicant(implication, &seed)?;
    Ok(Explanation { kind: ExplanationKind::PrimeImplicant, class: target, literals })
}

/// All input literals every point of the class agrees on.
pub fn essential_features(
    mgr: &mut BddManager,
    part: &ClassPartition,
    target: usize,
) -> Result<Explanation, AnalysisError> {
    check_class(target, part.class_bdds.len())?;
    let class_bdd = part.class_bdds[target];
    if mgr.is_false(class_bdd) {
        return Err(AnalysisError::EmptyClass { class: target });
    }
    let literals = mgr.essential_literals(class_bdd)?;
    Ok(Explanation { kind: ExplanationKind::EssentialFeatures, class: target, literals })
}

impl From<BuildErrorKind> for AnalysisError {
    fn from(e: BuildErrorKind) -> Self {
        match e {
            BuildErrorKind::Bdd(b) => AnalysisError::Bdd(b),
            other => AnalysisError::Build(other),
        }
    }
}

impl From<crate::builder::BuildFailure> for AnalysisError {
    fn from(e: crate::builder::BuildFailure) -> Self {
        e.kind.into()
    }
}
