//! Subcommand implementations.

use std::path::Path;
use std::time::Instant;

use bnnbdd_core::analysis::{
    self, class_distribution, essential_features, max_safe_hamming, pi_explanation,
    AnalysisError, MaxHdReport,
};
use bnnbdd_core::bdd::{BddError, BddManager, Literal, Var};
use bnnbdd_core::builder::{build as build_partition, BuildErrorKind, BuildOptions, ClassPartition};
use bnnbdd_core::encoder::{region_size, Region};
use bnnbdd_core::layout::VariableLayout;
use bnnbdd_core::model::{generate_random, Arch, BnnModel};
use bnnbdd_core::oracle;
use bnnbdd_core::rational::{format_ratio_decimal, parse_ratio, ratio_or_zero};
use bnnbdd_core::{BigRational, BigUint};
use serde_json::{json, Value};

use crate::format::{load_input, load_model, save_model};
use crate::{BudgetArgs, CliError};

/// Region points a selfcheck is willing to enumerate.
const SELFCHECK_POINT_GUARD: u64 = 1 << 20;

// ---- shared plumbing ----

fn parse_region(spec: &str, width: usize) -> Result<Region, CliError> {
    if spec == "full" {
        return Ok(Region::full(width));
    }
    if let Some(rest) = spec.strip_prefix("hamming:") {
        let (file, radius) = rest
            .rsplit_once(':')
            .ok_or_else(|| CliError::Usage(format!("bad region spec {spec:?}")))?;
        let radius: usize = radius
            .parse()
            .map_err(|_| CliError::Usage(format!("bad hamming radius in {spec:?}")))?;
        let center = load_input(Path::new(file), width)?;
        return Region::hamming(center, radius).map_err(|e| CliError::Usage(e.to_string()));
    }
    if let Some(rest) = spec.strip_prefix("fixed:") {
        let (file, indices) = rest
            .rsplit_once(':')
            .ok_or_else(|| CliError::Usage(format!("bad region spec {spec:?}")))?;
        let mut free = Vec::new();
        for part in indices.split(',').filter(|p| !p.trim().is_empty()) {
            let one_based: usize = part
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad index {part:?} in {spec:?}")))?;
            if one_based == 0 {
                return Err(CliError::Usage(format!("indices are 1-based in {spec:?}")));
            }
            free.push(one_based - 1);
        }
        let center = load_input(Path::new(file), width)?;
        return Region::fixed(center, free).map_err(|e| CliError::Usage(e.to_string()));
    }
    Err(CliError::Usage(format!(
        "bad region spec {spec:?} (expected hamming:<file>:<r>, fixed:<file>:<indices>, or full)"
    )))
}

fn manager_for(model: &BnnModel, budget: &BudgetArgs) -> BddManager {
    let layout = VariableLayout::for_model(model);
    let mut mgr = BddManager::new(layout.total_vars());
    mgr.set_node_limit(budget.node_budget);
    if let Some(limit) = budget.time_budget_s {
        let start = Instant::now();
        mgr.set_abort_hook(Some(Box::new(move || start.elapsed().as_secs_f64() > limit)));
    }
    mgr
}

fn budget_error(e: &BddError) -> Option<CliError> {
    match e {
        BddError::NodeBudgetExceeded { limit } => {
            Some(CliError::Budget(format!("node budget of {limit} nodes exceeded")))
        }
        BddError::Aborted => Some(CliError::Budget("time budget exceeded".into())),
        _ => None,
    }
}

fn map_build_error(kind: BuildErrorKind) -> CliError {
    match kind {
        BuildErrorKind::Bdd(ref e) => {
            budget_error(e).unwrap_or_else(|| CliError::Data(kind.to_string()))
        }
        other => CliError::Data(other.to_string()),
    }
}

fn map_analysis_error(e: AnalysisError) -> CliError {
    match e {
        AnalysisError::EmptyClass { class } => {
            CliError::EmptyClass(format!("class {} unreachable in region", class + 1))
        }
        AnalysisError::ClassOutOfRange { class, classes } => CliError::Usage(format!(
            "class {} out of range (model has {classes} classes)",
            class + 1
        )),
        AnalysisError::Bdd(ref b) => {
            budget_error(b).unwrap_or_else(|| CliError::Data(e.to_string()))
        }
        AnalysisError::Build(kind) => map_build_error(kind),
    }
}

/// 1-based class flag to 0-based index.
fn class_index(class: usize, model: &BnnModel) -> Result<usize, CliError> {
    if class == 0 || class > model.class_count() {
        return Err(CliError::Usage(format!(
            "class {class} out of range (model has {} classes, 1-based)",
            model.class_count()
        )));
    }
    Ok(class - 1)
}

fn compile(
    mgr: &mut BddManager,
    model: &BnnModel,
    region: &Region,
) -> Result<(ClassPartition, f64), CliError> {
    let start = Instant::now();
    let clock = move || start.elapsed().as_secs_f64();
    let opts = BuildOptions { feasible_propagation: true, clock: Some(&clock) };
    let part = build_partition(mgr, model, region, &opts).map_err(|e| map_build_error(e.kind))?;
    Ok((part, start.elapsed().as_secs_f64()))
}

fn counts_of(mgr: &BddManager, part: &ClassPartition) -> Vec<BigUint> {
    let inputs = part.layout.input_vars();
    part.class_bdds
        .iter()
        .map(|&g| mgr.sat_count(g, &inputs).expect("support is confined to inputs"))
        .collect()
}

fn count_strings(counts: &[BigUint]) -> Vec<Value> {
    counts.iter().map(|c| Value::String(c.to_string())).collect()
}

fn ratio_fields(r: &BigRational) -> (String, String) {
    (format!("{}/{}", r.numer(), r.denom()), format_ratio_decimal(r))
}

/// Literals rendered as signed 1-based indices: +5 means input bit 5 set,
/// -12 means input bit 12 clear.
fn literal_strings(literals: &[Literal]) -> Vec<Value> {
    literals
        .iter()
        .map(|l| {
            let sign = if l.positive { '+' } else { '-' };
            Value::String(format!("{sign}{}", l.var.0 + 1))
        })
        .collect()
}

fn parse_cube(text: &str, width: usize) -> Result<Vec<Literal>, CliError> {
    let mut literals = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (positive, digits) = match part.strip_prefix('-') {
            Some(d) => (false, d),
            None => (true, part.strip_prefix('+').unwrap_or(part)),
        };
        let one_based: usize = digits
            .parse()
            .map_err(|_| CliError::Usage(format!("bad literal {part:?} in cube")))?;
        if one_based == 0 || one_based > width {
            return Err(CliError::Usage(format!(
                "literal {part:?} out of range (inputs are 1..={width})"
            )));
        }
        literals.push(Literal { var: Var((one_based - 1) as u32), positive });
    }
    Ok(literals)
}

fn emit(doc: &Value) {
    println!("{doc}");
}

// ---- subcommands ----

pub fn build(
    model_path: &Path,
    region_spec: &str,
    budget: &BudgetArgs,
    pretty: bool,
    dot: Option<&Path>,
) -> Result<(), CliError> {
    let model = load_model(model_path)?;
    let region = parse_region(region_spec, model.input_width())?;
    let mut mgr = manager_for(&model, budget);
    let (part, time_s) = compile(&mut mgr, &model, &region)?;
    let counts = counts_of(&mgr, &part);
    if let Some(prefix) = dot {
        for (k, &g) in part.class_bdds.iter().enumerate() {
            let path = prefix.with_extension(format!("class{}.dot", k + 1));
            std::fs::write(&path, mgr.to_dot(g))
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        }
    }
    let doc = json!({
        "arch": model.arch().to_string(),
        "region": region_spec,
        "region_size": part.region_size.to_string(),
        "counts": count_strings(&counts),
        "time_s": time_s,
        "nodes": mgr.node_count(),
        "peak_nodes": part.stats.peak_nodes,
        "block_nodes": part.stats.block_nodes,
        "block_time_s": part.stats.block_seconds,
    });
    if pretty {
        println!("arch {}  region {}", model.arch(), region_spec);
        println!("region size: {}", part.region_size);
        println!("class  count");
        for (i, c) in counts.iter().enumerate() {
            println!("{:>5}  {}", i + 1, c);
        }
        println!("built in {time_s:.3}s, {} nodes", mgr.node_count());
    } else {
        emit(&doc);
    }
    Ok(())
}

pub fn robust(
    model_path: &Path,
    region_spec: &str,
    class: usize,
    budget: &BudgetArgs,
    pretty: bool,
) -> Result<(), CliError> {
    let model = load_model(model_path)?;
    let g = class_index(class, &model)?;
    let region = parse_region(region_spec, model.input_width())?;
    let mut mgr = manager_for(&model, budget);
    let (part, time_s) = compile(&mut mgr, &model, &region)?;
    let report = class_distribution(&mgr, &part, g).map_err(map_analysis_error)?;
    let (pr, pr_decimal) = ratio_fields(&report.adversarial_ratio);
    let doc = json!({
        "class": class,
        "class_counts": count_strings(&report.class_counts),
        "region_size": report.region_size.to_string(),
        "adv": report.adversarial.to_string(),
        "pr": pr,
        "pr_decimal": pr_decimal,
        "robust": report.robust,
        "time_s": time_s,
    });
    if pretty {
        println!("ground-truth class {class}, region {region_spec}");
        println!("class  count");
        for (i, c) in report.class_counts.iter().enumerate() {
            let mark = if i == g { " *" } else { "" };
            println!("{:>5}  {}{mark}", i + 1, c);
        }
        println!("adversarial: {}  Pr: {pr} ({pr_decimal})", report.adversarial);
        println!("robust: {}", report.robust);
    } else {
        emit(&doc);
    }
    Ok(())
}

pub fn target(
    model_path: &Path,
    region_spec: &str,
    class: usize,
    budget: &BudgetArgs,
    pretty: bool,
) -> Result<(), CliError> {
    let model = load_model(model_path)?;
    let t = class_index(class, &model)?;
    let region = parse_region(region_spec, model.input_width())?;
    let mut mgr = manager_for(&model, budget);
    let (part, time_s) = compile(&mut mgr, &model, &region)?;
    let count =
        analysis::targeted_count(&mgr, &part, t).map_err(map_analysis_error)?;
    let ratio = ratio_or_zero(&count, &part.region_size);
    let (pr, pr_decimal) = ratio_fields(&ratio);
    let doc = json!({
        "class": class,
        "count": count.to_string(),
        "target_robust": count == BigUint::from(0u8),
        "region_size": part.region_size.to_string(),
        "pr": pr,
        "pr_decimal": pr_decimal,
        "time_s": time_s,
    });
    if pretty {
        println!("target class {class}, region {region_spec}");
        println!("count: {count}  Pr: {pr} ({pr_decimal})");
        println!("target-robust: {}", count == BigUint::from(0u8));
    } else {
        emit(&doc);
    }
    Ok(())
}

fn maxhd_doc(report: &MaxHdReport, time_s: f64) -> Value {
    let trace: Vec<Value> = report
        .trace
        .iter()
        .map(|s| {
            let (pr, pr_decimal) = ratio_fields(&s.ratio);
            json!({
                "r": s.radius,
                "adv": s.adversarial.to_string(),
                "region_size": s.region_size.to_string(),
                "pr": pr,
                "pr_decimal": pr_decimal,
            })
        })
        .collect();
    json!({
        "sd": report.safe_distance,
        "complete": report.complete,
        "trace": trace,
        "time_s": time_s,
    })
}

pub fn maxhd(
    model_path: &Path,
    input_path: &Path,
    r0: usize,
    epsilon: &str,
    class: usize,
    budget: &BudgetArgs,
    pretty: bool,
) -> Result<(), CliError> {
    let model = load_model(model_path)?;
    let g = class_index(class, &model)?;
    let eps = parse_ratio(epsilon).map_err(CliError::Usage)?;
    if eps < BigRational::from_integer(0.into()) {
        return Err(CliError::Usage("epsilon must be nonnegative".into()));
    }
    if r0 > model.input_width() {
        return Err(CliError::Usage(format!(
            "start radius {r0} exceeds input width {}",
            model.input_width()
        )));
    }
    let u = load_input(input_path, model.input_width())?;
    let mut mgr = manager_for(&model, budget);
    let start = Instant::now();
    let clock = move || start.elapsed().as_secs_f64();
    let opts = BuildOptions { feasible_propagation: true, clock: Some(&clock) };
    let report = max_safe_hamming(&mut mgr, &model, &u, r0, &eps, g, &opts)
        .map_err(map_analysis_error)?;
    let time_s = start.elapsed().as_secs_f64();
    if pretty {
        println!("maximal safe Hamming distance: {}", report.safe_distance);
        println!("    r  adversarial  Pr");
        for s in &report.trace {
            let (pr, pr_decimal) = ratio_fields(&s.ratio);
            println!("{:>5}  {:>11}  {pr} ({pr_decimal})", s.radius, s.adversarial);
        }
        if !report.complete {
            println!("warning: budget exceeded; distance is the best certified bound");
        }
    } else {
        emit(&maxhd_doc(&report, time_s));
    }
    if !report.complete {
        return Err(CliError::Budget(
            "budget exceeded during radius search; reported best certified bound".into(),
        ));
    }
    Ok(())
}

pub fn explain(
    model_path: &Path,
    region_spec: &str,
    class: usize,
    kind: &str,
    budget: &BudgetArgs,
    pretty: bool,
) -> Result<(), CliError> {
    let model = load_model(model_path)?;
    let t = class_index(class, &model)?;
    let region = parse_region(region_spec, model.input_width())?;
    let mut mgr = manager_for(&model, budget);
    let (part, time_s) = compile(&mut mgr, &model, &region)?;
    let explanation = match kind {
        "pi" => pi_explanation(&mut mgr, &part, t),
        "ef" => essential_features(&mut mgr, &part, t),
        _ => return Err(CliError::Usage(format!("bad kind {kind:?} (expected pi or ef)"))),
    }
    .map_err(map_analysis_error)?;
    let doc = json!({
        "kind": kind,
        "class": class,
        "literals": literal_strings(&explanation.literals),
        "literal_count": explanation.literals.len(),
        "time_s": time_s,
    });
    if pretty {
        let rendered: Vec<String> = literal_strings(&explanation.literals)
            .into_iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect();
        println!("{kind} explanation for class {class}: {}", rendered.join(" "));
    } else {
        emit(&doc);
    }
    Ok(())
}

pub fn gen(arch_text: &str, seed: u64, out: &Path) -> Result<(), CliError> {
    let arch = Arch::parse(arch_text).map_err(|e| CliError::Usage(e.to_string()))?;
    let model = generate_random(&arch, seed);
    save_model(&model, out)?;
    emit(&json!({
        "written": out.display().to_string(),
        "arch": arch.to_string(),
        "seed": seed,
    }));
    Ok(())
}

pub fn selfcheck(
    arch: Option<&str>,
    seed: u64,
    model_path: Option<&Path>,
    region_spec: &str,
    verify_cube: Option<&str>,
    class: Option<usize>,
    budget: &BudgetArgs,
) -> Result<(), CliError> {
    let model = match (arch, model_path) {
        (Some(a), None) => {
            let arch = Arch::parse(a).map_err(|e| CliError::Usage(e.to_string()))?;
            generate_random(&arch, seed)
        }
        (None, Some(p)) => load_model(p)?,
        _ => return Err(CliError::Usage("need exactly one of --arch or --model".into())),
    };
    let region = parse_region(region_spec, model.input_width())?;

    // Guard before any work: enumeration must stay feasible.
    let points = region_size(&region);
    if points > BigUint::from(SELFCHECK_POINT_GUARD) {
        return Err(CliError::Budget(format!(
            "region holds {points} points, selfcheck enumerates at most {SELFCHECK_POINT_GUARD}"
        )));
    }

    let mut mgr = manager_for(&model, budget);
    let (part, time_s) = compile(&mut mgr, &model, &region)?;

    if let Some(cube_text) = verify_cube {
        let class = class.ok_or_else(|| CliError::Usage("--verify-cube needs --class".into()))?;
        let t = class_index(class, &model)?;
        return verify_cube_against(&mut mgr, &part, cube_text, t, &model);
    }

    // Enumerate the region and compare the BDD classification (membership
    // in exactly one class BDD) against direct evaluation.
    let inputs = part.layout.input_vars();
    let mut dense = vec![false; mgr.num_vars() as usize];
    let mut checked = 0u64;
    for point in oracle::enumerate_region(&region) {
        dense[..point.len()].copy_from_slice(&point);
        let expected = oracle::eval_bits(&model, &point);
        let mut found = None;
        for (c, &g) in part.class_bdds.iter().enumerate() {
            if mgr.eval(g, &dense) {
                if let Some(first) = found {
                    return fail_doc(&point, expected, Some([first, c]));
                }
                found = Some(c);
            }
        }
        match found {
            Some(c) if c == expected => {}
            got => return fail_doc(&point, expected, got.map(|c| [c, c])),
        }
        checked += 1;
    }
    // Counts must agree with the number of enumerated points as well.
    let total: BigUint = part
        .class_bdds
        .iter()
        .map(|&g| mgr.sat_count(g, &inputs).expect("support confined"))
        .sum();
    if total != BigUint::from(checked) {
        return Err(CliError::CheckFailed(format!(
            "count mismatch: BDDs count {total}, enumeration saw {checked}"
        )));
    }
    emit(&json!({
        "status": "PASS",
        "points": checked,
        "arch": model.arch().to_string(),
        "time_s": time_s,
    }));
    Ok(())
}

fn fail_doc(point: &[bool], expected: usize, got: Option<[usize; 2]>) -> Result<(), CliError> {
    let rendered: String = point.iter().map(|&b| if b { '1' } else { '0' }).collect();
    let got_text = match got {
        None => "none".to_string(),
        Some([a, b]) if a == b => format!("{}", a + 1),
        Some([a, b]) => format!("both {} and {}", a + 1, b + 1),
    };
    emit(&json!({
        "status": "FAIL",
        "input": rendered,
        "expected": expected + 1,
        "got": got_text,
    }));
    Err(CliError::CheckFailed(format!(
        "divergence at {rendered}: direct evaluation gives {}, BDDs give {got_text}",
        expected + 1
    )))
}

fn verify_cube_against(
    mgr: &mut BddManager,
    part: &ClassPartition,
    cube_text: &str,
    target: usize,
    model: &BnnModel,
) -> Result<(), CliError> {
    let literals = parse_cube(cube_text, model.input_width())?;
    let class_bdd = part.class_bdds[target];
    let not_class = mgr.not(class_bdd).expect("same manager");
    let implies = |mgr: &mut BddManager, lits: &[Literal]| -> bool {
        let cube = mgr.mk_cube(lits).expect("literals validated");
        let inside = mgr.and(part.region_bdd, cube).expect("same manager");
        let escape = mgr.and(inside, not_class).expect("same manager");
        mgr.is_false(escape)
    };
    let sufficient = implies(mgr, &literals);
    let mut minimal = true;
    if sufficient {
        for drop in 0..literals.len() {
            let mut smaller = literals.clone();
            smaller.remove(drop);
            if implies(mgr, &smaller) {
                minimal = false;
                break;
            }
        }
    }
    let ok = sufficient && minimal;
    emit(&json!({
        "status": if ok { "PASS" } else { "FAIL" },
        "sufficient": sufficient,
        "minimal": minimal,
    }));
    if ok {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!(
            "cube check failed (sufficient: {sufficient}, minimal: {minimal})"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn sample_file(dir: &tempfile::TempDir, text: &str) -> std::path::PathBuf {
        let path = dir.path().join("u.txt");
        let mut f = std::fs::File::create(&path).unwrap();
        write!(f, "{text}").unwrap();
        path
    }

    #[test]
    fn region_grammar() {
        let dir = tempfile::tempdir().unwrap();
        let path = sample_file(&dir, "0101");
        let spec = format!("hamming:{}:2", path.display());
        match parse_region(&spec, 4).unwrap() {
            Region::HammingBall { radius, .. } => assert_eq!(radius, 2),
            other => panic!("{other:?}"),
        }
        let spec = format!("fixed:{}:1,2,3", path.display());
        match parse_region(&spec, 4).unwrap() {
            Region::FixedIndices { free, .. } => assert_eq!(free, vec![0, 1, 2]),
            other => panic!("{other:?}"),
        }
        // Empty index list means no free bits.
        let spec = format!("fixed:{}:", path.display());
        match parse_region(&spec, 4).unwrap() {
            Region::FixedIndices { free, .. } => assert!(free.is_empty()),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_region("full", 4).unwrap(), Region::HammingBall { radius: 4, .. }));
        assert!(matches!(parse_region("circle:x:1", 4), Err(CliError::Usage(_))));
        let spec = format!("fixed:{}:0", path.display());
        assert!(matches!(parse_region(&spec, 4), Err(CliError::Usage(_))));
    }

    #[test]
    fn cube_grammar() {
        let lits = parse_cube("+1,-3, 4", 5).unwrap();
        assert_eq!(
            lits,
            vec![
                Literal { var: Var(0), positive: true },
                Literal { var: Var(2), positive: false },
                Literal { var: Var(3), positive: true },
            ]
        );
        assert!(parse_cube("0", 5).is_err());
        assert!(parse_cube("6", 5).is_err());
        assert!(parse_cube("x", 5).is_err());
        assert!(parse_cube("", 5).unwrap().is_empty());
    }
}
