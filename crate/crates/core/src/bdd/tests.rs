use alloc::boxed::Box;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn vars(mgr: &mut BddManager, n: u32) -> Vec<BddHandle> {
    (0..n).map(|i| mgr.mk_var(Var(i)).unwrap()).collect()
}

fn asg(bits: &[u8]) -> Vec<bool> {
    bits.iter().map(|&b| b != 0).collect()
}

// Small expression trees for randomized semantic checks.
#[derive(Clone, Debug)]
enum Expr {
    Var(u32),
    Not(Box<Expr>),
    Bin(BoolOp, Box<Expr>, Box<Expr>),
}

fn random_expr(rng: &mut ChaCha8Rng, depth: u32, nvars: u32) -> Expr {
    if depth == 0 || rng.gen_range(0..4) == 0 {
        return Expr::Var(rng.gen_range(0..nvars));
    }
    match rng.gen_range(0..5) {
        0 => Expr::Not(Box::new(random_expr(rng, depth - 1, nvars))),
        k => {
            let op = match k {
                1 => BoolOp::And,
                2 => BoolOp::Or,
                3 => BoolOp::Xor,
                _ => BoolOp::Xnor,
            };
            Expr::Bin(
                op,
                Box::new(random_expr(rng, depth - 1, nvars)),
                Box::new(random_expr(rng, depth - 1, nvars)),
            )
        }
    }
}

fn eval_expr(e: &Expr, assignment: &[bool]) -> bool {
    match e {
        Expr::Var(i) => assignment[*i as usize],
        Expr::Not(a) => !eval_expr(a, assignment),
        Expr::Bin(op, a, b) => {
            let (a, b) = (eval_expr(a, assignment), eval_expr(b, assignment));
            match op {
                BoolOp::And => a && b,
                BoolOp::Or => a || b,
                BoolOp::Xor => a ^ b,
                BoolOp::Xnor => a == b,
            }
        }
    }
}

fn build_expr(mgr: &mut BddManager, e: &Expr) -> BddHandle {
    match e {
        Expr::Var(i) => mgr.mk_var(Var(*i)).unwrap(),
        Expr::Not(a) => {
            let a = build_expr(mgr, a);
            mgr.not(a).unwrap()
        }
        Expr::Bin(op, a, b) => {
            let a = build_expr(mgr, a);
            let b = build_expr(mgr, b);
            mgr.apply(a, b, *op).unwrap()
        }
    }
}

fn all_assignments(n: u32) -> impl Iterator<Item = Vec<bool>> {
    (0u32..(1 << n)).map(move |m| (0..n).map(|i| (m >> i) & 1 == 1).collect())
}

#[test]
fn var_nodes() {
    let mut mgr = BddManager::new(4);
    let x0 = mgr.mk_var(Var(0)).unwrap();
    assert!(mgr.eval(x0, &asg(&[1, 0, 0, 0])));
    assert!(!mgr.eval(x0, &asg(&[0, 0, 0, 0])));
    assert_eq!(x0, mgr.mk_var(Var(0)).unwrap());
    let x3 = mgr.mk_var(Var(3)).unwrap();
    let nx3 = mgr.not(x3).unwrap();
    assert!(mgr.eval(nx3, &asg(&[0, 0, 0, 0])));
    assert!(matches!(mgr.mk_var(Var(4)), Err(BddError::VarOutOfRange { var: 4, limit: 4 })));
}

#[test]
fn constants() {
    let mut mgr = BddManager::new(5);
    assert!(mgr.is_true(mgr.mk_const(true)));
    assert!(mgr.is_false(mgr.mk_const(false)));
    let x2 = mgr.mk_var(Var(2)).unwrap();
    let f = mgr.mk_const(false);
    assert_eq!(mgr.and(x2, f).unwrap(), mgr.false_handle());
    let t = mgr.true_handle();
    let u: Vec<Var> = (0..5).map(Var).collect();
    assert_eq!(mgr.sat_count(t, &u).unwrap(), BigUint::from(32u32));
}

#[test]
fn apply_basics() {
    let mut mgr = BddManager::new(4);
    let v = vars(&mut mgr, 4);
    assert_eq!(mgr.xnor(v[0], v[0]).unwrap(), mgr.true_handle());
    let conj = mgr.and(v[0], v[1]).unwrap();
    assert_eq!(mgr.size(conj), 2);
    let n0 = mgr.not(v[0]).unwrap();
    assert_eq!(mgr.or(v[0], n0).unwrap(), mgr.true_handle());
}

#[test]
fn ite_basics() {
    let mut mgr = BddManager::new(4);
    let t = mgr.true_handle();
    let f = mgr.false_handle();
    let x0 = mgr.mk_var(Var(0)).unwrap();
    assert_eq!(mgr.ite_var(Var(0), t, f).unwrap(), x0);

    let x1 = mgr.mk_var(Var(1)).unwrap();
    let x2 = mgr.mk_var(Var(2)).unwrap();
    let g = mgr.and(x1, x2).unwrap();
    assert_eq!(mgr.ite_var(Var(0), g, g).unwrap(), g);

    let x1 = mgr.mk_var(Var(1)).unwrap();
    let x2 = mgr.mk_var(Var(2)).unwrap();
    let ite = mgr.ite(x0, x1, x2).unwrap();
    for a in all_assignments(3) {
        let expected = if a[0] { a[1] } else { a[2] };
        assert_eq!(mgr.eval(ite, &[a[0], a[1], a[2], false]), expected);
    }

    // Fast path must reject a test variable that does not precede the branches.
    assert!(matches!(mgr.ite_var(Var(2), x1, f), Err(BddError::OrderingViolation { .. })));
    assert!(matches!(mgr.ite_var(Var(1), x1, f), Err(BddError::OrderingViolation { .. })));
}

#[test]
fn exists_basics() {
    let mut mgr = BddManager::new(4);
    let v = vars(&mut mgr, 4);
    let conj = mgr.and(v[0], v[1]).unwrap();
    assert_eq!(mgr.exists(conj, &[Var(0)]).unwrap(), v[1]);
    assert_eq!(mgr.exists(conj, &[]).unwrap(), conj);
    let x = mgr.xor(v[0], v[1]).unwrap();
    assert_eq!(mgr.exists(x, &[Var(1)]).unwrap(), mgr.true_handle());
}

#[test]
fn rel_product_basics() {
    let mut mgr = BddManager::new(3);
    let v = vars(&mut mgr, 3);
    // Step relations x1 = x0 and x2 = !x1; composing and eliminating x1
    // must leave the relation x2 = !x0.
    let step1 = mgr.xnor(v[0], v[1]).unwrap();
    let step2 = mgr.xor(v[1], v[2]).unwrap();
    let composed = mgr.rel_product(step1, step2, &[Var(1)]).unwrap();
    for a in all_assignments(3) {
        let expected = a[2] == !a[0];
        assert_eq!(mgr.eval(composed, &a), expected, "assignment {a:?}");
    }

    let t = mgr.true_handle();
    assert_eq!(mgr.rel_product(step1, t, &[]).unwrap(), step1);
    let anded = mgr.and(step1, step2).unwrap();
    assert_eq!(mgr.rel_product(step1, step2, &[]).unwrap(), anded);
}

#[test]
fn sat_count_basics() {
    let mut mgr = BddManager::new(784);
    let universe: Vec<Var> = (0..784).map(Var).collect();
    let t = mgr.true_handle();
    assert_eq!(mgr.sat_count(t, &universe).unwrap(), BigUint::from(1u8) << 784);
    assert!(mgr.sat_count(mgr.false_handle(), &universe).unwrap().is_zero());

    // At least two of three variables set.
    let v = vars(&mut mgr, 3);
    let p01 = mgr.and(v[0], v[1]).unwrap();
    let p02 = mgr.and(v[0], v[2]).unwrap();
    let p12 = mgr.and(v[1], v[2]).unwrap();
    let f = mgr.or(p01, p02).unwrap();
    let f = mgr.or(f, p12).unwrap();
    let small: Vec<Var> = (0..3).map(Var).collect();
    assert_eq!(mgr.sat_count(f, &small).unwrap(), BigUint::from(4u8));

    // Support escaping the universe is an error.
    assert!(matches!(
        mgr.sat_count(f, &[Var(0), Var(1)]),
        Err(BddError::SupportOutsideUniverse { var: 2 })
    ));
}

#[test]
fn sat_all_basics() {
    let mut mgr = BddManager::new(3);
    let v = vars(&mut mgr, 3);
    let n1 = mgr.not(v[1]).unwrap();
    let f = mgr.and(v[0], n1).unwrap();
    let sols: Vec<Vec<bool>> = mgr.sat_all(f, &[Var(0), Var(1)]).unwrap().collect();
    assert_eq!(sols, alloc::vec![asg(&[1, 0])]);

    let p01 = mgr.and(v[0], v[1]).unwrap();
    let p02 = mgr.and(v[0], v[2]).unwrap();
    let p12 = mgr.and(v[1], v[2]).unwrap();
    let g = mgr.or(p01, p02).unwrap();
    let g = mgr.or(g, p12).unwrap();
    let u: Vec<Var> = (0..3).map(Var).collect();
    let mut sols: Vec<Vec<bool>> = mgr.sat_all(g, &u).unwrap().collect();
    sols.sort();
    let mut expected = alloc::vec![asg(&[1, 1, 0]), asg(&[1, 0, 1]), asg(&[0, 1, 1]), asg(&[1, 1, 1])];
    expected.sort();
    assert_eq!(sols, expected);

    assert_eq!(mgr.sat_all(mgr.false_handle(), &u).unwrap().count(), 0);
}

#[test]
fn sat_all_skipped_variables_and_laziness() {
    let mut mgr = BddManager::new(20);
    let f = mgr.mk_var(Var(0)).unwrap();
    let u: Vec<Var> = (0..20).map(Var).collect();
    // 2^19 solutions; only pull a few to confirm the stream is lazy.
    let mut it = mgr.sat_all(f, &u).unwrap();
    let first = it.next().unwrap();
    assert!(first[0] && first[1..].iter().all(|&b| !b));
    assert_eq!(it.take(100).count(), 100);

    let count = mgr.sat_count(f, &u).unwrap();
    assert_eq!(count, BigUint::from(1u32) << 19);
}

#[test]
fn essential_literal_basics() {
    let mut mgr = BddManager::new(3);
    let v = vars(&mut mgr, 3);
    let conj = mgr.and(v[0], v[1]).unwrap();
    assert_eq!(
        mgr.essential_literals(conj).unwrap(),
        alloc::vec![Literal::pos(Var(0)), Literal::pos(Var(1))]
    );
    let disj = mgr.or(v[0], v[1]).unwrap();
    assert!(mgr.essential_literals(disj).unwrap().is_empty());
    let inner = mgr.or(v[1], v[2]).unwrap();
    let f = mgr.and(v[0], inner).unwrap();
    assert_eq!(mgr.essential_literals(f).unwrap(), alloc::vec![Literal::pos(Var(0))]);
    assert!(matches!(mgr.essential_literals(mgr.false_handle()), Err(BddError::FalseFunction)));
}

#[test]
fn prime_implicant_basics() {
    let mut mgr = BddManager::new(2);
    let v = vars(&mut mgr, 2);
    let conj = mgr.and(v[0], v[1]).unwrap();
    let pi = mgr.prime_implicant(conj, &asg(&[1, 1])).unwrap();
    assert_eq!(pi, alloc::vec![Literal::pos(Var(0)), Literal::pos(Var(1))]);

    let disj = mgr.or(v[0], v[1]).unwrap();
    let pi = mgr.prime_implicant(disj, &asg(&[1, 1])).unwrap();
    assert_eq!(pi.len(), 1);
    assert!(mgr.cube_implies(&pi, disj).unwrap());
    assert!(!mgr.cube_implies(&[], disj).unwrap());

    let t = mgr.true_handle();
    assert!(mgr.prime_implicant(t, &asg(&[0, 0])).unwrap().is_empty());

    assert!(matches!(
        mgr.prime_implicant(conj, &asg(&[1, 0])),
        Err(BddError::SeedNotSatisfying)
    ));
}

#[test]
fn foreign_handles_rejected() {
    let mut a = BddManager::new(2);
    let mut b = BddManager::new(2);
    let xa = a.mk_var(Var(0)).unwrap();
    let xb = b.mk_var(Var(0)).unwrap();
    assert!(matches!(a.and(xa, xb), Err(BddError::ForeignHandle)));
    assert!(matches!(b.not(xa), Err(BddError::ForeignHandle)));
}

#[test]
fn node_budget_and_abort_hook() {
    let mut mgr = BddManager::new(64);
    mgr.set_node_limit(Some(16));
    let mut err = None;
    let mut acc = mgr.true_handle();
    for i in 0..64 {
        let x = match mgr.mk_var(Var(i)) {
            Ok(x) => x,
            Err(e) => {
                err = Some(e);
                break;
            }
        };
        match mgr.xor(acc, x) {
            Ok(r) => acc = r,
            Err(e) => {
                err = Some(e);
                break;
            }
        }
    }
    assert!(matches!(err, Some(BddError::NodeBudgetExceeded { limit: 16 })));

    let mut mgr = BddManager::new(8192);
    mgr.set_abort_hook(Some(Box::new(|| true)));
    let mut err = None;
    let mut acc = mgr.true_handle();
    for i in 0..8192 {
        match mgr.mk_var(Var(i)).and_then(|x| mgr.xor(acc, x)) {
            Ok(r) => acc = r,
            Err(e) => {
                err = Some(e);
                break;
            }
        }
    }
    assert!(matches!(err, Some(BddError::Aborted)), "{err:?}");
}

#[test]
fn dot_export() {
    let mut mgr = BddManager::new(2);
    let v = vars(&mut mgr, 2);
    let f = mgr.and(v[0], v[1]).unwrap();
    let dot = mgr.to_dot(f);
    assert!(dot.starts_with("digraph bdd {"));
    assert!(dot.contains("[label=\"x0\"]"));
    assert!(dot.contains("style=dashed"));
}

#[test]
fn canonicity_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0de);
    let nvars = 8;
    let mut mgr = BddManager::new(nvars);
    for _ in 0..1000 {
        let ea = random_expr(&mut rng, 4, nvars);
        let eb = random_expr(&mut rng, 4, nvars);
        let fa = build_expr(&mut mgr, &ea);
        let fb = build_expr(&mut mgr, &eb);
        let semantically_equal =
            all_assignments(nvars).all(|a| eval_expr(&ea, &a) == eval_expr(&eb, &a));
        assert_eq!(fa == fb, semantically_equal, "{ea:?} vs {eb:?}");
        // And the BDDs must agree with the expressions pointwise.
        for a in all_assignments(nvars) {
            assert_eq!(mgr.eval(fa, &a), eval_expr(&ea, &a));
        }
    }
}

#[test]
fn exists_relprod_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let nvars = 7;
    for _ in 0..200 {
        let mut mgr = BddManager::new(nvars);
        let ea = random_expr(&mut rng, 4, nvars);
        let eb = random_expr(&mut rng, 4, nvars);
        let fa = build_expr(&mut mgr, &ea);
        let fb = build_expr(&mut mgr, &eb);
        let nset = rng.gen_range(0..=nvars);
        let mut set: Vec<Var> = (0..nset).map(|_| Var(rng.gen_range(0..nvars))).collect();
        set.dedup();
        let anded = mgr.and(fa, fb).unwrap();
        let via_exists = mgr.exists(anded, &set).unwrap();
        let via_relprod = mgr.rel_product(fa, fb, &set).unwrap();
        assert_eq!(via_exists, via_relprod);
    }
}

#[test]
fn sat_count_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..60 {
        let nvars = rng.gen_range(1..=16u32);
        let mut mgr = BddManager::new(nvars);
        let e = random_expr(&mut rng, 5, nvars);
        let f = build_expr(&mut mgr, &e);
        let u: Vec<Var> = (0..nvars).map(Var).collect();
        let counted = mgr.sat_count(f, &u).unwrap();
        let brute = all_assignments(nvars).filter(|a| eval_expr(&e, a)).count();
        assert_eq!(counted, BigUint::from(brute));
        // sat_all agrees as well (sets, no duplicates).
        if nvars <= 10 {
            let mut sols: Vec<Vec<bool>> = mgr.sat_all(f, &u).unwrap().collect();
            let before = sols.len();
            sols.sort();
            sols.dedup();
            assert_eq!(before, sols.len(), "duplicate assignments");
            let mut brute_sols: Vec<Vec<bool>> =
                all_assignments(nvars).filter(|a| eval_expr(&e, a)).collect();
            brute_sols.sort();
            assert_eq!(sols, brute_sols);
        }
    }
}

#[test]
fn essential_literals_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for _ in 0..150 {
        let nvars = rng.gen_range(1..=12u32);
        let mut mgr = BddManager::new(nvars);
        let e = random_expr(&mut rng, 4, nvars);
        let f = build_expr(&mut mgr, &e);
        if mgr.is_false(f) {
            continue;
        }
        let got = mgr.essential_literals(f).unwrap();
        let sols: Vec<Vec<bool>> = all_assignments(nvars).filter(|a| eval_expr(&e, a)).collect();
        let mut expected = Vec::new();
        for v in 0..nvars {
            if sols.iter().all(|s| s[v as usize]) {
                expected.push(Literal::pos(Var(v)));
            } else if sols.iter().all(|s| !s[v as usize]) {
                expected.push(Literal::neg(Var(v)));
            }
        }
        assert_eq!(got, expected, "{e:?}");
    }
}

#[test]
fn prime_implicant_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(4321);
    for _ in 0..150 {
        let nvars = rng.gen_range(1..=10u32);
        let mut mgr = BddManager::new(nvars);
        let e = random_expr(&mut rng, 4, nvars);
        let f = build_expr(&mut mgr, &e);
        let u: Vec<Var> = (0..nvars).map(Var).collect();
        let Some(seed) = mgr.lex_min_assignment(f, &u).unwrap() else { continue };
        let cube = mgr.prime_implicant(f, &seed).unwrap();
        // Seed consistency and implication.
        assert!(cube.iter().all(|l| l.holds_in(&seed)));
        assert!(mgr.cube_implies(&cube, f).unwrap());
        // Minimality: dropping any literal breaks the implication.
        for i in 0..cube.len() {
            let mut shrunk = cube.clone();
            shrunk.remove(i);
            assert!(!mgr.cube_implies(&shrunk, f).unwrap());
        }
    }
}

#[test]
fn lex_min_assignment_is_minimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _ in 0..100 {
        let nvars = rng.gen_range(1..=8u32);
        let mut mgr = BddManager::new(nvars);
        let e = random_expr(&mut rng, 4, nvars);
        let f = build_expr(&mut mgr, &e);
        let u: Vec<Var> = (0..nvars).map(Var).collect();
        // Vec<bool> comparison is lexicographic with false < true.
        let brute_min = all_assignments(nvars).filter(|a| eval_expr(&e, a)).min();
        let got = mgr.lex_min_assignment(f, &u).unwrap();
        match (got, brute_min) {
            (None, None) => {}
            (Some(g), Some(b)) => assert_eq!(g, b),
            (g, b) => panic!("mismatch: {g:?} vs {b:?}"),
        }
    }
}

#[test]
fn restrict_cube_is_cofactoring() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for _ in 0..100 {
        let nvars = 6u32;
        let mut mgr = BddManager::new(nvars);
        let e = random_expr(&mut rng, 4, nvars);
        let f = build_expr(&mut mgr, &e);
        let lit = Literal { var: Var(rng.gen_range(0..nvars)), positive: rng.gen_bool(0.5) };
        let cof = mgr.cofactor(f, lit).unwrap();
        for mut a in all_assignments(nvars) {
            let restricted = mgr.eval(cof, &a);
            a[lit.var.index()] = lit.positive;
            assert_eq!(restricted, eval_expr(&e, &a));
        }
    }
}
