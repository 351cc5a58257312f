//! Reduced ordered binary decision diagrams.
//!
//! [`BddManager`] owns a hash-consed node store (the unique table) and an
//! operation cache; [`BddHandle`] is an opaque reference into one manager.
//! The variable order is fixed at construction: ascending variable index.
//! Because every node is reduced and shared, handle equality coincides with
//! logical equivalence of the represented functions.
//!
//! A manager is confined to a single thread; independent managers may run in
//! parallel but handles must never migrate between them (every operation
//! checks the owning manager and fails with [`BddError::ForeignHandle`]).

mod count;
mod cover;
mod dot;

pub use count::SatAllIter;

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;
use core::sync::atomic::{AtomicU32, Ordering};

use hashbrown::HashMap;

/// Index of a Boolean variable under the fixed global order.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(pub u32);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A variable or its negation.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Literal {
    pub var: Var,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: Var) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: Var) -> Self {
        Literal { var, positive: false }
    }

    pub fn negated(self) -> Self {
        Literal { var: self.var, positive: !self.positive }
    }

    /// True iff the literal holds under the assignment (indexed by raw
    /// variable index).
    pub fn holds_in(self, assignment: &[bool]) -> bool {
        assignment[self.var.index()] == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.var)
        } else {
            write!(f, "!{}", self.var)
        }
    }
}

/// Binary Boolean connectives supported by [`BddManager::apply`].
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum BoolOp {
    And,
    Or,
    Xor,
    Xnor,
}

/// Errors surfaced by BDD operations.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BddError {
    /// Variable index not below the manager's variable count.
    VarOutOfRange { var: u32, limit: u32 },
    /// A handle from a different manager was passed in.
    ForeignHandle,
    /// The restricted `ite_var` fast path was called with a test variable
    /// that does not precede the supports of both branches.
    OrderingViolation { var: u32 },
    /// `sat_count`/`sat_all` saw a support variable outside the universe.
    SupportOutsideUniverse { var: u32 },
    /// `essential_literals` on the constant-false function is vacuous
    /// (every literal is implied); signalled instead of answered.
    FalseFunction,
    /// The seed assignment passed to `prime_implicant` does not satisfy
    /// the function.
    SeedNotSatisfying,
    /// The configured node ceiling was hit.
    NodeBudgetExceeded { limit: usize },
    /// The abort hook requested cancellation (typically a wall-time budget).
    Aborted,
    /// A cube contained two literals over the same variable.
    DuplicateVariable { var: u32 },
}

impl fmt::Display for BddError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BddError::VarOutOfRange { var, limit } => {
                write!(f, "variable index {var} out of range (manager has {limit} variables)")
            }
            BddError::ForeignHandle => write!(f, "handle belongs to a different manager"),
            BddError::OrderingViolation { var } => {
                write!(f, "ite_var: variable {var} does not precede both branch supports")
            }
            BddError::SupportOutsideUniverse { var } => {
                write!(f, "support variable {var} is not in the counting universe")
            }
            BddError::FalseFunction => write!(f, "operation is vacuous on the constant-false function"),
            BddError::SeedNotSatisfying => write!(f, "seed assignment does not satisfy the function"),
            BddError::NodeBudgetExceeded { limit } => write!(f, "node budget of {limit} nodes exceeded"),
            BddError::Aborted => write!(f, "operation aborted by hook"),
            BddError::DuplicateVariable { var } => {
                write!(f, "duplicate variable {var} in literal set")
            }
        }
    }
}

impl core::error::Error for BddError {}

/// Opaque reference to a node; valid only within its originating manager.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct BddHandle {
    mgr: u32,
    node: u32,
}

const FALSE_ID: u32 = 0;
const TRUE_ID: u32 = 1;
/// Leaves carry a pseudo-variable that orders after every real variable.
const LEAF_VAR: u32 = u32::MAX;

#[derive(Copy, Clone)]
struct Node {
    var: u32,
    hi: u32,
    lo: u32,
}

// Operation tags for the cache key.
const OP_AND: u8 = 0;
const OP_OR: u8 = 1;
const OP_XOR: u8 = 2;
const OP_XNOR: u8 = 3;
const OP_NOT: u8 = 4;
const OP_ITE: u8 = 5;
const OP_EXISTS: u8 = 6;
const OP_RELPROD: u8 = 7;
const OP_RESTRICT: u8 = 8;

#[derive(Copy, Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    op: u8,
    a: u32,
    b: u32,
    c: u32,
}

static NEXT_MANAGER_ID: AtomicU32 = AtomicU32::new(0);

/// Hash-consed ROBDD node store and operation kernel.
pub struct BddManager {
    id: u32,
    num_vars: u32,
    nodes: Vec<Node>,
    unique: HashMap<(u32, u32, u32), u32>,
    cache: HashMap<CacheKey, u32>,
    node_limit: Option<usize>,
    abort_hook: Option<Box<dyn FnMut() -> bool + Send>>,
    mk_calls: u32,
}

impl BddManager {
    /// A manager over variables `0..num_vars`, in ascending order.
    pub fn new(num_vars: u32) -> Self {
        Self::with_capacity(num_vars, 1 << 12)
    }

    /// Like [`BddManager::new`] with pre-sized node store and caches.
    pub fn with_capacity(num_vars: u32, node_capacity: usize) -> Self {
        assert!(num_vars < LEAF_VAR, "variable count too large");
        let mut nodes = Vec::with_capacity(node_capacity.max(2));
        nodes.push(Node { var: LEAF_VAR, hi: FALSE_ID, lo: FALSE_ID });
        nodes.push(Node { var: LEAF_VAR, hi: TRUE_ID, lo: TRUE_ID });
        BddManager {
            id: NEXT_MANAGER_ID.fetch_add(1, Ordering::Relaxed),
            num_vars,
            nodes,
            unique: HashMap::with_capacity(node_capacity),
            cache: HashMap::with_capacity(node_capacity),
            node_limit: None,
            abort_hook: None,
            mk_calls: 0,
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// Total nodes in the store, leaves included.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Ceiling on the total node count; exceeding it fails the operation
    /// with [`BddError::NodeBudgetExceeded`].
    pub fn set_node_limit(&mut self, limit: Option<usize>) {
        self.node_limit = limit;
    }

    /// Hook polled periodically during node creation; returning `true`
    /// aborts the running operation with [`BddError::Aborted`]. This is how
    /// the std layer imposes wall-time budgets on a `no_std` kernel.
    pub fn set_abort_hook(&mut self, hook: Option<Box<dyn FnMut() -> bool + Send>>) {
        self.abort_hook = hook;
    }

    /// Drops all memoized operation results. Never changes any observable
    /// handle, only later operation cost.
    pub fn clear_op_cache(&mut self) {
        self.cache.clear();
    }

    // ---- terminal and variable constructors ----

    pub fn mk_const(&self, value: bool) -> BddHandle {
        self.wrap(if value { TRUE_ID } else { FALSE_ID })
    }

    pub fn true_handle(&self) -> BddHandle {
        self.wrap(TRUE_ID)
    }

    pub fn false_handle(&self) -> BddHandle {
        self.wrap(FALSE_ID)
    }

    pub fn is_true(&self, f: BddHandle) -> bool {
        f.mgr == self.id && f.node == TRUE_ID
    }

    pub fn is_false(&self, f: BddHandle) -> bool {
        f.mgr == self.id && f.node == FALSE_ID
    }

    /// The single-variable function `f(x) = x_var`.
    pub fn mk_var(&mut self, var: Var) -> Result<BddHandle, BddError> {
        self.check_var(var)?;
        let id = self.mk_node(var.0, TRUE_ID, FALSE_ID)?;
        Ok(self.wrap(id))
    }

    pub fn mk_literal(&mut self, lit: Literal) -> Result<BddHandle, BddError> {
        self.check_var(lit.var)?;
        let id = if lit.positive {
            self.mk_node(lit.var.0, TRUE_ID, FALSE_ID)?
        } else {
            self.mk_node(lit.var.0, FALSE_ID, TRUE_ID)?
        };
        Ok(self.wrap(id))
    }

    /// Conjunction of the given literals. Duplicate variables with equal
    /// polarity collapse; opposite polarities yield the false leaf.
    pub fn mk_cube(&mut self, literals: &[Literal]) -> Result<BddHandle, BddError> {
        let mut lits: Vec<Literal> = literals.to_vec();
        lits.sort_by_key(|l| l.var);
        for w in lits.windows(2) {
            if w[0].var == w[1].var && w[0].positive != w[1].positive {
                return Ok(self.false_handle());
            }
        }
        lits.dedup();
        if let Some(last) = lits.last() {
            self.check_var(last.var)?;
        }
        let mut acc = TRUE_ID;
        for lit in lits.iter().rev() {
            acc = if lit.positive {
                self.mk_node(lit.var.0, acc, FALSE_ID)?
            } else {
                self.mk_node(lit.var.0, FALSE_ID, acc)?
            };
        }
        Ok(self.wrap(acc))
    }

    // ---- Boolean operations ----

    pub fn not(&mut self, f: BddHandle) -> Result<BddHandle, BddError> {
        let f = self.check(f)?;
        let r = self.not_rec(f)?;
        Ok(self.wrap(r))
    }

    /// Pointwise combination of two functions.
    pub fn apply(&mut self, a: BddHandle, b: BddHandle, op: BoolOp) -> Result<BddHandle, BddError> {
        let a = self.check(a)?;
        let b = self.check(b)?;
        let r = self.apply_rec(op, a, b)?;
        Ok(self.wrap(r))
    }

    pub fn and(&mut self, a: BddHandle, b: BddHandle) -> Result<BddHandle, BddError> {
        self.apply(a, b, BoolOp::And)
    }

    pub fn or(&mut self, a: BddHandle, b: BddHandle) -> Result<BddHandle, BddError> {
        self.apply(a, b, BoolOp::Or)
    }

    pub fn xor(&mut self, a: BddHandle, b: BddHandle) -> Result<BddHandle, BddError> {
        self.apply(a, b, BoolOp::Xor)
    }

    pub fn xnor(&mut self, a: BddHandle, b: BddHandle) -> Result<BddHandle, BddError> {
        self.apply(a, b, BoolOp::Xnor)
    }

    /// Restricted if-then-else on a fresh test variable: `(x ∧ hi) ∨ (¬x ∧ lo)`.
    ///
    /// Fast path used by the cardinality-constraint construction: `var` must
    /// precede every variable in the supports of `hi` and `lo`, so the result
    /// is a single (possibly shared) node. Fails with
    /// [`BddError::OrderingViolation`] otherwise; use [`BddManager::ite`] for
    /// arbitrary operands.
    pub fn ite_var(&mut self, var: Var, hi: BddHandle, lo: BddHandle) -> Result<BddHandle, BddError> {
        self.check_var(var)?;
        let hi = self.check(hi)?;
        let lo = self.check(lo)?;
        if hi == lo {
            return Ok(self.wrap(hi));
        }
        if self.nodes[hi as usize].var <= var.0 || self.nodes[lo as usize].var <= var.0 {
            return Err(BddError::OrderingViolation { var: var.0 });
        }
        let r = self.mk_node(var.0, hi, lo)?;
        Ok(self.wrap(r))
    }

    /// General if-then-else over arbitrary operands.
    pub fn ite(&mut self, f: BddHandle, g: BddHandle, h: BddHandle) -> Result<BddHandle, BddError> {
        let f = self.check(f)?;
        let g = self.check(g)?;
        let h = self.check(h)?;
        let r = self.ite_rec(f, g, h)?;
        Ok(self.wrap(r))
    }

    /// Existential quantification `∃vars. f`.
    pub fn exists(&mut self, f: BddHandle, vars: &[Var]) -> Result<BddHandle, BddError> {
        let f = self.check(f)?;
        let cube = self.positive_cube(vars)?;
        let r = self.exists_rec(f, cube)?;
        Ok(self.wrap(r))
    }

    /// Relational product `∃vars. (a ∧ b)`, fused so the conjunction is never
    /// materialized. Extensionally identical to `exists(and(a, b), vars)`.
    pub fn rel_product(
        &mut self,
        a: BddHandle,
        b: BddHandle,
        vars: &[Var],
    ) -> Result<BddHandle, BddError> {
        let a = self.check(a)?;
        let b = self.check(b)?;
        let cube = self.positive_cube(vars)?;
        let r = self.relprod_rec(a, b, cube)?;
        Ok(self.wrap(r))
    }

    /// Cofactor of `f` with the literal's variable fixed to make the literal true.
    pub fn cofactor(&mut self, f: BddHandle, lit: Literal) -> Result<BddHandle, BddError> {
        let f = self.check(f)?;
        let cube = self.mk_cube(core::slice::from_ref(&lit))?;
        let r = self.restrict_rec(f, cube.node)?;
        Ok(self.wrap(r))
    }

    /// Cofactor of `f` under every literal of the cube.
    pub fn restrict_cube(&mut self, f: BddHandle, cube: BddHandle) -> Result<BddHandle, BddError> {
        let f = self.check(f)?;
        let cube = self.check(cube)?;
        let r = self.restrict_rec(f, cube)?;
        Ok(self.wrap(r))
    }

    // ---- structural queries ----

    /// Variables the function actually depends on, ascending.
    pub fn support(&self, f: BddHandle) -> Vec<Var> {
        let Ok(f) = self.check(f) else { return Vec::new() };
        let mut seen = hashbrown::HashSet::new();
        let mut vars = hashbrown::HashSet::new();
        let mut stack = alloc::vec![f];
        while let Some(id) = stack.pop() {
            if id == FALSE_ID || id == TRUE_ID || !seen.insert(id) {
                continue;
            }
            let n = self.nodes[id as usize];
            vars.insert(n.var);
            stack.push(n.hi);
            stack.push(n.lo);
        }
        let mut out: Vec<Var> = vars.into_iter().map(Var).collect();
        out.sort();
        out
    }

    /// Number of non-terminal nodes reachable from `f`.
    pub fn size(&self, f: BddHandle) -> usize {
        let Ok(f) = self.check(f) else { return 0 };
        let mut seen = hashbrown::HashSet::new();
        let mut stack = alloc::vec![f];
        let mut count = 0usize;
        while let Some(id) = stack.pop() {
            if id == FALSE_ID || id == TRUE_ID || !seen.insert(id) {
                continue;
            }
            count += 1;
            let n = self.nodes[id as usize];
            stack.push(n.hi);
            stack.push(n.lo);
        }
        count
    }

    /// Evaluates `f` under a dense assignment indexed by variable index.
    ///
    /// Panics if the assignment is shorter than the manager's variable count
    /// or the handle is foreign.
    pub fn eval(&self, f: BddHandle, assignment: &[bool]) -> bool {
        let mut id = self.check(f).expect("eval: foreign handle");
        assert!(
            assignment.len() >= self.num_vars as usize,
            "eval: assignment covers {} of {} variables",
            assignment.len(),
            self.num_vars
        );
        loop {
            match id {
                FALSE_ID => return false,
                TRUE_ID => return true,
                _ => {
                    let n = self.nodes[id as usize];
                    id = if assignment[n.var as usize] { n.hi } else { n.lo };
                }
            }
        }
    }

    // ---- internals ----

    #[inline]
    fn wrap(&self, node: u32) -> BddHandle {
        BddHandle { mgr: self.id, node }
    }

    #[inline]
    fn check(&self, h: BddHandle) -> Result<u32, BddError> {
        if h.mgr == self.id {
            Ok(h.node)
        } else {
            Err(BddError::ForeignHandle)
        }
    }

    #[inline]
    fn check_var(&self, var: Var) -> Result<(), BddError> {
        if var.0 < self.num_vars {
            Ok(())
        } else {
            Err(BddError::VarOutOfRange { var: var.0, limit: self.num_vars })
        }
    }

    #[inline]
    fn var_of(&self, id: u32) -> u32 {
        self.nodes[id as usize].var
    }

    #[inline]
    fn cofactors(&self, id: u32, var: u32) -> (u32, u32) {
        let n = self.nodes[id as usize];
        if n.var == var {
            (n.hi, n.lo)
        } else {
            (id, id)
        }
    }

    fn mk_node(&mut self, var: u32, hi: u32, lo: u32) -> Result<u32, BddError> {
        if hi == lo {
            return Ok(hi);
        }
        debug_assert!(var < self.var_of(hi) && var < self.var_of(lo), "ordering invariant");
        if let Some(&id) = self.unique.get(&(var, hi, lo)) {
            return Ok(id);
        }
        if let Some(limit) = self.node_limit {
            if self.nodes.len() >= limit {
                return Err(BddError::NodeBudgetExceeded { limit });
            }
        }
        self.mk_calls = self.mk_calls.wrapping_add(1);
        if self.mk_calls & 0xfff == 0 {
            if let Some(hook) = self.abort_hook.as_mut() {
                if hook() {
                    return Err(BddError::Aborted);
                }
            }
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(Node { var, hi, lo });
        self.unique.insert((var, hi, lo), id);
        Ok(id)
    }

    fn not_rec(&mut self, f: u32) -> Result<u32, BddError> {
        match f {
            FALSE_ID => return Ok(TRUE_ID),
            TRUE_ID => return Ok(FALSE_ID),
            _ => {}
        }
        let key = CacheKey { op: OP_NOT, a: f, b: 0, c: 0 };
        if let Some(&r) = self.cache.get(&key) {
            return Ok(r);
        }
        let n = self.nodes[f as usize];
        let hi = self.not_rec(n.hi)?;
        let lo = self.not_rec(n.lo)?;
        let r = self.mk_node(n.var, hi, lo)?;
        self.cache.insert(key, r);
        Ok(r)
    }

    fn apply_terminal(&self, op: BoolOp, a: u32, b: u32) -> Option<u32> {
        match op {
            BoolOp::And => {
                if a == FALSE_ID || b == FALSE_ID {
                    Some(FALSE_ID)
                } else if a == TRUE_ID {
                    Some(b)
                } else if b == TRUE_ID || a == b {
                    Some(a)
                } else {
                    None
                }
            }
            BoolOp::Or => {
                if a == TRUE_ID || b == TRUE_ID {
                    Some(TRUE_ID)
                } else if a == FALSE_ID {
                    Some(b)
                } else if b == FALSE_ID || a == b {
                    Some(a)
                } else {
                    None
                }
            }
            BoolOp::Xor => {
                if a == b {
                    Some(FALSE_ID)
                } else if a == FALSE_ID {
                    Some(b)
                } else if b == FALSE_ID {
                    Some(a)
                } else {
                    None
                }
            }
            BoolOp::Xnor => {
                if a == b {
                    Some(TRUE_ID)
                } else if a == TRUE_ID {
                    Some(b)
                } else if b == TRUE_ID {
                    Some(a)
                } else {
                    None
                }
            }
        }
    }

    fn apply_rec(&mut self, op: BoolOp, a: u32, b: u32) -> Result<u32, BddError> {
        if let Some(r) = self.apply_terminal(op, a, b) {
            return Ok(r);
        }
        // All four connectives are commutative.
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let tag = match op {
            BoolOp::And => OP_AND,
            BoolOp::Or => OP_OR,
            BoolOp::Xor => OP_XOR,
            BoolOp::Xnor => OP_XNOR,
        };
        let key = CacheKey { op: tag, a, b, c: 0 };
        if let Some(&r) = self.cache.get(&key) {
            return Ok(r);
        }
        let top = self.var_of(a).min(self.var_of(b));
        let (a1, a0) = self.cofactors(a, top);
        let (b1, b0) = self.cofactors(b, top);
        let r1 = self.apply_rec(op, a1, b1)?;
        let r0 = self.apply_rec(op, a0, b0)?;
        let r = self.mk_node(top, r1, r0)?;
        self.cache.insert(key, r);
        Ok(r)
    }

    fn ite_rec(&mut self, f: u32, g: u32, h: u32) -> Result<u32, BddError> {
        match f {
            TRUE_ID => return Ok(g),
            FALSE_ID => return Ok(h),
            _ => {}
        }
        if g == h {
            return Ok(g);
        }
        if g == TRUE_ID && h == FALSE_ID {
            return Ok(f);
        }
        let key = CacheKey { op: OP_ITE, a: f, b: g, c: h };
        if let Some(&r) = self.cache.get(&key) {
            return Ok(r);
        }
        let top = self.var_of(f).min(self.var_of(g)).min(self.var_of(h));
        let (f1, f0) = self.cofactors(f, top);
        let (g1, g0) = self.cofactors(g, top);
        let (h1, h0) = self.cofactors(h, top);
        let r1 = self.ite_rec(f1, g1, h1)?;
        let r0 = self.ite_rec(f0, g0, h0)?;
        let r = self.mk_node(top, r1, r0)?;
        self.cache.insert(key, r);
        Ok(r)
    }

    /// Cube of positive literals over `vars`, used as the quantification set.
    fn positive_cube(&mut self, vars: &[Var]) -> Result<u32, BddError> {
        let mut sorted: Vec<Var> = vars.to_vec();
        sorted.sort();
        sorted.dedup();
        if let Some(last) = sorted.last() {
            self.check_var(*last)?;
        }
        let mut acc = TRUE_ID;
        for v in sorted.iter().rev() {
            acc = self.mk_node(v.0, acc, FALSE_ID)?;
        }
        Ok(acc)
    }

    fn exists_rec(&mut self, f: u32, cube: u32) -> Result<u32, BddError> {
        if f == FALSE_ID || f == TRUE_ID || cube == TRUE_ID {
            return Ok(f);
        }
        let fv = self.var_of(f);
        // Quantified variables above f's top are not in its support.
        let mut cube = cube;
        while cube != TRUE_ID && self.var_of(cube) < fv {
            cube = self.nodes[cube as usize].hi;
        }
        if cube == TRUE_ID {
            return Ok(f);
        }
        let key = CacheKey { op: OP_EXISTS, a: f, b: cube, c: 0 };
        if let Some(&r) = self.cache.get(&key) {
            return Ok(r);
        }
        let n = self.nodes[f as usize];
        let r = if self.var_of(cube) == fv {
            let rest = self.nodes[cube as usize].hi;
            let r1 = self.exists_rec(n.hi, rest)?;
            let r0 = self.exists_rec(n.lo, rest)?;
            self.apply_rec(BoolOp::Or, r1, r0)?
        } else {
            let r1 = self.exists_rec(n.hi, cube)?;
            let r0 = self.exists_rec(n.lo, cube)?;
            self.mk_node(fv, r1, r0)?
        };
        self.cache.insert(key, r);
        Ok(r)
    }

    fn relprod_rec(&mut self, a: u32, b: u32, cube: u32) -> Result<u32, BddError> {
        if a == FALSE_ID || b == FALSE_ID {
            return Ok(FALSE_ID);
        }
        if cube == TRUE_ID {
            return self.apply_rec(BoolOp::And, a, b);
        }
        if a == TRUE_ID && b == TRUE_ID {
            return Ok(TRUE_ID);
        }
        let top = self.var_of(a).min(self.var_of(b));
        let mut cube = cube;
        while cube != TRUE_ID && self.var_of(cube) < top {
            cube = self.nodes[cube as usize].hi;
        }
        if cube == TRUE_ID {
            return self.apply_rec(BoolOp::And, a, b);
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let key = CacheKey { op: OP_RELPROD, a, b, c: cube };
        if let Some(&r) = self.cache.get(&key) {
            return Ok(r);
        }
        let (a1, a0) = self.cofactors(a, top);
        let (b1, b0) = self.cofactors(b, top);
        let r = if self.var_of(cube) == top {
            let rest = self.nodes[cube as usize].hi;
            let r1 = self.relprod_rec(a1, b1, rest)?;
            let r0 = self.relprod_rec(a0, b0, rest)?;
            self.apply_rec(BoolOp::Or, r1, r0)?
        } else {
            let r1 = self.relprod_rec(a1, b1, cube)?;
            let r0 = self.relprod_rec(a0, b0, cube)?;
            self.mk_node(top, r1, r0)?
        };
        self.cache.insert(key, r);
        Ok(r)
    }

    fn restrict_rec(&mut self, f: u32, cube: u32) -> Result<u32, BddError> {
        if f == FALSE_ID || f == TRUE_ID || cube == TRUE_ID {
            return Ok(f);
        }
        let fv = self.var_of(f);
        // Cube literals over variables missing from f restrict nothing.
        let mut cube = cube;
        while cube != TRUE_ID && self.var_of(cube) < fv {
            let c = self.nodes[cube as usize];
            cube = if c.lo == FALSE_ID { c.hi } else { c.lo };
        }
        if cube == TRUE_ID {
            return Ok(f);
        }
        let key = CacheKey { op: OP_RESTRICT, a: f, b: cube, c: 0 };
        if let Some(&r) = self.cache.get(&key) {
            return Ok(r);
        }
        let n = self.nodes[f as usize];
        let r = if self.var_of(cube) == fv {
            let c = self.nodes[cube as usize];
            if c.lo == FALSE_ID {
                self.restrict_rec(n.hi, c.hi)?
            } else {
                self.restrict_rec(n.lo, c.lo)?
            }
        } else {
            let r1 = self.restrict_rec(n.hi, cube)?;
            let r0 = self.restrict_rec(n.lo, cube)?;
            self.mk_node(fv, r1, r0)?
        };
        self.cache.insert(key, r);
        Ok(r)
    }
}

#[cfg(test)]
mod tests;
