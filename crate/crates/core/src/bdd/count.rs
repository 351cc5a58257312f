//! Model counting and solution enumeration over a variable universe.
//!
//! Counts are exact arbitrary-precision integers: the universes reaching the
//! input layer of large networks make any fixed width overflow.

use alloc::vec::Vec;

use hashbrown::HashMap;
use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{BddError, BddHandle, BddManager, Var, FALSE_ID, TRUE_ID};

impl BddManager {
    /// Exact number of satisfying assignments of `f` over the universe.
    ///
    /// Every variable skipped along a path contributes a factor of two.
    /// The support of `f` must be contained in the universe.
    pub fn sat_count(&self, f: BddHandle, universe: &[Var]) -> Result<BigUint, BddError> {
        let f = self.check(f)?;
        let ranks = UniverseRanks::new(universe);
        let mut memo: HashMap<u32, BigUint> = HashMap::new();
        let below_root = self.count_rec(f, &ranks, &mut memo)?;
        // Variables above the root are unconstrained.
        let skipped = ranks.rank_of_id(self, f)?;
        Ok(below_root << skipped)
    }

    fn count_rec(
        &self,
        id: u32,
        ranks: &UniverseRanks,
        memo: &mut HashMap<u32, BigUint>,
    ) -> Result<BigUint, BddError> {
        match id {
            FALSE_ID => return Ok(BigUint::zero()),
            TRUE_ID => return Ok(BigUint::one()),
            _ => {}
        }
        if let Some(c) = memo.get(&id) {
            return Ok(c.clone());
        }
        let n = self.nodes[id as usize];
        let my_rank = ranks.rank_of_var(n.var)?;
        let hi = self.count_rec(n.hi, ranks, memo)?;
        let lo = self.count_rec(n.lo, ranks, memo)?;
        let hi_gap = ranks.rank_of_id(self, n.hi)? - my_rank - 1;
        let lo_gap = ranks.rank_of_id(self, n.lo)? - my_rank - 1;
        let total = (hi << hi_gap) + (lo << lo_gap);
        memo.insert(id, total.clone());
        Ok(total)
    }

    /// Lexicographically smallest satisfying assignment of `f` over the
    /// universe (false before true, positions in ascending variable order),
    /// returned densely indexed by variable index with every variable outside
    /// the path set to false. `None` when `f` is unsatisfiable.
    pub fn lex_min_assignment(
        &self,
        f: BddHandle,
        universe: &[Var],
    ) -> Result<Option<Vec<bool>>, BddError> {
        let mut id = self.check(f)?;
        let ranks = UniverseRanks::new(universe);
        for v in self.support(self.wrap(id)) {
            ranks.rank_of_var(v.0)?;
        }
        if id == FALSE_ID {
            return Ok(None);
        }
        let mut assignment = alloc::vec![false; self.num_vars as usize];
        while id != TRUE_ID {
            let n = self.nodes[id as usize];
            if n.lo != FALSE_ID {
                id = n.lo;
            } else {
                assignment[n.var as usize] = true;
                id = n.hi;
            }
        }
        Ok(Some(assignment))
    }

    /// Lazily enumerates every satisfying assignment of `f` over the
    /// universe, without duplicates. Each item is in universe order
    /// (position `i` is the value of the `i`-th smallest universe variable).
    pub fn sat_all<'a>(
        &'a self,
        f: BddHandle,
        universe: &[Var],
    ) -> Result<SatAllIter<'a>, BddError> {
        let id = self.check(f)?;
        let ranks = UniverseRanks::new(universe);
        for v in self.support(f) {
            ranks.rank_of_var(v.0)?;
        }
        Ok(SatAllIter::new(self, id, ranks.sorted))
    }
}

struct UniverseRanks {
    sorted: Vec<u32>,
}

impl UniverseRanks {
    fn new(universe: &[Var]) -> Self {
        let mut sorted: Vec<u32> = universe.iter().map(|v| v.0).collect();
        sorted.sort_unstable();
        sorted.dedup();
        UniverseRanks { sorted }
    }

    fn rank_of_var(&self, var: u32) -> Result<u64, BddError> {
        match self.sorted.binary_search(&var) {
            Ok(pos) => Ok(pos as u64),
            Err(_) => Err(BddError::SupportOutsideUniverse { var }),
        }
    }

    fn rank_of_id(&self, mgr: &BddManager, id: u32) -> Result<u64, BddError> {
        if id == FALSE_ID || id == TRUE_ID {
            Ok(self.sorted.len() as u64)
        } else {
            self.rank_of_var(mgr.nodes[id as usize].var)
        }
    }
}

struct Frame {
    node: u32,
    took_hi: bool,
}

/// Streaming enumerator behind [`BddManager::sat_all`]; solution sets can be
/// astronomically large, so assignments are produced one at a time.
pub struct SatAllIter<'a> {
    mgr: &'a BddManager,
    universe: Vec<u32>,
    values: Vec<bool>,
    fixed: Vec<bool>,
    stack: Vec<Frame>,
    started: bool,
    exhausted: bool,
}

impl<'a> SatAllIter<'a> {
    fn new(mgr: &'a BddManager, root: u32, universe: Vec<u32>) -> Self {
        let m = universe.len();
        let mut it = SatAllIter {
            mgr,
            universe,
            values: alloc::vec![false; m],
            fixed: alloc::vec![false; m],
            stack: Vec::new(),
            started: false,
            exhausted: root == FALSE_ID,
        };
        if !it.exhausted {
            it.descend(root);
        }
        it
    }

    fn slot_of(&self, var: u32) -> usize {
        self.universe.binary_search(&var).expect("support checked at construction")
    }

    /// Extends the current path down to the true leaf, preferring the lo
    /// branch so the very first assignment is the lexicographic minimum.
    fn descend(&mut self, mut id: u32) {
        while id != TRUE_ID {
            let n = self.mgr.nodes[id as usize];
            let pos = self.slot_of(n.var);
            let take_hi = n.lo == FALSE_ID;
            self.stack.push(Frame { node: id, took_hi: take_hi });
            self.fixed[pos] = true;
            self.values[pos] = take_hi;
            id = if take_hi { n.hi } else { n.lo };
        }
        // Free positions restart at false for the new path.
        for i in 0..self.values.len() {
            if !self.fixed[i] {
                self.values[i] = false;
            }
        }
    }

    /// Advances the binary odometer over the free positions; false when it
    /// wrapped (all free combinations of the current path are spent).
    fn bump_free(&mut self) -> bool {
        for i in (0..self.values.len()).rev() {
            if self.fixed[i] {
                continue;
            }
            if self.values[i] {
                self.values[i] = false;
            } else {
                self.values[i] = true;
                return true;
            }
        }
        false
    }

    /// Moves to the next root-to-true path, if any.
    fn next_path(&mut self) -> bool {
        while let Some(frame) = self.stack.pop() {
            let n = self.mgr.nodes[frame.node as usize];
            let pos = self.slot_of(n.var);
            self.fixed[pos] = false;
            if !frame.took_hi && n.hi != FALSE_ID {
                self.stack.push(Frame { node: frame.node, took_hi: true });
                self.fixed[pos] = true;
                self.values[pos] = true;
                self.descend(n.hi);
                return true;
            }
        }
        false
    }
}

impl Iterator for SatAllIter<'_> {
    type Item = Vec<bool>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.exhausted {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.values.clone());
        }
        if self.bump_free() {
            return Some(self.values.clone());
        }
        if self.next_path() {
            Some(self.values.clone())
        } else {
            self.exhausted = true;
            None
        }
    }
}
