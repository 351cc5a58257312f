//! Implied literals and prime implicants.

use alloc::vec::Vec;

use super::{BddError, BddHandle, BddManager, Literal, FALSE_ID, TRUE_ID};

impl BddManager {
    /// All literals `ℓ` with `f → ℓ`, i.e. those whose falsification kills
    /// the function. Checked per support variable via cofactoring; complete
    /// by construction. Fails on the false leaf, where every literal is
    /// (vacuously) implied.
    pub fn essential_literals(&mut self, f: BddHandle) -> Result<Vec<Literal>, BddError> {
        let id = self.check(f)?;
        if id == FALSE_ID {
            return Err(BddError::FalseFunction);
        }
        let mut out = Vec::new();
        for var in self.support(f) {
            let lo_cof = self.cofactor(f, Literal::neg(var))?;
            if self.check(lo_cof)? == FALSE_ID {
                out.push(Literal::pos(var));
                continue;
            }
            let hi_cof = self.cofactor(f, Literal::pos(var))?;
            if self.check(hi_cof)? == FALSE_ID {
                out.push(Literal::neg(var));
            }
        }
        Ok(out)
    }

    /// A prime implicant of `f` grown from a satisfying seed assignment:
    /// the returned cube implies `f`, dropping any of its literals breaks
    /// the implication, and every kept literal agrees with the seed.
    ///
    /// `seed` is dense (indexed by variable index) and must satisfy `f`.
    /// Minimization drops candidates in ascending variable order, so the
    /// result is deterministic for a given seed.
    pub fn prime_implicant(
        &mut self,
        f: BddHandle,
        seed: &[bool],
    ) -> Result<Vec<Literal>, BddError> {
        self.check(f)?;
        if !self.eval(f, seed) {
            return Err(BddError::SeedNotSatisfying);
        }
        let mut cube: Vec<Literal> = self
            .support(f)
            .into_iter()
            .map(|var| Literal { var, positive: seed[var.index()] })
            .collect();
        let mut i = 0;
        while i < cube.len() {
            let mut shrunk = cube.clone();
            shrunk.remove(i);
            if self.cube_implies(&shrunk, f)? {
                cube = shrunk;
            } else {
                i += 1;
            }
        }
        Ok(cube)
    }

    /// Does the conjunction of `literals` imply `f`?
    pub fn cube_implies(&mut self, literals: &[Literal], f: BddHandle) -> Result<bool, BddError> {
        let cube = self.mk_cube(literals)?;
        let restricted = self.restrict_cube(f, cube)?;
        Ok(self.check(restricted)? == TRUE_ID)
    }
}
