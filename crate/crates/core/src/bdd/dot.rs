//! Debug export of a BDD as a DOT graph: nodes labeled by variable index,
//! solid edges for hi, dashed for lo.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{BddHandle, BddManager, FALSE_ID, TRUE_ID};

impl BddManager {
    pub fn to_dot(&self, f: BddHandle) -> String {
        let mut out = String::from("digraph bdd {\n");
        let Ok(root) = self.check(f) else {
            out.push_str("}\n");
            return out;
        };
        let mut ids: Vec<u32> = Vec::new();
        let mut seen = hashbrown::HashSet::new();
        let mut stack = alloc::vec![root];
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            ids.push(id);
            if id != FALSE_ID && id != TRUE_ID {
                let n = self.nodes[id as usize];
                stack.push(n.hi);
                stack.push(n.lo);
            }
        }
        ids.sort_unstable();
        for id in ids {
            match id {
                FALSE_ID => out.push_str("  n0 [shape=box, label=\"0\"];\n"),
                TRUE_ID => out.push_str("  n1 [shape=box, label=\"1\"];\n"),
                _ => {
                    let n = self.nodes[id as usize];
                    out.push_str(&format!("  n{} [label=\"x{}\"];\n", id, n.var));
                    out.push_str(&format!("  n{} -> n{};\n", id, n.hi));
                    out.push_str(&format!("  n{} -> n{} [style=dashed];\n", id, n.lo));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}
