//! Connection: drops states that are not on some start-to-final path.

use crate::fst::{Arc, StateId, Wfst};
use crate::Weight;

/// Returns a fresh transducer containing only accessible and coaccessible
/// states, ids remapped densely in discovery order. A machine with no
/// accepting path becomes empty.
pub fn connect(fst: &Wfst) -> Wfst {
    let n = fst.num_states();
    let mut out = Wfst::new(fst.isyms().clone(), fst.osyms().clone());
    let Some(start) = fst.start() else {
        return out.freeze();
    };

    // forward reachability
    let mut accessible = vec![false; n];
    let mut stack = vec![start];
    accessible[start as usize] = true;
    while let Some(s) = stack.pop() {
        for arc in fst.arcs(s) {
            if !accessible[arc.nextstate as usize] {
                accessible[arc.nextstate as usize] = true;
                stack.push(arc.nextstate);
            }
        }
    }

    // backward reachability over reversed arcs
    let mut incoming: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for s in fst.states() {
        for arc in fst.arcs(s) {
            incoming[arc.nextstate as usize].push(s);
        }
    }
    let mut coaccessible = vec![false; n];
    let mut stack: Vec<StateId> = fst.finals().map(|(s, _)| s).collect();
    for &s in &stack {
        coaccessible[s as usize] = true;
    }
    while let Some(s) = stack.pop() {
        for &p in &incoming[s as usize] {
            if !coaccessible[p as usize] {
                coaccessible[p as usize] = true;
                stack.push(p);
            }
        }
    }

    let keep = |s: StateId| accessible[s as usize] && coaccessible[s as usize];
    if !keep(start) {
        return out.freeze();
    }

    let mut remap: Vec<Option<StateId>> = vec![None; n];
    for s in fst.states().filter(|&s| keep(s)) {
        remap[s as usize] = Some(out.add_state());
    }
    let start_new = remap[start as usize].unwrap();
    out.set_start(start_new).unwrap();
    for s in fst.states().filter(|&s| keep(s)) {
        let id = remap[s as usize].unwrap();
        let fw = fst.final_weight(s);
        if !fw.is_zero() {
            out.set_final(id, fw).unwrap();
        }
        for arc in fst.arcs(s) {
            if let Some(dst) = remap[arc.nextstate as usize] {
                out.add_arc(id, Arc::new(arc.ilabel, arc.olabel, arc.weight, dst))
                    .unwrap();
            }
        }
    }
    out.freeze()
}

/// True when every state lies on an accepting path.
pub fn is_connected(fst: &Wfst) -> bool {
    connect(fst).num_states() == fst.num_states()
}

#[allow(unused)]
fn weight_one() -> Weight {
    Weight::ONE
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::SymbolTable;
    use crate::ops::paths::enumerate_paths;
    use crate::Weight;

    fn syms() -> std::sync::Arc<SymbolTable> {
        SymbolTable::from_symbols(["a", "b"]).into_shared()
    }

    #[test]
    fn dead_branch_removed() {
        let t = syms();
        let mut f = Wfst::new(t.clone(), t);
        let q0 = f.add_state();
        let q1 = f.add_state();
        let dead = f.add_state();
        f.add_arc(q0, Arc::new(1, 1, Weight(1.0), q1)).unwrap();
        f.add_arc(q0, Arc::new(2, 2, Weight(1.0), dead)).unwrap();
        f.set_final(q1, Weight::ONE).unwrap();
        let f = f.freeze();
        let c = connect(&f);
        assert_eq!(c.num_states(), 2);
        assert!(enumerate_paths(&c, 5).exact_eq(&enumerate_paths(&f, 5)));
    }

    #[test]
    fn connected_machine_unchanged() {
        let t = syms();
        let mut f = Wfst::new(t.clone(), t);
        let q0 = f.add_state();
        let q1 = f.add_state();
        f.add_arc(q0, Arc::new(1, 1, Weight(1.0), q1)).unwrap();
        f.add_arc(q1, Arc::new(2, 2, Weight(1.0), q0)).unwrap();
        f.set_final(q0, Weight(0.5)).unwrap();
        let f = f.freeze();
        let c = connect(&f);
        assert_eq!(c.num_states(), f.num_states());
        assert!(is_connected(&f));
    }

    #[test]
    fn no_final_reachable_becomes_empty() {
        let t = syms();
        let mut f = Wfst::new(t.clone(), t);
        let q0 = f.add_state();
        let q1 = f.add_state();
        f.add_arc(q0, Arc::new(1, 1, Weight(1.0), q1)).unwrap();
        let c = connect(&f.freeze());
        assert_eq!(c.num_states(), 0);
        assert_eq!(c.start(), None);
    }
}
