//! Offline weighted composition.
//!
//! The product is driven by the standard epsilon-sequencing filter: between
//! two matched labels, all left-side output-epsilon moves are taken before
//! any right-side input-epsilon moves, and the commuted orders (as well as
//! the simultaneous epsilon match) are blocked, so no epsilon interleaving is
//! represented twice.
//!
//! This implementation is deliberately independent of the lazy composition
//! session in [`crate::compose_online`]: the two are compared against each
//! other in tests, so neither may delegate to the other.

use crate::fst::{Arc, SortSide, StateId, Wfst};
use crate::{Error, Result};
use std::collections::HashMap;

/// Filter states of the epsilon-sequencing filter.
const FILTER_FREE: u8 = 0; // any move allowed
const FILTER_RIGHT_EPS: u8 = 1; // right epsilon taken; left-alone blocked

/// Composes two transducers. Requires `a.osyms` compatible with `b.isyms`;
/// uses sorted-arc lookup when either operand carries the matching sort flag.
pub fn compose(a: &Wfst, b: &Wfst) -> Result<Wfst> {
    if !a.osyms().compatible(b.isyms()) {
        return Err(Error::SymbolTableMismatch(
            "left output table differs from right input table".into(),
        ));
    }
    let mut out = Wfst::new(a.isyms().clone(), b.osyms().clone());
    let (Some(sa), Some(sb)) = (a.start(), b.start()) else {
        return Ok(out.freeze());
    };

    let mut ids: HashMap<(StateId, StateId, u8), StateId> = HashMap::new();
    let mut stack: Vec<(StateId, StateId, u8)> = Vec::new();

    let start_key = (sa, sb, FILTER_FREE);
    let start_id = out.add_state();
    ids.insert(start_key, start_id);
    stack.push(start_key);

    let b_sorted = b.properties().ilabel_sorted;

    while let Some(key) = stack.pop() {
        let (s1, s2, f) = key;
        let id = ids[&key];

        let fw = a.final_weight(s1).times(b.final_weight(s2));
        if !fw.is_zero() {
            out.set_final(id, fw)?;
        }

        let mut intern =
            |out: &mut Wfst, stack: &mut Vec<(StateId, StateId, u8)>, key: (StateId, StateId, u8)| {
                *ids.entry(key).or_insert_with(|| {
                    stack.push(key);
                    out.add_state()
                })
            };

        for arc1 in a.arcs(s1) {
            if arc1.olabel == 0 {
                // left-alone move: only before any right epsilon
                if f == FILTER_FREE {
                    let next = intern(&mut out, &mut stack, (arc1.nextstate, s2, FILTER_FREE));
                    out.add_arc(id, Arc::new(arc1.ilabel, 0, arc1.weight, next))?;
                }
                continue;
            }
            // matched moves
            let candidates: &[Arc] = if b_sorted {
                b.arcs_with_ilabel(s2, arc1.olabel)
            } else {
                b.arcs(s2)
            };
            for arc2 in candidates {
                if arc2.ilabel != arc1.olabel {
                    continue;
                }
                let next = intern(
                    &mut out,
                    &mut stack,
                    (arc1.nextstate, arc2.nextstate, FILTER_FREE),
                );
                out.add_arc(
                    id,
                    Arc::new(
                        arc1.ilabel,
                        arc2.olabel,
                        arc1.weight.times(arc2.weight),
                        next,
                    ),
                )?;
            }
        }
        // right-alone moves on input-epsilon arcs of b
        for arc2 in b.arcs(s2) {
            if arc2.ilabel != 0 {
                continue;
            }
            let next = intern(&mut out, &mut stack, (s1, arc2.nextstate, FILTER_RIGHT_EPS));
            out.add_arc(id, Arc::new(0, arc2.olabel, arc2.weight, next))?;
        }
    }
    Ok(out.freeze())
}

/// Composes after input-sorting the right operand; convenience for call
/// sites that build operands on the fly.
pub fn compose_sorted(a: &Wfst, b: &Wfst) -> Result<Wfst> {
    compose(a, &b.arc_sort(SortSide::Input))
}

/// Relabels the given input labels to epsilon. Used to clear auxiliary
/// symbols (`#0` and friends) from a prepared graph's input side once
/// optimization no longer needs them; weights and output labels are
/// untouched.
pub fn clear_input_labels(fst: &Wfst, labels: &[crate::fst::Label]) -> Wfst {
    let set: std::collections::HashSet<_> = labels.iter().copied().collect();
    let mut out = fst.clone().thaw();
    for s in 0..out.num_states() as StateId {
        let arcs: Vec<Arc> = out.arcs(s).to_vec();
        let rewritten: Vec<Arc> = arcs
            .into_iter()
            .map(|mut a| {
                if set.contains(&a.ilabel) {
                    a.ilabel = 0;
                }
                a
            })
            .collect();
        replace_arcs(&mut out, s, rewritten);
    }
    out.freeze()
}

pub(crate) fn replace_arcs(fst: &mut Wfst, state: StateId, arcs: Vec<Arc>) {
    fst.set_arcs_internal(state, arcs);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::SymbolTable;
    use crate::ops::paths::enumerate_paths;
    use crate::Weight;

    fn syms(n: usize) -> std::sync::Arc<SymbolTable> {
        SymbolTable::from_symbols((1..=n).map(|i| format!("s{i}"))).into_shared()
    }

    #[test]
    fn single_path_join() {
        let t = syms(4);
        let mut a = Wfst::new(t.clone(), t.clone());
        let q0 = a.add_state();
        let q1 = a.add_state();
        a.add_arc(q0, Arc::new(1, 2, Weight(1.0), q1)).unwrap();
        a.set_final(q1, Weight::ONE).unwrap();
        let a = a.freeze();

        let mut b = Wfst::new(t.clone(), t.clone());
        let q0 = b.add_state();
        let q1 = b.add_state();
        b.add_arc(q0, Arc::new(2, 3, Weight(2.0), q1)).unwrap();
        b.set_final(q1, Weight::ONE).unwrap();
        let b = b.freeze();

        let c = compose(&a, &b).unwrap();
        let ps = enumerate_paths(&c, 5);
        assert_eq!(ps.len(), 1);
        assert_eq!(ps.get(&[1], &[3]), Some(Weight(3.0)));
    }

    #[test]
    fn empty_join_when_labels_disagree() {
        let t = syms(4);
        let mut a = Wfst::new(t.clone(), t.clone());
        let q0 = a.add_state();
        let q1 = a.add_state();
        a.add_arc(q0, Arc::new(1, 2, Weight(1.0), q1)).unwrap();
        a.set_final(q1, Weight::ONE).unwrap();
        let mut b = Wfst::new(t.clone(), t.clone());
        let q0 = b.add_state();
        let q1 = b.add_state();
        b.add_arc(q0, Arc::new(3, 3, Weight(1.0), q1)).unwrap();
        b.set_final(q1, Weight::ONE).unwrap();
        let c = compose(&a.freeze(), &b.freeze()).unwrap();
        assert!(enumerate_paths(&c, 5).is_empty());
    }

    #[test]
    fn symbol_table_mismatch_is_an_error() {
        let ta = SymbolTable::from_symbols(["a"]).into_shared();
        let tb = SymbolTable::from_symbols(["b"]).into_shared();
        let a = Wfst::new(ta.clone(), ta).freeze();
        let b = Wfst::new(tb.clone(), tb).freeze();
        assert!(matches!(
            compose(&a, &b),
            Err(Error::SymbolTableMismatch(_))
        ));
    }
}
