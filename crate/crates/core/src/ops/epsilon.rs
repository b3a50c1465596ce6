//! Local epsilon removal.
//!
//! Removes `eps:eps` arcs by splicing the target state's arcs into the
//! source where that does not grow the source's arc count: an `eps:eps` arc
//! to a state with at most one outgoing arc is replaced by the weighted copy
//! of that arc (finality transfers too), and `eps:eps` self-loops are simply
//! dropped since they only add min-dominated paths. There is no global
//! epsilon-closure expansion; decoding tolerates the epsilons that remain.

use crate::fst::{Arc, StateId, Wfst};
use crate::Weight;

/// One splice pass over all states; repeats until a fixpoint.
pub fn rm_epsilon_local(fst: &Wfst) -> Wfst {
    let mut out = fst.clone().thaw();
    let n = out.num_states();
    // Bounded by total eps-arc count per pass; each pass removes at least one.
    loop {
        let mut changed = false;
        for s in 0..n as StateId {
            let arcs = out.arcs(s).to_vec();
            let mut rebuilt: Vec<Arc> = Vec::with_capacity(arcs.len());
            let mut new_final = out.final_weight(s);
            for arc in arcs {
                let is_eps = arc.ilabel == 0 && arc.olabel == 0;
                if !is_eps {
                    rebuilt.push(arc);
                    continue;
                }
                if arc.nextstate == s {
                    // self-loop: contributes only dominated paths under min
                    changed = true;
                    continue;
                }
                let target_arcs = out.arcs(arc.nextstate);
                if target_arcs.len() > 1 {
                    rebuilt.push(arc); // splice would grow this state
                    continue;
                }
                let spliced: Vec<Arc> = target_arcs
                    .iter()
                    .map(|t| {
                        Arc::new(
                            t.ilabel,
                            t.olabel,
                            arc.weight.times(t.weight),
                            t.nextstate,
                        )
                    })
                    .collect();
                let tf = out.final_weight(arc.nextstate);
                if !tf.is_zero() {
                    new_final = new_final.plus(arc.weight.times(tf));
                }
                rebuilt.extend(spliced);
                changed = true;
            }
            crate::ops::compose::replace_arcs(&mut out, s, rebuilt);
            if !new_final.is_zero() {
                out.set_final(s, new_final).unwrap();
            }
        }
        if !changed {
            break;
        }
    }
    crate::ops::connect::connect(&out.freeze())
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

    fn syms() -> std::sync::Arc<SymbolTable> {
        SymbolTable::from_symbols(["a", "b", "x", "y"]).into_shared()
    }

    #[test]
    fn chain_splice() {
        let t = syms();
        let mut f = Wfst::new(t.clone(), t);
        let q0 = f.add_state();
        let q1 = f.add_state();
        let q2 = f.add_state();
        let q3 = f.add_state();
        f.add_arc(q0, Arc::new(1, 3, Weight(1.0), q1)).unwrap(); // a:x
        f.add_arc(q1, Arc::new(0, 0, Weight(0.5), q2)).unwrap(); // eps:eps
        f.add_arc(q2, Arc::new(2, 4, Weight(1.0), q3)).unwrap(); // b:y
        f.set_final(q3, Weight::ONE).unwrap();
        let f = f.freeze();
        let r = rm_epsilon_local(&f);
        assert!(enumerate_paths(&r, 6).exact_eq(&enumerate_paths(&f, 6)));
        // the eps arc is gone
        for s in r.states() {
            for a in r.arcs(s) {
                assert!(!(a.ilabel == 0 && a.olabel == 0));
            }
        }
    }

    #[test]
    fn zero_weight_eps_self_loop_removed() {
        let t = syms();
        let mut f = Wfst::new(t.clone(), t);
        let q0 = f.add_state();
        let q1 = f.add_state();
        f.add_arc(q0, Arc::new(0, 0, Weight(0.0), q0)).unwrap();
        f.add_arc(q0, Arc::new(1, 1, Weight(1.0), q1)).unwrap();
        f.set_final(q1, Weight::ONE).unwrap();
        let f = f.freeze();
        let r = rm_epsilon_local(&f);
        assert_eq!(r.arcs(0).len(), 1);
        // labeled paths identical (the loop only ever added dominated paths)
        assert!(enumerate_paths(&r, 4).exact_eq(&crate::ops::paths::path_set_labeled(&f, 4, 4)));
    }

    #[test]
    fn splice_blocked_when_it_would_grow_the_state() {
        let t = syms();
        let mut f = Wfst::new(t.clone(), t);
        let q0 = f.add_state();
        let q1 = f.add_state();
        let q2 = f.add_state();
        f.add_arc(q0, Arc::new(0, 0, Weight(0.0), q1)).unwrap();
        f.add_arc(q1, Arc::new(1, 1, Weight(1.0), q2)).unwrap();
        f.add_arc(q1, Arc::new(2, 2, Weight(2.0), q2)).unwrap();
        f.set_final(q2, Weight::ONE).unwrap();
        let f = f.freeze();
        let r = rm_epsilon_local(&f);
        // q0 still has exactly one arc and it is still the eps arc
        assert_eq!(r.arcs(0).len(), 1);
        assert_eq!(r.arcs(0)[0].ilabel, 0);
        assert!(enumerate_paths(&r, 6).exact_eq(&enumerate_paths(&f, 6)));
    }
}
