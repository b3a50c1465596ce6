//! Weight and label pushing toward the initial state.
//!
//! Pushing reweights (or relabels) paths so that weight (or output labels)
//! accumulate as early as possible, leaving every path's total weight and
//! label sequence unchanged.

use crate::fst::{Arc, Label, StateId, Wfst};
use crate::ops::paths::distance_to_final;
use crate::{Error, Result, Weight};

/// Weight pushing: each state's potential (its shortest distance to a final
/// state) is shifted onto incoming arcs, and the start state's own potential
/// is re-applied to its outgoing arcs and final weight so totals are
/// preserved exactly.
///
/// Errors when some state has no finite distance to a final state; run
/// [`crate::ops::connect`] first.
pub fn push_weights(fst: &Wfst) -> Result<Wfst> {
    let Some(start) = fst.start() else {
        return Ok(fst.clone());
    };
    let dist = distance_to_final(fst);
    for s in fst.states() {
        if dist[s as usize].is_zero() {
            return Err(Error::NotCoaccessible(s));
        }
    }
    // When paths can revisit the start state, the leftover start potential
    // must live on a dedicated entry arc rather than on every departure.
    let start_has_incoming = fst
        .states()
        .any(|s| fst.arcs(s).iter().any(|a| a.nextstate == start));
    let fold_into_start_arcs = !start_has_incoming;

    let mut out = fst.clone().thaw();
    for s in fst.states() {
        let v_s = dist[s as usize];
        let rebuilt: Vec<Arc> = fst
            .arcs(s)
            .iter()
            .map(|a| {
                let mut w = a.weight.times(dist[a.nextstate as usize]).divide(v_s);
                if s == start && fold_into_start_arcs {
                    w = w.times(v_s);
                }
                Arc::new(a.ilabel, a.olabel, w, a.nextstate)
            })
            .collect();
        crate::ops::compose::replace_arcs(&mut out, s, rebuilt);
        let fw = fst.final_weight(s);
        if !fw.is_zero() {
            let mut w = fw.divide(v_s);
            if s == start && fold_into_start_arcs {
                w = w.times(v_s);
            }
            out.set_final(s, w).unwrap();
        }
    }
    if !fold_into_start_arcs && !dist[start as usize].is_one() {
        let entry = out.add_state();
        out.add_arc(entry, Arc::new(0, 0, dist[start as usize], start))
            .unwrap();
        out.set_start(entry).unwrap();
    }
    Ok(out.freeze())
}

/// Label pushing: output labels move as early along each path as the set of
/// continuations permits. Every state's common output prefix is emitted on
/// arrival instead; arcs that then carry more than one label are expanded
/// into chains through fresh states.
pub fn push_labels(fst: &Wfst) -> Result<Wfst> {
    let Some(start) = fst.start() else {
        return Ok(fst.clone());
    };
    let lcp = common_output_prefixes(fst);
    let start_has_incoming = fst
        .states()
        .any(|s| fst.arcs(s).iter().any(|a| a.nextstate == start));
    let fold_into_start_arcs = !start_has_incoming;

    let mut out = Wfst::new(fst.isyms().clone(), fst.osyms().clone());
    for _ in fst.states() {
        out.add_state();
    }
    out.set_start(start)?;
    for s in fst.states() {
        let fw = fst.final_weight(s);
        if !fw.is_zero() {
            // finals force the state prefix to be empty, so nothing to emit
            out.set_final(s, fw)?;
        }
        for a in fst.arcs(s) {
            // labels determined at this arc: lcp(s)^-1 · olabel · lcp(next),
            // with the start state's pending prefix prepended on its arcs
            let mut full: Vec<Label> = Vec::new();
            if a.olabel != 0 {
                full.push(a.olabel);
            }
            full.extend_from_slice(&lcp[a.nextstate as usize]);
            let strip = if s == start && fold_into_start_arcs {
                0
            } else {
                lcp[s as usize].len()
            };
            // arcs into dead states can fall short of the prefix; they carry
            // no accepting path, so emitting their remainder is arbitrary
            let strip = strip.min(full.len());
            let emitted = full[strip..].to_vec();
            add_chain(&mut out, s, a.ilabel, &emitted, a.weight, a.nextstate)?;
        }
    }
    if !fold_into_start_arcs && !lcp[start as usize].is_empty() {
        let entry = out.add_state();
        let pending = lcp[start as usize].clone();
        add_chain(&mut out, entry, 0, &pending, Weight::ONE, start)?;
        out.set_start(entry)?;
    }
    Ok(out.freeze())
}

fn add_chain(
    out: &mut Wfst,
    from: StateId,
    ilabel: Label,
    olabels: &[Label],
    weight: Weight,
    to: StateId,
) -> Result<()> {
    match olabels {
        [] => out.add_arc(from, Arc::new(ilabel, 0, weight, to)),
        [only] => out.add_arc(from, Arc::new(ilabel, *only, weight, to)),
        [first, rest @ ..] => {
            let mut prev = out.add_state();
            out.add_arc(from, Arc::new(ilabel, *first, weight, prev))?;
            for (i, l) in rest.iter().enumerate() {
                let next = if i + 1 == rest.len() {
                    to
                } else {
                    out.add_state()
                };
                out.add_arc(prev, Arc::new(0, *l, Weight::ONE, next))?;
                prev = next;
            }
            Ok(())
        }
    }
}

/// For each state, the longest common prefix of the output sequences of all
/// accepting paths leaving it. Kleene iteration over the prefix lattice;
/// values only shrink once finite, so it terminates.
fn common_output_prefixes(fst: &Wfst) -> Vec<Vec<Label>> {
    let n = fst.num_states();
    // None = unknown (top of the lattice)
    let mut lcp: Vec<Option<Vec<Label>>> = vec![None; n];
    loop {
        let mut changed = false;
        for s in fst.states() {
            let mut meet: Option<Vec<Label>> = None;
            if fst.is_final(s) {
                meet = Some(Vec::new());
            }
            for a in fst.arcs(s) {
                let mut cand: Vec<Label> = Vec::new();
                if a.olabel != 0 {
                    cand.push(a.olabel);
                }
                match &lcp[a.nextstate as usize] {
                    None => continue, // unknown successor contributes nothing yet
                    Some(next) => cand.extend_from_slice(next),
                }
                meet = Some(match meet {
                    None => cand,
                    Some(cur) => lcp_of(&cur, &cand),
                });
            }
            if let Some(m) = meet {
                let update = match &lcp[s as usize] {
                    None => true,
                    Some(cur) => *cur != m,
                };
                if update {
                    lcp[s as usize] = Some(m);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    lcp.into_iter().map(|v| v.unwrap_or_default()).collect()
}

fn lcp_of(a: &[Label], b: &[Label]) -> Vec<Label> {
    a.iter()
        .zip(b.iter())
        .take_while(|(x, y)| x == y)
        .map(|(x, _)| *x)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::SymbolTable;
    use crate::ops::paths::enumerate_paths;

    fn syms() -> std::sync::Arc<SymbolTable> {
        SymbolTable::from_symbols(["a", "b", "w"]).into_shared()
    }

    fn chain(weights: &[f64]) -> Wfst {
        let t = syms();
        let mut f = Wfst::new(t.clone(), t);
        let mut prev = f.add_state();
        for &w in weights {
            let next = f.add_state();
            f.add_arc(prev, Arc::new(1, 1, Weight(w), next)).unwrap();
            prev = next;
        }
        f.set_final(prev, Weight::ONE).unwrap();
        f.freeze()
    }

    #[test]
    fn potential_shift_toward_initial() {
        let f = chain(&[0.0, 0.0, 5.0]);
        let p = push_weights(&f).unwrap();
        let ws: Vec<f64> = (0..3)
            .map(|s| p.arcs(s as StateId)[0].weight.value())
            .collect();
        assert_eq!(ws, vec![5.0, 0.0, 0.0]);
        assert!(enumerate_paths(&p, 5).exact_eq(&enumerate_paths(&f, 5)));
    }

    #[test]
    fn non_coaccessible_state_directs_to_connect() {
        let t = syms();
        let mut f = Wfst::new(t.clone(), t);
        let q0 = f.add_state();
        let q1 = f.add_state();
        let dead = f.add_state();
        f.add_arc(q0, Arc::new(1, 1, Weight(1.0), q1)).unwrap();
        f.add_arc(q0, Arc::new(2, 2, Weight(1.0), dead)).unwrap();
        f.set_final(q1, Weight::ONE).unwrap();
        assert!(matches!(
            push_weights(&f.freeze()),
            Err(Error::NotCoaccessible(2))
        ));
    }

    #[test]
    fn label_advance_on_delayed_path() {
        let t = syms();
        let mut f = Wfst::new(t.clone(), t);
        let q0 = f.add_state();
        let q1 = f.add_state();
        let q2 = f.add_state();
        let q3 = f.add_state();
        f.add_arc(q0, Arc::new(1, 0, Weight::ONE, q1)).unwrap();
        f.add_arc(q1, Arc::new(1, 0, Weight::ONE, q2)).unwrap();
        f.add_arc(q2, Arc::new(1, 3, Weight::ONE, q3)).unwrap();
        f.set_final(q3, Weight::ONE).unwrap();
        let f = f.freeze();
        let p = push_labels(&f).unwrap();
        let labels: Vec<Label> = (0..3).map(|s| p.arcs(s as StateId)[0].olabel).collect();
        assert_eq!(labels, vec![3, 0, 0]);
        assert!(enumerate_paths(&p, 6).exact_eq(&enumerate_paths(&f, 6)));
    }
}
