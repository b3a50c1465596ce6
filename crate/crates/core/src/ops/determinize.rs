//! Weighted determinization by subset construction with residuals.
//!
//! Subset elements carry a residual weight and a residual output string.
//! Common weight (the min) and the common output prefix are emitted on the
//! incoming arc; multi-label emissions expand into chains, and final states
//! with pending outputs exit through epsilon chains. Inputs that violate the
//! twins property make subsets grow without bound, so a state budget turns
//! the blow-up into a clean error.

use crate::fst::{Arc, Label, StateId, Wfst};
use crate::{Error, Result, Weight};
use std::collections::{BTreeMap, HashMap};

/// Element key inside a subset: origin state plus pending output labels.
type ElementKey = (StateId, Vec<Label>);
/// Canonical subset: sorted element keys with their residual weights.
type Subset = Vec<(StateId, Vec<Label>, f64)>;
/// Hashable interning key: residual weights as bit patterns.
type SubsetKey = Vec<(StateId, Vec<Label>, u64)>;

fn subset_key(subset: &Subset) -> SubsetKey {
    subset
        .iter()
        .map(|(s, outs, w)| (*s, outs.clone(), w.to_bits()))
        .collect()
}

/// Determinizes with the default budget of `100 x` the input state count.
pub fn determinize(fst: &Wfst) -> Result<Wfst> {
    determinize_with_budget(fst, 100 * fst.num_states().max(1) + 16)
}

/// Determinizes with an explicit output-state budget.
pub fn determinize_with_budget(fst: &Wfst, budget: usize) -> Result<Wfst> {
    let mut out = Wfst::new(fst.isyms().clone(), fst.osyms().clone());
    let Some(start) = fst.start() else {
        return Ok(out.freeze());
    };

    let closure_limit = fst.num_states() * (fst.num_states() + 2) + 8;
    let over_budget = || Error::NonDeterminizable { budget };

    let start_subset = eps_closure(
        fst,
        vec![(start, Vec::new(), 0.0)],
        closure_limit,
        budget,
    )?;
    let (start_canonical, w_pre, lab_pre) = normalize(start_subset);

    let mut ids: HashMap<SubsetKey, StateId> = HashMap::new();
    let mut queue: Vec<Subset> = Vec::new();
    let first = out.add_state();
    ids.insert(subset_key(&start_canonical), first);
    queue.push(start_canonical);

    // Any weight or labels factored out of the start subset ride on an
    // entry chain before it.
    if w_pre != 0.0 || !lab_pre.is_empty() {
        let entry = out.add_state();
        emit_chain(&mut out, entry, 0, &lab_pre, Weight(w_pre), first)?;
        out.set_start(entry)?;
    } else {
        out.set_start(first)?;
    }

    while let Some(subset) = queue.pop() {
        let id = ids[&subset_key(&subset)];

        // Finality: group exits by pending output string, min weight each.
        let mut exits: BTreeMap<Vec<Label>, f64> = BTreeMap::new();
        for (s, outs, w) in &subset {
            let fw = fst.final_weight(*s);
            if !fw.is_zero() {
                let total = w + fw.value();
                let e = exits.entry(outs.clone()).or_insert(f64::INFINITY);
                *e = e.min(total);
            }
        }
        for (outs, w) in exits {
            if outs.is_empty() {
                out.set_final(id, Weight(w))?;
            } else {
                if out.num_states() + outs.len() > budget {
                    return Err(over_budget());
                }
                let last = emit_exit_chain(&mut out, id, &outs, Weight(w))?;
                out.set_final(last, Weight::ONE)?;
            }
        }

        // Group moves by input label.
        let mut by_label: BTreeMap<Label, Vec<(StateId, Vec<Label>, f64)>> = BTreeMap::new();
        for (s, outs, w) in &subset {
            for arc in fst.arcs(*s) {
                if arc.ilabel == 0 {
                    continue; // closure already absorbed epsilon moves
                }
                let mut next_outs = outs.clone();
                if arc.olabel != 0 {
                    next_outs.push(arc.olabel);
                }
                by_label.entry(arc.ilabel).or_default().push((
                    arc.nextstate,
                    next_outs,
                    w + arc.weight.value(),
                ));
            }
        }

        for (label, raw) in by_label {
            let closed = eps_closure(fst, raw, closure_limit, budget)?;
            let (canonical, w_pre, lab_pre) = normalize(closed);
            let key = subset_key(&canonical);
            let target = match ids.get(&key) {
                Some(&t) => t,
                None => {
                    if out.num_states() >= budget {
                        return Err(over_budget());
                    }
                    let t = out.add_state();
                    ids.insert(key, t);
                    queue.push(canonical);
                    t
                }
            };
            if out.num_states() + lab_pre.len() > budget {
                return Err(over_budget());
            }
            emit_chain(&mut out, id, label, &lab_pre, Weight(w_pre), target)?;
        }
    }
    Ok(out.freeze())
}

/// Epsilon closure over input-epsilon arcs, deduplicating elements by
/// `(state, pending outputs)` at the min weight. Errors when the closure
/// keeps producing new elements (an output-emitting epsilon cycle).
fn eps_closure(
    fst: &Wfst,
    seed: Vec<(StateId, Vec<Label>, f64)>,
    element_limit: usize,
    budget: usize,
) -> Result<Subset> {
    let mut best: HashMap<ElementKey, f64> = HashMap::new();
    let mut stack: Vec<(StateId, Vec<Label>, f64)> = Vec::new();
    for (s, outs, w) in seed {
        let key = (s, outs.clone());
        match best.get(&key) {
            Some(&b) if b <= w => {}
            _ => {
                best.insert(key, w);
                stack.push((s, outs, w));
            }
        }
    }
    while let Some((s, outs, w)) = stack.pop() {
        if best.get(&(s, outs.clone())).is_some_and(|&b| b < w) {
            continue;
        }
        for arc in fst.arcs(s) {
            if arc.ilabel != 0 {
                continue;
            }
            let mut next_outs = outs.clone();
            if arc.olabel != 0 {
                next_outs.push(arc.olabel);
            }
            let nw = w + arc.weight.value();
            let key = (arc.nextstate, next_outs.clone());
            let improved = match best.get(&key) {
                Some(&b) => nw < b - 1e-15,
                None => true,
            };
            if improved {
                if best.len() >= element_limit {
                    return Err(Error::NonDeterminizable { budget });
                }
                best.insert(key, nw);
                stack.push((arc.nextstate, next_outs, nw));
            }
        }
    }
    let mut subset: Subset = best
        .into_iter()
        .map(|((s, outs), w)| (s, outs, w))
        .collect();
    subset.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    Ok(subset)
}

/// Factors the min weight and the common output prefix out of a subset.
fn normalize(mut subset: Subset) -> (Subset, f64, Vec<Label>) {
    let w_min = subset
        .iter()
        .map(|(_, _, w)| *w)
        .fold(f64::INFINITY, f64::min);
    let mut prefix: Option<Vec<Label>> = None;
    for (_, outs, _) in &subset {
        prefix = Some(match prefix {
            None => outs.clone(),
            Some(p) => p
                .iter()
                .zip(outs.iter())
                .take_while(|(a, b)| a == b)
                .map(|(a, _)| *a)
                .collect(),
        });
    }
    let prefix = prefix.unwrap_or_default();
    for (_, outs, w) in &mut subset {
        *w -= w_min;
        outs.drain(..prefix.len());
    }
    subset.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    (subset, w_min, prefix)
}

/// Emits `from --label/weight--> ... --> to` carrying `olabels`, creating
/// intermediate states when more than one output label is pending.
fn emit_chain(
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

/// Exit chain for a final residual; returns the last state of the chain.
fn emit_exit_chain(
    out: &mut Wfst,
    from: StateId,
    olabels: &[Label],
    weight: Weight,
) -> Result<StateId> {
    let mut prev = from;
    for (i, l) in olabels.iter().enumerate() {
        let next = out.add_state();
        let w = if i == 0 { weight } else { Weight::ONE };
        out.add_arc(prev, Arc::new(0, *l, w, next))?;
        prev = next;
    }
    Ok(prev)
}

/// Relaxed input-determinism: unique nonzero input labels per state and at
/// most one input-epsilon arc (the residual chains determinization emits).
pub fn is_deterministic_modulo_chains(fst: &Wfst) -> bool {
    for s in fst.states() {
        let mut seen = std::collections::HashSet::new();
        let mut eps = 0usize;
        for a in fst.arcs(s) {
            if a.ilabel == 0 {
                eps += 1;
                if eps > 1 {
                    return false;
                }
            } else if !seen.insert(a.ilabel) {
                return false;
            }
        }
    }
    true
}
