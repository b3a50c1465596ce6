//! Minimization of deterministic weighted transducers.
//!
//! Weights are pushed toward the initial state first, then arcs are encoded
//! as opaque `(ilabel, olabel, weight)` symbols and the automaton is reduced
//! by Moore partition refinement. The refinement computes a bisimulation
//! quotient, which preserves the path set exactly; on pushed deterministic
//! machines it is the canonical minimal automaton.

use crate::fst::{Arc, StateId, Wfst};
use crate::ops::connect::connect;
use crate::ops::determinize::is_deterministic_modulo_chains;
use crate::ops::push::push_weights;
use crate::{Error, Result};
use std::collections::HashMap;

/// Minimizes a deterministic transducer (residual epsilon chains from
/// determinization are accepted). Rejects inputs where some state has two
/// arcs sharing an input label.
pub fn minimize(fst: &Wfst) -> Result<Wfst> {
    if !is_deterministic_modulo_chains(fst) {
        return Err(Error::NotDeterministic);
    }
    let trimmed = connect(fst);
    if trimmed.num_states() == 0 {
        return Ok(trimmed);
    }
    let pushed = push_weights(&trimmed)?;

    let n = pushed.num_states();
    // Initial partition: by final weight (bit pattern; pushing normalizes).
    let mut class_of: Vec<u32> = vec![0; n];
    {
        let mut by_final: HashMap<u64, u32> = HashMap::new();
        for s in pushed.states() {
            let bits = pushed.final_weight(s).value().to_bits();
            let next = by_final.len() as u32;
            let c = *by_final.entry(bits).or_insert(next);
            class_of[s as usize] = c;
        }
    }

    // Refine by transition signatures until stable.
    loop {
        let mut sig_ids: HashMap<(u32, Vec<(u32, u32, u64, u32)>), u32> = HashMap::new();
        let mut next_classes: Vec<u32> = vec![0; n];
        for s in pushed.states() {
            let mut sig: Vec<(u32, u32, u64, u32)> = pushed
                .arcs(s)
                .iter()
                .map(|a| {
                    (
                        a.ilabel,
                        a.olabel,
                        a.weight.value().to_bits(),
                        class_of[a.nextstate as usize],
                    )
                })
                .collect();
            sig.sort_unstable();
            let key = (class_of[s as usize], sig);
            let fresh = sig_ids.len() as u32;
            let c = *sig_ids.entry(key).or_insert(fresh);
            next_classes[s as usize] = c;
        }
        let stable = sig_ids.len() as u32 == class_count(&class_of);
        class_of = next_classes;
        if stable {
            break;
        }
    }

    // Rebuild one state per class.
    let n_classes = class_count(&class_of) as usize;
    let mut out = Wfst::new(pushed.isyms().clone(), pushed.osyms().clone());
    for _ in 0..n_classes {
        out.add_state();
    }
    let start_class = class_of[pushed.start().unwrap() as usize];
    out.set_start(start_class)?;
    let mut done = vec![false; n_classes];
    for s in pushed.states() {
        let c = class_of[s as usize] as usize;
        if done[c] {
            continue;
        }
        done[c] = true;
        let fw = pushed.final_weight(s);
        if !fw.is_zero() {
            out.set_final(c as StateId, fw)?;
        }
        let mut arcs: Vec<Arc> = pushed
            .arcs(s)
            .iter()
            .map(|a| Arc::new(a.ilabel, a.olabel, a.weight, class_of[a.nextstate as usize]))
            .collect();
        // representative arc order: deterministic output
        arcs.sort_by_key(|a| (a.ilabel, a.olabel, a.nextstate));
        arcs.dedup_by(|a, b| a == b);
        for a in arcs {
            out.add_arc(c as StateId, a)?;
        }
    }
    Ok(out.freeze())
}

fn class_count(class_of: &[u32]) -> u32 {
    class_of.iter().copied().max().map_or(0, |m| m + 1)
}
