//! Grammar Replace: substitutes a nonterminal's arcs with copies of a body
//! transducer.

use crate::fst::{Arc, Label, StateId, Wfst};
use crate::{Error, Result};

/// Specification of a single-nonterminal replacement.
#[derive(Debug, Clone)]
pub struct ReplaceSpec<'a> {
    /// The grammar containing the nonterminal on its output side.
    pub root: &'a Wfst,
    /// Output-side label to expand.
    pub nonterminal: Label,
    /// Body transducer spliced in for each occurrence; must not mention the
    /// nonterminal itself (no recursion).
    pub body: &'a Wfst,
    /// When set, connector arcs created by the substitution carry this label
    /// on the input side instead of epsilon, so a matching self-loop in the
    /// left composition operand consumes them and lookahead tables stay
    /// informative.
    pub epsilon_alias: Option<Label>,
}

/// Expands every root arc whose output label is the nonterminal into a copy
/// of the body: the arc's source connects to the body start carrying the
/// original arc weight, and body final states connect to the arc's
/// destination carrying their final weights. Body labels pass through
/// unchanged; the rest of the root is untouched.
pub fn replace(spec: &ReplaceSpec) -> Result<Wfst> {
    let root = spec.root;
    let body = spec.body;
    let nt = spec.nonterminal;
    // validity: the nonterminal must not appear as a plain input label of the
    // root (acceptor-style arcs carrying it on both sides are the expected
    // shape), and must not occur inside the body at all.
    for s in root.states() {
        for a in root.arcs(s) {
            if a.ilabel == nt && a.olabel != nt {
                return Err(Error::Replace(
                    "nonterminal appears on the input side of the root".into(),
                ));
            }
            if a.olabel == nt && !(a.ilabel == nt || a.ilabel == 0) {
                return Err(Error::Replace(
                    "nonterminal arc carries a distinct input label".into(),
                ));
            }
        }
    }
    for s in body.states() {
        for a in body.arcs(s) {
            if a.ilabel == nt || a.olabel == nt {
                return Err(Error::Replace("nonterminal occurs inside the body".into()));
            }
        }
    }

    let connector = spec.epsilon_alias.unwrap_or(0);
    // output table must cover body outputs (new words); keep the wider table
    let osyms = if body.osyms().len() > root.osyms().len() {
        body.osyms().clone()
    } else {
        root.osyms().clone()
    };
    let isyms = if body.isyms().len() > root.isyms().len() {
        body.isyms().clone()
    } else {
        root.isyms().clone()
    };
    let mut out = Wfst::new(isyms, osyms);
    for _ in root.states() {
        out.add_state();
    }
    if let Some(start) = root.start() {
        out.set_start(start)?;
    }
    for s in root.states() {
        let fw = root.final_weight(s);
        if !fw.is_zero() {
            out.set_final(s, fw)?;
        }
    }
    for s in root.states() {
        for a in root.arcs(s) {
            if a.olabel != nt {
                out.add_arc(s, *a)?;
                continue;
            }
            // splice one fresh copy of the body per occurrence
            let Some(body_start) = body.start() else {
                continue; // empty body: the nonterminal path simply vanishes
            };
            let offset = out.num_states() as StateId;
            for _ in body.states() {
                out.add_state();
            }
            for bs in body.states() {
                for ba in body.arcs(bs) {
                    out.add_arc(
                        offset + bs,
                        Arc::new(ba.ilabel, ba.olabel, ba.weight, offset + ba.nextstate),
                    )?;
                }
            }
            // entry: original arc weight, connector input label
            out.add_arc(
                s,
                Arc::new(connector, 0, a.weight, offset + body_start),
            )?;
            // exits: body final weight, connector input label
            for (bs, bw) in body.finals() {
                out.add_arc(offset + bs, Arc::new(connector, 0, bw, a.nextstate))?;
            }
        }
    }
    Ok(out.freeze())
}
