//! Text serialization.
//!
//! One arc per line: `src dst isym osym weight`; final states as
//! `state weight`. The first arc line's source is the start state. Symbols
//! are resolved through the transducer's tables, and weights print as the
//! shortest decimal that round-trips the underlying 64-bit value.

use super::{Arc, StateId, SymbolTable, Wfst};
use crate::{Error, Result, Weight};
use std::fmt::Write as _;
use std::sync::Arc as SharedArc;

/// Renders a transducer in the text format.
pub fn write_text(fst: &Wfst) -> String {
    let mut out = String::new();
    let Some(start) = fst.start() else {
        return out;
    };
    // Start state's lines come first; remaining states in id order.
    let mut order: Vec<StateId> = Vec::with_capacity(fst.num_states());
    order.push(start);
    order.extend(fst.states().filter(|&s| s != start));
    let sym = |t: &SymbolTable, l| t.symbol(l).unwrap_or("?").to_string();
    for s in &order {
        for arc in fst.arcs(*s) {
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                s,
                arc.nextstate,
                sym(fst.isyms(), arc.ilabel),
                sym(fst.osyms(), arc.olabel),
                arc.weight
            );
        }
    }
    for s in &order {
        let w = fst.final_weight(*s);
        if !w.is_zero() {
            let _ = writeln!(out, "{s} {w}");
        }
    }
    out
}

/// Parses the text format against the given symbol tables. Reports malformed
/// lines (wrong field count, unknown symbol, bad state id) with their
/// 1-based line number. Returns a frozen transducer.
pub fn read_text(
    text: &str,
    isyms: SharedArc<SymbolTable>,
    osyms: SharedArc<SymbolTable>,
) -> Result<Wfst> {
    let mut fst = Wfst::new(isyms.clone(), osyms.clone());
    let mut start: Option<StateId> = None;
    let err = |line: usize, msg: String| Error::Parse { line, msg };

    let ensure_state = |fst: &mut Wfst, s: StateId| {
        while fst.num_states() <= s as usize {
            fst.add_state();
        }
    };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_state = |f: &str| -> Result<StateId> {
            f.parse::<StateId>()
                .map_err(|_| err(lineno, format!("bad state id `{f}`")))
        };
        match fields.len() {
            5 => {
                let src = parse_state(fields[0])?;
                let dst = parse_state(fields[1])?;
                let ilabel = isyms
                    .label(fields[2])
                    .ok_or_else(|| err(lineno, format!("unknown input symbol `{}`", fields[2])))?;
                let olabel = osyms
                    .label(fields[3])
                    .ok_or_else(|| err(lineno, format!("unknown output symbol `{}`", fields[3])))?;
                let weight: Weight = fields[4]
                    .parse()
                    .map_err(|_| err(lineno, format!("bad weight `{}`", fields[4])))?;
                ensure_state(&mut fst, src.max(dst));
                if start.is_none() {
                    start = Some(src);
                }
                fst.add_arc(src, Arc::new(ilabel, olabel, weight, dst))
                    .map_err(|e| err(lineno, e.to_string()))?;
            }
            2 => {
                let s = parse_state(fields[0])?;
                let weight: Weight = fields[1]
                    .parse()
                    .map_err(|_| err(lineno, format!("bad weight `{}`", fields[1])))?;
                ensure_state(&mut fst, s);
                if start.is_none() {
                    start = Some(s);
                }
                fst.set_final(s, weight)
                    .map_err(|e| err(lineno, e.to_string()))?;
            }
            n => {
                return Err(err(
                    lineno,
                    format!("expected 5 fields (arc) or 2 (final), got {n}"),
                ))
            }
        }
    }
    if let Some(s) = start {
        fst.set_start(s)?;
    }
    Ok(fst.freeze())
}
