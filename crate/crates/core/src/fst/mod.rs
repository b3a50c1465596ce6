//! Core transducer representation.
//!
//! A [`Wfst`] is mutable while being built and immutable after
//! [`Wfst::freeze`], which also computes cached property flags (acceptor,
//! sortedness, determinism). State ids are dense; deleted states are not
//! supported — [`crate::ops::connect`] produces a fresh transducer with
//! remapped ids instead, which keeps state-pair arithmetic in the online
//! composition layer simple.

mod symbols;
mod text_io;

pub mod binary_io;

pub use symbols::{is_auxiliary, phone_word, SymbolTable, EPS, HASH0, PHONE_WORD_PREFIX, UNKNOWN};
pub use text_io::{read_text, write_text};

use crate::{Error, Result, Weight};
use std::sync::Arc as SharedArc;

/// Integer label; 0 is epsilon on either side.
pub type Label = u32;
/// Dense state identifier.
pub type StateId = u32;

/// A single transition: input label, output label, weight, target state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub ilabel: Label,
    pub olabel: Label,
    pub weight: Weight,
    pub nextstate: StateId,
}

impl Arc {
    pub fn new(ilabel: Label, olabel: Label, weight: Weight, nextstate: StateId) -> Self {
        Arc {
            ilabel,
            olabel,
            weight,
            nextstate,
        }
    }
}

/// Which arc label a sort or match refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortSide {
    Input,
    Output,
}

/// Property flags computed at freeze time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Properties {
    /// Every arc has `ilabel == olabel`.
    pub acceptor: bool,
    /// Arcs at every state are ordered by input label.
    pub ilabel_sorted: bool,
    /// Arcs at every state are ordered by output label.
    pub olabel_sorted: bool,
    /// No state has two arcs sharing an input label, and no state has an
    /// input-epsilon arc alongside other arcs.
    pub deterministic: bool,
}

/// A weighted finite-state transducer over the tropical semiring.
#[derive(Debug, Clone)]
pub struct Wfst {
    states: Vec<Vec<Arc>>,
    finals: Vec<Weight>,
    start: Option<StateId>,
    isyms: SharedArc<SymbolTable>,
    osyms: SharedArc<SymbolTable>,
    frozen: bool,
    props: Properties,
}

impl Wfst {
    /// Empty transducer over the given tables.
    pub fn new(isyms: SharedArc<SymbolTable>, osyms: SharedArc<SymbolTable>) -> Self {
        Wfst {
            states: Vec::new(),
            finals: Vec::new(),
            start: None,
            isyms,
            osyms,
            frozen: false,
            props: Properties::default(),
        }
    }

    /// Acceptor-style constructor sharing one table on both sides.
    pub fn new_acceptor(syms: SharedArc<SymbolTable>) -> Self {
        Wfst::new(syms.clone(), syms)
    }

    pub fn isyms(&self) -> &SharedArc<SymbolTable> {
        &self.isyms
    }

    pub fn osyms(&self) -> &SharedArc<SymbolTable> {
        &self.osyms
    }

    /// Replaces the symbol tables (used after relabeling or table extension).
    pub fn set_symbols(&mut self, isyms: SharedArc<SymbolTable>, osyms: SharedArc<SymbolTable>) {
        self.isyms = isyms;
        self.osyms = osyms;
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.states.iter().map(Vec::len).sum()
    }

    pub fn start(&self) -> Option<StateId> {
        self.start
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Cached property flags; meaningful only after freeze.
    pub fn properties(&self) -> Properties {
        self.props
    }

    fn check_mut(&self) -> Result<()> {
        if self.frozen {
            Err(Error::Frozen)
        } else {
            Ok(())
        }
    }

    fn check_state(&self, s: StateId) -> Result<()> {
        if (s as usize) < self.states.len() {
            Ok(())
        } else {
            Err(Error::InvalidState(s))
        }
    }

    /// Adds a state and returns its id. The first state becomes the start
    /// state unless one was set explicitly.
    pub fn add_state(&mut self) -> StateId {
        debug_assert!(!self.frozen, "mutating a frozen Wfst");
        let id = self.states.len() as StateId;
        self.states.push(Vec::new());
        self.finals.push(Weight::ZERO);
        if self.start.is_none() {
            self.start = Some(id);
        }
        id
    }

    pub fn set_start(&mut self, s: StateId) -> Result<()> {
        self.check_mut()?;
        self.check_state(s)?;
        self.start = Some(s);
        Ok(())
    }

    pub fn add_arc(&mut self, from: StateId, arc: Arc) -> Result<()> {
        self.check_mut()?;
        self.check_state(from)?;
        self.check_state(arc.nextstate)?;
        self.states[from as usize].push(arc);
        Ok(())
    }

    pub fn set_final(&mut self, s: StateId, weight: Weight) -> Result<()> {
        self.check_mut()?;
        self.check_state(s)?;
        self.finals[s as usize] = weight;
        Ok(())
    }

    /// Wholesale arc-list replacement for a state. Internal to algorithm
    /// implementations working on thawed values; there is no public arc
    /// deletion.
    pub(crate) fn set_arcs_internal(&mut self, s: StateId, arcs: Vec<Arc>) {
        debug_assert!(!self.frozen);
        self.states[s as usize] = arcs;
    }

    /// Final weight of a state; `Weight::ZERO` means non-final.
    pub fn final_weight(&self, s: StateId) -> Weight {
        self.finals
            .get(s as usize)
            .copied()
            .unwrap_or(Weight::ZERO)
    }

    pub fn is_final(&self, s: StateId) -> bool {
        !self.final_weight(s).is_zero()
    }

    pub fn arcs(&self, s: StateId) -> &[Arc] {
        &self.states[s as usize]
    }

    /// Iterates `(state, final_weight)` for final states.
    pub fn finals(&self) -> impl Iterator<Item = (StateId, Weight)> + '_ {
        self.finals
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(s, w)| (s as StateId, *w))
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.states.len() as StateId
    }

    /// Freezes the transducer: computes property flags and rejects any
    /// further mutation.
    pub fn freeze(mut self) -> Wfst {
        self.props = self.scan_properties();
        self.frozen = true;
        self
    }

    /// Reopens a frozen transducer for further construction by value.
    pub fn thaw(mut self) -> Wfst {
        self.frozen = false;
        self.props = Properties::default();
        self
    }

    /// Full property scan; freeze caches this, tests call it directly to
    /// cross-check the cache.
    pub fn scan_properties(&self) -> Properties {
        let mut p = Properties {
            acceptor: true,
            ilabel_sorted: true,
            olabel_sorted: true,
            deterministic: true,
        };
        for arcs in &self.states {
            let mut seen_ilabels = std::collections::HashSet::new();
            for (i, arc) in arcs.iter().enumerate() {
                if arc.ilabel != arc.olabel {
                    p.acceptor = false;
                }
                if i > 0 {
                    if arcs[i - 1].ilabel > arc.ilabel {
                        p.ilabel_sorted = false;
                    }
                    if arcs[i - 1].olabel > arc.olabel {
                        p.olabel_sorted = false;
                    }
                }
                if !seen_ilabels.insert(arc.ilabel) {
                    p.deterministic = false;
                }
                if arc.ilabel == 0 && arcs.len() > 1 {
                    p.deterministic = false;
                }
            }
        }
        p
    }

    /// Returns a copy with arcs at every state ordered by the chosen label.
    /// The result is frozen with the corresponding sort flag set.
    pub fn arc_sort(&self, side: SortSide) -> Wfst {
        let mut out = self.clone();
        out.frozen = false;
        for arcs in &mut out.states {
            match side {
                SortSide::Input => {
                    arcs.sort_by(|a, b| (a.ilabel, a.olabel, a.nextstate).cmp(&(
                        b.ilabel,
                        b.olabel,
                        b.nextstate,
                    )))
                }
                SortSide::Output => {
                    arcs.sort_by(|a, b| (a.olabel, a.ilabel, a.nextstate).cmp(&(
                        b.olabel,
                        b.ilabel,
                        b.nextstate,
                    )))
                }
            }
        }
        out.freeze()
    }

    /// Binary search over ilabel-sorted arcs; falls back to a scan when the
    /// sorted flag is absent.
    pub fn arcs_with_ilabel(&self, s: StateId, label: Label) -> &[Arc] {
        let arcs = self.arcs(s);
        if self.props.ilabel_sorted {
            let lo = arcs.partition_point(|a| a.ilabel < label);
            let hi = arcs.partition_point(|a| a.ilabel <= label);
            &arcs[lo..hi]
        } else {
            // Unsorted: callers iterate the full slice and filter.
            arcs
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms(list: &[&str]) -> SharedArc<SymbolTable> {
        SymbolTable::from_symbols(list).into_shared()
    }

    #[test]
    fn single_path_construction() {
        let s = syms(&["a", "x"]);
        let mut f = Wfst::new(s.clone(), s);
        let q0 = f.add_state();
        let q1 = f.add_state();
        f.add_arc(q0, Arc::new(1, 2, Weight(1.0), q1)).unwrap();
        f.set_final(q1, Weight(0.0)).unwrap();
        let f = f.freeze();
        assert_eq!(f.start(), Some(0));
        assert_eq!(f.arcs(0).len(), 1);
        assert!(f.final_weight(1).is_one());
    }

    #[test]
    fn mutation_after_freeze_rejected() {
        let s = syms(&["a"]);
        let mut f = Wfst::new(s.clone(), s);
        let q0 = f.add_state();
        f.set_final(q0, Weight::ONE).unwrap();
        let mut f = f.freeze();
        assert!(matches!(
            f.add_arc(0, Arc::new(1, 1, Weight::ONE, 0)),
            Err(Error::Frozen)
        ));
        assert!(matches!(f.set_final(0, Weight::ONE), Err(Error::Frozen)));
        assert!(matches!(f.set_start(0), Err(Error::Frozen)));
    }

    #[test]
    fn invalid_state_rejected() {
        let s = syms(&["a"]);
        let mut f = Wfst::new(s.clone(), s);
        f.add_state();
        f.add_state();
        let err = f.add_arc(0, Arc::new(1, 1, Weight::ONE, 99)).unwrap_err();
        assert!(matches!(err, Error::InvalidState(99)));
    }

    #[test]
    fn determinism_flag_definition() {
        let s = syms(&["a", "b"]);
        // two arcs sharing an ilabel -> not deterministic
        let mut f = Wfst::new(s.clone(), s.clone());
        let q0 = f.add_state();
        let q1 = f.add_state();
        f.add_arc(q0, Arc::new(1, 1, Weight(1.0), q1)).unwrap();
        f.add_arc(q0, Arc::new(1, 1, Weight(2.0), q1)).unwrap();
        f.set_final(q1, Weight::ONE).unwrap();
        assert!(!f.freeze().properties().deterministic);

        // lone input-eps arc is fine; eps alongside others is not
        let mut g = Wfst::new(s.clone(), s.clone());
        let q0 = g.add_state();
        let q1 = g.add_state();
        g.add_arc(q0, Arc::new(0, 1, Weight::ONE, q1)).unwrap();
        g.set_final(q1, Weight::ONE).unwrap();
        assert!(g.freeze().properties().deterministic);

        let mut h = Wfst::new(s.clone(), s);
        let q0 = h.add_state();
        let q1 = h.add_state();
        h.add_arc(q0, Arc::new(0, 1, Weight::ONE, q1)).unwrap();
        h.add_arc(q0, Arc::new(2, 2, Weight::ONE, q1)).unwrap();
        h.set_final(q1, Weight::ONE).unwrap();
        assert!(!h.freeze().properties().deterministic);
    }

    #[test]
    fn arc_sort_orders_and_flags() {
        let s = syms(&["a", "b", "c"]);
        let mut f = Wfst::new(s.clone(), s);
        let q0 = f.add_state();
        for l in [3u32, 1, 2] {
            f.add_arc(q0, Arc::new(l, l, Weight::ONE, q0)).unwrap();
        }
        let sorted = f.freeze().arc_sort(SortSide::Input);
        let labels: Vec<Label> = sorted.arcs(0).iter().map(|a| a.ilabel).collect();
        assert_eq!(labels, vec![1, 2, 3]);
        assert!(sorted.properties().ilabel_sorted);

        // idempotent on already-sorted input
        let again = sorted.arc_sort(SortSide::Input);
        assert_eq!(again.arcs(0), sorted.arcs(0));

        // degenerate: empty machine
        let e = Wfst::new_acceptor(syms(&[])).freeze().arc_sort(SortSide::Input);
        assert_eq!(e.num_states(), 0);
    }

    #[test]
    fn sorted_ilabel_lookup() {
        let s = syms(&["a", "b", "c"]);
        let mut f = Wfst::new(s.clone(), s);
        let q0 = f.add_state();
        for (l, w) in [(1u32, 0.5), (2, 1.0), (2, 2.0), (3, 0.1)] {
            f.add_arc(q0, Arc::new(l, l, Weight(w), q0)).unwrap();
        }
        let f = f.freeze().arc_sort(SortSide::Input);
        assert_eq!(f.arcs_with_ilabel(0, 2).len(), 2);
        assert_eq!(f.arcs_with_ilabel(0, 4).len(), 0);
    }
}
