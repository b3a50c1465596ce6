//! Label reachability tables for lookahead composition.
//!
//! For every state of the left operand the table records, as an interval
//! set, which output labels can be the *first* non-epsilon output emitted
//! from that state, plus a flag for reaching a final state through
//! all-epsilon output. An optional relabeling permutes output labels so that
//! states' reachable sets become contiguous intervals; the permutation must
//! then be applied to the right operand's input side before composing.

use crate::fst::{Label, StateId, SymbolTable, Wfst};
use crate::{Error, Result};
use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};
use std::sync::Arc as SharedArc;

/// Sorted, merged, inclusive label intervals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntervalSet {
    intervals: Vec<(Label, Label)>,
}

impl IntervalSet {
    pub fn from_labels(labels: impl IntoIterator<Item = Label>) -> Self {
        let sorted: BTreeSet<Label> = labels.into_iter().collect();
        let mut intervals: Vec<(Label, Label)> = Vec::new();
        for l in sorted {
            match intervals.last_mut() {
                Some((_, hi)) if *hi + 1 == l => *hi = l,
                _ => intervals.push((l, l)),
            }
        }
        IntervalSet { intervals }
    }

    pub fn contains(&self, label: Label) -> bool {
        self.intervals
            .binary_search_by(|&(lo, hi)| {
                if label < lo {
                    std::cmp::Ordering::Greater
                } else if label > hi {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }

    pub fn len_intervals(&self) -> usize {
        self.intervals.len()
    }

    pub fn iter_labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.intervals.iter().flat_map(|&(lo, hi)| lo..=hi)
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> &[(Label, Label)] {
        &self.intervals
    }
}

/// Per-state first-output reachability of a left composition operand.
#[derive(Debug, Clone, Default)]
pub struct LookaheadTable {
    /// Interval set of reachable first non-epsilon output labels, per state.
    reach: Vec<IntervalSet>,
    /// Whether a final state is reachable emitting only epsilon outputs.
    eps_final: Vec<bool>,
    /// Relabeling applied at build time (old output label -> new), if any.
    relabel_map: Option<Vec<Label>>,
}

impl LookaheadTable {
    pub fn reach(&self, state: StateId) -> &IntervalSet {
        &self.reach[state as usize]
    }

    pub fn eps_final(&self, state: StateId) -> bool {
        self.eps_final[state as usize]
    }

    pub fn num_states(&self) -> usize {
        self.reach.len()
    }

    pub fn relabel_map(&self) -> Option<&[Label]> {
        self.relabel_map.as_deref()
    }

    /// Total interval count across states; the quantity relabeling shrinks.
    pub fn total_intervals(&self) -> usize {
        self.reach.iter().map(IntervalSet::len_intervals).sum()
    }
}

/// Output of [`build_lookahead`]: the table, the (possibly relabeled) left
/// operand, and the label map to apply to the right operand.
#[derive(Debug)]
pub struct LookaheadBuild {
    pub table: LookaheadTable,
    pub left: Wfst,
    /// old label -> new label over the left operand's output alphabet;
    /// identity when relabeling was disabled.
    pub relabel: Option<Vec<Label>>,
}

/// Computes first-output reachability for a frozen left operand.
///
/// With `relabel` set, output labels are permuted so labels reached from the
/// same states sit next to each other, which compacts the interval sets; the
/// returned map must be applied to the right operand (and its symbol table)
/// before composition.
pub fn build_lookahead(left: &Wfst, relabel: bool) -> Result<LookaheadBuild> {
    if !left.is_frozen() {
        return Err(Error::Resource("lookahead needs a frozen operand".into()));
    }
    let (reach_sets, eps_final) = first_output_reachability(left);

    if !relabel {
        let table = LookaheadTable {
            reach: reach_sets.iter().map(|s| IntervalSet::from_labels(s.iter().copied())).collect(),
            eps_final,
            relabel_map: None,
        };
        return Ok(LookaheadBuild {
            table,
            left: left.clone(),
            relabel: None,
        });
    }

    // Group labels by the set of states that can reach them first; labels
    // with identical signatures become adjacent ids, so per-state interval
    // sets collapse.
    let n_labels = left.osyms().len();
    let mut signature: Vec<Vec<StateId>> = vec![Vec::new(); n_labels];
    for (s, set) in reach_sets.iter().enumerate() {
        for &l in set {
            signature[l as usize].push(s as StateId);
        }
    }
    let mut order: Vec<Label> = (1..n_labels as Label).collect();
    order.sort_by(|&a, &b| {
        signature[a as usize]
            .cmp(&signature[b as usize])
            .then(a.cmp(&b))
    });
    let mut map: Vec<Label> = vec![0; n_labels];
    for (new_minus_one, &old) in order.iter().enumerate() {
        map[old as usize] = new_minus_one as Label + 1;
    }

    // permute the left operand's output labels and table
    let mut relabeled = left.clone().thaw();
    for s in relabeled.states().collect::<Vec<_>>() {
        let arcs: Vec<crate::fst::Arc> = relabeled
            .arcs(s)
            .iter()
            .map(|a| {
                let mut a = *a;
                a.olabel = map[a.olabel as usize];
                a
            })
            .collect();
        crate::ops::compose::replace_arcs(&mut relabeled, s, arcs);
    }
    // permute the symbol table so strings still resolve
    let mut strings: Vec<String> = vec![String::new(); n_labels];
    for (old, sym) in left.osyms().iter() {
        strings[map[old as usize] as usize] = sym.to_string();
    }
    let new_osyms = SymbolTable::from_symbols(strings.iter().skip(1)).into_shared();
    relabeled.set_symbols(left.isyms().clone(), new_osyms);
    let relabeled = relabeled.freeze();

    let table = LookaheadTable {
        reach: reach_sets
            .iter()
            .map(|s| IntervalSet::from_labels(s.iter().map(|&l| map[l as usize])))
            .collect(),
        eps_final,
        relabel_map: Some(map.clone()),
    };
    Ok(LookaheadBuild {
        table,
        left: relabeled,
        relabel: Some(map),
    })
}

/// Applies a relabel map to the right operand's input labels (and table).
pub fn relabel_right(right: &Wfst, map: &[Label]) -> Wfst {
    let mut out = right.clone().thaw();
    for s in out.states().collect::<Vec<_>>() {
        let arcs: Vec<crate::fst::Arc> = out
            .arcs(s)
            .iter()
            .map(|a| {
                let mut a = *a;
                a.ilabel = map[a.ilabel as usize];
                a
            })
            .collect();
        crate::ops::compose::replace_arcs(&mut out, s, arcs);
    }
    let mut strings: Vec<String> = vec![String::new(); map.len()];
    for (old, sym) in right.isyms().iter() {
        if (old as usize) < map.len() {
            strings[map[old as usize] as usize] = sym.to_string();
        }
    }
    let new_isyms = SymbolTable::from_symbols(strings.iter().skip(1)).into_shared();
    out.set_symbols(new_isyms, right.osyms().clone());
    out.freeze()
}

/// Fixpoint computation of per-state reachable first outputs and the
/// epsilon-final flag, walking output-epsilon arcs transitively.
fn first_output_reachability(fst: &Wfst) -> (Vec<BTreeSet<Label>>, Vec<bool>) {
    let n = fst.num_states();
    let mut reach: Vec<BTreeSet<Label>> = vec![BTreeSet::new(); n];
    let mut eps_final: Vec<bool> = (0..n as StateId).map(|s| fst.is_final(s)).collect();
    loop {
        let mut changed = false;
        for s in (0..n as StateId).rev() {
            for arc in fst.arcs(s) {
                if arc.olabel != 0 {
                    if reach[s as usize].insert(arc.olabel) {
                        changed = true;
                    }
                } else {
                    let (next_set, here) = split_two(&mut reach, arc.nextstate as usize, s as usize);
                    if let (Some(next_set), Some(here)) = (next_set, here) {
                        for &l in next_set.iter() {
                            if here.insert(l) {
                                changed = true;
                            }
                        }
                    }
                    if eps_final[arc.nextstate as usize] && !eps_final[s as usize] {
                        eps_final[s as usize] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    (reach, eps_final)
}

/// Disjoint mutable access to two slots (no-op when indices collide, which
/// for reach propagation is a self-loop contributing nothing new).
fn split_two<T>(
    v: &mut [T],
    a: usize,
    b: usize,
) -> (Option<&T>, Option<&mut T>) {
    if a == b {
        return (None, None);
    }
    if a < b {
        let (lo, hi) = v.split_at_mut(b);
        (Some(&lo[a]), Some(&mut hi[0]))
    } else {
        let (lo, hi) = v.split_at_mut(a);
        (Some(&hi[0]), Some(&mut lo[b]))
    }
}

const MAGIC: &[u8; 4] = b"WLAT";
const VERSION: u32 = 1;

/// Serializes a lookahead table (versioned little-endian binary) so graph
/// preparation and decoding can run as separate processes.
pub fn write_lookahead<W: Write>(table: &LookaheadTable, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(table.reach.len() as u64).to_le_bytes())?;
    for (set, &ef) in table.reach.iter().zip(table.eps_final.iter()) {
        w.write_all(&[u8::from(ef)])?;
        w.write_all(&(set.intervals.len() as u32).to_le_bytes())?;
        for &(lo, hi) in &set.intervals {
            w.write_all(&lo.to_le_bytes())?;
            w.write_all(&hi.to_le_bytes())?;
        }
    }
    match &table.relabel_map {
        None => w.write_all(&[0u8])?,
        Some(map) => {
            w.write_all(&[1u8])?;
            w.write_all(&(map.len() as u64).to_le_bytes())?;
            for &l in map {
                w.write_all(&l.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

/// Reads a serialized lookahead table.
pub fn read_lookahead<R: Read>(mut r: R) -> Result<LookaheadTable> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::BadBinary("not a lookahead table".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    if u32::from_le_bytes(b4) != VERSION {
        return Err(Error::BadBinary("unsupported lookahead version".into()));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    let mut reach = Vec::with_capacity(n);
    let mut eps_final = Vec::with_capacity(n);
    for _ in 0..n {
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        eps_final.push(flag[0] != 0);
        r.read_exact(&mut b4)?;
        let k = u32::from_le_bytes(b4) as usize;
        let mut intervals = Vec::with_capacity(k);
        for _ in 0..k {
            r.read_exact(&mut b4)?;
            let lo = u32::from_le_bytes(b4);
            r.read_exact(&mut b4)?;
            let hi = u32::from_le_bytes(b4);
            intervals.push((lo, hi));
        }
        reach.push(IntervalSet { intervals });
    }
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let relabel_map = if flag[0] == 1 {
        r.read_exact(&mut b8)?;
        let len = u64::from_le_bytes(b8) as usize;
        let mut map = Vec::with_capacity(len);
        for _ in 0..len {
            r.read_exact(&mut b4)?;
            map.push(u32::from_le_bytes(b4));
        }
        Some(map)
    } else {
        None
    };
    Ok(LookaheadTable {
        reach,
        eps_final,
        relabel_map,
    })
}

/// Shared handle used by sessions.
pub type SharedLookahead = SharedArc<LookaheadTable>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::{Arc, SymbolTable};
    use crate::Weight;

    fn syms(n: usize) -> SharedArc<SymbolTable> {
        SymbolTable::from_symbols((1..=n).map(|i| format!("w{i}"))).into_shared()
    }

    #[test]
    fn linear_delayed_output_reaches_single_label() {
        let t = syms(3);
        let mut f = Wfst::new(t.clone(), t);
        let q0 = f.add_state();
        let q1 = f.add_state();
        let q2 = f.add_state();
        let q3 = f.add_state();
        f.add_arc(q0, Arc::new(1, 0, Weight::ONE, q1)).unwrap();
        f.add_arc(q1, Arc::new(1, 0, Weight::ONE, q2)).unwrap();
        f.add_arc(q2, Arc::new(1, 3, Weight::ONE, q3)).unwrap();
        f.set_final(q3, Weight::ONE).unwrap();
        let built = build_lookahead(&f.freeze(), false).unwrap();
        for s in 0..3 {
            let set: Vec<Label> = built.table.reach(s).iter_labels().collect();
            assert_eq!(set, vec![3], "state {s}");
        }
        assert!(built.table.reach(3).is_empty());
        assert!(built.table.eps_final(3));
        assert!(!built.table.eps_final(0));
    }

    #[test]
    fn eps_final_flag_via_all_eps_output() {
        let t = syms(2);
        let mut f = Wfst::new(t.clone(), t);
        let q0 = f.add_state();
        let q1 = f.add_state();
        f.add_arc(q0, Arc::new(1, 0, Weight::ONE, q1)).unwrap();
        f.set_final(q1, Weight::ONE).unwrap();
        let built = build_lookahead(&f.freeze(), false).unwrap();
        assert!(built.table.eps_final(0));
    }

    #[test]
    fn relabeling_compacts_intervals() {
        // outputs {w1, w3} reachable, w2 not: fragmented without relabeling
        let t = syms(3);
        let mut f = Wfst::new(t.clone(), t);
        let q0 = f.add_state();
        let q1 = f.add_state();
        f.add_arc(q0, Arc::new(1, 1, Weight::ONE, q1)).unwrap();
        f.add_arc(q0, Arc::new(2, 3, Weight::ONE, q1)).unwrap();
        f.set_final(q1, Weight::ONE).unwrap();
        let f = f.freeze();

        let plain = build_lookahead(&f, false).unwrap();
        assert_eq!(plain.table.reach(0).len_intervals(), 2);

        let relabeled = build_lookahead(&f, true).unwrap();
        assert_eq!(relabeled.table.reach(0).len_intervals(), 1);

        // semantics identical: the relabeled left still reaches exactly the
        // images of the original labels
        let map = relabeled.relabel.as_ref().unwrap();
        for old in [1u32, 3] {
            assert!(relabeled.table.reach(0).contains(map[old as usize]));
        }
        assert!(!relabeled.table.reach(0).contains(map[2]));
    }

    #[test]
    fn serialization_round_trip() {
        let t = syms(4);
        let mut f = Wfst::new(t.clone(), t);
        let q0 = f.add_state();
        let q1 = f.add_state();
        f.add_arc(q0, Arc::new(1, 2, Weight::ONE, q1)).unwrap();
        f.add_arc(q0, Arc::new(1, 4, Weight::ONE, q1)).unwrap();
        f.set_final(q1, Weight::ONE).unwrap();
        let built = build_lookahead(&f.freeze(), true).unwrap();
        let mut buf = Vec::new();
        write_lookahead(&built.table, &mut buf).unwrap();
        let back = read_lookahead(&buf[..]).unwrap();
        assert_eq!(back.num_states(), built.table.num_states());
        for s in 0..back.num_states() as StateId {
            assert_eq!(back.reach(s), built.table.reach(s));
            assert_eq!(back.eps_final(s), built.table.eps_final(s));
        }
        assert_eq!(back.relabel_map(), built.table.relabel_map());
    }

    #[test]
    fn brute_force_agreement_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n_states = rng.gen_range(2..7);
            let n_labels = rng.gen_range(1..5usize);
            let t = syms(n_labels);
            let mut f = Wfst::new(t.clone(), t);
            for _ in 0..n_states {
                f.add_state();
            }
            for s in 0..n_states {
                for _ in 0..rng.gen_range(0..3) {
                    let o = rng.gen_range(0..=n_labels) as Label;
                    let d = rng.gen_range(0..n_states) as StateId;
                    f.add_arc(s as StateId, Arc::new(1, o, Weight::ONE, d))
                        .unwrap();
                }
            }
            let fin = rng.gen_range(0..n_states) as StateId;
            f.set_final(fin, Weight::ONE).unwrap();
            let f = f.freeze();
            let built = build_lookahead(&f, false).unwrap();
            for s in 0..n_states as StateId {
                let expect = brute_first_outputs(&f, s);
                let got: BTreeSet<Label> = built.table.reach(s).iter_labels().collect();
                assert_eq!(got, expect.0, "reach at {s}");
                assert_eq!(built.table.eps_final(s), expect.1, "eps-final at {s}");
            }
        }
    }

    /// Direct graph search: which labels can be the first non-eps output,
    /// and is a final reachable through all-eps outputs.
    fn brute_first_outputs(f: &Wfst, from: StateId) -> (BTreeSet<Label>, bool) {
        let mut labels = BTreeSet::new();
        let mut eps_final = false;
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![from];
        while let Some(s) = stack.pop() {
            if !seen.insert(s) {
                continue;
            }
            if f.is_final(s) {
                eps_final = true;
            }
            for a in f.arcs(s) {
                if a.olabel != 0 {
                    labels.insert(a.olabel);
                } else {
                    stack.push(a.nextstate);
                }
            }
        }
        (labels, eps_final)
    }
}
