//! Path enumeration: the brute-force oracle behind every equivalence test,
//! plus single best-path extraction.

use crate::fst::{Arc, Label, StateId, Wfst};
use crate::{Error, Result, Weight};
use std::collections::BTreeMap;
use std::collections::HashMap;

/// The set of accepting label-sequence pairs of a transducer, with weights
/// min-aggregated over all paths sharing the same pair. Keys are epsilon-free
/// label sequences, ordered lexicographically by the map.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathSet {
    paths: BTreeMap<(Vec<Label>, Vec<Label>), Weight>,
}

impl PathSet {
    pub fn insert(&mut self, ilabels: Vec<Label>, olabels: Vec<Label>, weight: Weight) {
        let entry = self
            .paths
            .entry((ilabels, olabels))
            .or_insert(Weight::ZERO);
        *entry = entry.plus(weight);
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Vec<Label>, Vec<Label>), Weight)> {
        self.paths.iter().map(|(k, w)| (k, *w))
    }

    pub fn get(&self, ilabels: &[Label], olabels: &[Label]) -> Option<Weight> {
        self.paths
            .get(&(ilabels.to_vec(), olabels.to_vec()))
            .copied()
    }

    /// Exact equality of keys and weights.
    pub fn exact_eq(&self, other: &PathSet) -> bool {
        self.paths == other.paths
    }

    /// Same key sets, weights within `tol`. Returns the largest weight delta
    /// when equivalent, or `None` when the key sets differ.
    pub fn weight_delta(&self, other: &PathSet) -> Option<f64> {
        if self.paths.len() != other.paths.len() {
            return None;
        }
        let mut max_delta = 0.0f64;
        for (k, w) in &self.paths {
            let ow = other.paths.get(k)?;
            if w.is_zero() != ow.is_zero() {
                return None;
            }
            if !w.is_zero() {
                max_delta = max_delta.max((w.value() - ow.value()).abs());
            }
        }
        Some(max_delta)
    }

    pub fn approx_eq(&self, other: &PathSet, tol: f64) -> bool {
        matches!(self.weight_delta(other), Some(d) if d <= tol)
    }

    /// Brute-force join used as the composition oracle: pairs of paths whose
    /// output and input sequences agree, weights times-combined.
    pub fn compose_join(&self, other: &PathSet) -> PathSet {
        let mut out = PathSet::default();
        for ((a_in, a_out), wa) in self.iter() {
            for ((b_in, b_out), wb) in other.iter() {
                if a_out == b_in {
                    out.insert(a_in.clone(), b_out.clone(), wa.times(wb));
                }
            }
        }
        out
    }

    /// Oracle-level Replace: every occurrence of `nonterminal` in an output
    /// sequence is substituted by each body path (input sequence spliced into
    /// the input side at the matching position is not well-defined at the
    /// label level for transducers, so this oracle applies to acceptor-style
    /// roots where input and output sequences coincide).
    pub fn replace_join(&self, nonterminal: Label, body: &PathSet) -> PathSet {
        let mut out = PathSet::default();
        for ((i_seq, o_seq), w) in self.iter() {
            debug_assert_eq!(i_seq, o_seq, "replace oracle expects an acceptor root");
            expand_nonterminals(o_seq, 0, nonterminal, body, Vec::new(), Vec::new(), w, &mut out);
        }
        out
    }
}

fn expand_nonterminals(
    seq: &[Label],
    pos: usize,
    nonterminal: Label,
    body: &PathSet,
    acc_in: Vec<Label>,
    acc_out: Vec<Label>,
    weight: Weight,
    out: &mut PathSet,
) {
    if pos == seq.len() {
        out.insert(acc_in, acc_out, weight);
        return;
    }
    let label = seq[pos];
    if label == nonterminal {
        for ((b_in, b_out), bw) in body.iter() {
            let mut next_in = acc_in.clone();
            next_in.extend_from_slice(b_in);
            let mut next_out = acc_out.clone();
            next_out.extend_from_slice(b_out);
            expand_nonterminals(
                seq,
                pos + 1,
                nonterminal,
                body,
                next_in,
                next_out,
                weight.times(bw),
                out,
            );
        }
    } else {
        let mut next_in = acc_in;
        next_in.push(label);
        let mut next_out = acc_out;
        next_out.push(label);
        expand_nonterminals(seq, pos + 1, nonterminal, body, next_in, next_out, weight, out);
    }
}

/// Enumerates all accepting paths of at most `max_len` arcs (epsilon arcs
/// count), min-aggregating weights per label pair. Cyclic machines are
/// truncated at the arc bound.
pub fn enumerate_paths(fst: &Wfst, max_len: usize) -> PathSet {
    let mut out = PathSet::default();
    let Some(start) = fst.start() else {
        return out;
    };
    let mut ilabels = Vec::new();
    let mut olabels = Vec::new();
    dfs(fst, start, max_len, &mut ilabels, &mut olabels, Weight::ONE, &mut out);
    out
}

fn dfs(
    fst: &Wfst,
    state: StateId,
    arcs_left: usize,
    ilabels: &mut Vec<Label>,
    olabels: &mut Vec<Label>,
    weight: Weight,
    out: &mut PathSet,
) {
    let fw = fst.final_weight(state);
    if !fw.is_zero() {
        out.insert(ilabels.clone(), olabels.clone(), weight.times(fw));
    }
    if arcs_left == 0 {
        return;
    }
    for arc in fst.arcs(state) {
        let pushed_i = arc.ilabel != 0;
        let pushed_o = arc.olabel != 0;
        if pushed_i {
            ilabels.push(arc.ilabel);
        }
        if pushed_o {
            olabels.push(arc.olabel);
        }
        dfs(
            fst,
            arc.nextstate,
            arcs_left - 1,
            ilabels,
            olabels,
            weight.times(arc.weight),
            out,
        );
        if pushed_i {
            ilabels.pop();
        }
        if pushed_o {
            olabels.pop();
        }
    }
}

/// Label-bounded path set: all accepting label pairs with at most
/// `max_ilabels` input labels and `max_olabels` output labels, regardless of
/// how many epsilon arcs realize them. Epsilon cycles are handled by
/// expanding a configuration only when it improves the memoized weight, so
/// the computation terminates on machines without negative-weight epsilon
/// cycles.
pub fn path_set_labeled(fst: &Wfst, max_ilabels: usize, max_olabels: usize) -> PathSet {
    let mut out = PathSet::default();
    let Some(start) = fst.start() else {
        return out;
    };
    // memo: (state, iseq, oseq) -> best weight reaching that configuration
    let mut best: HashMap<(StateId, Vec<Label>, Vec<Label>), f64> = HashMap::new();
    let mut queue: Vec<(StateId, Vec<Label>, Vec<Label>, Weight)> =
        vec![(start, Vec::new(), Vec::new(), Weight::ONE)];
    best.insert((start, Vec::new(), Vec::new()), 0.0);
    while let Some((state, iseq, oseq, weight)) = queue.pop() {
        if let Some(&b) = best.get(&(state, iseq.clone(), oseq.clone())) {
            if weight.value() > b + 1e-15 {
                continue; // superseded by a better visit
            }
        }
        let fw = fst.final_weight(state);
        if !fw.is_zero() {
            out.insert(iseq.clone(), oseq.clone(), weight.times(fw));
        }
        for arc in fst.arcs(state) {
            let mut ni = iseq.clone();
            let mut no = oseq.clone();
            if arc.ilabel != 0 {
                if ni.len() == max_ilabels {
                    continue;
                }
                ni.push(arc.ilabel);
            }
            if arc.olabel != 0 {
                if no.len() == max_olabels {
                    continue;
                }
                no.push(arc.olabel);
            }
            let nw = weight.times(arc.weight);
            let key = (arc.nextstate, ni.clone(), no.clone());
            let improved = match best.get(&key) {
                Some(&b) => nw.value() < b - 1e-15,
                None => true,
            };
            if improved {
                best.insert(key, nw.value());
                queue.push((arc.nextstate, ni, no, nw));
            }
        }
    }
    out
}

/// Single best accepting path under the tropical order. Ties are broken by
/// the lexicographically smallest output-label sequence among zero-slack
/// simple paths; zero-weight label-emitting cycles (which make a global
/// lexicographic minimum ill-defined) are excluded by the simple-path
/// restriction.
pub fn shortest_path(fst: &Wfst) -> Result<(Vec<Label>, Vec<Label>, Weight)> {
    let start = fst.start().ok_or(Error::NoAcceptingPath)?;
    let dist = distance_to_final(fst);
    let d0 = dist[start as usize];
    if d0.is_zero() {
        return Err(Error::NoAcceptingPath);
    }
    // Walk the optimal subgraph (arcs with zero slack) collecting the
    // lexicographically smallest output sequence over simple paths.
    let mut on_stack = vec![false; fst.num_states()];
    let mut best: Option<(Vec<Label>, Vec<Label>)> = None;
    let mut iseq = Vec::new();
    let mut oseq = Vec::new();
    walk_optimal(
        fst, &dist, start, &mut on_stack, &mut iseq, &mut oseq, &mut best,
    );
    let (ilabels, olabels) = best.ok_or(Error::NoAcceptingPath)?;
    Ok((ilabels, olabels, d0))
}

const SLACK: f64 = 1e-9;

fn walk_optimal(
    fst: &Wfst,
    dist: &[Weight],
    state: StateId,
    on_stack: &mut [bool],
    iseq: &mut Vec<Label>,
    oseq: &mut Vec<Label>,
    best: &mut Option<(Vec<Label>, Vec<Label>)>,
) {
    let here = dist[state as usize];
    let fw = fst.final_weight(state);
    if !fw.is_zero() && fw.value() <= here.value() + SLACK {
        let candidate = (iseq.clone(), oseq.clone());
        let better = match best {
            None => true,
            Some((_, cur)) => oseq.as_slice() < cur.as_slice(),
        };
        if better {
            *best = Some(candidate);
        }
    }
    on_stack[state as usize] = true;
    for arc in fst.arcs(state) {
        if on_stack[arc.nextstate as usize] {
            continue;
        }
        let via = arc.weight.times(dist[arc.nextstate as usize]);
        if via.is_zero() || via.value() > here.value() + SLACK {
            continue;
        }
        let pi = arc.ilabel != 0;
        let po = arc.olabel != 0;
        if pi {
            iseq.push(arc.ilabel);
        }
        if po {
            oseq.push(arc.olabel);
        }
        walk_optimal(fst, dist, arc.nextstate, on_stack, iseq, oseq, best);
        if pi {
            iseq.pop();
        }
        if po {
            oseq.pop();
        }
    }
    on_stack[state as usize] = false;
}

/// Shortest distance from every state to a final state (Bellman-Ford style
/// relaxation; handles the occasional negative back-off arc, no negative
/// cycles expected).
pub fn distance_to_final(fst: &Wfst) -> Vec<Weight> {
    let n = fst.num_states();
    let mut dist = vec![Weight::ZERO; n];
    let mut incoming: Vec<Vec<(StateId, Weight)>> = vec![Vec::new(); n];
    for s in fst.states() {
        for arc in fst.arcs(s) {
            incoming[arc.nextstate as usize].push((s, arc.weight));
        }
    }
    let mut queue: std::collections::VecDeque<StateId> = std::collections::VecDeque::new();
    let mut queued = vec![false; n];
    for s in fst.states() {
        let fw = fst.final_weight(s);
        if !fw.is_zero() {
            dist[s as usize] = fw;
            queue.push_back(s);
            queued[s as usize] = true;
        }
    }
    while let Some(t) = queue.pop_front() {
        queued[t as usize] = false;
        let dt = dist[t as usize];
        for &(s, w) in &incoming[t as usize] {
            let cand = w.times(dt);
            if cand.value() < dist[s as usize].value() - 1e-15 {
                dist[s as usize] = cand;
                if !queued[s as usize] {
                    queue.push_back(s);
                    queued[s as usize] = true;
                }
            }
        }
    }
    dist
}

/// Shortest distance from the start state to every state.
pub fn distance_from_start(fst: &Wfst) -> Vec<Weight> {
    let n = fst.num_states();
    let mut dist = vec![Weight::ZERO; n];
    let Some(start) = fst.start() else {
        return dist;
    };
    dist[start as usize] = Weight::ONE;
    let mut queue = std::collections::VecDeque::from([start]);
    let mut queued = vec![false; n];
    queued[start as usize] = true;
    while let Some(s) = queue.pop_front() {
        queued[s as usize] = false;
        let ds = dist[s as usize];
        for arc in fst.arcs(s) {
            let cand = ds.times(arc.weight);
            let t = arc.nextstate as usize;
            if cand.value() < dist[t].value() - 1e-15 {
                dist[t] = cand;
                if !queued[t] {
                    queue.push_back(arc.nextstate);
                    queued[t] = true;
                }
            }
        }
    }
    dist
}

#[allow(unused)]
fn arc_key(a: &Arc) -> (Label, Label, StateId) {
    (a.ilabel, a.olabel, a.nextstate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::SymbolTable;

    fn linear(pairs: &[(Label, Label, f64)], final_w: f64) -> Wfst {
        let syms = SymbolTable::from_symbols(["a", "b", "c", "d"]).into_shared();
        let mut f = Wfst::new(syms.clone(), syms);
        let mut prev = f.add_state();
        for &(i, o, w) in pairs {
            let next = f.add_state();
            f.add_arc(prev, Arc::new(i, o, Weight(w), next)).unwrap();
            prev = next;
        }
        f.set_final(prev, Weight(final_w)).unwrap();
        f.freeze()
    }

    #[test]
    fn single_arc() {
        let f = linear(&[(1, 2, 1.0)], 0.0);
        let ps = enumerate_paths(&f, 5);
        assert_eq!(ps.len(), 1);
        assert_eq!(ps.get(&[1], &[2]), Some(Weight(1.0)));
    }

    #[test]
    fn self_loop_unrolls() {
        let syms = SymbolTable::from_symbols(["a"]).into_shared();
        let mut f = Wfst::new(syms.clone(), syms);
        let q = f.add_state();
        f.add_arc(q, Arc::new(1, 1, Weight(1.0), q)).unwrap();
        f.set_final(q, Weight(0.0)).unwrap();
        let ps = enumerate_paths(&f.freeze(), 3);
        assert_eq!(ps.len(), 4);
        assert_eq!(ps.get(&[], &[]), Some(Weight(0.0)));
        assert_eq!(ps.get(&[1], &[1]), Some(Weight(1.0)));
        assert_eq!(ps.get(&[1, 1], &[1, 1]), Some(Weight(2.0)));
        assert_eq!(ps.get(&[1, 1, 1], &[1, 1, 1]), Some(Weight(3.0)));
    }

    #[test]
    fn min_aggregation_over_parallel_paths() {
        let syms = SymbolTable::from_symbols(["a"]).into_shared();
        let mut f = Wfst::new(syms.clone(), syms);
        let q0 = f.add_state();
        let q1 = f.add_state();
        f.add_arc(q0, Arc::new(1, 1, Weight(3.0), q1)).unwrap();
        f.add_arc(q0, Arc::new(1, 1, Weight(2.0), q1)).unwrap();
        f.set_final(q1, Weight::ONE).unwrap();
        let ps = enumerate_paths(&f.freeze(), 4);
        assert_eq!(ps.get(&[1], &[1]), Some(Weight(2.0)));
    }

    #[test]
    fn shortest_path_picks_min_and_breaks_ties_lexicographically() {
        let syms = SymbolTable::from_symbols(["a", "b"]).into_shared();
        let mut f = Wfst::new(syms.clone(), syms.clone());
        let q0 = f.add_state();
        let q1 = f.add_state();
        f.add_arc(q0, Arc::new(1, 1, Weight(3.0), q1)).unwrap();
        f.add_arc(q0, Arc::new(2, 2, Weight(2.0), q1)).unwrap();
        f.set_final(q1, Weight::ONE).unwrap();
        let (_, o, w) = shortest_path(&f.freeze()).unwrap();
        assert_eq!((o, w), (vec![2], Weight(2.0)));

        // tie at 2.0: olabel [b]=2 vs [a]=1 -> [a]
        let mut g = Wfst::new(syms.clone(), syms);
        let q0 = g.add_state();
        let q1 = g.add_state();
        g.add_arc(q0, Arc::new(2, 2, Weight(2.0), q1)).unwrap();
        g.add_arc(q0, Arc::new(1, 1, Weight(2.0), q1)).unwrap();
        g.set_final(q1, Weight::ONE).unwrap();
        let (_, o, w) = shortest_path(&g.freeze()).unwrap();
        assert_eq!((o, w), (vec![1], Weight(2.0)));
    }

    #[test]
    fn shortest_path_agrees_with_enumeration() {
        let f = linear(&[(1, 2, 0.5), (0, 3, 0.25), (2, 0, 0.125)], 0.0625);
        let (i, o, w) = shortest_path(&f).unwrap();
        let ps = enumerate_paths(&f, 10);
        assert_eq!(ps.get(&i, &o), Some(w));
    }

    #[test]
    fn no_accepting_path_is_an_error() {
        let f = linear(&[(1, 1, 1.0)], f64::INFINITY);
        assert!(matches!(shortest_path(&f), Err(Error::NoAcceptingPath)));
    }

    #[test]
    fn labeled_path_set_sees_through_eps_cycles() {
        let syms = SymbolTable::from_symbols(["a"]).into_shared();
        let mut f = Wfst::new(syms.clone(), syms);
        let q0 = f.add_state();
        let q1 = f.add_state();
        // zero-weight eps self-loop plus a labeled arc
        f.add_arc(q0, Arc::new(0, 0, Weight(0.0), q0)).unwrap();
        f.add_arc(q0, Arc::new(1, 1, Weight(1.0), q1)).unwrap();
        f.set_final(q1, Weight::ONE).unwrap();
        let ps = path_set_labeled(&f.freeze(), 3, 3);
        assert_eq!(ps.len(), 1);
        assert_eq!(ps.get(&[1], &[1]), Some(Weight(1.0)));
    }
}
