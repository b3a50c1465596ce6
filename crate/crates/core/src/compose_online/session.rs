//! Lazy on-the-fly composition sessions.
//!
//! A session owns the pair table and arc cache for one lazily composed
//! automaton; the underlying operands and lookahead tables are shared
//! read-only. Expansion is a pure function of the composed-state triple, so
//! a bounded cache may evict and recompute freely — provided the arithmetic
//! pair table supplies stateless ids.

use super::filter::FilterStack;
use super::lookahead::SharedLookahead;
use super::pair_table::{FilterState, PairMode, PairTable, Triple};
use crate::fst::{Label, Wfst};
use crate::{Error, Result, Weight};
use std::collections::HashMap;
use std::sync::Arc as SharedArc;

/// Arc of the lazily composed automaton; targets are composed-state ids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposedArc {
    pub ilabel: Label,
    pub olabel: Label,
    pub weight: Weight,
    pub nextstate: u64,
}

/// Cache retention policy. Bounded mode requires the arithmetic pair table:
/// eviction must never lose id assignments, and only the stateless id
/// function guarantees that.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CachePolicy {
    Unbounded,
    BoundedLru(usize),
}

/// Monotone session counters for the memory-behavior report.
#[derive(Debug, Clone, Copy, Default)]
pub struct SessionStats {
    /// Expansion computations (recomputation after eviction counts again).
    pub states_expanded: u64,
    /// Arcs currently held in the cache.
    pub arcs_cached: usize,
    /// Entries held by the pair table (0 in arithmetic mode).
    pub pair_table_entries: usize,
    /// Rough peak of cache plus pair-table bytes.
    pub peak_cache_bytes: usize,
}

/// A lazily composed automaton: left and right operands, filter stack,
/// pair table and arc cache.
pub struct CompositionSession {
    left: SharedArc<Wfst>,
    right: SharedArc<Wfst>,
    filters: FilterStack,
    lookahead: Option<SharedLookahead>,
    pairs: PairTable,
    cache: HashMap<u64, Vec<ComposedArc>>,
    recency: HashMap<u64, u64>,
    clock: u64,
    policy: CachePolicy,
    start_id: u64,
    stats: SessionStats,
}

impl std::fmt::Debug for CompositionSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CompositionSession")
            .field("filters", &self.filters)
            .field("policy", &self.policy)
            .field("stats", &self.stats)
            .finish()
    }
}

/// Opens a session: validates the filter stack, sort properties, lookahead
/// availability, and cache/pair-mode compatibility, then materializes the
/// start state.
pub fn open_session(
    left: SharedArc<Wfst>,
    right: SharedArc<Wfst>,
    filters: FilterStack,
    pair_mode: PairMode,
    policy: CachePolicy,
    lookahead: Option<SharedLookahead>,
) -> Result<CompositionSession> {
    filters.validate()?;
    if !left.osyms().compatible(right.isyms()) {
        return Err(Error::SymbolTableMismatch(
            "left output table differs from right input table".into(),
        ));
    }
    if !left.properties().olabel_sorted {
        return Err(Error::MissingSortOrder(
            "left operand must be output-label sorted".into(),
        ));
    }
    if !right.properties().ilabel_sorted {
        return Err(Error::MissingSortOrder(
            "right operand must be input-label sorted".into(),
        ));
    }
    if filters.any_lookahead() {
        let table = lookahead.as_ref().ok_or(Error::MissingLookahead)?;
        if table.num_states() != left.num_states() {
            return Err(Error::Resource(
                "lookahead table does not match the left operand".into(),
            ));
        }
    }
    if matches!(policy, CachePolicy::BoundedLru(_)) && pair_mode != PairMode::Arithmetic {
        return Err(Error::BoundedCacheMode);
    }
    if pair_mode == PairMode::Arithmetic && (filters.weight_pushing || filters.label_pushing) {
        return Err(Error::ArithmeticWithPushing);
    }
    if let CachePolicy::BoundedLru(cap) = policy {
        if cap == 0 {
            return Err(Error::Resource("bounded cache capacity must be >= 1".into()));
        }
    }

    let mut pairs = PairTable::new(pair_mode, left.num_states().max(1), right.num_states().max(1));
    let (ls, rs) = match (left.start(), right.start()) {
        (Some(l), Some(r)) => (l, r),
        _ => {
            // empty composition: a session with no start; expansion requests fail
            return Ok(CompositionSession {
                left,
                right,
                filters,
                lookahead,
                pairs,
                cache: HashMap::new(),
                recency: HashMap::new(),
                clock: 0,
                policy,
                start_id: u64::MAX,
                stats: SessionStats::default(),
            });
        }
    };
    let start_id = pairs.id_of(Triple {
        left: ls,
        right: rs,
        filter: FilterState::start(),
    })?;
    let mut session = CompositionSession {
        left,
        right,
        filters,
        lookahead,
        pairs,
        cache: HashMap::new(),
        recency: HashMap::new(),
        clock: 0,
        policy,
        start_id,
        stats: SessionStats::default(),
    };
    session.expand(start_id)?;
    Ok(session)
}

impl CompositionSession {
    /// Composed-state id of the start pair, or `None` for an empty product.
    pub fn start(&self) -> Option<u64> {
        (self.start_id != u64::MAX).then_some(self.start_id)
    }

    pub fn filters(&self) -> FilterStack {
        self.filters
    }

    /// Final weight of a composed state: both sides final, weights combined;
    /// a pending pushed label blocks finality, and pending pushed weight is
    /// refunded.
    pub fn final_weight(&mut self, id: u64) -> Result<Weight> {
        let t = self.pairs.triple_of(id)?;
        if t.filter.pushed != 0 {
            return Ok(Weight::ZERO);
        }
        let base = self
            .left
            .final_weight(t.left)
            .times(self.right.final_weight(t.right));
        if base.is_zero() {
            return Ok(Weight::ZERO);
        }
        Ok(base.divide(Weight(t.filter.credit())))
    }

    /// Arcs of a composed state, from cache or computed on demand.
    pub fn expand(&mut self, id: u64) -> Result<Vec<ComposedArc>> {
        self.clock += 1;
        let clock = self.clock;
        if let Some(arcs) = self.cache.get(&id) {
            let arcs = arcs.clone();
            self.recency.insert(id, clock);
            return Ok(arcs);
        }
        let triple = self.pairs.triple_of(id)?;
        let arcs = self.compute_arcs(triple)?;
        self.stats.states_expanded += 1;
        self.stats.arcs_cached += arcs.len();
        self.cache.insert(id, arcs.clone());
        self.recency.insert(id, clock);
        if let CachePolicy::BoundedLru(cap) = self.policy {
            while self.cache.len() > cap {
                let oldest = self
                    .recency
                    .iter()
                    .filter(|(k, _)| self.cache.contains_key(*k))
                    .min_by_key(|(_, &stamp)| stamp)
                    .map(|(&k, _)| k);
                match oldest {
                    Some(k) if k != id => {
                        if let Some(evicted) = self.cache.remove(&k) {
                            self.stats.arcs_cached -= evicted.len();
                        }
                        self.recency.remove(&k);
                    }
                    _ => break, // never evict the entry just produced
                }
            }
        }
        let bytes = self.cache_bytes_estimate();
        self.stats.peak_cache_bytes = self.stats.peak_cache_bytes.max(bytes);
        Ok(arcs)
    }

    fn cache_bytes_estimate(&self) -> usize {
        let arc_sz = std::mem::size_of::<ComposedArc>();
        let entry_sz = std::mem::size_of::<(Triple, u64)>() * 2;
        self.stats.arcs_cached * arc_sz + self.pairs.entries() * entry_sz
    }

    /// Session counters; `pair_table_entries` is refreshed on read.
    pub fn stats(&mut self) -> SessionStats {
        self.stats.pair_table_entries = self.pairs.entries();
        self.stats
    }

    fn reach_table(&self) -> &SharedLookahead {
        self.lookahead
            .as_ref()
            .expect("lookahead presence checked at open")
    }

    /// Lookahead viability of a target pair: some first-reachable left
    /// output has a right match, or both sides can finish, or the right
    /// side can still move on its own epsilon arcs.
    fn viable(&self, left_state: u32, right_state: u32) -> bool {
        let table = self.reach_table();
        let reach = table.reach(left_state);
        let mut has_eps_escape = false;
        for arc in self.right.arcs(right_state) {
            if arc.ilabel == 0 {
                has_eps_escape = true;
                continue;
            }
            if reach.contains(arc.ilabel) {
                return true;
            }
        }
        if has_eps_escape {
            return true;
        }
        table.eps_final(left_state) && self.right.is_final(right_state)
    }

    /// Min weight over right arcs at `right_state` matchable from
    /// `left_state`'s reach set (final pairing included); the amount the
    /// weight-pushing filter pays forward.
    fn prospective(&self, left_state: u32, right_state: u32) -> Weight {
        let table = self.reach_table();
        let reach = table.reach(left_state);
        let mut best = Weight::ZERO;
        for arc in self.right.arcs(right_state) {
            if arc.ilabel != 0 && reach.contains(arc.ilabel) {
                best = best.plus(arc.weight);
            }
        }
        if table.eps_final(left_state) {
            best = best.plus(self.right.final_weight(right_state));
        }
        best
    }

    /// The label-pushing precondition: the left state commits to exactly one
    /// future output `x`, and every way the right side can consume `x`
    /// (including after its own epsilon moves, none of which may emit) agrees
    /// on one output label. Returns that label.
    fn unique_future_output(&self, left_state: u32, right_state: u32) -> Option<Label> {
        let table = self.reach_table();
        if table.eps_final(left_state) {
            return None;
        }
        let reach = table.reach(left_state);
        let mut labels = reach.iter_labels();
        let x = labels.next()?;
        if labels.next().is_some() {
            return None;
        }
        // epsilon-input closure of the right state; abort on emitting arcs
        let mut closure = vec![right_state];
        let mut seen: std::collections::HashSet<u32> = closure.iter().copied().collect();
        let mut out_label: Option<Label> = None;
        let mut idx = 0;
        while idx < closure.len() {
            let s = closure[idx];
            idx += 1;
            for arc in self.right.arcs(s) {
                if arc.ilabel == 0 {
                    if arc.olabel != 0 {
                        return None; // an epsilon move would emit first
                    }
                    if seen.insert(arc.nextstate) {
                        closure.push(arc.nextstate);
                    }
                } else if arc.ilabel == x {
                    match out_label {
                        None => out_label = Some(arc.olabel),
                        Some(o) if o == arc.olabel => {}
                        Some(_) => return None,
                    }
                }
            }
        }
        out_label.filter(|&o| o != 0)
    }

    fn compute_arcs(&mut self, triple: Triple) -> Result<Vec<ComposedArc>> {
        let Triple {
            left: i,
            right: j,
            filter,
        } = triple;
        let fs = &self.filters;
        let eps_on = fs.eps_matching;
        let credit = Weight(filter.credit());
        let mut out: Vec<ComposedArc> = Vec::new();
        let mut pending: Vec<(Triple, ComposedArc)> = Vec::new();

        for l_arc in self.left.arcs(i) {
            if l_arc.olabel == 0 {
                // left-alone move
                if eps_on && filter.eps != 0 {
                    continue;
                }
                let mut weight = l_arc.weight;
                let mut next_filter = FilterState {
                    eps: 0,
                    credit_bits: filter.credit_bits,
                    pushed: filter.pushed,
                };
                let mut olabel = 0;
                if fs.weight_pushing {
                    let prospective = self.prospective(l_arc.nextstate, j);
                    if !prospective.is_zero() && prospective.value() > credit.value() {
                        weight = weight.times(prospective.divide(credit));
                        next_filter = next_filter.with_credit(prospective.value());
                    }
                }
                if fs.label_pushing && filter.pushed == 0 {
                    if let Some(o) = self.unique_future_output(l_arc.nextstate, j) {
                        olabel = o;
                        next_filter.pushed = o;
                    }
                }
                let target = Triple {
                    left: l_arc.nextstate,
                    right: j,
                    filter: next_filter,
                };
                pending.push((
                    target,
                    ComposedArc {
                        ilabel: l_arc.ilabel,
                        olabel,
                        weight,
                        nextstate: 0,
                    },
                ));
                continue;
            }
            // matched moves
            for r_arc in self.right.arcs_with_ilabel(j, l_arc.olabel) {
                if r_arc.ilabel != l_arc.olabel {
                    continue;
                }
                let mut olabel = r_arc.olabel;
                if filter.pushed != 0 {
                    debug_assert_eq!(r_arc.olabel, filter.pushed);
                    olabel = 0; // already emitted early
                }
                let weight = l_arc.weight.times(r_arc.weight).divide(credit);
                let target = Triple {
                    left: l_arc.nextstate,
                    right: r_arc.nextstate,
                    filter: FilterState::start(),
                };
                pending.push((
                    target,
                    ComposedArc {
                        ilabel: l_arc.ilabel,
                        olabel,
                        weight,
                        nextstate: 0,
                    },
                ));
            }
        }
        // right-alone moves on input-epsilon arcs of the right operand
        for r_arc in self.right.arcs(j) {
            if r_arc.ilabel != 0 {
                continue;
            }
            let next_eps = u8::from(eps_on);
            let weight = r_arc.weight.divide(credit);
            let target = Triple {
                left: i,
                right: r_arc.nextstate,
                filter: FilterState {
                    eps: next_eps,
                    credit_bits: 0.0f64.to_bits(),
                    pushed: filter.pushed,
                },
            };
            pending.push((
                target,
                ComposedArc {
                    ilabel: 0,
                    olabel: r_arc.olabel,
                    weight,
                    nextstate: 0,
                },
            ));
        }

        for (target, mut arc) in pending {
            if fs.reachability && !self.viable(target.left, target.right) {
                continue;
            }
            arc.nextstate = self.pairs.id_of(target)?;
            out.push(arc);
        }
        Ok(out)
    }

    /// Fully expands the session into a concrete transducer (breadth-first
    /// over reachable composed states, remapped densely). `limit` bounds the
    /// number of materialized states.
    pub fn expand_all(&mut self, limit: usize) -> Result<Wfst> {
        let mut out = Wfst::new(self.left.isyms().clone(), self.right.osyms().clone());
        let Some(start) = self.start() else {
            return Ok(out.freeze());
        };
        let mut remap: HashMap<u64, u32> = HashMap::new();
        let mut queue = std::collections::VecDeque::from([start]);
        remap.insert(start, out.add_state());
        while let Some(id) = queue.pop_front() {
            let sid = remap[&id];
            let fw = self.final_weight(id)?;
            if !fw.is_zero() {
                out.set_final(sid, fw)?;
            }
            for arc in self.expand(id)? {
                let next = match remap.get(&arc.nextstate) {
                    Some(&n) => n,
                    None => {
                        if remap.len() >= limit {
                            return Err(Error::StateLimit {
                                states: remap.len() + 1,
                                limit,
                            });
                        }
                        let n = out.add_state();
                        remap.insert(arc.nextstate, n);
                        queue.push_back(arc.nextstate);
                        n
                    }
                };
                out.add_arc(
                    sid,
                    crate::fst::Arc::new(arc.ilabel, arc.olabel, arc.weight, next),
                )?;
            }
        }
        Ok(out.freeze())
    }
}
