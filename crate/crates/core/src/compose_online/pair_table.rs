//! Composed-state indexing.
//!
//! Two interchangeable schemes map `(left state, right state, filter state)`
//! triples to composed-state ids:
//!
//! - **arithmetic**: the stateless formula
//!   `id = (filter * n_right + right) * n_left + left`, which needs no stored
//!   mapping and therefore permits cache eviction, at the price of sparse
//!   ids. It is only defined while the filter state ranges over a small
//!   finite set (the epsilon filter's two values).
//! - **counter**: ids are assigned in creation order, densely filling
//!   `[0, M)`, at the price of a mapping that can never be dropped.

use crate::fst::StateId;
use crate::{Error, Result};
use std::collections::HashMap;

/// Filter-state component of composed-state identity.
///
/// `eps` is the epsilon-sequencing filter state (0 or 1). `credit` is the
/// weight prepaid by the lookahead weight-pushing filter (bits of an `f64`;
/// 0.0 when inactive). `pushed` is the output label emitted early by the
/// lookahead label-pushing filter (0 = none).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FilterState {
    pub eps: u8,
    pub credit_bits: u64,
    pub pushed: u32,
}

impl FilterState {
    pub fn start() -> Self {
        FilterState {
            eps: 0,
            credit_bits: 0.0f64.to_bits(),
            pushed: 0,
        }
    }

    pub fn credit(&self) -> f64 {
        f64::from_bits(self.credit_bits)
    }

    pub fn with_credit(mut self, credit: f64) -> Self {
        self.credit_bits = credit.to_bits();
        self
    }

    /// True when only the epsilon component is active, i.e. the state fits
    /// the arithmetic indexing scheme.
    pub fn is_small(&self) -> bool {
        self.credit() == 0.0 && self.pushed == 0
    }
}

/// A full composed-state triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triple {
    pub left: StateId,
    pub right: StateId,
    pub filter: FilterState,
}

/// Indexing mode selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMode {
    Arithmetic,
    Counter,
}

/// Bidirectional triple <-> id table.
#[derive(Debug)]
pub enum PairTable {
    Arithmetic {
        n_left: u64,
        n_right: u64,
    },
    Counter {
        forward: HashMap<Triple, u64>,
        reverse: Vec<Triple>,
    },
}

impl PairTable {
    pub fn new(mode: PairMode, n_left: usize, n_right: usize) -> PairTable {
        match mode {
            PairMode::Arithmetic => PairTable::Arithmetic {
                n_left: n_left as u64,
                n_right: n_right as u64,
            },
            PairMode::Counter => PairTable::Counter {
                forward: HashMap::new(),
                reverse: Vec::new(),
            },
        }
    }

    pub fn mode(&self) -> PairMode {
        match self {
            PairTable::Arithmetic { .. } => PairMode::Arithmetic,
            PairTable::Counter { .. } => PairMode::Counter,
        }
    }

    /// Id for a triple, interning it in counter mode.
    pub fn id_of(&mut self, triple: Triple) -> Result<u64> {
        match self {
            PairTable::Arithmetic { n_left, n_right } => {
                if !triple.filter.is_small() {
                    return Err(Error::ArithmeticWithPushing);
                }
                let f = triple.filter.eps as u64;
                Ok((f * *n_right + triple.right as u64) * *n_left + triple.left as u64)
            }
            PairTable::Counter { forward, reverse } => {
                if let Some(&id) = forward.get(&triple) {
                    return Ok(id);
                }
                let id = reverse.len() as u64;
                forward.insert(triple, id);
                reverse.push(triple);
                Ok(id)
            }
        }
    }

    /// Triple for an id; in counter mode the id must have been interned.
    pub fn triple_of(&self, id: u64) -> Result<Triple> {
        match self {
            PairTable::Arithmetic { n_left, n_right } => {
                let left = (id % n_left) as StateId;
                let rest = id / n_left;
                let right = (rest % n_right) as StateId;
                let eps = (rest / n_right) as u8;
                if eps > 1 {
                    return Err(Error::UnknownComposedState(id));
                }
                Ok(Triple {
                    left,
                    right,
                    filter: FilterState {
                        eps,
                        ..FilterState::start()
                    },
                })
            }
            PairTable::Counter { reverse, .. } => reverse
                .get(id as usize)
                .copied()
                .ok_or(Error::UnknownComposedState(id)),
        }
    }

    /// Number of stored entries (0 for the stateless arithmetic scheme).
    pub fn entries(&self) -> usize {
        match self {
            PairTable::Arithmetic { .. } => 0,
            PairTable::Counter { reverse, .. } => reverse.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_reproduces_the_stateless_formula() {
        // left operand with 5 states, pair (left=2, right=3) -> 3*5+2 = 17
        let mut t = PairTable::new(PairMode::Arithmetic, 5, 4);
        let triple = Triple {
            left: 2,
            right: 3,
            filter: FilterState::start(),
        };
        assert_eq!(t.id_of(triple).unwrap(), 17);
        assert_eq!(t.triple_of(17).unwrap(), triple);
    }

    #[test]
    fn arithmetic_is_bijective_over_the_grid() {
        let mut t = PairTable::new(PairMode::Arithmetic, 7, 3);
        let mut seen = std::collections::HashSet::new();
        for eps in 0..2u8 {
            for right in 0..3 {
                for left in 0..7 {
                    let triple = Triple {
                        left,
                        right,
                        filter: FilterState {
                            eps,
                            ..FilterState::start()
                        },
                    };
                    let id = t.id_of(triple).unwrap();
                    assert!(seen.insert(id), "duplicate id {id}");
                    assert_eq!(t.triple_of(id).unwrap(), triple);
                }
            }
        }
    }

    #[test]
    fn arithmetic_rejects_pushing_filter_state() {
        let mut t = PairTable::new(PairMode::Arithmetic, 5, 5);
        let triple = Triple {
            left: 0,
            right: 0,
            filter: FilterState::start().with_credit(1.5),
        };
        assert!(matches!(t.id_of(triple), Err(Error::ArithmeticWithPushing)));
    }

    #[test]
    fn counter_ids_are_dense_in_creation_order() {
        let mut t = PairTable::new(PairMode::Counter, 100, 100);
        let mk = |l, r| Triple {
            left: l,
            right: r,
            filter: FilterState::start(),
        };
        assert_eq!(t.id_of(mk(42, 17)).unwrap(), 0);
        assert_eq!(t.id_of(mk(3, 99)).unwrap(), 1);
        assert_eq!(t.id_of(mk(42, 17)).unwrap(), 0); // interned
        assert_eq!(t.entries(), 2);
        assert_eq!(t.triple_of(1).unwrap(), mk(3, 99));
        assert!(t.triple_of(2).is_err());
    }
}
