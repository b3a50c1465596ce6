//! # weft-core
//!
//! A weighted finite-state transducer toolkit over the tropical semiring,
//! built around three layers:
//!
//! - **Transducers** ([`fst`]): mutable-while-building, frozen-when-done
//!   [`fst::Wfst`] values with symbol tables and text/binary serialization.
//! - **Algorithms** ([`ops`], [`compose_online`]): offline composition,
//!   determinization, minimization, epsilon removal, connection, weight and
//!   label pushing, grammar `Replace`, plus lazy on-the-fly composition with
//!   epsilon-matching and lookahead (reachability / weight-pushing /
//!   label-pushing) filters and pluggable state-pair indexing.
//! - **Speech decoding** ([`graph`], [`vocab`], [`decode`]): lexicon,
//!   grammar, context and HMM transducer construction, recipe-driven cascade
//!   preparation, runtime vocabulary expansion through phoneme-words, and a
//!   token-passing Viterbi beam decoder with an exact dynamic-programming
//!   oracle.
//!
//! The toolkit is self-contained: [`synth`] generates deterministic frame
//! scores and toy resources so end-to-end flows run without external data.

pub mod compose_online;
pub mod decode;
pub mod fst;
pub mod graph;
pub mod ops;
pub mod semiring;
pub mod synth;
pub mod vocab;

pub use fst::{Arc, Label, StateId, SymbolTable, Wfst};
pub use semiring::Weight;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Mutation attempted on a frozen transducer.
    #[error("transducer is frozen; mutation rejected")]
    Frozen,

    /// A state id out of range for the owning transducer.
    #[error("invalid state id {0}")]
    InvalidState(StateId),

    /// Composition operands disagree on the shared symbol table.
    #[error("symbol table mismatch: {0}")]
    SymbolTableMismatch(String),

    /// A required arc-sort property is missing on an operand.
    #[error("missing sort order: {0}")]
    MissingSortOrder(String),

    /// Parse failure in a text format, with 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Determinization exceeded its state-expansion budget.
    #[error("not determinizable within budget of {budget} states")]
    NonDeterminizable { budget: usize },

    /// An operation that requires a deterministic input got one that is not.
    #[error("input transducer is not deterministic")]
    NotDeterministic,

    /// Weight pushing met a state with no finite distance to a final state.
    #[error("state {0} has no finite distance to a final state; run connect first")]
    NotCoaccessible(StateId),

    /// Invalid filter stack configuration.
    #[error("invalid filter stack: {0}")]
    FilterDependency(String),

    /// Lookahead filters requested without a lookahead table.
    #[error("lookahead filter enabled but no lookahead table supplied")]
    MissingLookahead,

    /// Cache policy incompatible with the pair-table mode.
    #[error("bounded cache requires the arithmetic pair table")]
    BoundedCacheMode,

    /// Pair-table mode incompatible with the filter stack.
    #[error("arithmetic pair table unsupported with pushing filters")]
    ArithmeticWithPushing,

    /// Composed-state id not known to the session.
    #[error("unknown composed state id {0}")]
    UnknownComposedState(u64),

    /// Grammar nonterminal misuse in Replace.
    #[error("replace: {0}")]
    Replace(String),

    /// Bad resource content (lexicon, language model, word list).
    #[error("invalid resource: {0}")]
    Resource(String),

    /// Recipe parse or evaluation failure.
    #[error("recipe: {0}")]
    Recipe(String),

    /// Frame-score dimensions disagree with the graph's emitting units.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Beam search pruned every token before the last frame.
    #[error("no surviving token at frame {frame}; widen the beam")]
    NoSurvivingToken { frame: usize },

    /// Exact decode refused an over-large graph.
    #[error("graph too large for exact decode: {states} states exceeds limit {limit}")]
    StateLimit { states: usize, limit: usize },

    /// Shortest path requested on a transducer with no accepting path.
    #[error("no accepting path")]
    NoAcceptingPath,

    /// I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed binary serialization.
    #[error("binary format error: {0}")]
    BadBinary(String),
}

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
