//! Symbol tables: bijections between token strings and dense integer labels.
//!
//! Label `0` is always `<eps>`. Auxiliary symbols are ordinary entries with
//! reserved string conventions: `#0` for the pseudo-epsilon that stands in
//! for grammar back-off transitions, `#phn:<phone>` for phoneme-words, and
//! `$unknown` for the expandable nonterminal.

use crate::{Error, Label, Result};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

/// The reserved epsilon string at label 0.
pub const EPS: &str = "<eps>";
/// The pseudo-epsilon symbol used on grammar back-off arcs.
pub const HASH0: &str = "#0";
/// The expandable nonterminal unigram.
pub const UNKNOWN: &str = "$unknown";
/// Prefix of phoneme-word symbols.
pub const PHONE_WORD_PREFIX: &str = "#phn:";

/// Phoneme-word symbol string for a phone.
pub fn phone_word(phone: &str) -> String {
    format!("{PHONE_WORD_PREFIX}{phone}")
}

/// True for symbols that are plumbing rather than user-visible tokens
/// (`#0`, `#phn:*`). `$unknown` is *not* auxiliary: it is a real grammar
/// token until expansion removes it.
pub fn is_auxiliary(symbol: &str) -> bool {
    symbol == HASH0 || symbol.starts_with(PHONE_WORD_PREFIX)
}

/// A bijection between strings and dense labels in `[0, len)`.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    entries: Vec<String>,
    index: HashMap<String, Label>,
}

impl SymbolTable {
    /// New table containing only `<eps>` at label 0.
    pub fn new() -> Self {
        let mut t = SymbolTable {
            entries: Vec::new(),
            index: HashMap::new(),
        };
        t.add(EPS);
        t
    }

    /// Builds a table from symbols, `<eps>` first.
    pub fn from_symbols<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut t = SymbolTable::new();
        for s in symbols {
            t.add(s.as_ref());
        }
        t
    }

    /// Adds a symbol if absent; returns its label either way.
    pub fn add(&mut self, symbol: &str) -> Label {
        if let Some(&id) = self.index.get(symbol) {
            return id;
        }
        let id = self.entries.len() as Label;
        self.entries.push(symbol.to_string());
        self.index.insert(symbol.to_string(), id);
        id
    }

    pub fn label(&self, symbol: &str) -> Option<Label> {
        self.index.get(symbol).copied()
    }

    /// Label lookup that errors with the offending symbol name.
    pub fn require(&self, symbol: &str) -> Result<Label> {
        self.label(symbol)
            .ok_or_else(|| Error::Resource(format!("unknown symbol `{symbol}`")))
    }

    pub fn symbol(&self, label: Label) -> Option<&str> {
        self.entries.get(label as usize).map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.index.contains_key(symbol)
    }

    /// Iterates `(label, symbol)` pairs in label order.
    pub fn iter(&self) -> impl Iterator<Item = (Label, &str)> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, s)| (i as Label, s.as_str()))
    }

    /// Labels of all auxiliary symbols (`#0`, `#phn:*`).
    pub fn auxiliary_labels(&self) -> Vec<Label> {
        self.iter()
            .filter(|(_, s)| is_auxiliary(s))
            .map(|(l, _)| l)
            .collect()
    }

    /// True when `self` and `other` agree on every label both define.
    ///
    /// Tables grow append-only, so a table extended with new symbols stays
    /// compatible with transducers built against the shorter one.
    pub fn compatible(&self, other: &SymbolTable) -> bool {
        let n = self.len().min(other.len());
        self.entries[..n] == other.entries[..n]
    }

    /// Writes the `symbol id` text format, one entry per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, sym) in self.iter() {
            let _ = writeln!(out, "{sym} {id}");
        }
        out
    }

    /// Parses the `symbol id` text format. Ids must be dense from 0 and the
    /// first entry must be `<eps>`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut entries: Vec<String> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (sym, id) = match (parts.next(), parts.next(), parts.next()) {
                (Some(s), Some(i), None) => (s, i),
                _ => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("expected `symbol id`, got `{line}`"),
                    })
                }
            };
            let id: usize = id.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad label id `{id}`"),
            })?;
            if id != entries.len() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("non-dense label id {id}, expected {}", entries.len()),
                });
            }
            entries.push(sym.to_string());
        }
        if entries.first().map(String::as_str) != Some(EPS) {
            return Err(Error::Parse {
                line: 1,
                msg: format!("first symbol must be `{EPS}`"),
            });
        }
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as Label))
            .collect();
        Ok(SymbolTable { entries, index })
    }

    /// Shared handle for cheap reuse across transducers.
    pub fn into_shared(self) -> Arc<SymbolTable> {
        Arc::new(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_is_zero_and_ids_dense() {
        let mut t = SymbolTable::new();
        assert_eq!(t.label(EPS), Some(0));
        let a = t.add("a");
        let b = t.add("b");
        assert_eq!((a, b), (1, 2));
        assert_eq!(t.add("a"), 1);
        assert_eq!(t.symbol(2), Some("b"));
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn aux_conventions() {
        assert!(is_auxiliary("#0"));
        assert!(is_auxiliary("#phn:ae"));
        assert!(!is_auxiliary("$unknown"));
        assert!(!is_auxiliary("cat"));
        assert_eq!(phone_word("k"), "#phn:k");
    }

    #[test]
    fn text_round_trip() {
        let t = SymbolTable::from_symbols(["a", "#0", "$unknown", "#phn:a"]);
        let back = SymbolTable::from_text(&t.to_text()).unwrap();
        assert_eq!(back.len(), t.len());
        for (id, sym) in t.iter() {
            assert_eq!(back.symbol(id), Some(sym));
        }
    }

    #[test]
    fn prefix_extension_is_compatible() {
        let base = SymbolTable::from_symbols(["a", "b"]);
        let mut ext = base.clone();
        ext.add("zork");
        assert!(base.compatible(&ext));
        assert!(ext.compatible(&base));
        let other = SymbolTable::from_symbols(["a", "c"]);
        assert!(!base.compatible(&other));
    }

    #[test]
    fn from_text_rejects_gaps() {
        let err = SymbolTable::from_text("<eps> 0\na 2\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
