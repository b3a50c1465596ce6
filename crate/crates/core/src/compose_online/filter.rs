//! Composition filter stacks.

use crate::{Error, Result};

/// Which filters participate in a composition session.
///
/// The epsilon-matching filter blocks redundant epsilon interleavings; the
/// lookahead reachability filter prunes arcs whose target pair cannot reach
/// a label match or a final pairing; the lookahead weight- and label-pushing
/// filters move prospective right-side weight and uniquely determined output
/// labels onto earlier arcs. Pushing filters build on reachability, and
/// reachability builds on epsilon matching, which yields six valid stacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FilterStack {
    pub eps_matching: bool,
    pub reachability: bool,
    pub weight_pushing: bool,
    pub label_pushing: bool,
}

impl FilterStack {
    /// No filtering at all: the raw product (paths may be represented by
    /// several epsilon interleavings; weights are unaffected).
    pub const NONE: FilterStack = FilterStack {
        eps_matching: false,
        reachability: false,
        weight_pushing: false,
        label_pushing: false,
    };

    /// Epsilon matching only: the offline composition baseline.
    pub const EPS: FilterStack = FilterStack {
        eps_matching: true,
        reachability: false,
        weight_pushing: false,
        label_pushing: false,
    };

    /// Epsilon matching plus lookahead reachability.
    pub const LOOKAHEAD: FilterStack = FilterStack {
        eps_matching: true,
        reachability: true,
        weight_pushing: false,
        label_pushing: false,
    };

    /// The full stack: reachability plus both pushing filters.
    pub const LOOKAHEAD_PUSHING: FilterStack = FilterStack {
        eps_matching: true,
        reachability: true,
        weight_pushing: true,
        label_pushing: true,
    };

    pub fn with_weight_pushing(mut self) -> Self {
        self.weight_pushing = true;
        self
    }

    pub fn with_label_pushing(mut self) -> Self {
        self.label_pushing = true;
        self
    }

    /// Declared dependencies: pushing needs reachability, reachability needs
    /// epsilon matching.
    pub fn validate(&self) -> Result<()> {
        if (self.weight_pushing || self.label_pushing) && !self.reachability {
            return Err(Error::FilterDependency(
                "lookahead pushing filters require the reachability filter".into(),
            ));
        }
        if self.reachability && !self.eps_matching {
            return Err(Error::FilterDependency(
                "the reachability filter requires the epsilon-matching filter".into(),
            ));
        }
        Ok(())
    }

    pub fn any_lookahead(&self) -> bool {
        self.reachability || self.weight_pushing || self.label_pushing
    }

    /// All six stacks that pass [`FilterStack::validate`].
    pub fn all_valid() -> [FilterStack; 6] {
        [
            FilterStack::NONE,
            FilterStack::EPS,
            FilterStack::LOOKAHEAD,
            FilterStack::LOOKAHEAD.with_weight_pushing(),
            FilterStack::LOOKAHEAD.with_label_pushing(),
            FilterStack::LOOKAHEAD_PUSHING,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dependency_violations_rejected() {
        let bad = FilterStack {
            eps_matching: true,
            reachability: false,
            weight_pushing: true,
            label_pushing: false,
        };
        assert!(bad.validate().is_err());
        let bad2 = FilterStack {
            eps_matching: false,
            reachability: true,
            weight_pushing: false,
            label_pushing: false,
        };
        assert!(bad2.validate().is_err());
    }

    #[test]
    fn exactly_six_valid_stacks() {
        let mut count = 0;
        for bits in 0..16u8 {
            let stack = FilterStack {
                eps_matching: bits & 1 != 0,
                reachability: bits & 2 != 0,
                weight_pushing: bits & 4 != 0,
                label_pushing: bits & 8 != 0,
            };
            if stack.validate().is_ok() {
                count += 1;
                assert!(FilterStack::all_valid().contains(&stack));
            }
        }
        assert_eq!(count, 6);
    }
}
