//! Sort algebra: the hierarchy, sort terms, rules, and rule comparison.
//!
//! Atomic sorts live in a tree rooted at `top`; a more general sort subsumes
//! every sort below it. Functional sorts compare covariantly in every
//! position, and a variable stands for any sort. Because the hierarchy is a
//! tree, two atoms unify exactly when one subsumes the other.
//!
//! Rules are compared up to positional variable renaming: every variable
//! occurrence is its own unknown, so `[X,X]` and `[X,Y]` are the same rule
//! and repeated names never constrain co-instantiation.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::syntax::SyntaxError;

mod hierarchy;
mod rule;
mod term;

pub use hierarchy::{SortHierarchy, TOP};
pub use rule::{parse_rules, rules_to_text, RuleKey, RuleKind, SortRule};
pub use term::{positional_var, SortTerm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SortError {
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("sort `{child}` already has parent `{existing}`, cannot re-parent it under `{requested}`")]
    Reparent { child: String, existing: String, requested: String },
    #[error("sort `{child}` declared under unknown parent `{parent}`")]
    UnknownParent { child: String, parent: String },
    #[error("cycle in the sort hierarchy through `{0}`")]
    Cycle(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

pub fn subsumes(general: &SortTerm, specific: &SortTerm, h: &SortHierarchy) -> Result<bool, SortError> {
    h.subsumes(general, specific)
}

pub fn unify(a: &SortTerm, b: &SortTerm, h: &SortHierarchy) -> Result<Option<SortTerm>, SortError> {
    h.unify(a, b)
}

/// Same predicate and arity, and `general` subsumes `specific` in every
/// argument position and in the result. Rules mentioning sorts outside `h`
/// are never related.
pub fn rule_subsumes(general: &SortRule, specific: &SortRule, h: &SortHierarchy) -> bool {
    general.predicate == specific.predicate
        && general.arity() == specific.arity()
        && general.args.iter().zip(&specific.args).all(|(g, s)| h.subsumes(g, s).unwrap_or(false))
        && h.subsumes(&general.result, &specific.result).unwrap_or(false)
}

/// Positionwise unification of two rules with the same predicate and arity.
pub fn rules_unify(a: &SortRule, b: &SortRule, h: &SortHierarchy) -> bool {
    a.predicate == b.predicate
        && a.arity() == b.arity()
        && a.args.iter().zip(&b.args).all(|(x, y)| matches!(h.unify(x, y), Ok(Some(_))))
        && matches!(h.unify(&a.result, &b.result), Ok(Some(_)))
}

/// Relation of a harvested rule to a reference rule set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MappingCategory {
    Exact,
    Incompatible,
    SubsumedBy,
    Subsumes,
    Incomparable,
}

impl MappingCategory {
    /// Table order.
    pub const ALL: [MappingCategory; 5] = [
        MappingCategory::Exact,
        MappingCategory::Incompatible,
        MappingCategory::SubsumedBy,
        MappingCategory::Subsumes,
        MappingCategory::Incomparable,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MappingCategory::Exact => "Exact",
            MappingCategory::Incompatible => "Incompatible",
            MappingCategory::SubsumedBy => "Subsumed-by",
            MappingCategory::Subsumes => "Subsumes",
            MappingCategory::Incomparable => "Incomparable",
        }
    }
}

impl fmt::Display for MappingCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MappingCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        MappingCategory::ALL
            .into_iter()
            .find(|c| c.label().chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase() == norm)
            .ok_or_else(|| format!("unknown mapping category `{s}`"))
    }
}

/// Categorises `corpus` against `refs` with precedence
/// Exact > SubsumedBy > Subsumes > Incomparable > Incompatible.
/// References with another predicate or arity are ignored.
pub fn compare_rule(corpus: &SortRule, refs: &[SortRule], h: &SortHierarchy) -> MappingCategory {
    let candidates: Vec<&SortRule> =
        refs.iter().filter(|r| r.predicate == corpus.predicate && r.arity() == corpus.arity()).collect();
    if candidates.iter().any(|r| r.alpha_eq(corpus)) {
        MappingCategory::Exact
    } else if candidates.iter().any(|r| rule_subsumes(r, corpus, h)) {
        MappingCategory::SubsumedBy
    } else if candidates.iter().any(|r| rule_subsumes(corpus, r, h)) {
        MappingCategory::Subsumes
    } else if candidates.iter().any(|r| rules_unify(corpus, r, h)) {
        MappingCategory::Incomparable
    } else {
        MappingCategory::Incompatible
    }
}
