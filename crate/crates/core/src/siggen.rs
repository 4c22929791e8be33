//! Initial signature file: permissive rules generated from the lexicon.
//!
//! Lexical predicates get their inherent sort on the first argument and
//! variables everywhere else; prepositions and the predicates introduced by
//! grammar rules get variables only, so they commit to nothing until parsing
//! fills their argument sorts in. Entries without an inherent sort get a
//! fresh sort `lex_<predicate>` directly under `top`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::grammar::{Category, Lexicon, NameSortTable};
use crate::sort::{SortError, SortHierarchy, SortRule, SortTerm, TOP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SigGenError {
    #[error("name `{0}` has no entry in the name-sort table")]
    MissingName(String),
    #[error("conflicting signatures for {predicate}/{arity}: `{first}` and `{second}`")]
    Duplicate { predicate: String, arity: usize, first: String, second: String },
    #[error(transparent)]
    Sort(#[from] SortError),
}

/// Generated signatures and the hierarchy extended with fresh lexical sorts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signatures {
    pub rules: Vec<SortRule>,
    pub hierarchy: SortHierarchy,
    pub fresh_sorts: Vec<String>,
}

fn vars(names: &[&str]) -> Vec<SortTerm> {
    names.iter().map(|n| SortTerm::var(*n)).collect()
}

/// `connectors` lists predicates built by grammar rules with their arities;
/// `implicit` lists determiner constants the grammar supplies itself.
/// `hand` rules are merged in after the generated ones.
pub fn generate_signatures(
    lexicon: &Lexicon,
    names: &NameSortTable,
    connectors: &[(String, usize)],
    implicit: &[&str],
    hand: &[SortRule],
    h: &SortHierarchy,
) -> Result<Signatures, SigGenError> {
    let mut hierarchy = h.clone();
    let mut fresh_sorts = Vec::new();
    let mut inherent = |pred: &str, given: Option<&SortTerm>| -> Result<SortTerm, SigGenError> {
        if let Some(s) = given {
            s.check(h)?;
            return Ok(s.clone());
        }
        let fresh = format!("lex_{pred}");
        if !hierarchy.contains(&fresh) {
            hierarchy.add(&fresh, TOP)?;
            fresh_sorts.push(fresh.clone());
        }
        Ok(SortTerm::atom(fresh))
    };
    let prop = SortTerm::atom("prop");
    let mut out: Vec<SortRule> = Vec::new();
    for e in &lexicon.entries {
        let p = e.predicate.as_str();
        let rule = match e.category {
            Category::Noun | Category::Verb => {
                SortRule::signature(p, vec![inherent(p, e.inherent.as_ref())?], prop.clone())
            }
            Category::Adj => {
                let mut args = vec![inherent(p, e.inherent.as_ref())?];
                args.extend(vars(&["A", "B"]));
                SortRule::signature(p, args, prop.clone())
            }
            Category::Adv => {
                let mut args = vec![inherent(p, e.inherent.as_ref())?];
                args.extend(vars(&["A"]));
                SortRule::signature(p, args, prop.clone())
            }
            Category::Prep => SortRule::signature(p, vars(&["X", "Y"]), prop.clone()),
            Category::Name => {
                let s = names.get(p).ok_or_else(|| SigGenError::MissingName(p.to_string()))?;
                s.check(h)?;
                SortRule::signature(p, Vec::new(), s.clone())
            }
            Category::Number | Category::Tool | Category::Det => {
                SortRule::signature(p, Vec::new(), inherent(p, e.inherent.as_ref())?)
            }
        };
        out.push(rule);
    }
    for (p, n) in connectors {
        let args = (0..*n).map(|i| SortTerm::var(["X", "Y", "Z"].get(i).map_or(format!("V{i}"), |v| v.to_string()))).collect();
        out.push(SortRule::signature(p.clone(), args, prop.clone()));
    }
    for d in implicit {
        out.push(SortRule::signature(*d, Vec::new(), inherent(d, None)?));
    }
    for r in hand {
        r.check(&hierarchy)?;
        out.push(r.clone().with_kind(crate::sort::RuleKind::Signature));
    }
    let mut merged: Vec<SortRule> = Vec::new();
    for r in out {
        match merged.iter().find(|m| m.predicate == r.predicate && m.arity() == r.arity()) {
            Some(m) if m.alpha_eq(&r) => {}
            Some(m) => {
                return Err(SigGenError::Duplicate {
                    predicate: r.predicate.clone(),
                    arity: r.arity(),
                    first: m.to_string(),
                    second: r.to_string(),
                })
            }
            None => merged.push(r),
        }
    }
    Ok(Signatures { rules: merged, hierarchy, fresh_sorts })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SignatureStats {
    pub total: usize,
    pub zero_arity: usize,
    pub hand_added: usize,
    pub by_arity: BTreeMap<usize, usize>,
}

impl SignatureStats {
    pub fn zero_arity_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.zero_arity as f64 / self.total as f64
        }
    }
}

impl fmt::Display for SignatureStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "total\t{}", self.total)?;
        writeln!(f, "zero_arity\t{}\t{:.3}", self.zero_arity, self.zero_arity_fraction())?;
        writeln!(f, "hand_added\t{}", self.hand_added)?;
        for (a, n) in &self.by_arity {
            writeln!(f, "arity_{a}\t{n}")?;
        }
        Ok(())
    }
}

/// Counts by arity; rules equal (up to renaming) to one in `hand` count as hand-added.
pub fn signature_stats(signatures: &[SortRule], hand: &[SortRule]) -> SignatureStats {
    let mut s = SignatureStats { total: signatures.len(), ..Default::default() };
    for r in signatures {
        *s.by_arity.entry(r.arity()).or_default() += 1;
        if r.arity() == 0 {
            s.zero_arity += 1;
        }
        if hand.iter().any(|h| h.alpha_eq(r)) {
            s.hand_added += 1;
        }
    }
    s
}
