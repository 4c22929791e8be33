use std::fmt;

use crate::syntax::{self, write_name, Term};

use super::{SortError, SortHierarchy, SortTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Sor,
    Signature,
}

impl RuleKind {
    pub fn functor(self) -> &'static str {
        match self {
            RuleKind::Sor => "sor",
            RuleKind::Signature => "signature",
        }
    }
}

/// A sort rule: `sor(pred, ([Args], Result))` or its `signature` counterpart.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SortRule {
    pub kind: RuleKind,
    pub predicate: String,
    pub args: Vec<SortTerm>,
    pub result: SortTerm,
}

/// Identity of a rule up to positional variable renaming, ignoring its kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleKey {
    pub predicate: String,
    pub args: Vec<SortTerm>,
    pub result: SortTerm,
}

impl fmt::Display for RuleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_body(f, &self.predicate, &self.args, &self.result)
    }
}

impl SortRule {
    pub fn sor(predicate: impl Into<String>, args: Vec<SortTerm>, result: SortTerm) -> Self {
        SortRule { kind: RuleKind::Sor, predicate: predicate.into(), args, result }
    }

    pub fn signature(predicate: impl Into<String>, args: Vec<SortTerm>, result: SortTerm) -> Self {
        SortRule { kind: RuleKind::Signature, predicate: predicate.into(), args, result }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Contains variables. Harvested rules never are; signatures and
    /// hand-entered reference rules may be.
    pub fn is_schematic(&self) -> bool {
        self.args.iter().any(SortTerm::has_vars) || self.result.has_vars()
    }

    pub fn with_kind(mut self, kind: RuleKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn key(&self) -> RuleKey {
        let mut n = 0;
        let args = self.args.iter().map(|a| a.anonymize(&mut n)).collect();
        let result = self.result.anonymize(&mut n);
        RuleKey { predicate: self.predicate.clone(), args, result }
    }

    /// Same predicate, arity and alpha-equivalent terms.
    pub fn alpha_eq(&self, other: &SortRule) -> bool {
        self.predicate == other.predicate
            && self.args.len() == other.args.len()
            && self.args.iter().zip(&other.args).all(|(a, b)| a.alpha_eq(b))
            && self.result.alpha_eq(&other.result)
    }

    pub fn check(&self, h: &SortHierarchy) -> Result<(), SortError> {
        self.args.iter().try_for_each(|a| a.check(h))?;
        self.result.check(h)
    }

    /// The clause text, terminated by a dot.
    pub fn to_clause(&self) -> String {
        format!("{self}.")
    }

    /// Interprets `sor(P, Body)`, `signature(P, Body)` or the flat
    /// `sor(P, [Args], Result)` form.
    pub fn from_term(t: &Term) -> Result<SortRule, String> {
        let Term::Compound(functor, parts) = t else {
            return Err(format!("expected a sor/2 or signature/2 clause, found {} `{t}`", t.describe()));
        };
        let kind = match functor.as_str() {
            "sor" => RuleKind::Sor,
            "signature" => RuleKind::Signature,
            other => return Err(format!("unknown clause `{other}`, expected sor or signature")),
        };
        let predicate = match parts.first() {
            Some(Term::Name(p)) => p.clone(),
            Some(other) => return Err(format!("predicate must be a name, found `{other}`")),
            None => return Err("missing predicate".into()),
        };
        let sort = |t: &Term| SortTerm::from_term(t);
        let args_of = |items: &[Term]| items.iter().map(sort).collect::<Result<Vec<_>, _>>();
        let (args, result) = match &parts[1..] {
            [Term::List(args), result] => (args_of(args)?, sort(result)?),
            [Term::Tuple(body)] => match body.as_slice() {
                [Term::List(args), result] => (args_of(args)?, sort(result)?),
                [result] => (Vec::new(), sort(result)?),
                _ => return Err(format!("malformed rule body `{}`", parts[1])),
            },
            [result] => (Vec::new(), sort(result)?),
            _ => return Err(format!("`{t}` has the wrong number of parts")),
        };
        Ok(SortRule { kind, predicate, args, result })
    }

    pub fn parse(text: &str) -> Result<SortRule, SortError> {
        let t = syntax::read_one(text)?;
        SortRule::from_term(&t).map_err(|message| SortError::Malformed { line: 1, message })
    }
}

fn write_body(f: &mut impl fmt::Write, predicate: &str, args: &[SortTerm], result: &SortTerm) -> fmt::Result {
    write_name(f, predicate)?;
    if args.is_empty() {
        write!(f, ",({result})")
    } else {
        f.write_str(",([")?;
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "],{result})")
    }
}

impl fmt::Display for SortRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.kind.functor())?;
        write_body(f, &self.predicate, &self.args, &self.result)?;
        f.write_str(")")
    }
}

/// Parses a rule file (`sor` and/or `signature` clauses).
pub fn parse_rules(text: &str) -> Result<Vec<SortRule>, SortError> {
    syntax::read_clauses(text)?
        .iter()
        .map(|c| SortRule::from_term(&c.term).map_err(|message| SortError::Malformed { line: c.pos.line, message }))
        .collect()
}

/// One clause per line, in the given order.
pub fn rules_to_text(rules: &[SortRule]) -> String {
    rules.iter().map(|r| r.to_clause() + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_all_rule_shapes() {
        let text = "sor('BOSTON', [city]).\n\
                    sor(to, ([[flight],[city]], [prop])).\n\
                    signature('LA_GUARDIA',([airport])).\n\
                    signature(at,([X,Y],[prop])).\n\
                    sor(n_n_rel,[([[day_part]],[prop]),[flight]],[prop]).";
        let rules = parse_rules(text).unwrap();
        let printed: Vec<String> = rules.iter().map(ToString::to_string).collect();
        assert_eq!(printed, vec![
            "sor('BOSTON',([city]))",
            "sor(to,([[flight],[city]],[prop]))",
            "signature('LA_GUARDIA',([airport]))",
            "signature(at,([X,Y],[prop]))",
            "sor(n_n_rel,([([[day_part]],[prop]),[flight]],[prop]))",
        ]);
        assert_eq!(rules[0].arity(), 0);
        assert!(rules[3].is_schematic());
        assert!(!rules[1].is_schematic());
        assert_eq!(parse_rules(&rules_to_text(&rules)).unwrap(), rules);
    }

    #[test]
    fn keys_ignore_kind_and_variable_names() {
        let a = SortRule::parse("signature(at,([X,Y],[prop]))").unwrap();
        let b = SortRule::parse("sor(at,([P,P],[prop]))").unwrap();
        assert_eq!(a.key(), b.key());
        assert!(a.alpha_eq(&b));
        assert_eq!(a.key().to_string(), "at,([A,B],[prop])");
    }

    #[test]
    fn rejects_malformed() {
        assert!(SortRule::parse("foo(at, [prop])").is_err());
        assert!(SortRule::parse("sor(X, [prop])").is_err());
        assert!(SortRule::parse("sor(at, flight)").is_err());
        let err = parse_rules("sor(a,[b]).\nsor(a, b).").unwrap_err();
        assert!(matches!(err, SortError::Malformed { line: 2, .. }));
    }
}
