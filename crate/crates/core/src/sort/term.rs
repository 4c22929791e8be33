use std::fmt;

use crate::syntax::{self, write_name, Term};

use super::{SortError, SortHierarchy};

/// A sort term: a variable, an atomic sort from the hierarchy, or a
/// functional sort `([Arg1,...,ArgN], Result)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SortTerm {
    Var(String),
    Atom(String),
    Func(Vec<SortTerm>, Box<SortTerm>),
}

impl SortTerm {
    pub fn var(name: impl Into<String>) -> Self {
        SortTerm::Var(name.into())
    }

    pub fn atom(name: impl Into<String>) -> Self {
        SortTerm::Atom(name.into())
    }

    pub fn func(args: Vec<SortTerm>, result: SortTerm) -> Self {
        assert!(!args.is_empty(), "functional sorts take at least one argument");
        SortTerm::Func(args, Box::new(result))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, SortTerm::Var(_))
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SortTerm::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn has_vars(&self) -> bool {
        match self {
            SortTerm::Var(_) => true,
            SortTerm::Atom(_) => false,
            SortTerm::Func(args, r) => args.iter().any(SortTerm::has_vars) || r.has_vars(),
        }
    }

    /// Calls `f` on every atom name in the term.
    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            SortTerm::Var(_) => {}
            SortTerm::Atom(a) => f(a),
            SortTerm::Func(args, r) => {
                args.iter().for_each(|a| a.for_each_atom(f));
                r.for_each_atom(f);
            }
        }
    }

    /// Fails on the first atom that is not a node of `h`.
    pub fn check(&self, h: &SortHierarchy) -> Result<(), SortError> {
        let mut missing = None;
        self.for_each_atom(&mut |a| {
            if missing.is_none() && !h.contains(a) {
                missing = Some(a.to_string());
            }
        });
        missing.map_or(Ok(()), |m| Err(SortError::UnknownSort(m)))
    }

    /// Renames every variable occurrence by position (`A`, `B`, ...), so
    /// alpha-equivalent terms become structurally equal.
    pub fn anonymize(&self, counter: &mut usize) -> SortTerm {
        match self {
            SortTerm::Var(_) => {
                let v = positional_var(*counter);
                *counter += 1;
                SortTerm::Var(v)
            }
            SortTerm::Atom(a) => SortTerm::Atom(a.clone()),
            SortTerm::Func(args, r) => {
                let args = args.iter().map(|a| a.anonymize(counter)).collect();
                let r = r.anonymize(counter);
                SortTerm::Func(args, Box::new(r))
            }
        }
    }

    /// Structural equality in which any two variables match.
    pub fn alpha_eq(&self, other: &SortTerm) -> bool {
        match (self, other) {
            (SortTerm::Var(_), SortTerm::Var(_)) => true,
            (SortTerm::Atom(a), SortTerm::Atom(b)) => a == b,
            (SortTerm::Func(xa, xr), SortTerm::Func(ya, yr)) => {
                xa.len() == ya.len() && xa.iter().zip(ya).all(|(x, y)| x.alpha_eq(y)) && xr.alpha_eq(yr)
            }
            _ => false,
        }
    }

    /// Interprets a generic clause term as a sort.
    pub fn from_term(t: &Term) -> Result<SortTerm, String> {
        match t {
            Term::Var(v) => Ok(SortTerm::Var(v.clone())),
            Term::List(items) => match items.as_slice() {
                [Term::Name(n)] => Ok(SortTerm::Atom(n.clone())),
                _ => Err(format!("`{t}` is not a sort: atomic sorts are written [name]")),
            },
            Term::Tuple(items) => match items.as_slice() {
                [inner] => SortTerm::from_term(inner),
                [Term::List(args), result] if !args.is_empty() => {
                    let args = args.iter().map(SortTerm::from_term).collect::<Result<Vec<_>, _>>()?;
                    Ok(SortTerm::Func(args, Box::new(SortTerm::from_term(result)?)))
                }
                _ => Err(format!("`{t}` is not a sort: functional sorts are written ([Arg,...],Result)")),
            },
            _ => Err(format!("expected a sort, found {} `{t}`", t.describe())),
        }
    }

    pub fn parse(text: &str) -> Result<SortTerm, SortError> {
        let t = syntax::read_one(text)?;
        SortTerm::from_term(&t).map_err(|message| SortError::Malformed { line: 1, message })
    }
}

/// `A`..`Z`, then `V26`, `V27`, ...
pub fn positional_var(i: usize) -> String {
    if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("V{i}")
    }
}

impl fmt::Display for SortTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SortTerm::Var(v) => f.write_str(v),
            SortTerm::Atom(a) => {
                f.write_str("[")?;
                write_name(f, a)?;
                f.write_str("]")
            }
            SortTerm::Func(args, r) => {
                f.write_str("([")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "],{r})")
            }
        }
    }
}

impl SortHierarchy {
    /// `general` subsumes `specific`: a variable subsumes anything; atoms by
    /// ancestry; functional sorts covariantly, position by position. A
    /// variable on the specific side is subsumed only by a variable.
    pub fn subsumes(&self, general: &SortTerm, specific: &SortTerm) -> Result<bool, SortError> {
        match (general, specific) {
            (SortTerm::Var(_), s) => s.check(self).map(|_| true),
            (SortTerm::Atom(g), SortTerm::Atom(s)) => self.is_ancestor_or_self(g, s),
            (SortTerm::Func(ga, gr), SortTerm::Func(sa, sr)) if ga.len() == sa.len() => {
                for (g, s) in ga.iter().zip(sa) {
                    if !self.subsumes(g, s)? {
                        general.check(self)?;
                        specific.check(self)?;
                        return Ok(false);
                    }
                }
                self.subsumes(gr, sr)
            }
            (g, s) => {
                g.check(self)?;
                s.check(self)?;
                Ok(false)
            }
        }
    }

    /// Greatest lower bound of two sorts, or `None` on unification failure.
    pub fn unify(&self, a: &SortTerm, b: &SortTerm) -> Result<Option<SortTerm>, SortError> {
        match (a, b) {
            (SortTerm::Var(_), t) | (t, SortTerm::Var(_)) => {
                t.check(self)?;
                Ok(Some(t.clone()))
            }
            (SortTerm::Atom(x), SortTerm::Atom(y)) => Ok(self.meet(x, y)?.map(SortTerm::atom)),
            (SortTerm::Func(xa, xr), SortTerm::Func(ya, yr)) if xa.len() == ya.len() => {
                let mut args = Vec::with_capacity(xa.len());
                let mut failed = false;
                for (x, y) in xa.iter().zip(ya) {
                    match self.unify(x, y)? {
                        Some(m) => args.push(m),
                        None => failed = true,
                    }
                }
                let r = self.unify(xr, yr)?;
                match (failed, r) {
                    (false, Some(r)) => Ok(Some(SortTerm::Func(args, Box::new(r)))),
                    _ => Ok(None),
                }
            }
            (x, y) => {
                x.check(self)?;
                y.check(self)?;
                Ok(None)
            }
        }
    }
}
