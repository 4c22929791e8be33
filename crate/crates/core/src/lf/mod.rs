//! Logical forms with a sort annotation on every sub-expression.
//!
//! Text uses `;` to attach a sort: `('BOSTON';[city])`,
//! `[flight,(A;[flight])];[prop]`. The reader accepts the parenthesised
//! form everywhere and the bare `expr;sort` form wherever it is
//! unambiguous, so displays like `qterm(the;[det], A;[flight], ...)` can be
//! entered as they are written. A predicate abstraction may be written either
//! canonically as `lambda((B;[day_part]),Body)` or by juxtaposing the bound
//! variable and its body, `(B;[day_part]) Body`.
//!
//! [`serialize_lf`] emits one canonical, minimal-whitespace form in which
//! every node is written `(expr;sort)`.

use std::collections::HashMap;

use thiserror::Error;

use crate::sort::{SortError, SortHierarchy, SortTerm};
use crate::syntax::SyntaxError;

mod parse;
mod print;

pub use parse::parse_lf;
pub use print::serialize_lf;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LfError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("node {path} has no sort annotation")]
    Unannotated { path: String },
    #[error("variable {var} at {path} is not bound by an enclosing quantifier")]
    Unbound { var: String, path: String },
}

/// A variable introduced by a quantifier or abstraction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binder {
    pub name: String,
    pub sort: Option<SortTerm>,
}

impl Binder {
    pub fn new(name: impl Into<String>, sort: SortTerm) -> Self {
        Binder { name: name.into(), sort: Some(sort) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    /// `qterm(Det, Var, Restriction)`
    Qterm { det: Box<Lf>, var: Binder, restriction: Box<Lf> },
    /// `exists(Var, Body)`
    Exists { var: Binder, body: Box<Lf> },
    /// Predicate abstraction, the functional argument of noun-noun relations.
    Lambda { var: Binder, body: Box<Lf> },
    /// `[pred, Arg1, ..., ArgN]`
    Pred { name: String, args: Vec<Lf> },
    Const(String),
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lf {
    pub node: Node,
    pub sort: Option<SortTerm>,
}

impl Lf {
    pub fn new(node: Node, sort: Option<SortTerm>) -> Self {
        Lf { node, sort }
    }

    pub fn constant(name: impl Into<String>, sort: SortTerm) -> Self {
        Lf::new(Node::Const(name.into()), Some(sort))
    }

    pub fn var(name: impl Into<String>, sort: SortTerm) -> Self {
        Lf::new(Node::Var(name.into()), Some(sort))
    }

    pub fn pred(name: impl Into<String>, args: Vec<Lf>, sort: SortTerm) -> Self {
        Lf::new(Node::Pred { name: name.into(), args }, Some(sort))
    }

    pub fn qterm(det: Lf, var: Binder, restriction: Lf, sort: SortTerm) -> Self {
        Lf::new(Node::Qterm { det: Box::new(det), var, restriction: Box::new(restriction) }, Some(sort))
    }

    pub fn exists(var: Binder, body: Lf, sort: SortTerm) -> Self {
        Lf::new(Node::Exists { var, body: Box::new(body) }, Some(sort))
    }

    pub fn lambda(var: Binder, body: Lf, sort: SortTerm) -> Self {
        Lf::new(Node::Lambda { var, body: Box::new(body) }, Some(sort))
    }

    pub fn children(&self) -> Vec<&Lf> {
        match &self.node {
            Node::Qterm { det, restriction, .. } => vec![det, restriction],
            Node::Exists { body, .. } | Node::Lambda { body, .. } => vec![body],
            Node::Pred { args, .. } => args.iter().collect(),
            Node::Const(_) | Node::Var(_) => Vec::new(),
        }
    }

    fn children_mut(&mut self) -> Vec<&mut Lf> {
        match &mut self.node {
            Node::Qterm { det, restriction, .. } => vec![det, restriction],
            Node::Exists { body, .. } | Node::Lambda { body, .. } => vec![body],
            Node::Pred { args, .. } => args.iter_mut().collect(),
            Node::Const(_) | Node::Var(_) => Vec::new(),
        }
    }

    pub fn binder(&self) -> Option<&Binder> {
        match &self.node {
            Node::Qterm { var, .. } | Node::Exists { var, .. } | Node::Lambda { var, .. } => Some(var),
            _ => None,
        }
    }

    /// Pre-order traversal with the depth of each node (root = 0).
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Lf, usize)) {
        fn go<'a>(lf: &'a Lf, depth: usize, f: &mut impl FnMut(&'a Lf, usize)) {
            f(lf, depth);
            for c in lf.children() {
                go(c, depth + 1, f);
            }
        }
        go(self, 0, f);
    }

    /// Every node and every binder carries a sort.
    pub fn is_fully_annotated(&self) -> bool {
        let mut ok = true;
        self.walk(&mut |n, _| {
            ok &= n.sort.is_some() && n.binder().is_none_or(|b| b.sort.is_some());
        });
        ok
    }

    pub fn predications(&self) -> Vec<&Lf> {
        let mut out = Vec::new();
        self.walk(&mut |n, _| {
            if matches!(n.node, Node::Pred { .. }) {
                out.push(n);
            }
        });
        out
    }

    /// Renames variables (bound and referenced) through `map`; names not in
    /// the map are kept.
    pub fn rename_vars(&self, map: &HashMap<String, String>) -> Lf {
        let mut out = self.clone();
        fn go(lf: &mut Lf, map: &HashMap<String, String>) {
            let rename = |s: &mut String| {
                if let Some(n) = map.get(s.as_str()) {
                    *s = n.clone();
                }
            };
            match &mut lf.node {
                Node::Var(v) => rename(v),
                Node::Qterm { var, .. } | Node::Exists { var, .. } | Node::Lambda { var, .. } => rename(&mut var.name),
                _ => {}
            }
            for c in lf.children_mut() {
                go(c, map);
            }
        }
        go(&mut out, map);
        out
    }

    /// Every sort mentioned in an annotation is a node of `h`.
    pub fn check_sorts(&self, h: &SortHierarchy) -> Result<(), SortError> {
        let mut res = Ok(());
        self.walk(&mut |n, _| {
            if res.is_ok() {
                if let Some(s) = &n.sort {
                    res = s.check(h);
                }
                if let Some(Some(s)) = n.binder().map(|b| &b.sort) {
                    if res.is_ok() {
                        res = s.check(h);
                    }
                }
            }
        });
        res
    }
}

/// Conventional result sort of propositions.
pub const PROP: &str = "prop";

/// Fills in missing annotations: predications and `exists` default to
/// `[prop]`, a variable takes the sort of its binder, a `qterm` takes the
/// sort of its variable and an abstraction gets `([VarSort],BodySort)`.
/// Constants and binders must already be annotated.
pub fn resolve_sorts(lf: &mut Lf, h: &SortHierarchy) -> Result<(), LfError> {
    fn go(lf: &mut Lf, env: &mut Vec<(String, SortTerm)>, path: &str) -> Result<(), LfError> {
        let bound = match &lf.node {
            Node::Qterm { var, .. } | Node::Exists { var, .. } | Node::Lambda { var, .. } => {
                let sort = var.sort.clone().ok_or_else(|| LfError::Unannotated { path: format!("{path}/{}", var.name) })?;
                Some((var.name.clone(), sort))
            }
            _ => None,
        };
        let pushed = bound.is_some();
        // The qterm determiner is outside the variable's scope.
        if let Node::Qterm { det, .. } = &mut lf.node {
            go(det, env, &format!("{path}/0"))?;
        }
        if let Some(b) = bound {
            env.push(b);
        }
        let skip_det = matches!(lf.node, Node::Qterm { .. });
        for (i, c) in lf.children_mut().into_iter().enumerate() {
            if skip_det && i == 0 {
                continue;
            }
            go(c, env, &format!("{path}/{i}"))?;
        }
        if pushed {
            env.pop();
        }
        if lf.sort.is_none() {
            let sort = match &lf.node {
                Node::Pred { .. } | Node::Exists { .. } => SortTerm::atom(PROP),
                Node::Qterm { var, .. } => var.sort.clone().expect("checked above"),
                Node::Lambda { var, body } => SortTerm::func(
                    vec![var.sort.clone().expect("checked above")],
                    body.sort.clone().expect("resolved child"),
                ),
                Node::Var(v) => match env.iter().rev().find(|(n, _)| n == v) {
                    Some((_, s)) => s.clone(),
                    None => return Err(LfError::Unbound { var: v.clone(), path: path.to_string() }),
                },
                Node::Const(_) => return Err(LfError::Unannotated { path: path.to_string() }),
            };
            lf.sort = Some(sort);
        } else if let Node::Var(v) = &lf.node {
            if !env.iter().any(|(n, _)| n == v) {
                return Err(LfError::Unbound { var: v.clone(), path: path.to_string() });
            }
        }
        Ok(())
    }
    go(lf, &mut Vec::new(), "")?;
    lf.check_sorts(h)?;
    Ok(())
}
