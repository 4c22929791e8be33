use crate::sort::{SortHierarchy, SortTerm};
use crate::syntax::{Cursor, SyntaxError, Tok};

use super::{Binder, Lf, LfError, Node};

/// Parses logical-form text, checking every annotation against `h`.
pub fn parse_lf(text: &str, h: &SortHierarchy) -> Result<Lf, LfError> {
    let mut cur = Cursor::new(text)?;
    let lf = expr(&mut cur)?;
    cur.eat(&Tok::Dot);
    if !cur.at_end() {
        return Err(cur.unexpected("end of logical form").into());
    }
    lf.check_sorts(h)?;
    Ok(lf)
}

fn starts_primary(t: Option<&Tok>) -> bool {
    matches!(t, Some(Tok::LParen | Tok::LBrack | Tok::Name(_) | Tok::Var(_)))
}

/// `primary [; sort]`
fn expr(cur: &mut Cursor) -> Result<Lf, SyntaxError> {
    let mut lf = primary(cur)?;
    if cur.eat(&Tok::Semi) {
        let pos = cur.pos();
        if lf.sort.is_some() {
            return Err(SyntaxError::new(pos, "expression is annotated twice"));
        }
        lf.sort = Some(sort(cur)?);
    }
    Ok(lf)
}

fn primary(cur: &mut Cursor) -> Result<Lf, SyntaxError> {
    let pos = cur.pos();
    match cur.peek().cloned() {
        Some(Tok::LParen) => {
            cur.advance();
            let inner = expr(cur)?;
            cur.expect(&Tok::RParen)?;
            // `(V;Sort) Body` is an abstraction over V.
            if let (Node::Var(v), Some(s)) = (&inner.node, &inner.sort) {
                if starts_primary(cur.peek()) {
                    let body = primary(cur)?;
                    return Ok(Lf::new(
                        Node::Lambda { var: Binder { name: v.clone(), sort: Some(s.clone()) }, body: Box::new(body) },
                        None,
                    ));
                }
            }
            Ok(inner)
        }
        Some(Tok::LBrack) => {
            cur.advance();
            let name = match cur.advance().map(|t| t.tok) {
                Some(Tok::Name(n)) => n,
                _ => return Err(SyntaxError::new(pos, "a predication starts with a predicate name")),
            };
            let mut args = Vec::new();
            while cur.eat(&Tok::Comma) {
                args.push(expr(cur)?);
            }
            cur.expect(&Tok::RBrack)?;
            Ok(Lf::new(Node::Pred { name, args }, None))
        }
        Some(Tok::Var(v)) => {
            cur.advance();
            Ok(Lf::new(Node::Var(v), None))
        }
        Some(Tok::Name(n)) => {
            cur.advance();
            if !cur.eat(&Tok::LParen) {
                return Ok(Lf::new(Node::Const(n), None));
            }
            let node = match n.as_str() {
                "qterm" => {
                    let det = expr(cur)?;
                    cur.expect(&Tok::Comma)?;
                    let var = binder(cur)?;
                    cur.expect(&Tok::Comma)?;
                    let restriction = expr(cur)?;
                    Node::Qterm { det: Box::new(det), var, restriction: Box::new(restriction) }
                }
                "exists" | "lambda" => {
                    let var = binder(cur)?;
                    cur.expect(&Tok::Comma)?;
                    let body = Box::new(expr(cur)?);
                    if n == "exists" {
                        Node::Exists { var, body }
                    } else {
                        Node::Lambda { var, body }
                    }
                }
                other => return Err(SyntaxError::new(pos, format!("unsupported operator `{other}`"))),
            };
            cur.expect(&Tok::RParen)?;
            Ok(Lf::new(node, None))
        }
        _ => Err(cur.unexpected("an expression")),
    }
}

fn binder(cur: &mut Cursor) -> Result<Binder, SyntaxError> {
    let pos = cur.pos();
    let lf = expr(cur)?;
    match lf.node {
        Node::Var(name) => Ok(Binder { name, sort: lf.sort }),
        _ => Err(SyntaxError::new(pos, "expected a quantified variable")),
    }
}

/// `Var | [name] | ([S,...],S) | [S,...],S`
fn sort(cur: &mut Cursor) -> Result<SortTerm, SyntaxError> {
    let pos = cur.pos();
    match cur.peek().cloned() {
        Some(Tok::Var(v)) => {
            cur.advance();
            Ok(SortTerm::Var(v))
        }
        Some(Tok::LBrack) => {
            if let Some(Tok::Name(n)) = cur.peek2().cloned() {
                cur.advance();
                cur.advance();
                cur.expect(&Tok::RBrack)?;
                return Ok(SortTerm::Atom(n));
            }
            // Unparenthesised functional sort, as in `;[[day_part]],[prop]`.
            let args = sort_list(cur)?;
            cur.expect(&Tok::Comma)?;
            let result = sort(cur)?;
            Ok(SortTerm::Func(args, Box::new(result)))
        }
        Some(Tok::LParen) => {
            cur.advance();
            if cur.peek() != Some(&Tok::LBrack) {
                return Err(SyntaxError::new(pos, "a functional sort is written ([Arg,...],Result)"));
            }
            let args = sort_list(cur)?;
            cur.expect(&Tok::Comma)?;
            let result = sort(cur)?;
            cur.expect(&Tok::RParen)?;
            Ok(SortTerm::Func(args, Box::new(result)))
        }
        _ => Err(cur.unexpected("a sort")),
    }
}

fn sort_list(cur: &mut Cursor) -> Result<Vec<SortTerm>, SyntaxError> {
    cur.expect(&Tok::LBrack)?;
    let mut out = vec![sort(cur)?];
    while cur.eat(&Tok::Comma) {
        out.push(sort(cur)?);
    }
    cur.expect(&Tok::RBrack)?;
    Ok(out)
}
