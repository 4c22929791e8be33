use std::fmt::Write as _;

use crate::syntax::write_name;

use super::{Binder, Lf, LfError, Node};

/// Canonical text of a fully annotated logical form.
pub fn serialize_lf(lf: &Lf) -> Result<String, LfError> {
    let mut out = String::new();
    write_lf(&mut out, lf, "")?;
    Ok(out)
}

fn write_lf(out: &mut String, lf: &Lf, path: &str) -> Result<(), LfError> {
    let sort = lf.sort.as_ref().ok_or_else(|| LfError::Unannotated { path: path.to_string() })?;
    out.push('(');
    match &lf.node {
        Node::Qterm { det, var, restriction } => {
            out.push_str("qterm(");
            write_lf(out, det, &format!("{path}/0"))?;
            out.push(',');
            write_binder(out, var, path)?;
            out.push(',');
            write_lf(out, restriction, &format!("{path}/1"))?;
            out.push(')');
        }
        Node::Exists { var, body } | Node::Lambda { var, body } => {
            out.push_str(if matches!(lf.node, Node::Exists { .. }) { "exists(" } else { "lambda(" });
            write_binder(out, var, path)?;
            out.push(',');
            write_lf(out, body, &format!("{path}/0"))?;
            out.push(')');
        }
        Node::Pred { name, args } => {
            out.push('[');
            write_name(out, name).expect("String write");
            for (i, a) in args.iter().enumerate() {
                out.push(',');
                write_lf(out, a, &format!("{path}/{i}"))?;
            }
            out.push(']');
        }
        Node::Const(c) => write_name(out, c).expect("String write"),
        Node::Var(v) => out.push_str(v),
    }
    let _ = write!(out, ";{sort})");
    Ok(())
}

fn write_binder(out: &mut String, b: &Binder, path: &str) -> Result<(), LfError> {
    let sort = b.sort.as_ref().ok_or_else(|| LfError::Unannotated { path: format!("{path}/{}", b.name) })?;
    let _ = write!(out, "({};{sort})", b.name);
    Ok(())
}
