//! Tokenizer and generic clause-term reader shared by every text format.
//!
//! All the file formats in this crate are Prolog-flavoured: `isa(a, b).`,
//! `sor(to, ([[flight],[city]],[prop])).`, `lex(flights, noun, flight).`,
//! and so on. They are read into a small generic [`Term`] tree first and then
//! interpreted by the owning module. Logical forms reuse the tokenizer but
//! have their own grammar (see [`crate::lf`]).

use std::fmt;

use thiserror::Error;

/// A syntax error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError { line: pos.line, col: pos.col, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Semi,
    /// Clause terminator.
    Dot,
    Var(String),
    /// Bare lowercase identifier, integer, or quoted atom (quotes removed).
    Name(String),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::LBrack => f.write_str("'['"),
            Tok::RBrack => f.write_str("']'"),
            Tok::Comma => f.write_str("','"),
            Tok::Semi => f.write_str("';'"),
            Tok::Dot => f.write_str("'.'"),
            Tok::Var(v) => write!(f, "variable {v}"),
            Tok::Name(n) => write!(f, "name {n}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        match c {
            c if c.is_whitespace() => bump!(),
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    bump!();
                }
            }
            '(' | ')' | '[' | ']' | ',' | ';' => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBrack,
                    ']' => Tok::RBrack,
                    ',' => Tok::Comma,
                    _ => Tok::Semi,
                };
                out.push(Token { tok, pos });
                bump!();
            }
            '.' => {
                out.push(Token { tok: Tok::Dot, pos });
                bump!();
            }
            '\'' => {
                bump!();
                let mut s = String::new();
                loop {
                    if i >= chars.len() {
                        return Err(SyntaxError::new(pos, "unterminated quoted name"));
                    }
                    match chars[i] {
                        '\'' => {
                            bump!();
                            break;
                        }
                        '\\' if i + 1 < chars.len() => {
                            bump!();
                            s.push(chars[i]);
                            bump!();
                        }
                        '\n' => return Err(SyntaxError::new(pos, "newline in quoted name")),
                        ch => {
                            s.push(ch);
                            bump!();
                        }
                    }
                }
                out.push(Token { tok: Tok::Name(s), pos });
            }
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let mut s = String::new();
                s.push(c);
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    bump!();
                }
                out.push(Token { tok: Tok::Name(s), pos });
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    bump!();
                }
                // Case is significant only inside quotes.
                let tok = if c.is_uppercase() || c == '_' { Tok::Var(s) } else { Tok::Name(s.to_lowercase()) };
                out.push(Token { tok, pos });
            }
            other => return Err(SyntaxError::new(pos, format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

/// True when `s` prints without quotes: a lowercase-initial identifier or an integer.
pub fn is_bare_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        Some('-') => {
            let rest = &s[1..];
            !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())
        }
        Some(c) if c.is_ascii_digit() => chars.all(|c| c.is_ascii_digit()),
        _ => false,
    }
}

pub fn is_var_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Writes a name, quoting it when it is not a bare identifier.
pub fn write_name(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    if is_bare_name(s) {
        f.write_str(s)
    } else {
        f.write_char('\'')?;
        for c in s.chars() {
            if c == '\'' || c == '\\' {
                f.write_char('\\')?;
            }
            f.write_char(c)?;
        }
        f.write_char('\'')
    }
}

pub fn quote_name(s: &str) -> String {
    let mut out = String::new();
    write_name(&mut out, s).expect("writing to a String");
    out
}

/// Generic clause term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Name(String),
    Var(String),
    List(Vec<Term>),
    /// A parenthesised comma sequence, e.g. `([X,Y],[prop])`.
    Tuple(Vec<Term>),
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn describe(&self) -> &'static str {
        match self {
            Term::Name(_) => "name",
            Term::Var(_) => "variable",
            Term::List(_) => "list",
            Term::Tuple(_) => "parenthesised group",
            Term::Compound(..) => "compound term",
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn seq(f: &mut fmt::Formatter<'_>, items: &[Term]) -> fmt::Result {
            for (i, t) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            Ok(())
        }
        match self {
            Term::Name(n) => write_name(f, n),
            Term::Var(v) => f.write_str(v),
            Term::List(items) => {
                f.write_str("[")?;
                seq(f, items)?;
                f.write_str("]")
            }
            Term::Tuple(items) => {
                f.write_str("(")?;
                seq(f, items)?;
                f.write_str(")")
            }
            Term::Compound(name, args) => {
                write_name(f, name)?;
                f.write_str("(")?;
                seq(f, args)?;
                f.write_str(")")
            }
        }
    }
}

/// Cursor over a token stream.
pub struct Cursor {
    toks: Vec<Token>,
    at: usize,
    end: Pos,
}

impl Cursor {
    pub fn new(text: &str) -> Result<Self, SyntaxError> {
        let toks = tokenize(text)?;
        let lines: Vec<&str> = text.split('\n').collect();
        let end = Pos { line: lines.len(), col: lines.last().map_or(0, |l| l.chars().count()) + 1 };
        Ok(Cursor { toks, at: 0, end })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    pub fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|t| &t.tok)
    }

    pub fn pos(&self) -> Pos {
        self.toks.get(self.at).map_or(self.end, |t| t.pos)
    }

    pub fn at_end(&self) -> bool {
        self.at >= self.toks.len()
    }

    pub fn advance(&mut self) -> Option<Token> {
        let t = self.toks.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), SyntaxError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("{tok}")))
        }
    }

    pub fn unexpected(&self, wanted: &str) -> SyntaxError {
        match self.toks.get(self.at) {
            Some(t) => SyntaxError::new(t.pos, format!("expected {wanted}, found {}", t.tok)),
            None => SyntaxError::new(self.end, format!("expected {wanted}, found end of input")),
        }
    }

    pub fn read_term(&mut self) -> Result<Term, SyntaxError> {
        let pos = self.pos();
        match self.advance().map(|t| t.tok) {
            Some(Tok::Var(v)) => Ok(Term::Var(v)),
            Some(Tok::Name(n)) => {
                if self.eat(&Tok::LParen) {
                    let args = self.read_seq(&Tok::RParen)?;
                    Ok(Term::Compound(n, args))
                } else {
                    Ok(Term::Name(n))
                }
            }
            Some(Tok::LBrack) => Ok(Term::List(self.read_seq(&Tok::RBrack)?)),
            Some(Tok::LParen) => Ok(Term::Tuple(self.read_seq(&Tok::RParen)?)),
            Some(other) => Err(SyntaxError::new(pos, format!("expected a term, found {other}"))),
            None => Err(SyntaxError::new(pos, "expected a term, found end of input")),
        }
    }

    fn read_seq(&mut self, close: &Tok) -> Result<Vec<Term>, SyntaxError> {
        let mut items = Vec::new();
        if self.eat(close) {
            return Ok(items);
        }
        loop {
            items.push(self.read_term()?);
            if self.eat(close) {
                return Ok(items);
            }
            self.expect(&Tok::Comma)?;
        }
    }
}

/// A clause and the position of its first token.
#[derive(Debug, Clone)]
pub struct Clause {
    pub term: Term,
    pub pos: Pos,
}

/// Reads `term.` clauses until end of input.
pub fn read_clauses(text: &str) -> Result<Vec<Clause>, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let mut out = Vec::new();
    while !cur.at_end() {
        let pos = cur.pos();
        let term = cur.read_term()?;
        cur.expect(&Tok::Dot)?;
        out.push(Clause { term, pos });
    }
    Ok(out)
}

/// Reads exactly one term (no trailing dot required, one allowed).
pub fn read_one(text: &str) -> Result<Term, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let term = cur.read_term()?;
    cur.eat(&Tok::Dot);
    if !cur.at_end() {
        return Err(cur.unexpected("end of input"));
    }
    Ok(term)
}
