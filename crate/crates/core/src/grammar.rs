//! Lexicon, grammar, name-sort table and corpus: the parser's inputs.
//!
//! ```text
//! lex(flights, noun, flight, [flight]).      % word, category, predicate, inherent sort
//! lex(to, prep, to).
//! name('DENVER', [city]).
//! rule(nbar, [nbar, pp], head(0)).
//! rule(nbar, [nbar, vp], connect(actor, 0, 1)).
//! rule(np, [det, nbar], quantify(0, 1)).
//! rule(np, [nbar], quantify(bare, 0)).      % implicit determiner constant
//! rule(nbar, [noun, nbar], nn_rel).
//! rule(frag, [np], fragment(frag_np)).
//! ```
//!
//! Corpus files hold one `id<TAB>sentence` record per line.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::sort::{SortError, SortHierarchy, SortTerm};
use crate::syntax::{self, quote_name, SyntaxError, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

fn malformed(line: usize, message: impl Into<String>) -> GrammarError {
    GrammarError::Malformed { line, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Noun,
    Verb,
    Adj,
    Adv,
    Prep,
    Det,
    Name,
    Number,
    Tool,
}

impl Category {
    pub const ALL: [Category; 9] = [
        Category::Noun,
        Category::Verb,
        Category::Adj,
        Category::Adv,
        Category::Prep,
        Category::Det,
        Category::Name,
        Category::Number,
        Category::Tool,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Noun => "noun",
            Category::Verb => "verb",
            Category::Adj => "adj",
            Category::Adv => "adv",
            Category::Prep => "prep",
            Category::Det => "det",
            Category::Name => "name",
            Category::Number => "number",
            Category::Tool => "tool",
        }
    }

    /// Words of this category denote constants rather than predicates.
    pub fn is_constant(self) -> bool {
        matches!(self, Category::Name | Category::Number | Category::Tool | Category::Det)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| format!("unknown category `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LexEntry {
    pub word: String,
    pub category: Category,
    pub predicate: String,
    pub inherent: Option<SortTerm>,
}

impl LexEntry {
    pub fn new(word: &str, category: Category, predicate: &str, inherent: Option<SortTerm>) -> Self {
        LexEntry { word: word.into(), category, predicate: predicate.into(), inherent }
    }
}

impl fmt::Display for LexEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lex({},{},{}", quote_name(&self.word), self.category, quote_name(&self.predicate))?;
        if let Some(s) = &self.inherent {
            write!(f, ",{s}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    pub entries: Vec<LexEntry>,
}

impl Lexicon {
    pub fn new(entries: Vec<LexEntry>) -> Result<Self, GrammarError> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert((e.word.as_str(), e.category)) {
                return Err(malformed(0, format!("duplicate entry for `{}` as {}", e.word, e.category)));
            }
        }
        Ok(Lexicon { entries })
    }

    pub fn parse(text: &str) -> Result<Self, GrammarError> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for c in syntax::read_clauses(text)? {
            let line = c.pos.line;
            let Term::Compound(f, args) = &c.term else {
                return Err(malformed(line, format!("expected lex/3 or lex/4, found `{}`", c.term)));
            };
            if f != "lex" || !(3..=4).contains(&args.len()) {
                return Err(malformed(line, format!("expected lex/3 or lex/4, found `{}`", c.term)));
            }
            let name = |t: &Term, what: &str| match t {
                Term::Name(n) => Ok(n.clone()),
                other => Err(malformed(line, format!("{what} must be a name, found `{other}`"))),
            };
            let word = name(&args[0], "word")?;
            let category: Category = name(&args[1], "category")?.parse().map_err(|m| malformed(line, m))?;
            let predicate = name(&args[2], "predicate")?;
            let inherent = match args.get(3) {
                Some(t) => Some(SortTerm::from_term(t).map_err(|m| malformed(line, m))?),
                None => None,
            };
            if !seen.insert((word.clone(), category)) {
                return Err(malformed(line, format!("duplicate entry for `{word}` as {category}")));
            }
            entries.push(LexEntry { word, category, predicate, inherent });
        }
        Ok(Lexicon { entries })
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|e| format!("{e}.\n")).collect()
    }

    pub fn lookup<'a>(&'a self, word: &'a str) -> impl Iterator<Item = &'a LexEntry> + 'a {
        self.entries.iter().filter(move |e| e.word == word)
    }

    pub fn check(&self, h: &SortHierarchy) -> Result<(), SortError> {
        self.entries.iter().filter_map(|e| e.inherent.as_ref()).try_for_each(|s| s.check(h))
    }
}

/// Inherent sorts of domain names, maintained by hand.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameSortTable {
    pub sorts: BTreeMap<String, SortTerm>,
}

impl NameSortTable {
    /// Parses `name(Constant, Sort).` clauses.
    pub fn parse(text: &str) -> Result<Self, GrammarError> {
        let mut sorts = BTreeMap::new();
        for c in syntax::read_clauses(text)? {
            let line = c.pos.line;
            match &c.term {
                Term::Compound(f, args) if f == "name" && args.len() == 2 => {
                    let Term::Name(n) = &args[0] else {
                        return Err(malformed(line, "name/2 takes a constant first"));
                    };
                    let s = SortTerm::from_term(&args[1]).map_err(|m| malformed(line, m))?;
                    if sorts.insert(n.clone(), s).is_some() {
                        return Err(malformed(line, format!("`{n}` listed twice")));
                    }
                }
                other => return Err(malformed(line, format!("expected name(Constant, Sort), found `{other}`"))),
            }
        }
        Ok(NameSortTable { sorts })
    }

    pub fn get(&self, name: &str) -> Option<&SortTerm> {
        self.sorts.get(name)
    }
}

/// Which determiner a quantification uses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DetSource {
    /// The determiner word at this right-hand-side position.
    Child(usize),
    /// An implicit determiner constant, for bare noun phrases.
    Implicit(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SemOp {
    /// Pass the head through; in a binary rule the sibling must be a
    /// modifier, which is applied to the head.
    Head(usize),
    /// Relate head and dependent with a connecting predicate, written
    /// `pred(Dependent, Head)`.
    Connect { pred: String, head: usize, dependent: usize },
    Quantify { det: DetSource, head: usize },
    /// Noun-noun compound: first child modifies the second through `n_n_rel`.
    NounNoun,
    /// Wrap a stranded constituent so it can take part in a fragment analysis.
    Fragment(String),
}

/// Connecting predicate used by noun-noun compounds.
pub const NN_REL: &str = "n_n_rel";

impl fmt::Display for SemOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemOp::Head(i) => write!(f, "head({i})"),
            SemOp::Connect { pred, head, dependent } => write!(f, "connect({},{head},{dependent})", quote_name(pred)),
            SemOp::Quantify { det: DetSource::Child(d), head } => write!(f, "quantify({d},{head})"),
            SemOp::Quantify { det: DetSource::Implicit(d), head } => write!(f, "quantify({},{head})", quote_name(d)),
            SemOp::NounNoun => f.write_str("nn_rel"),
            SemOp::Fragment(p) => write!(f, "fragment({})", quote_name(p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrammarRule {
    pub lhs: String,
    pub rhs: Vec<String>,
    pub sem: SemOp,
}

impl fmt::Display for GrammarRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule({},[", quote_name(&self.lhs))?;
        for (i, s) in self.rhs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(&quote_name(s))?;
        }
        write!(f, "],{})", self.sem)
    }
}

impl GrammarRule {
    fn validate(&self) -> Result<(), String> {
        let n = self.rhs.len();
        if !(1..=2).contains(&n) {
            return Err("right-hand sides have one or two symbols".into());
        }
        let idx = |i: usize| if i < n { Ok(()) } else { Err(format!("index {i} is outside the right-hand side")) };
        match &self.sem {
            SemOp::Head(i) => idx(*i),
            SemOp::Connect { head, dependent, .. } => {
                idx(*head)?;
                idx(*dependent)?;
                if head == dependent {
                    return Err("head and dependent must differ".into());
                }
                Ok(())
            }
            SemOp::Quantify { det, head } => {
                idx(*head)?;
                match det {
                    DetSource::Child(d) if d == head => Err("determiner and head must differ".into()),
                    DetSource::Child(d) => idx(*d),
                    DetSource::Implicit(_) if n != 1 => Err("implicit determiners need a unary rule".into()),
                    DetSource::Implicit(_) => Ok(()),
                }
            }
            SemOp::NounNoun if n != 2 => Err("nn_rel needs two symbols".into()),
            SemOp::Fragment(_) if n != 1 => Err("fragment needs one symbol".into()),
            SemOp::NounNoun | SemOp::Fragment(_) => Ok(()),
        }
    }
}

/// Grammar rules; the first rule's left-hand side is the start symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    pub rules: Vec<GrammarRule>,
}

impl Grammar {
    pub fn new(rules: Vec<GrammarRule>) -> Result<Self, GrammarError> {
        if rules.is_empty() {
            return Err(malformed(0, "grammar has no rules"));
        }
        for r in &rules {
            r.validate().map_err(|m| malformed(0, format!("{r}: {m}")))?;
        }
        Ok(Grammar { rules })
    }

    pub fn start(&self) -> &str {
        &self.rules[0].lhs
    }

    pub fn parse(text: &str) -> Result<Self, GrammarError> {
        let mut rules = Vec::new();
        for c in syntax::read_clauses(text)? {
            let line = c.pos.line;
            let rule = read_rule(&c.term).map_err(|m| malformed(line, m))?;
            rule.validate().map_err(|m| malformed(line, m))?;
            rules.push(rule);
        }
        if rules.is_empty() {
            return Err(malformed(1, "grammar has no rules"));
        }
        Ok(Grammar { rules })
    }

    pub fn to_text(&self) -> String {
        self.rules.iter().map(|r| format!("{r}.\n")).collect()
    }

    /// Predicates introduced by semantic operations, with their arities.
    pub fn connectors(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        for r in &self.rules {
            let c = match &r.sem {
                SemOp::Connect { pred, .. } => (pred.clone(), 2),
                SemOp::NounNoun => (NN_REL.to_string(), 2),
                SemOp::Fragment(p) => (p.clone(), 1),
                _ => continue,
            };
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    /// Implicit determiner constants used by bare quantification.
    pub fn implicit_determiners(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for r in &self.rules {
            if let SemOp::Quantify { det: DetSource::Implicit(d), .. } = &r.sem {
                if !out.contains(&d.as_str()) {
                    out.push(d.as_str());
                }
            }
        }
        out
    }
}

fn read_rule(t: &Term) -> Result<GrammarRule, String> {
    let Term::Compound(f, args) = t else {
        return Err(format!("expected rule/3, found `{t}`"));
    };
    if f != "rule" || args.len() != 3 {
        return Err(format!("expected rule/3, found `{t}`"));
    }
    let Term::Name(lhs) = &args[0] else {
        return Err("left-hand side must be a category name".into());
    };
    let Term::List(items) = &args[1] else {
        return Err("right-hand side must be a list".into());
    };
    let rhs = items
        .iter()
        .map(|i| match i {
            Term::Name(n) => Ok(n.clone()),
            other => Err(format!("right-hand side symbols are names, found `{other}`")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let index = |t: &Term| -> Result<usize, String> {
        match t {
            Term::Name(n) => n.parse().map_err(|_| format!("expected an index, found `{n}`")),
            other => Err(format!("expected an index, found `{other}`")),
        }
    };
    let sem = match &args[2] {
        Term::Name(n) if n == "nn_rel" => SemOp::NounNoun,
        Term::Compound(op, a) => match (op.as_str(), a.as_slice()) {
            ("head", [i]) => SemOp::Head(index(i)?),
            ("connect", [Term::Name(p), h, d]) => SemOp::Connect { pred: p.clone(), head: index(h)?, dependent: index(d)? },
            ("quantify", [d, h]) => {
                let det = match d {
                    Term::Name(n) if n.chars().all(|c| c.is_ascii_digit()) => DetSource::Child(index(d)?),
                    Term::Name(n) => DetSource::Implicit(n.clone()),
                    other => return Err(format!("determiner must be an index or a constant, found `{other}`")),
                };
                SemOp::Quantify { det, head: index(h)? }
            }
            ("fragment", [Term::Name(p)]) => SemOp::Fragment(p.clone()),
            _ => return Err(format!("unknown semantic operation `{}`", args[2])),
        },
        other => return Err(format!("unknown semantic operation `{other}`")),
    };
    Ok(GrammarRule { lhs: lhs.clone(), rhs, sem })
}

/// A corpus sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    pub id: u64,
    pub text: String,
    pub tokens: Vec<String>,
}

impl Sentence {
    pub fn new(id: u64, text: &str) -> Self {
        Sentence { id, text: text.to_string(), tokens: tokenize_sentence(text) }
    }
}

/// Lowercased whitespace tokens with surrounding punctuation removed.
pub fn tokenize_sentence(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !(c.is_alphanumeric() || c == '_' || c == '\'')).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Reads `id<TAB>sentence` lines; blank lines and `#` comments are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<Sentence>, GrammarError> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, sentence) = line.split_once('\t').ok_or_else(|| malformed(line_no, "expected id<TAB>sentence"))?;
        let id: u64 = id.trim().parse().map_err(|_| malformed(line_no, format!("bad sentence id `{id}`")))?;
        if !ids.insert(id) {
            return Err(malformed(line_no, format!("duplicate sentence id {id}")));
        }
        let s = Sentence::new(id, sentence.trim());
        if s.tokens.is_empty() {
            return Err(malformed(line_no, "empty sentence"));
        }
        out.push(s);
    }
    Ok(out)
}

pub fn corpus_to_text(corpus: &[Sentence]) -> String {
    corpus.iter().map(|s| format!("{}\t{}\n", s.id, s.text)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicon_round_trip() {
        let text = "lex(flights, noun, flight, [flight]).\nlex(to, prep, to).\nlex(denver, name, 'DENVER').";
        let lex = Lexicon::parse(text).unwrap();
        assert_eq!(lex.entries.len(), 3);
        assert_eq!(lex.entries[2].predicate, "DENVER");
        assert_eq!(Lexicon::parse(&lex.to_text()).unwrap(), lex);
        assert!(Lexicon::parse("lex(a, noun, a).\nlex(a, noun, b).").is_err());
        assert!(Lexicon::parse("lex(a, conj, a).").is_err());
    }

    #[test]
    fn grammar_ops() {
        let text = "rule(s, [np], head(0)).\n\
                    rule(np, [det, nbar], quantify(0, 1)).\n\
                    rule(np, [nbar], quantify(bare, 0)).\n\
                    rule(nbar, [noun, nbar], nn_rel).\n\
                    rule(nbar, [nbar, vp], connect(actor, 0, 1)).\n\
                    rule(frag, [np], fragment(frag_np)).";
        let g = Grammar::parse(text).unwrap();
        assert_eq!(g.start(), "s");
        assert_eq!(g.rules[2].sem, SemOp::Quantify { det: DetSource::Implicit("bare".into()), head: 0 });
        assert_eq!(
            g.connectors(),
            vec![("n_n_rel".to_string(), 2), ("actor".to_string(), 2), ("frag_np".to_string(), 1)]
        );
        assert_eq!(g.implicit_determiners(), vec!["bare"]);
        assert_eq!(Grammar::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn grammar_validation() {
        assert!(Grammar::parse("rule(s, [np], head(1)).").is_err());
        assert!(Grammar::parse("rule(s, [a, b], connect(p, 0, 0)).").is_err());
        assert!(Grammar::parse("rule(s, [a], nn_rel).").is_err());
        assert!(Grammar::parse("rule(s, [a, b, c], head(0)).").is_err());
        assert!(Grammar::parse("rule(s, [a, b], quantify(bare, 0)).").is_err());
        assert!(Grammar::parse("rule(s, [a], mystery(0)).").is_err());
        assert!(Grammar::parse("").is_err());
    }

    #[test]
    fn corpus_lines() {
        let c = parse_corpus("# toy\n1\tShow me flights to Denver?\n\n2\tthe morning flights\n").unwrap();
        assert_eq!(c[0].tokens, vec!["show", "me", "flights", "to", "denver"]);
        assert_eq!(c[1].id, 2);
        assert!(parse_corpus("1\ta\n1\tb").is_err());
        assert!(parse_corpus("x\ta").is_err());
        assert!(parse_corpus("1\t ?").is_err());
        assert!(parse_corpus("no tab here").is_err());
    }

    #[test]
    fn names_table() {
        let t = NameSortTable::parse("name('NASHVILLE', [city]).\nname('AIR_CANADA', [airline]).").unwrap();
        assert_eq!(t.get("NASHVILLE"), Some(&SortTerm::atom("city")));
        assert!(NameSortTable::parse("name(a,[b]).\nname(a,[c]).").is_err());
    }
}
