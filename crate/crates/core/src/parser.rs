//! Bottom-up chart parser that composes sort-annotated logical forms and
//! prunes every predication the active rule set does not license.
//!
//! Lexical entries and grammar rules build partial meanings ([`Sem`]). Each
//! predication is checked against the rules for its predicate and arity: a
//! rule licenses it when every argument sort unifies with the rule's, and the
//! predication takes the unified argument sorts and the rule's result sort.
//! A predication no rule licenses kills the edge. Excluded (structural)
//! predicates such as `and` are built without consulting the rules.
//!
//! Variables are named after the token that introduces them (`X3` for the
//! noun at position 3, `E2` for a verb's event, `S1` for a modifier's state),
//! so equal derivations produce equal logical forms and the chart can share
//! them.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::grammar::{Category, DetSource, Grammar, GrammarRule, LexEntry, Lexicon, SemOp, Sentence, NN_REL};
use crate::harvest::ExclusionList;
use crate::lf::{parse_lf, serialize_lf, Binder, Lf, LfError, Node, PROP};
use crate::sort::{SortError, SortHierarchy, SortRule, SortTerm, TOP};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParserConfig {
    /// Verbs whose token ends in this suffix get an aspect predication.
    pub aspect_suffix: Option<String>,
    pub aspect_predicate: String,
    pub aspect_constant: String,
    /// Constant filling the last argument of adjective predications.
    pub degree_constant: String,
    pub max_edges_per_cell: usize,
    pub max_analyses: usize,
    pub excluded: ExclusionList,
}

impl Default for ParserConfig {
    fn default() -> Self {
        ParserConfig {
            aspect_suffix: Some("ing".into()),
            aspect_predicate: "has_aspect".into(),
            aspect_constant: "in_progress".into(),
            degree_constant: "pos".into(),
            max_edges_per_cell: 20_000,
            max_analyses: 10_000,
            excluded: ExclusionList::default(),
        }
    }
}

/// A modifier waiting for the variable it applies to: `pred(Lead, Target, Trail...)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Modifier {
    pub pred: String,
    /// The modifier's own state variable, existentially bound on application.
    pub lead: Option<(String, SortTerm)>,
    pub trail: Vec<Lf>,
    /// Conditions on the lead variable contributed by modifiers of the modifier.
    pub conds: Vec<Lf>,
}

/// Partial meaning of a chart edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sem {
    /// Conditions on an index variable not yet bound (nouns, verbs).
    Open { var: String, sort: SortTerm, conds: Vec<Lf> },
    /// A quantified term or a constant.
    Term(Lf),
    /// A preposition before it has its object.
    Rel(String),
    Mod(Modifier),
    Det(Lf),
    Prop(Lf),
}

impl Sem {
    fn open_var(&self) -> Option<Lf> {
        match self {
            Sem::Open { var, sort, .. } => Some(Lf::var(var.clone(), sort.clone())),
            _ => None,
        }
    }
}

/// Preference score; smaller is better. Fields compare in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Score {
    pub fragments: usize,
    pub predications: usize,
    /// Sum of the depths of connecting predications.
    pub depth: usize,
    pub text: String,
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.fragments, self.predications, self.depth)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub lf: Lf,
    pub score: Score,
}

/// All licensed analyses of one sentence, best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseResult {
    pub sentence_id: u64,
    pub analyses: Vec<Analysis>,
    pub plf_index: Option<usize>,
    /// Why there is no analysis.
    pub failure: Option<String>,
}

impl ParseResult {
    pub fn failed(sentence_id: u64, why: impl Into<String>) -> Self {
        ParseResult { sentence_id, analyses: Vec::new(), plf_index: None, failure: Some(why.into()) }
    }

    pub fn plf(&self) -> Option<&Analysis> {
        self.plf_index.map(|i| &self.analyses[i])
    }
}

/// Index of the minimal score, `None` for no analyses.
pub fn select_plf(analyses: &[Analysis]) -> Option<usize> {
    analyses.iter().enumerate().min_by(|a, b| a.1.score.cmp(&b.1.score)).map(|(i, _)| i)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseFailure {
    #[error("unknown word `{0}`")]
    UnknownWord(String),
    #[error("no licensed analysis")]
    NoAnalysis,
}

pub struct Parser<'a> {
    grammar: &'a Grammar,
    lexicon: &'a Lexicon,
    h: &'a SortHierarchy,
    config: ParserConfig,
    rules: HashMap<(String, usize), Vec<SortRule>>,
    connectors: HashSet<String>,
    fragment_preds: HashSet<String>,
    fragment_syms: HashSet<String>,
}

type Chart = Vec<Vec<Cell>>;

#[derive(Default)]
struct Cell {
    edges: BTreeMap<String, Vec<Sem>>,
    seen: HashSet<(String, Sem)>,
}

impl Cell {
    fn get(&self, sym: &str) -> &[Sem] {
        self.edges.get(sym).map_or(&[], Vec::as_slice)
    }

    fn len(&self) -> usize {
        self.seen.len()
    }

    fn add(&mut self, sym: &str, sem: Sem, cap: usize) -> bool {
        if self.len() >= cap || self.seen.contains(&(sym.to_string(), sem.clone())) {
            return false;
        }
        self.seen.insert((sym.to_string(), sem.clone()));
        self.edges.entry(sym.to_string()).or_default().push(sem);
        true
    }
}

fn prop() -> SortTerm {
    SortTerm::atom(PROP)
}

fn and(conds: Vec<Lf>) -> Lf {
    Lf::pred("and", conds, prop())
}

fn sort_of(lf: &Lf) -> &SortTerm {
    lf.sort.as_ref().expect("parser builds annotated nodes")
}

impl<'a> Parser<'a> {
    /// Fails when a rule mentions a sort outside the hierarchy.
    pub fn new(
        grammar: &'a Grammar,
        lexicon: &'a Lexicon,
        rules: &[SortRule],
        h: &'a SortHierarchy,
        config: ParserConfig,
    ) -> Result<Self, SortError> {
        let mut index: HashMap<(String, usize), Vec<SortRule>> = HashMap::new();
        for r in rules {
            r.check(h)?;
            let bucket = index.entry((r.predicate.clone(), r.arity())).or_default();
            if !bucket.iter().any(|b| b.alpha_eq(r)) {
                bucket.push(r.clone());
            }
        }
        let mut connectors: HashSet<String> = grammar.connectors().into_iter().map(|(p, _)| p).collect();
        connectors.extend(lexicon.entries.iter().filter(|e| e.category == Category::Prep).map(|e| e.predicate.clone()));
        let mut fragment_preds = HashSet::new();
        let mut fragment_syms = HashSet::new();
        for r in &grammar.rules {
            if let SemOp::Fragment(p) = &r.sem {
                fragment_preds.insert(p.clone());
                fragment_syms.insert(r.lhs.clone());
            }
        }
        Ok(Parser { grammar, lexicon, h, config, rules: index, connectors, fragment_preds, fragment_syms })
    }

    pub fn config(&self) -> &ParserConfig {
        &self.config
    }

    /// All licensed versions of `name(args)`: one per distinct maximal
    /// refinement of the argument and result sorts.
    pub fn license(&self, name: &str, args: Vec<Lf>) -> Vec<Lf> {
        if self.config.excluded.contains(name) {
            return vec![Lf::pred(name, args, prop())];
        }
        let Some(rules) = self.rules.get(&(name.to_string(), args.len())) else {
            return Vec::new();
        };
        let mut cands: Vec<Vec<SortTerm>> = Vec::new();
        'rules: for r in rules {
            let mut refined = Vec::with_capacity(args.len() + 1);
            for (a, ra) in args.iter().zip(&r.args) {
                match self.h.unify(sort_of(a), ra) {
                    Ok(Some(u)) => refined.push(u),
                    _ => continue 'rules,
                }
            }
            refined.push(if r.result.has_vars() { prop() } else { r.result.clone() });
            if !cands.contains(&refined) {
                cands.push(refined);
            }
        }
        let cands = self.maximal(cands);
        cands
            .into_iter()
            .map(|mut sorts| {
                let result = sorts.pop().expect("result sort");
                let args = args.iter().zip(sorts).map(|(a, s)| Lf::new(a.node.clone(), Some(s))).collect();
                Lf::pred(name, args, result)
            })
            .collect()
    }

    /// Drops candidates strictly subsumed by another candidate.
    fn maximal(&self, mut cands: Vec<Vec<SortTerm>>) -> Vec<Vec<SortTerm>> {
        let covers =
            |g: &Vec<SortTerm>, s: &Vec<SortTerm>| g.iter().zip(s).all(|(x, y)| self.h.subsumes(x, y).unwrap_or(false));
        let keep: Vec<bool> =
            cands.iter().map(|c| !cands.iter().any(|d| d != c && covers(d, c) && !covers(c, d))).collect();
        let mut i = 0;
        cands.retain(|_| {
            i += 1;
            keep[i - 1]
        });
        cands.sort();
        cands
    }

    /// Annotations licensed for constant `name`. Excluded constants keep
    /// their lexical sort.
    pub fn constant(&self, name: &str, inherent: Option<&SortTerm>) -> Vec<Lf> {
        if self.config.excluded.contains(name) {
            return inherent.map(|s| vec![Lf::constant(name, s.clone())]).unwrap_or_default();
        }
        let mut sorts: Vec<SortTerm> = self
            .rules
            .get(&(name.to_string(), 0))
            .map(|rs| rs.iter().map(|r| r.result.clone()).filter(|s| !s.has_vars()).collect())
            .unwrap_or_default();
        sorts.sort();
        sorts.dedup();
        sorts.into_iter().map(|s| Lf::constant(name, s)).collect()
    }

    /// Sorts a lexical predicate may give the variable it introduces: the
    /// inherent sort (or `top`) narrowed by the first argument of each rule.
    fn lexical_sorts(&self, pred: &str, arity: usize, inherent: Option<&SortTerm>) -> Vec<SortTerm> {
        let base = inherent.cloned().unwrap_or_else(|| SortTerm::atom(TOP));
        if self.config.excluded.contains(pred) {
            return vec![base];
        }
        let mut cands: Vec<Vec<SortTerm>> = Vec::new();
        for r in self.rules.get(&(pred.to_string(), arity)).into_iter().flatten() {
            if let Ok(Some(u)) = self.h.unify(&base, &r.args[0]) {
                if !cands.iter().any(|c| c[0] == u) {
                    cands.push(vec![u]);
                }
            }
        }
        self.maximal(cands).into_iter().map(|mut c| c.remove(0)).collect()
    }

    /// Lexical edges for the token at `position`.
    pub fn lexical(&self, position: usize, token: &str) -> Result<Vec<(String, Sem)>, ParseFailure> {
        let entries: Vec<&LexEntry> = self.lexicon.lookup(token).collect();
        if entries.is_empty() {
            return Err(ParseFailure::UnknownWord(token.to_string()));
        }
        let mut out = Vec::new();
        for e in entries {
            let sym = e.category.as_str().to_string();
            let p = e.predicate.as_str();
            let inh = e.inherent.as_ref();
            let mut push = |sem| out.push((sym.clone(), sem));
            match e.category {
                Category::Noun | Category::Verb => {
                    let var = format!("{}{position}", if e.category == Category::Noun { 'X' } else { 'E' });
                    let aspect = e.category == Category::Verb
                        && self.config.aspect_suffix.as_deref().is_some_and(|s| token.ends_with(s));
                    for s in self.lexical_sorts(p, 1, inh) {
                        let v = Lf::var(var.clone(), s.clone());
                        for head in self.license(p, vec![v.clone()]).into_iter().filter(|l| arg_sort(l, 0) == &s) {
                            if !aspect {
                                push(Sem::Open { var: var.clone(), sort: s.clone(), conds: vec![head] });
                                continue;
                            }
                            for c in self.constant(&self.config.aspect_constant, None) {
                                for a in self.license(&self.config.aspect_predicate, vec![v.clone(), c]) {
                                    push(Sem::Open { var: var.clone(), sort: s.clone(), conds: vec![head.clone(), a] });
                                }
                            }
                        }
                    }
                }
                Category::Adj | Category::Adv => {
                    let (arity, trail) = if e.category == Category::Adj {
                        (3, self.constant(&self.config.degree_constant, None).into_iter().map(|d| vec![d]).collect())
                    } else {
                        (2, vec![Vec::new()])
                    };
                    for s in self.lexical_sorts(p, arity, inh) {
                        for t in &trail {
                            push(Sem::Mod(Modifier {
                                pred: p.to_string(),
                                lead: Some((format!("S{position}"), s.clone())),
                                trail: t.clone(),
                                conds: Vec::new(),
                            }));
                        }
                    }
                }
                Category::Prep => push(Sem::Rel(p.to_string())),
                Category::Det => self.constant(p, inh).into_iter().for_each(|c| push(Sem::Det(c))),
                Category::Name | Category::Number | Category::Tool => {
                    self.constant(p, inh).into_iter().for_each(|c| push(Sem::Term(c)))
                }
            }
        }
        Ok(out)
    }

    /// Applies a modifier to `target`, giving the condition it contributes.
    fn apply_mod(&self, m: &Modifier, target: Lf) -> Vec<Lf> {
        let mut args = Vec::new();
        if let Some((v, s)) = &m.lead {
            args.push(Lf::var(v.clone(), s.clone()));
        }
        args.push(target);
        args.extend(m.trail.iter().cloned());
        let alts = self.license(&m.pred, args);
        match &m.lead {
            None => alts,
            Some((v, s)) => alts
                .into_iter()
                .filter(|p| arg_sort(p, 0) == s)
                .map(|p| {
                    let mut body = vec![p];
                    body.extend(m.conds.iter().cloned());
                    Lf::exists(Binder::new(v.clone(), s.clone()), and(body), prop())
                })
                .collect(),
        }
    }

    /// Closes an edge into a complete logical form.
    pub fn finalize(&self, sem: &Sem) -> Option<Lf> {
        match sem {
            Sem::Open { var, sort, conds } => {
                Some(Lf::exists(Binder::new(var.clone(), sort.clone()), and(conds.clone()), prop()))
            }
            Sem::Term(lf) | Sem::Prop(lf) => Some(lf.clone()),
            _ => None,
        }
    }

    /// Semantic operation of `rule` over edges for its right-hand side.
    pub fn apply(&self, rule: &GrammarRule, children: &[&Sem]) -> Vec<Sem> {
        match (&rule.sem, children) {
            (SemOp::Head(_), [only]) => vec![(*only).clone()],
            (SemOp::Head(h), [_, _]) => self.head_with(children[*h], children[1 - h]),
            (SemOp::Connect { pred, head, dependent }, [_, _]) => {
                self.connect(pred, children[*head], children[*dependent])
            }
            (SemOp::Quantify { det, head }, _) => {
                let Sem::Open { var, sort, conds } = children[*head] else {
                    return Vec::new();
                };
                let dets = match det {
                    DetSource::Child(d) => match children[*d] {
                        Sem::Det(lf) => vec![lf.clone()],
                        _ => return Vec::new(),
                    },
                    DetSource::Implicit(name) => self.constant(name, None),
                };
                dets.into_iter()
                    .map(|d| {
                        Sem::Term(Lf::qterm(d, Binder::new(var.clone(), sort.clone()), and(conds.clone()), sort.clone()))
                    })
                    .collect()
            }
            (SemOp::NounNoun, [Sem::Open { var: mv, sort: ms, conds: mc }, head @ Sem::Open { var, sort, conds }]) => {
                let lambda = Lf::lambda(
                    Binder::new(mv.clone(), ms.clone()),
                    and(mc.clone()),
                    SortTerm::func(vec![ms.clone()], prop()),
                );
                let target = head.open_var().expect("open");
                self.license(NN_REL, vec![lambda, target])
                    .into_iter()
                    .map(|p| {
                        let mut conds = conds.clone();
                        conds.push(p);
                        Sem::Open { var: var.clone(), sort: sort.clone(), conds }
                    })
                    .collect()
            }
            (SemOp::Fragment(p), [only]) => match self.finalize(only) {
                Some(lf) => self.license(p, vec![lf]).into_iter().map(Sem::Prop).collect(),
                None => Vec::new(),
            },
            _ => Vec::new(),
        }
    }

    fn head_with(&self, head: &Sem, other: &Sem) -> Vec<Sem> {
        match (head, other) {
            (Sem::Open { var, sort, conds }, Sem::Mod(m)) => self
                .apply_mod(m, Lf::var(var.clone(), sort.clone()))
                .into_iter()
                .map(|c| {
                    let mut conds = conds.clone();
                    conds.push(c);
                    Sem::Open { var: var.clone(), sort: sort.clone(), conds }
                })
                .collect(),
            (Sem::Mod(hm @ Modifier { lead: Some((v, s)), .. }), Sem::Mod(m)) => self
                .apply_mod(m, Lf::var(v.clone(), s.clone()))
                .into_iter()
                .map(|c| {
                    let mut hm = hm.clone();
                    hm.conds.push(c);
                    Sem::Mod(hm)
                })
                .collect(),
            (Sem::Rel(p), Sem::Term(t)) => {
                vec![Sem::Mod(Modifier { pred: p.clone(), lead: None, trail: vec![t.clone()], conds: Vec::new() })]
            }
            _ => Vec::new(),
        }
    }

    /// `pred(Dependent, Head)`. An open dependent of an open head is closed
    /// inside the head's conditions; a complete term fills its role directly.
    fn connect(&self, pred: &str, head: &Sem, dep: &Sem) -> Vec<Sem> {
        let extend = |var: &String, sort: &SortTerm, conds: &Vec<Lf>, extra: Lf| {
            let mut conds = conds.clone();
            conds.push(extra);
            Sem::Open { var: var.clone(), sort: sort.clone(), conds }
        };
        match (head, dep) {
            (Sem::Open { var, sort, conds }, Sem::Open { var: dv, sort: ds, conds: dc }) => {
                let args = vec![Lf::var(dv.clone(), ds.clone()), Lf::var(var.clone(), sort.clone())];
                self.license(pred, args)
                    .into_iter()
                    .map(|p| {
                        let mut body = dc.clone();
                        body.push(p);
                        extend(var, sort, conds, Lf::exists(Binder::new(dv.clone(), ds.clone()), and(body), prop()))
                    })
                    .collect()
            }
            (Sem::Term(t), Sem::Open { var, sort, conds }) => self
                .license(pred, vec![Lf::var(var.clone(), sort.clone()), t.clone()])
                .into_iter()
                .map(|p| extend(var, sort, conds, p))
                .collect(),
            (Sem::Open { var, sort, conds }, Sem::Term(t)) => self
                .license(pred, vec![t.clone(), Lf::var(var.clone(), sort.clone())])
                .into_iter()
                .map(|p| extend(var, sort, conds, p))
                .collect(),
            _ => Vec::new(),
        }
    }

    fn close_unary(&self, cell: &mut Cell, mut work: Vec<(String, Sem)>) {
        let cap = self.config.max_edges_per_cell;
        while let Some((sym, sem)) = work.pop() {
            for r in self.grammar.rules.iter().filter(|r| r.rhs.len() == 1 && r.rhs[0] == sym) {
                for out in self.apply(r, &[&sem]) {
                    if cell.add(&r.lhs, out.clone(), cap) {
                        work.push((r.lhs.clone(), out));
                    }
                }
            }
        }
    }

    fn fill_chart(&self, tokens: &[String]) -> Result<Chart, ParseFailure> {
        let n = tokens.len();
        let cap = self.config.max_edges_per_cell;
        let mut chart: Chart = (0..=n).map(|_| (0..=n).map(|_| Cell::default()).collect()).collect();
        for (i, tok) in tokens.iter().enumerate() {
            let cell = &mut chart[i][i + 1];
            let mut work = Vec::new();
            for (sym, sem) in self.lexical(i, tok)? {
                if cell.add(&sym, sem.clone(), cap) {
                    work.push((sym, sem));
                }
            }
            self.close_unary(cell, work);
        }
        let binary: Vec<&GrammarRule> = self.grammar.rules.iter().filter(|r| r.rhs.len() == 2).collect();
        for len in 2..=n {
            for i in 0..=n - len {
                let j = i + len;
                let mut fresh = Vec::new();
                #[allow(clippy::needless_range_loop)]
                for k in i + 1..j {
                    for r in &binary {
                        for b in chart[i][k].get(&r.rhs[0]) {
                            for c in chart[k][j].get(&r.rhs[1]) {
                                fresh.extend(self.apply(r, &[b, c]).into_iter().map(|s| (r.lhs.clone(), s)));
                            }
                        }
                    }
                }
                let cell = &mut chart[i][j];
                let mut work = Vec::new();
                for (sym, sem) in fresh {
                    if cell.add(&sym, sem.clone(), cap) {
                        work.push((sym, sem));
                    }
                }
                self.close_unary(cell, work);
            }
        }
        Ok(chart)
    }

    /// Complete logical forms for `tokens`, before scoring: spanning edges
    /// of the start symbol, or else minimal covers by fragment edges.
    pub fn logical_forms(&self, tokens: &[String]) -> Result<Vec<Lf>, ParseFailure> {
        let n = tokens.len();
        if n == 0 {
            return Err(ParseFailure::NoAnalysis);
        }
        let chart = self.fill_chart(tokens)?;
        let mut lfs: Vec<Lf> = chart[0][n].get(self.grammar.start()).iter().filter_map(|s| self.finalize(s)).collect();
        if lfs.is_empty() {
            lfs = self.fragment_covers(&chart, n);
        }
        lfs.sort();
        lfs.dedup();
        if lfs.is_empty() {
            return Err(ParseFailure::NoAnalysis);
        }
        Ok(lfs)
    }

    fn fragment_covers(&self, chart: &Chart, n: usize) -> Vec<Lf> {
        let items = |i: usize, j: usize| -> Vec<&Lf> {
            let mut out = Vec::new();
            for sym in &self.fragment_syms {
                for s in chart[i][j].get(sym) {
                    if let Sem::Prop(lf) = s {
                        out.push(lf);
                    }
                }
            }
            out
        };
        // best[i]: fewest fragments covering tokens i..n.
        let mut best = vec![usize::MAX; n + 1];
        best[n] = 0;
        for i in (0..n).rev() {
            for j in i + 1..=n {
                if best[j] != usize::MAX && !items(i, j).is_empty() {
                    best[i] = best[i].min(best[j] + 1);
                }
            }
        }
        if best[0] == usize::MAX {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut stack: Vec<(usize, Vec<Lf>)> = vec![(0, Vec::new())];
        while let Some((i, acc)) = stack.pop() {
            if out.len() >= self.config.max_analyses {
                break;
            }
            if i == n {
                out.push(if acc.len() == 1 { acc[0].clone() } else { and(acc) });
                continue;
            }
            for j in i + 1..=n {
                if best[j] != usize::MAX && best[j] + 1 == best[i] {
                    for lf in items(i, j) {
                        let mut next = acc.clone();
                        next.push(lf.clone());
                        stack.push((j, next));
                    }
                }
            }
        }
        out
    }

    pub fn score(&self, lf: &Lf) -> Score {
        let (mut fragments, mut predications, mut depth) = (0, 0, 0);
        lf.walk(&mut |node, d| {
            if let Node::Pred { name, .. } = &node.node {
                if self.fragment_preds.contains(name) {
                    fragments += 1;
                }
                if !self.config.excluded.contains(name) {
                    predications += 1;
                }
                if self.connectors.contains(name) {
                    depth += d;
                }
            }
        });
        let text = serialize_lf(lf).expect("parser builds annotated forms");
        Score { fragments, predications, depth, text }
    }

    pub fn parse(&self, sentence: &Sentence) -> ParseResult {
        match self.logical_forms(&sentence.tokens) {
            Err(e) => ParseResult::failed(sentence.id, e.to_string()),
            Ok(lfs) => {
                let mut analyses: Vec<Analysis> =
                    lfs.into_iter().map(|lf| Analysis { score: self.score(&lf), lf }).collect();
                analyses.sort_by(|a, b| a.score.cmp(&b.score));
                analyses.truncate(self.config.max_analyses);
                let plf_index = select_plf(&analyses);
                ParseResult { sentence_id: sentence.id, analyses, plf_index, failure: None }
            }
        }
    }

    /// Parses every sentence in parallel; results keep corpus order.
    pub fn parse_corpus(&self, corpus: &[Sentence]) -> Vec<ParseResult> {
        corpus.par_iter().map(|s| self.parse(s)).collect()
    }
}

fn arg_sort(pred: &Lf, i: usize) -> &SortTerm {
    match &pred.node {
        Node::Pred { args, .. } => sort_of(&args[i]),
        _ => unreachable!("license returns predications"),
    }
}

/// Tab-separated parse results:
///
/// ```text
/// S  <id>  analyses=<n>  plf=<k>
/// L  <id>  <index>  <fragments>,<predications>,<depth>  <logical form>
/// F  <id>  <reason>
/// ```
pub fn write_parse_results(results: &[ParseResult]) -> String {
    let mut out = String::new();
    for r in results {
        if let Some(why) = &r.failure {
            out.push_str(&format!("F\t{}\t{}\n", r.sentence_id, why.replace(['\t', '\n'], " ")));
            continue;
        }
        let plf = r.plf_index.map_or("-".to_string(), |i| i.to_string());
        out.push_str(&format!("S\t{}\tanalyses={}\tplf={plf}\n", r.sentence_id, r.analyses.len()));
        for (i, a) in r.analyses.iter().enumerate() {
            out.push_str(&format!("L\t{}\t{i}\t{}\t{}\n", r.sentence_id, a.score, a.score.text));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResultsError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    Lf { line: usize, source: LfError },
}

pub fn read_parse_results(text: &str, h: &SortHierarchy) -> Result<Vec<ParseResult>, ResultsError> {
    let mut out: Vec<ParseResult> = Vec::new();
    let mut announced: Vec<usize> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let bad = |m: &str| ResultsError::Malformed { line: line_no, message: m.to_string() };
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let id = |s: &str| s.parse::<u64>().map_err(|_| bad("bad sentence id"));
        match fields.as_slice() {
            ["F", sid, why] => {
                announced.push(0);
                out.push(ParseResult::failed(id(sid)?, *why));
            }
            ["S", sid, n, plf] => {
                let n = n.strip_prefix("analyses=").and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad analyses count"))?;
                let plf = match plf.strip_prefix("plf=") {
                    Some("-") => None,
                    Some(v) => Some(v.parse::<usize>().map_err(|_| bad("bad plf index"))?),
                    None => return Err(bad("bad plf field")),
                };
                announced.push(n);
                out.push(ParseResult { sentence_id: id(sid)?, analyses: Vec::with_capacity(n), plf_index: plf, failure: None });
            }
            ["L", sid, idx, score, lf] => {
                let cur = out.last_mut().filter(|r| r.failure.is_none()).ok_or_else(|| bad("analysis outside a sentence"))?;
                if cur.sentence_id != id(sid)? || idx.parse::<usize>().ok() != Some(cur.analyses.len()) {
                    return Err(bad("analysis out of sequence"));
                }
                let nums: Vec<usize> =
                    score.split(',').map(str::parse).collect::<Result<_, _>>().map_err(|_| bad("bad score"))?;
                let [fragments, predications, depth] = nums[..] else {
                    return Err(bad("bad score"));
                };
                let lf = parse_lf(lf, h).map_err(|source| ResultsError::Lf { line: line_no, source })?;
                let text = serialize_lf(&lf).map_err(|source| ResultsError::Lf { line: line_no, source })?;
                cur.analyses.push(Analysis { lf, score: Score { fragments, predications, depth, text } });
            }
            _ => return Err(bad("unrecognised record")),
        }
    }
    for (r, n) in out.iter().zip(&announced) {
        if r.analyses.len() != *n || (r.failure.is_none() && r.plf_index.is_none_or(|i| i >= r.analyses.len())) {
            return Err(ResultsError::Malformed {
                line: 0,
                message: format!("sentence {} does not match its announced analyses", r.sentence_id),
            });
        }
    }
    Ok(out)
}
