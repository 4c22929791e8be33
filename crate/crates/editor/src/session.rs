//! The editing session: a working set of rules loaded from a workspace
//! directory, plus the whiteboard, the optional corpus and reference, and
//! an append-only journal of every mutation.
//!
//! Workspace layout (only `hierarchy.isa` is required):
//!
//! ```text
//! hierarchy.isa   sort hierarchy
//! rules.sor       working set, harvest format; missing means empty
//! corpus.txt      id<TAB>sentence, for evidence sentences
//! reference.sor   default reference for mapping
//! excluded.txt    excluded predicates, one per line
//! journal.log     JSON lines, appended by the session
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sortacq::evalmap::{map_rules, map_rules_with_closure, MappingReport};
use sortacq::grammar::parse_corpus;
use sortacq::harvest::{format_decimal, parse_decimal, read_harvest, to_f64, write_harvest, ExclusionList, Family, RuleStats};
use sortacq::pipeline::write_atomic;
use sortacq::sort::{compare_rule, parse_rules, MappingCategory, RuleKind, SortHierarchy, SortRule, SortTerm};
use thiserror::Error;

pub const HIERARCHY: &str = "hierarchy.isa";
pub const RULES: &str = "rules.sor";
pub const CORPUS: &str = "corpus.txt";
pub const REFERENCE: &str = "reference.sor";
pub const EXCLUDED: &str = "excluded.txt";
pub const JOURNAL: &str = "journal.log";

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("no rule with id {0}")]
    UnknownRule(u64),
    #[error("rule is already in the working set as id {0}")]
    Duplicate(u64),
    #[error("{0}")]
    BadRequest(String),
    #[error("no corpus loaded")]
    NoCorpus,
    #[error("no reference rule file loaded")]
    NoReference,
    #[error("{0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

type Result<T> = std::result::Result<T, SessionError>;

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> SessionError + '_ {
    move |source| SessionError::Io { path: path.to_path_buf(), source }
}

fn data(path: &Path, e: impl ToString) -> SessionError {
    SessionError::Data(format!("{}: {}", path.display(), e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Note {
    pub id: u64,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<u64>,
}

/// One journal line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Entry {
    /// Session start; `base` is the initial working set in harvest format.
    Open { base: String },
    Insert { id: u64, rule: String },
    Delete { id: u64 },
    Note { note: Note },
    Save { path: String },
    Hierarchy { path: String },
    Reference { path: String },
}

/// What replaying a journal reproduces.
#[derive(Debug, Clone, PartialEq)]
pub struct Replayed {
    pub rules: Vec<(u64, RuleStats)>,
    pub whiteboard: Vec<Note>,
}

/// Replays the last session recorded in `journal` from its `open` entry.
pub fn replay(journal: &str) -> Result<Replayed> {
    let entries: Vec<Entry> = journal
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| SessionError::Data(format!("journal line {}: {e}", i + 1))))
        .collect::<Result<_>>()?;
    let start = entries
        .iter()
        .rposition(|e| matches!(e, Entry::Open { .. }))
        .ok_or_else(|| SessionError::Data("journal has no open entry".into()))?;
    let Entry::Open { base } = &entries[start] else { unreachable!() };
    let mut rules: BTreeMap<u64, RuleStats> = read_harvest(base)
        .map_err(|e| SessionError::Data(format!("journal base: {e}")))?
        .into_iter()
        .enumerate()
        .map(|(i, s)| (i as u64 + 1, s))
        .collect();
    let mut whiteboard = Vec::new();
    for e in &entries[start + 1..] {
        match e {
            Entry::Insert { id, rule } => {
                let r = SortRule::parse(rule).map_err(|e| SessionError::Data(format!("journal rule `{rule}`: {e}")))?;
                rules.insert(*id, RuleStats::bare(r));
            }
            Entry::Delete { id } => {
                rules.remove(id).ok_or(SessionError::UnknownRule(*id))?;
            }
            Entry::Note { note } => whiteboard.push(note.clone()),
            Entry::Open { .. } | Entry::Save { .. } | Entry::Hierarchy { .. } | Entry::Reference { .. } => {}
        }
    }
    Ok(Replayed { rules: rules.into_iter().collect(), whiteboard })
}

/// Filters and paging for [`Session::list`]. Values arrive as query strings.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct ListQuery {
    pub functor: Option<String>,
    pub min_p: Option<String>,
    pub family: Option<String>,
    pub mapping: Option<String>,
    /// Include each rule's mapping category (needs a reference).
    pub show_mapping: Option<bool>,
    pub offset: Option<usize>,
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleView {
    pub id: u64,
    pub rule: String,
    pub kind: String,
    pub predicate: String,
    pub arity: usize,
    pub invocations: u64,
    pub lf_count: u64,
    pub theta_bar: f64,
    pub p: f64,
    pub p_pred: f64,
    pub p_arg: f64,
    /// The three probabilities as written to rule files.
    pub p_text: [String; 3],
    pub samples: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RulePage {
    pub total: usize,
    pub offset: usize,
    pub rules: Vec<RuleView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctorCount {
    pub predicate: String,
    pub rules: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceView {
    pub id: u64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub id: u64,
    pub rule: String,
    pub category: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingView {
    pub reference: String,
    pub closure: bool,
    /// Category label → count, table order.
    pub counts: Vec<(String, usize)>,
    pub total: usize,
    pub reference_size: usize,
    pub reference_hits: usize,
    pub precision_low: Option<f64>,
    pub precision_high: Option<f64>,
    pub overgeneration: Option<f64>,
    pub recall: Option<f64>,
    pub table: String,
    pub assignments: Vec<Assignment>,
}

#[derive(Debug)]
pub struct Session {
    workspace: PathBuf,
    hierarchy: SortHierarchy,
    rules: BTreeMap<u64, RuleStats>,
    next_id: u64,
    corpus: Option<BTreeMap<u64, String>>,
    reference: Option<(String, Vec<SortRule>)>,
    excluded: ExclusionList,
    whiteboard: Vec<Note>,
    dirty: bool,
    /// Responses of mutations already applied, by client request id.
    answered: HashMap<String, Value>,
}

impl Session {
    /// Loads the workspace and starts a new journal segment.
    pub fn open(workspace: &Path) -> Result<Session> {
        let read = |name: &str| -> Result<Option<String>> {
            let p = workspace.join(name);
            match fs::read_to_string(&p) {
                Ok(s) => Ok(Some(s)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                Err(e) => Err(SessionError::Io { path: p, source: e }),
            }
        };
        let hp = workspace.join(HIERARCHY);
        let htext = read(HIERARCHY)?.ok_or_else(|| data(&hp, "missing"))?;
        let hierarchy = SortHierarchy::parse(&htext).map_err(|e| data(&hp, e))?;
        let base = read(RULES)?.unwrap_or_default();
        let stats = read_harvest(&base).map_err(|e| data(&workspace.join(RULES), e))?;
        for s in &stats {
            s.rule.check(&hierarchy).map_err(|e| data(&workspace.join(RULES), format!("{}: {e}", s.rule)))?;
        }
        let corpus = match read(CORPUS)? {
            Some(t) => Some(
                parse_corpus(&t)
                    .map_err(|e| data(&workspace.join(CORPUS), e))?
                    .into_iter()
                    .map(|s| (s.id, s.text))
                    .collect(),
            ),
            None => None,
        };
        let excluded = read(EXCLUDED)?.map(|t| ExclusionList::parse(&t)).unwrap_or_default();
        let mut session = Session {
            workspace: workspace.to_path_buf(),
            hierarchy,
            next_id: stats.len() as u64 + 1,
            rules: stats.into_iter().enumerate().map(|(i, s)| (i as u64 + 1, s)).collect(),
            corpus,
            reference: None,
            excluded,
            whiteboard: Vec::new(),
            dirty: false,
            answered: HashMap::new(),
        };
        if workspace.join(REFERENCE).is_file() {
            session.reference = Some((REFERENCE.into(), session.load_reference(REFERENCE)?));
        }
        session.journal(&Entry::Open { base: write_harvest(&session.working_set()) })?;
        Ok(session)
    }

    pub fn workspace(&self) -> &Path {
        &self.workspace
    }

    pub fn hierarchy(&self) -> &SortHierarchy {
        &self.hierarchy
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn has_corpus(&self) -> bool {
        self.corpus.is_some()
    }

    pub fn reference_path(&self) -> Option<&str> {
        self.reference.as_ref().map(|r| r.0.as_str())
    }

    /// Rules with their ids, in id order.
    pub fn rules(&self) -> Vec<(u64, RuleStats)> {
        self.rules.iter().map(|(i, s)| (*i, s.clone())).collect()
    }

    pub fn working_set(&self) -> Vec<RuleStats> {
        self.rules.values().cloned().collect()
    }

    pub fn whiteboard(&self) -> &[Note] {
        &self.whiteboard
    }

    pub fn excluded(&self) -> &ExclusionList {
        &self.excluded
    }

    fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.workspace.join(p)
        }
    }

    fn journal(&self, e: &Entry) -> Result<()> {
        let p = self.workspace.join(JOURNAL);
        let line = serde_json::to_string(e).expect("journal entries serialise");
        let mut f = fs::OpenOptions::new().create(true).append(true).open(&p).map_err(io(&p))?;
        writeln!(f, "{line}").map_err(io(&p))?;
        f.flush().map_err(io(&p))
    }

    /// The stored response for a repeated request id.
    pub fn answered(&self, request_id: Option<&str>) -> Option<Value> {
        request_id.and_then(|r| self.answered.get(r).cloned())
    }

    pub fn remember(&mut self, request_id: Option<&str>, response: &Value) {
        if let Some(r) = request_id {
            self.answered.insert(r.to_string(), response.clone());
        }
    }

    fn category(&self, rule: &SortRule) -> Option<MappingCategory> {
        let (_, reference) = self.reference.as_ref()?;
        (rule.arity() > 0).then(|| compare_rule(rule, reference, &self.hierarchy))
    }

    pub fn view(&self, id: u64, s: &RuleStats, with_mapping: bool) -> RuleView {
        RuleView {
            id,
            rule: s.rule.to_clause(),
            kind: s.rule.kind.functor().into(),
            predicate: s.rule.predicate.clone(),
            arity: s.rule.arity(),
            invocations: s.invocations,
            lf_count: s.lf_count,
            theta_bar: to_f64(&s.theta_bar),
            p: to_f64(&s.p_global),
            p_pred: to_f64(&s.p_given_pred),
            p_arg: to_f64(&s.p_given_pred_arg1),
            p_text: [&s.p_global, &s.p_given_pred, &s.p_given_pred_arg1].map(|p| format_decimal(p, 6)),
            samples: s.sample_sentences.clone(),
            mapping: if with_mapping { self.category(&s.rule).map(|c| c.label().to_string()) } else { None },
        }
    }

    pub fn get(&self, id: u64) -> Result<RuleView> {
        let s = self.rules.get(&id).ok_or(SessionError::UnknownRule(id))?;
        Ok(self.view(id, s, self.reference.is_some()))
    }

    /// Ordered by predicate, then descending probability in the selected
    /// family (global by default), then id.
    pub fn list(&self, q: &ListQuery) -> Result<RulePage> {
        let family: Family = match &q.family {
            Some(f) => f.parse().map_err(SessionError::BadRequest)?,
            None => Family::Global,
        };
        let min_p: Option<BigRational> = match &q.min_p {
            Some(t) => Some(parse_decimal(t).ok_or_else(|| SessionError::BadRequest(format!("bad min_p `{t}`")))?),
            None => None,
        };
        let category: Option<MappingCategory> = match &q.mapping {
            Some(m) => {
                if self.reference.is_none() {
                    return Err(SessionError::NoReference);
                }
                Some(m.parse().map_err(SessionError::BadRequest)?)
            }
            None => None,
        };
        if q.show_mapping == Some(true) && self.reference.is_none() {
            return Err(SessionError::NoReference);
        }
        let mut hits: Vec<(&u64, &RuleStats)> = self
            .rules
            .iter()
            .filter(|(_, s)| q.functor.as_ref().is_none_or(|f| &s.rule.predicate == f))
            .filter(|(_, s)| min_p.as_ref().is_none_or(|m| s.probability(family) >= m))
            .filter(|(_, s)| category.is_none_or(|c| self.category(&s.rule) == Some(c)))
            .collect();
        hits.sort_by(|a, b| {
            a.1.rule
                .predicate
                .cmp(&b.1.rule.predicate)
                .then_with(|| b.1.probability(family).cmp(a.1.probability(family)))
                .then_with(|| a.0.cmp(b.0))
        });
        let offset = q.offset.unwrap_or(0);
        let with_mapping = q.show_mapping == Some(true);
        let rules = hits
            .iter()
            .skip(offset)
            .take(q.limit.unwrap_or(usize::MAX))
            .map(|(id, s)| self.view(**id, s, with_mapping))
            .collect();
        Ok(RulePage { total: hits.len(), offset, rules })
    }

    pub fn functors(&self) -> Vec<FunctorCount> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for s in self.rules.values() {
            *counts.entry(&s.rule.predicate).or_default() += 1;
        }
        counts.into_iter().map(|(p, n)| FunctorCount { predicate: p.to_string(), rules: n }).collect()
    }

    /// Predicates with a rule having some argument at or below `sort`.
    /// Accepts `city` or `[city]`.
    pub fn functors_by_arg(&self, sort: &str) -> Result<Vec<String>> {
        let t = sort.trim();
        let query = if t.starts_with('[') {
            SortTerm::parse(t).map_err(|e| SessionError::BadRequest(e.to_string()))?
        } else {
            SortTerm::atom(t)
        };
        query.check(&self.hierarchy).map_err(|e| SessionError::BadRequest(e.to_string()))?;
        let mut out: Vec<String> = Vec::new();
        for s in self.rules.values() {
            let hit = s.rule.args.iter().any(|a| self.hierarchy.subsumes(&query, a).unwrap_or(false));
            if hit && !out.contains(&s.rule.predicate) {
                out.push(s.rule.predicate.clone());
            }
        }
        out.sort();
        Ok(out)
    }

    /// Corpus lines of the rule's sample sentences, in id order.
    pub fn sentences(&self, id: u64) -> Result<Vec<SentenceView>> {
        let s = self.rules.get(&id).ok_or(SessionError::UnknownRule(id))?;
        if s.sample_sentences.is_empty() {
            return Ok(Vec::new());
        }
        let corpus = self.corpus.as_ref().ok_or(SessionError::NoCorpus)?;
        let mut ids = s.sample_sentences.clone();
        ids.sort_unstable();
        ids.into_iter()
            .map(|i| {
                corpus
                    .get(&i)
                    .map(|t| SentenceView { id: i, text: t.clone() })
                    .ok_or_else(|| SessionError::Data(format!("sample sentence {i} is not in the corpus")))
            })
            .collect()
    }

    /// Adds a rule with empty statistics. Rules with variables are refused
    /// unless `schematic` is set.
    pub fn insert(&mut self, text: &str, schematic: bool) -> Result<u64> {
        let rule = SortRule::parse(text.trim()).map_err(|e| SessionError::BadRequest(e.to_string()))?;
        rule.check(&self.hierarchy).map_err(|e| SessionError::BadRequest(e.to_string()))?;
        if rule.kind == RuleKind::Sor && rule.is_schematic() && !schematic {
            return Err(SessionError::BadRequest(format!("`{rule}` has variables; insert it as schematic")));
        }
        let key = rule.key();
        if let Some((id, _)) = self.rules.iter().find(|(_, s)| s.rule.key() == key) {
            return Err(SessionError::Duplicate(*id));
        }
        let id = self.next_id;
        self.journal(&Entry::Insert { id, rule: rule.to_clause() })?;
        self.next_id += 1;
        self.rules.insert(id, RuleStats::bare(rule));
        self.dirty = true;
        Ok(id)
    }

    pub fn delete(&mut self, id: u64) -> Result<RuleStats> {
        if !self.rules.contains_key(&id) {
            return Err(SessionError::UnknownRule(id));
        }
        self.journal(&Entry::Delete { id })?;
        self.dirty = true;
        Ok(self.rules.remove(&id).expect("checked above"))
    }

    pub fn add_note(&mut self, text: &str, sentence: Option<u64>, rule: Option<u64>) -> Result<Note> {
        if text.trim().is_empty() {
            return Err(SessionError::BadRequest("empty note".into()));
        }
        if let Some(r) = rule {
            if !self.rules.contains_key(&r) {
                return Err(SessionError::UnknownRule(r));
            }
        }
        if let (Some(s), Some(c)) = (sentence, &self.corpus) {
            if !c.contains_key(&s) {
                return Err(SessionError::Data(format!("sentence {s} is not in the corpus")));
            }
        }
        let note = Note { id: self.whiteboard.len() as u64 + 1, text: text.to_string(), sentence, rule };
        self.journal(&Entry::Note { note: note.clone() })?;
        self.whiteboard.push(note.clone());
        Ok(note)
    }

    /// Writes the working set in id order; defaults to `rules.sor`.
    pub fn save(&mut self, path: Option<&str>) -> Result<PathBuf> {
        let p = self.resolve(path.unwrap_or(RULES));
        write_atomic(&p, &write_harvest(&self.working_set())).map_err(|e| SessionError::Data(e.to_string()))?;
        self.journal(&Entry::Save { path: p.display().to_string() })?;
        self.dirty = false;
        Ok(p)
    }

    /// Replaces the hierarchy if every rule, and the reference, still checks.
    pub fn set_hierarchy(&mut self, path: &str) -> Result<()> {
        let p = self.resolve(path);
        let text = fs::read_to_string(&p).map_err(io(&p))?;
        let h = SortHierarchy::parse(&text).map_err(|e| data(&p, e))?;
        let reference = self.reference.iter().flat_map(|r| r.1.iter());
        for r in self.rules.values().map(|s| &s.rule).chain(reference) {
            r.check(&h).map_err(|e| data(&p, format!("{r}: {e}")))?;
        }
        self.journal(&Entry::Hierarchy { path: p.display().to_string() })?;
        self.hierarchy = h;
        Ok(())
    }

    fn load_reference(&self, path: &str) -> Result<Vec<SortRule>> {
        let p = self.resolve(path);
        let rules = parse_rules(&fs::read_to_string(&p).map_err(io(&p))?).map_err(|e| data(&p, e))?;
        for r in &rules {
            r.check(&self.hierarchy).map_err(|e| data(&p, format!("{r}: {e}")))?;
        }
        Ok(rules)
    }

    /// Maps the working set onto a reference file, which becomes the
    /// session's reference. Without a path the current reference is used.
    pub fn run_mapping(&mut self, path: Option<&str>, closure: bool) -> Result<MappingView> {
        if let Some(p) = path {
            let rules = self.load_reference(p)?;
            self.journal(&Entry::Reference { path: self.resolve(p).display().to_string() })?;
            self.reference = Some((p.to_string(), rules));
        }
        let (name, reference) = self.reference.as_ref().ok_or(SessionError::NoReference)?;
        let corpus: Vec<SortRule> = self.rules.values().map(|s| s.rule.clone()).collect();
        let report: MappingReport = if closure {
            map_rules_with_closure(&corpus, reference, &self.hierarchy)
        } else {
            map_rules(&corpus, reference, &self.hierarchy)
        }
        .map_err(|e| SessionError::Data(e.to_string()))?;
        let ids: HashMap<_, u64> = self.rules.iter().rev().map(|(i, s)| (s.rule.key(), *i)).collect();
        let assignments = report
            .assignments
            .iter()
            .filter_map(|(r, c)| {
                // Closure variants have no id of their own.
                ids.get(&r.key()).map(|id| Assignment { id: *id, rule: r.to_clause(), category: c.label().into() })
            })
            .collect();
        let m = report.metrics().ok();
        Ok(MappingView {
            reference: name.clone(),
            closure,
            counts: MappingCategory::ALL.iter().map(|c| (c.label().to_string(), report.counts.get(*c))).collect(),
            total: report.total,
            reference_size: report.reference_size,
            reference_hits: report.reference_hits,
            precision_low: m.map(|m| m.precision_low),
            precision_high: m.map(|m| m.precision_high),
            overgeneration: m.map(|m| m.overgeneration),
            recall: m.map(|m| m.recall),
            table: report.table(),
            assignments,
        })
    }
}
