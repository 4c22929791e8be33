//! The acquisition loop: parse the corpus under the active rule file,
//! harvest, filter, write the next rule file, repeat until the rule set no
//! longer changes. Iteration 1 runs under the signature file.
//!
//! Every file is written to a temporary sibling and renamed into place, and
//! a lock file keeps a second run out of the same output directory.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::grammar::{parse_corpus, Grammar, GrammarError, Lexicon, Sentence};
use crate::harvest::{
    compute_probabilities, harvest_corpus, parse_decimal, read_harvest, write_harvest, Extractor, Family,
    HarvestError, Mode, RuleStats, DEFAULT_SAMPLE_CAP,
};
use crate::lf::LfError;
use crate::parser::{write_parse_results, ParseResult, Parser, ParserConfig};
use crate::sort::{compare_rule, MappingCategory, RuleKey, RuleKind, SortError, SortHierarchy, SortRule};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("another run holds the lock {0}")]
    Locked(PathBuf),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error(transparent)]
    Lf(#[from] LfError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

fn data_err(path: &Path, e: impl ToString) -> PipelineError {
    PipelineError::Data { path: path.to_path_buf(), message: e.to_string() }
}

pub fn read_file(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Writes `contents` to a temporary file next to `path` and renames it over
/// `path`, so readers see either the old or the new file, never a prefix.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), PipelineError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(contents.as_bytes()).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| PipelineError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

/// Exclusive lock on a directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub const FILE: &'static str = ".sortacq.lock";

    pub fn acquire(dir: &Path) -> Result<Self, PipelineError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join(Self::FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(PipelineError::Locked(path)),
            Err(e) => Err(PipelineError::Io { path, source: e }),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// The fixed inputs of a run.
#[derive(Debug, Clone)]
pub struct Domain {
    pub hierarchy: SortHierarchy,
    pub grammar: Grammar,
    pub lexicon: Lexicon,
    pub corpus: Vec<Sentence>,
}

impl Domain {
    pub fn load(hierarchy: &Path, grammar: &Path, lexicon: &Path, corpus: &Path) -> Result<Self, PipelineError> {
        let gram = |p: &Path, e: GrammarError| data_err(p, e);
        let domain = Domain {
            hierarchy: SortHierarchy::parse(&read_file(hierarchy)?).map_err(|e| data_err(hierarchy, e))?,
            grammar: Grammar::parse(&read_file(grammar)?).map_err(|e| gram(grammar, e))?,
            lexicon: Lexicon::parse(&read_file(lexicon)?).map_err(|e| gram(lexicon, e))?,
            corpus: parse_corpus(&read_file(corpus)?).map_err(|e| gram(corpus, e))?,
        };
        domain.lexicon.check(&domain.hierarchy).map_err(|e| data_err(lexicon, e))?;
        Ok(domain)
    }
}

/// Loads the rules of a rule, signature or harvest file.
pub fn load_rules(path: &Path) -> Result<Vec<RuleStats>, PipelineError> {
    read_harvest(&read_file(path)?).map_err(|e: HarvestError| data_err(path, e))
}

/// Keeps rules whose probability in `family` is at least `threshold`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdFilter {
    pub family: Family,
    pub threshold: BigRational,
}

impl ThresholdFilter {
    /// `threshold` is an exact decimal in `[0, 1]`.
    pub fn new(family: Family, threshold: &str) -> Result<Self, String> {
        let t = parse_decimal(threshold).ok_or_else(|| format!("bad threshold `{threshold}`"))?;
        if t < BigRational::zero() || t > BigRational::one() {
            return Err(format!("threshold {threshold} is outside [0, 1]"));
        }
        Ok(ThresholdFilter { family, threshold: t })
    }

    pub fn keeps(&self, s: &RuleStats) -> bool {
        s.probability(self.family) >= &self.threshold
    }
}

pub fn apply_filter(stats: &[RuleStats], f: &ThresholdFilter) -> Vec<RuleStats> {
    stats.iter().filter(|s| f.keeps(s)).cloned().collect()
}

/// Stand-in for the linguist's pass through the editor: keep the harvested
/// rules a reference file accepts (Exact or Subsumed-by).
#[derive(Debug, Clone)]
pub struct ReferenceCurator {
    pub reference: Vec<SortRule>,
}

impl ReferenceCurator {
    pub fn keeps(&self, rule: &SortRule, h: &SortHierarchy) -> bool {
        matches!(compare_rule(rule, &self.reference, h), MappingCategory::Exact | MappingCategory::SubsumedBy)
    }
}

#[derive(Debug, Clone)]
pub struct IterationConfig {
    pub mode: Mode,
    pub filter: Option<ThresholdFilter>,
    pub curator: Option<ReferenceCurator>,
    pub extractor: Extractor,
    pub sample_cap: usize,
    pub parser: ParserConfig,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            mode: Mode::Plfs,
            filter: None,
            curator: None,
            extractor: Extractor::default(),
            sample_cap: DEFAULT_SAMPLE_CAP,
            parser: ParserConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationState {
    /// The iteration the state is ready to run.
    pub iteration: usize,
    pub rules_path: PathBuf,
    /// Harvest of the last completed iteration, after filtering.
    pub stats: Vec<RuleStats>,
    /// Analyses per sentence in the last completed iteration, corpus order.
    pub analysis_counts: Vec<(u64, usize)>,
    pub converged: bool,
    /// Conditions worth reporting that did not stop the iteration.
    pub warnings: Vec<String>,
}

impl IterationState {
    /// Iteration 1 runs under the signature file.
    pub fn initial(signature_path: &Path) -> Self {
        IterationState {
            iteration: 1,
            rules_path: signature_path.to_path_buf(),
            stats: Vec::new(),
            analysis_counts: Vec::new(),
            converged: false,
            warnings: Vec::new(),
        }
    }

    pub fn parsed(&self) -> usize {
        self.analysis_counts.iter().filter(|(_, n)| *n > 0).count()
    }
}

/// Directory holding the files of iteration `n`.
pub fn iteration_dir(out: &Path, n: usize) -> PathBuf {
    out.join(format!("iter-{n}"))
}

fn rule_set(rules: &[SortRule]) -> BTreeSet<RuleKey> {
    rules.iter().map(SortRule::key).collect()
}

/// Parses, harvests and filters once; writes `iter-N/{parses.txt,
/// harvest.sor, rules.sor}` under `out` and returns the state for the next
/// iteration. The new rule file holds the kept harvested rules plus the
/// zero-arity rules of the previous file.
pub fn run_iteration(
    state: &IterationState,
    domain: &Domain,
    out: &Path,
    config: &IterationConfig,
) -> Result<IterationState, PipelineError> {
    let previous: Vec<SortRule> = load_rules(&state.rules_path)?.into_iter().map(|s| s.rule).collect();
    let parser =
        Parser::new(&domain.grammar, &domain.lexicon, &previous, &domain.hierarchy, config.parser.clone())
            .map_err(|e| data_err(&state.rules_path, e))?;
    let results: Vec<ParseResult> = parser.parse_corpus(&domain.corpus);
    let harvested = compute_probabilities(harvest_corpus(&results, config.mode, &config.extractor, config.sample_cap)?);
    let mut kept = match &config.filter {
        Some(f) => apply_filter(&harvested, f),
        None => harvested.clone(),
    };
    if let Some(c) = &config.curator {
        kept.retain(|s| c.keeps(&s.rule, &domain.hierarchy));
    }
    let mut next: Vec<RuleStats> = kept.clone();
    next.extend(
        previous.iter().filter(|r| r.arity() == 0).map(|r| RuleStats::bare(r.clone().with_kind(RuleKind::Sor))),
    );
    let dir = iteration_dir(out, state.iteration);
    write_atomic(&dir.join("parses.txt"), &write_parse_results(&results))?;
    write_atomic(&dir.join("harvest.sor"), &write_harvest(&harvested))?;
    let rules_path = dir.join("rules.sor");
    write_atomic(&rules_path, &write_harvest(&next))?;
    let next_rules: Vec<SortRule> = next.iter().map(|s| s.rule.clone()).collect();
    let mut warnings = Vec::new();
    if harvested.is_empty() {
        warnings.push(format!("iteration {}: nothing harvested", state.iteration));
    } else if kept.is_empty() {
        warnings.push(format!("iteration {}: every harvested rule was filtered out", state.iteration));
    }
    Ok(IterationState {
        warnings,
        iteration: state.iteration + 1,
        converged: rule_set(&next_rules) == rule_set(&previous),
        rules_path,
        stats: kept,
        analysis_counts: results.iter().map(|r| (r.sentence_id, r.analyses.len())).collect(),
    })
}

/// Iterates from the signature file until the rule set is a fixpoint or
/// `max_iterations` have run. Returns the state after each iteration.
pub fn run_pipeline(
    domain: &Domain,
    signature_path: &Path,
    out: &Path,
    config: &IterationConfig,
    max_iterations: usize,
) -> Result<Vec<IterationState>, PipelineError> {
    let _lock = DirLock::acquire(out)?;
    let mut state = IterationState::initial(signature_path);
    let mut history = Vec::new();
    let mut summary = String::from("iteration\trules\tparsed\tanalyses\tconverged\n");
    while history.len() < max_iterations {
        let n = state.iteration;
        state = run_iteration(&state, domain, out, config)?;
        let analyses: usize = state.analysis_counts.iter().map(|c| c.1).sum();
        let rules = load_rules(&state.rules_path)?.len();
        summary.push_str(&format!("{n}\t{rules}\t{}\t{analyses}\t{}\n", state.parsed(), state.converged));
        write_atomic(&out.join("summary.tsv"), &summary)?;
        let done = state.converged;
        history.push(state.clone());
        if done {
            break;
        }
    }
    Ok(history)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleDiff {
    pub added: Vec<SortRule>,
    pub removed: Vec<SortRule>,
}

impl RuleDiff {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }

    /// `+ rule` / `- rule` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.removed {
            out.push_str(&format!("- {}\n", r.to_clause()));
        }
        for r in &self.added {
            out.push_str(&format!("+ {}\n", r.to_clause()));
        }
        out
    }
}

/// Set difference on rules up to variable renaming, ignoring rule kinds.
pub fn diff_rules(a: &[SortRule], b: &[SortRule]) -> RuleDiff {
    let ka = rule_set(a);
    let kb = rule_set(b);
    let pick = |rules: &[SortRule], other: &BTreeSet<RuleKey>| {
        let mut seen = BTreeSet::new();
        let mut out: Vec<SortRule> =
            rules.iter().filter(|r| !other.contains(&r.key()) && seen.insert(r.key())).cloned().collect();
        out.sort_by_key(SortRule::key);
        out
    };
    RuleDiff { added: pick(b, &ka), removed: pick(a, &kb) }
}

pub fn diff_rule_files(a: &Path, b: &Path) -> Result<RuleDiff, PipelineError> {
    let ra: Vec<SortRule> = load_rules(a)?.into_iter().map(|s| s.rule).collect();
    let rb: Vec<SortRule> = load_rules(b)?.into_iter().map(|s| s.rule).collect();
    Ok(diff_rules(&ra, &rb))
}
