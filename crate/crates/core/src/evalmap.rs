//! Mapping harvested rules onto a reference rule file, and the evaluation
//! metrics derived from the category counts.
//!
//! Only rules with at least one argument take part. Harvested rules are
//! deduplicated first, so the number of Exact rows equals the number of
//! distinct reference rules they hit.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::sort::{compare_rule, MappingCategory, RuleKey, SortError, SortHierarchy, SortRule, SortTerm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("{side} rule `{rule}`: {source}")]
    Hierarchy { side: &'static str, rule: String, source: SortError },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no corpus rules to evaluate")]
    EmptyCorpus,
    #[error("reference has no rules with arguments")]
    EmptyReference,
    #[error("category counts sum to {sum}, not the total {total}")]
    Inconsistent { sum: usize, total: usize },
}

/// Counts per category, in table order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryCounts(pub BTreeMap<MappingCategory, usize>);

impl CategoryCounts {
    pub fn new(exact: usize, incompatible: usize, subsumed_by: usize, subsumes: usize, incomparable: usize) -> Self {
        let values = [exact, incompatible, subsumed_by, subsumes, incomparable];
        CategoryCounts(MappingCategory::ALL.into_iter().zip(values).collect())
    }

    pub fn get(&self, c: MappingCategory) -> usize {
        self.0.get(&c).copied().unwrap_or(0)
    }

    pub fn add(&mut self, c: MappingCategory) {
        *self.0.entry(c).or_default() += 1;
    }

    pub fn sum(&self) -> usize {
        self.0.values().sum()
    }

    /// Counts in table order: Exact, Incompatible, Subsumed-by, Subsumes, Incomparable.
    pub fn as_array(&self) -> [usize; 5] {
        MappingCategory::ALL.map(|c| self.get(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub precision_low: f64,
    pub precision_high: f64,
    pub overgeneration: f64,
    pub recall: f64,
}

/// `precision_low = Exact/total`, `precision_high = (Exact+Subsumed-by)/total`,
/// `overgeneration = Incompatible/total`, `recall = reference_hits/reference_size`
/// where `reference_hits` counts distinct reference rules matched exactly.
pub fn compute_metrics(
    counts: &CategoryCounts,
    total: usize,
    reference_size: usize,
    reference_hits: usize,
) -> Result<Metrics, MetricsError> {
    if total == 0 {
        return Err(MetricsError::EmptyCorpus);
    }
    if reference_size == 0 {
        return Err(MetricsError::EmptyReference);
    }
    if counts.sum() != total {
        return Err(MetricsError::Inconsistent { sum: counts.sum(), total });
    }
    let t = total as f64;
    let exact = counts.get(MappingCategory::Exact) as f64;
    Ok(Metrics {
        precision_low: exact / t,
        precision_high: (exact + counts.get(MappingCategory::SubsumedBy) as f64) / t,
        overgeneration: counts.get(MappingCategory::Incompatible) as f64 / t,
        recall: reference_hits as f64 / reference_size as f64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappingReport {
    /// Each distinct corpus rule with its category, in input order.
    pub assignments: Vec<(SortRule, MappingCategory)>,
    pub counts: CategoryCounts,
    pub total: usize,
    pub reference_size: usize,
    /// Distinct reference rules some corpus rule equals.
    pub reference_hits: usize,
}

impl MappingReport {
    pub fn metrics(&self) -> Result<Metrics, MetricsError> {
        compute_metrics(&self.counts, self.total, self.reference_size, self.reference_hits)
    }

    pub fn category_of(&self, rule: &SortRule) -> Option<MappingCategory> {
        let key = rule.key();
        self.assignments.iter().find(|(r, _)| r.key() == key).map(|(_, c)| *c)
    }

    /// Text table: one row per category, then the derived metrics.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<14}{:>8}{:>9}\n", "Category", "Rules", "Share"));
        for c in MappingCategory::ALL {
            let n = self.counts.get(c);
            out.push_str(&format!("{:<14}{:>8}{:>9}\n", c.label(), n, percent(n, self.total)));
        }
        out.push_str(&format!("{:<14}{:>8}\n", "Total", self.total));
        out.push_str(&format!("{:<14}{:>8}\n", "Reference", self.reference_size));
        match self.metrics() {
            Ok(m) => {
                out.push_str(&format!(
                    "precision      {:.1}% - {:.1}%\n",
                    m.precision_low * 100.0,
                    m.precision_high * 100.0
                ));
                out.push_str(&format!("overgeneration {:.1}%\n", m.overgeneration * 100.0));
                out.push_str(&format!(
                    "recall         {:.1}% ({}/{})\n",
                    m.recall * 100.0,
                    self.reference_hits,
                    self.reference_size
                ));
            }
            Err(e) => out.push_str(&format!("metrics unavailable: {e}\n")),
        }
        out
    }

    /// `category<TAB>rule` per corpus rule.
    pub fn records(&self) -> String {
        self.assignments.iter().map(|(r, c)| format!("{}\t{}\n", c.label(), r.to_clause())).collect()
    }
}

impl fmt::Display for MappingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.table())
    }
}

fn percent(n: usize, total: usize) -> String {
    if total == 0 {
        "-".into()
    } else {
        format!("{:.1}%", n as f64 * 100.0 / total as f64)
    }
}

fn dedupe(rules: &[SortRule]) -> Vec<SortRule> {
    let mut seen: HashSet<RuleKey> = HashSet::new();
    rules.iter().filter(|r| r.arity() > 0 && seen.insert(r.key())).cloned().collect()
}

/// Categorises every distinct corpus rule with arguments against the
/// reference rules with arguments.
pub fn map_rules(corpus: &[SortRule], reference: &[SortRule], h: &SortHierarchy) -> Result<MappingReport, MapError> {
    for (side, rules) in [("corpus", corpus), ("reference", reference)] {
        for r in rules {
            r.check(h).map_err(|source| MapError::Hierarchy { side, rule: r.to_string(), source })?;
        }
    }
    let corpus = dedupe(corpus);
    let reference = dedupe(reference);
    let mut counts = CategoryCounts::new(0, 0, 0, 0, 0);
    let mut assignments = Vec::with_capacity(corpus.len());
    for r in corpus {
        let c = compare_rule(&r, &reference, h);
        counts.add(c);
        assignments.push((r, c));
    }
    let hits = reference.iter().filter(|r| assignments.iter().any(|(c, _)| c.alpha_eq(r))).count();
    Ok(MappingReport { total: assignments.len(), assignments, counts, reference_size: reference.len(), reference_hits: hits })
}

/// Adds, for every rule, the variants obtained by replacing one atomic
/// argument sort with one of its direct children.
pub fn expand_one_level(rules: &[SortRule], h: &SortHierarchy) -> Vec<SortRule> {
    let mut out: Vec<SortRule> = Vec::new();
    let mut seen: HashSet<RuleKey> = HashSet::new();
    let mut push = |r: SortRule, out: &mut Vec<SortRule>| {
        if seen.insert(r.key()) {
            out.push(r);
        }
    };
    for r in rules {
        push(r.clone(), &mut out);
        for (i, a) in r.args.iter().enumerate() {
            let Some(atom) = a.as_atom() else { continue };
            for child in h.children(atom).unwrap_or_default() {
                let mut v = r.clone();
                v.args[i] = SortTerm::atom(child);
                push(v, &mut out);
            }
        }
    }
    out
}

/// [`map_rules`] after expanding both sides one hierarchy level.
pub fn map_rules_with_closure(
    corpus: &[SortRule],
    reference: &[SortRule],
    h: &SortHierarchy,
) -> Result<MappingReport, MapError> {
    map_rules(&expand_one_level(corpus, h), &expand_one_level(reference, h), h)
}
