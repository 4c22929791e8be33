//! Rule extraction from logical forms, occurrence statistics and the three
//! probability families.
//!
//! For a rule `i`, `Θ` counts its instances over the harvested logical
//! forms and `Θ̄ = Θ / (logical forms containing it)`. Each probability is
//! `Θ̄_i` over the sum of `Θ̄` in a conditioning class: all rules (global),
//! rules with the same predicate, or rules with the same predicate and first
//! argument sort. Everything is kept as exact rationals; files show
//! probabilities with six decimals.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::lf::{Lf, LfError, Node};
use crate::parser::ParseResult;
use crate::sort::{RuleKey, SortError, SortRule, SortTerm};

/// Predicates that are never harvested. The parser also treats them as
/// structural: it builds them without consulting the rule set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusionList(pub BTreeSet<String>);

impl ExclusionList {
    pub const DEFAULT: [&'static str; 6] = ["and", "equal", "exists", "has_aspect", "qterm", "the"];

    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ExclusionList(names.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(name)
    }

    /// One predicate name per line; `%` starts a comment.
    pub fn parse(text: &str) -> Self {
        ExclusionList::new(
            text.lines().map(|l| l.split('%').next().unwrap_or("").trim()).filter(|l| !l.is_empty()),
        )
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|n| format!("{n}\n")).collect()
    }
}

impl Default for ExclusionList {
    fn default() -> Self {
        ExclusionList::new(Self::DEFAULT)
    }
}

/// What a traversal of a logical form harvests.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Extractor {
    pub excluded: ExclusionList,
    /// Also harvest zero-arity rules from constants. Off by default: constant
    /// sorts come from the hand-maintained name table, not from parsing.
    pub constants: bool,
}

impl Extractor {
    pub fn new(excluded: ExclusionList) -> Self {
        Extractor { excluded, constants: false }
    }

    /// One `sor` rule instance per non-excluded predication (and constant,
    /// when enabled), in depth-first order.
    pub fn extract(&self, lf: &Lf) -> Result<Vec<SortRule>, LfError> {
        let mut out = Vec::new();
        self.go(lf, "", &mut out)?;
        Ok(out)
    }

    fn go(&self, lf: &Lf, path: &str, out: &mut Vec<SortRule>) -> Result<(), LfError> {
        let unannotated = |p: &str| LfError::Unannotated { path: if p.is_empty() { "/".into() } else { p.to_string() } };
        let sort = lf.sort.as_ref().ok_or_else(|| unannotated(path))?;
        if let Some(b) = lf.binder() {
            if b.sort.is_none() {
                return Err(unannotated(&format!("{path}/{}", b.name)));
            }
        }
        match &lf.node {
            Node::Pred { name, args } if !self.excluded.contains(name) => {
                let mut sorts = Vec::with_capacity(args.len());
                for (i, a) in args.iter().enumerate() {
                    sorts.push(a.sort.clone().ok_or_else(|| unannotated(&format!("{path}/{i}")))?);
                }
                out.push(SortRule::sor(name.clone(), sorts, sort.clone()));
            }
            Node::Const(c) if self.constants && !self.excluded.contains(c) => {
                out.push(SortRule::sor(c.clone(), Vec::new(), sort.clone()));
            }
            _ => {}
        }
        for (i, c) in lf.children().into_iter().enumerate() {
            self.go(c, &format!("{path}/{i}"), out)?;
        }
        Ok(())
    }
}

/// Rule instances of `lf` under `excluded`, constants not included.
pub fn extract_rules(lf: &Lf, excluded: &ExclusionList) -> Result<Vec<SortRule>, LfError> {
    Extractor::new(excluded.clone()).extract(lf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Every analysis contributes.
    Lfs,
    /// Only each sentence's preferred analysis contributes.
    Plfs,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lfs" => Ok(Mode::Lfs),
            "plfs" => Ok(Mode::Plfs),
            _ => Err(format!("unknown mode `{s}` (expected lfs or plfs)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Lfs => "lfs",
            Mode::Plfs => "plfs",
        })
    }
}

/// Probability family used for filtering and ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Global,
    Pred,
    Arg1,
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "global" => Ok(Family::Global),
            "pred" | "given_pred" => Ok(Family::Pred),
            "arg1" | "given_pred_arg1" => Ok(Family::Arg1),
            _ => Err(format!("unknown probability family `{s}` (expected global, pred or arg1)")),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Global => "global",
            Family::Pred => "pred",
            Family::Arg1 => "arg1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleStats {
    pub rule: SortRule,
    /// Θ: matching predication instances.
    pub invocations: u64,
    /// Logical forms with at least one instance.
    pub lf_count: u64,
    pub theta_bar: BigRational,
    pub p_global: BigRational,
    pub p_given_pred: BigRational,
    pub p_given_pred_arg1: BigRational,
    pub sample_sentences: Vec<u64>,
}

impl RuleStats {
    /// A rule with no evidence, as when inserted by hand.
    pub fn bare(rule: SortRule) -> Self {
        RuleStats {
            rule,
            invocations: 0,
            lf_count: 0,
            theta_bar: BigRational::zero(),
            p_global: BigRational::zero(),
            p_given_pred: BigRational::zero(),
            p_given_pred_arg1: BigRational::zero(),
            sample_sentences: Vec::new(),
        }
    }

    pub fn probability(&self, family: Family) -> &BigRational {
        match family {
            Family::Global => &self.p_global,
            Family::Pred => &self.p_given_pred,
            Family::Arg1 => &self.p_given_pred_arg1,
        }
    }

    pub fn has_stats(&self) -> bool {
        self.lf_count > 0
    }
}

pub const DEFAULT_SAMPLE_CAP: usize = 5;

#[derive(Debug, Clone)]
struct Acc {
    rule: SortRule,
    theta: u64,
    lfs: u64,
    /// (corpus position, sentence id), smallest positions first.
    samples: Vec<(usize, u64)>,
}

type Tally = HashMap<RuleKey, Acc>;

fn merge(mut a: Tally, b: Tally, cap: usize) -> Tally {
    for (k, v) in b {
        match a.get_mut(&k) {
            Some(acc) => {
                acc.theta += v.theta;
                acc.lfs += v.lfs;
                acc.samples.extend(v.samples);
                acc.samples.sort();
                acc.samples.dedup();
                acc.samples.truncate(cap);
            }
            None => {
                a.insert(k, v);
            }
        }
    }
    a
}

/// Accumulates Θ, LF counts and sample sentences over parse results.
/// Probabilities are left at zero; see [`compute_probabilities`].
pub fn harvest_corpus(
    results: &[ParseResult],
    mode: Mode,
    extractor: &Extractor,
    sample_cap: usize,
) -> Result<Vec<RuleStats>, LfError> {
    let tallies: Vec<Tally> = results
        .par_iter()
        .enumerate()
        .map(|(pos, r)| {
            let lfs: Vec<&Lf> = match mode {
                Mode::Lfs => r.analyses.iter().map(|a| &a.lf).collect(),
                Mode::Plfs => r.plf().map(|a| &a.lf).into_iter().collect(),
            };
            let mut tally = Tally::new();
            for lf in lfs {
                let mut seen = BTreeSet::new();
                for rule in extractor.extract(lf)? {
                    let key = rule.key();
                    let first = seen.insert(key.clone());
                    let acc = tally.entry(key).or_insert_with(|| Acc { rule, theta: 0, lfs: 0, samples: Vec::new() });
                    acc.theta += 1;
                    if first {
                        acc.lfs += 1;
                    }
                    if acc.samples.is_empty() && sample_cap > 0 {
                        acc.samples.push((pos, r.sentence_id));
                    }
                }
            }
            Ok(tally)
        })
        .collect::<Result<_, LfError>>()?;
    let total = tallies.into_iter().fold(Tally::new(), |a, b| merge(a, b, sample_cap));
    let mut stats: Vec<RuleStats> = total
        .into_values()
        .map(|acc| RuleStats {
            theta_bar: BigRational::new(BigInt::from(acc.theta), BigInt::from(acc.lfs)),
            invocations: acc.theta,
            lf_count: acc.lfs,
            sample_sentences: acc.samples.iter().map(|s| s.1).collect(),
            ..RuleStats::bare(acc.rule)
        })
        .collect();
    stats.sort_by_key(|s| s.rule.key());
    Ok(stats)
}

/// Fills the three probability families from `theta_bar`.
pub fn compute_probabilities(mut stats: Vec<RuleStats>) -> Vec<RuleStats> {
    let total: BigRational = stats.iter().map(|s| &s.theta_bar).sum();
    let mut by_pred: HashMap<String, BigRational> = HashMap::new();
    let mut by_arg1: HashMap<(String, Option<SortTerm>), BigRational> = HashMap::new();
    for s in &stats {
        *by_pred.entry(s.rule.predicate.clone()).or_insert_with(BigRational::zero) += &s.theta_bar;
        *by_arg1.entry(arg1_class(&s.rule)).or_insert_with(BigRational::zero) += &s.theta_bar;
    }
    let ratio = |n: &BigRational, d: &BigRational| if d.is_zero() { BigRational::zero() } else { n / d };
    for s in &mut stats {
        s.p_global = ratio(&s.theta_bar, &total);
        s.p_given_pred = ratio(&s.theta_bar, &by_pred[&s.rule.predicate]);
        s.p_given_pred_arg1 = ratio(&s.theta_bar, &by_arg1[&arg1_class(&s.rule)]);
    }
    stats
}

/// Conditioning class of the third family; zero-arity rules fall back to
/// the predicate alone.
fn arg1_class(r: &SortRule) -> (String, Option<SortTerm>) {
    (r.predicate.clone(), r.args.first().cloned())
}

/// Decimal rendering with `digits` places, rounding half away from zero.
pub fn format_decimal(r: &BigRational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = r * BigRational::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let neg = rounded.is_negative();
    let abs = rounded.abs();
    let int = &abs / &scale;
    let frac = &abs % &scale;
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int}");
    }
    format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits as usize)
}

/// Parses `12`, `-0.25`, `3/4` exactly.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        return (!d.is_zero()).then(|| BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty()) || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let value = BigRational::new(digits, BigInt::from(10u32).pow(frac.len() as u32));
    Some(if neg { -value } else { value })
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Metadata comment following a rule in harvest files.
pub fn metadata_line(s: &RuleStats) -> String {
    let sents: Vec<String> = s.sample_sentences.iter().map(u64::to_string).collect();
    format!(
        "%% theta={} lfs={} theta_bar={} p={} p_pred={} p_arg={} sents=[{}]",
        s.invocations,
        s.lf_count,
        format_rational(&s.theta_bar),
        format_decimal(&s.p_global, 6),
        format_decimal(&s.p_given_pred, 6),
        format_decimal(&s.p_given_pred_arg1, 6),
        sents.join(",")
    )
}

/// One rule clause per line, followed by its metadata line when it has
/// statistics.
pub fn write_harvest(stats: &[RuleStats]) -> String {
    let mut out = String::new();
    for s in stats {
        out.push_str(&s.rule.to_clause());
        out.push('\n');
        if s.has_stats() {
            out.push_str(&metadata_line(s));
            out.push('\n');
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarvestError {
    #[error("line {line}: {source}")]
    Rule { line: usize, source: SortError },
    #[error("line {line}: {message}")]
    Metadata { line: usize, message: String },
}

/// Reads a rule file written by [`write_harvest`]. Rules without a metadata
/// line get empty statistics, so plain rule files load too. Each clause
/// must sit on its own line.
pub fn read_harvest(text: &str) -> Result<Vec<RuleStats>, HarvestError> {
    let mut out: Vec<RuleStats> = Vec::new();
    let mut has_meta = false;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let t = line.trim();
        if let Some(meta) = t.strip_prefix("%%") {
            let bad = |m: String| HarvestError::Metadata { line: line_no, message: m };
            let last = out.last_mut().filter(|_| !has_meta).ok_or_else(|| bad("metadata without a rule".into()))?;
            parse_metadata(meta, last).map_err(bad)?;
            has_meta = true;
            continue;
        }
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let rule = SortRule::parse(t).map_err(|source| HarvestError::Rule {
            line: line_no,
            source: match source {
                SortError::Malformed { message, .. } => SortError::Malformed { line: line_no, message },
                other => other,
            },
        })?;
        out.push(RuleStats::bare(rule));
        has_meta = false;
    }
    Ok(out)
}

fn parse_metadata(meta: &str, s: &mut RuleStats) -> Result<(), String> {
    let fields: BTreeMap<&str, &str> = meta.split_whitespace().filter_map(|f| f.split_once('=')).collect();
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| format!("missing `{k}`"));
    let num = |k: &str| get(k).and_then(|v| v.parse::<u64>().map_err(|_| format!("bad `{k}`")));
    let rat = |k: &str| get(k).and_then(|v| parse_decimal(v).ok_or_else(|| format!("bad `{k}`")));
    s.invocations = num("theta")?;
    s.lf_count = num("lfs")?;
    s.theta_bar = rat("theta_bar")?;
    s.p_global = rat("p")?;
    s.p_given_pred = rat("p_pred")?;
    s.p_given_pred_arg1 = rat("p_arg")?;
    let sents = get("sents")?;
    let inner = sents.strip_prefix('[').and_then(|x| x.strip_suffix(']')).ok_or("bad `sents`")?;
    s.sample_sentences = if inner.is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(|x| x.parse::<u64>().map_err(|_| "bad `sents`".to_string())).collect::<Result<_, _>>()?
    };
    if s.lf_count == 0 || s.invocations < s.lf_count {
        return Err("counts must satisfy theta >= lfs >= 1".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sort::SortHierarchy;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn with_theta_bar(pred: &str, arg: &str, tb: BigRational) -> RuleStats {
        let rule = SortRule::sor(pred, vec![SortTerm::atom(arg)], SortTerm::atom("prop"));
        RuleStats { theta_bar: tb, invocations: 1, lf_count: 1, ..RuleStats::bare(rule) }
    }

    #[test]
    fn global_probability_is_the_displayed_ratio() {
        let s = compute_probabilities(vec![with_theta_bar("a", "x", rat(3, 1)), with_theta_bar("b", "x", rat(1, 1))]);
        assert_eq!(s[0].p_global, rat(3, 4));
        assert_eq!(s[1].p_global, rat(1, 4));
        let one = compute_probabilities(vec![with_theta_bar("a", "x", rat(7, 3))]);
        assert!(one[0].p_global.is_one() && one[0].p_given_pred.is_one() && one[0].p_given_pred_arg1.is_one());
        assert!(compute_probabilities(Vec::new()).is_empty());
    }

    #[test]
    fn decimals() {
        assert_eq!(format_decimal(&rat(1, 3), 6), "0.333333");
        assert_eq!(format_decimal(&rat(2, 3), 6), "0.666667");
        assert_eq!(format_decimal(&rat(1, 1), 6), "1.000000");
        assert_eq!(format_decimal(&rat(-1, 8), 2), "-0.13");
        assert_eq!(parse_decimal("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_decimal("-.5"), Some(rat(-1, 2)));
        assert_eq!(parse_decimal("6/4"), Some(rat(3, 2)));
        assert_eq!(parse_decimal("1e3"), None);
        assert_eq!(parse_decimal("."), None);
        assert_eq!(parse_decimal("1/0"), None);
    }

    #[test]
    fn extraction_reports_unannotated_paths() {
        let h = SortHierarchy::parse("isa(prop,top). isa(city,top).").unwrap();
        let lf = crate::lf::parse_lf("([to,('BOSTON';[city]),'DENVER'];[prop])", &h).unwrap();
        assert_eq!(
            extract_rules(&lf, &ExclusionList::default()),
            Err(LfError::Unannotated { path: "/1".into() })
        );
    }

    #[test]
    fn metadata_round_trip() {
        let mut s = with_theta_bar("to", "flight", rat(6, 5));
        s.invocations = 12;
        s.lf_count = 10;
        s.p_global = rat(1, 8);
        s.p_given_pred = rat(1, 2);
        s.p_given_pred_arg1 = rat(1, 1);
        s.sample_sentences = vec![1, 4];
        let text = write_harvest(&[s.clone(), RuleStats::bare(SortRule::sor("x", vec![], SortTerm::atom("y")))]);
        assert_eq!(
            text,
            "sor(to,([[flight]],[prop])).\n%% theta=12 lfs=10 theta_bar=6/5 p=0.125000 p_pred=0.500000 p_arg=1.000000 sents=[1,4]\nsor(x,([y])).\n"
        );
        let back = read_harvest(&text).unwrap();
        assert_eq!(back[0], s);
        assert!(!back[1].has_stats());
        assert!(read_harvest("%% theta=1 lfs=1").is_err());
        assert!(read_harvest("sor(a,([b])).\n%% theta=1 lfs=2 theta_bar=1 p=1 p_pred=1 p_arg=1 sents=[]").is_err());
    }
}
