mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{golden, lfgen::lf_strategy, Toy};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use sortacq::harvest::*;
use sortacq::lf::{parse_lf, resolve_sorts, Lf, Node};
use sortacq::parser::{read_parse_results, write_parse_results, ParseResult};
use sortacq::sort::{SortHierarchy, SortRule, SortTerm};

fn hierarchy() -> SortHierarchy {
    SortHierarchy::parse(&common::read("hierarchy.isa")).unwrap()
}

fn texts(rules: &[SortRule]) -> Vec<String> {
    rules.iter().map(|r| r.to_string()).collect()
}

#[test]
fn morning_flights_form_yields_six_rules() {
    let h = hierarchy();
    let mut lf = parse_lf(common::MORNING_FLIGHTS_LF, &h).unwrap();
    resolve_sorts(&mut lf, &h).unwrap();
    let rules = extract_rules(&lf, &ExclusionList::default()).unwrap();
    assert_eq!(
        texts(&rules),
        [
            "sor(flight,([[flight]],[prop]))",
            "sor(n_n_rel,([([[day_part]],[prop]),[flight]],[prop]))",
            "sor(morning,([[day_part]],[prop]))",
            "sor(fly,([[flight]],[prop]))",
            "sor(actor,([[flight],[flight]],[prop]))",
            "sor(to,([[flight],[city]],[prop]))",
        ]
    );
}

#[test]
fn structure_only_yields_nothing() {
    let h = hierarchy();
    let lf = parse_lf(
        "(exists((A;[flight]),([and,([equal,(A;[flight]),(A;[flight])];[prop])];[prop]));[prop])",
        &h,
    )
    .unwrap();
    assert!(extract_rules(&lf, &ExclusionList::default()).unwrap().is_empty());
}

#[test]
fn repeated_predication_counts_twice() {
    let to = Lf::pred(
        "to",
        vec![Lf::var("A", SortTerm::atom("flight")), Lf::constant("DENVER", SortTerm::atom("city"))],
        SortTerm::atom("prop"),
    );
    let lf = Lf::pred("and", vec![to.clone(), to], SortTerm::atom("prop"));
    let rules = extract_rules(&lf, &ExclusionList::default()).unwrap();
    assert_eq!(texts(&rules), ["sor(to,([[flight],[city]],[prop]))"; 2]);
    let with_constants = Extractor { constants: true, ..Extractor::default() };
    assert_eq!(with_constants.extract(&lf).unwrap().len(), 4);
}

#[test]
fn unannotated_argument_is_reported_by_path() {
    let lf = Lf::pred("to", vec![Lf::new(Node::Var("A".into()), None)], SortTerm::atom("prop"));
    let err = extract_rules(&lf, &ExclusionList::default()).unwrap_err();
    assert!(err.to_string().contains("/0"), "{err}");
}

/// Predications and constants of `lf` as (name, argument sorts, result), by
/// a traversal written independently of the extractor.
fn enumerate(lf: &Lf, excluded: &ExclusionList, constants: bool, out: &mut Vec<(String, Vec<SortTerm>, SortTerm)>) {
    match &lf.node {
        Node::Pred { name, args } => {
            if !excluded.contains(name) {
                let sorts = args.iter().map(|a| a.sort.clone().unwrap()).collect();
                out.push((name.clone(), sorts, lf.sort.clone().unwrap()));
            }
            args.iter().for_each(|a| enumerate(a, excluded, constants, out));
        }
        Node::Const(c) if constants && !excluded.contains(c) => out.push((c.clone(), Vec::new(), lf.sort.clone().unwrap())),
        Node::Const(_) | Node::Var(_) => {}
        Node::Qterm { det, restriction, .. } => {
            enumerate(det, excluded, constants, out);
            enumerate(restriction, excluded, constants, out);
        }
        Node::Exists { body, .. } | Node::Lambda { body, .. } => enumerate(body, excluded, constants, out),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn extraction_is_the_multiset_of_predications(lf in lf_strategy(), constants in any::<bool>()) {
        let ex = Extractor { constants, ..Extractor::default() };
        let mut want = Vec::new();
        enumerate(&lf, &ex.excluded, constants, &mut want);
        let mut got: Vec<(String, Vec<SortTerm>, SortTerm)> =
            ex.extract(&lf).unwrap().into_iter().map(|r| (r.predicate, r.args, r.result)).collect();
        prop_assert_eq!(got.len(), want.len());
        got.sort();
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn probabilities_normalise(entries in prop::collection::vec((0usize..4, 0usize..3, 1u64..50, 1u64..5), 1..30)) {
        let stats: Vec<RuleStats> = entries
            .iter()
            .map(|&(p, a, theta, lfs)| {
                let args = if a == 0 { vec![] } else { vec![SortTerm::atom(format!("s{a}")), SortTerm::atom("x")] };
                RuleStats {
                    invocations: theta * lfs,
                    lf_count: lfs,
                    theta_bar: BigRational::new((theta * lfs).into(), lfs.into()),
                    ..RuleStats::bare(SortRule::sor(format!("p{p}"), args, SortTerm::atom("prop")))
                }
            })
            .collect();
        let stats = compute_probabilities(stats);
        assert_families_sum_to_one(&stats);
    }
}

/// Sums each family over its conditioning classes, exactly and in floating point.
fn assert_families_sum_to_one(stats: &[RuleStats]) {
    type Class = Box<dyn Fn(&SortRule) -> String>;
    let classes: [(Family, Class); 3] = [
        (Family::Global, Box::new(|_| String::new())),
        (Family::Pred, Box::new(|r| r.predicate.clone())),
        (Family::Arg1, Box::new(|r| format!("{}/{:?}", r.predicate, r.args.first()))),
    ];
    for (family, class) in classes {
        let mut exact: BTreeMap<String, BigRational> = BTreeMap::new();
        let mut float: BTreeMap<String, f64> = BTreeMap::new();
        for s in stats {
            let p = s.probability(family);
            *exact.entry(class(&s.rule)).or_insert_with(BigRational::zero) += p;
            *float.entry(class(&s.rule)).or_default() += p.to_f64().unwrap();
        }
        for (k, v) in &exact {
            assert!(v.is_one(), "{family} class {k}: {v}");
            assert!((float[k] - 1.0).abs() < 1e-9, "{family} class {k}: {}", float[k]);
        }
    }
}

fn with_theta(pred: &str, arg: &str, theta_bar: u64) -> RuleStats {
    RuleStats {
        invocations: theta_bar,
        lf_count: 1,
        theta_bar: BigRational::from_integer(theta_bar.into()),
        ..RuleStats::bare(SortRule::sor(pred, vec![SortTerm::atom(arg)], SortTerm::atom("prop")))
    }
}

fn decimals(stats: &[RuleStats], f: Family) -> Vec<String> {
    stats.iter().map(|s| format_decimal(s.probability(f), 2)).collect()
}

#[test]
fn probability_examples() {
    let two = compute_probabilities(vec![with_theta("a", "x", 3), with_theta("b", "x", 1)]);
    assert_eq!(decimals(&two, Family::Global), ["0.75", "0.25"]);
    let one = compute_probabilities(vec![with_theta("a", "x", 7)]);
    for f in [Family::Global, Family::Pred, Family::Arg1] {
        assert!(one[0].probability(f).is_one());
    }
    let three = compute_probabilities(vec![with_theta("to", "x", 2), with_theta("to", "y", 2), with_theta("at", "x", 4)]);
    assert_eq!(decimals(&three, Family::Pred), ["0.50", "0.50", "1.00"]);
    assert_eq!(decimals(&three, Family::Global), ["0.25", "0.25", "0.50"]);
    assert!(compute_probabilities(Vec::new()).is_empty());
}

fn toy_results() -> (Toy, Vec<ParseResult>) {
    let toy = Toy::load();
    let results = toy.parse_with_signatures();
    (toy, results)
}

#[test]
fn toy_harvest_probabilities_normalise() {
    let (_, results) = toy_results();
    for mode in [Mode::Lfs, Mode::Plfs] {
        let stats = compute_probabilities(harvest_corpus(&results, mode, &Extractor::default(), 5).unwrap());
        assert!(stats.len() > 40);
        assert_families_sum_to_one(&stats);
        for s in &stats {
            assert!(s.invocations >= s.lf_count && s.lf_count >= 1, "{}", s.rule);
            assert!(!s.rule.is_schematic(), "{}", s.rule);
        }
    }
}

#[test]
fn plf_rules_are_a_subset_of_all_rules() {
    let (_, results) = toy_results();
    let keys = |mode| -> BTreeSet<_> {
        harvest_corpus(&results, mode, &Extractor::default(), 5).unwrap().iter().map(|s| s.rule.key()).collect()
    };
    let (all, plf) = (keys(Mode::Lfs), keys(Mode::Plfs));
    assert!(plf.is_subset(&all));
    assert!(plf.len() < all.len());
}

#[test]
fn harvest_ignores_result_order_and_thread_count() {
    let (_, results) = toy_results();
    let reference = harvest_corpus(&results, Mode::Lfs, &Extractor::default(), 5).unwrap();
    let mut reversed = results.clone();
    reversed.reverse();
    let mut rotated = results.clone();
    rotated.rotate_left(17);
    for (label, input) in [("reversed", &reversed), ("rotated", &rotated)] {
        let got = harvest_corpus(input, Mode::Lfs, &Extractor::default(), 5).unwrap();
        // Samples follow input position, so only counts are order-free.
        let strip = |v: &[RuleStats]| -> Vec<(String, u64, u64)> {
            v.iter().map(|s| (s.rule.to_string(), s.invocations, s.lf_count)).collect()
        };
        assert_eq!(strip(&got), strip(&reference), "{label}");
    }
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let again = single.install(|| harvest_corpus(&results, Mode::Lfs, &Extractor::default(), 5).unwrap());
    assert_eq!(again, reference);
}

#[test]
fn samples_are_the_first_sentences_in_corpus_order() {
    let (_, results) = toy_results();
    let stats = harvest_corpus(&results, Mode::Plfs, &Extractor::default(), 3).unwrap();
    let flight = stats.iter().find(|s| s.rule.to_string() == "sor(flight,([[flight]],[prop]))").unwrap();
    assert_eq!(flight.sample_sentences, [1, 2, 3]);
    assert!(stats.iter().all(|s| s.sample_sentences.len() <= 3 && s.sample_sentences.windows(2).all(|w| w[0] < w[1])));
}

#[test]
fn parses_golden() {
    let (toy, results) = toy_results();
    let text = write_parse_results(&results);
    golden::check("parses.txt", &text);
    let back = read_parse_results(&golden::read("parses.txt"), toy.h()).unwrap();
    assert_eq!(write_parse_results(&back), golden::read("parses.txt"));
}

/// Θ, LF count and first sentence ids per rule, recounted from the
/// serialized parse file with an independent traversal.
fn recount(results: &[ParseResult]) -> BTreeMap<String, (u64, u64, Vec<u64>)> {
    let mut out: BTreeMap<String, (u64, u64, Vec<u64>)> = BTreeMap::new();
    for r in results {
        for a in &r.analyses {
            let mut found = Vec::new();
            enumerate(&a.lf, &ExclusionList::default(), false, &mut found);
            let clauses: Vec<String> =
                found.into_iter().map(|(p, args, res)| SortRule::sor(p, args, res).to_clause()).collect();
            let distinct: BTreeSet<&String> = clauses.iter().collect();
            for c in &clauses {
                out.entry(c.clone()).or_default().0 += 1;
            }
            for c in distinct {
                let e = out.get_mut(c).unwrap();
                e.1 += 1;
                if !e.2.contains(&r.sentence_id) && e.2.len() < 5 {
                    e.2.push(r.sentence_id);
                }
            }
        }
    }
    out
}

fn field<'a>(meta: &'a str, key: &str) -> &'a str {
    meta.split_whitespace().find_map(|f| f.strip_prefix(&format!("{key}="))).unwrap()
}

#[test]
fn ten_sentence_harvest_golden() {
    let toy = Toy::load();
    let results = read_parse_results(&golden::read("parses.txt"), toy.h()).unwrap();
    let first: Vec<ParseResult> = results.into_iter().take(10).collect();
    let stats = compute_probabilities(harvest_corpus(&first, Mode::Lfs, &Extractor::default(), 5).unwrap());
    golden::check("harvest10.sor", &write_harvest(&stats));

    // The frozen file against a recount from the serialized forms.
    let expected = recount(&first);
    let text = golden::read("harvest10.sor");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2 * expected.len());
    let total: f64 = expected.values().map(|(t, l, _)| *t as f64 / *l as f64).sum();
    for pair in lines.chunks(2) {
        let (clause, meta) = (pair[0], pair[1]);
        let (theta, lfs, sents) = &expected[clause];
        assert_eq!(field(meta, "theta"), theta.to_string(), "{clause}");
        assert_eq!(field(meta, "lfs"), lfs.to_string(), "{clause}");
        let ids: Vec<String> = sents.iter().map(|s| s.to_string()).collect();
        assert_eq!(field(meta, "sents"), format!("[{}]", ids.join(",")), "{clause}");
        let p: f64 = field(meta, "p").parse().unwrap();
        assert!((p - *theta as f64 / *lfs as f64 / total).abs() <= 5e-7, "{clause}");
    }
}

#[test]
fn harvest_file_round_trips() {
    let (_, results) = toy_results();
    let stats = compute_probabilities(harvest_corpus(&results, Mode::Lfs, &Extractor::default(), 5).unwrap());
    let text = write_harvest(&stats);
    let back = read_harvest(&text).unwrap();
    assert_eq!(write_harvest(&back), text);
    assert_eq!(back.len(), stats.len());
    for (a, b) in back.iter().zip(&stats) {
        assert_eq!((a.invocations, a.lf_count, &a.theta_bar), (b.invocations, b.lf_count, &b.theta_bar));
        assert_eq!(a.sample_sentences, b.sample_sentences);
    }
    let bare = read_harvest("sor(to, ([[flight],[city]],[prop])).\n").unwrap();
    assert!(!bare[0].has_stats());
}
