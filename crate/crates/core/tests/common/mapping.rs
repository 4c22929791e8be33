//! Brute-force reference for rule categorisation.

use sortacq::sort::{MappingCategory, SortRule, SortTerm};

use super::laws::{o_meet, o_subsumes, Tree};

fn position_equal(a: &SortTerm, b: &SortTerm) -> bool {
    match (a, b) {
        (SortTerm::Var(_), SortTerm::Var(_)) => true,
        (SortTerm::Atom(x), SortTerm::Atom(y)) => x == y,
        (SortTerm::Func(xa, xr), SortTerm::Func(ya, yr)) => {
            xa.len() == ya.len() && xa.iter().zip(ya).all(|(x, y)| position_equal(x, y)) && position_equal(xr, yr)
        }
        _ => false,
    }
}

fn position_unifies(t: &Tree, a: &SortTerm, b: &SortTerm) -> bool {
    match (a, b) {
        (SortTerm::Var(_), _) | (_, SortTerm::Var(_)) => true,
        (SortTerm::Atom(x), SortTerm::Atom(y)) => o_meet(t, Tree::index(x), Tree::index(y)).is_some(),
        (SortTerm::Func(xa, xr), SortTerm::Func(ya, yr)) => {
            xa.len() == ya.len() && xa.iter().zip(ya).all(|(x, y)| position_unifies(t, x, y)) && position_unifies(t, xr, yr)
        }
        _ => false,
    }
}

fn positions(r: &SortRule) -> Vec<&SortTerm> {
    r.args.iter().chain(std::iter::once(&r.result)).collect()
}

/// The four relations of `corpus` to one reference rule.
#[derive(Debug, Default, Clone, Copy)]
pub struct Relations {
    pub equal: bool,
    pub subsumed_by: bool,
    pub subsumes: bool,
    pub unifies: bool,
}

pub fn relations(t: &Tree, corpus: &SortRule, reference: &SortRule) -> Relations {
    if corpus.predicate != reference.predicate || corpus.args.len() != reference.args.len() {
        return Relations::default();
    }
    let (c, r) = (positions(corpus), positions(reference));
    let all = |f: &dyn Fn(&SortTerm, &SortTerm) -> bool| c.iter().zip(&r).all(|(x, y)| f(x, y));
    Relations {
        equal: all(&|x, y| position_equal(x, y)),
        subsumed_by: all(&|x, y| o_subsumes(t, y, x)),
        subsumes: all(&|x, y| o_subsumes(t, x, y)),
        unifies: all(&|x, y| position_unifies(t, x, y)),
    }
}

pub fn oracle_category(t: &Tree, corpus: &SortRule, refs: &[SortRule]) -> MappingCategory {
    let rel: Vec<Relations> = refs.iter().map(|r| relations(t, corpus, r)).collect();
    if rel.iter().any(|r| r.equal) {
        MappingCategory::Exact
    } else if rel.iter().any(|r| r.subsumed_by) {
        MappingCategory::SubsumedBy
    } else if rel.iter().any(|r| r.subsumes) {
        MappingCategory::Subsumes
    } else if rel.iter().any(|r| r.unifies && !r.subsumed_by && !r.subsumes) {
        MappingCategory::Incomparable
    } else {
        MappingCategory::Incompatible
    }
}

/// Every rule for `p` of arity ≤ 2 whose positions are a variable or a node of `t`.
pub fn all_rules(t: &Tree, p: &str) -> Vec<SortRule> {
    let choices: Vec<SortTerm> =
        std::iter::once(SortTerm::var("X")).chain((0..t.len()).map(|i| SortTerm::atom(Tree::name(i)))).collect();
    let mut out = Vec::new();
    for arity in 0..=2usize {
        let mut tuples: Vec<Vec<SortTerm>> = vec![Vec::new()];
        for _ in 0..=arity {
            tuples = tuples
                .into_iter()
                .flat_map(|tu| {
                    choices.iter().map(move |c| {
                        let mut tu = tu.clone();
                        tu.push(c.clone());
                        tu
                    })
                })
                .collect();
        }
        for mut tu in tuples {
            let result = tu.pop().unwrap();
            out.push(SortRule::sor(p, tu, result));
        }
    }
    out
}

/// Compares `compare_rule` with the oracle on every ordered pair of rules
/// over every tree with at most `max_sorts` sorts (root included).
/// Returns (pairs checked, mismatches).
pub fn exhaustive_pairs(max_sorts: usize) -> (usize, Vec<String>) {
    let mut checked = 0;
    let mut bad = Vec::new();
    for k in 0..max_sorts {
        for t in Tree::all(k) {
            let h = t.hierarchy();
            let rules = all_rules(&t, "p");
            for c in &rules {
                for r in &rules {
                    let refs = std::slice::from_ref(r);
                    let got = sortacq::sort::compare_rule(c, refs, &h);
                    let want = oracle_category(&t, c, refs);
                    checked += 1;
                    if got != want && bad.len() < 10 {
                        bad.push(format!("{c} vs {r} on {:?}: {got} != {want}", t.parents));
                    }
                }
            }
        }
    }
    (checked, bad)
}
