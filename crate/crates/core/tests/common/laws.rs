//! Random tree hierarchies, an independent reference implementation of
//! subsumption and unification over them, and the algebraic laws.

use proptest::prelude::*;
use proptest::sample::Index;

use sortacq::sort::{SortHierarchy, SortTerm};

/// Node 0 is `top`; node `i > 0` has parent `parents[i - 1] < i`.
#[derive(Debug, Clone)]
pub struct Tree {
    pub parents: Vec<usize>,
}

impl Tree {
    pub fn len(&self) -> usize {
        self.parents.len() + 1
    }

    pub fn name(i: usize) -> String {
        if i == 0 {
            "top".into()
        } else {
            format!("s{i}")
        }
    }

    pub fn index(name: &str) -> usize {
        if name == "top" {
            0
        } else {
            name[1..].parse().unwrap()
        }
    }

    pub fn hierarchy(&self) -> SortHierarchy {
        let text: String =
            self.parents.iter().enumerate().map(|(i, p)| format!("isa({},{}).\n", Tree::name(i + 1), Tree::name(*p))).collect();
        SortHierarchy::parse(&text).unwrap()
    }

    /// Is `a` on the path from `b` up to the root?
    pub fn above(&self, a: usize, b: usize) -> bool {
        let mut cur = b;
        loop {
            if cur == a {
                return true;
            }
            if cur == 0 {
                return false;
            }
            cur = self.parents[cur - 1];
        }
    }

    pub fn below(&self, a: usize) -> Vec<usize> {
        (0..self.len()).filter(|&n| self.above(a, n)).collect()
    }

    /// Every tree over `k` non-root nodes with parents numbered before children.
    pub fn all(k: usize) -> Vec<Tree> {
        let mut out = vec![Vec::new()];
        for i in 1..=k {
            out = out
                .into_iter()
                .flat_map(|p: Vec<usize>| {
                    (0..i).map(move |q| {
                        let mut p = p.clone();
                        p.push(q);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(|parents| Tree { parents }).collect()
    }
}

pub fn o_subsumes(t: &Tree, g: &SortTerm, s: &SortTerm) -> bool {
    match (g, s) {
        (SortTerm::Var(_), _) => true,
        (SortTerm::Atom(a), SortTerm::Atom(b)) => t.above(Tree::index(a), Tree::index(b)),
        (SortTerm::Func(ga, gr), SortTerm::Func(sa, sr)) => {
            ga.len() == sa.len() && ga.iter().zip(sa).all(|(x, y)| o_subsumes(t, x, y)) && o_subsumes(t, gr, sr)
        }
        _ => false,
    }
}

/// Greatest common lower node, found by scanning every node.
pub fn o_meet(t: &Tree, a: usize, b: usize) -> Option<usize> {
    let common: Vec<usize> = (0..t.len()).filter(|&n| t.above(a, n) && t.above(b, n)).collect();
    common.iter().copied().find(|&m| common.iter().all(|&c| t.above(m, c)))
}

pub fn o_unify(t: &Tree, a: &SortTerm, b: &SortTerm) -> Option<SortTerm> {
    match (a, b) {
        (SortTerm::Var(_), x) | (x, SortTerm::Var(_)) => Some(x.clone()),
        (SortTerm::Atom(x), SortTerm::Atom(y)) => {
            o_meet(t, Tree::index(x), Tree::index(y)).map(|m| SortTerm::atom(Tree::name(m)))
        }
        (SortTerm::Func(xa, xr), SortTerm::Func(ya, yr)) if xa.len() == ya.len() => {
            let args = xa.iter().zip(ya).map(|(x, y)| o_unify(t, x, y)).collect::<Option<Vec<_>>>()?;
            Some(SortTerm::func(args, o_unify(t, xr, yr)?))
        }
        _ => None,
    }
}

fn same(a: &Option<SortTerm>, b: &Option<SortTerm>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x.alpha_eq(y),
        (None, None) => true,
        _ => false,
    }
}

/// A term below `t`, steered by `picks`.
pub fn refine(tree: &Tree, t: &SortTerm, picks: &[Index], at: &mut usize) -> SortTerm {
    let mut pick = |n: usize| {
        let i = picks[*at % picks.len()].index(n);
        *at += 1;
        i
    };
    match t {
        SortTerm::Var(v) => match pick(3) {
            0 => SortTerm::var(v.clone()),
            _ => SortTerm::atom(Tree::name(pick(tree.len()))),
        },
        SortTerm::Atom(a) => {
            let below = tree.below(Tree::index(a));
            SortTerm::atom(Tree::name(below[pick(below.len())]))
        }
        SortTerm::Func(args, r) => {
            let args = args.iter().map(|x| refine(tree, x, picks, at)).collect();
            let r = refine(tree, r, picks, at);
            SortTerm::func(args, r)
        }
    }
}

#[derive(Debug, Clone)]
pub struct Case {
    pub tree: Tree,
    pub terms: [SortTerm; 3],
    pub picks: Vec<Index>,
}

pub fn tree_strategy(max_nodes: usize) -> impl Strategy<Value = Tree> {
    prop::collection::vec(any::<Index>(), 0..max_nodes)
        .prop_map(|ix| Tree { parents: ix.iter().enumerate().map(|(i, x)| x.index(i + 1)).collect() })
}

pub fn term_strategy(nodes: usize) -> impl Strategy<Value = SortTerm> {
    let leaf = prop_oneof![
        1 => prop::sample::select(vec!["X", "Y", "Z"]).prop_map(SortTerm::var),
        4 => (0..nodes).prop_map(|i| SortTerm::atom(Tree::name(i))),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        (prop::collection::vec(inner.clone(), 1..=2), inner).prop_map(|(args, r)| SortTerm::func(args, r))
    })
}

pub fn case_strategy() -> impl Strategy<Value = Case> {
    tree_strategy(8).prop_flat_map(|tree| {
        let n = tree.len();
        (
            Just(tree),
            [term_strategy(n), term_strategy(n), term_strategy(n)],
            prop::collection::vec(any::<Index>(), 1..16),
        )
            .prop_map(|(tree, terms, picks)| Case { tree, terms, picks })
    })
}

/// Checks every law on one case; the error names the first violation.
pub fn check_laws(case: &Case) -> Result<(), String> {
    let t = &case.tree;
    let h = t.hierarchy();
    let [a, b, c] = &case.terms;
    let sub = |g: &SortTerm, s: &SortTerm| h.subsumes(g, s).unwrap();
    let uni = |x: &SortTerm, y: &SortTerm| h.unify(x, y).unwrap();
    let fail = |law: &str| Err(format!("{law}: a={a} b={b} c={c} tree={:?}", t.parents));

    for (x, y) in [(a, b), (b, a), (a, c), (b, c)] {
        if sub(x, y) != o_subsumes(t, x, y) {
            return fail("subsumes disagrees with ancestry oracle");
        }
        if !same(&uni(x, y), &o_unify(t, x, y)) {
            return fail("unify disagrees with meet oracle");
        }
    }
    for x in [a, b, c] {
        if !sub(x, x) {
            return fail("reflexivity");
        }
    }
    if sub(a, b) && sub(b, c) && !sub(a, c) {
        return fail("transitivity");
    }
    if sub(a, b) && sub(b, a) && !a.alpha_eq(b) {
        return fail("antisymmetry up to renaming");
    }
    let ab = uni(a, b);
    if !same(&ab, &uni(b, a)) {
        return fail("unify commutes");
    }
    if let Some(m) = &ab {
        if !sub(a, m) || !sub(b, m) {
            return fail("unifier is below both inputs");
        }
        let below = refine(t, m, &case.picks, &mut 0);
        if !sub(m, &below) {
            return fail("refinement stays below");
        }
        for lower in [&below, c] {
            if sub(a, lower) && sub(b, lower) && !sub(m, lower) {
                return fail("glb: common lower bounds are below the unifier");
            }
        }
    } else if sub(a, c) && sub(b, c) {
        return fail("glb: a common lower bound exists but unify failed");
    }
    if let (Some(x), Some(y)) = (a.as_atom(), b.as_atom()) {
        let comparable = sub(a, b) || sub(b, a);
        if comparable != ab.is_some() {
            return fail(&format!("atom comparability vs unifiability for {x},{y}"));
        }
    }
    Ok(())
}

impl Tree {
    /// The same tree with nodes renumbered parents-first, plus the renaming
    /// from the original names to `Tree::name`s.
    pub fn from_hierarchy(h: &SortHierarchy) -> (Tree, std::collections::BTreeMap<String, String>) {
        let mut order = vec!["top".to_string()];
        let mut parents = Vec::new();
        let mut i = 0;
        while i < order.len() {
            for c in h.children(&order[i]).unwrap() {
                parents.push(i);
                order.push(c.to_string());
            }
            i += 1;
        }
        let names = order.iter().enumerate().map(|(i, n)| (n.clone(), Tree::name(i))).collect();
        (Tree { parents }, names)
    }
}

pub fn rename_term(t: &SortTerm, names: &std::collections::BTreeMap<String, String>) -> SortTerm {
    match t {
        SortTerm::Var(v) => SortTerm::var(v.clone()),
        SortTerm::Atom(a) => SortTerm::atom(names[a].clone()),
        SortTerm::Func(args, r) => {
            SortTerm::func(args.iter().map(|a| rename_term(a, names)).collect(), rename_term(r, names))
        }
    }
}
