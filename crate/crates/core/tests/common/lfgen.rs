//! Random well-scoped, fully annotated logical forms.

use proptest::prelude::*;
use proptest::sample::Index;
use sortacq::lf::{Binder, Lf};
use sortacq::sort::SortTerm;

pub const SORTS: [&str; 8] = ["flight", "city", "location", "prop", "day_part", "aspect", "top", "non_symmetric_determiner"];

pub fn sort_strategy() -> impl Strategy<Value = SortTerm> {
    let leaf = prop_oneof![
        1 => prop::sample::select(vec!["X", "Y"]).prop_map(SortTerm::var),
        5 => prop::sample::select(SORTS.to_vec()).prop_map(SortTerm::atom),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        (prop::collection::vec(inner.clone(), 1..=2), inner).prop_map(|(a, r)| SortTerm::func(a, r))
    })
}

/// Shape of a logical form; variable references are resolved against the
/// binders in scope when the shape is built.
#[derive(Debug, Clone)]
enum Shape {
    Const(&'static str, SortTerm),
    Ref(Index, SortTerm),
    Pred(&'static str, Vec<Shape>, SortTerm),
    Qterm(SortTerm, SortTerm, Box<Shape>, SortTerm),
    Exists(SortTerm, Box<Shape>, SortTerm),
    Lambda(SortTerm, Box<Shape>, SortTerm),
}

fn shape_strategy() -> impl Strategy<Value = Shape> {
    let consts = vec!["DENVER", "LA_GUARDIA", "in_progress", "pos", "3", "friday", "it's"];
    let leaf = prop_oneof![
        (prop::sample::select(consts), sort_strategy()).prop_map(|(c, s)| Shape::Const(c, s)),
        (any::<Index>(), sort_strategy()).prop_map(|(i, s)| Shape::Ref(i, s)),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        let preds = vec!["flight", "to", "and", "n_n_rel", "has_aspect", "frag_np"];
        prop_oneof![
            (prop::sample::select(preds), prop::collection::vec(inner.clone(), 0..3), sort_strategy())
                .prop_map(|(p, a, s)| Shape::Pred(p, a, s)),
            (sort_strategy(), sort_strategy(), inner.clone(), sort_strategy())
                .prop_map(|(d, v, r, s)| Shape::Qterm(d, v, Box::new(r), s)),
            (sort_strategy(), inner.clone(), sort_strategy()).prop_map(|(v, b, s)| Shape::Exists(v, Box::new(b), s)),
            (sort_strategy(), inner, sort_strategy()).prop_map(|(v, b, s)| Shape::Lambda(v, Box::new(b), s)),
        ]
    })
}

fn build(shape: &Shape, scope: &mut Vec<String>) -> Lf {
    let bind = |scope: &mut Vec<String>| {
        let name = format!("V{}", scope.len());
        scope.push(name.clone());
        name
    };
    match shape {
        Shape::Const(c, s) => Lf::constant(*c, s.clone()),
        Shape::Ref(i, s) if !scope.is_empty() => Lf::var(scope[i.index(scope.len())].clone(), s.clone()),
        Shape::Ref(_, s) => Lf::constant("pos", s.clone()),
        Shape::Pred(p, args, s) => Lf::pred(*p, args.iter().map(|a| build(a, scope)).collect(), s.clone()),
        Shape::Qterm(d, v, r, s) => {
            let det = Lf::constant("the", d.clone());
            let name = bind(scope);
            let r = build(r, scope);
            scope.pop();
            Lf::qterm(det, Binder::new(name, v.clone()), r, s.clone())
        }
        Shape::Exists(v, b, s) | Shape::Lambda(v, b, s) => {
            let name = bind(scope);
            let body = build(b, scope);
            scope.pop();
            let binder = Binder::new(name, v.clone());
            if matches!(shape, Shape::Exists(..)) {
                Lf::exists(binder, body, s.clone())
            } else {
                Lf::lambda(binder, body, s.clone())
            }
        }
    }
}

pub fn lf_strategy() -> impl Strategy<Value = Lf> {
    shape_strategy().prop_map(|s| build(&s, &mut Vec::new()))
}

