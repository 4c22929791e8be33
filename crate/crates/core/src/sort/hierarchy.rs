use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::syntax::{self, quote_name, Term};

use super::SortError;

/// Name of the implicit root sort.
pub const TOP: &str = "top";

/// Sort hierarchy: a single tree rooted at [`TOP`].
///
/// Node 0 is always `top`. Nodes are stored in insertion order; equality is
/// by the set of `(child, parent)` edges, not by insertion order.
#[derive(Debug, Clone)]
pub struct SortHierarchy {
    names: Vec<String>,
    index: HashMap<String, usize>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    children: Vec<Vec<usize>>,
}

impl Default for SortHierarchy {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialEq for SortHierarchy {
    fn eq(&self, other: &Self) -> bool {
        self.edges() == other.edges()
    }
}

impl Eq for SortHierarchy {}

impl SortHierarchy {
    /// A hierarchy holding only `top`.
    pub fn new() -> Self {
        let mut index = HashMap::new();
        index.insert(TOP.to_string(), 0);
        SortHierarchy {
            names: vec![TOP.to_string()],
            index,
            parent: vec![None],
            depth: vec![0],
            children: vec![Vec::new()],
        }
    }

    /// Adds `child` under an existing `parent`.
    pub fn add(&mut self, child: &str, parent: &str) -> Result<(), SortError> {
        let p = self.id(parent)?;
        if let Some(&c) = self.index.get(child) {
            let existing = self.parent[c].map_or_else(|| "<root>".to_string(), |e| self.names[e].clone());
            if existing == parent {
                return Ok(());
            }
            return Err(SortError::Reparent { child: child.to_string(), existing, requested: parent.to_string() });
        }
        let id = self.names.len();
        self.names.push(child.to_string());
        self.index.insert(child.to_string(), id);
        self.parent.push(Some(p));
        self.depth.push(self.depth[p] + 1);
        self.children.push(Vec::new());
        self.children[p].push(id);
        Ok(())
    }

    /// Builds a hierarchy from `(child, parent)` pairs. Parents may be
    /// declared after their children.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self, SortError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut parent_of: BTreeMap<&str, &str> = BTreeMap::new();
        let mut order: Vec<&str> = Vec::new();
        for (child, parent) in pairs {
            if child == TOP {
                return Err(SortError::Reparent {
                    child: TOP.into(),
                    existing: "<root>".into(),
                    requested: parent.into(),
                });
            }
            match parent_of.get(child) {
                Some(&old) if old != parent => {
                    return Err(SortError::Reparent {
                        child: child.into(),
                        existing: old.into(),
                        requested: parent.into(),
                    })
                }
                Some(_) => {}
                None => {
                    parent_of.insert(child, parent);
                    order.push(child);
                }
            }
        }
        for &child in &order {
            let parent = parent_of[child];
            if parent != TOP && !parent_of.contains_key(parent) {
                return Err(SortError::UnknownParent { child: child.into(), parent: parent.into() });
            }
        }
        // Every chain must reach top; anything else sits on a cycle.
        for &child in &order {
            let mut cur = child;
            let mut steps = 0;
            while cur != TOP {
                cur = parent_of[cur];
                steps += 1;
                if steps > order.len() {
                    return Err(SortError::Cycle(child.into()));
                }
            }
        }
        let mut kids: HashMap<&str, Vec<&str>> = HashMap::new();
        for &child in &order {
            kids.entry(parent_of[child]).or_default().push(child);
        }
        let mut h = SortHierarchy::new();
        let mut queue = VecDeque::from([TOP]);
        while let Some(node) = queue.pop_front() {
            for &k in kids.get(node).map(Vec::as_slice).unwrap_or(&[]) {
                h.add(k, node)?;
                queue.push_back(k);
            }
        }
        Ok(h)
    }

    /// Parses a hierarchy file of `isa(child, parent).` clauses.
    pub fn parse(text: &str) -> Result<Self, SortError> {
        let clauses = syntax::read_clauses(text)?;
        let mut pairs = Vec::with_capacity(clauses.len());
        for c in &clauses {
            match &c.term {
                Term::Compound(f, args) if f == "isa" && args.len() == 2 => match (&args[0], &args[1]) {
                    (Term::Name(a), Term::Name(b)) => pairs.push((a.as_str(), b.as_str())),
                    _ => {
                        return Err(SortError::Malformed {
                            line: c.pos.line,
                            message: "isa/2 takes two sort names".into(),
                        })
                    }
                },
                other => {
                    return Err(SortError::Malformed {
                        line: c.pos.line,
                        message: format!("expected isa(child, parent), found {other}"),
                    })
                }
            }
        }
        Self::from_pairs(pairs)
    }

    /// Canonical text: one `isa/2` clause per non-root node, parents first.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(n) = queue.pop_front() {
            for &k in &self.children[n] {
                let _ = writeln!(out, "isa({},{}).", quote_name(&self.names[k]), quote_name(&self.names[n]));
                queue.push_back(k);
            }
        }
        out
    }

    fn edges(&self) -> BTreeMap<&str, &str> {
        (1..self.names.len())
            .map(|i| (self.names[i].as_str(), self.names[self.parent[i].expect("non-root")].as_str()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn id(&self, name: &str) -> Result<usize, SortError> {
        self.index.get(name).copied().ok_or_else(|| SortError::UnknownSort(name.to_string()))
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    /// All sort names in insertion order, `top` first.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn parent(&self, name: &str) -> Result<Option<&str>, SortError> {
        let id = self.id(name)?;
        Ok(self.parent[id].map(|p| self.names[p].as_str()))
    }

    pub fn children(&self, name: &str) -> Result<Vec<&str>, SortError> {
        let id = self.id(name)?;
        Ok(self.children[id].iter().map(|&c| self.names[c].as_str()).collect())
    }

    pub fn depth(&self, name: &str) -> Result<usize, SortError> {
        Ok(self.depth[self.id(name)?])
    }

    /// `ancestor` is `descendant` or one of its ancestors.
    pub fn is_ancestor_or_self(&self, ancestor: &str, descendant: &str) -> Result<bool, SortError> {
        let a = self.id(ancestor)?;
        let d = self.id(descendant)?;
        Ok(self.ancestor_ids(a, d))
    }

    fn ancestor_ids(&self, a: usize, mut d: usize) -> bool {
        while self.depth[d] > self.depth[a] {
            d = self.parent[d].expect("non-root has a parent");
        }
        d == a
    }

    /// Greatest lower bound of two atomic sorts: the deeper one when they are
    /// comparable, `None` otherwise.
    pub fn meet(&self, a: &str, b: &str) -> Result<Option<&str>, SortError> {
        let ia = self.id(a)?;
        let ib = self.id(b)?;
        let (hi, lo) = if self.depth[ia] <= self.depth[ib] { (ia, ib) } else { (ib, ia) };
        Ok(self.ancestor_ids(hi, lo).then(|| self.names[lo].as_str()))
    }
}
