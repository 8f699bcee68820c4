//! Core syntactic data model: root terms with flat feature bundles, directed
//! leaves, and the `STree`/`ArgSTree` pair of lexicalized category types.
//!
//! An `STree` is a root category plus an ordered list of expected complements
//! (the leaves). Leaf order is significant: the first leaf combines first,
//! i.e. it is closest to the head. An `ArgSTree` additionally carries a slash
//! multiset of trace categories that its derivation must realize internally.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A logic variable. Identity (equality, ordering, hashing) is the numeric id
/// alone; the optional name is kept for readable output.
#[derive(Debug, Clone)]
pub struct Variable {
    id: u64,
    name: Option<String>,
}

impl Variable {
    pub fn new(id: u64) -> Self {
        Variable { id, name: None }
    }

    pub fn named(id: u64, name: impl Into<String>) -> Self {
        Variable {
            id,
            name: Some(name.into()),
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }
}

impl PartialEq for Variable {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Variable {}

impl PartialOrd for Variable {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Variable {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}

impl std::hash::Hash for Variable {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

/// Generator of fresh variables. Each lexicon keeps its own shared counter so
/// that independent retrievals never collide; tests and the text parsers use
/// a local one.
#[derive(Debug, Default)]
pub struct VarGen {
    next: u64,
}

impl VarGen {
    pub fn new() -> Self {
        VarGen::default()
    }

    pub fn starting_at(next: u64) -> Self {
        VarGen { next }
    }

    pub fn fresh(&mut self) -> Variable {
        let id = self.next;
        self.next += 1;
        Variable::new(id)
    }

    pub fn fresh_named(&mut self, name: impl Into<String>) -> Variable {
        let id = self.next;
        self.next += 1;
        Variable::named(id, name)
    }
}

/// A feature value is either an atom or a variable; nested feature structures
/// are deliberately not part of the model.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureValue {
    Atom(String),
    Var(Variable),
}

impl FeatureValue {
    pub fn atom(s: impl Into<String>) -> Self {
        FeatureValue::Atom(s.into())
    }
}

/// An atomic category symbol with a flat attribute-value bundle.
///
/// Attribute names are unique by construction (map keys). Missing attributes
/// are unconstrained: unification treats the bundle as an open record.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RootTerm {
    pub symbol: String,
    pub features: BTreeMap<String, FeatureValue>,
}

impl RootTerm {
    pub fn atom(symbol: impl Into<String>) -> Self {
        RootTerm {
            symbol: symbol.into(),
            features: BTreeMap::new(),
        }
    }

    pub fn with_feature(mut self, attr: impl Into<String>, value: FeatureValue) -> Self {
        self.features.insert(attr.into(), value);
        self
    }

    pub fn is_ground(&self) -> bool {
        self.features
            .values()
            .all(|v| matches!(v, FeatureValue::Atom(_)))
    }
}

/// Direction of a leaf with respect to the head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Left,
    Right,
}

/// One expected complement, annotated with its direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leaf {
    pub dir: Direction,
    pub cat: ArgSTree,
}

impl Leaf {
    pub fn new(dir: Direction, cat: ArgSTree) -> Self {
        Leaf { dir, cat }
    }

    pub fn left(cat: ArgSTree) -> Self {
        Leaf::new(Direction::Left, cat)
    }

    pub fn right(cat: ArgSTree) -> Self {
        Leaf::new(Direction::Right, cat)
    }
}

/// A root plus ordered, direction-annotated leaves. An empty leaves list is a
/// maximal projection. Slash elements and goal categories are `STree`s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct STree {
    pub root: RootTerm,
    pub leaves: Vec<Leaf>,
}

impl STree {
    pub fn new(root: RootTerm, leaves: Vec<Leaf>) -> Self {
        STree { root, leaves }
    }

    pub fn atom(symbol: impl Into<String>) -> Self {
        STree::new(RootTerm::atom(symbol), Vec::new())
    }

    /// Widens into an `ArgSTree` with an empty slash.
    pub fn into_arg(self) -> ArgSTree {
        ArgSTree {
            root: self.root,
            leaves: self.leaves,
            slash: Vec::new(),
        }
    }
}

/// An expected complement: an `STree` plus the slash multiset of traces its
/// derivation must contain. Slash elements carry no direction and their list
/// order is immaterial; equality is up to slash permutation.
#[derive(Debug, Clone)]
pub struct ArgSTree {
    pub root: RootTerm,
    pub leaves: Vec<Leaf>,
    pub slash: Vec<STree>,
}

impl ArgSTree {
    pub fn new(root: RootTerm, leaves: Vec<Leaf>, slash: Vec<STree>) -> Self {
        ArgSTree {
            root,
            leaves,
            slash,
        }
    }

    pub fn atom(symbol: impl Into<String>) -> Self {
        STree::atom(symbol).into_arg()
    }

    /// The `STree` part, dropping the slash.
    pub fn core(&self) -> STree {
        STree {
            root: self.root.clone(),
            leaves: self.leaves.clone(),
        }
    }

    pub fn is_maximal_projection(&self) -> bool {
        self.leaves.is_empty() && self.slash.is_empty()
    }
}

impl From<STree> for ArgSTree {
    fn from(t: STree) -> Self {
        t.into_arg()
    }
}

impl PartialEq for ArgSTree {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
            && self.leaves == other.leaves
            && multiset_eq(&self.slash, &other.slash)
    }
}

impl Eq for ArgSTree {}

/// Multiset equality by pairwise matching; slash values are small so the
/// quadratic scan is fine.
pub fn multiset_eq<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    'outer: for x in a {
        for (i, y) in b.iter().enumerate() {
            if !used[i] && x == y {
                used[i] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

// ---------------------------------------------------------------------------
// Display
//
// Trees print in the grammar file's own term syntax: bare atoms for maximal
// projections, `tree(root, [dir: cat, ...])` for subcategorizing entries, and
// `slashed(core, [elem, ...])` when the slash is non-empty.

/// Assigns stable display names to variables in first-occurrence order, so
/// that printing does not depend on the numeric ids handed out by renaming.
#[derive(Debug, Default)]
pub struct VarNamer {
    assigned: BTreeMap<u64, String>,
    taken: BTreeSet<String>,
}

impl VarNamer {
    pub fn name_of(&mut self, v: &Variable) -> String {
        if let Some(n) = self.assigned.get(&v.id) {
            return n.clone();
        }
        let base = match v.name() {
            Some(n) => n.to_string(),
            None => "V".to_string(),
        };
        let mut candidate = if v.name().is_some() && !self.taken.contains(&base) {
            base.clone()
        } else {
            String::new()
        };
        if candidate.is_empty() {
            let mut k = if v.name().is_some() { 2 } else { 1 };
            loop {
                let c = format!("{base}{k}");
                if !self.taken.contains(&c) {
                    candidate = c;
                    break;
                }
                k += 1;
            }
        }
        self.taken.insert(candidate.clone());
        self.assigned.insert(v.id, candidate.clone());
        candidate
    }
}

impl RootTerm {
    pub(crate) fn fmt_with(&self, f: &mut fmt::Formatter<'_>, names: &mut VarNamer) -> fmt::Result {
        write!(f, "{}", self.symbol)?;
        if !self.features.is_empty() {
            write!(f, "{{")?;
            for (i, (attr, value)) in self.features.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                match value {
                    FeatureValue::Atom(a) => write!(f, "{attr}={a}")?,
                    FeatureValue::Var(v) => write!(f, "{attr}={}", names.name_of(v))?,
                }
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

fn fmt_leaves(leaves: &[Leaf], f: &mut fmt::Formatter<'_>, names: &mut VarNamer) -> fmt::Result {
    write!(f, "[")?;
    for (i, leaf) in leaves.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        match leaf.dir {
            Direction::Left => write!(f, "left: ")?,
            Direction::Right => write!(f, "right: ")?,
        }
        leaf.cat.fmt_with(f, names)?;
    }
    write!(f, "]")
}

impl STree {
    pub(crate) fn fmt_with(&self, f: &mut fmt::Formatter<'_>, names: &mut VarNamer) -> fmt::Result {
        if self.leaves.is_empty() {
            self.root.fmt_with(f, names)
        } else {
            write!(f, "tree(")?;
            self.root.fmt_with(f, names)?;
            write!(f, ", ")?;
            fmt_leaves(&self.leaves, f, names)?;
            write!(f, ")")
        }
    }
}

impl ArgSTree {
    pub(crate) fn fmt_with(&self, f: &mut fmt::Formatter<'_>, names: &mut VarNamer) -> fmt::Result {
        if self.slash.is_empty() {
            return self.core_fmt(f, names);
        }
        write!(f, "slashed(")?;
        self.core_fmt(f, names)?;
        write!(f, ", [")?;
        for (i, elem) in self.slash.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            elem.fmt_with(f, names)?;
        }
        write!(f, "])")
    }

    fn core_fmt(&self, f: &mut fmt::Formatter<'_>, names: &mut VarNamer) -> fmt::Result {
        if self.leaves.is_empty() {
            self.root.fmt_with(f, names)
        } else {
            write!(f, "tree(")?;
            self.root.fmt_with(f, names)?;
            write!(f, ", ")?;
            fmt_leaves(&self.leaves, f, names)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for RootTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, &mut VarNamer::default())
    }
}

impl fmt::Display for STree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, &mut VarNamer::default())
    }
}

impl fmt::Display for ArgSTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, &mut VarNamer::default())
    }
}

// ---------------------------------------------------------------------------
// Lexical tree validation

/// One violation found by [`validate_lexical_tree`], located by a path such
/// as `leaves[1].cat.slash[0]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Checks that a tree description is a well-formed lexical tree: every root
/// symbol (including those inside leaves and slash elements) is a declared
/// atom. The flat leaves-list representation makes the structural clauses of
/// lexical-tree well-formedness (single head leaf, binary branching along the
/// root-head path) hold by construction, so only the recursive symbol
/// discipline can fail. Violations are reported, not thrown; an empty report
/// means the tree is well-formed.
pub fn validate_lexical_tree(t: &ArgSTree, atoms: &BTreeSet<String>) -> Vec<Violation> {
    let mut out = Vec::new();
    validate_arg(t, atoms, String::new(), &mut out);
    out
}

fn validate_root(root: &RootTerm, atoms: &BTreeSet<String>, path: &str, out: &mut Vec<Violation>) {
    if !atoms.contains(&root.symbol) {
        out.push(Violation {
            path: path.to_string(),
            message: format!("undeclared atom symbol `{}`", root.symbol),
        });
    }
}

fn validate_arg(t: &ArgSTree, atoms: &BTreeSet<String>, path: String, out: &mut Vec<Violation>) {
    validate_root(&t.root, atoms, &join(&path, "root"), out);
    for (i, leaf) in t.leaves.iter().enumerate() {
        validate_arg(&leaf.cat, atoms, join(&path, &format!("leaves[{i}].cat")), out);
    }
    for (i, elem) in t.slash.iter().enumerate() {
        validate_stree(elem, atoms, join(&path, &format!("slash[{i}]")), out);
    }
}

fn validate_stree(t: &STree, atoms: &BTreeSet<String>, path: String, out: &mut Vec<Violation>) {
    validate_root(&t.root, atoms, &join(&path, "root"), out);
    for (i, leaf) in t.leaves.iter().enumerate() {
        validate_arg(&leaf.cat, atoms, join(&path, &format!("leaves[{i}].cat")), out);
    }
}

fn join(path: &str, seg: &str) -> String {
    if path.is_empty() {
        seg.to_string()
    } else {
        format!("{path}.{seg}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_atoms() -> BTreeSet<String> {
        ["s", "np", "n"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn display_maximal_projection() {
        assert_eq!(ArgSTree::atom("np").to_string(), "np");
    }

    #[test]
    fn display_transitive_entry() {
        let loves = ArgSTree::new(
            RootTerm::atom("s"),
            vec![
                Leaf::right(ArgSTree::atom("np")),
                Leaf::left(ArgSTree::atom("np")),
            ],
            vec![],
        );
        assert_eq!(loves.to_string(), "tree(s, [right: np, left: np])");
    }

    #[test]
    fn display_slashed_complement() {
        let comp = ArgSTree::new(RootTerm::atom("s"), vec![], vec![STree::atom("np")]);
        assert_eq!(comp.to_string(), "slashed(s, [np])");
    }

    #[test]
    fn display_features_and_vars() {
        let root = RootTerm::atom("np")
            .with_feature("case", FeatureValue::Var(Variable::named(7, "C")))
            .with_feature("num", FeatureValue::atom("sg"));
        assert_eq!(root.to_string(), "np{case=C,num=sg}");
    }

    #[test]
    fn equality_up_to_slash_permutation() {
        let a = ArgSTree::new(
            RootTerm::atom("s"),
            vec![],
            vec![STree::atom("np"), STree::atom("n")],
        );
        let b = ArgSTree::new(
            RootTerm::atom("s"),
            vec![],
            vec![STree::atom("n"), STree::atom("np")],
        );
        assert_eq!(a, b);
        let c = ArgSTree::new(RootTerm::atom("s"), vec![], vec![STree::atom("np")]);
        assert_ne!(a, c);
    }

    #[test]
    fn validate_accepts_atomic_projection() {
        assert!(validate_lexical_tree(&ArgSTree::atom("np"), &demo_atoms()).is_empty());
    }

    #[test]
    fn validate_accepts_ditransitive_shape() {
        let t = ArgSTree::new(
            RootTerm::atom("s"),
            vec![
                Leaf::right(ArgSTree::atom("np")),
                Leaf::right(ArgSTree::atom("np")),
                Leaf::left(ArgSTree::atom("np")),
            ],
            vec![],
        );
        assert!(validate_lexical_tree(&t, &demo_atoms()).is_empty());
    }

    #[test]
    fn validate_rejects_undeclared_symbol_in_slash() {
        let t = ArgSTree::new(RootTerm::atom("s"), vec![], vec![STree::atom("vp")]);
        let report = validate_lexical_tree(&t, &demo_atoms());
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].path, "slash[0].root");
        assert!(report[0].message.contains("vp"));
    }

    #[test]
    fn var_namer_disambiguates_clashing_names() {
        let mut names = VarNamer::default();
        let a = Variable::named(1, "C");
        let b = Variable::named(2, "C");
        let c = Variable::new(3);
        assert_eq!(names.name_of(&a), "C");
        assert_eq!(names.name_of(&b), "C2");
        assert_eq!(names.name_of(&c), "V1");
        assert_eq!(names.name_of(&a), "C");
    }
}
