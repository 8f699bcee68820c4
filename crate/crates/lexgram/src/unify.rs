//! First-order unification over root terms and whole tree descriptions.
//!
//! Feature bundles unify as open records: an attribute present on only one
//! side is not a clash, only conflicting atomic values (or symbols) are.
//! Slash multisets unify under some bijection, backtracking over pairings.
//! Failure is a normal return, never an error.

use std::collections::BTreeMap;

use crate::term::{ArgSTree, FeatureValue, Leaf, RootTerm, STree, VarGen, Variable};

/// A persistent binding of variables to feature values. Extension returns a
/// new substitution; lookups resolve variable chains, so an applied term
/// never changes under a second application.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<Variable, FeatureValue>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, v: &Variable) -> Option<&FeatureValue> {
        self.map.get(v)
    }

    /// Follows variable bindings to the end of the chain.
    pub fn resolve(&self, value: &FeatureValue) -> FeatureValue {
        let mut cur = value;
        while let FeatureValue::Var(v) = cur {
            match self.map.get(v) {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur.clone()
    }

    fn bind(&mut self, v: Variable, value: FeatureValue) {
        debug_assert!(!self.map.contains_key(&v));
        self.map.insert(v, value);
    }

    pub fn apply_feature(&self, value: &FeatureValue) -> FeatureValue {
        self.resolve(value)
    }

    pub fn apply_root(&self, t: &RootTerm) -> RootTerm {
        RootTerm {
            symbol: t.symbol.clone(),
            features: t
                .features
                .iter()
                .map(|(k, v)| (k.clone(), self.resolve(v)))
                .collect(),
        }
    }

    pub fn apply_stree(&self, t: &STree) -> STree {
        STree {
            root: self.apply_root(&t.root),
            leaves: t.leaves.iter().map(|l| self.apply_leaf(l)).collect(),
        }
    }

    pub fn apply(&self, t: &ArgSTree) -> ArgSTree {
        ArgSTree {
            root: self.apply_root(&t.root),
            leaves: t.leaves.iter().map(|l| self.apply_leaf(l)).collect(),
            slash: t.slash.iter().map(|e| self.apply_stree(e)).collect(),
        }
    }

    fn apply_leaf(&self, l: &Leaf) -> Leaf {
        Leaf {
            dir: l.dir,
            cat: self.apply(&l.cat),
        }
    }
}

/// Unifies two feature values in place. Variable-variable pairs bind left to
/// right; the chain walk keeps the result acyclic and idempotent.
fn unify_feature_mut(a: &FeatureValue, b: &FeatureValue, s: &mut Substitution) -> bool {
    let ra = s.resolve(a);
    let rb = s.resolve(b);
    match (ra, rb) {
        (FeatureValue::Atom(x), FeatureValue::Atom(y)) => x == y,
        (FeatureValue::Var(v), FeatureValue::Var(w)) => {
            if v != w {
                s.bind(v, FeatureValue::Var(w));
            }
            true
        }
        (FeatureValue::Var(v), t) | (t, FeatureValue::Var(v)) => {
            s.bind(v, t);
            true
        }
    }
}

fn unify_root_mut(a: &RootTerm, b: &RootTerm, s: &mut Substitution) -> bool {
    if a.symbol != b.symbol {
        return false;
    }
    for (attr, va) in &a.features {
        if let Some(vb) = b.features.get(attr) {
            if !unify_feature_mut(va, vb, s) {
                return false;
            }
        }
        // attribute missing on one side: open record, no clash
    }
    true
}

fn unify_spine_mut(a: &STree, b: &STree, s: &mut Substitution) -> bool {
    if !unify_root_mut(&a.root, &b.root, s) {
        return false;
    }
    if a.leaves.len() != b.leaves.len() {
        return false;
    }
    for (la, lb) in a.leaves.iter().zip(&b.leaves) {
        if la.dir != lb.dir || !unify_arg_mut(&la.cat, &lb.cat, s) {
            return false;
        }
    }
    true
}

fn unify_arg_mut(a: &ArgSTree, b: &ArgSTree, s: &mut Substitution) -> bool {
    if !unify_root_mut(&a.root, &b.root, s) {
        return false;
    }
    if a.leaves.len() != b.leaves.len() || a.slash.len() != b.slash.len() {
        return false;
    }
    for (la, lb) in a.leaves.iter().zip(&b.leaves) {
        if la.dir != lb.dir || !unify_arg_mut(&la.cat, &lb.cat, s) {
            return false;
        }
    }
    if a.slash.is_empty() {
        return true;
    }
    let mut used = vec![false; b.slash.len()];
    match match_slash(&a.slash, &b.slash, &mut used, s) {
        Some(s2) => {
            *s = s2;
            true
        }
        None => false,
    }
}

/// Backtracking search for a unifying bijection between two slash multisets;
/// first success in left-to-right candidate order wins. Slash sizes stay tiny
/// in practice, so the factorial worst case is acceptable.
fn match_slash(
    rest: &[STree],
    b: &[STree],
    used: &mut [bool],
    s: &Substitution,
) -> Option<Substitution> {
    let Some((first, tail)) = rest.split_first() else {
        return Some(s.clone());
    };
    for (j, candidate) in b.iter().enumerate() {
        if used[j] {
            continue;
        }
        let mut s2 = s.clone();
        if unify_spine_mut(first, candidate, &mut s2) {
            used[j] = true;
            if let Some(s3) = match_slash(tail, b, used, &s2) {
                used[j] = false;
                return Some(s3);
            }
            used[j] = false;
        }
    }
    None
}

/// Unifies two root terms, extending `s`. Fails on a symbol clash or a
/// clashing atomic value of a shared attribute.
pub fn unify_root(a: &RootTerm, b: &RootTerm, s: &Substitution) -> Option<Substitution> {
    let mut s2 = s.clone();
    unify_root_mut(a, b, &mut s2).then_some(s2)
}

/// Structural unification of two tree descriptions: roots unify, leaves
/// sequences have equal length and unify pointwise with equal directions,
/// slash multisets unify under some bijection.
pub fn unify_stree(a: &ArgSTree, b: &ArgSTree, s: &Substitution) -> Option<Substitution> {
    let mut s2 = s.clone();
    unify_arg_mut(a, b, &mut s2).then_some(s2)
}

// ---------------------------------------------------------------------------
// Renaming apart

#[derive(Default)]
struct Renamer {
    map: BTreeMap<u64, Variable>,
}

impl Renamer {
    fn fresh_for(&mut self, v: &Variable, gen: &mut VarGen) -> Variable {
        if let Some(r) = self.map.get(&v.id()) {
            return r.clone();
        }
        let fresh = match v.name() {
            Some(n) => gen.fresh_named(n),
            None => gen.fresh(),
        };
        self.map.insert(v.id(), fresh.clone());
        fresh
    }

    fn feature(&mut self, value: &FeatureValue, gen: &mut VarGen) -> FeatureValue {
        match value {
            FeatureValue::Atom(_) => value.clone(),
            FeatureValue::Var(v) => FeatureValue::Var(self.fresh_for(v, gen)),
        }
    }

    fn root(&mut self, t: &RootTerm, gen: &mut VarGen) -> RootTerm {
        RootTerm {
            symbol: t.symbol.clone(),
            features: t
                .features
                .iter()
                .map(|(k, v)| (k.clone(), self.feature(v, gen)))
                .collect(),
        }
    }

    fn stree(&mut self, t: &STree, gen: &mut VarGen) -> STree {
        STree {
            root: self.root(&t.root, gen),
            leaves: t.leaves.iter().map(|l| self.leaf(l, gen)).collect(),
        }
    }

    fn arg(&mut self, t: &ArgSTree, gen: &mut VarGen) -> ArgSTree {
        ArgSTree {
            root: self.root(&t.root, gen),
            leaves: t.leaves.iter().map(|l| self.leaf(l, gen)).collect(),
            slash: t.slash.iter().map(|e| self.stree(e, gen)).collect(),
        }
    }

    fn leaf(&mut self, l: &Leaf, gen: &mut VarGen) -> Leaf {
        Leaf {
            dir: l.dir,
            cat: self.arg(&l.cat, gen),
        }
    }
}

/// Structurally identical copy with every variable replaced by a fresh one,
/// consistently within the call.
pub fn rename_apart(t: &ArgSTree, gen: &mut VarGen) -> ArgSTree {
    Renamer::default().arg(t, gen)
}

pub fn rename_apart_stree(t: &STree, gen: &mut VarGen) -> STree {
    Renamer::default().stree(t, gen)
}

pub fn rename_apart_root(t: &RootTerm, gen: &mut VarGen) -> RootTerm {
    Renamer::default().root(t, gen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(id: u64, name: &str) -> FeatureValue {
        FeatureValue::Var(Variable::named(id, name))
    }

    #[test]
    fn binds_a_single_feature_variable() {
        let a = RootTerm::atom("np").with_feature("case", var(0, "Nom"));
        let b = RootTerm::atom("np").with_feature("case", FeatureValue::atom("nom"));
        let s = unify_root(&a, &b, &Substitution::new()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(
            s.resolve(&var(0, "Nom")),
            FeatureValue::atom("nom")
        );
    }

    #[test]
    fn identical_atoms_unify_with_empty_substitution() {
        let s = unify_root(
            &RootTerm::atom("np"),
            &RootTerm::atom("np"),
            &Substitution::new(),
        )
        .unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn clashing_atomic_values_fail() {
        let a = RootTerm::atom("np").with_feature("case", FeatureValue::atom("nom"));
        let b = RootTerm::atom("np").with_feature("case", FeatureValue::atom("acc"));
        assert!(unify_root(&a, &b, &Substitution::new()).is_none());
    }

    #[test]
    fn missing_attribute_is_not_a_clash() {
        let a = RootTerm::atom("np").with_feature("case", FeatureValue::atom("nom"));
        let b = RootTerm::atom("np");
        assert!(unify_root(&a, &b, &Substitution::new()).is_some());
        assert!(unify_root(&b, &a, &Substitution::new()).is_some());
    }

    #[test]
    fn atomic_trees_unify() {
        let s = unify_stree(
            &ArgSTree::atom("np"),
            &ArgSTree::atom("np"),
            &Substitution::new(),
        )
        .unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn singleton_slash_binds_through_the_multiset() {
        let a = ArgSTree::new(
            RootTerm::atom("s"),
            vec![],
            vec![STree::new(
                RootTerm::atom("np").with_feature("case", var(0, "C")),
                vec![],
            )],
        );
        let b = ArgSTree::new(
            RootTerm::atom("s"),
            vec![],
            vec![STree::new(
                RootTerm::atom("np").with_feature("case", FeatureValue::atom("nom")),
                vec![],
            )],
        );
        let s = unify_stree(&a, &b, &Substitution::new()).unwrap();
        assert_eq!(s.resolve(&var(0, "C")), FeatureValue::atom("nom"));
    }

    #[test]
    fn unequal_leaves_lengths_fail() {
        let a = ArgSTree::new(
            RootTerm::atom("s"),
            vec![Leaf::right(ArgSTree::atom("np"))],
            vec![],
        );
        let b = ArgSTree::atom("s");
        assert!(unify_stree(&a, &b, &Substitution::new()).is_none());
    }

    #[test]
    fn slash_bijection_backtracks_over_pairings() {
        // Position-wise pairing clashes; the crossed bijection succeeds.
        let nom = || STree::new(RootTerm::atom("np").with_feature("case", FeatureValue::atom("nom")), vec![]);
        let acc = || STree::new(RootTerm::atom("np").with_feature("case", FeatureValue::atom("acc")), vec![]);
        let a = ArgSTree::new(RootTerm::atom("s"), vec![], vec![nom(), acc()]);
        let b = ArgSTree::new(RootTerm::atom("s"), vec![], vec![acc(), nom()]);
        assert!(unify_stree(&a, &b, &Substitution::new()).is_some());

        let c = ArgSTree::new(RootTerm::atom("s"), vec![], vec![nom(), nom()]);
        assert!(unify_stree(&a, &c, &Substitution::new()).is_none());
    }

    #[test]
    fn unify_is_symmetric_on_success() {
        let cases = vec![
            (
                RootTerm::atom("np").with_feature("case", var(0, "C")),
                RootTerm::atom("np").with_feature("case", FeatureValue::atom("nom")),
            ),
            (
                RootTerm::atom("np").with_feature("case", FeatureValue::atom("nom")),
                RootTerm::atom("np").with_feature("case", FeatureValue::atom("acc")),
            ),
            (RootTerm::atom("s"), RootTerm::atom("np")),
            (
                RootTerm::atom("np").with_feature("case", var(1, "A")),
                RootTerm::atom("np").with_feature("case", var(2, "B")),
            ),
        ];
        for (a, b) in cases {
            let ab = unify_root(&a, &b, &Substitution::new()).is_some();
            let ba = unify_root(&b, &a, &Substitution::new()).is_some();
            assert_eq!(ab, ba, "symmetry broken for {a} / {b}");
        }
    }

    #[test]
    fn application_is_idempotent() {
        let t = ArgSTree::new(
            RootTerm::atom("np").with_feature("case", var(0, "C")),
            vec![],
            vec![STree::new(
                RootTerm::atom("np").with_feature("num", var(1, "N")),
                vec![],
            )],
        );
        let ground = ArgSTree::new(
            RootTerm::atom("np").with_feature("case", FeatureValue::atom("nom")),
            vec![],
            vec![STree::new(
                RootTerm::atom("np").with_feature("num", FeatureValue::atom("sg")),
                vec![],
            )],
        );
        let s = unify_stree(&t, &ground, &Substitution::new()).unwrap();
        let once = s.apply(&t);
        let twice = s.apply(&once);
        assert_eq!(once, twice);
        assert_eq!(once, ground);
    }

    #[test]
    fn variable_chains_resolve_without_cycles() {
        let mut s = Substitution::new();
        assert!(unify_feature_mut(&var(0, "X"), &var(1, "Y"), &mut s));
        // Unifying back the other way must not create a loop.
        assert!(unify_feature_mut(&var(1, "Y"), &var(0, "X"), &mut s));
        assert!(unify_feature_mut(&var(1, "Y"), &FeatureValue::atom("a"), &mut s));
        assert_eq!(s.resolve(&var(0, "X")), FeatureValue::atom("a"));
        assert_eq!(s.resolve(&var(1, "Y")), FeatureValue::atom("a"));
    }

    #[test]
    fn rename_apart_keeps_structure_and_freshens_vars() {
        let mut gen = VarGen::starting_at(100);
        let t = ArgSTree::new(
            RootTerm::atom("np").with_feature("case", var(0, "C")),
            vec![],
            vec![],
        );
        let r1 = rename_apart(&t, &mut gen);
        let r2 = rename_apart(&t, &mut gen);
        let FeatureValue::Var(v1) = &r1.root.features["case"] else {
            panic!("expected a variable");
        };
        let FeatureValue::Var(v2) = &r2.root.features["case"] else {
            panic!("expected a variable");
        };
        assert_ne!(v1.id(), v2.id());
        assert_eq!(v1.name(), Some("C"));
        assert_eq!(r1.root.symbol, "np");

        // A ground term is returned unchanged.
        let g = ArgSTree::atom("np");
        assert_eq!(rename_apart(&g, &mut gen), g);
    }

    #[test]
    fn shared_variable_renames_consistently() {
        let shared = var(7, "X");
        let t = ArgSTree::new(
            RootTerm::atom("s").with_feature("a", shared.clone()),
            vec![Leaf::right(ArgSTree::new(
                RootTerm::atom("np").with_feature("b", shared),
                vec![],
                vec![],
            ))],
            vec![],
        );
        let mut gen = VarGen::starting_at(50);
        let r = rename_apart(&t, &mut gen);
        let FeatureValue::Var(v1) = &r.root.features["a"] else {
            panic!()
        };
        let FeatureValue::Var(v2) = &r.leaves[0].cat.root.features["b"] else {
            panic!()
        };
        assert_eq!(v1, v2);
        assert_ne!(v1.id(), 7);
    }
}
