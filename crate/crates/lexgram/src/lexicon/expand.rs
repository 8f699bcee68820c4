//! Evaluation of class bodies into concrete tree descriptions.
//!
//! Expansion works over a small value domain in which whole roots and trees
//! may still be variables (class parameters). Conjunction unifies values;
//! clause disjunction multiplies alternatives. Hard errors (sort mismatches,
//! undeclared names) abort the load; a failed unification merely prunes the
//! alternative being built.

use std::collections::{BTreeMap, BTreeSet};

use crate::term::{ArgSTree, Direction, FeatureValue, Leaf, RootTerm, STree, VarGen, Variable};

use super::syntax::{FeatureTerm, GrammarTerm};
use super::ClassDef;

#[derive(Debug, Clone)]
pub(crate) enum Val {
    Var(Variable),
    /// A feature-value atom; appears only through bindings of feature
    /// variables.
    Atom(String),
    Root(RootTerm),
    Tree(TreeVal),
}

#[derive(Debug, Clone)]
pub(crate) struct TreeVal {
    root: Box<Val>,
    leaves: Vec<(Direction, Val)>,
    slash: Vec<Val>,
}

/// One alternative under construction: variable bindings plus the
/// class-expansion trace recorded for provenance.
#[derive(Debug, Clone, Default)]
pub(crate) struct World {
    bind: BTreeMap<Variable, Val>,
    pub(crate) trace: Vec<String>,
}

pub(crate) struct Ctx<'a> {
    pub classes: &'a BTreeMap<String, ClassDef>,
    pub atoms: &'a BTreeSet<String>,
}

/// Source-level variable names of one clause or entry instance.
#[derive(Default)]
pub(crate) struct Scope {
    vars: BTreeMap<String, Variable>,
}

impl Scope {
    fn lookup(&mut self, name: &str, gen: &mut VarGen) -> Variable {
        if name == "_" {
            return gen.fresh();
        }
        self.vars
            .entry(name.to_string())
            .or_insert_with(|| gen.fresh_named(name))
            .clone()
    }
}

// ---------------------------------------------------------------------------
// Walking and unification over values

enum Walked {
    Unbound(Variable),
    /// A non-variable value, together with the last variable of the chain
    /// holding it (if it was reached through one). Rebinding that holder is
    /// how updates stay visible through aliases.
    Value(Option<Variable>, Val),
}

fn walk(v: &Val, w: &World) -> Walked {
    match v {
        Val::Var(x) => {
            let mut cur = x.clone();
            loop {
                match w.bind.get(&cur) {
                    None => return Walked::Unbound(cur),
                    Some(Val::Var(next)) => cur = next.clone(),
                    Some(other) => return Walked::Value(Some(cur), other.clone()),
                }
            }
        }
        other => Walked::Value(None, other.clone()),
    }
}

fn walk_feature(fv: &FeatureValue, w: &World) -> Result<FeatureValue, String> {
    match fv {
        FeatureValue::Atom(_) => Ok(fv.clone()),
        FeatureValue::Var(v) => match walk(&Val::Var(v.clone()), w) {
            Walked::Unbound(last) => Ok(FeatureValue::Var(last)),
            Walked::Value(_, Val::Atom(a)) => Ok(FeatureValue::Atom(a)),
            Walked::Value(_, other) => Err(format!(
                "variable used both as a feature value and as a {}",
                sort_name(&other)
            )),
        },
    }
}

fn sort_name(v: &Val) -> &'static str {
    match v {
        Val::Var(_) => "variable",
        Val::Atom(_) => "feature atom",
        Val::Root(_) => "root term",
        Val::Tree(_) => "tree",
    }
}

fn occurs(x: &Variable, v: &Val, w: &World) -> bool {
    match v {
        Val::Var(y) => match walk(&Val::Var(y.clone()), w) {
            Walked::Unbound(last) => last == *x,
            Walked::Value(_, inner) => occurs(x, &inner, w),
        },
        Val::Atom(_) => false,
        Val::Root(r) => r
            .features
            .values()
            .any(|fv| matches!(fv, FeatureValue::Var(v2) if occurs(x, &Val::Var(v2.clone()), w))),
        Val::Tree(t) => {
            occurs(x, &t.root, w)
                || t.leaves.iter().any(|(_, lv)| occurs(x, lv, w))
                || t.slash.iter().any(|sv| occurs(x, sv, w))
        }
    }
}

/// Unifies two values. `Ok(None)` prunes the alternative; `Err` is a grammar
/// bug that aborts the load. On success the merged value is returned and any
/// variable chains involved are rebound to it.
fn unify_val(a: &Val, b: &Val, w: &World) -> Result<Option<(Val, World)>, String> {
    match (walk(a, w), walk(b, w)) {
        (Walked::Unbound(x), Walked::Unbound(y)) => {
            if x == y {
                Ok(Some((Val::Var(x), w.clone())))
            } else {
                let mut w2 = w.clone();
                w2.bind.insert(x, Val::Var(y.clone()));
                Ok(Some((Val::Var(y), w2)))
            }
        }
        (Walked::Unbound(x), Walked::Value(holder, val))
        | (Walked::Value(holder, val), Walked::Unbound(x)) => {
            if occurs(&x, &val, w) {
                return Ok(None);
            }
            let mut w2 = w.clone();
            match holder {
                Some(h) => {
                    w2.bind.insert(x, Val::Var(h.clone()));
                    Ok(Some((Val::Var(h), w2)))
                }
                None => {
                    w2.bind.insert(x.clone(), val);
                    Ok(Some((Val::Var(x), w2)))
                }
            }
        }
        (Walked::Value(ha, va), Walked::Value(hb, vb)) => {
            if ha.is_some() && ha == hb {
                return Ok(Some((Val::Var(ha.unwrap()), w.clone())));
            }
            let Some((merged, w2)) = merge(&va, &vb, w)? else {
                return Ok(None);
            };
            let mut w3 = w2;
            let result = match (ha, hb) {
                (Some(h1), Some(h2)) => {
                    w3.bind.insert(h2, Val::Var(h1.clone()));
                    w3.bind.insert(h1.clone(), merged);
                    Val::Var(h1)
                }
                (Some(h1), None) => {
                    w3.bind.insert(h1.clone(), merged);
                    Val::Var(h1)
                }
                (None, Some(h2)) => {
                    w3.bind.insert(h2.clone(), merged);
                    Val::Var(h2)
                }
                (None, None) => merged,
            };
            Ok(Some((result, w3)))
        }
    }
}

fn merge(a: &Val, b: &Val, w: &World) -> Result<Option<(Val, World)>, String> {
    match (a, b) {
        (Val::Atom(x), Val::Atom(y)) => Ok((x == y).then(|| (Val::Atom(x.clone()), w.clone()))),
        (Val::Root(r1), Val::Root(r2)) => merge_roots(r1, r2, w),
        (Val::Tree(t1), Val::Tree(t2)) => merge_trees(t1, t2, w),
        (Val::Root(r), Val::Tree(t)) | (Val::Tree(t), Val::Root(r)) => {
            // A bare root in tree position is its maximal projection.
            merge_trees(&maxproj(Val::Root(r.clone())), t, w)
        }
        (x, y) => Err(format!(
            "cannot unify a {} with a {}",
            sort_name(x),
            sort_name(y)
        )),
    }
}

fn maxproj(root: Val) -> TreeVal {
    TreeVal {
        root: Box::new(root),
        leaves: Vec::new(),
        slash: Vec::new(),
    }
}

fn merge_roots(a: &RootTerm, b: &RootTerm, w: &World) -> Result<Option<(Val, World)>, String> {
    if a.symbol != b.symbol {
        return Ok(None);
    }
    let mut w2 = w.clone();
    let mut features = a.features.clone();
    for (attr, vb) in &b.features {
        match features.get(attr) {
            None => {
                features.insert(attr.clone(), vb.clone());
            }
            Some(va) => {
                let ra = walk_feature(va, &w2)?;
                let rb = walk_feature(vb, &w2)?;
                match (ra, rb) {
                    (FeatureValue::Atom(x), FeatureValue::Atom(y)) => {
                        if x != y {
                            return Ok(None);
                        }
                    }
                    (FeatureValue::Var(v), FeatureValue::Var(u)) => {
                        if v != u {
                            w2.bind.insert(v, Val::Var(u));
                        }
                    }
                    (FeatureValue::Var(v), FeatureValue::Atom(x))
                    | (FeatureValue::Atom(x), FeatureValue::Var(v)) => {
                        w2.bind.insert(v, Val::Atom(x));
                    }
                }
            }
        }
    }
    Ok(Some((
        Val::Root(RootTerm {
            symbol: a.symbol.clone(),
            features,
        }),
        w2,
    )))
}

fn merge_trees(a: &TreeVal, b: &TreeVal, w: &World) -> Result<Option<(Val, World)>, String> {
    if a.leaves.len() != b.leaves.len() || a.slash.len() != b.slash.len() {
        return Ok(None);
    }
    let Some((root, mut world)) = unify_val(&a.root, &b.root, w)? else {
        return Ok(None);
    };
    let mut leaves = Vec::with_capacity(a.leaves.len());
    for ((da, va), (db, vb)) in a.leaves.iter().zip(&b.leaves) {
        if da != db {
            return Ok(None);
        }
        let Some((merged, w2)) = unify_val(va, vb, &world)? else {
            return Ok(None);
        };
        world = w2;
        leaves.push((*da, merged));
    }
    let slash = if a.slash.is_empty() {
        Vec::new()
    } else {
        let mut used = vec![false; b.slash.len()];
        match match_slash(&a.slash, &b.slash, &mut used, &world)? {
            Some((merged, w2)) => {
                world = w2;
                merged
            }
            None => return Ok(None),
        }
    };
    Ok(Some((
        Val::Tree(TreeVal {
            root: Box::new(root),
            leaves,
            slash,
        }),
        world,
    )))
}

/// First unifying bijection between two slash multisets, in candidate order.
fn match_slash(
    rest: &[Val],
    b: &[Val],
    used: &mut [bool],
    w: &World,
) -> Result<Option<(Vec<Val>, World)>, String> {
    let Some((first, tail)) = rest.split_first() else {
        return Ok(Some((Vec::new(), w.clone())));
    };
    for j in 0..b.len() {
        if used[j] {
            continue;
        }
        if let Some((merged, w2)) = unify_val(first, &b[j], w)? {
            used[j] = true;
            if let Some((mut more, w3)) = match_slash(tail, b, used, &w2)? {
                used[j] = false;
                more.insert(0, merged);
                return Ok(Some((more, w3)));
            }
            used[j] = false;
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Term evaluation

const MAX_CALL_DEPTH: usize = 64;

pub(crate) fn eval_body(
    terms: &[GrammarTerm],
    scope: &mut Scope,
    world: &World,
    ctx: &Ctx,
    gen: &mut VarGen,
    depth: usize,
) -> Result<Vec<(Val, World)>, String> {
    let mut alts = eval_term(&terms[0], scope, world, ctx, gen, depth)?;
    for term in &terms[1..] {
        let mut next = Vec::new();
        for (val, w) in alts {
            for (val2, w2) in eval_term(term, scope, &w, ctx, gen, depth)? {
                if let Some((merged, w3)) = unify_val(&val, &val2, &w2)? {
                    next.push((merged, w3));
                }
            }
        }
        alts = next;
    }
    Ok(alts)
}

fn eval_term(
    term: &GrammarTerm,
    scope: &mut Scope,
    world: &World,
    ctx: &Ctx,
    gen: &mut VarGen,
    depth: usize,
) -> Result<Vec<(Val, World)>, String> {
    match term {
        GrammarTerm::Var(name) => Ok(vec![(Val::Var(scope.lookup(name, gen)), world.clone())]),
        GrammarTerm::Ident(name) => {
            if ctx.classes.contains_key(name) {
                eval_call(name, &[], scope, world, ctx, gen, depth)
            } else if ctx.atoms.contains(name) {
                Ok(vec![(Val::Root(RootTerm::atom(name)), world.clone())])
            } else {
                Err(format!(
                    "undeclared identifier `{name}` (neither atom nor class)"
                ))
            }
        }
        GrammarTerm::Root { symbol, features } => {
            if !ctx.atoms.contains(symbol) {
                return Err(format!("undeclared atom `{symbol}`"));
            }
            let mut map = BTreeMap::new();
            for (attr, fv) in features {
                let value = match fv {
                    FeatureTerm::Atom(a) => FeatureValue::Atom(a.clone()),
                    FeatureTerm::Var(v) => FeatureValue::Var(scope.lookup(v, gen)),
                };
                map.insert(attr.clone(), value);
            }
            Ok(vec![(
                Val::Root(RootTerm {
                    symbol: symbol.clone(),
                    features: map,
                }),
                world.clone(),
            )])
        }
        GrammarTerm::Tree { root, leaves } => {
            let mut alts = Vec::new();
            for (rv, w) in eval_term(root, scope, world, ctx, gen, depth)? {
                match walk(&rv, &w) {
                    Walked::Unbound(_) | Walked::Value(_, Val::Root(_)) => {}
                    Walked::Value(_, other) => {
                        return Err(format!(
                            "the root position of tree(...) holds a {}",
                            sort_name(&other)
                        ))
                    }
                }
                let mut partials = vec![(Vec::new(), w)];
                for (dir, item) in leaves {
                    let mut next = Vec::new();
                    for (acc, w2) in &partials {
                        for (lv, w3) in eval_term(item, scope, w2, ctx, gen, depth)? {
                            let coerced = coerce_tree(lv, &w3)?;
                            let mut acc2 = acc.clone();
                            acc2.push((*dir, coerced));
                            next.push((acc2, w3));
                        }
                    }
                    partials = next;
                }
                for (lv, w2) in partials {
                    alts.push((
                        Val::Tree(TreeVal {
                            root: Box::new(rv.clone()),
                            leaves: lv,
                            slash: Vec::new(),
                        }),
                        w2,
                    ));
                }
            }
            Ok(alts)
        }
        GrammarTerm::Slashed { tree, slash } => {
            let mut alts = Vec::new();
            for (tv, w) in eval_term(tree, scope, world, ctx, gen, depth)? {
                for (elems, w2) in eval_list(slash, scope, &w, ctx, gen, depth)? {
                    match walk(&tv, &w2) {
                        Walked::Value(holder, Val::Tree(t)) => {
                            let mut t2 = t.clone();
                            t2.slash.extend(elems.iter().cloned());
                            alts.push(store_update(holder, Val::Tree(t2), &w2));
                        }
                        Walked::Value(holder, Val::Root(r)) => {
                            let mut t2 = maxproj(Val::Root(r.clone()));
                            t2.slash = elems.clone();
                            alts.push(store_update(holder, Val::Tree(t2), &w2));
                        }
                        Walked::Unbound(_) => {
                            return Err(
                                "slashed(...) applied to an unresolved variable".to_string()
                            )
                        }
                        Walked::Value(_, other) => {
                            return Err(format!("slashed(...) applied to a {}", sort_name(&other)))
                        }
                    }
                }
            }
            Ok(alts)
        }
        GrammarTerm::FirstLeafSlash { tree, slash } => {
            let mut alts = Vec::new();
            for (tv, w) in eval_term(tree, scope, world, ctx, gen, depth)? {
                for (elems, w2) in eval_list(slash, scope, &w, ctx, gen, depth)? {
                    // A host without a determinate, non-empty leaves list
                    // cannot take the constraint: the alternative vanishes.
                    let Walked::Value(tholder, Val::Tree(t)) = walk(&tv, &w2) else {
                        continue;
                    };
                    let Some((dir, first)) = t.leaves.first().cloned() else {
                        continue;
                    };
                    match walk(&first, &w2) {
                        Walked::Value(cholder, Val::Tree(cat)) => {
                            if cat.slash.is_empty() {
                                let mut cat2 = cat.clone();
                                cat2.slash = elems.clone();
                                alts.push(update_first_leaf(
                                    tholder.clone(),
                                    &t,
                                    dir,
                                    cholder,
                                    Val::Tree(cat2),
                                    &w2,
                                ));
                            } else if cat.slash.len() == elems.len() {
                                let mut used = vec![false; elems.len()];
                                if let Some((merged, w3)) =
                                    match_slash(&cat.slash, &elems, &mut used, &w2)?
                                {
                                    let mut cat2 = cat.clone();
                                    cat2.slash = merged;
                                    alts.push(update_first_leaf(
                                        tholder.clone(),
                                        &t,
                                        dir,
                                        cholder,
                                        Val::Tree(cat2),
                                        &w3,
                                    ));
                                }
                            }
                        }
                        Walked::Value(cholder, Val::Root(r)) => {
                            let mut cat2 = maxproj(Val::Root(r.clone()));
                            cat2.slash = elems.clone();
                            alts.push(update_first_leaf(
                                tholder.clone(),
                                &t,
                                dir,
                                cholder,
                                Val::Tree(cat2),
                                &w2,
                            ));
                        }
                        _ => continue,
                    }
                }
            }
            Ok(alts)
        }
        GrammarTerm::Call { name, args } => eval_call(name, args, scope, world, ctx, gen, depth),
    }
}

/// Writes an updated value back to the variable holding it, so every alias
/// observes the update; inline values are simply replaced.
fn store_update(holder: Option<Variable>, updated: Val, w: &World) -> (Val, World) {
    match holder {
        Some(h) => {
            let mut w2 = w.clone();
            w2.bind.insert(h.clone(), updated);
            (Val::Var(h), w2)
        }
        None => (updated, w.clone()),
    }
}

fn update_first_leaf(
    tree_holder: Option<Variable>,
    t: &TreeVal,
    dir: Direction,
    cat_holder: Option<Variable>,
    new_cat: Val,
    w: &World,
) -> (Val, World) {
    match cat_holder {
        Some(_) => {
            // The leaf value is a variable chain; updating its holder is
            // enough, the tree itself is unchanged.
            let (_, w2) = store_update(cat_holder, new_cat, w);
            match tree_holder {
                Some(h) => (Val::Var(h), w2),
                None => (Val::Tree(t.clone()), w2),
            }
        }
        None => {
            let mut t2 = t.clone();
            t2.leaves[0] = (dir, new_cat);
            store_update(tree_holder, Val::Tree(t2), w)
        }
    }
}

fn eval_list(
    items: &[GrammarTerm],
    scope: &mut Scope,
    world: &World,
    ctx: &Ctx,
    gen: &mut VarGen,
    depth: usize,
) -> Result<Vec<(Vec<Val>, World)>, String> {
    let mut alts = vec![(Vec::new(), world.clone())];
    for item in items {
        let mut next = Vec::new();
        for (acc, w) in &alts {
            for (v, w2) in eval_term(item, scope, w, ctx, gen, depth)? {
                let coerced = coerce_tree(v, &w2)?;
                let mut acc2 = acc.clone();
                acc2.push(coerced);
                next.push((acc2, w2));
            }
        }
        alts = next;
    }
    Ok(alts)
}

/// In a tree position a bare root means its maximal projection; the wrapper
/// keeps the original value in root position so aliases stay linked.
fn coerce_tree(v: Val, w: &World) -> Result<Val, String> {
    match walk(&v, w) {
        Walked::Value(_, Val::Root(_)) => Ok(Val::Tree(maxproj(v))),
        Walked::Value(_, Val::Atom(a)) => Err(format!("feature atom `{a}` used as a tree")),
        _ => Ok(v),
    }
}

fn eval_call(
    name: &str,
    args: &[GrammarTerm],
    scope: &mut Scope,
    world: &World,
    ctx: &Ctx,
    gen: &mut VarGen,
    depth: usize,
) -> Result<Vec<(Val, World)>, String> {
    if depth >= MAX_CALL_DEPTH {
        return Err(format!("class call depth exceeded at `{name}`"));
    }
    let Some(class) = ctx.classes.get(name) else {
        return Err(format!("call to undeclared class `{name}`"));
    };
    if class.arity != args.len() {
        return Err(format!(
            "class `{name}` called with {} arguments, declared with {}",
            args.len(),
            class.arity
        ));
    }
    // Evaluate arguments in the caller's scope.
    let mut arg_alts: Vec<(Vec<Val>, World)> = vec![(Vec::new(), world.clone())];
    for arg in args {
        let mut next = Vec::new();
        for (acc, w) in &arg_alts {
            for (v, w2) in eval_term(arg, scope, w, ctx, gen, depth)? {
                let mut acc2 = acc.clone();
                acc2.push(v);
                next.push((acc2, w2));
            }
        }
        arg_alts = next;
    }

    let mut out = Vec::new();
    for (argvals, w) in arg_alts {
        for (idx, clause) in class.clauses.iter().enumerate() {
            let mut clause_scope = Scope::default();
            let mut w2 = w.clone();
            w2.trace.push(format!("{name}/{}#{}", class.arity, idx + 1));
            let mut ok = true;
            for (param, argval) in clause.params.iter().zip(&argvals) {
                let pvar = Val::Var(clause_scope.lookup(param, gen));
                match unify_val(&pvar, argval, &w2)? {
                    Some((_, w3)) => w2 = w3,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            out.extend(eval_body(
                &clause.body,
                &mut clause_scope,
                &w2,
                ctx,
                gen,
                depth + 1,
            )?);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Extraction of finished values

pub(crate) fn extract(val: &Val, w: &World) -> Result<ArgSTree, String> {
    match walk(val, w) {
        Walked::Unbound(v) => Err(format!(
            "expansion left `{}` structurally unresolved",
            v.name().unwrap_or("_")
        )),
        Walked::Value(_, Val::Root(r)) => Ok(ArgSTree::new(extract_root(&r, w)?, vec![], vec![])),
        Walked::Value(_, Val::Tree(t)) => {
            let root = match walk(&t.root, w) {
                Walked::Value(_, Val::Root(r)) => extract_root(&r, w)?,
                Walked::Unbound(v) => {
                    return Err(format!(
                        "root of an expansion left unresolved (variable `{}`)",
                        v.name().unwrap_or("_")
                    ))
                }
                Walked::Value(_, other) => {
                    return Err(format!("root position holds a {}", sort_name(&other)))
                }
            };
            let mut leaves = Vec::with_capacity(t.leaves.len());
            for (dir, lv) in &t.leaves {
                leaves.push(Leaf::new(*dir, extract(lv, w)?));
            }
            let mut slash = Vec::with_capacity(t.slash.len());
            for sv in &t.slash {
                let elem = extract(sv, w)?;
                if !elem.slash.is_empty() {
                    return Err("a slash element itself carries a slash".to_string());
                }
                slash.push(elem.core());
            }
            Ok(ArgSTree::new(root, leaves, slash))
        }
        Walked::Value(_, Val::Atom(a)) => Err(format!("feature atom `{a}` used as a tree")),
    }
}

fn extract_root(r: &RootTerm, w: &World) -> Result<RootTerm, String> {
    let mut features = BTreeMap::new();
    for (attr, fv) in &r.features {
        features.insert(attr.clone(), walk_feature(fv, w)?);
    }
    Ok(RootTerm {
        symbol: r.symbol.clone(),
        features,
    })
}

pub(crate) fn stree_of(val: &Val, w: &World) -> Result<STree, String> {
    let arg = extract(val, w)?;
    if !arg.slash.is_empty() {
        return Err("expected a slash-free tree".to_string());
    }
    Ok(arg.core())
}
