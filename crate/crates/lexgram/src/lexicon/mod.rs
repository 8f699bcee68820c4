//! The word-class lexicon: grammar files declare an atom set, a hierarchy of
//! named, parameterized classes (multiple clauses per name are disjunctive
//! alternatives), and word entries. Loading compiles every entry into its
//! fully expanded tree descriptions.
//!
//! The class-call graph must be acyclic, which is what makes eager expansion
//! at load time legitimate; the parser's lexical lookup then costs a rename.

mod expand;
mod syntax;

pub use syntax::{movement_schema, parse_grammar, FeatureTerm, GrammarTerm, Statement, SyntaxError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::term::{validate_lexical_tree, ArgSTree, VarGen};
use crate::unify::rename_apart;

use expand::{eval_body, extract, Ctx, Scope, World};

/// A named class with its disjunctive clauses.
#[derive(Debug, Clone)]
pub struct ClassDef {
    pub name: String,
    pub arity: usize,
    pub clauses: Vec<Clause>,
}

/// One clause: parameter names plus a conjunction of constraints.
#[derive(Debug, Clone)]
pub struct Clause {
    pub params: Vec<String>,
    pub body: Vec<GrammarTerm>,
    pub line: usize,
}

/// One `entry` statement. A word may have several entries; each contributes
/// its own alternatives.
#[derive(Debug, Clone)]
pub struct WordEntry {
    pub surface: String,
    pub body: Vec<GrammarTerm>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub struct LoadError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// A fully expanded lexicon. Immutable after loading; retrievals rename
/// variables apart from a shared counter, so concurrent use is safe.
#[derive(Debug)]
pub struct CompiledLexicon {
    atoms: BTreeSet<String>,
    entries: BTreeMap<String, Vec<ArgSTree>>,
    provenance: BTreeMap<String, Vec<Vec<String>>>,
    warnings: Vec<String>,
    fresh: AtomicU64,
}

// Fresh ids start far above anything a caller-side `VarGen` will produce, so
// renamed entries never collide with user-built patterns.
const FRESH_BASE: u64 = 1 << 32;

impl CompiledLexicon {
    pub fn atoms(&self) -> &BTreeSet<String> {
        &self.atoms
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn word_count(&self) -> usize {
        self.entries.len()
    }

    /// The stored alternatives for a word, in source order, with their
    /// canonical (small) variable ids. Unknown words yield an empty slice.
    pub fn alternatives(&self, word: &str) -> &[ArgSTree] {
        self.entries.get(word).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// All alternatives for a word with variables renamed apart; two calls
    /// never share variables. Unknown words yield the empty set.
    pub fn expand(&self, word: &str) -> Vec<ArgSTree> {
        self.alternatives(word)
            .iter()
            .map(|alt| {
                let n = count_vars(alt);
                let base = self.fresh.fetch_add(n.max(1), Ordering::Relaxed);
                rename_apart(alt, &mut VarGen::starting_at(base))
            })
            .collect()
    }

    /// Class-expansion traces, one per alternative.
    pub fn provenance(&self, word: &str) -> Option<&[Vec<String>]> {
        self.provenance.get(word).map(|v| v.as_slice())
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// True when no entry carries any feature constraint; the sequent prover
    /// only applies to such grammars.
    pub fn is_feature_free(&self) -> bool {
        fn tree_free(t: &ArgSTree) -> bool {
            t.root.features.is_empty()
                && t.leaves.iter().all(|l| tree_free(&l.cat))
                && t.slash
                    .iter()
                    .all(|e| e.root.features.is_empty() && e.leaves.iter().all(|l| tree_free(&l.cat)))
        }
        self.entries.values().flatten().all(tree_free)
    }

    /// Sum of slash sizes over all stored alternatives, counting nested
    /// occurrences; a crude upper bound used for trace budgets.
    pub fn total_slash_size(&self) -> usize {
        fn count(t: &ArgSTree) -> usize {
            t.slash.len()
                + t.slash
                    .iter()
                    .flat_map(|e| e.leaves.iter())
                    .map(|l| count(&l.cat))
                    .sum::<usize>()
                + t.leaves.iter().map(|l| count(&l.cat)).sum::<usize>()
        }
        self.entries.values().flatten().map(count).sum()
    }
}

fn count_vars(t: &ArgSTree) -> u64 {
    use crate::term::FeatureValue;
    use std::collections::BTreeSet;
    fn walk_arg(t: &ArgSTree, seen: &mut BTreeSet<u64>) {
        for v in t.root.features.values() {
            if let FeatureValue::Var(var) = v {
                seen.insert(var.id());
            }
        }
        for l in &t.leaves {
            walk_arg(&l.cat, seen);
        }
        for e in &t.slash {
            for v in e.root.features.values() {
                if let FeatureValue::Var(var) = v {
                    seen.insert(var.id());
                }
            }
            for l in &e.leaves {
                walk_arg(&l.cat, seen);
            }
        }
    }
    let mut seen = BTreeSet::new();
    walk_arg(t, &mut seen);
    seen.len() as u64
}

/// Topological check of the class-call graph; on failure the report names one
/// cycle as the sequence of classes visited.
pub fn check_acyclic(classes: &BTreeMap<String, ClassDef>) -> Result<(), Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    fn callees(body: &[GrammarTerm], classes: &BTreeMap<String, ClassDef>, out: &mut Vec<String>) {
        for term in body {
            walk_term(term, classes, out);
        }
    }
    fn walk_term(t: &GrammarTerm, classes: &BTreeMap<String, ClassDef>, out: &mut Vec<String>) {
        match t {
            GrammarTerm::Call { name, args } => {
                if classes.contains_key(name) {
                    out.push(name.clone());
                }
                for a in args {
                    walk_term(a, classes, out);
                }
            }
            GrammarTerm::Ident(name) => {
                if classes.contains_key(name) {
                    out.push(name.clone());
                }
            }
            GrammarTerm::Tree { root, leaves } => {
                walk_term(root, classes, out);
                for (_, l) in leaves {
                    walk_term(l, classes, out);
                }
            }
            GrammarTerm::Slashed { tree, slash }
            | GrammarTerm::FirstLeafSlash { tree, slash } => {
                walk_term(tree, classes, out);
                for s in slash {
                    walk_term(s, classes, out);
                }
            }
            GrammarTerm::Var(_) | GrammarTerm::Root { .. } => {}
        }
    }
    fn visit(
        name: &str,
        classes: &BTreeMap<String, ClassDef>,
        colors: &mut BTreeMap<String, Color>,
        stack: &mut Vec<String>,
    ) -> Option<Vec<String>> {
        colors.insert(name.to_string(), Color::Gray);
        stack.push(name.to_string());
        let mut called = Vec::new();
        if let Some(class) = classes.get(name) {
            for clause in &class.clauses {
                callees(&clause.body, classes, &mut called);
            }
        }
        for callee in called {
            match colors.get(&callee).copied().unwrap_or(Color::White) {
                Color::Gray => {
                    let start = stack.iter().position(|n| *n == callee).unwrap_or(0);
                    let mut cycle: Vec<String> = stack[start..].to_vec();
                    cycle.push(callee);
                    return Some(cycle);
                }
                Color::White => {
                    if let Some(c) = visit(&callee, classes, colors, stack) {
                        return Some(c);
                    }
                }
                Color::Black => {}
            }
        }
        stack.pop();
        colors.insert(name.to_string(), Color::Black);
        None
    }
    let mut colors = BTreeMap::new();
    for name in classes.keys() {
        if colors.get(name).copied().unwrap_or(Color::White) == Color::White {
            if let Some(cycle) = visit(name, classes, &mut colors, &mut Vec::new()) {
                return Err(cycle);
            }
        }
    }
    Ok(())
}

/// Parses, checks and eagerly expands a grammar file.
pub fn load_grammar(text: &str) -> Result<CompiledLexicon, LoadError> {
    let statements = parse_grammar(text).map_err(|e| LoadError {
        diagnostics: vec![Diagnostic {
            line: Some(e.line),
            message: e.message,
        }],
    })?;

    let mut diagnostics = Vec::new();
    let mut atoms = BTreeSet::new();
    let mut classes: BTreeMap<String, ClassDef> = BTreeMap::new();
    let mut class_order = Vec::new();
    let mut entries: Vec<WordEntry> = Vec::new();

    for stmt in &statements {
        match stmt {
            Statement::Atoms { names, line } => {
                for name in names {
                    if syntax::RESERVED.contains(&name.as_str()) {
                        diagnostics.push(Diagnostic {
                            line: Some(*line),
                            message: format!("`{name}` is reserved and cannot be an atom"),
                        });
                    } else {
                        atoms.insert(name.clone());
                    }
                }
            }
            Statement::Class {
                name,
                params,
                body,
                line,
            } => {
                if syntax::RESERVED.contains(&name.as_str()) {
                    diagnostics.push(Diagnostic {
                        line: Some(*line),
                        message: format!("`{name}` is reserved and cannot be a class"),
                    });
                    continue;
                }
                let clause = Clause {
                    params: params.clone(),
                    body: body.clone(),
                    line: *line,
                };
                match classes.get_mut(name) {
                    None => {
                        class_order.push(name.clone());
                        classes.insert(
                            name.clone(),
                            ClassDef {
                                name: name.clone(),
                                arity: params.len(),
                                clauses: vec![clause],
                            },
                        );
                    }
                    Some(existing) => {
                        if existing.arity != params.len() {
                            diagnostics.push(Diagnostic {
                                line: Some(*line),
                                message: format!(
                                    "class `{name}` redeclared with arity {} (was {})",
                                    params.len(),
                                    existing.arity
                                ),
                            });
                        } else {
                            existing.clauses.push(clause);
                        }
                    }
                }
            }
            Statement::Entry {
                surface,
                body,
                line,
            } => entries.push(WordEntry {
                surface: surface.clone(),
                body: body.clone(),
                line: *line,
            }),
        }
    }

    if atoms.is_empty() {
        diagnostics.push(Diagnostic {
            line: None,
            message: "no atoms declared".to_string(),
        });
    }
    for name in classes.keys() {
        if atoms.contains(name) {
            diagnostics.push(Diagnostic {
                line: None,
                message: format!("`{name}` is declared both as an atom and as a class"),
            });
        }
    }

    // Static validation of every body, including clauses of classes that no
    // entry happens to use.
    for (name, class) in &classes {
        for clause in &class.clauses {
            for term in &clause.body {
                validate_term(term, &atoms, &classes, clause.line, name, &mut diagnostics);
            }
        }
    }
    for entry in &entries {
        for term in &entry.body {
            validate_term(
                term,
                &atoms,
                &classes,
                entry.line,
                &entry.surface,
                &mut diagnostics,
            );
        }
    }

    if !diagnostics.is_empty() {
        return Err(LoadError { diagnostics });
    }

    if let Err(cycle) = check_acyclic(&classes) {
        return Err(LoadError {
            diagnostics: vec![Diagnostic {
                line: None,
                message: format!("cyclic class graph: {}", cycle.join(" -> ")),
            }],
        });
    }

    // Eager expansion.
    let ctx = Ctx {
        classes: &classes,
        atoms: &atoms,
    };
    let mut gen = VarGen::new();
    let mut expanded: BTreeMap<String, Vec<ArgSTree>> = BTreeMap::new();
    let mut provenance: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    let mut warnings = Vec::new();

    for entry in &entries {
        let mut scope = Scope::default();
        let worlds = eval_body(&entry.body, &mut scope, &World::default(), &ctx, &mut gen, 0)
            .map_err(|message| LoadError {
                diagnostics: vec![Diagnostic {
                    line: Some(entry.line),
                    message: format!("entry `{}`: {message}", entry.surface),
                }],
            })?;
        let mut had_any = false;
        for (val, world) in &worlds {
            let tree = extract(val, world).map_err(|message| LoadError {
                diagnostics: vec![Diagnostic {
                    line: Some(entry.line),
                    message: format!("entry `{}`: {message}", entry.surface),
                }],
            })?;
            let violations = validate_lexical_tree(&tree, &atoms);
            if !violations.is_empty() {
                return Err(LoadError {
                    diagnostics: violations
                        .into_iter()
                        .map(|v| Diagnostic {
                            line: Some(entry.line),
                            message: format!("entry `{}`: {v}", entry.surface),
                        })
                        .collect(),
                });
            }
            // Canonical small ids per stored alternative; retrieval renames
            // them apart again.
            let canonical = rename_apart(&tree, &mut VarGen::new());
            expanded
                .entry(entry.surface.clone())
                .or_default()
                .push(canonical);
            provenance
                .entry(entry.surface.clone())
                .or_default()
                .push(world.trace.clone());
            had_any = true;
        }
        if !had_any {
            warnings.push(format!(
                "entry `{}` (line {}) expands to zero alternatives",
                entry.surface, entry.line
            ));
            expanded.entry(entry.surface.clone()).or_default();
            provenance.entry(entry.surface.clone()).or_default();
        }
    }

    Ok(CompiledLexicon {
        atoms,
        entries: expanded,
        provenance,
        warnings,
        fresh: AtomicU64::new(FRESH_BASE),
    })
}

fn validate_term(
    term: &GrammarTerm,
    atoms: &BTreeSet<String>,
    classes: &BTreeMap<String, ClassDef>,
    line: usize,
    context: &str,
    diagnostics: &mut Vec<Diagnostic>,
) {
    match term {
        GrammarTerm::Var(_) => {}
        GrammarTerm::Ident(name) => {
            if !classes.contains_key(name) && !atoms.contains(name) {
                diagnostics.push(Diagnostic {
                    line: Some(line),
                    message: format!(
                        "in `{context}`: undeclared identifier `{name}` (neither atom nor class)"
                    ),
                });
            }
        }
        GrammarTerm::Root { symbol, .. } => {
            if !atoms.contains(symbol) {
                diagnostics.push(Diagnostic {
                    line: Some(line),
                    message: format!("in `{context}`: undeclared atom `{symbol}`"),
                });
            }
        }
        GrammarTerm::Tree { root, leaves } => {
            validate_term(root, atoms, classes, line, context, diagnostics);
            for (_, l) in leaves {
                validate_term(l, atoms, classes, line, context, diagnostics);
            }
        }
        GrammarTerm::Slashed { tree, slash } | GrammarTerm::FirstLeafSlash { tree, slash } => {
            validate_term(tree, atoms, classes, line, context, diagnostics);
            for s in slash {
                validate_term(s, atoms, classes, line, context, diagnostics);
            }
        }
        GrammarTerm::Call { name, args } => {
            match classes.get(name) {
                None => diagnostics.push(Diagnostic {
                    line: Some(line),
                    message: format!("in `{context}`: call to undeclared class `{name}`"),
                }),
                Some(class) => {
                    if class.arity != args.len() {
                        diagnostics.push(Diagnostic {
                            line: Some(line),
                            message: format!(
                                "in `{context}`: class `{name}` called with {} arguments, declared with {}",
                                args.len(),
                                class.arity
                            ),
                        });
                    }
                }
            }
            for a in args {
                validate_term(a, atoms, classes, line, context, diagnostics);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curried::to_curried;
    use crate::term::{FeatureValue, Leaf, RootTerm, STree};

    pub(crate) const DEMO_EN: &str = include_str!("../../../../grammars/demo-en.lg");

    fn demo() -> CompiledLexicon {
        load_grammar(DEMO_EN).expect("demo grammar loads")
    }

    #[test]
    fn demo_grammar_has_eight_words() {
        let lex = demo();
        assert_eq!(lex.word_count(), 8);
        assert!(lex.warnings().is_empty());
        assert!(lex.is_feature_free());
    }

    #[test]
    fn demo_curried_forms() {
        let lex = demo();
        let curried = |w: &str| {
            let alts = lex.expand(w);
            assert_eq!(alts.len(), 1, "one alternative for {w}");
            to_curried(&alts[0]).to_string()
        };
        assert_eq!(curried("john"), "np");
        assert_eq!(curried("mary"), "np");
        assert_eq!(curried("loves"), "(s\\np)/np");
        assert_eq!(curried("the"), "np/n");
        assert_eq!(curried("book"), "n");
        assert_eq!(curried("big"), "n/n");
        assert_eq!(curried("that"), "(n\\n)/(s|np)");
        assert_eq!(curried("sleeps"), "s\\np");
    }

    #[test]
    fn expand_loves_matches_hand_expansion() {
        let lex = demo();
        let alts = lex.expand("loves");
        let expected = ArgSTree::new(
            RootTerm::atom("s"),
            vec![
                Leaf::right(ArgSTree::atom("np")),
                Leaf::left(ArgSTree::atom("np")),
            ],
            vec![],
        );
        assert_eq!(alts, vec![expected]);
    }

    #[test]
    fn expand_that_is_the_relativizer() {
        let lex = demo();
        let alts = lex.expand("that");
        let expected = ArgSTree::new(
            RootTerm::atom("n"),
            vec![
                Leaf::right(ArgSTree::new(
                    RootTerm::atom("s"),
                    vec![],
                    vec![STree::atom("np")],
                )),
                Leaf::left(ArgSTree::atom("n")),
            ],
            vec![],
        );
        assert_eq!(alts, vec![expected]);
    }

    #[test]
    fn unknown_word_expands_to_empty_set() {
        assert!(demo().expand("zzz").is_empty());
    }

    #[test]
    fn expansions_share_no_variables_across_calls() {
        let text = "atom np . entry w : tree(np{case=C}, []) .";
        let lex = load_grammar(text).unwrap();
        let a = &lex.expand("w")[0];
        let b = &lex.expand("w")[0];
        let var_of = |t: &ArgSTree| match &t.root.features["case"] {
            FeatureValue::Var(v) => v.id(),
            _ => panic!("expected a variable"),
        };
        assert_ne!(var_of(a), var_of(b));
    }

    #[test]
    fn empty_file_reports_missing_atoms() {
        let err = load_grammar("").unwrap_err();
        assert!(err.to_string().contains("no atoms declared"));
    }

    #[test]
    fn self_call_is_a_cycle() {
        let err = load_grammar("atom s . class a(R) := a(R) . entry w : a(s) .").unwrap_err();
        assert!(err.to_string().contains("cyclic"));
        assert!(err.to_string().contains("a -> a"));
    }

    #[test]
    fn two_class_cycle_is_named() {
        let err =
            load_grammar("atom s . class a := b . class b := a . entry w : a .").unwrap_err();
        assert!(err.to_string().contains("a -> b -> a"));
    }

    #[test]
    fn acyclic_table_passes() {
        let lex = demo();
        // Reload the statement list to rebuild the class table directly.
        let statements = parse_grammar(DEMO_EN).unwrap();
        let mut classes = BTreeMap::new();
        for stmt in statements {
            if let Statement::Class {
                name, params, body, line,
            } = stmt
            {
                classes
                    .entry(name.clone())
                    .or_insert_with(|| ClassDef {
                        name: name.clone(),
                        arity: params.len(),
                        clauses: Vec::new(),
                    })
                    .clauses
                    .push(Clause { params, body, line });
            }
        }
        assert!(check_acyclic(&classes).is_ok());
        drop(lex);
    }

    /// Two clauses for the same class behave as alternatives; a movement
    /// clause adds exactly one more expansion.
    #[test]
    fn two_clause_class_yields_two_alternatives() {
        let text = "\
atom s, dp .
class maxproj(R)        := tree(R, []) .
class movement(T, B)    := first_leaf_slash(T, [B]) .
class basic_dp          := maxproj(dp) .
class cp_specifier      := tree(s, [right: maxproj(s)]) .
class vorfeld(B)        := movement(cp_specifier, B) .
class determiner_phrase := basic_dp .
class determiner_phrase := vorfeld(basic_dp) .
entry die : determiner_phrase .
";
        let lex = load_grammar(text).unwrap();
        let alts = lex.expand("die");
        assert_eq!(alts.len(), 2);
        assert_eq!(to_curried(&alts[0]).to_string(), "dp");
        assert_eq!(to_curried(&alts[1]).to_string(), "s/(s|dp)");
        let prov = lex.provenance("die").unwrap();
        assert_eq!(prov.len(), 2);
        assert_eq!(prov[0][0], "determiner_phrase/0#1");
        assert_eq!(prov[1][0], "determiner_phrase/0#2");
    }

    /// A movement-defined relativizer expands to the same tree as the
    /// hand-written slashed version.
    #[test]
    fn movement_equals_hand_written_slash() {
        let text = "\
atom s, np, n .
class maxproj(R)     := tree(R, []) .
class movement(T, B) := first_leaf_slash(T, [B]) .
class rel(N, S)      := tree(N, [right: slashed(S, [maxproj(np)]), left: maxproj(N)]) .
entry that  : rel(n, maxproj(s)) .
entry that2 : movement(tree(n, [right: maxproj(s), left: maxproj(n)]), maxproj(np)) .
";
        let lex = load_grammar(text).unwrap();
        assert_eq!(lex.expand("that"), lex.expand("that2"));
    }

    /// A clashing first-leaf slash makes the alternative vanish rather than
    /// fail the load.
    #[test]
    fn movement_onto_clashing_slash_prunes() {
        let text = "\
atom s, np, n .
class maxproj(R)     := tree(R, []) .
class movement(T, B) := first_leaf_slash(T, [B]) .
class host           := tree(s, [right: slashed(maxproj(s), [maxproj(n)])]) .
entry w : movement(host, maxproj(np)) .
";
        let lex = load_grammar(text).unwrap();
        assert!(lex.expand("w").is_empty());
        assert_eq!(lex.warnings().len(), 1);
        assert!(lex.warnings()[0].contains("zero alternatives"));
    }

    /// Compatible existing slash unifies instead of clashing.
    #[test]
    fn movement_onto_equal_slash_keeps_the_alternative() {
        let text = "\
atom s, np .
class maxproj(R)     := tree(R, []) .
class movement(T, B) := first_leaf_slash(T, [B]) .
class host           := tree(s, [right: slashed(maxproj(s), [maxproj(np)])]) .
entry w : movement(host, maxproj(np)) .
";
        let lex = load_grammar(text).unwrap();
        assert_eq!(lex.expand("w").len(), 1);
    }

    /// A host whose leaves list is empty cannot take the constraint.
    #[test]
    fn movement_needs_a_first_leaf() {
        let text = "\
atom s, np .
class maxproj(R)     := tree(R, []) .
class movement(T, B) := first_leaf_slash(T, [B]) .
entry w : movement(maxproj(s), maxproj(np)) .
";
        let lex = load_grammar(text).unwrap();
        assert!(lex.expand("w").is_empty());
    }

    /// Constraining a shared variable is visible at every occurrence.
    #[test]
    fn shared_parameter_updates_all_occurrences() {
        let text = "\
atom s, np, n .
class maxproj(R)     := tree(R, []) .
class movement(T, B) := first_leaf_slash(T, [B]) .
class host           := tree(n, [right: maxproj(s)]) .
class pair(T)        := tree(s, [right: movement(T, maxproj(np)), left: T]) .
entry w : pair(host) .
";
        let lex = load_grammar(text).unwrap();
        let alts = lex.expand("w");
        assert_eq!(alts.len(), 1);
        let first = &alts[0].leaves[0].cat;
        let second = &alts[0].leaves[1].cat;
        assert_eq!(first, second);
        assert_eq!(first.leaves[0].cat.slash.len(), 1);
    }

    #[test]
    fn conjunction_unifies_constraints() {
        let text = "\
atom s, np .
class maxproj(R) := tree(R, []) .
entry w : tree(s{tense=T}, [right: maxproj(np)]) & tree(s{mood=ind}, [right: maxproj(np)]) .
";
        let lex = load_grammar(text).unwrap();
        let alts = lex.expand("w");
        assert_eq!(alts.len(), 1);
        let root = &alts[0].root;
        assert!(root.features.contains_key("tense"));
        assert_eq!(root.features["mood"], FeatureValue::atom("ind"));
    }

    #[test]
    fn clashing_conjunction_prunes() {
        let text = "atom s, np . entry w : tree(s, []) & tree(np, []) .";
        let lex = load_grammar(text).unwrap();
        assert!(lex.expand("w").is_empty());
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let err = load_grammar("atom s . class c(A) := A . entry w : c(s, s) .").unwrap_err();
        assert!(err.to_string().contains("called with 2 arguments"));
    }

    #[test]
    fn undeclared_names_are_reported_with_lines() {
        let err = load_grammar("atom s .\nentry w : maxproj(s) .").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("line 2"));
        assert!(text.contains("maxproj"));
    }

    #[test]
    fn atom_class_namespace_clash_is_an_error() {
        let err = load_grammar("atom s, c . class c := tree(s, []) . entry w : c .").unwrap_err();
        assert!(err.to_string().contains("both as an atom and as a class"));
    }

    #[test]
    fn unresolved_structure_is_a_load_error() {
        let err = load_grammar("atom s . entry w : X .").unwrap_err();
        assert!(err.to_string().contains("unresolved"));
    }

    #[test]
    fn feature_variables_survive_expansion() {
        let text = "atom np . entry w : tree(np{case=C}, []) .";
        let lex = load_grammar(text).unwrap();
        let alts = lex.expand("w");
        assert!(matches!(
            alts[0].root.features["case"],
            FeatureValue::Var(_)
        ));
    }
}
