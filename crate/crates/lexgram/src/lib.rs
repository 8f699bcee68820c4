//! A lexicalized categorial grammar engine.
//!
//! The grammar lives entirely in the lexicon: each word maps to tree
//! descriptions (a root category plus ordered, direction-annotated expected
//! complements, each optionally carrying a slash multiset of traces). A
//! single phrase-structure reduction step drives the head-driven parser,
//! which posits traces on demand and threads pending hypotheses through
//! nested slash frames.
//!
//! Two independent reference calculi cross-validate the parser: a naive
//! non-threading engine that places traces directly in the token sequence,
//! and a brute-force sequent prover for a semi-directional Lambek calculus
//! over the curried category forms.

pub mod curried;
pub mod lexicon;
pub mod oracle;
pub mod parser;
pub mod term;
pub mod unify;

pub use curried::{from_curried, parse_curried, to_curried, Connective, CurriedCategory};
pub use lexicon::{check_acyclic, load_grammar, CompiledLexicon, LoadError};
pub use parser::{parse, Derivation, ParseConfig, ParseOutcome, Span};
pub use term::{
    validate_lexical_tree, ArgSTree, Direction, FeatureValue, Leaf, RootTerm, STree, VarGen,
    Variable,
};
pub use unify::{rename_apart, unify_root, unify_stree, Substitution};
