//! Curried categorial notation and its translation to and from the tree
//! representation.
//!
//! A category is either an atom or `(result op arg)` where `op` is one of the
//! directional connectives `/` (argument to the right), `\` (argument to the
//! left) or the undirected `|`. The two notations alternate in strata: the
//! directional connectives of a spine enumerate a tree's leaves, head-adjacent
//! leaf outermost; each argument position holds a `|`-chain whose chain
//! elements are the slash multiset and whose core restarts a directional
//! spine. Counting the outermost spine as level 1, directional connectives
//! therefore sit at odd levels and `|` at even levels.

use std::fmt;

use crate::term::{
    ArgSTree, Direction, FeatureValue, Leaf, RootTerm, STree, VarGen, VarNamer, Variable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Connective {
    /// `/`: directional, argument expected to the right.
    Forward,
    /// `\`: directional, argument expected to the left.
    Backward,
    /// `|`: undirected, marks a slash element.
    Bar,
}

impl Connective {
    pub fn is_directional(self) -> bool {
        !matches!(self, Connective::Bar)
    }

    pub fn symbol(self) -> char {
        match self {
            Connective::Forward => '/',
            Connective::Backward => '\\',
            Connective::Bar => '|',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CurriedCategory {
    Atom(RootTerm),
    Conn {
        result: Box<CurriedCategory>,
        op: Connective,
        arg: Box<CurriedCategory>,
    },
}

impl CurriedCategory {
    pub fn atom(symbol: impl Into<String>) -> Self {
        CurriedCategory::Atom(RootTerm::atom(symbol))
    }

    pub fn conn(result: CurriedCategory, op: Connective, arg: CurriedCategory) -> Self {
        CurriedCategory::Conn {
            result: Box::new(result),
            op,
            arg: Box::new(arg),
        }
    }

    /// Number of connectives in the category.
    pub fn connective_count(&self) -> usize {
        match self {
            CurriedCategory::Atom(_) => 0,
            CurriedCategory::Conn { result, arg, .. } => {
                1 + result.connective_count() + arg.connective_count()
            }
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, CurriedCategory::Atom(_))
    }
}

/// A connective found at a level its kind does not admit.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("connective `{op}` at embedding level {level}: {detail}", op = .op.symbol())]
pub struct LevelError {
    pub op: Connective,
    pub level: usize,
    pub detail: String,
}

// ---------------------------------------------------------------------------
// Tree -> curried

/// Translates a tree description into curried notation. Level-1 connectives
/// enumerate the leaves (first leaf outermost, `left` as `\`, `right` as `/`);
/// slash elements become `|`-chain elements in a canonical order (sorted by
/// their rendered text, ties kept stable). Total on well-formed trees.
pub fn to_curried(t: &ArgSTree) -> CurriedCategory {
    encode_arg(t)
}

fn encode_arg(t: &ArgSTree) -> CurriedCategory {
    let mut cat = encode_spine(&t.root, &t.leaves);
    for elem in canonical_slash_order(&t.slash) {
        cat = CurriedCategory::conn(cat, Connective::Bar, encode_spine(&elem.root, &elem.leaves));
    }
    cat
}

fn encode_spine(root: &RootTerm, leaves: &[Leaf]) -> CurriedCategory {
    let mut cat = CurriedCategory::Atom(root.clone());
    for leaf in leaves.iter().rev() {
        let op = match leaf.dir {
            Direction::Left => Connective::Backward,
            Direction::Right => Connective::Forward,
        };
        cat = CurriedCategory::conn(cat, op, encode_arg(&leaf.cat));
    }
    cat
}

/// Slash values are multisets, so the translation needs a deterministic
/// tie-break: sort by the rendered element text, keeping equal keys in their
/// original order.
fn canonical_slash_order(slash: &[STree]) -> Vec<&STree> {
    let mut keyed: Vec<(String, &STree)> = slash.iter().map(|e| (e.to_string(), e)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.into_iter().map(|(_, e)| e).collect()
}

// ---------------------------------------------------------------------------
// Curried -> tree

/// Inverse of [`to_curried`] up to slash-multiset permutation. Rejects
/// categories that break the level discipline (an undirected `|` inside a
/// directional spine, i.e. at an odd level).
pub fn from_curried(c: &CurriedCategory) -> Result<ArgSTree, LevelError> {
    decode_arg(c, 0)
}

fn decode_arg(c: &CurriedCategory, chain_level: usize) -> Result<ArgSTree, LevelError> {
    // Peel the |-chain: outermost element was folded last, so collect and
    // reverse to recover canonical (innermost-first) order.
    let mut elems_rev = Vec::new();
    let mut cur = c;
    while let CurriedCategory::Conn { result, op, arg } = cur {
        if *op != Connective::Bar {
            break;
        }
        elems_rev.push(decode_spine(arg, chain_level + 1)?);
        cur = result;
    }
    let core = decode_spine(cur, chain_level + 1)?;
    elems_rev.reverse();
    Ok(ArgSTree::new(core.root, core.leaves, elems_rev))
}

fn decode_spine(c: &CurriedCategory, level: usize) -> Result<STree, LevelError> {
    let mut leaves = Vec::new();
    let mut cur = c;
    loop {
        match cur {
            CurriedCategory::Atom(root) => {
                return Ok(STree::new(root.clone(), leaves));
            }
            CurriedCategory::Conn { result, op, arg } => {
                let dir = match op {
                    Connective::Forward => Direction::Right,
                    Connective::Backward => Direction::Left,
                    Connective::Bar => {
                        return Err(LevelError {
                            op: Connective::Bar,
                            level,
                            detail: "undirected connective where a directional spine is required"
                                .to_string(),
                        })
                    }
                };
                leaves.push(Leaf::new(dir, decode_arg(arg, level + 1)?));
                cur = result;
            }
        }
    }
}

/// Structural scan of the odd/even level discipline, without building a tree.
pub fn check_levels(c: &CurriedCategory) -> Result<(), LevelError> {
    from_curried(c).map(|_| ())
}

// ---------------------------------------------------------------------------
// Text form
//
// `np`, `np{case=nom}`, `(s\np)/np`, `(n\n)/(s|np)`. Subterms are always
// parenthesized; the outermost connective is written bare. No precedence:
// `a/b/c` is rejected.

impl CurriedCategory {
    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, names: &mut VarNamer) -> fmt::Result {
        match self {
            CurriedCategory::Atom(root) => root.fmt_with(f, names),
            CurriedCategory::Conn { result, op, arg } => {
                result.fmt_sub(f, names)?;
                write!(f, "{}", op.symbol())?;
                arg.fmt_sub(f, names)
            }
        }
    }

    fn fmt_sub(&self, f: &mut fmt::Formatter<'_>, names: &mut VarNamer) -> fmt::Result {
        match self {
            CurriedCategory::Atom(_) => self.fmt_with(f, names),
            CurriedCategory::Conn { .. } => {
                write!(f, "(")?;
                self.fmt_with(f, names)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for CurriedCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, &mut VarNamer::default())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("category syntax error at byte {at}: {message}")]
pub struct CurriedParseError {
    pub at: usize,
    pub message: String,
}

/// Parses the plain-text category form. Identifiers starting with an
/// uppercase letter or `_` are variables; occurrences of the same name within
/// one call denote the same variable.
pub fn parse_curried(input: &str, vars: &mut VarGen) -> Result<CurriedCategory, CurriedParseError> {
    let mut p = CatParser {
        input: input.as_bytes(),
        pos: 0,
        vars,
        seen: std::collections::BTreeMap::new(),
    };
    p.skip_ws();
    let cat = p.category(true)?;
    p.skip_ws();
    if p.pos != p.input.len() {
        return Err(p.err("trailing input after category"));
    }
    Ok(cat)
}

struct CatParser<'a> {
    input: &'a [u8],
    pos: usize,
    vars: &'a mut VarGen,
    seen: std::collections::BTreeMap<String, Variable>,
}

impl<'a> CatParser<'a> {
    fn err(&self, message: impl Into<String>) -> CurriedParseError {
        CurriedParseError {
            at: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn category(&mut self, toplevel: bool) -> Result<CurriedCategory, CurriedParseError> {
        let first = self.item()?;
        self.skip_ws();
        let op = match self.peek() {
            Some(b'/') => Connective::Forward,
            Some(b'\\') => Connective::Backward,
            Some(b'|') => Connective::Bar,
            _ => return Ok(first),
        };
        self.pos += 1;
        self.skip_ws();
        let arg = self.item()?;
        self.skip_ws();
        if matches!(self.peek(), Some(b'/') | Some(b'\\') | Some(b'|')) {
            return Err(self.err("connectives have no precedence; parenthesize"));
        }
        let _ = toplevel;
        Ok(CurriedCategory::conn(first, op, arg))
    }

    fn item(&mut self) -> Result<CurriedCategory, CurriedParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.category(false)?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_lowercase() => {
                let symbol = self.ident()?;
                let features = if self.peek() == Some(b'{') {
                    self.features()?
                } else {
                    Default::default()
                };
                Ok(CurriedCategory::Atom(RootTerm { symbol, features }))
            }
            _ => Err(self.err("expected an atom or `(`")),
        }
    }

    fn ident(&mut self) -> Result<String, CurriedParseError> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an identifier"));
        }
        Ok(String::from_utf8_lossy(&self.input[start..self.pos]).into_owned())
    }

    fn features(
        &mut self,
    ) -> Result<std::collections::BTreeMap<String, FeatureValue>, CurriedParseError> {
        self.pos += 1; // consume `{`
        let mut map = std::collections::BTreeMap::new();
        loop {
            self.skip_ws();
            let attr = self.ident()?;
            self.skip_ws();
            if self.peek() != Some(b'=') {
                return Err(self.err("expected `=` in feature"));
            }
            self.pos += 1;
            self.skip_ws();
            let name = self.ident()?;
            let value = if name.starts_with(|c: char| c.is_ascii_uppercase() || c == '_') {
                let var = self
                    .seen
                    .entry(name.clone())
                    .or_insert_with(|| self.vars.fresh_named(name))
                    .clone();
                FeatureValue::Var(var)
            } else {
                FeatureValue::Atom(name)
            };
            if map.insert(attr.clone(), value).is_some() {
                return Err(self.err(format!("duplicate attribute `{attr}`")));
            }
            self.skip_ws();
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                }
                Some(b'}') => {
                    self.pos += 1;
                    return Ok(map);
                }
                _ => return Err(self.err("expected `,` or `}` in features")),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{ArgSTree, Leaf, RootTerm, STree};

    fn parse(s: &str) -> CurriedCategory {
        parse_curried(s, &mut VarGen::new()).unwrap()
    }

    /// `loves`: root s, object np to the right combining first, subject np to
    /// the left.
    fn loves_tree() -> ArgSTree {
        ArgSTree::new(
            RootTerm::atom("s"),
            vec![
                Leaf::right(ArgSTree::atom("np")),
                Leaf::left(ArgSTree::atom("np")),
            ],
            vec![],
        )
    }

    #[test]
    fn subcat_at_level_one_slash_at_level_two() {
        // Root x0 expecting two rightward complements; the first complement
        // is x2 carrying slash traces x3 and x4.
        let t = ArgSTree::new(
            RootTerm::atom("x0"),
            vec![
                Leaf::right(ArgSTree::new(
                    RootTerm::atom("x2"),
                    vec![],
                    vec![STree::atom("x3"), STree::atom("x4")],
                )),
                Leaf::right(ArgSTree::atom("x1")),
            ],
            vec![],
        );
        let c = to_curried(&t);
        assert_eq!(c.to_string(), "(x0/x1)/((x2|x3)|x4)");
        assert_eq!(from_curried(&c).unwrap(), t);
    }

    #[test]
    fn atom_translates_to_itself() {
        assert_eq!(to_curried(&ArgSTree::atom("np")).to_string(), "np");
        assert_eq!(from_curried(&parse("np")).unwrap(), ArgSTree::atom("np"));
    }

    #[test]
    fn transitive_entry_roundtrip() {
        let c = to_curried(&loves_tree());
        assert_eq!(c.to_string(), "(s\\np)/np");
        assert_eq!(from_curried(&c).unwrap(), loves_tree());
        assert_eq!(from_curried(&parse("(s\\np)/np")).unwrap(), loves_tree());
    }

    #[test]
    fn relativizer_decodes_to_slashed_complement() {
        let c = parse("(n\\n)/(s|np)");
        let t = from_curried(&c).unwrap();
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
        assert_eq!(t, expected);
        assert_eq!(to_curried(&t), c);
    }

    #[test]
    fn leaf_order_matches_connective_order() {
        // i-th leaf (head-adjacent first) is the argument of the i-th
        // outermost connective.
        let c = to_curried(&loves_tree());
        let CurriedCategory::Conn { result, op, arg } = &c else {
            panic!("expected a connective");
        };
        assert_eq!(*op, Connective::Forward); // leaf 1: right np
        assert_eq!(**arg, CurriedCategory::atom("np"));
        let CurriedCategory::Conn { op: op2, .. } = result.as_ref() else {
            panic!("expected a second connective");
        };
        assert_eq!(*op2, Connective::Backward); // leaf 2: left np
    }

    #[test]
    fn toplevel_slash_chain_is_a_slashed_tree() {
        let t = from_curried(&parse("s|np")).unwrap();
        assert_eq!(
            t,
            ArgSTree::new(RootTerm::atom("s"), vec![], vec![STree::atom("np")])
        );
        assert_eq!(to_curried(&t).to_string(), "s|np");
    }

    #[test]
    fn control_style_complement_is_level_valid() {
        // A complement with its own leaves restarts a directional spine at
        // the next odd level.
        let c = parse("(s\\np)/(s\\np)");
        let t = from_curried(&c).unwrap();
        assert_eq!(to_curried(&t), c);
        assert!(check_levels(&c).is_ok());
    }

    #[test]
    fn bar_inside_a_spine_is_a_level_violation() {
        let err = from_curried(&parse("(s|np)/n")).unwrap_err();
        assert_eq!(err.op, Connective::Bar);
        assert_eq!(err.level, 1);

        // A slash element must be a directional spine.
        let err = from_curried(&parse("n\\(s|(np|n))")).unwrap_err();
        assert_eq!(err.op, Connective::Bar);
        assert_eq!(err.level, 3);
    }

    #[test]
    fn features_survive_the_translation() {
        let c = parse("np{case=nom,num=N}");
        let t = from_curried(&c).unwrap();
        let root = &t.root;
        assert_eq!(root.symbol, "np");
        assert_eq!(root.features["case"], FeatureValue::atom("nom"));
        assert!(matches!(root.features["num"], FeatureValue::Var(_)));
        assert_eq!(to_curried(&t).to_string(), "np{case=nom,num=N}");
    }

    #[test]
    fn no_precedence_without_parens() {
        assert!(parse_curried("s\\np/np", &mut VarGen::new()).is_err());
    }

    #[test]
    fn slash_order_is_canonicalized() {
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
        assert_eq!(to_curried(&a), to_curried(&b));
        assert_eq!(to_curried(&a).to_string(), "(s|n)|np");
    }
}
