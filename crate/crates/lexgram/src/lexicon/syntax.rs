//! Tokenizer and statement parser for the grammar file format.
//!
//! The format is line-oriented with `%` comments; statements end with `.`:
//!
//! ```text
//! atom s, np, n .
//! class maxproj(R)       := tree(R, []) .
//! class tv(R, Obj, Subj) := tree(R, [right: Obj, left: Subj]) .
//! class movement(T, Base) := first_leaf_slash(T, [Base]) .
//! entry john  : maxproj(np) .
//! ```
//!
//! `tree(Root, LeafList)` introduces a tree-shape constraint,
//! `slashed(TreeTerm, SlashList)` adds a slash multiset, and
//! `first_leaf_slash(TreeTerm, SlashList)` constrains the first leaf's
//! category to carry the given slash. Identifiers starting uppercase (or `_`)
//! are variables; clause bodies may conjoin constraints with `&`.

use crate::term::Direction;

/// Names with built-in meaning; they cannot be declared as atoms or classes.
pub const RESERVED: &[&str] = &[
    "atom",
    "class",
    "entry",
    "tree",
    "slashed",
    "first_leaf_slash",
    "left",
    "right",
];

/// A constraint term as written in a grammar file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GrammarTerm {
    /// Uppercase identifier; `_` is anonymous (fresh at every occurrence).
    Var(String),
    /// Bare lowercase identifier: a declared atom or a zero-argument class
    /// call, resolved against the declarations at load time.
    Ident(String),
    /// Atom with an explicit feature bundle, e.g. `np{case=C}`.
    Root {
        symbol: String,
        features: Vec<(String, FeatureTerm)>,
    },
    Tree {
        root: Box<GrammarTerm>,
        leaves: Vec<(Direction, GrammarTerm)>,
    },
    Slashed {
        tree: Box<GrammarTerm>,
        slash: Vec<GrammarTerm>,
    },
    FirstLeafSlash {
        tree: Box<GrammarTerm>,
        slash: Vec<GrammarTerm>,
    },
    Call {
        name: String,
        args: Vec<GrammarTerm>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureTerm {
    Atom(String),
    Var(String),
}

/// The movement schema as a lexical constraint: the base category becomes the
/// single slash element of the host's first complement. Grammars normally
/// spell this as a `movement(Host, Base)` class over the `first_leaf_slash`
/// builtin.
pub fn movement_schema(host: GrammarTerm, base: GrammarTerm) -> GrammarTerm {
    GrammarTerm::FirstLeafSlash {
        tree: Box::new(host),
        slash: vec![base],
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Atoms {
        names: Vec<String>,
        line: usize,
    },
    Class {
        name: String,
        params: Vec<String>,
        body: Vec<GrammarTerm>,
        line: usize,
    },
    Entry {
        surface: String,
        body: Vec<GrammarTerm>,
        line: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub message: String,
}

// ---------------------------------------------------------------------------
// Tokenizer

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Comma,
    Colon,
    ColonEq,
    Eq,
    Amp,
    Dot,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Var(s) => write!(f, "`{s}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrack => write!(f, "`[`"),
            Tok::RBrack => write!(f, "`]`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::ColonEq => write!(f, "`:=`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Dot => write!(f, "`.`"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let bytes = line.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            match c {
                b'%' => break, // comment to end of line
                _ if c.is_ascii_whitespace() => i += 1,
                b'(' => {
                    out.push((Tok::LParen, line_no));
                    i += 1;
                }
                b')' => {
                    out.push((Tok::RParen, line_no));
                    i += 1;
                }
                b'[' => {
                    out.push((Tok::LBrack, line_no));
                    i += 1;
                }
                b']' => {
                    out.push((Tok::RBrack, line_no));
                    i += 1;
                }
                b'{' => {
                    out.push((Tok::LBrace, line_no));
                    i += 1;
                }
                b'}' => {
                    out.push((Tok::RBrace, line_no));
                    i += 1;
                }
                b',' => {
                    out.push((Tok::Comma, line_no));
                    i += 1;
                }
                b'&' => {
                    out.push((Tok::Amp, line_no));
                    i += 1;
                }
                b'.' => {
                    out.push((Tok::Dot, line_no));
                    i += 1;
                }
                b'=' => {
                    out.push((Tok::Eq, line_no));
                    i += 1;
                }
                b':' => {
                    if bytes.get(i + 1) == Some(&b'=') {
                        out.push((Tok::ColonEq, line_no));
                        i += 2;
                    } else {
                        out.push((Tok::Colon, line_no));
                        i += 1;
                    }
                }
                _ if c.is_ascii_alphabetic() || c == b'_' => {
                    let start = i;
                    while i < bytes.len()
                        && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                    {
                        i += 1;
                    }
                    let word = &line[start..i];
                    if c.is_ascii_uppercase() || c == b'_' {
                        out.push((Tok::Var(word.to_string()), line_no));
                    } else {
                        out.push((Tok::Ident(word.to_string()), line_no));
                    }
                }
                _ => {
                    return Err(SyntaxError {
                        line: line_no,
                        message: format!("unexpected character `{}`", c as char),
                    })
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

pub fn parse_grammar(text: &str) -> Result<Vec<Statement>, SyntaxError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks: &toks, pos: 0 };
    let mut statements = Vec::new();
    while !p.at_end() {
        statements.push(p.statement()?);
    }
    Ok(statements)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(_, l)| *l)
            .unwrap_or(0)
    }

    fn err(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line(),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Result<&'a Tok, SyntaxError> {
        match self.toks.get(self.pos) {
            Some((t, _)) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(SyntaxError {
                line: self.toks.last().map(|(_, l)| *l).unwrap_or(0),
                message: "unexpected end of file (missing `.`?)".to_string(),
            }),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), SyntaxError> {
        let line = self.line();
        let got = self.next()?;
        if *got == want {
            Ok(())
        } else {
            Err(SyntaxError {
                line,
                message: format!("expected {want}, found {got}"),
            })
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        let line = self.line();
        match self.next()? {
            Tok::Ident(s) => Ok(s.clone()),
            other => Err(SyntaxError {
                line,
                message: format!("expected an identifier, found {other}"),
            }),
        }
    }

    fn statement(&mut self) -> Result<Statement, SyntaxError> {
        let line = self.line();
        let keyword = self.ident()?;
        match keyword.as_str() {
            "atom" => {
                let mut names = vec![self.ident()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.next()?;
                    names.push(self.ident()?);
                }
                self.expect(Tok::Dot)?;
                Ok(Statement::Atoms { names, line })
            }
            "class" => {
                let name = self.ident()?;
                let mut params = Vec::new();
                if self.peek() == Some(&Tok::LParen) {
                    self.next()?;
                    loop {
                        let pline = self.line();
                        match self.next()? {
                            Tok::Var(v) => params.push(v.clone()),
                            other => {
                                return Err(SyntaxError {
                                    line: pline,
                                    message: format!(
                                        "class parameters must be variables, found {other}"
                                    ),
                                })
                            }
                        }
                        match self.next()? {
                            Tok::Comma => continue,
                            Tok::RParen => break,
                            other => {
                                return Err(SyntaxError {
                                    line: pline,
                                    message: format!("expected `,` or `)`, found {other}"),
                                })
                            }
                        }
                    }
                }
                self.expect(Tok::ColonEq)?;
                let body = self.body()?;
                self.expect(Tok::Dot)?;
                Ok(Statement::Class {
                    name,
                    params,
                    body,
                    line,
                })
            }
            "entry" => {
                let surface = self.ident()?;
                self.expect(Tok::Colon)?;
                let body = self.body()?;
                self.expect(Tok::Dot)?;
                Ok(Statement::Entry {
                    surface,
                    body,
                    line,
                })
            }
            other => Err(SyntaxError {
                line,
                message: format!("expected `atom`, `class` or `entry`, found `{other}`"),
            }),
        }
    }

    fn body(&mut self) -> Result<Vec<GrammarTerm>, SyntaxError> {
        let mut terms = vec![self.term()?];
        while self.peek() == Some(&Tok::Amp) {
            self.next()?;
            terms.push(self.term()?);
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<GrammarTerm, SyntaxError> {
        let line = self.line();
        match self.next()? {
            Tok::Var(v) => Ok(GrammarTerm::Var(v.clone())),
            Tok::Ident(name) => match name.as_str() {
                "tree" => {
                    self.expect(Tok::LParen)?;
                    let root = self.term()?;
                    self.expect(Tok::Comma)?;
                    let leaves = self.leaf_list()?;
                    self.expect(Tok::RParen)?;
                    Ok(GrammarTerm::Tree {
                        root: Box::new(root),
                        leaves,
                    })
                }
                "slashed" | "first_leaf_slash" => {
                    let builtin = name.clone();
                    self.expect(Tok::LParen)?;
                    let tree = self.term()?;
                    self.expect(Tok::Comma)?;
                    let slash = self.term_list()?;
                    self.expect(Tok::RParen)?;
                    if builtin == "slashed" {
                        Ok(GrammarTerm::Slashed {
                            tree: Box::new(tree),
                            slash,
                        })
                    } else {
                        Ok(GrammarTerm::FirstLeafSlash {
                            tree: Box::new(tree),
                            slash,
                        })
                    }
                }
                _ => match self.peek() {
                    Some(Tok::LParen) => {
                        self.next()?;
                        let mut args = Vec::new();
                        if self.peek() == Some(&Tok::RParen) {
                            self.next()?;
                        } else {
                            loop {
                                args.push(self.term()?);
                                match self.next()? {
                                    Tok::Comma => continue,
                                    Tok::RParen => break,
                                    other => {
                                        return Err(SyntaxError {
                                            line,
                                            message: format!(
                                                "expected `,` or `)`, found {other}"
                                            ),
                                        })
                                    }
                                }
                            }
                        }
                        Ok(GrammarTerm::Call {
                            name: name.clone(),
                            args,
                        })
                    }
                    Some(Tok::LBrace) => {
                        let features = self.features()?;
                        Ok(GrammarTerm::Root {
                            symbol: name.clone(),
                            features,
                        })
                    }
                    _ => Ok(GrammarTerm::Ident(name.clone())),
                },
            },
            other => Err(SyntaxError {
                line,
                message: format!("expected a term, found {other}"),
            }),
        }
    }

    fn features(&mut self) -> Result<Vec<(String, FeatureTerm)>, SyntaxError> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        loop {
            let attr = self.ident()?;
            self.expect(Tok::Eq)?;
            let line = self.line();
            let value = match self.next()? {
                Tok::Ident(a) => FeatureTerm::Atom(a.clone()),
                Tok::Var(v) => FeatureTerm::Var(v.clone()),
                other => {
                    return Err(SyntaxError {
                        line,
                        message: format!("expected a feature value, found {other}"),
                    })
                }
            };
            if out.iter().any(|(a, _)| *a == attr) {
                return Err(SyntaxError {
                    line,
                    message: format!("duplicate attribute `{attr}`"),
                });
            }
            out.push((attr, value));
            match self.next()? {
                Tok::Comma => continue,
                Tok::RBrace => return Ok(out),
                other => {
                    return Err(SyntaxError {
                        line,
                        message: format!("expected `,` or `}}`, found {other}"),
                    })
                }
            }
        }
    }

    fn leaf_list(&mut self) -> Result<Vec<(Direction, GrammarTerm)>, SyntaxError> {
        self.expect(Tok::LBrack)?;
        let mut out = Vec::new();
        if self.peek() == Some(&Tok::RBrack) {
            self.next()?;
            return Ok(out);
        }
        loop {
            let line = self.line();
            let dir = match self.next()? {
                Tok::Ident(d) if d == "left" => Direction::Left,
                Tok::Ident(d) if d == "right" => Direction::Right,
                other => {
                    return Err(SyntaxError {
                        line,
                        message: format!("expected `left:` or `right:`, found {other}"),
                    })
                }
            };
            self.expect(Tok::Colon)?;
            out.push((dir, self.term()?));
            match self.next()? {
                Tok::Comma => continue,
                Tok::RBrack => return Ok(out),
                other => {
                    return Err(SyntaxError {
                        line,
                        message: format!("expected `,` or `]`, found {other}"),
                    })
                }
            }
        }
    }

    fn term_list(&mut self) -> Result<Vec<GrammarTerm>, SyntaxError> {
        self.expect(Tok::LBrack)?;
        let mut out = Vec::new();
        if self.peek() == Some(&Tok::RBrack) {
            self.next()?;
            return Ok(out);
        }
        loop {
            out.push(self.term()?);
            match self.next()? {
                Tok::Comma => continue,
                Tok::RBrack => return Ok(out),
                other => {
                    return Err(SyntaxError {
                        line: self.line(),
                        message: format!("expected `,` or `]`, found {other}"),
                    })
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_statement_forms() {
        let text = "\
% a comment
atom s, np, n .
class maxproj(R) := tree(R, []) .
class rel(N, S) := tree(N, [right: slashed(S, [maxproj(np)]), left: maxproj(N)]) .
class vorfeld(B) := cp_spec & movement(B) .
entry john : maxproj(np) .
";
        let stmts = parse_grammar(text).unwrap();
        assert_eq!(stmts.len(), 5);
        let Statement::Class { name, params, body, .. } = &stmts[3] else {
            panic!("expected a class");
        };
        assert_eq!(name, "vorfeld");
        assert_eq!(params, &["B"]);
        assert_eq!(body.len(), 2);
    }

    #[test]
    fn statements_may_span_lines() {
        let text = "atom s,\n  np .\nentry a\n  : maxproj(s) .";
        assert_eq!(parse_grammar(text).unwrap().len(), 2);
    }

    #[test]
    fn features_and_anonymous_vars() {
        let stmts = parse_grammar("entry w : tree(np{case=C,num=sg}, [right: _]) .").unwrap();
        let Statement::Entry { body, .. } = &stmts[0] else {
            panic!()
        };
        let GrammarTerm::Tree { root, leaves } = &body[0] else {
            panic!()
        };
        let GrammarTerm::Root { symbol, features } = root.as_ref() else {
            panic!()
        };
        assert_eq!(symbol, "np");
        assert_eq!(features.len(), 2);
        assert_eq!(leaves.len(), 1);
        assert_eq!(leaves[0].1, GrammarTerm::Var("_".to_string()));
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_grammar("atom s .\nclass broken( := x .").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn missing_dot_is_an_error() {
        let err = parse_grammar("atom s").unwrap_err();
        assert!(err.message.contains("end of file"));
    }
}
