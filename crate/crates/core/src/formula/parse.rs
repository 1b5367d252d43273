use thiserror::Error;

use super::ast::{is_identifier, Formula, RelationExpr, Role, FALSE_ATOM};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: number `{text}` exceeds 2^64-1")]
    Overflow {
        line: usize,
        col: usize,
        text: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Word(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '(' | ')' => {
                chars.next();
                let tok = if c == '(' { Tok::Open } else { Tok::Close };
                out.push(Token { tok, line, col });
                col += 1;
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = col;
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token {
                    tok: Tok::Word(word),
                    line,
                    col: start,
                });
            }
            other => {
                return Err(ParseError::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn err<T>(&self, at: Option<&Token>, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = at.map(|t| (t.line, t.col)).unwrap_or(self.end);
        Err(ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn next(&mut self) -> Result<Token, ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => self.err(None, "unexpected end of input"),
        }
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        let t = self.next()?;
        match t.tok {
            Tok::Close => Ok(()),
            _ => self.err(Some(&t), "expected `)`"),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Word(w) if is_identifier(w) => Ok(w.clone()),
            _ => self.err(Some(&t), format!("expected {what}")),
        }
    }

    fn nat(&mut self) -> Result<u64, ParseError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Word(w) if w.chars().all(|c| c.is_ascii_digit()) => {
                w.parse::<u64>().map_err(|_| ParseError::Overflow {
                    line: t.line,
                    col: t.col,
                    text: w.clone(),
                })
            }
            _ => self.err(Some(&t), "expected a natural number"),
        }
    }

    fn role(&mut self) -> Result<Role, ParseError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Word(w) if is_identifier(w) => Ok(Role::named(w.clone())),
            Tok::Open => {
                let kw = self.next()?;
                match &kw.tok {
                    Tok::Word(w) if w == "inv" => {
                        let inner = self.role()?;
                        self.expect_close()?;
                        Ok(inner.inverted())
                    }
                    _ => self.err(Some(&kw), "expected `inv` inside an intersection"),
                }
            }
            _ => self.err(Some(&t), "expected a relation"),
        }
    }

    fn relation(&mut self) -> Result<RelationExpr, ParseError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Word(w) if is_identifier(w) => Ok(RelationExpr::Name(w.clone())),
            Tok::Open => {
                let kw = self.next()?;
                match &kw.tok {
                    Tok::Word(w) if w == "inv" => {
                        let rel = self.relation()?;
                        self.expect_close()?;
                        match rel {
                            RelationExpr::Name(n) => Ok(RelationExpr::Inverse(n)),
                            RelationExpr::Inverse(n) => Ok(RelationExpr::Name(n)),
                            RelationExpr::Intersection(_) => {
                                self.err(Some(&kw), "`inv` applies to a relation name only")
                            }
                        }
                    }
                    Tok::Word(w) if w == "cap" => {
                        let mut roles = Vec::new();
                        loop {
                            match self.toks.get(self.pos).map(|t| &t.tok) {
                                Some(Tok::Close) => {
                                    self.pos += 1;
                                    break;
                                }
                                Some(Tok::Open) => {
                                    // nested intersections flatten
                                    let save = self.pos;
                                    self.pos += 1;
                                    let is_cap = matches!(
                                        self.toks.get(self.pos).map(|t| &t.tok),
                                        Some(Tok::Word(w)) if w == "cap"
                                    );
                                    self.pos = save;
                                    if is_cap {
                                        roles.extend(self.relation()?.roles());
                                    } else {
                                        roles.push(self.role()?);
                                    }
                                }
                                _ => roles.push(self.role()?),
                            }
                        }
                        if roles.is_empty() {
                            return self.err(Some(&kw), "`cap` needs at least one relation");
                        }
                        Ok(RelationExpr::from_roles(roles))
                    }
                    _ => self.err(Some(&kw), "expected `inv` or `cap`"),
                }
            }
            _ => self.err(Some(&t), "expected a relation"),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Word(w) if is_identifier(w) => {
                if w == FALSE_ATOM {
                    return self.err(Some(&t), format!("atom `{FALSE_ATOM}` is reserved"));
                }
                Ok(Formula::Atom(w.clone()))
            }
            Tok::Word(_) => self.err(Some(&t), "expected an atom or `(`"),
            Tok::Close => self.err(Some(&t), "unexpected `)`"),
            Tok::Open => {
                let kw = self.next()?;
                let Tok::Word(w) = &kw.tok else {
                    return self.err(Some(&kw), "expected an operator");
                };
                let f = match w.as_str() {
                    "not" => Formula::not(self.formula()?),
                    "and" => {
                        let a = self.formula()?;
                        Formula::and(a, self.formula()?)
                    }
                    "or" => {
                        let a = self.formula()?;
                        Formula::or(a, self.formula()?)
                    }
                    "ge" | "le" => {
                        let rel = self.relation()?;
                        let n = self.nat()?;
                        let body = self.formula()?;
                        if w == "ge" {
                            Formula::geq(rel, n, body)
                        } else {
                            Formula::leq(rel, n, body)
                        }
                    }
                    "dia" | "box" => {
                        let rel = self.ident("a relation name")?;
                        let n = self.nat()?;
                        let body = self.formula()?;
                        if w == "dia" {
                            Formula::dia(rel, n, body)
                        } else {
                            Formula::boxed(rel, n, body)
                        }
                    }
                    other => return self.err(Some(&kw), format!("unknown operator `{other}`")),
                };
                self.expect_close()?;
                Ok(f)
            }
        }
    }
}

/// Parses exactly one formula. `#` starts a comment running to end of line.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = tokenize(text)?;
    let end = text
        .lines()
        .enumerate()
        .last()
        .map_or((1, 1), |(i, l)| (i + 1, l.chars().count() + 1));
    let mut p = Parser { toks, pos: 0, end };
    let f = p.formula()?;
    if let Some(t) = p.toks.get(p.pos) {
        let t = t.clone();
        return p.err(Some(&t), "trailing input after formula");
    }
    Ok(f)
}
