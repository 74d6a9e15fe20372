//! Text formats for scheme trees and access formulas.
//!
//! Scheme grammar (line comments start with `#`):
//!
//! ```text
//! node  := "threshold" "(" "k" "=" INT ")" "{" child* "}" | "leaf" ID
//! child := ["crucial" | "redundant" "(" GID ")"] node
//! ```
//!
//! Formula grammar:
//!
//! ```text
//! f := ID | "and" "(" f ("," f)* ")" | "or" "(" f ("," f)* ")"
//!    | "thr" "(" INT ";" f ("," f)* ")"
//! ```

use crate::access::AccessFormula;
use crate::compartments::SchemeNode;
use crate::error::{Error, Result};
use crate::extended::SlotKind;

const KEYWORDS: &[&str] = &[
    "threshold",
    "leaf",
    "crucial",
    "redundant",
    "and",
    "or",
    "thr",
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Int(u64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eq,
    Comma,
    Semi,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '#' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                out.push(Token::LParen);
            }
            ')' => {
                chars.next();
                out.push(Token::RParen);
            }
            '{' => {
                chars.next();
                out.push(Token::LBrace);
            }
            '}' => {
                chars.next();
                out.push(Token::RBrace);
            }
            '=' => {
                chars.next();
                out.push(Token::Eq);
            }
            ',' => {
                chars.next();
                out.push(Token::Comma);
            }
            ';' => {
                chars.next();
                out.push(Token::Semi);
            }
            c if c.is_ascii_digit() => {
                let mut value = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        value.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let n = value
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("integer out of range: {value}")))?;
                out.push(Token::Int(n));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        ident.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Token::Ident(ident));
            }
            other => return Err(Error::Parse(format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Self {
            tokens: tokenize(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token> {
        let t = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Parse("unexpected end of input".into()))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, token: Token) -> Result<()> {
        let got = self.next()?;
        if got != token {
            return Err(Error::Parse(format!("expected {token:?}, got {got:?}")));
        }
        Ok(())
    }

    fn expect_keyword(&mut self, word: &str) -> Result<()> {
        match self.next()? {
            Token::Ident(w) if w == word => Ok(()),
            other => Err(Error::Parse(format!("expected {word:?}, got {other:?}"))),
        }
    }

    fn expect_int(&mut self) -> Result<u64> {
        match self.next()? {
            Token::Int(n) => Ok(n),
            other => Err(Error::Parse(format!("expected integer, got {other:?}"))),
        }
    }

    fn expect_name(&mut self) -> Result<String> {
        match self.next()? {
            Token::Ident(w) if !KEYWORDS.contains(&w.as_str()) => Ok(w),
            other => Err(Error::Parse(format!("expected identifier, got {other:?}"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos == self.tokens.len()
    }

    fn scheme_node(&mut self) -> Result<SchemeNode> {
        match self.next()? {
            Token::Ident(w) if w == "leaf" => Ok(SchemeNode::Leaf(self.expect_name()?)),
            Token::Ident(w) if w == "threshold" => {
                self.expect(Token::LParen)?;
                self.expect_keyword("k")?;
                self.expect(Token::Eq)?;
                let k = self.expect_int()? as usize;
                self.expect(Token::RParen)?;
                self.expect(Token::LBrace)?;
                let mut children = Vec::new();
                while self.peek() != Some(&Token::RBrace) {
                    children.push(self.scheme_child()?);
                }
                self.expect(Token::RBrace)?;
                Ok(SchemeNode::Internal { k, children })
            }
            other => Err(Error::Parse(format!(
                "expected 'threshold' or 'leaf', got {other:?}"
            ))),
        }
    }

    fn scheme_child(&mut self) -> Result<(SlotKind, SchemeNode)> {
        let tag = match self.peek() {
            Some(Token::Ident(w)) if w == "crucial" => {
                self.next()?;
                SlotKind::Crucial
            }
            Some(Token::Ident(w)) if w == "redundant" => {
                self.next()?;
                self.expect(Token::LParen)?;
                let gid = self.expect_name()?;
                self.expect(Token::RParen)?;
                SlotKind::Redundant(gid)
            }
            _ => SlotKind::Normal,
        };
        Ok((tag, self.scheme_node()?))
    }

    fn formula(&mut self) -> Result<AccessFormula> {
        match self.next()? {
            Token::Ident(w) if w == "and" || w == "or" => {
                self.expect(Token::LParen)?;
                let children = self.formula_list()?;
                self.expect(Token::RParen)?;
                if w == "and" {
                    AccessFormula::and(children)
                } else {
                    AccessFormula::or(children)
                }
            }
            Token::Ident(w) if w == "thr" => {
                self.expect(Token::LParen)?;
                let k = self.expect_int()? as usize;
                self.expect(Token::Semi)?;
                let children = self.formula_list()?;
                self.expect(Token::RParen)?;
                AccessFormula::threshold(k, children)
            }
            Token::Ident(w) if !KEYWORDS.contains(&w.as_str()) => Ok(AccessFormula::Literal(w)),
            other => Err(Error::Parse(format!("expected formula, got {other:?}"))),
        }
    }

    fn formula_list(&mut self) -> Result<Vec<AccessFormula>> {
        let mut out = vec![self.formula()?];
        while self.peek() == Some(&Token::Comma) {
            self.next()?;
            out.push(self.formula()?);
        }
        Ok(out)
    }
}

pub fn parse_scheme(text: &str) -> Result<SchemeNode> {
    let mut parser = Parser::new(text)?;
    let node = parser.scheme_node()?;
    if !parser.at_end() {
        return Err(Error::Parse("trailing input after scheme".into()));
    }
    Ok(node)
}

pub fn parse_formula(text: &str) -> Result<AccessFormula> {
    let mut parser = Parser::new(text)?;
    let f = parser.formula()?;
    if !parser.at_end() {
        return Err(Error::Parse("trailing input after formula".into()));
    }
    Ok(f)
}

pub fn scheme_to_dsl(node: &SchemeNode) -> String {
    let mut out = String::new();
    write_node(node, 0, &mut out);
    out.push('\n');
    out
}

fn write_node(node: &SchemeNode, indent: usize, out: &mut String) {
    match node {
        SchemeNode::Leaf(holder) => {
            out.push_str("leaf ");
            out.push_str(holder);
        }
        SchemeNode::Internal { k, children } => {
            out.push_str(&format!("threshold(k={k}) {{"));
            for (tag, child) in children {
                out.push('\n');
                out.push_str(&"  ".repeat(indent + 1));
                match tag {
                    SlotKind::Normal => {}
                    SlotKind::Crucial => out.push_str("crucial "),
                    SlotKind::Redundant(g) => out.push_str(&format!("redundant({g}) ")),
                }
                write_node(child, indent + 1, out);
            }
            out.push('\n');
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
    }
}

pub fn formula_to_dsl(f: &AccessFormula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

fn write_formula(f: &AccessFormula, out: &mut String) {
    match f {
        AccessFormula::Literal(id) => out.push_str(id),
        AccessFormula::And(cs) | AccessFormula::Or(cs) => {
            out.push_str(if matches!(f, AccessFormula::And(_)) {
                "and("
            } else {
                "or("
            });
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_formula(c, out);
            }
            out.push(')');
        }
        AccessFormula::Threshold(k, cs) => {
            out.push_str(&format!("thr({k}; "));
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_formula(c, out);
            }
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_vault_scheme() {
        let text = "
            # the vault
            threshold(k=2) {
              crucial leaf o
              crucial leaf sec
              leaf m1
              leaf m2
              leaf m3
              redundant(g1) leaf s1
              redundant(g1) leaf s2
              redundant(g1) leaf s3
            }";
        let node = parse_scheme(text).unwrap();
        let SchemeNode::Internal { k, children } = &node else {
            panic!();
        };
        assert_eq!(*k, 2);
        assert_eq!(children.len(), 8);
        assert_eq!(children[0].0, SlotKind::Crucial);
        assert_eq!(children[7].0, SlotKind::Redundant("g1".into()));
    }

    #[test]
    fn scheme_round_trips_through_the_serializer() {
        let text = "threshold(k=2) {\n  crucial threshold(k=2) {\n    redundant(d1) leaf m1\n    redundant(d1) leaf dep1\n  }\n  leaf a\n  leaf b\n}\n";
        let node = parse_scheme(text).unwrap();
        assert_eq!(scheme_to_dsl(&node), text);
        assert_eq!(parse_scheme(&scheme_to_dsl(&node)).unwrap(), node);
    }

    #[test]
    fn parses_formulas() {
        let f = parse_formula("and(o, sec, thr(2; m1, m2, m3, or(s1, s2, s3)))").unwrap();
        assert_eq!(f.ids().len(), 8);
        assert_eq!(parse_formula(&formula_to_dsl(&f)).unwrap(), f);
        assert_eq!(parse_formula("x").unwrap(), AccessFormula::literal("x"));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_scheme("threshold(k=2) { leaf a").is_err());
        assert!(parse_scheme("leaf leaf").is_err());
        assert!(parse_scheme("leaf a leaf b").is_err());
        assert!(parse_formula("and(a)").is_err());
        assert!(parse_formula("thr(0; a, b)").is_err());
        assert!(parse_formula("and(a, b) c").is_err());
        assert!(parse_formula("%").is_err());
    }
}
