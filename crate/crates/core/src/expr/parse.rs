//! Tokenizer and precedence parser shared by the signal and symbol grammars.
//!
//! The parser produces an untyped [`Node`] tree; the kind-specific modules map
//! identifiers onto primitives and check arities.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Str(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                out.push((Tok::Plus, i));
                i += 1
            }
            b'-' => {
                out.push((Tok::Minus, i));
                i += 1
            }
            b'*' => {
                out.push((Tok::Star, i));
                i += 1
            }
            b'^' => {
                out.push((Tok::Caret, i));
                i += 1
            }
            b'(' => {
                out.push((Tok::LParen, i));
                i += 1
            }
            b')' => {
                out.push((Tok::RParen, i));
                i += 1
            }
            b',' => {
                out.push((Tok::Comma, i));
                i += 1
            }
            b'"' => {
                let start = i;
                i += 1;
                let s = i;
                while i < bytes.len() && bytes[i] != b'"' {
                    i += 1;
                }
                if i >= bytes.len() {
                    return Err(Error::Syntax {
                        offset: start,
                        message: "unterminated string".into(),
                    });
                }
                out.push((Tok::Str(text[s..i].to_string()), start));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lit = &text[start..i];
                let v: f64 = lit.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("malformed number `{lit}`"),
                })?;
                out.push((Tok::Num(v), start));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
            }
            _ => {
                // accept the Greek letter as an alias for `xi`
                if text[i..].starts_with('ξ') {
                    out.push((Tok::Ident("xi".into()), i));
                    i += 'ξ'.len_utf8();
                } else {
                    return Err(Error::Syntax {
                        offset: i,
                        message: format!("unexpected character `{}`", &text[i..].chars().next().unwrap()),
                    });
                }
            }
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Str(String, usize),
    Ident {
        name: String,
        args: Option<Vec<Node>>,
        offset: usize,
    },
    Add(Vec<Node>),
    Mul(Vec<Node>),
    Neg(Box<Node>),
    Pow(Box<Node>, i32),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<Node> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    let t = self.term()?;
                    terms.push(Node::Neg(Box::new(t)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Node::Add(terms)
        })
    }

    // term := factor ('*' factor)*
    fn term(&mut self) -> Result<Node> {
        let mut factors = vec![self.factor()?];
        while *self.peek() == Tok::Star {
            self.bump();
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Node::Mul(factors)
        })
    }

    // factor := unary ('^' ['-'] integer)?
    fn factor(&mut self) -> Result<Node> {
        let base = self.unary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let neg = if *self.peek() == Tok::Minus {
                self.bump();
                true
            } else {
                false
            };
            let paren = if *self.peek() == Tok::LParen {
                self.bump();
                true
            } else {
                false
            };
            let neg = if paren && *self.peek() == Tok::Minus {
                self.bump();
                !neg
            } else {
                neg
            };
            match self.peek().clone() {
                Tok::Num(v) if v.fract() == 0.0 && v.abs() < 1e6 => {
                    self.bump();
                    if paren {
                        self.expect(Tok::RParen, "`)`")?;
                    }
                    let n = if neg { -(v as i32) } else { v as i32 };
                    Ok(Node::Pow(Box::new(base), n))
                }
                _ => self.err("expected integer exponent"),
            }
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if *self.peek() == Tok::Minus {
            self.bump();
            if let Tok::Num(v) = *self.peek() {
                self.bump();
                return Ok(Node::Num(-v));
            }
            let inner = self.unary()?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Node> {
        let (tok, offset) = (self.peek().clone(), self.offset());
        match tok {
            Tok::Num(v) => {
                self.bump();
                Ok(Node::Num(v))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Node::Str(s, offset))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = Vec::new();
                    if *self.peek() == Tok::RParen {
                        self.bump();
                    } else {
                        loop {
                            args.push(self.expr()?);
                            match self.peek() {
                                Tok::Comma => {
                                    self.bump();
                                }
                                Tok::RParen => {
                                    self.bump();
                                    break;
                                }
                                _ => return self.err("expected `,` or `)`"),
                            }
                        }
                    }
                    Ok(Node::Ident {
                        name,
                        args: Some(args),
                        offset,
                    })
                } else {
                    Ok(Node::Ident {
                        name,
                        args: None,
                        offset,
                    })
                }
            }
            Tok::End => self.err("unexpected end of input"),
            _ => self.err("expected an expression"),
        }
    }
}

pub fn parse_node(text: &str) -> Result<Node> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Evaluates a node that must be a real constant (function arguments).
pub fn const_value(node: &Node, at: usize) -> Result<f64> {
    match node {
        Node::Num(v) => Ok(*v),
        Node::Neg(inner) => Ok(-const_value(inner, at)?),
        Node::Add(v) => v.iter().map(|n| const_value(n, at)).sum(),
        Node::Mul(v) => v.iter().map(|n| const_value(n, at)).product(),
        Node::Pow(b, n) => Ok(const_value(b, at)?.powi(*n)),
        Node::Ident { name, args: None, .. } if name == "pi" => Ok(std::f64::consts::PI),
        _ => Err(Error::Syntax {
            offset: at,
            message: "expected a numeric argument".into(),
        }),
    }
}

pub fn check_arity(name: &str, args: &[Node], expected: &[usize], offset: usize) -> Result<()> {
    if expected.contains(&args.len()) {
        Ok(())
    } else {
        Err(Error::Arity {
            name: name.to_string(),
            expected: expected
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(" or "),
            got: args.len(),
            offset,
        })
    }
}

/// Formats a real literal so that the tokenizer reads back the same value.
pub fn fmt_real(v: f64) -> String {
    let s = format!("{v:?}");
    s.replace("inf", "1e999")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let n = parse_node("a + b * c ^ 2").unwrap();
        match n {
            Node::Add(v) => {
                assert_eq!(v.len(), 2);
                assert!(matches!(&v[1], Node::Mul(f) if matches!(f[1], Node::Pow(_, 2))));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_offset() {
        match parse_node("gauss(,1)") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        match parse_node("planewave(") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_exponent_and_literals() {
        assert_eq!(
            parse_node("x^-1").unwrap(),
            Node::Pow(
                Box::new(Node::Ident { name: "x".into(), args: None, offset: 0 }),
                -1
            )
        );
        assert_eq!(parse_node("-2.5e-3").unwrap(), Node::Num(-2.5e-3));
        assert_eq!(parse_node("1e3").unwrap(), Node::Num(1000.0));
    }

    #[test]
    fn subtraction_chain() {
        let n = parse_node("a - b + c").unwrap();
        assert!(matches!(n, Node::Add(ref v) if v.len() == 3 && matches!(v[1], Node::Neg(_))));
    }
}
