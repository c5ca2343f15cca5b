use thiserror::Error;

use super::{BinOp, Expr, Func, Node};

/// Parse failure at a byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

fn err<T>(pos: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        pos,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Open,
    Close,
    End,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(name) => format!("identifier `{name}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::Open => "`(`".into(),
        Tok::Close => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::Open,
            b')' => Tok::Close,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lexeme = &text[start..i];
                match lexeme.parse::<f64>() {
                    Ok(v) if v.is_finite() => out.push((Tok::Num(v), start)),
                    _ => return err(start, format!("malformed number `{lexeme}`")),
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_owned()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return err(start, format!("unexpected character `{ch}`"));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    var: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn expect_close(&mut self, open_pos: usize) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Close => {
                self.bump();
                Ok(())
            }
            Tok::End => err(
                self.pos(),
                format!("unbalanced parenthesis opened at position {open_pos}"),
            ),
            other => err(self.pos(), format!("expected `)`, found {}", describe(other))),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Node::negate(self.unary()?))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let mut base = self.primary()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let k = self.exponent()?;
            base = Node::pow(base, k);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let pos = self.pos();
        let value = match self.peek() {
            Tok::Open => self.primary()?.as_const(),
            Tok::Minus | Tok::Plus => {
                let negate = self.bump() == Tok::Minus;
                match self.bump() {
                    Tok::Num(v) if negate => Some(-v),
                    Tok::Num(v) => Some(v),
                    _ => None,
                }
            }
            Tok::Num(v) => {
                let v = *v;
                self.bump();
                Some(v)
            }
            _ => None,
        };
        match value {
            Some(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => Ok(v as i32),
            _ => err(pos, "exponent must be an integer constant"),
        }
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::Open => {
                let inner = self.expr()?;
                self.expect_close(pos)?;
                Ok(inner)
            }
            Tok::Ident(name) if name == self.var => Ok(Node::Var),
            Tok::Ident(name) => {
                let Some(func) = Func::from_name(&name) else {
                    return err(
                        pos,
                        format!("unknown identifier `{name}` (free variable is `{}`)", self.var),
                    );
                };
                let open = self.pos();
                if self.bump() != Tok::Open {
                    return err(open, format!("expected `(` after `{name}`"));
                }
                let arg = self.expr()?;
                self.expect_close(open)?;
                Ok(Node::call(func, arg))
            }
            Tok::End => err(pos, "unexpected end of input"),
            other => err(pos, format!("unexpected {}", describe(&other))),
        }
    }
}

pub(super) fn parse(text: &str, var: &str) -> Result<Expr, ParseError> {
    let valid_var = var
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && var.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && Func::from_name(var).is_none();
    if !valid_var {
        return err(0, format!("invalid variable name `{var}`"));
    }
    if text.trim().is_empty() {
        return err(0, "empty expression");
    }
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
        var,
    };
    let root = p.expr()?;
    match p.peek() {
        Tok::End => Ok(Expr::from_node(root, var)),
        Tok::Close => err(p.pos(), "unbalanced `)`"),
        other => err(p.pos(), format!("trailing {}", describe(other))),
    }
}
