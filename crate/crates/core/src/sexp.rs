//! S-expression reader for the SMT-LIB2 surface syntax.

use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SexpKind {
    /// Symbol, with `|...|` quotes removed.
    Sym(String),
    Num(String),
    Str(String),
    Keyword(String),
    List(Vec<Sexp>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sexp {
    pub kind: SexpKind,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct SexpError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl Sexp {
    pub fn sym(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match &self.kind {
            SexpKind::List(xs) => Some(xs),
            _ => None,
        }
    }

    /// Head symbol of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|xs| xs.first()).and_then(|h| h.sym())
    }

    pub fn error(&self, msg: impl Into<String>) -> SexpError {
        SexpError { line: self.line, col: self.col, msg: msg.into() }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SexpKind::Sym(s) => write!(f, "{}", crate::term::smtlib_symbol(s)),
            SexpKind::Num(s) => write!(f, "{}", s),
            SexpKind::Str(s) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            SexpKind::Keyword(s) => write!(f, ":{}", s),
            SexpKind::List(xs) => {
                write!(f, "(")?;
                for (k, x) in xs.iter().enumerate() {
                    if k > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{}", x)?;
                }
                write!(f, ")")
            }
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn err(&self, msg: &str) -> SexpError {
        SexpError { line: self.line, col: self.col, msg: msg.to_string() }
    }

    fn item(&mut self) -> Result<Sexp, SexpError> {
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        let mk = |kind| Sexp { kind, line, col };
        match self.chars.peek().copied() {
            None => Err(self.err("unexpected end of input")),
            Some(')') => Err(self.err("unexpected ')'")),
            Some('(') => {
                self.bump();
                let mut xs = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.peek() {
                        None => return Err(SexpError { line, col, msg: "unclosed '('".into() }),
                        Some(')') => {
                            self.bump();
                            return Ok(mk(SexpKind::List(xs)));
                        }
                        Some(_) => xs.push(self.item()?),
                    }
                }
            }
            Some('|') => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(SexpError { line, col, msg: "unclosed '|'".into() }),
                        Some('|') => return Ok(mk(SexpKind::Sym(s))),
                        Some(c) => s.push(c),
                    }
                }
            }
            Some('"') => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(SexpError { line, col, msg: "unclosed string".into() }),
                        Some('"') => {
                            if self.chars.peek() == Some(&'"') {
                                self.bump();
                                s.push('"');
                            } else {
                                return Ok(mk(SexpKind::Str(s)));
                            }
                        }
                        Some(c) => s.push(c),
                    }
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' || c == '"' || c == '|' {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                let kind = if let Some(k) = s.strip_prefix(':') {
                    SexpKind::Keyword(k.to_string())
                } else if s.chars().all(|c| c.is_ascii_digit()) {
                    SexpKind::Num(s)
                } else {
                    SexpKind::Sym(s)
                };
                Ok(mk(kind))
            }
        }
    }
}

/// Parse every top-level item of `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let mut lx = Lexer { chars: text.chars().peekable(), line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        lx.skip_ws();
        if lx.chars.peek().is_none() {
            return Ok(out);
        }
        out.push(lx.item()?);
    }
}

/// Parse exactly one item.
pub fn parse_one(text: &str) -> Result<Sexp, SexpError> {
    let mut xs = parse_all(text)?;
    match xs.len() {
        1 => Ok(xs.pop().unwrap()),
        n => Err(SexpError { line: 1, col: 1, msg: format!("expected one expression, found {}", n) }),
    }
}

/// Incremental splitter: feed bytes from a stream and collect the text of
/// each complete top-level item. Comments are dropped.
#[derive(Default)]
pub struct Splitter {
    buf: String,
    depth: usize,
    in_str: bool,
    in_bar: bool,
    in_comment: bool,
}

impl Splitter {
    pub fn feed(&mut self, c: char, out: &mut Vec<String>) {
        if self.in_comment {
            if c == '\n' {
                self.in_comment = false;
            }
            return;
        }
        if self.in_str {
            self.buf.push(c);
            if c == '"' {
                self.in_str = false;
            }
            return;
        }
        if self.in_bar {
            self.buf.push(c);
            if c == '|' {
                self.in_bar = false;
            }
            return;
        }
        match c {
            ';' => {
                self.flush_atom(out);
                self.in_comment = true;
            }
            '(' => {
                if self.depth == 0 {
                    self.flush_atom(out);
                }
                self.depth += 1;
                self.buf.push(c);
            }
            ')' => {
                self.buf.push(c);
                self.depth = self.depth.saturating_sub(1);
                if self.depth == 0 {
                    out.push(std::mem::take(&mut self.buf));
                }
            }
            '"' => {
                self.in_str = true;
                self.buf.push(c);
            }
            '|' => {
                self.in_bar = true;
                self.buf.push(c);
            }
            c if c.is_whitespace() => {
                if self.depth == 0 {
                    self.flush_atom(out);
                } else {
                    self.buf.push(c);
                }
            }
            c => self.buf.push(c),
        }
    }

    fn flush_atom(&mut self, out: &mut Vec<String>) {
        if self.depth == 0 && !self.buf.trim().is_empty() {
            out.push(std::mem::take(&mut self.buf));
        } else if self.depth == 0 {
            self.buf.clear();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_lists_and_atoms() {
        let xs = parse_all("(a (b 12) |x y| \"s\"\"t\" :named) ; c\n foo").unwrap();
        assert_eq!(xs.len(), 2);
        let l = xs[0].list().unwrap();
        assert_eq!(l[0].sym(), Some("a"));
        assert_eq!(l[2].sym(), Some("x y"));
        assert_eq!(l[3].kind, SexpKind::Str("s\"t".into()));
        assert_eq!(l[4].kind, SexpKind::Keyword("named".into()));
        assert_eq!(xs[1].sym(), Some("foo"));
    }

    #[test]
    fn reports_positions() {
        let e = parse_all("(a\n  (b").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        let e = parse_all("a )").unwrap_err();
        assert_eq!((e.line, e.col), (1, 3));
    }

    #[test]
    fn splitter_emits_items_and_skips_comments() {
        let mut s = Splitter::default();
        let mut out = Vec::new();
        for c in "success\nunsupported\n; comment (\n((x 1) (y |a)|))\nsat\n".chars() {
            s.feed(c, &mut out);
        }
        assert_eq!(out, vec!["success", "unsupported", "((x 1) (y |a)|))", "sat"]);
    }
}
