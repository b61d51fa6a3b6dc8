//! Concrete syntax.
//!
//! ```text
//! term  := lam | app
//! lam   := '\' IDENT '.' term
//! app   := atom+                 (left-associative)
//! atom  := IDENT | '(' term ')' | atom '[' IDENT '/' term ']'
//! IDENT := [a-zA-Z][a-zA-Z0-9_']* , optional "#<digits>" tag suffix
//! ```
//!
//! `--` starts a comment running to end of line. Whitespace is
//! insignificant. Printing (`Display` on `Term`) emits exactly this
//! grammar with minimal parentheses, and `parse(print(t)) == t`.

use crate::name::Name;
use crate::term::Term;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

pub fn parse(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    p.skip_ws();
    let t = p.term()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("trailing input after term"));
    }
    Ok(t)
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        let mut line = 1;
        let mut col = 1;
        for &b in &self.src[..self.pos.min(self.src.len())] {
            if b == b'\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        ParseError { line, col, msg: msg.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        loop {
            while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
                self.pos += 1;
            }
            if self.src[self.pos..].starts_with(b"--") {
                while !matches!(self.peek(), None | Some(b'\n')) {
                    self.pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), ParseError> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", b as char)))
        }
    }

    fn ident(&mut self) -> Result<Name, ParseError> {
        let start = self.pos;
        match self.peek() {
            Some(b) if b.is_ascii_alphabetic() => self.pos += 1,
            _ => return Err(self.err("expected identifier")),
        }
        while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_' || b == b'\'')
        {
            self.pos += 1;
        }
        let base = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        let mut tag = 0u32;
        if self.peek() == Some(b'#') {
            self.pos += 1;
            let dstart = self.pos;
            while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
                self.pos += 1;
            }
            if dstart == self.pos {
                return Err(self.err("expected digits after '#'"));
            }
            let digits = std::str::from_utf8(&self.src[dstart..self.pos]).unwrap();
            tag = digits.parse().map_err(|_| self.err("name tag out of range"))?;
        }
        Ok(Name::with_tag(base, tag))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        if self.peek() == Some(b'\\') {
            self.pos += 1;
            self.skip_ws();
            let x = self.ident()?;
            self.skip_ws();
            self.expect(b'.')?;
            let body = self.term()?;
            return Ok(Term::abs(x, body));
        }
        let mut t = self.atom()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b) if b.is_ascii_alphabetic() || b == b'(' => {
                    let a = self.atom()?;
                    t = Term::app(t, a);
                }
                _ => return Ok(t),
            }
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        let mut t = match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let t = self.term()?;
                self.skip_ws();
                self.expect(b')')?;
                t
            }
            Some(b) if b.is_ascii_alphabetic() => Term::var(self.ident()?),
            _ => return Err(self.err("expected an atom")),
        };
        // substitution suffixes bind tighter than application
        loop {
            self.skip_ws();
            if self.peek() == Some(b'[') {
                self.pos += 1;
                self.skip_ws();
                let x = self.ident()?;
                self.skip_ws();
                self.expect(b'/')?;
                let u = self.term()?;
                self.skip_ws();
                self.expect(b']')?;
                t = Term::sub(t, x, u);
            } else {
                return Ok(t);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::TermNode;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    #[test]
    fn identity_combinator() {
        let t = parse("\\x.x").unwrap();
        assert_eq!(t, Term::abs(n("x"), Term::var(n("x"))));
    }

    #[test]
    fn nested_substitution_suffixes() {
        let t = parse("(x y)[x/y r][y/u]").unwrap();
        let inner = Term::sub(
            Term::app(Term::var(n("x")), Term::var(n("y"))),
            n("x"),
            Term::app(Term::var(n("y")), Term::var(n("r"))),
        );
        assert_eq!(t, Term::sub(inner, n("y"), Term::var(n("u"))));
    }

    #[test]
    fn fixed_point_generator() {
        let t = parse("\\x.\\y.y (x x y)").unwrap();
        match t.node() {
            TermNode::Abs(x, b) => {
                assert_eq!(x, &n("x"));
                match b.node() {
                    TermNode::Abs(y, _) => assert_eq!(y, &n("y")),
                    _ => panic!("shape"),
                }
            }
            _ => panic!("shape"),
        }
    }

    #[test]
    fn printing_examples() {
        assert_eq!(parse("\\x.x").unwrap().to_string(), "\\x.x");
        assert_eq!(
            Term::sub(Term::var(n("y")), n("x"), Term::var(n("z"))).to_string(),
            "y[x/z]"
        );
        assert_eq!(parse("(\\x.x) y").unwrap().to_string(), "(\\x.x) y");
        assert_eq!(parse("x (y z)").unwrap().to_string(), "x (y z)");
        assert_eq!(parse("x y[y/u]").unwrap().to_string(), "x y[y/u]");
        assert_eq!(parse("\\x.x x").unwrap().to_string(), "\\x.x x");
    }

    #[test]
    fn application_associates_left() {
        let t = parse("f a b").unwrap();
        assert_eq!(
            t,
            Term::app(Term::app(Term::var(n("f")), Term::var(n("a"))), Term::var(n("b")))
        );
    }

    #[test]
    fn comments_and_tags() {
        let t = parse("x#3 y -- trailing words\n").unwrap();
        assert_eq!(t, Term::app(Term::var(Name::with_tag("x", 3)), Term::var(n("y"))));
        assert_eq!(t.to_string(), "x#3 y");
    }

    #[test]
    fn errors_carry_position() {
        let e = parse("\\x x").unwrap_err();
        assert_eq!((e.line, e.col), (1, 4));
        assert!(parse("(x").is_err());
        assert!(parse("x )").is_err());
    }
}
