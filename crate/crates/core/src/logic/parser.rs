//! Recursive-descent parser for the formula surface syntax.
//!
//! ```text
//! phi ::= IDENT | "true" | "false" | "!" phi
//!       | phi "&" phi | phi "|" phi | phi "->" phi
//!       | "<<" coalition ">>" ("X" | "G" | "F") phi
//!       | "<<" coalition ">>" "(" phi "U" phi ")"
//!       | "(" phi ")"
//! coalition ::= (INT ("," INT)*)?
//! ```
//!
//! Precedence `!` > `&` > `|` > `->`, with `->` right-associative; a path
//! quantifier binds to the immediately following unary operand. `true`,
//! `false`, `X`, `G`, `F` and `U` are reserved words. `false` is read as
//! `!true`.

use super::{Coalition, Formula, LogicError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Bang,
    Amp,
    Pipe,
    Arrow,
    CoalOpen,
    CoalClose,
    LParen,
    RParen,
    Comma,
    True,
    False,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, LogicError> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            if lx.pos >= lx.src.len() {
                return Ok(out);
            }
            let start = lx.pos;
            let c = lx.src[lx.pos];
            let tok = match c {
                b'!' => {
                    lx.pos += 1;
                    Tok::Bang
                }
                b'&' => {
                    lx.pos += 1;
                    Tok::Amp
                }
                b'|' => {
                    lx.pos += 1;
                    Tok::Pipe
                }
                b'(' => {
                    lx.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Tok::RParen
                }
                b',' => {
                    lx.pos += 1;
                    Tok::Comma
                }
                b'-' => {
                    if lx.src.get(lx.pos + 1) == Some(&b'>') {
                        lx.pos += 2;
                        Tok::Arrow
                    } else {
                        return Err(err(start, "expected '->'"));
                    }
                }
                b'<' => {
                    if lx.src.get(lx.pos + 1) == Some(&b'<') {
                        lx.pos += 2;
                        Tok::CoalOpen
                    } else {
                        return Err(err(start, "expected '<<'"));
                    }
                }
                b'>' => {
                    if lx.src.get(lx.pos + 1) == Some(&b'>') {
                        lx.pos += 2;
                        Tok::CoalClose
                    } else {
                        return Err(err(start, "expected '>>'"));
                    }
                }
                b'0'..=b'9' => {
                    while lx.pos < lx.src.len() && lx.src[lx.pos].is_ascii_digit() {
                        lx.pos += 1;
                    }
                    let text = std::str::from_utf8(&lx.src[start..lx.pos]).unwrap();
                    Tok::Int(text.parse().map_err(|_| err(start, "integer too large"))?)
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while lx.pos < lx.src.len()
                        && (lx.src[lx.pos].is_ascii_alphanumeric() || lx.src[lx.pos] == b'_')
                    {
                        lx.pos += 1;
                    }
                    let text = std::str::from_utf8(&lx.src[start..lx.pos]).unwrap();
                    match text {
                        "true" => Tok::True,
                        "false" => Tok::False,
                        _ => Tok::Ident(text.to_string()),
                    }
                }
                _ => return Err(err(start, &format!("unknown token '{}'", c as char))),
            };
            out.push((tok, start));
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }
}

fn err(pos: usize, msg: &str) -> LogicError {
    LogicError::Syntax {
        pos,
        msg: msg.to_string(),
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|&(_, p)| p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), LogicError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.at += 1;
                Ok(())
            }
            Some(_) => Err(err(self.pos(), &format!("expected {what}"))),
            None => Err(err(self.end, "unexpected end of input")),
        }
    }

    fn parse_implies(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.parse_or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.at += 1;
            let rhs = self.parse_implies()?; // right-associative
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn parse_or(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.parse_and()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.at += 1;
            let rhs = self.parse_and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.parse_unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.at += 1;
            let rhs = self.parse_unary()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Formula, LogicError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Bang) => Ok(Formula::not(self.parse_unary()?)),
            Some(Tok::True) => Ok(Formula::True),
            Some(Tok::False) => Ok(Formula::not(Formula::True)),
            Some(Tok::Ident(name)) => {
                if matches!(name.as_str(), "X" | "G" | "F" | "U") {
                    Err(err(pos, &format!("'{name}' is reserved")))
                } else {
                    Ok(Formula::Prop(name))
                }
            }
            Some(Tok::LParen) => {
                let inner = self.parse_implies()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::CoalOpen) => {
                let coalition = self.parse_coalition()?;
                self.expect(Tok::CoalClose, "'>>'")?;
                let op_pos = self.pos();
                match self.bump() {
                    Some(Tok::Ident(op)) if op == "X" => {
                        Ok(Formula::Next(coalition, Box::new(self.parse_unary()?)))
                    }
                    Some(Tok::Ident(op)) if op == "G" => {
                        Ok(Formula::Always(coalition, Box::new(self.parse_unary()?)))
                    }
                    Some(Tok::Ident(op)) if op == "F" => {
                        Ok(Formula::Eventually(coalition, Box::new(self.parse_unary()?)))
                    }
                    Some(Tok::LParen) => {
                        let lhs = self.parse_implies()?;
                        match self.bump() {
                            Some(Tok::Ident(op)) if op == "U" => {}
                            Some(_) => return Err(err(op_pos, "expected 'U' inside '<<A>> (phi U psi)'")),
                            None => return Err(err(self.end, "unexpected end of input")),
                        }
                        let rhs = self.parse_implies()?;
                        self.expect(Tok::RParen, "')'")?;
                        Ok(Formula::Until(coalition, Box::new(lhs), Box::new(rhs)))
                    }
                    Some(_) => Err(err(op_pos, "expected 'X', 'G', 'F' or '(phi U psi)' after coalition")),
                    None => Err(err(self.end, "unexpected end of input")),
                }
            }
            Some(Tok::Int(_)) => Err(err(pos, "unexpected integer")),
            Some(_) => Err(err(pos, "unexpected token")),
            None => Err(err(self.end, "unexpected end of input")),
        }
    }

    fn parse_coalition(&mut self) -> Result<Coalition, LogicError> {
        let mut coalition = Coalition::new();
        if self.peek() == Some(&Tok::CoalClose) {
            return Ok(coalition);
        }
        loop {
            let pos = self.pos();
            match self.bump() {
                Some(Tok::Int(n)) => {
                    if n == 0 {
                        return Err(err(pos, "agent indices start at 1"));
                    }
                    coalition.insert(n);
                }
                Some(_) => return Err(err(pos, "expected agent index")),
                None => return Err(err(self.end, "unexpected end of input")),
            }
            if self.peek() == Some(&Tok::Comma) {
                self.at += 1;
            } else {
                return Ok(coalition);
            }
        }
    }
}

/// Parse a formula from text. Errors carry the byte position.
pub fn parse_formula(text: &str) -> Result<Formula, LogicError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
    };
    let f = p.parse_implies()?;
    if p.at < p.toks.len() {
        return Err(err(p.pos(), "trailing input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_always_with_empty_coalition() {
        let f = parse_formula("<<>> G !eps").unwrap();
        assert_eq!(f, Formula::always([], Formula::not(Formula::prop("eps"))));
    }

    #[test]
    fn parses_eventually_and_desugars_to_until() {
        let f = parse_formula("<<1>> F b1").unwrap();
        assert_eq!(
            f,
            Formula::Eventually([1].into_iter().collect(), Box::new(Formula::prop("b1")))
        );
        assert_eq!(
            f.desugar(),
            Formula::until([1], Formula::True, Formula::prop("b1"))
        );
    }

    #[test]
    fn reports_position_on_truncated_input() {
        let e = parse_formula("b1 |").unwrap_err();
        match e {
            LogicError::Syntax { pos, .. } => assert_eq!(pos, 4),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse_formula("a -> b -> c").unwrap();
        assert_eq!(f.canon(), "(a -> (b -> c))");
        let f = parse_formula("!a & b | c").unwrap();
        assert_eq!(f.canon(), "(((! a) & b) | c)");
        assert_eq!(
            f,
            Formula::or(
                Formula::And(
                    Box::new(Formula::not(Formula::prop("a"))),
                    Box::new(Formula::prop("b"))
                ),
                Formula::prop("c")
            )
        );
    }

    #[test]
    fn quantifier_binds_tight() {
        let f = parse_formula("<<1>> X b1 | c").unwrap();
        assert_eq!(
            f,
            Formula::or(
                Formula::next([1], Formula::prop("b1")),
                Formula::prop("c")
            )
        );
    }

    #[test]
    fn parses_until_form() {
        let f = parse_formula("<<1,2>> (p U q)").unwrap();
        assert_eq!(
            f,
            Formula::until([1, 2], Formula::prop("p"), Formula::prop("q"))
        );
    }

    #[test]
    fn rejects_reserved_words_as_propositions() {
        assert!(parse_formula("U").is_err());
        assert!(parse_formula("p & X").is_err());
    }

    #[test]
    fn rejects_trailing_input() {
        let e = parse_formula("p q").unwrap_err();
        match e {
            LogicError::Syntax { pos, msg } => {
                assert_eq!(pos, 2);
                assert!(msg.contains("trailing"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_agent_zero() {
        assert!(parse_formula("<<0>> X p").is_err());
    }
}
