//! Recursive-descent parser.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ([ '*' | '·' ] factor)*
//! factor := NAME '[' idx (',' idx)* ']' | NUMBER | NAME | '(' expr ')'
//! ```

use super::ast::{Expr, Factor, Term};
use super::ExprError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Times,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    // character position, not byte offset, for error messages
    while i < chars.len() {
        let (_, c) = chars[i];
        let pos = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '+' => Some(Tok::Plus),
            '-' | '−' => Some(Tok::Minus),
            '*' | '·' => Some(Tok::Times),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((pos, tok));
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            out.push((pos, Tok::Ident(chars[start..i].iter().map(|(_, c)| c).collect())));
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i].1 == 'e' || chars[i].1 == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j].1 == '+' || chars[j].1 == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].1.is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].1.is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().map(|(_, c)| c).collect();
            let v = s.parse::<f64>().map_err(|_| ExprError::Syntax { pos, msg: format!("malformed number {s:?}") })?;
            out.push((pos, Tok::Number(v)));
        } else {
            return Err(ExprError::Syntax { pos, msg: format!("unexpected character {c:?}") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ExprError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(_) | Tok::Number(_) | Tok::LParen))
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos();
        let mut terms = Vec::new();
        let mut negative = match self.peek() {
            Some(Tok::Minus) => {
                self.at += 1;
                true
            }
            Some(Tok::Plus) => {
                self.at += 1;
                false
            }
            _ => false,
        };
        loop {
            let factors = self.term()?;
            terms.push(Term { negative, factors });
            negative = match self.peek() {
                Some(Tok::Plus) => false,
                Some(Tok::Minus) => true,
                _ => break,
            };
            self.at += 1;
        }
        let expr = Expr { terms };
        check_expr(&expr, start)?;
        Ok(expr)
    }

    fn term(&mut self) -> Result<Vec<Factor>, ExprError> {
        if !self.starts_factor() {
            return self.err("expected a factor");
        }
        let mut factors = vec![self.factor()?];
        loop {
            if self.peek() == Some(&Tok::Times) {
                self.at += 1;
                if !self.starts_factor() {
                    return self.err("expected a factor after '*'");
                }
            } else if !self.starts_factor() {
                break;
            }
            factors.push(self.factor()?);
        }
        Ok(factors)
    }

    fn factor(&mut self) -> Result<Factor, ExprError> {
        match self.bump() {
            Some(Tok::Number(v)) => Ok(Factor::Number(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Factor::Group(Box::new(inner)))
            }
            Some(Tok::Ident(name)) => {
                if self.peek() != Some(&Tok::LBracket) {
                    return Ok(Factor::Name(name));
                }
                self.at += 1;
                let mut indices = Vec::new();
                loop {
                    match self.bump() {
                        Some(Tok::Ident(idx)) => indices.push(idx),
                        _ => {
                            self.at -= 1;
                            return self.err("expected an index symbol");
                        }
                    }
                    match self.bump() {
                        Some(Tok::Comma) => continue,
                        Some(Tok::RBracket) => break,
                        _ => {
                            self.at -= 1;
                            return self.err("expected ',' or ']'");
                        }
                    }
                }
                Ok(Factor::Tensor { name, indices })
            }
            _ => {
                self.at -= 1;
                self.err("expected a factor")
            }
        }
    }
}

fn check_expr(expr: &Expr, pos: usize) -> Result<(), ExprError> {
    let mut reference: Option<Vec<String>> = None;
    for term in &expr.terms {
        if let Some((index, count)) = term.index_counts().into_iter().find(|(_, c)| *c >= 3) {
            return Err(ExprError::RepeatedIndex { index, count, term: term.to_string() });
        }
        let free = term.free_indices();
        match &reference {
            None => reference = Some(free),
            Some(r) if *r != free => {
                return Err(ExprError::FreeIndexMismatch { pos, left: r.clone(), right: free });
            }
            _ => {}
        }
    }
    Ok(())
}

pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, end: text.chars().count() };
    if p.toks.is_empty() {
        return Err(ExprError::Syntax { pos: 0, msg: "empty expression".into() });
    }
    let expr = p.expr()?;
    if p.at < p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_product() {
        let e = parse("R[i,j,k,l] h[k,l]").unwrap();
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[0].factors.len(), 2);
        assert_eq!(e.free_indices(), vec!["i", "j"]);
        assert_eq!(e.terms[0].summed_indices(), vec!["k", "l"]);
    }

    #[test]
    fn sum_of_terms() {
        let e = parse("Ric[i,j] - R[i,k,k,j]").unwrap();
        assert_eq!(e.terms.len(), 2);
        assert!(e.terms[1].negative);
        assert_eq!(e.free_indices(), vec!["i", "j"]);
    }

    #[test]
    fn arity_is_not_a_parse_error() {
        let e = parse("h[i,j] h[i,j,k]").unwrap();
        assert_eq!(e.free_indices(), vec!["k"]);
    }

    #[test]
    fn separators_and_numbers() {
        let e = parse("2.5e-1 * R[i,j,k,l] · delta[k,l]").unwrap();
        assert_eq!(e.terms[0].factors[0], Factor::Number(0.25));
        assert_eq!(e.terms[0].factors.len(), 3);
        let e = parse("-4 R[j,p,i,k] e[k]").unwrap();
        assert!(e.terms[0].negative);
    }

    #[test]
    fn static_errors() {
        assert!(matches!(parse("e[i] e[i] e[i]"), Err(ExprError::RepeatedIndex { count: 3, .. })));
        assert!(matches!(parse("h[i,j] + h[i,k]"), Err(ExprError::FreeIndexMismatch { .. })));
        assert!(matches!(parse("(h[i,j] + h[j,k]) "), Err(ExprError::FreeIndexMismatch { .. })));
        match parse("R[i,j,,k]") {
            Err(ExprError::Syntax { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse(""), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("h[i,j] +"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("(h[i,j]"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("h[i,j] $"), Err(ExprError::Syntax { pos: 7, .. })));
    }

    #[test]
    fn groups_expose_free_indices() {
        let e = parse("(h[i,j] + h[j,i]) delta[i,j]").unwrap();
        assert!(e.free_indices().is_empty());
        assert_eq!(e.terms[0].summed_indices(), vec!["i", "j"]);
    }

    #[test]
    fn print_parse_roundtrip() {
        for s in [
            "R[i,j,k,l] h[k,l]",
            "-Ric[i,j] + 0.5 R[i,k,k,j] - (h[i,j] - 2 h[j,i])",
            "R[l,k,i,p] e[k] e[l] e[i] psi",
            "scal",
            "1e-10 delta[i,j]",
        ] {
            let a = parse(s).unwrap();
            let printed = a.to_string();
            assert_eq!(parse(&printed).unwrap(), a, "{printed}");
        }
    }
}
