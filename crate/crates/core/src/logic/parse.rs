//! Parser for the scheme DSL.
//!
//! ```text
//! sentence := quant | prop
//! quant    := "(x):" prop | "(Ex):" prop
//! prop     := prop "->" prop | prop "v" prop | prop "&" prop
//!           | "not" prop | "(" prop ")" | atom
//! atom     := SYMBOL ("x" | "a")
//! ```
//!
//! Binding strength, tightest first: `not`, `&`, `v`, `->`. `->` is right
//! associative, `&` and `v` are left associative. Token positions in errors
//! are 1-based and `(x):` counts as a single token.

use super::formula::{Formula, Term};
use super::LogicError;

/// Placeholder alphabet accepted by the DSL.
pub const PLACEHOLDERS: [&str; 8] = ["F", "G", "H", "I", "F1", "F2", "G1", "G2"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    ForAll,
    Exists,
    LParen,
    RParen,
    Arrow,
    Or,
    And,
    Not,
    Symbol(String),
    Var,
    Const,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::ForAll => "'(x):'".into(),
            Tok::Exists => "'(Ex):'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::Or => "'v'".into(),
            Tok::And => "'&'".into(),
            Tok::Not => "'not'".into(),
            Tok::Symbol(s) => format!("symbol '{s}'"),
            Tok::Var => "'x'".into(),
            Tok::Const => "'a'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<Tok>, LogicError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let rest: String = chars[i..].iter().filter(|c| !c.is_whitespace()).take(5).collect();
        if c == '(' && rest.starts_with("(x):") {
            // skip over "(", "x", ")", ":" allowing interior whitespace
            let mut seen = 0;
            while seen < 4 {
                if !chars[i].is_whitespace() {
                    seen += 1;
                }
                i += 1;
            }
            toks.push(Tok::ForAll);
            continue;
        }
        if c == '(' && rest.starts_with("(Ex):") {
            let mut seen = 0;
            while seen < 5 {
                if !chars[i].is_whitespace() {
                    seen += 1;
                }
                i += 1;
            }
            toks.push(Tok::Exists);
            continue;
        }
        match c {
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            '&' => {
                toks.push(Tok::And);
                i += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                toks.push(Tok::Arrow);
                i += 2;
            }
            c if c.is_ascii_alphanumeric() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match word.as_str() {
                    "not" => Tok::Not,
                    "v" => Tok::Or,
                    "x" => Tok::Var,
                    "a" => Tok::Const,
                    w if PLACEHOLDERS.contains(&w) => Tok::Symbol(word),
                    _ => {
                        return Err(LogicError::UnknownSymbol {
                            token: toks.len() + 1,
                            symbol: word,
                        })
                    }
                };
                toks.push(tok);
            }
            other => {
                return Err(LogicError::Syntax {
                    token: toks.len() + 1,
                    message: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    toks.push(Tok::Eof);
    Ok(toks)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> LogicError {
        LogicError::Syntax {
            token: self.pos + 1,
            message: format!("expected {expected}, found {}", self.peek().describe()),
        }
    }

    fn implication(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        if *self.peek() == Tok::Not {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, LogicError> {
        match self.peek().clone() {
            Tok::ForAll => {
                self.bump();
                Ok(Formula::forall(self.implication()?))
            }
            Tok::Exists => {
                self.bump();
                Ok(Formula::exists(self.implication()?))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.implication()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error("')'"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Symbol(s) => {
                self.bump();
                let term = match self.peek() {
                    Tok::Var => Term::Var,
                    Tok::Const => Term::Const,
                    _ => return Err(self.error("'x' or 'a'")),
                };
                self.bump();
                Ok(Formula::atom(s, term))
            }
            _ => Err(self.error("a formula")),
        }
    }
}

/// Parses one DSL sentence.
pub fn parse_formula(text: &str) -> Result<Formula, LogicError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.implication()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error("end of input"));
    }
    if !f.is_closed() {
        return Err(LogicError::FreeVariable(text.to_string()));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universal_conditional() {
        let f = parse_formula("(x): F x -> G x").unwrap();
        assert_eq!(
            f,
            Formula::forall(Formula::implies(
                Formula::atom("F", Term::Var),
                Formula::atom("G", Term::Var)
            ))
        );
    }

    #[test]
    fn negated_conjunction() {
        let f = parse_formula("not (F a & G a)").unwrap();
        assert_eq!(
            f,
            Formula::not(Formula::and(
                Formula::atom("F", Term::Const),
                Formula::atom("G", Term::Const)
            ))
        );
    }

    #[test]
    fn incomplete_input_reports_token_five() {
        match parse_formula("(x): F x ->") {
            Err(LogicError::Syntax { token, .. }) => assert_eq!(token, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_placeholder() {
        assert!(matches!(
            parse_formula("(x): K x -> G x"),
            Err(LogicError::UnknownSymbol { token: 2, .. })
        ));
    }

    #[test]
    fn free_variable_rejected() {
        assert!(matches!(parse_formula("F x"), Err(LogicError::FreeVariable(_))));
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse_formula("(x): not F x & G x v H x -> I x -> F1 x").unwrap();
        assert_eq!(f.to_string(), "(x): not F x & G x v H x -> I x -> F1 x");
        let body = f.child(0).unwrap();
        assert!(matches!(body, Formula::Implies(l, _) if matches!(**l, Formula::Or(..))));
        let g = parse_formula("(x): (F x -> G x) & (G x -> F x)").unwrap();
        assert_eq!(g.to_string(), "(x): (F x -> G x) & (G x -> F x)");
    }

    #[test]
    fn existential_extension() {
        let f = parse_formula("(Ex): F x & not G x").unwrap();
        assert!(matches!(f, Formula::Exists(_)));
        assert_eq!(f.to_string(), "(Ex): F x & not G x");
    }
}
