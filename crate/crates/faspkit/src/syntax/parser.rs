//! Lexer and recursive-descent parser for the `.fasp` rule language.
//!
//! Grammar sketch:
//!
//! ```text
//! program  := (domain | rule)*
//! domain   := "#domain" VAR "=" "{" ident ("," ident)* "}" "."
//! rule     := [ident ":"] head "<-" ["[" CONST "]"] bodyexpr guard* "."
//! head     := atom | CONST
//! bodyexpr := lit | ("TL" | "TM") "(" bodyexpr ("," bodyexpr)* ")"
//! lit      := atom | CONST | ("not_l" | "not_m") atom
//! guard    := "," VAR "!=" VAR
//! atom     := ident [ "(" term ("," term)* ")" ]
//! term     := ident | VAR
//! ```
//!
//! Constants are decimals or `p/q` fractions in `[0,1]`. Identifiers start
//! with a lowercase letter or underscore; variables start uppercase. `%`
//! introduces a line comment. The product connectives (`TP`, `not_p`) and
//! the t-conorms (`SL`, `SM`, `SP`) are recognized only to be rejected
//! with a dedicated diagnostic.

use std::collections::BTreeMap;

use super::SyntaxError;
use crate::truth::{NegatorKind, TNormKind, TruthError, TruthValue};

/// A program whose rules may still contain variables, weights, guards,
/// and nested t-norm bodies.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SchematicProgram {
    pub domains: BTreeMap<String, Vec<String>>,
    pub rules: Vec<SchematicRule>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchematicRule {
    pub label: String,
    pub head: SchematicHead,
    pub weight: Option<TruthValue>,
    pub body: BodyExpr,
    /// Guards `X != Y` restricting the substitutions of this rule.
    pub guards: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchematicHead {
    Atom(SchematicAtom),
    Constant(TruthValue),
}

/// A possibly non-ground atom: predicate plus constant/variable arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchematicAtom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl SchematicAtom {
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Variable(v) => Some(v.as_str()),
            Term::Constant(_) => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Constant(String),
    Variable(String),
}

/// A body as written: a literal or a t-norm applied to sub-bodies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BodyExpr {
    Literal(SchematicLiteral),
    Apply(TNormKind, Vec<BodyExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchematicLiteral {
    Positive(SchematicAtom),
    Constant(TruthValue),
    Negated(NegatorKind, SchematicAtom),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Conn(TNormKind),
    Number(String),
    Negator(NegatorKind),
    HashDomain,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    Arrow,
    Neq,
    Equals,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Var(s) => format!("variable `{s}`"),
            Tok::Conn(k) => format!("`{}`", k.symbol()),
            Tok::Number(s) => format!("constant `{s}`"),
            Tok::Negator(n) => format!("`{}`", n.symbol()),
            Tok::HashDomain => "`#domain`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Arrow => "`<-`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err_at(line: usize, col: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError::Parse {
        line,
        col,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! push {
        ($tok:expr, $line:expr, $col:expr) => {
            toks.push(Token {
                tok: $tok,
                line: $line,
                col: $col,
            })
        };
    }
    while i < chars.len() {
        let (c, tl, tc) = (chars[i], line, col);
        let advance = |i: &mut usize, line: &mut usize, col: &mut usize| {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => advance(&mut i, &mut line, &mut col),
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    advance(&mut i, &mut line, &mut col);
                }
            }
            '(' => {
                push!(Tok::LParen, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            ')' => {
                push!(Tok::RParen, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            '{' => {
                push!(Tok::LBrace, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            '}' => {
                push!(Tok::RBrace, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            '[' => {
                push!(Tok::LBracket, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            ']' => {
                push!(Tok::RBracket, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            ',' => {
                push!(Tok::Comma, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            '.' => {
                push!(Tok::Dot, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            ':' => {
                push!(Tok::Colon, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            '=' => {
                push!(Tok::Equals, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            '<' => {
                advance(&mut i, &mut line, &mut col);
                if i < chars.len() && chars[i] == '-' {
                    advance(&mut i, &mut line, &mut col);
                    push!(Tok::Arrow, tl, tc);
                } else {
                    return Err(err_at(tl, tc, "expected `<-`"));
                }
            }
            '!' => {
                advance(&mut i, &mut line, &mut col);
                if i < chars.len() && chars[i] == '=' {
                    advance(&mut i, &mut line, &mut col);
                    push!(Tok::Neq, tl, tc);
                } else {
                    return Err(err_at(tl, tc, "expected `!=`"));
                }
            }
            '#' => {
                advance(&mut i, &mut line, &mut col);
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    advance(&mut i, &mut line, &mut col);
                }
                let word: String = chars[start..i].iter().collect();
                if word == "domain" {
                    push!(Tok::HashDomain, tl, tc);
                } else {
                    return Err(err_at(tl, tc, format!("unknown directive `#{word}`")));
                }
            }
            d if d.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(&mut i, &mut line, &mut col);
                }
                // A dot continues the number only when a digit follows
                // (otherwise it terminates the rule); same for fractions.
                if i + 1 < chars.len()
                    && (chars[i] == '.' || chars[i] == '/')
                    && chars[i + 1].is_ascii_digit()
                {
                    advance(&mut i, &mut line, &mut col);
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        advance(&mut i, &mut line, &mut col);
                    }
                }
                push!(Tok::Number(chars[start..i].iter().collect()), tl, tc);
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    advance(&mut i, &mut line, &mut col);
                }
                let word: String = chars[start..i].iter().collect();
                match word.as_str() {
                    "not_l" => push!(Tok::Negator(NegatorKind::Lukasiewicz), tl, tc),
                    "not_m" => push!(Tok::Negator(NegatorKind::Goedel), tl, tc),
                    "not_p" => {
                        return Err(SyntaxError::Product {
                            line: tl,
                            col: tc,
                            symbol: word,
                        })
                    }
                    "TL" => push!(Tok::Conn(TNormKind::Lukasiewicz), tl, tc),
                    "TM" => push!(Tok::Conn(TNormKind::Minimum), tl, tc),
                    "TP" => {
                        return Err(SyntaxError::Product {
                            line: tl,
                            col: tc,
                            symbol: word,
                        })
                    }
                    "SL" | "SM" | "SP" => {
                        return Err(SyntaxError::TConormBody {
                            line: tl,
                            col: tc,
                            symbol: word,
                        })
                    }
                    _ if word.starts_with(|c: char| c.is_ascii_uppercase()) => {
                        push!(Tok::Var(word), tl, tc)
                    }
                    _ => push!(Tok::Ident(word), tl, tc),
                }
            }
            other => return Err(err_at(tl, tc, format!("unexpected character `{other}`"))),
        }
    }
    toks.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(toks)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    rule_count: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek2(&self) -> &Token {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, SyntaxError> {
        let t = self.bump();
        if t.tok == want {
            Ok(t)
        } else {
            Err(err_at(
                t.line,
                t.col,
                format!("expected {what}, found {}", t.tok.describe()),
            ))
        }
    }

    fn number(&mut self) -> Result<TruthValue, SyntaxError> {
        let t = self.bump();
        match t.tok {
            Tok::Number(raw) => raw.parse().map_err(|e| match e {
                TruthError::OutOfRange(v) => SyntaxError::ConstantRange {
                    line: t.line,
                    col: t.col,
                    value: v,
                },
                other => err_at(t.line, t.col, other.to_string()),
            }),
            other => Err(err_at(
                t.line,
                t.col,
                format!("expected a constant, found {}", other.describe()),
            )),
        }
    }

    fn atom(&mut self) -> Result<SchematicAtom, SyntaxError> {
        let t = self.bump();
        let pred = match t.tok {
            Tok::Ident(s) => s,
            other => {
                return Err(err_at(
                    t.line,
                    t.col,
                    format!("expected an atom, found {}", other.describe()),
                ))
            }
        };
        let mut args = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.bump();
            loop {
                let a = self.bump();
                match a.tok {
                    Tok::Ident(s) => args.push(Term::Constant(s)),
                    Tok::Var(v) => args.push(Term::Variable(v)),
                    other => {
                        return Err(err_at(
                            a.line,
                            a.col,
                            format!(
                                "expected a constant or variable argument, found {}",
                                other.describe()
                            ),
                        ))
                    }
                }
                let sep = self.bump();
                match sep.tok {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    other => {
                        return Err(err_at(
                            sep.line,
                            sep.col,
                            format!("expected `,` or `)`, found {}", other.describe()),
                        ))
                    }
                }
            }
        }
        Ok(SchematicAtom { pred, args })
    }

    fn body_expr(&mut self) -> Result<BodyExpr, SyntaxError> {
        match &self.peek().tok {
            Tok::Conn(kind) => {
                let kind = *kind;
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let mut items = vec![self.body_expr()?];
                loop {
                    let sep = self.bump();
                    match sep.tok {
                        Tok::Comma => items.push(self.body_expr()?),
                        Tok::RParen => break,
                        other => {
                            return Err(err_at(
                                sep.line,
                                sep.col,
                                format!("expected `,` or `)`, found {}", other.describe()),
                            ))
                        }
                    }
                }
                Ok(BodyExpr::Apply(kind, items))
            }
            Tok::Negator(kind) => {
                let kind = *kind;
                self.bump();
                Ok(BodyExpr::Literal(SchematicLiteral::Negated(
                    kind,
                    self.atom()?,
                )))
            }
            Tok::Number(_) => Ok(BodyExpr::Literal(SchematicLiteral::Constant(
                self.number()?,
            ))),
            Tok::Ident(_) => Ok(BodyExpr::Literal(SchematicLiteral::Positive(self.atom()?))),
            other => {
                let t = self.peek();
                Err(err_at(
                    t.line,
                    t.col,
                    format!("expected a body expression, found {}", other.describe()),
                ))
            }
        }
    }

    fn rule(&mut self) -> Result<SchematicRule, SyntaxError> {
        self.rule_count += 1;
        let mut label = format!("r{}", self.rule_count);
        if matches!(self.peek().tok, Tok::Ident(_)) && self.peek2().tok == Tok::Colon {
            if let Tok::Ident(s) = self.bump().tok {
                label = s;
            }
            self.bump(); // colon
        }
        let head = match &self.peek().tok {
            Tok::Number(_) => SchematicHead::Constant(self.number()?),
            _ => SchematicHead::Atom(self.atom()?),
        };
        self.expect(Tok::Arrow, "`<-`")?;
        let mut weight = None;
        if self.peek().tok == Tok::LBracket {
            self.bump();
            weight = Some(self.number()?);
            self.expect(Tok::RBracket, "`]`")?;
        }
        let body = self.body_expr()?;
        let mut guards = Vec::new();
        while self.peek().tok == Tok::Comma {
            self.bump();
            let lhs = self.bump();
            let Tok::Var(l) = lhs.tok else {
                return Err(err_at(lhs.line, lhs.col, "guards have the form `X != Y`"));
            };
            self.expect(Tok::Neq, "`!=`")?;
            let rhs = self.bump();
            let Tok::Var(r) = rhs.tok else {
                return Err(err_at(rhs.line, rhs.col, "guards have the form `X != Y`"));
            };
            guards.push((l, r));
        }
        self.expect(Tok::Dot, "`.`")?;
        Ok(SchematicRule {
            label,
            head,
            weight,
            body,
            guards,
        })
    }

    fn domain(&mut self, domains: &mut BTreeMap<String, Vec<String>>) -> Result<(), SyntaxError> {
        self.bump(); // #domain
        let name = self.bump();
        let Tok::Var(var) = name.tok else {
            return Err(err_at(
                name.line,
                name.col,
                "#domain declares an uppercase variable",
            ));
        };
        self.expect(Tok::Equals, "`=`")?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut consts = Vec::new();
        loop {
            let t = self.bump();
            let Tok::Ident(c) = t.tok else {
                return Err(err_at(
                    t.line,
                    t.col,
                    "domain elements are lowercase constants",
                ));
            };
            if !consts.contains(&c) {
                consts.push(c);
            }
            let sep = self.bump();
            match sep.tok {
                Tok::Comma => continue,
                Tok::RBrace => break,
                other => {
                    return Err(err_at(
                        sep.line,
                        sep.col,
                        format!("expected `,` or `}}`, found {}", other.describe()),
                    ))
                }
            }
        }
        self.expect(Tok::Dot, "`.`")?;
        domains.insert(var, consts);
        Ok(())
    }
}

/// Parses a complete source text into a schematic program.
pub fn parse(text: &str) -> Result<SchematicProgram, SyntaxError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        rule_count: 0,
    };
    let mut program = SchematicProgram::default();
    loop {
        match p.peek().tok {
            Tok::Eof => break,
            Tok::HashDomain => p.domain(&mut program.domains)?,
            _ => {
                let rule = p.rule()?;
                program.rules.push(rule);
            }
        }
    }
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_fact() {
        let p = parse("r2: b <- 0.8.").unwrap();
        assert_eq!(p.rules.len(), 1);
        let r = &p.rules[0];
        assert_eq!(r.label, "r2");
        assert_eq!(
            r.head,
            SchematicHead::Atom(SchematicAtom {
                pred: "b".into(),
                args: vec![]
            })
        );
        assert_eq!(
            r.body,
            BodyExpr::Literal(SchematicLiteral::Constant(TruthValue::new(4, 5).unwrap()))
        );
    }

    #[test]
    fn parses_a_constraint_with_lukasiewicz_body() {
        let p = parse("r4: 0 <- TL(a, b).").unwrap();
        let r = &p.rules[0];
        assert_eq!(r.head, SchematicHead::Constant(TruthValue::zero()));
        match &r.body {
            BodyExpr::Apply(TNormKind::Lukasiewicz, items) => assert_eq!(items.len(), 2),
            other => panic!("unexpected body {other:?}"),
        }
    }

    #[test]
    fn empty_body_is_a_syntax_error() {
        let err = parse("x <- .").unwrap_err();
        assert!(matches!(err, SyntaxError::Parse { .. }), "{err}");
    }

    #[test]
    fn constants_outside_the_unit_interval_are_rejected() {
        assert!(matches!(
            parse("a <- 1.2."),
            Err(SyntaxError::ConstantRange { .. })
        ));
        assert!(matches!(
            parse("a <-[1.2] b."),
            Err(SyntaxError::ConstantRange { .. })
        ));
        assert!(matches!(
            parse("a <- 7/5."),
            Err(SyntaxError::ConstantRange { .. })
        ));
    }

    #[test]
    fn tconorms_and_product_connectives_are_rejected() {
        let err = parse("r1: b <- not_l a.\nr2: b <- SL(b, b).").unwrap_err();
        assert!(matches!(err, SyntaxError::TConormBody { symbol, .. } if symbol == "SL"));
        assert!(matches!(
            parse("a <- SM(b, c)."),
            Err(SyntaxError::TConormBody { .. })
        ));
        assert!(matches!(
            parse("a <- TP(b, c)."),
            Err(SyntaxError::Product { .. })
        ));
        assert!(matches!(
            parse("a <- not_p b."),
            Err(SyntaxError::Product { .. })
        ));
    }

    #[test]
    fn parses_domains_guards_weights_and_nested_bodies() {
        let src = "#domain T1 = {t1, t2}.\n#domain T2 = {t1, t2}.\n\
                   w: p(T1) <-[0.7] TL(q(T1, T2), TM(s, 0.5)), T1 != T2.";
        let p = parse(src).unwrap();
        assert_eq!(p.domains["T1"], vec!["t1", "t2"]);
        let r = &p.rules[0];
        assert_eq!(r.weight, Some(TruthValue::new(7, 10).unwrap()));
        assert_eq!(r.guards, vec![("T1".into(), "T2".into())]);
        match &r.body {
            BodyExpr::Apply(TNormKind::Lukasiewicz, items) => {
                assert!(matches!(items[1], BodyExpr::Apply(TNormKind::Minimum, _)));
            }
            other => panic!("unexpected body {other:?}"),
        }
    }

    #[test]
    fn unlabeled_rules_are_numbered_in_order() {
        let p = parse("a <- b.\nc <- d.").unwrap();
        assert_eq!(p.rules[0].label, "r1");
        assert_eq!(p.rules[1].label, "r2");
    }

    #[test]
    fn reports_positions() {
        let err = parse("a <- b.\nc <- ~d.").unwrap_err();
        match err {
            SyntaxError::Parse { line, col, .. } => {
                assert_eq!(line, 2);
                assert_eq!(col, 6);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    proptest::proptest! {
        #[test]
        fn arbitrary_input_never_panics(input in "[ -~\t\n]{0,200}") {
            let _ = parse(&input);
        }

        #[test]
        fn arbitrary_unicode_never_panics(input in "\\PC{0,80}") {
            let _ = parse(&input);
        }
    }
}
