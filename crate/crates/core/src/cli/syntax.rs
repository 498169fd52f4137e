//! Lexer, parser and canonical printer for the input language.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

/// An identifier with its source position. Equality ignores the position.
#[derive(Debug, Clone, Eq)]
pub struct Name {
    pub text: String,
    pub pos: Pos,
}

impl Name {
    pub fn new(text: impl Into<String>) -> Self {
        Name {
            text: text.into(),
            pos: Pos::default(),
        }
    }
}

impl PartialEq for Name {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    Ident(Name),
    Paren(WordExpr),
    /// `[u, v]`, read as `u⁻¹ v⁻¹ u v`.
    Commutator(WordExpr, WordExpr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub atom: Atom,
    pub exp: Option<BigInt>,
}

/// Juxtaposed items, read as their product. Equality ignores the position.
#[derive(Debug, Clone, Eq)]
pub struct WordExpr {
    pub items: Vec<Item>,
    pub pos: Pos,
}

impl PartialEq for WordExpr {
    fn eq(&self, other: &Self) -> bool {
        self.items == other.items
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermGen {
    pub name: Option<Name>,
    /// 1-based cycles; an empty list is the identity.
    pub cycles: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupDef {
    Finite {
        table: Vec<Vec<usize>>,
        labels: Option<Vec<Name>>,
    },
    Perms(Vec<PermGen>),
    Free(Vec<Name>),
    Presented {
        gens: Vec<Name>,
        relators: Vec<WordExpr>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    /// `group` declares a factor; `overgroup` declares a group used only as an embedding target.
    Group { name: Name, def: GroupDef, overgroup: bool },
    Assert { group: Name, property: Name },
    Vars(Vec<Name>),
    Eq(WordExpr),
    Subgroup { name: Name, of: Name, gens: Vec<WordExpr> },
    Embed { source: Name, target: Name, images: Vec<(Name, WordExpr)> },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Syntax {
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(char),
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump(&mut chars);
            }
        } else if c.is_whitespace() {
            bump(&mut chars);
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while chars.peek().is_some_and(|&c| c.is_ascii_alphanumeric() || c == '_') {
                s.push(bump(&mut chars).unwrap());
            }
            out.push((Tok::Ident(s), pos));
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                s.push(bump(&mut chars).unwrap());
            }
            out.push((Tok::Int(s.parse().expect("digits")), pos));
        } else if c == '-' {
            bump(&mut chars);
            if chars.peek() == Some(&'>') {
                bump(&mut chars);
                out.push((Tok::Arrow, pos));
            } else {
                out.push((Tok::Sym('-'), pos));
            }
        } else if "={}[]()<>|,;:^".contains(c) {
            bump(&mut chars);
            out.push((Tok::Sym(c), pos));
        } else {
            return Err(ParseError::new(pos, format!("unexpected character `{c}`")));
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::new(self.pos(), format!("expected {expected}, found {}", self.peek())))
    }

    fn is_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.is_sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.error(&format!("`{c}`"))
        }
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn expect_keyword(&mut self, k: &str) -> Result<(), ParseError> {
        if self.is_keyword(k) {
            self.next();
            Ok(())
        } else {
            self.error(&format!("`{k}`"))
        }
    }

    fn ident(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Ident(text) => {
                let pos = self.next().1;
                Ok(Name { text, pos })
            }
            _ => self.error("an identifier"),
        }
    }

    fn nat(&mut self) -> Result<BigInt, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(n)
            }
            _ => self.error("an integer"),
        }
    }

    fn small(&mut self) -> Result<usize, ParseError> {
        let pos = self.pos();
        let n = self.nat()?;
        usize::try_from(n).map_err(|_| ParseError::new(pos, "integer too large"))
    }

    fn int(&mut self) -> Result<BigInt, ParseError> {
        let neg = self.eat_sym('-');
        let n = self.nat()?;
        Ok(if neg { -n } else { n })
    }

    fn separated<T>(&mut self, close: char, mut item: impl FnMut(&mut Self) -> Result<T, ParseError>) -> Result<Vec<T>, ParseError> {
        let mut out = Vec::new();
        if self.is_sym(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if !self.eat_sym(',') {
                return Ok(out);
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_)) || self.is_sym('(') || self.is_sym('[')
    }

    fn word(&mut self) -> Result<WordExpr, ParseError> {
        let pos = self.pos();
        if !self.starts_atom() {
            return self.error("a word");
        }
        let mut items = Vec::new();
        while self.starts_atom() {
            let atom = if self.eat_sym('(') {
                let w = self.word()?;
                self.expect_sym(')')?;
                Atom::Paren(w)
            } else if self.eat_sym('[') {
                let u = self.word()?;
                self.expect_sym(',')?;
                let v = self.word()?;
                self.expect_sym(']')?;
                Atom::Commutator(u, v)
            } else {
                Atom::Ident(self.ident()?)
            };
            let exp = if self.eat_sym('^') { Some(self.int()?) } else { None };
            items.push(Item { atom, exp });
        }
        Ok(WordExpr { items, pos })
    }

    fn perm_gen(&mut self) -> Result<PermGen, ParseError> {
        let name = if matches!(self.peek(), Tok::Ident(_)) {
            let n = self.ident()?;
            self.expect_sym('=')?;
            Some(n)
        } else {
            None
        };
        if !self.is_sym('(') {
            return self.error("a cycle `(…)`");
        }
        let mut cycles = Vec::new();
        while self.eat_sym('(') {
            let mut cycle = Vec::new();
            while !self.is_sym(')') {
                let pos = self.pos();
                let p = self.small()?;
                if p == 0 {
                    return Err(ParseError::new(pos, "permutation points are numbered from 1"));
                }
                cycle.push(p);
            }
            self.expect_sym(')')?;
            if !cycle.is_empty() {
                cycles.push(cycle);
            }
        }
        Ok(PermGen { name, cycles })
    }

    fn group_def(&mut self) -> Result<GroupDef, ParseError> {
        if self.is_keyword("finite") {
            self.next();
            self.expect_sym('{')?;
            self.expect_keyword("table")?;
            self.expect_sym('=')?;
            self.expect_sym('[')?;
            let table = self.separated(']', |p| {
                p.expect_sym('[')?;
                let row = p.separated(']', Self::small)?;
                p.expect_sym(']')?;
                Ok(row)
            })?;
            self.expect_sym(']')?;
            let mut labels = None;
            if self.eat_sym(';') && self.is_keyword("labels") {
                self.next();
                self.expect_sym('=')?;
                self.expect_sym('[')?;
                labels = Some(self.separated(']', Self::ident)?);
                self.expect_sym(']')?;
                self.eat_sym(';');
            }
            self.expect_sym('}')?;
            Ok(GroupDef::Finite { table, labels })
        } else if self.is_keyword("perms") {
            self.next();
            self.expect_sym('{')?;
            let gens = self.separated('}', Self::perm_gen)?;
            self.expect_sym('}')?;
            Ok(GroupDef::Perms(gens))
        } else if self.is_keyword("free") {
            self.next();
            self.expect_sym('{')?;
            let gens = self.separated('}', Self::ident)?;
            self.expect_sym('}')?;
            Ok(GroupDef::Free(gens))
        } else if self.is_keyword("presented") {
            self.next();
            self.expect_sym('<')?;
            let gens = self.separated('|', Self::ident)?;
            self.expect_sym('|')?;
            let relators = self.separated('>', Self::word)?;
            self.expect_sym('>')?;
            Ok(GroupDef::Presented { gens, relators })
        } else {
            self.error("`finite`, `perms`, `free` or `presented`")
        }
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let Tok::Ident(k) = self.peek().clone() else {
            return self.error("a statement");
        };
        let st = match k.as_str() {
            "group" | "overgroup" => {
                self.next();
                let name = self.ident()?;
                self.expect_sym('=')?;
                let def = self.group_def()?;
                Statement::Group {
                    name,
                    def,
                    overgroup: k == "overgroup",
                }
            }
            "assert" => {
                self.next();
                let group = self.ident()?;
                let property = self.ident()?;
                Statement::Assert { group, property }
            }
            "vars" => {
                self.next();
                let mut names = vec![self.ident()?];
                while self.eat_sym(',') {
                    names.push(self.ident()?);
                }
                Statement::Vars(names)
            }
            "eq" => {
                self.next();
                self.expect_sym(':')?;
                let w = self.word()?;
                self.expect_sym('=')?;
                if *self.peek() != Tok::Int(BigInt::from(1)) {
                    return self.error("`1`");
                }
                self.next();
                Statement::Eq(w)
            }
            "subgroup" => {
                self.next();
                let name = self.ident()?;
                self.expect_keyword("of")?;
                let of = self.ident()?;
                self.expect_sym('=')?;
                self.expect_sym('<')?;
                let gens = self.separated('>', Self::word)?;
                self.expect_sym('>')?;
                Statement::Subgroup { name, of, gens }
            }
            "embed" => {
                self.next();
                let source = self.ident()?;
                if *self.peek() != Tok::Arrow {
                    return self.error("`->`");
                }
                self.next();
                let target = self.ident()?;
                self.expect_sym('{')?;
                let images = self.separated('}', |p| {
                    let from = p.ident()?;
                    if *p.peek() != Tok::Arrow {
                        return p.error("`->`");
                    }
                    p.next();
                    Ok((from, p.word()?))
                })?;
                self.expect_sym('}')?;
                Statement::Embed { source, target, images }
            }
            _ => return self.error("`group`, `overgroup`, `assert`, `vars`, `eq`, `subgroup` or `embed`"),
        };
        self.eat_sym(';');
        Ok(st)
    }
}

/// Parses the statements of a document without resolving names.
pub fn parse_syntax(text: &str) -> Result<Syntax, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let mut statements = Vec::new();
    while *p.peek() != Tok::Eof {
        statements.push(p.statement()?);
    }
    Ok(Syntax { statements })
}

impl fmt::Display for WordExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match &item.atom {
                Atom::Ident(n) => write!(f, "{}", n.text)?,
                Atom::Paren(w) => write!(f, "({w})")?,
                Atom::Commutator(u, v) => write!(f, "[{u}, {v}]")?,
            }
            if let Some(e) = &item.exp {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

fn join<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
    xs.iter().map(f).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for GroupDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupDef::Finite { table, labels } => {
                let rows = join(table, |r| format!("[{}]", join(r, |x| x.to_string())));
                write!(f, "finite {{ table = [{rows}]")?;
                if let Some(ls) = labels {
                    write!(f, "; labels = [{}]", join(ls, |n| n.text.clone()))?;
                }
                write!(f, " }}")
            }
            GroupDef::Perms(gens) => {
                let gens = join(gens, |g| {
                    let cycles: String = if g.cycles.is_empty() {
                        "()".into()
                    } else {
                        g.cycles.iter().map(|c| format!("({})", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))).collect()
                    };
                    match &g.name {
                        Some(n) => format!("{} = {cycles}", n.text),
                        None => cycles,
                    }
                });
                write!(f, "perms {{ {gens} }}")
            }
            GroupDef::Free(gens) => write!(f, "free {{ {} }}", join(gens, |n| n.text.clone())),
            GroupDef::Presented { gens, relators } => {
                let gens = join(gens, |n| n.text.clone());
                if relators.is_empty() {
                    write!(f, "presented < {gens} | >")
                } else {
                    write!(f, "presented < {gens} | {} >", join(relators, |w| w.to_string()))
                }
            }
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Group { name, def, overgroup } => {
                let k = if *overgroup { "overgroup" } else { "group" };
                write!(f, "{k} {} = {def}", name.text)
            }
            Statement::Assert { group, property } => write!(f, "assert {} {};", group.text, property.text),
            Statement::Vars(names) => write!(f, "vars {};", join(names, |n| n.text.clone())),
            Statement::Eq(w) => write!(f, "eq: {w} = 1;"),
            Statement::Subgroup { name, of, gens } => {
                write!(f, "subgroup {} of {} = < {} >;", name.text, of.text, join(gens, |w| w.to_string()))
            }
            Statement::Embed { source, target, images } => write!(
                f,
                "embed {} -> {} {{ {} }};",
                source.text,
                target.text,
                join(images, |(n, w)| format!("{} -> {w}", n.text))
            ),
        }
    }
}

/// The canonical form: one statement per line.
impl fmt::Display for Syntax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_statements() {
        let s = parse_syntax(
            "# comment\ngroup G = finite { table = [[0, 1], [1, 0]]; labels = [e, a] }\n\
             group S = perms { r = (1 2 3), (1 2)(3 4) }\ngroup F = free { c, d }\n\
             group P = presented < a, b | a^2, b^3 >\nassert F locally_indicable;\nvars x, y\n\
             eq: [x y, a]^-2 (x a)^3 = 1;\nsubgroup A of G = < a >;\nembed G -> S { a -> r }",
        )
        .unwrap();
        assert_eq!(s.statements.len(), 9);
        match &s.statements[6] {
            Statement::Eq(w) => {
                assert_eq!(w.items.len(), 2);
                assert_eq!(w.items[0].exp, Some(BigInt::from(-2)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_syntax("vars x;\neq: [x, = 1;").unwrap_err();
        assert_eq!(e.pos, Pos { line: 2, col: 9 });
        assert!(e.message.contains("expected a word"), "{e}");
        let e = parse_syntax("eq: x = 2;").unwrap_err();
        assert_eq!(e.pos, Pos { line: 1, col: 9 });
        let e = parse_syntax("vars x;\n  $").unwrap_err();
        assert_eq!(e.pos, Pos { line: 2, col: 3 });
    }

    #[test]
    fn printer_round_trips() {
        let text = "group G = perms { a = (1 2), (1 2 3)(4 5), () }\nvars x,y;eq: x x^-1 = 1\n\
                    eq: [x a, (y)^2]^2022 a = 1;group P = presented < t | >";
        let s = parse_syntax(text).unwrap();
        let printed = s.to_string();
        assert_eq!(parse_syntax(&printed).unwrap(), s);
        assert_eq!(parse_syntax(&printed).unwrap().to_string(), printed);
    }
}
