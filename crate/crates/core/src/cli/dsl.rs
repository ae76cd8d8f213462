//! The set-expression language: a hand-written lexer and recursive-descent parser.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rational::{parse_q, Q};
use crate::schedule::{IntSchedule, RateSchedule};
use crate::sets::expr::*;
use crate::word::{parse_word, Lasso, Word};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Num(chars[start..i].iter().collect())
        } else if c.is_alphabetic() {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            if s == "ε" {
                Tok::Sym('_')
            } else {
                Tok::Ident(s)
            }
        } else if "(){}[],;|&=*+/@_".contains(c) {
            i += 1;
            Tok::Sym(c)
        } else {
            return Err(Error::Parse(format!("{l0}:{c0}: unexpected character {c:?}")));
        };
        col += i - start;
        out.push(Token { tok, line: l0, col: c0 });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Bindings followed by an optional final query expression.
#[derive(Clone, Debug)]
pub struct DslProgram {
    pub bindings: Vec<(String, Expr)>,
    pub query: Option<Expr>,
}

impl DslProgram {
    /// The query, or the last binding when there is none.
    pub fn subject(&self) -> Option<Expr> {
        self.query.clone().or_else(|| self.bindings.last().map(|(_, e)| e.clone()))
    }

    pub fn get(&self, name: &str) -> Option<&Expr> {
        self.bindings.iter().rev().find(|(n, _)| n == name).map(|(_, e)| e)
    }
}

const KEYWORDS: [&str; 20] = [
    "empty", "full", "clopen", "point", "O", "Ostar", "pad", "cat", "compl", "oplus", "dext", "dbl", "rake", "rakep",
    "plus", "sum", "nat", "flat", "wtree", "default",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    env: HashMap<String, Expr>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn err<T>(&self, msg: impl AsRef<str>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::Parse(format!("{}:{}: {}", t.line, t.col, msg.as_ref())))
    }

    /// Attach the current position to constructor errors.
    fn at<T>(&self, r: Result<T>) -> Result<T> {
        let t = &self.toks[self.pos.saturating_sub(1)];
        r.map_err(|e| match e {
            Error::Domain(m) => Error::Invariant(format!("{}:{}: {m}", t.line, t.col)),
            Error::Invariant(m) => Error::Invariant(format!("{}:{}: {m}", t.line, t.col)),
            other => other,
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.is_sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`, found {}", self.describe()))
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(s) => format!("`{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn keyword(&mut self, k: &str) -> Result<()> {
        match self.peek() {
            Tok::Ident(s) if s == k => {
                self.bump();
                Ok(())
            }
            _ => self.err(format!("expected `{k}`, found {}", self.describe())),
        }
    }

    fn nat(&mut self) -> Result<u64> {
        match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                s.parse().or_else(|_| self.err(format!("number `{s}` is too large")))
            }
            _ => self.err(format!("expected a number, found {}", self.describe())),
        }
    }

    fn word(&mut self) -> Result<Word> {
        match self.peek().clone() {
            Tok::Sym('_') => {
                self.bump();
                Ok(Vec::new())
            }
            Tok::Num(s) => match parse_word(&s) {
                Ok(w) => {
                    self.bump();
                    Ok(w)
                }
                Err(_) => self.err(format!("`{s}` is not a binary word")),
            },
            _ => self.err(format!("expected a binary word, found {}", self.describe())),
        }
    }

    fn rat(&mut self) -> Result<Q> {
        let n = match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                s
            }
            _ => return self.err(format!("expected a rational, found {}", self.describe())),
        };
        let text = if self.eat('/') {
            match self.bump() {
                Tok::Num(d) => format!("{n}/{d}"),
                _ => return self.err("expected a denominator"),
            }
        } else {
            n
        };
        let q = parse_q(&text);
        self.at(q)
    }

    fn lasso(&mut self) -> Result<Lasso> {
        let prefix = if self.is_sym('(') { Vec::new() } else { self.word()? };
        self.expect('(')?;
        let cycle = self.word()?;
        self.expect(')')?;
        let l = Lasso::new(prefix, cycle);
        self.at(l)
    }

    /// `n*a+b`, `[v,…]` or `[v,…]+n*a+b`.
    fn int_sched(&mut self) -> Result<IntSchedule> {
        let mut head = Vec::new();
        if self.eat('[') {
            loop {
                head.push(self.nat()?);
                if !self.eat(',') {
                    break;
                }
            }
            self.expect(']')?;
            if !self.eat('+') {
                let s = IntSchedule::list(head);
                return self.at(s);
            }
        }
        self.keyword("n")?;
        self.expect('*')?;
        let a = self.nat()?;
        self.expect('+')?;
        let b = self.nat()?;
        let s = IntSchedule::new(head, a, b);
        self.at(s)
    }

    /// `default` or `[q,…]`, optionally followed by `@shift`.
    fn rate_sched(&mut self) -> Result<RateSchedule> {
        let base = if self.eat('[') {
            let mut vals = Vec::new();
            loop {
                vals.push(self.rat()?);
                if !self.eat(',') {
                    break;
                }
            }
            self.expect(']')?;
            let s = RateSchedule::explicit(vals);
            self.at(s)?
        } else {
            self.keyword("default")?;
            RateSchedule::default()
        };
        Ok(if self.eat('@') { base.shifted(self.nat()? as usize) } else { base })
    }

    fn opt_sched(&mut self) -> Result<RateSchedule> {
        if self.eat(';') {
            self.rate_sched()
        } else {
            Ok(RateSchedule::default())
        }
    }

    fn expr_list(&mut self) -> Result<Vec<Expr>> {
        let mut v = vec![self.expr()?];
        while self.eat(',') {
            v.push(self.expr()?);
        }
        Ok(v)
    }

    fn family(&mut self) -> Result<SetFamily> {
        let mut head = self.expr_list()?;
        if self.eat(';') {
            match self.peek().clone() {
                Tok::Ident(k) if k == "const" => {
                    self.bump();
                    let e = self.expr()?;
                    return self.at(SetFamily::new(head, FamilyTail::Const(e)));
                }
                Tok::Ident(k) if k == "cycle" => {
                    self.bump();
                    if self.is_sym(')') || *self.peek() == Tok::Eof {
                        return self.at(SetFamily::new(Vec::new(), FamilyTail::Periodic(head)));
                    }
                    let cyc = self.expr_list()?;
                    return self.at(SetFamily::new(head, FamilyTail::Periodic(cyc)));
                }
                _ => return self.err(format!("expected `const` or `cycle`, found {}", self.describe())),
            }
        }
        let last = head.pop().expect("nonempty list");
        self.at(SetFamily::new(head, FamilyTail::Const(last)))
    }

    fn clopen_body(&mut self) -> Result<Expr> {
        self.expect('{')?;
        let mut words = Vec::new();
        if !self.is_sym('}') {
            loop {
                words.push(self.word()?);
                if !self.eat(',') {
                    break;
                }
            }
        }
        self.expect('}')?;
        Ok(clopen_words(words))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut a = self.conj()?;
        while self.eat('|') {
            let b = self.conj()?;
            a = union(a, b);
        }
        Ok(a)
    }

    fn conj(&mut self) -> Result<Expr> {
        let mut a = self.unary()?;
        while self.eat('&') {
            let b = self.unary()?;
            a = intersect(a, b);
        }
        Ok(a)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Ident(k) if k == "compl" => {
                self.bump();
                Ok(complement(self.unary()?))
            }
            Tok::Ident(k) if k == "dbl" => {
                self.bump();
                Ok(double(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        if self.eat('(') {
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(e);
        }
        let name = match self.peek().clone() {
            Tok::Ident(s) => s,
            _ => return self.err(format!("expected an expression, found {}", self.describe())),
        };
        self.bump();
        let e = match name.as_str() {
            "empty" => empty(),
            "full" => full(),
            "clopen" => self.clopen_body()?,
            "point" => {
                self.expect('(')?;
                let x = self.lasso()?;
                self.expect(')')?;
                point(x)
            }
            "O" | "Ostar" => {
                self.expect('(')?;
                let r = self.rat()?;
                self.expect(')')?;
                let e = if name == "O" { make_o(r) } else { make_ostar(r) };
                self.at(e)?
            }
            "pad" => {
                self.expect('(')?;
                let n = self.nat()? as usize;
                self.expect(',')?;
                let a = self.expr()?;
                self.expect(')')?;
                self.at(pad(n, a))?
            }
            "cat" => {
                self.expect('(')?;
                let w = self.word()?;
                self.expect(',')?;
                let a = self.expr()?;
                self.expect(')')?;
                concat(&w, a)
            }
            "oplus" => {
                self.expect('(')?;
                let a = self.expr()?;
                self.expect(',')?;
                let b = self.expr()?;
                self.expect(')')?;
                oplus(a, b)
            }
            "dext" => {
                self.expect('(')?;
                let d = self.expr()?;
                let Some(d) = as_clopen(&d) else { return self.err("dext needs a clopen first argument") };
                self.expect(',')?;
                let t = self.word()?;
                self.expect(',')?;
                let b = self.expr()?;
                self.expect(')')?;
                self.at(dext(d, t, b))?
            }
            "rake" | "rakep" => {
                self.expect('(')?;
                let f = self.int_sched()?;
                self.expect(';')?;
                let fam = self.family()?;
                self.expect(')')?;
                self.at(rake(name == "rakep", f, fam))?
            }
            "plus" => {
                self.expect('(')?;
                let a = self.expr()?;
                let r = if self.eat(',') { self.rat()? } else { Q::from_integer(0.into()) };
                let s = self.opt_sched()?;
                self.expect(')')?;
                self.at(plus(a, r, s))?
            }
            "sum" => {
                self.expect('(')?;
                let b = self.expr()?;
                self.expect(',')?;
                let a = self.expr()?;
                let r = if self.eat(',') { self.rat()? } else { Q::from_integer(0.into()) };
                let s = self.opt_sched()?;
                self.expect(')')?;
                self.at(sum(b, a, r, s))?
            }
            "nat" | "flat" => {
                self.expect('(')?;
                let a = self.expr()?;
                let s = self.opt_sched()?;
                self.expect(')')?;
                self.at(if name == "nat" { natural(a, s) } else { flat(a, s) })?
            }
            "wtree" => {
                self.expect('(')?;
                let t = self.expr()?;
                self.expect(')')?;
                self.at(wtree(t))?
            }
            _ => match self.env.get(&name) {
                Some(e) => e.clone(),
                None => {
                    self.pos -= 1;
                    return self.err(format!("unbound name `{name}`"));
                }
            },
        };
        Ok(e)
    }

    fn program(&mut self) -> Result<DslProgram> {
        let mut bindings = Vec::new();
        let mut query = None;
        while *self.peek() != Tok::Eof {
            if let (Tok::Ident(n), Tok::Sym('=')) = (self.peek().clone(), self.peek2().clone()) {
                if KEYWORDS.contains(&n.as_str()) {
                    return self.err(format!("`{n}` is reserved and cannot be bound"));
                }
                self.bump();
                self.bump();
                let e = self.expr()?;
                self.env.insert(n.clone(), e.clone());
                bindings.push((n, e));
                if !self.eat(';') && *self.peek() != Tok::Eof {
                    return self.err(format!("expected `;` after binding, found {}", self.describe()));
                }
                continue;
            }
            query = Some(self.expr()?);
            self.eat(';');
            if *self.peek() != Tok::Eof {
                return self.err(format!("unexpected {} after the query", self.describe()));
            }
        }
        Ok(DslProgram { bindings, query })
    }
}

pub fn parse_dsl(text: &str) -> Result<DslProgram> {
    let toks = lex(text)?;
    Parser { toks, pos: 0, env: HashMap::new() }.program()
}

/// The subject expression of a program.
pub fn parse_expr(text: &str) -> Result<Expr> {
    parse_dsl(text)?.subject().ok_or_else(|| Error::Parse("1:1: empty program".into()))
}

fn parse_with<T>(text: &str, f: impl FnOnce(&mut Parser) -> Result<T>) -> Result<T> {
    let mut p = Parser { toks: lex(text)?, pos: 0, env: HashMap::new() };
    let v = f(&mut p)?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {}", p.describe()));
    }
    Ok(v)
}

/// An integer schedule on its own, e.g. `n*2+1`.
pub fn parse_int_sched(text: &str) -> Result<IntSchedule> {
    parse_with(text, Parser::int_sched)
}

/// A set family on its own, e.g. `clopen{0}, full; cycle`.
pub fn parse_family(text: &str) -> Result<SetFamily> {
    parse_with(text, Parser::family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn rake_binding() {
        let p = parse_dsl("A = rake(n*1+1; full);\nA").unwrap();
        let want = rake(false, IntSchedule::affine(1, 1).unwrap(), SetFamily::constant(full())).unwrap();
        assert_eq!(p.query.as_ref().unwrap(), &want);
        assert_eq!(p.get("A").unwrap(), &want);
    }

    #[test]
    fn plus_rate() {
        let e = parse_expr("plus(clopen{0}, 1/2)").unwrap();
        assert_eq!(e, plus(clopen_words([vec![0]]), q(1, 2), RateSchedule::default()).unwrap());
    }

    #[test]
    fn dext_overlap_rejected() {
        let e = parse_expr("dext(clopen{0}, 01, full)").unwrap_err();
        assert!(matches!(e, Error::Invariant(_)), "{e}");
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_expr("A = full;\n  B | A").unwrap_err().to_string();
        assert!(e.contains("2:3") && e.contains("unbound"), "{e}");
        let e = parse_expr("clopen{2}").unwrap_err().to_string();
        assert!(e.contains("1:8"), "{e}");
    }

    #[test]
    fn precedence() {
        let e = parse_expr("clopen{0} | clopen{10} & compl clopen{1}").unwrap();
        let want = union(clopen_words([vec![0]]), intersect(clopen_words([vec![1, 0]]), complement(clopen_words([vec![1]]))));
        assert_eq!(e, want);
    }

    #[test]
    fn families_round_trip() {
        for s in ["rake([2,3]+n*1+1; clopen{0}; cycle clopen{1}, full)", "rakep(n*0+1; clopen{0}, clopen{1}; cycle)"] {
            let e = parse_expr(s).unwrap();
            assert_eq!(parse_expr(&serialize(&e)).unwrap(), e);
        }
    }
}
