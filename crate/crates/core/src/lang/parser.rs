//! Lexer, recursive-descent parser and semantic checks for `.ev` sources.
//!
//! ```text
//! program  := (global | function)*
//! global   := "int" IDENT ("=" expr)? ";"
//! function := ("int" | "void") IDENT "(" (("int" IDENT ("," "int" IDENT)*) | "void")? ")" block
//! block    := "{" stmt* "}"
//! stmt     := "int" IDENT ("=" rhs)? ";"
//!           | IDENT "=" rhs ";"
//!           | IDENT "(" args? ")" ";"
//!           | "if" "(" cond ")" stmt ("else" stmt)?
//!           | "while" "(" cond ")" stmt
//!           | "break" ";" | "continue" ";" | "return" expr? ";"
//!           | block | ";"
//! rhs      := IDENT "(" args? ")" | expr
//! cond     := conj ("||" conj)*
//! conj     := neg ("&&" neg)*
//! neg      := "!" neg | "(" cond ")" | expr (CMP expr)?
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/" | "%") unary)*
//! unary    := "-" unary | INT | IDENT | "nondet" "(" ")" | "(" expr ")"
//! ```
//!
//! `error()` and `nondet()` are intrinsics. A bare expression used as a
//! condition means `expr != 0`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;

use super::ast::*;
use super::error::LangError;
use super::ops::{BinOp, CmpOp, Expr, Pred, Var};

pub const ERROR_INTRINSIC: &str = "error";
pub const NONDET_INTRINSIC: &str = "nondet";

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    KwInt,
    KwVoid,
    KwIf,
    KwElse,
    KwWhile,
    KwBreak,
    KwContinue,
    KwReturn,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Comma,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Cmp(CmpOp),
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.spelling()),
        }
    }

    fn spelling(&self) -> &'static str {
        match self {
            Tok::KwInt => "int",
            Tok::KwVoid => "void",
            Tok::KwIf => "if",
            Tok::KwElse => "else",
            Tok::KwWhile => "while",
            Tok::KwBreak => "break",
            Tok::KwContinue => "continue",
            Tok::KwReturn => "return",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Assign => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::Cmp(op) => op.symbol(),
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            Tok::Int(_) | Tok::Ident(_) | Tok::Eof => "",
        }
    }
}

fn syntax(pos: Pos, message: impl Into<String>) -> LangError {
    LangError::Syntax {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    }
}

fn lex(source: &str) -> Result<Vec<(Tok, Pos)>, LangError> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(syntax(pos, "unterminated block comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let text: String = chars[start..i].iter().collect();
            // digits only, cannot fail
            out.push((Tok::Int(text.parse().unwrap()), pos));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.as_str() {
                "int" => Tok::KwInt,
                "void" => Tok::KwVoid,
                "if" => Tok::KwIf,
                "else" => Tok::KwElse,
                "while" => Tok::KwWhile,
                "break" => Tok::KwBreak,
                "continue" => Tok::KwContinue,
                "return" => Tok::KwReturn,
                _ => Tok::Ident(word),
            };
            out.push((tok, pos));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            ('=', Some('=')) => (Tok::Cmp(CmpOp::Eq), 2),
            ('!', Some('=')) => (Tok::Cmp(CmpOp::Ne), 2),
            ('<', Some('=')) => (Tok::Cmp(CmpOp::Le), 2),
            ('>', Some('=')) => (Tok::Cmp(CmpOp::Ge), 2),
            ('&', Some('&')) => (Tok::AndAnd, 2),
            ('|', Some('|')) => (Tok::OrOr, 2),
            ('<', _) => (Tok::Cmp(CmpOp::Lt), 1),
            ('>', _) => (Tok::Cmp(CmpOp::Gt), 1),
            ('=', _) => (Tok::Assign, 1),
            ('!', _) => (Tok::Bang, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (';', _) => (Tok::Semi, 1),
            (',', _) => (Tok::Comma, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('%', _) => (Tok::Percent, 1),
            _ => return Err(syntax(pos, format!("unexpected character `{c}`"))),
        };
        for _ in 0..width {
            bump!();
        }
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

type PResult<T> = Result<T, LangError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.at + offset).min(self.toks.len() - 1);
        &self.toks[idx].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn advance(&mut self) -> Tok {
        let tok = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(syntax(
                self.pos(),
                format!(
                    "expected `{}`, found {}",
                    tok.spelling(),
                    self.peek().describe()
                ),
            ))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.advance() {
            Tok::Ident(name) => Ok(name),
            other => {
                self.at -= 1;
                Err(syntax(
                    self.pos(),
                    format!("expected identifier, found {}", other.describe()),
                ))
            }
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut globals = Vec::new();
        let mut functions = Vec::new();
        while *self.peek() != Tok::Eof {
            let pos = self.pos();
            let returns_int = match self.advance() {
                Tok::KwInt => true,
                Tok::KwVoid => false,
                other => {
                    return Err(syntax(
                        pos,
                        format!("expected declaration, found {}", other.describe()),
                    ))
                }
            };
            let name = self.ident()?;
            if *self.peek() == Tok::LParen {
                functions.push(self.function(name, returns_int, pos)?);
            } else {
                if !returns_int {
                    return Err(syntax(pos, "variables must have type `int`"));
                }
                let init = if self.eat(&Tok::Assign) {
                    Some(self.expr()?)
                } else {
                    None
                };
                self.expect(Tok::Semi)?;
                globals.push(GlobalDecl { name, init, pos });
            }
        }
        Ok(Program { globals, functions })
    }

    fn function(&mut self, name: String, returns_int: bool, pos: Pos) -> PResult<Function> {
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() == Tok::KwVoid && *self.peek_at(1) == Tok::RParen {
            self.advance();
        } else if *self.peek() != Tok::RParen {
            loop {
                self.expect(Tok::KwInt)?;
                params.push(self.ident()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        let body = self.block()?;
        Ok(Function {
            name,
            returns_int,
            params,
            body,
            pos,
        })
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return Err(syntax(self.pos(), "unexpected end of input, expected `}`"));
            }
            if let Some(s) = self.stmt()? {
                stmts.push(s);
            }
        }
        self.advance();
        Ok(stmts)
    }

    /// Parses a statement used as a branch body, wrapping it as a block.
    fn body(&mut self) -> PResult<Vec<Stmt>> {
        if *self.peek() == Tok::LBrace {
            self.block()
        } else {
            Ok(self.stmt()?.into_iter().collect())
        }
    }

    fn stmt(&mut self) -> PResult<Option<Stmt>> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Semi => {
                self.advance();
                return Ok(None);
            }
            Tok::LBrace => StmtKind::Block(self.block()?),
            Tok::KwInt => {
                self.advance();
                let name = self.ident()?;
                let init = if self.eat(&Tok::Assign) {
                    Some(self.rhs()?)
                } else {
                    None
                };
                self.expect(Tok::Semi)?;
                StmtKind::Decl { name, init }
            }
            Tok::KwIf => {
                self.advance();
                self.expect(Tok::LParen)?;
                let cond = self.cond()?;
                self.expect(Tok::RParen)?;
                let then_branch = self.body()?;
                let else_branch = if self.eat(&Tok::KwElse) {
                    Some(self.body()?)
                } else {
                    None
                };
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            Tok::KwWhile => {
                self.advance();
                self.expect(Tok::LParen)?;
                let cond = self.cond()?;
                self.expect(Tok::RParen)?;
                StmtKind::While {
                    cond,
                    body: self.body()?,
                }
            }
            Tok::KwBreak => {
                self.advance();
                self.expect(Tok::Semi)?;
                StmtKind::Break
            }
            Tok::KwContinue => {
                self.advance();
                self.expect(Tok::Semi)?;
                StmtKind::Continue
            }
            Tok::KwReturn => {
                self.advance();
                let value = if *self.peek() == Tok::Semi {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(Tok::Semi)?;
                StmtKind::Return(value)
            }
            Tok::Ident(name) => {
                self.advance();
                if self.eat(&Tok::Assign) {
                    let value = self.rhs()?;
                    self.expect(Tok::Semi)?;
                    StmtKind::Assign {
                        target: name,
                        value,
                    }
                } else if *self.peek() == Tok::LParen {
                    let args = self.args()?;
                    self.expect(Tok::Semi)?;
                    if name == ERROR_INTRINSIC {
                        if !args.is_empty() {
                            return Err(syntax(pos, "`error()` takes no arguments"));
                        }
                        StmtKind::Error
                    } else if name == NONDET_INTRINSIC {
                        // result discarded
                        return Ok(None);
                    } else {
                        StmtKind::Call(Call {
                            function: name,
                            args,
                        })
                    }
                } else {
                    return Err(syntax(
                        self.pos(),
                        format!("expected `=` or `(`, found {}", self.peek().describe()),
                    ));
                }
            }
            other => {
                return Err(syntax(
                    pos,
                    format!("expected statement, found {}", other.describe()),
                ))
            }
        };
        Ok(Some(Stmt { kind, pos }))
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                args.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(args)
    }

    fn rhs(&mut self) -> PResult<Rhs> {
        if let (Tok::Ident(name), Tok::LParen) = (self.peek().clone(), self.peek_at(1)) {
            if name != NONDET_INTRINSIC {
                let pos = self.pos();
                self.advance();
                let args = self.args()?;
                if *self.peek() != Tok::Semi {
                    return Err(syntax(
                        self.pos(),
                        "a function call must be the whole right-hand side",
                    ));
                }
                if name == ERROR_INTRINSIC {
                    return Err(syntax(pos, "`error()` does not return a value"));
                }
                return Ok(Rhs::Call(Call {
                    function: name,
                    args,
                }));
            }
        }
        Ok(Rhs::Expr(self.expr()?))
    }

    fn cond(&mut self) -> PResult<Cond> {
        let mut lhs = self.conj()?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.conj()?;
            lhs = Cond::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> PResult<Cond> {
        let mut lhs = self.neg()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.neg()?;
            lhs = Cond::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn neg(&mut self) -> PResult<Cond> {
        if self.eat(&Tok::Bang) {
            return Ok(Cond::Not(Box::new(self.neg()?)));
        }
        if *self.peek() == Tok::LParen {
            // `(` may open a nested condition or a parenthesized expression.
            let save = self.at;
            self.advance();
            if let Ok(inner) = self.cond() {
                if self.eat(&Tok::RParen) && !self.continues_expression() {
                    return Ok(inner);
                }
            }
            self.at = save;
        }
        let lhs = self.expr()?;
        if let Tok::Cmp(op) = *self.peek() {
            self.advance();
            let rhs = self.expr()?;
            Ok(Cond::Cmp(Pred::new(lhs, op, rhs)))
        } else {
            Ok(Cond::Cmp(Pred::new(lhs, CmpOp::Ne, Expr::int(0))))
        }
    }

    fn continues_expression(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Cmp(_) | Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash | Tok::Percent
        )
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Rem,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.advance() {
            Tok::Minus => Ok(Expr::Neg(Box::new(self.unary()?))),
            Tok::Int(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    if name == NONDET_INTRINSIC {
                        self.advance();
                        self.expect(Tok::RParen)?;
                        Ok(Expr::Nondet)
                    } else {
                        Err(syntax(
                            pos,
                            format!("call to `{name}` is not allowed inside an expression"),
                        ))
                    }
                } else {
                    Ok(Expr::Var(Var::from(name)))
                }
            }
            other => Err(syntax(
                pos,
                format!("expected expression, found {}", other.describe()),
            )),
        }
    }
}

/// Parses and validates a program.
pub fn parse(source: &str) -> Result<Program, LangError> {
    let mut parser = Parser {
        toks: lex(source)?,
        at: 0,
    };
    let program = parser.program()?;
    validate(&program)?;
    Ok(program)
}

fn validate(program: &Program) -> Result<(), LangError> {
    let mut globals = BTreeSet::new();
    for g in &program.globals {
        if let Some(init) = &g.init {
            check_expr(init, &globals, &BTreeSet::new(), g.pos.line)?;
        }
        if !globals.insert(g.name.clone()) {
            return Err(LangError::Redeclared {
                name: g.name.clone(),
                line: g.pos.line,
            });
        }
    }

    let mut signatures: HashMap<&str, &Function> = HashMap::new();
    for f in &program.functions {
        if f.name == ERROR_INTRINSIC || f.name == NONDET_INTRINSIC {
            return Err(LangError::Redeclared {
                name: f.name.clone(),
                line: f.pos.line,
            });
        }
        if signatures.insert(&f.name, f).is_some() || globals.contains(&f.name) {
            return Err(LangError::Redeclared {
                name: f.name.clone(),
                line: f.pos.line,
            });
        }
    }
    if !signatures.contains_key("main") {
        return Err(LangError::MissingMain);
    }

    let mut callees: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for f in &program.functions {
        let mut locals = BTreeSet::new();
        for p in &f.params {
            if globals.contains(p) || !locals.insert(p.clone()) {
                return Err(LangError::Redeclared {
                    name: p.clone(),
                    line: f.pos.line,
                });
            }
        }
        let mut ctx = FnCheck {
            globals: &globals,
            locals,
            signatures: &signatures,
            calls: BTreeSet::new(),
            loop_depth: 0,
        };
        ctx.block(&f.body)?;
        callees.insert(&f.name, ctx.calls);
    }

    // reject cycles in the call graph
    fn visit<'a>(
        f: &'a str,
        callees: &'a BTreeMap<&str, BTreeSet<String>>,
        stack: &mut Vec<&'a str>,
        done: &mut BTreeSet<&'a str>,
    ) -> Result<(), LangError> {
        if let Some(start) = stack.iter().position(|g| *g == f) {
            let mut cycle: Vec<String> = stack[start..].iter().map(|s| s.to_string()).collect();
            cycle.push(f.to_string());
            return Err(LangError::Recursion { cycle });
        }
        if done.contains(f) {
            return Ok(());
        }
        stack.push(f);
        for g in &callees[f] {
            visit(g.as_str(), callees, stack, done)?;
        }
        stack.pop();
        done.insert(f);
        Ok(())
    }
    let mut done = BTreeSet::new();
    for f in callees.keys() {
        visit(f, &callees, &mut Vec::new(), &mut done)?;
    }
    Ok(())
}

fn check_expr(
    e: &Expr,
    globals: &BTreeSet<String>,
    locals: &BTreeSet<String>,
    line: u32,
) -> Result<(), LangError> {
    let mut missing = None;
    e.for_each_var(&mut |v| {
        if missing.is_none() && !globals.contains(v.as_str()) && !locals.contains(v.as_str()) {
            missing = Some(v.as_str().to_string());
        }
    });
    match missing {
        Some(name) => Err(LangError::UndeclaredVariable { name, line }),
        None => Ok(()),
    }
}

struct FnCheck<'a> {
    globals: &'a BTreeSet<String>,
    locals: BTreeSet<String>,
    signatures: &'a HashMap<&'a str, &'a Function>,
    calls: BTreeSet<String>,
    loop_depth: usize,
}

impl FnCheck<'_> {
    fn expr(&self, e: &Expr, line: u32) -> Result<(), LangError> {
        check_expr(e, self.globals, &self.locals, line)
    }

    fn var(&self, name: &str, line: u32) -> Result<(), LangError> {
        if self.globals.contains(name) || self.locals.contains(name) {
            Ok(())
        } else {
            Err(LangError::UndeclaredVariable {
                name: name.to_string(),
                line,
            })
        }
    }

    fn cond(&self, c: &Cond, line: u32) -> Result<(), LangError> {
        match c {
            Cond::Cmp(p) => {
                self.expr(&p.lhs, line)?;
                self.expr(&p.rhs, line)
            }
            Cond::Not(c) => self.cond(c, line),
            Cond::And(a, b) | Cond::Or(a, b) => {
                self.cond(a, line)?;
                self.cond(b, line)
            }
        }
    }

    fn call(&mut self, call: &Call, needs_value: bool, line: u32) -> Result<(), LangError> {
        let Some(f) = self.signatures.get(call.function.as_str()) else {
            return Err(LangError::UnknownFunction {
                name: call.function.clone(),
                line,
            });
        };
        if f.params.len() != call.args.len() {
            return Err(LangError::Arity {
                function: call.function.clone(),
                expected: f.params.len(),
                found: call.args.len(),
                line,
            });
        }
        if needs_value && !f.returns_int {
            return Err(LangError::VoidValue {
                function: call.function.clone(),
                line,
            });
        }
        for a in &call.args {
            self.expr(a, line)?;
        }
        self.calls.insert(call.function.clone());
        Ok(())
    }

    fn rhs(&mut self, rhs: &Rhs, line: u32) -> Result<(), LangError> {
        match rhs {
            Rhs::Expr(e) => self.expr(e, line),
            Rhs::Call(c) => self.call(c, true, line),
        }
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<(), LangError> {
        for s in stmts {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), LangError> {
        let line = s.pos.line;
        match &s.kind {
            StmtKind::Decl { name, init } => {
                if let Some(init) = init {
                    self.rhs(init, line)?;
                }
                if self.globals.contains(name) || !self.locals.insert(name.clone()) {
                    return Err(LangError::Redeclared {
                        name: name.clone(),
                        line,
                    });
                }
                Ok(())
            }
            StmtKind::Assign { target, value } => {
                self.var(target, line)?;
                self.rhs(value, line)
            }
            StmtKind::Call(c) => self.call(c, false, line),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.cond(cond, line)?;
                self.block(then_branch)?;
                if let Some(e) = else_branch {
                    self.block(e)?;
                }
                Ok(())
            }
            StmtKind::While { cond, body } => {
                self.cond(cond, line)?;
                self.loop_depth += 1;
                self.block(body)?;
                self.loop_depth -= 1;
                Ok(())
            }
            StmtKind::Break | StmtKind::Continue if self.loop_depth == 0 => {
                Err(LangError::OutsideLoop {
                    keyword: if s.kind == StmtKind::Break {
                        "break"
                    } else {
                        "continue"
                    },
                    line,
                })
            }
            StmtKind::Break | StmtKind::Continue | StmtKind::Error => Ok(()),
            StmtKind::Return(value) => match value {
                Some(e) => self.expr(e, line),
                None => Ok(()),
            },
            StmtKind::Block(b) => self.block(b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_empty_function_body() {
        let p = parse("void main() { }").unwrap();
        assert_eq!(p.functions.len(), 1);
        assert!(p.functions[0].body.is_empty());
    }

    #[test]
    fn reports_undeclared_variable() {
        let err = parse("void main() {\n  int x;\n  x = y;\n}").unwrap_err();
        assert_eq!(
            err,
            LangError::UndeclaredVariable {
                name: "y".into(),
                line: 3
            }
        );
    }

    #[test]
    fn reports_syntax_error_position() {
        let err = parse("void main() {\n  int x = ;\n}").unwrap_err();
        match err {
            LangError::Syntax { line, col, .. } => assert_eq!((line, col), (2, 11)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_recursion() {
        let src = "void f() { g(); }\nvoid g() { f(); }\nvoid main() { f(); }";
        assert!(matches!(parse(src), Err(LangError::Recursion { .. })));
        let src = "int f(int n) { int r = f(n - 1); return r; }\nvoid main() { }";
        assert!(matches!(parse(src), Err(LangError::Recursion { .. })));
    }

    #[test]
    fn rejects_misc_semantic_errors() {
        assert_eq!(parse("void f() {}"), Err(LangError::MissingMain));
        assert!(matches!(
            parse("void main() { g(); }"),
            Err(LangError::UnknownFunction { .. })
        ));
        assert!(matches!(
            parse("void f(int a) {} void main() { f(); }"),
            Err(LangError::Arity { .. })
        ));
        assert!(matches!(
            parse("void main() { break; }"),
            Err(LangError::OutsideLoop { .. })
        ));
        assert!(matches!(
            parse("void main() { int x; int x; }"),
            Err(LangError::Redeclared { .. })
        ));
        assert!(matches!(
            parse("void f() {} void main() { int x = f(); }"),
            Err(LangError::VoidValue { .. })
        ));
        assert!(matches!(
            parse("int f() { return 1; } void main() { int x = f() + 1; }"),
            Err(LangError::Syntax { .. })
        ));
    }

    #[test]
    fn parenthesized_conditions_and_expressions() {
        let p = parse(
            "void main() { int a = 0; if ((a + 1) * 2 > 3 && !(a == 1 || (a) < 0)) error(); }",
        )
        .unwrap();
        let StmtKind::If { cond, .. } = &p.functions[0].body[1].kind else {
            panic!()
        };
        let Cond::And(lhs, rhs) = cond else { panic!() };
        assert_eq!(
            **lhs,
            Cond::Cmp(Pred::new(
                Expr::binary(
                    BinOp::Mul,
                    Expr::binary(BinOp::Add, Expr::var("a"), Expr::int(1)),
                    Expr::int(2)
                ),
                CmpOp::Gt,
                Expr::int(3)
            ))
        );
        assert!(matches!(**rhs, Cond::Not(_)));
    }

    #[test]
    fn bare_expression_condition_means_nonzero() {
        let p = parse("void main() { while (1) { break; } }").unwrap();
        let StmtKind::While { cond, .. } = &p.functions[0].body[0].kind else {
            panic!()
        };
        assert_eq!(
            *cond,
            Cond::Cmp(Pred::new(Expr::int(1), CmpOp::Ne, Expr::int(0)))
        );
    }
}
