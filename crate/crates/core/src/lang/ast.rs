//! Syntax tree of `.ev` programs.

use super::ops::{Expr, Pred};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub globals: Vec<GlobalDecl>,
    pub functions: Vec<Function>,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }
}

/// `int g;` or `int g = e;` at file scope. Uninitialized globals start at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalDecl {
    pub name: String,
    pub init: Option<Expr>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Function {
    pub name: String,
    pub returns_int: bool,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Call {
    pub function: String,
    pub args: Vec<Expr>,
}

/// Right-hand side of an assignment or initializer.
#[derive(Debug, Clone, PartialEq)]
pub enum Rhs {
    Expr(Expr),
    Call(Call),
}

/// Branch and loop conditions. Connectives are lowered to CFA branching.
#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    Cmp(Pred),
    Not(Box<Cond>),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    /// `int x;` (indeterminate value) or `int x = rhs;`.
    Decl {
        name: String,
        init: Option<Rhs>,
    },
    Assign {
        target: String,
        value: Rhs,
    },
    Call(Call),
    If {
        cond: Cond,
        then_branch: Vec<Stmt>,
        else_branch: Option<Vec<Stmt>>,
    },
    While {
        cond: Cond,
        body: Vec<Stmt>,
    },
    Break,
    Continue,
    Return(Option<Expr>),
    /// Call to the `error()` intrinsic.
    Error,
    Block(Vec<Stmt>),
}
