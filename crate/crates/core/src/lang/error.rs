use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: u32,
        col: u32,
        message: String,
    },
    #[error("line {line}: use of undeclared variable `{name}`")]
    UndeclaredVariable { name: String, line: u32 },
    #[error("line {line}: `{name}` is already declared")]
    Redeclared { name: String, line: u32 },
    #[error("line {line}: call to unknown function `{name}`")]
    UnknownFunction { name: String, line: u32 },
    #[error("line {line}: `{function}` expects {expected} argument(s), got {found}")]
    Arity {
        function: String,
        expected: usize,
        found: usize,
        line: u32,
    },
    #[error("line {line}: `{function}` does not return a value")]
    VoidValue { function: String, line: u32 },
    #[error("recursive call detected (unsupported): {}", cycle.join(" -> "))]
    Recursion { cycle: Vec<String> },
    #[error("line {line}: `{keyword}` outside of a loop")]
    OutsideLoop { keyword: &'static str, line: u32 },
    #[error("program has no `main` function")]
    MissingMain,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}
