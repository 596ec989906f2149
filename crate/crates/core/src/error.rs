use std::fmt;

/// Which part of the library raised an error. Rendered in the CLI's
/// machine-parsable `ERROR <module>:<code>:` prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Module {
    Numerics,
    Operators,
    Circuit,
    Models,
    Effective,
    Swt,
    Scan,
    Cli,
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Module::Numerics => "numerics",
            Module::Operators => "operators",
            Module::Circuit => "circuit",
            Module::Models => "models",
            Module::Effective => "effective",
            Module::Swt => "swt",
            Module::Scan => "scan",
            Module::Cli => "cli",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: shapes, ranges, parameters.
    Validation,
    /// The computation itself failed: non-convergence, degeneracy.
    Numerical,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("{module}:{code}: {message}")]
pub struct Error {
    pub kind: ErrorKind,
    pub module: Module,
    pub code: &'static str,
    pub message: String,
}

impl Error {
    pub fn validation(module: Module, code: &'static str, message: impl Into<String>) -> Self {
        Error {
            kind: ErrorKind::Validation,
            module,
            code,
            message: message.into(),
        }
    }

    pub fn numerical(module: Module, code: &'static str, message: impl Into<String>) -> Self {
        Error {
            kind: ErrorKind::Numerical,
            module,
            code,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
