use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not hyperhermitian (defect {defect:.3e})")]
    NotHyperhermitian { defect: f64 },

    #[error("eigenvalues do not pair up: gap {gap:.3e} exceeds tolerance {tol:.3e}")]
    Pairing { gap: f64, tol: f64 },

    #[error("wedge degree overflow: {left} + {right} > {max}")]
    DegreeOverflow { left: usize, right: usize, max: usize },

    #[error("expected a form of degree {expected}, got degree {found}")]
    WrongDegree { expected: usize, found: usize },

    #[error("2-form is not real (defect {defect:.3e})")]
    NonReal { defect: f64 },

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("support of `{0}` reaches the boundary layers")]
    SupportTouchesBoundary(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no convergence after {iterations} iterations (last change {change:.3e})")]
    NonConvergence { iterations: usize, change: f64 },

    #[error("line search failed at iteration {iteration} (step {step:.3e})")]
    Backtracking { iteration: usize, step: f64 },

    #[error("mollifier radius {eps} leaves no interior points on this grid")]
    MollifierTooWide { eps: f64 },

    #[error("line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
