use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("variable count mismatch: {left} vs {right}")]
    VarCountMismatch { left: usize, right: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("series not divisible by hbar: nonzero hbar^0 coefficient {0}")]
    NotDivisible(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymplecticError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("omega is not antisymmetric at ({0}, {1})")]
    OmegaNotAntisymmetric(usize, usize),
    #[error("omega is degenerate")]
    OmegaDegenerate,
    #[error("pi is not antisymmetric at ({0}, {1})")]
    PiNotAntisymmetric(usize, usize),
    #[error("pi and omega are incompatible: (pi*omega)[{0}][{1}] != -delta")]
    Incompatible(usize, usize),
    #[error("1-form is not closed: d(alpha)[{0}][{1}] = {2}")]
    NotClosed(usize, usize, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("structure constants not antisymmetric: c[{i}][{j}]^{k}")]
    NotAntisymmetric { i: usize, j: usize, k: usize },
    #[error("Jacobi identity fails at (i, j, k, l) = ({i}, {j}, {k}, {l}): {value}")]
    NotJacobi { i: usize, j: usize, k: usize, l: usize, value: String },
    #[error("generator X_{generator} does not preserve omega: (L_X omega)[{a}][{b}] = {value}")]
    NotSymplectic { generator: usize, a: usize, b: usize, value: String },
    #[error("[X_{i}, X_{j}] != -X_[e{i},e{j}] in component {component}")]
    NotAntiHomomorphism { i: usize, j: usize, component: usize },
    #[error("cochain is not a cocycle: (delta theta){indices:?} = {value}")]
    NotACocycle { indices: Vec<usize>, value: String },
    #[error("cochain degree {0} exceeds the supported bound")]
    DegreeTooHigh(usize),
    #[error("cocycle is not exact: inconsistent equation at pair {pair:?}, hbar^{order}")]
    NotExact { pair: (usize, usize), order: usize },
    #[error("cochain value is not constant at {0:?}")]
    NonConstantValue(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MomentumError {
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Symplectic(#[from] SymplecticError),
    #[error("i_X omega for generator e{generator} is not closed: {detail}")]
    NotClosed { generator: usize, detail: String },
    #[error("{{J0(e{i}), J0(e{j})}} - J0([e{i},e{j}]) is not constant: {value}")]
    NonConstantDifference { i: usize, j: usize, value: String },
    #[error("expected {expected} momentum values, found {found}")]
    WrongCount { expected: usize, found: usize },
    #[error("X_J0(e{generator}) != X_e{generator} in component {component}")]
    NotMomentumMap { generator: usize, component: usize },
    #[error("extended map is not a homomorphism on basis pair ({i}, {j})")]
    NotHomomorphism { i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FedosovError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("invalid Fedosov configuration: {0}")]
    Config(String),
    #[error("recursion did not reach a fixed point within {0} iterations")]
    FixedPointNotReached(usize),
    #[error("Weyl truncation {have} too low: need N_W >= {need}")]
    TruncationTooLow { have: usize, need: usize },
    #[error("identity check failed: {0}")]
    IdentityFailed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantumError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Momentum(#[from] MomentumError),
    #[error(transparent)]
    Fedosov(#[from] FedosovError),
    #[error("Omega has an hbar^0 term; Omega must lie in hbar Z^2_dR[[hbar]]")]
    OmegaHasClassicalTerm,
    #[error("Omega component at hbar^{order} is not antisymmetric at ({a}, {b})")]
    OmegaNotAntisymmetric { order: usize, a: usize, b: usize },
    #[error("Omega at hbar^{order} is not closed at ({a}, {b}, {c})")]
    OmegaNotClosed { order: usize, a: usize, b: usize, c: usize },
    #[error("Omega is not invariant: L_X(e{generator}) Omega at hbar^{order} != 0")]
    NotInvariant { generator: usize, order: usize },
    #[error("i_X Omega for e{generator} at hbar^{order} is not closed")]
    NotClosed { generator: usize, order: usize },
    #[error("lambda({i},{j}) is not a constant series")]
    NonConstant { i: usize, j: usize },
    #[error("commutator and closed-form lambda disagree at ({i},{j})")]
    FormMismatch { i: usize, j: usize },
    #[error("lambda mod hbar differs from Sigma at ({i},{j})")]
    CocycleMismatch { i: usize, j: usize },
    #[error("series order {have} too low: need at least {need}")]
    OrderTooLow { have: usize, need: usize },
    #[error("map is not a homomorphism on basis pair ({i}, {j})")]
    NotHomomorphism { i: usize, j: usize },
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("JSON syntax error at line {line}, column {column}: {msg}")]
    Syntax { line: usize, column: usize, msg: String },
    #[error("at `{key}`: {msg}")]
    Field { key: String, msg: String },
    #[error("{what} violates an invariant: {detail}")]
    Invariant { what: String, detail: String },
}

impl ScenarioError {
    /// Malformed or unreadable input, as opposed to a well-formed scenario
    /// whose mathematical data fails a check.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, ScenarioError::Invariant { .. })
    }
}
