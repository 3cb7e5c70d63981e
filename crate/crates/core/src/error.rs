use thiserror::Error;

/// Every failure the library can report. Variants carry enough context to
/// locate the offending prime or lattice without a debugger.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid coefficient field `{0}`")]
    InvalidField(String),
    #[error("no primitive root of unity of order {order} in {field}")]
    NoSuchRoot { field: String, order: u64 },
    #[error("division by zero in the coefficient field")]
    DivisionByZero,
    #[error("{ell} is not invertible in the coefficient field")]
    EllNotInvertible { ell: u64 },
    #[error("d0 = {0} is not a squarefree integer > 1")]
    InvalidDiscriminant(i64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {ell} is {found}, expected {expected}")]
    WrongSplitting { ell: u64, found: &'static str, expected: &'static str },
    #[error("element is zero")]
    ZeroElement,
    #[error("degenerate lattice (determinant zero)")]
    DegenerateLattice,
    #[error("cannot parse lattice literal `{0}`")]
    LatticeSyntax(String),
    #[error("integer too large to factor: {0}")]
    FactorOverflow(String),
    #[error("{0} is not coprime to pdN = {1}")]
    NotCoprime(String, u64),
    #[error("stabilizer search exceeded {0} iterations")]
    StabilizerCap(u64),
    #[error("no class-group quotient of order divisible by {0}")]
    NoOddQuotient(u64),
    #[error("character order {0} must be odd")]
    EvenCharacterOrder(u64),
    #[error("ideal is not coprime to the character modulus {0}")]
    NotCoprimeToModulus(u64),
    #[error("character table has no value for the prime ideal {0}")]
    MissingTableEntry(String),
    #[error("character table line {line}: {reason}")]
    TableSyntax { line: usize, reason: String },
    #[error("ideal class lookup failed for {0}")]
    ClassLookup(String),
    #[error("l-adic precision insufficient at l = {ell}")]
    PrecisionInsufficient { ell: u64 },
    #[error("ramified prime {0} has no Frobenius data")]
    RamifiedPrime(u64),
    #[error("prime {ell} divides pdN = {pdn} or the characteristic")]
    UnusablePrime { ell: u64, pdn: u64 },
    #[error("invalid S-structure: {0}")]
    InvalidContext(String),
    #[error("orbit bookkeeping failed at l = {ell}, lattice {lattice}: {reason}")]
    Decomposition { ell: u64, lattice: String, reason: String },
    #[error("homothety witness search failed at l = {ell}, lattice {lattice}")]
    WitnessSearch { ell: u64, lattice: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
