//! Exact SAF invariants, Rauzy induction on linear involutions, and flat-surface
//! computations over real quadratic fields.

pub mod exactnum;
pub mod flatsurf;
pub mod fm;
pub mod involutions;
pub mod suspension;

pub use exactnum::{
    j_wedge, jxx, parse_knum, parse_rat, sign_k, wedge_k, JNum, KMat2, KNum, KVec2, KiNum,
    QuadField, Rat, WedgeNum,
};
pub use flatsurf::{
    Cylinder, CylinderDecomposition, EndoMatrix, FlatSurface, Gluing, PrototypeParams,
    PrymStructure, Sign,
};
pub use involutions::{
    GenPerm, LinearInvolution, PeriodicityVerdict, RauzyStep, StepKind, VerdictKind,
};
pub use suspension::SuspensionData;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("field mismatch: Q(sqrt({0})) vs Q(sqrt({1}))")]
    FieldMismatch(u64, u64),
    #[error("{0}")]
    Domain(String),
    #[error("invalid involution: {0}")]
    Invalid(String),
    #[error("rightmost lengths are equal; use the singular move")]
    EqualLengths,
    #[error("same symbol is rightmost in both rows; erase the cylinder letter")]
    SameRightmostLetter,
    #[error("a row would become empty")]
    EmptyRow,
    #[error("budget of {0} steps exhausted")]
    Budget(usize),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("check failed: {0}")]
    Check(String),
}

pub type Result<T> = std::result::Result<T, Error>;
