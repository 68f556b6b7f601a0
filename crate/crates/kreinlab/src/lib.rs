//! Operator theory on finite-dimensional Krein spaces.
//!
//! A Krein space here is C^n equipped with a fundamental symmetry `eta`
//! (a Hermitian involution). The crate provides the dense numerical kernels
//! needed to work with operators that are self-adjoint with respect to the
//! indefinite product `<x, eta y>`: stability certificates built from
//! commuting positive involutions, classification of involutive symmetries,
//! spectral flattenings and gradation homotopies, and the combinatorial side
//! of twisted group actions up to the point-space K-group descriptors.
//!
//! Everything is dense and double precision; the intended regime is small
//! matrices (dimensions up to a few hundred), not large sparse problems.

pub mod csym;
pub mod gradekit;
pub mod krein;
pub mod models;
pub mod numkit;
pub mod symclass;
pub mod twistkit;

pub use csym::{CSymmetry, CsymError, StabilityCertificate};
pub use gradekit::{GradationVerdict, GradeError, Gradation, KaroubiTriple};
pub use symclass::{Classification, SymclassError, SymmetrySignature};
pub use twistkit::{
    CliffordAction, FiniteGroupData, KGroupDescriptor, Phase, PointComputation, PointScenario,
    PuaRep, PuaVerdict, TwistData, TwistError, TwistFailure, TwistVerdict,
};
pub use krein::{FundamentalDecomposition, KreinError, KreinMetric, RealLinearOp, Verdict};
pub use models::{Grid1D, MaxwellModel, ModelError, Parity, ParityReport};
pub use numkit::{c64, ComplexMatrix, HermEig, MatFun, NumError, SchurForm};
