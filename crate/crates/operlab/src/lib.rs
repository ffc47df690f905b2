//! Numerical laboratory for the rational sl2 Gaudin model and its spectral
//! description by second-order differential operators ("opers").
//!
//! The crate is organised around a single pipeline:
//!
//! * [`repspace`] builds weight sectors of tensor products of sl2 modules as
//!   spaces of translation-invariant polynomials,
//! * [`gaudin`] assembles the commuting Gaudin Hamiltonians on such a sector
//!   and diagonalises them jointly,
//! * [`bethe`] solves the Bethe ansatz equations whose roots parametrise the
//!   joint spectrum,
//! * [`oper`] turns spectral data into second-order operators, Miura forms,
//!   and Baxter Q-polynomials / Q-operators,
//! * [`monodromy`] integrates opers along paths, computes monodromy
//!   representations, classifies them, and detects balanced real opers,
//! * [`localfield`] provides the archimedean gamma/beta/phi special
//!   functions used on the analytic side,
//! * [`hecke`] evaluates Hecke-type integral operators: the 3-point kernel
//!   on the real line, the quaternionic beta function, and exact chiral
//!   Hecke operators in rational arithmetic,
//! * [`cli`] wires everything into reproducible scenario runs.
//!
//! Support modules: [`scalar`] (a small abstraction over exact rational and
//! complex floating-point arithmetic), [`linalg`] (dense solves, kernels,
//! and a complex eigensolver that works for both), and [`quad`]
//! (double-exponential quadrature and related numerical integration).

pub mod scalar;
pub mod linalg;
pub mod poly;
pub mod quad;

pub mod localfield;
pub mod repspace;
pub mod gaudin;
pub mod bethe;
pub mod oper;
pub mod monodromy;
pub mod hecke;
pub mod cli;
