//! Continued fractions, classical interpolating C-fractions and their
//! continual integral counterparts for functionals `F(x) = f(∫_0^1 x)`.
//!
//! Everything numeric is generic over [`scalar::Scalar`] / [`scalar::Real`];
//! the aliases below fix the common choices.

pub mod cicf;
pub mod expr;
pub mod fraction;
pub mod functional;
pub mod grid;
pub mod iicf;
pub mod scalar;

pub use cicf::{Cicf, CicfError};
pub use expr::{EvalError, Expr, ParseError};
pub use fraction::{FiniteFraction, Floor, FractionDerivativeInput, FractionError};
pub use functional::{Functional, FunctionalError, NodeSystem};
pub use grid::{GridError, GridFunction, Moment, PiecewiseGrid};
pub use iicf::{IicfError, InterpolationReport, KernelSet, ReductionReport, TailChain};
pub use scalar::{ratio, Real, Scalar};

/// Exact rationals.
pub type Rational = num_rational::BigRational;

pub type Fraction = FiniteFraction<f64>;
pub type ExactFraction = FiniteFraction<Rational>;
pub type Cicf64 = Cicf<f64>;
pub type ExactCicf = Cicf<Rational>;
pub type Grid = GridFunction<f64>;
pub type Grid32 = GridFunction<f32>;
pub type Nodes = NodeSystem<f64>;
pub type Kernels = KernelSet<f64>;
