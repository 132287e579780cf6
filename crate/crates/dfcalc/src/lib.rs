//! Discrete fractional calculus on finite integer-step grids.
//!
//! The crate implements the delta and nabla fractional sums, the
//! Riemann–Liouville and Caputo fractional differences (left and right),
//! the reflection transforms that exchange left and right operators, a
//! battery of machine-checkable operator identities, summation-by-parts
//! evaluators, and a discrete fractional variational module with an exact
//! Euler–Lagrange solver and a descent oracle.
//!
//! Everything is generic over a scalar backend:
//!
//! * [`num::BigRational`]: exact arithmetic. For rational orders every
//!   identity in the library holds with deviation exactly zero.
//! * `f64`: any real order; identities hold to a documented tolerance.
//!
//! Grid bookkeeping (bases, alignment, domain shifts by `alpha`) is always
//! carried in exact rational arithmetic, even under the float backend, so
//! that the domain laws of the operators can never drift.
//!
//! Quick example: the nabla left fractional sum of order 1/2 of the
//! constant one function.
//!
//! ```
//! use dfcalc::grid::{Grid, GridFunction};
//! use dfcalc::kernels::FracOrder;
//! use dfcalc::operators::{Direction, Flavor, OperatorSpec, Side};
//! use num::BigRational;
//!
//! let grid = Grid::from_integer(0, 6);
//! let f = GridFunction::<BigRational>::constant(grid.clone(), num::one());
//! let op = OperatorSpec::new(
//!     Direction::Nabla,
//!     Side::Left,
//!     Flavor::Sum,
//!     FracOrder::from_ratio(1, 2).unwrap(),
//!     grid.base().clone(),
//! );
//! let out = op.apply(&f).unwrap();
//! // value at t = 2 is 1 + 1/2 = 3/2
//! assert_eq!(out.values()[2], BigRational::new(3.into(), 2.into()));
//! ```

pub mod byparts;
pub mod error;
pub mod grid;
pub mod identities;
pub mod kernels;
pub mod operators;
pub mod scalar;
pub mod tolerances;
pub mod variational;

pub use error::{Error, Result};
pub use scalar::{Backend, Scalar};
