//! Zero-Hopf limit cycles and Darboux integrability for the piecewise-smooth
//! system
//!
//! ```text
//! x' = y,   y' = -a x + y z,   z' = b |y| - c x y - x^2
//! ```
//!
//! The crate has an exact half ([`polyalg`], [`linsolve`], [`darboux`]) that
//! certifies invariant surfaces and exponential factors of the two smooth
//! branches, and a numerical half ([`dynamics`], [`averaging`],
//! [`limitcycle`], [`equilibria`]) that locates the small-amplitude periodic
//! orbit born at the origin and measures its multipliers.

pub mod polyalg;
pub mod linsolve;
pub mod darboux;
pub mod dynamics;
pub mod averaging;
pub mod limitcycle;
pub mod equilibria;
pub mod cli;
