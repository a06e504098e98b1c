//! S-curve models of ferromagnetic B-H curves.
//!
//! A single S-curve is the real root `y` of `a (y - y_c)^3 + (y - y_c) = m (x - x_c)`.
//! Weighted sums of such curves sharing `a` model magnetization, hysteresis and
//! demagnetization branches; [`fitting`] regresses them on data, [`profiling`]
//! extracts inflection, permeability, `a0` interval and knee, and
//! [`hysteresis`] closes loops and measures their area.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod demo;
pub mod error;
pub mod fitting;
pub mod fixtures;
pub mod hysteresis;
pub mod plot;
pub mod profiling;
pub mod quadrature;
pub mod report;
pub mod rootfind;
pub mod scurve;
pub mod superposition;

pub use error::{Error, Result};
