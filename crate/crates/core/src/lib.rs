//! Classification, enumeration and counting of φ-practical numbers and their
//! relatives (weakly φ-practical, practical, 2-dense), the starter
//! decomposition of φ-practical numbers, rough-number sieve functions and a
//! nonlinear fit for the limiting density constant.

pub mod analytic;
pub mod arith;
pub mod classify;
pub mod cli;
pub mod enumerate;
pub mod error;
pub mod fit;
pub mod starters;

pub use arith::{build_spf_sieve, factorize, FactoredInteger, SpfSieve};
pub use classify::{
    h_value, is_2dense, is_phi_practical, is_practical, is_weakly_phi_practical, subset_sums,
    Classification, Rational, SumSet,
};
pub use error::{Error, Result};
