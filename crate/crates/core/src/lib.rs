//! Exact verification, construction and search for angular momentum
//! absorption-emission codes.
//!
//! Everything here is pure computation over exact arithmetic and builds
//! without the standard library (only `alloc` is required).

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod angular;
pub mod channels;
pub mod codes;
mod error;
pub mod half_int;
pub mod kl;
pub mod poly;
pub mod props;
pub mod radical;
pub mod search;

pub use angular::{clebsch_gordan, y_matrix_element, AngularState};
pub use channels::{
    adjoint_compose, dephasing_set, first_order_channel, order_n_channel, resolved_transition, ErrorSet,
    KrausOperator, OpLabel,
};
pub use codes::{Code, Codeword, Family, Finding, Mode};
pub use error::{Error, Result};
pub use half_int::HalfInt;
pub use poly::{fit_polynomial, Polynomial};
pub use radical::Radical;
