//! Independent reference implementations shared by the integration and
//! acceptance tests.
#![allow(dead_code)]

pub mod dense_gp;
pub mod fock;
