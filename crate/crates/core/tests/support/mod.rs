#![allow(dead_code)]
pub mod quadrature;
