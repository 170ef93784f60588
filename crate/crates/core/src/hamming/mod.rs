//! Covering codes for Hamming space: inner codes on short blocks and their
//! splitter-tensored products.

pub mod inner;
pub mod tensor;

pub use inner::{build_inner_code, greedy_inner_code, verify_inner_code, InnerCode, InnerMode};
pub use tensor::{build_tensored_code, first_uncovered_pair, FilterId, TensoredCode};
