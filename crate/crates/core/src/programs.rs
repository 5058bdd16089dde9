//! Bundled example programs.

/// Iterative Fibonacci; the input is `n`, the result `fib`.
pub const FIBONACCI: &str = include_str!("../programs/fib.while");
