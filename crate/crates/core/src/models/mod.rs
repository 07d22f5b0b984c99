//! Kernel descriptions, their discretization, and random generators.

pub mod expr;
pub mod random;
pub mod spec;

pub use expr::{parse_expression, parse_expression_in, Expr, Var};
pub use random::{random_complex_kernel, random_kernel, RandomClass, Stream};
pub use spec::{
    presets, zero_atom_points, FactorTerm, FixedAtom, GridModel, KernelAtom, KernelSpec,
    MeasureSpec,
};
