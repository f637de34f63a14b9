//! Systems with impulsive right-hand sides and their regularizations.

pub mod expr;
pub mod frobenius;
pub mod impulsive;
pub mod rk4;

pub use expr::FieldExpr;
pub use frobenius::{frobenius_check, frobenius_residual, FrobeniusReport};
pub use impulsive::{
    jump_map, regularized_solve, shape_sensitivity, solve, Impulse, ImpulsiveIvp, JumpRecord, MatrixField,
    ShapeSweep, Trajectory, VectorField,
};
pub use rk4::{rk4, SampleTable};
