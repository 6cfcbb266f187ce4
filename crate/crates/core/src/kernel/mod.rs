//! Dense numeric kernel with exact reverse-mode gradients.

mod gradcheck;
mod tape;
mod tensor;

pub use gradcheck::{grad_check, GradCheckReport, REL_FLOOR};
pub use tape::{sigmoid, softplus, Gradients, Reduce, Tape, Var};
pub use tensor::Tensor;
