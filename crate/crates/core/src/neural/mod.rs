//! Dense tensors, a reverse-mode tape, recurrent cells, attention and Adam.

mod cells;
mod gradcheck;
mod graph;
mod optim;
mod param;
pub mod serialize;
mod tensor;

pub use cells::{affine, attention, dropout, BiEncoder, Decoder, DecoderOutput, Encoded, GruCell};
pub use gradcheck::{finite_diff_check, relative_error, GradCheckReport, REL_ERROR_FLOOR};
pub use graph::{Graph, Var};
pub use optim::{clip_grad_norm, scheduled_sample, teacher_schedule, Adam};
pub use param::{Gradients, ParamId, ParamStore, Parameter};
pub use tensor::{softmax, Scalar, Tensor};

#[allow(unused_imports)]
pub(crate) use tensor::argmax;
