//! Refined graph encoder, its checkpoint format and the attack surrogate.

mod checkpoint;
mod config;
mod model;
pub(crate) mod params;
mod surrogate;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use config::{DimProfile, EncoderConfig, InterAgg, IntraAgg, LayerShape};
pub use model::{
    accuracy, agg_inter, agg_intra, argmax, bperce, decode, encode, encode_nodes, encode_with_features,
    readout, softmax_rows, Embeddings, EncodedVars, Model,
};
pub use params::{glorot, ModelParams, ParamVars};
pub use surrogate::{train_surrogate, SurrogateParams, SurrogateTraining};
