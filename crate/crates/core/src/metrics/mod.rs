//! Evaluation metrics and theory quantities: label-agreement measures,
//! Chernoff information of block embeddings, misclustering-rate bounds,
//! gram-matrix concentration checks, and scree-based model selection.

pub mod agreement;
pub mod bounds;
pub mod chernoff;
pub mod concentration;
pub mod model_select;

pub use agreement::{misclustering, nmi, ConfusionTable, Misclustering};
pub use bounds::{bound_constants_from_model, bound_core, bound_general_dase, t_constants, BoundConstants, BoundMethod, TConstants};
pub use chernoff::{ase_block_moments, chernoff_information, dase_block_moments, ChernoffInputs};
pub use concentration::{concentration_check, core_gram_thresholds, general_gram_threshold, ConcentrationBound, ConcentrationReport};
pub use model_select::choose_k_profile_likelihood;
