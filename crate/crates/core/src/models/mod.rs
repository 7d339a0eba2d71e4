//! The ten classification methods and their building blocks.

pub mod c2w;
pub mod compose;
pub mod context;
pub mod features;
pub mod method;
pub mod recurrent;

pub use c2w::{train_c2w, C2wConfig, C2wModel};
pub use compose::{train_composition, ComposerConfig, ComposerVariant, CompositionModel, SequenceEncoder};
pub use context::{
    compose_in_context, compose_span, encode_tokens, train_context_joint, ContextConfig,
    ContextEncoder, EncodedText,
};
pub use features::{build_feature_bundle, doc_rows, Augmenter, BundleParts, FeatureBundle};
pub use method::{Method, TrainedComponents, ALL_METHODS};
pub use recurrent::{
    train_recurrent, ws_feature, ws_feature_rows, RecurrentClassifier, RecurrentConfig,
};
