//! Fusion, classification head, training loop, metrics and checkpoints.

mod checkpoint;
mod clustering;
mod head;
mod loss;
mod metrics;
mod model;
mod train;

pub use checkpoint::{checkpoint_manifest, load_checkpoint, save_checkpoint, DetectorBundle, CHECKPOINT_MAGIC, SCHEMA_VERSION};
pub use clustering::{adjusted_rand_index, clustering_metrics, kmeans, silhouette, ClusterQuality, CLUSTER_SEEDS};
pub use head::{fuse, head_forward, softmax2, DetectionHead, HeadCache, DEFAULT_HEAD_DROPOUT, HIDDEN1, HIDDEN2};
pub use loss::{class_weights, class_weights_from_counts, weighted_ce_from_logits, weighted_ce_loss, ClassWeights, PROB_FLOOR};
pub use metrics::{compute_metrics, predict_class, Metrics};
pub use model::{BehaviorBranch, DetectorModel, ForwardCache, TextBranch};
pub use train::{
    batch_loss_and_grad, evaluate, predict, predict_probs, train, EarlyStopping, EncodedSet, EpochRecord, TrainConfig, TrainHistory,
};
