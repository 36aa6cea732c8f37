//! Collaborative regression on secret-shared data.
//!
//! Every iteration each client shares a mini-batch; the products X·w and
//! Xᵀe are computed with [`private_mul`], the cross-share protocol that
//! averages all N² pairwise share products. A centralized baseline runs the
//! same updates on pooled plaintext with the same batch schedule.

mod baseline;
mod data;
mod metrics;
mod private_mul;
mod schedule;
mod synthetic;
mod train;

pub use baseline::centralized_baseline;
pub use data::{load_csv, split_clients, train_test_split, Dataset, LabeledTable, Normalization};
pub use metrics::{accuracy, predict, relative_error, sigmoid_approx};
pub use private_mul::{private_mul, private_mul_triple_dims, PrivateMulOutput};
pub use schedule::BatchSchedule;
pub use synthetic::{synthetic_linear, synthetic_separable};
pub use train::{
    initial_weights, train, train_linear, train_logistic, IterationRecord, Task, TrainConfig, TrainOutcome,
};
