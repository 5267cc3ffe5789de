//! Partition state, conjugate component models and the decoupled
//! remove/assign collapsed Gibbs kernel.

mod component;
mod data;
mod model;
mod partition;
mod pitman_yor;

pub use component::{ComponentPrior, NixPrior, SuffStats};
pub use data::{Datum, Dataset, FeatureKind};
pub use model::MixtureModel;
pub(crate) use model::column_moments as model_column_moments;
pub use partition::{Cluster, ClusterId, PartitionState, DEFAULT_CHECK_INTERVAL};
pub use pitman_yor::PitmanYorParams;
