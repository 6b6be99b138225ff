//! Window geometry, affinity maps, ground-truth pyramids and the affinity
//! regression loss.

mod gt;
mod loss;
mod map;
mod window;

pub use gt::{gt_affinity_map, gt_affinity_pyramid};
pub use loss::{affinity_loss, is_dropped, LossConfig};
pub use map::{geometric_validity, AffinityMap, AffinityPyramid};
pub use window::WindowGeometry;
