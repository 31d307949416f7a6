//! PointSSIM: structural comparison of binary images that is invariant to
//! rotation and resolution.
//!
//! An image is reduced to a marked point process of *anchor points* (locally
//! adaptive maxima of its Euclidean distance transform, marked with radius
//! and object label), the process is summarised by four measures, and two
//! images are compared through their summary vectors.
//!
//! ```
//! use pointssim::{compare_images, BinaryImage, Metric};
//!
//! let a = BinaryImage::from_fn(64, 64, |r, c| (r / 8 + c / 8) % 3 == 0);
//! let b = a.upscale(2).rotate90(1);
//! let score = compare_images(&a, &b, Metric::PointSsim).unwrap();
//! assert!(score.value > 0.9);
//! ```

pub mod error;
pub mod experiments;
pub mod generators;
pub mod image;
pub mod io;
pub mod measures;
pub mod metrics;
pub mod morphology;
pub mod point_process;

pub use error::{Error, Result};
pub use generators::{Scenario, ScenarioConfig, ScenarioParams};
pub use image::{align_frames, BaseFrame, BinaryImage};
pub use io::{load_image, save_image};
pub use measures::{summarize, QuadratGrid, SummaryVector};
pub use metrics::{compare_images, point_ssim, ComparisonScore, Metric};
pub use morphology::{
    adaptive_thin, connected_components, distance_transform, local_maxima, AnchorMask, DistanceField, LabelField, Mask,
};
pub use point_process::{extract, Anchor, MarkedPointProcess};
