//! Brute-force ground truth and exact combinatorial bounds.

pub mod bounds;
pub mod scan;

pub use bounds::{
    ball_intersection_bounds, ball_intersection_count, binom, binom_ratio_bounds, ln_binom,
    turan_volume_bound, BoundsReport,
};
pub use scan::{linear_scan_hamming, linear_scan_sets, nearest_hamming};
