//! Multimodal comparison of conditional densities: modes, matching, basin
//! allocation, divergences, HPD overlap, peeling, sampling and aggregates.

mod assignment;
mod divergence;
mod hpd;
mod modes;
mod peel;
mod report;
mod sampling;
mod svg;

pub use assignment::solve_rectangular;
pub use divergence::{entropy, js_divergence, kl_divergence, l2_distance, ENTROPY_GUARD, KL_FLOOR};
pub use hpd::{hpd_set, jaccard, HpdSet};
pub use modes::{
    allocation_error, allocation_vector, detect_modes, location_error, match_modes,
    mode_count_error, voronoi_basins, Assignment, ModeSet,
};
pub use peel::{peel_and_renormalize, peel_rows, savitzky_golay, MIN_ROWS, SG_ORDER, SG_WINDOW};
pub use report::{
    aggregate, evaluate_fields, mode_tracks, quantile_sorted, summarize, Aggregates,
    ColumnMetrics, EvalConfig, EvalReport, Summary,
};
pub use sampling::{density_iqr, density_quantile, sample_from_density};
pub use svg::{heatmap_pair, line_chart};
