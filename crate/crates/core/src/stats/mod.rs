//! Numerical building blocks: normal distribution, Hermite polynomials,
//! compensated summation, sample quantiles and the Wilcoxon signed-rank test.

pub mod hermite;
pub mod normal;
pub mod quantile;
pub mod sum;
pub mod wilcoxon;

pub use hermite::{hermite_at_zero, hermite_eval, HermiteEval};
pub use normal::{norm_cdf, norm_pdf, norm_quantile};
pub use quantile::{mean, sample_quantile, sample_quantile_sorted, std_dev};
pub use sum::NeumaierSum;
pub use wilcoxon::{wilcoxon_signed_rank, wilcoxon_signed_rank_with, Alternative, WilcoxonResult, ZeroPolicy};
