//! Histograms of canonical codes, two-sample tests and the verification
//! procedures built on them.

pub mod histogram;
pub mod procedures;
pub mod testing;

pub use histogram::{code_histogram, replicate, CodeHistogram};
pub use procedures::{
    commutation_test, compare_histograms, compatibility_test, constant_law, coupling_gap_test, invariance_test,
    null_rejection_rate, CouplingPoint,
};
pub use testing::{
    chi2_gof, chi2_pairs, chi2_two_sample, kolmogorov_sf, ks_two_sample, paired_counts, pool_pairs, tv_distance,
    ChiSquare, KsTest, TestReport, Verdict, MIN_EXPECTED,
};
