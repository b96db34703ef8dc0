//! Numerical kernels shared by the analysis modules.

pub mod dft;
pub mod eigen;
pub mod rng;
pub mod stats;

pub use dft::{dft_at_frequency, dft_forward, dft_inverse, fourier_frequency, principal_arg, ComplexSeries};
pub use eigen::{eig_symmetric, eigenvalues_symmetric, Matrix, SignConvention, SymmetricEigenResult};
pub use rng::{RngStream, StreamRng};
pub use stats::{summary_stats, SummaryStats};
