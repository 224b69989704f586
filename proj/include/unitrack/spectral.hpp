#pragma once

#include <vector>

#include "unitrack/matrix.hpp"

namespace unitrack {

/// Loss-mixing coefficients derived from the inverse algebraic
/// connectivities of the spatial and temporal Laplacians.
struct AdaptiveWeights {
  double lambda_s = 0.5;
  double lambda_t = 0.5;
  double sigma2_s = 0.0;
  double sigma2_t = 0.0;
};

enum class WeightsMode { Adaptive, Fixed, FrozenInit };

/// All eigenvalues of a symmetric matrix, ascending, via cyclic Jacobi
/// sweeps. Tolerance 1e-12 on the off-diagonal norm, sweep cap 100*n^2.
std::vector<double> symmetric_eigenvalues(Matrix a);

/// Second-smallest Laplacian eigenvalue. Returns 0 for n <= 1.
double algebraic_connectivity(const Matrix& laplacian_matrix);

/// lambda_s = sigma2(Ls)^-1 / (sigma2(Ls)^-1 + sigma2(Lt)^-1), sigma2
/// clamped below at epsilon_sigma; lambda_t = 1 - lambda_s exactly.
AdaptiveWeights adaptive_weights(const Matrix& laplacian_s, const Matrix& laplacian_t,
                                 double epsilon_sigma);

}  // namespace unitrack
