#include "unitrack/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "unitrack/errors.hpp"

namespace unitrack {

namespace {

double offdiag_norm(const Matrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.n(); ++i)
    for (int j = i + 1; j < a.n(); ++j) s += 2.0 * a.at(i, j) * a.at(i, j);
  return std::sqrt(s);
}

}  // namespace

std::vector<double> symmetric_eigenvalues(Matrix a) {
  const int n = a.n();
  if (n == 0) return {};
  if (n == 1) return {a.at(0, 0)};
  if (!a.is_symmetric()) throw AsymmetricInput("eigensolver needs a symmetric matrix");

  const double tol = 1e-12 * std::max(1.0, a.frobenius());
  const int max_sweeps = 100 * n * n;

  int sweep = 0;
  while (offdiag_norm(a) > tol) {
    if (++sweep > max_sweeps) throw NonConvergence("jacobi sweep cap exceeded");
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = 0.5 * (a.at(q, q) - a.at(p, p)) / apq;
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        double taur = s / (1.0 + c);

        double app = a.at(p, p), aqq = a.at(q, q);
        a.at(p, p) = app - t * apq;
        a.at(q, q) = aqq + t * apq;
        a.at(p, q) = 0.0;
        a.at(q, p) = 0.0;
        for (int i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          double aip = a.at(i, p), aiq = a.at(i, q);
          a.at(i, p) = aip - s * (aiq + taur * aip);
          a.at(p, i) = a.at(i, p);
          a.at(i, q) = aiq + s * (aip - taur * aiq);
          a.at(q, i) = a.at(i, q);
        }
      }
    }
  }

  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a.at(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

double algebraic_connectivity(const Matrix& laplacian_matrix) {
  if (laplacian_matrix.n() <= 1) return 0.0;
  return symmetric_eigenvalues(laplacian_matrix)[1];
}

AdaptiveWeights adaptive_weights(const Matrix& laplacian_s, const Matrix& laplacian_t,
                                 double epsilon_sigma) {
  AdaptiveWeights w;
  w.sigma2_s = algebraic_connectivity(laplacian_s);
  w.sigma2_t = algebraic_connectivity(laplacian_t);
  double ss = std::max(w.sigma2_s, epsilon_sigma);
  double st = std::max(w.sigma2_t, epsilon_sigma);
  // Inverse-connectivity mixture, written so the pair sums to 1 exactly.
  w.lambda_s = st / (ss + st);
  w.lambda_t = 1.0 - w.lambda_s;
  return w;
}

}  // namespace unitrack
