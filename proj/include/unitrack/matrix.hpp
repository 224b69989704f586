#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace unitrack {

/// Dense square matrix, row-major. Window graphs have tens of nodes, so
/// dense storage is exact and cheap.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int n) : n_(n), a_(static_cast<size_t>(n) * n, 0.0) {}

  int n() const { return n_; }
  double& at(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
  double at(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

  bool is_symmetric() const {
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (at(i, j) != at(j, i)) return false;
    return true;
  }

  double frobenius() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }

  double row_sum(int i) const {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += at(i, j);
    return s;
  }

  const std::vector<double>& data() const { return a_; }

  bool operator==(const Matrix& o) const { return n_ == o.n_ && a_ == o.a_; }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

}  // namespace unitrack
