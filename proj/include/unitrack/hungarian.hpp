#pragma once

#include <algorithm>
#include <limits>
#include <vector>

namespace unitrack {

constexpr double kAssignBig = 1e15;

/// Min-cost one-to-one assignment (Jonker-Volgenant style shortest
/// augmenting paths, O(n^3)). `cost` is rows x cols with rows <= cols;
/// returns for each row the assigned column. Entries >= kAssignBig mark
/// forbidden pairs but keep the matrix finite for the solver.
inline std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const int rows = static_cast<int>(cost.size());
  if (rows == 0) return {};
  const int cols = static_cast<int>(cost[0].size());
  const int n = std::max(rows, cols);
  const double inf = std::numeric_limits<double>::infinity();

  auto at = [&](int i, int j) -> double {
    if (i < rows && j < cols) return cost[i][j];
    return 0.0;  // padding rows/cols
  };

  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> rowsol(rows, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] >= 1 && p[j] <= rows && j - 1 < cols) rowsol[p[j] - 1] = j - 1;
  return rowsol;
}

}  // namespace unitrack
