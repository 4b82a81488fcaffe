#include "toonrig/assign.hpp"

#include <algorithm>
#include <limits>

#include "toonrig/error.hpp"

namespace toonrig {

// O(n^3) Hungarian algorithm with row/column potentials.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return {};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
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
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

LandmarkSet associate_landmarks(const std::vector<Blob>& blobs,
                                const LandmarkSet& rig_template,
                                int canvas_size) {
  std::vector<std::string> ids;
  ids.reserve(rig_template.points.size());
  for (const auto& [id, _] : rig_template.points) ids.push_back(id);

  if (blobs.size() != ids.size())
    fail_validation("blob/landmark count mismatch: " + std::to_string(blobs.size()) +
                    " blobs vs " + std::to_string(ids.size()) + " landmarks");

  const int n = static_cast<int>(ids.size());
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Vec2 t = rig_template.points.at(ids[j]) * static_cast<double>(canvas_size);
      cost[i][j] = (blobs[i].centroid - t).squared_norm();
    }
  }
  std::vector<int> match = solve_assignment(cost);

  LandmarkSet out;
  for (int i = 0; i < n; ++i) {
    const std::string& id = ids[match[i]];
    out.points[id] = blobs[i].centroid * (1.0 / canvas_size);
    auto git = rig_template.grouping.find(id);
    out.grouping[id] = git != rig_template.grouping.end() ? git->second : "";
  }
  return out;
}

}  // namespace toonrig
