#pragma once

#include <vector>

#include "toonrig/blob.hpp"
#include "toonrig/rig.hpp"

namespace toonrig {

/// Minimum-total-cost assignment of a square cost matrix (O(n^3) Hungarian).
/// Returns row -> column.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost);

/// Assigns each blob to the template landmark minimizing total squared
/// distance and returns the detected positions under template ids, normalized
/// by canvas_size. Count mismatch is an error carrying both counts.
LandmarkSet associate_landmarks(const std::vector<Blob>& blobs,
                                const LandmarkSet& rig_template,
                                int canvas_size);

}  // namespace toonrig
