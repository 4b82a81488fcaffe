#pragma once

#include "toonrig/image.hpp"

namespace toonrig {

struct InpaintOptions {
  double tol = 0.1;      // max per-pixel channel change (0..255 scale) to stop
  int max_iter = 5000;
  int workers = 0;
};

/// Replaces masked pixels by the discrete-Laplace equilibrium of their
/// 4-neighbors (Jacobi iteration, worker-count independent), leaving unmasked
/// pixels untouched bit-exactly. Masked pixels start at the mean of the known
/// boundary ring. A masked region with no known neighbor anywhere is an error.
Image inpaint(const Image& image, const BinaryMask& mask,
              const InpaintOptions& opts = {});

}  // namespace toonrig
