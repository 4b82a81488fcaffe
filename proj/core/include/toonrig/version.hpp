#pragma once

namespace toonrig {

constexpr const char* kVersion = "0.1.0";

}  // namespace toonrig
