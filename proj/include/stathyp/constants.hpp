#pragma once

#include <cstddef>

namespace stathyp {

// Largest supported n for H^n (matrices are fixed-capacity, no heap).
inline constexpr int kMaxDim = 6;

namespace tol {
inline constexpr double geom = 1e-9;
inline constexpr double boundary = 1e-6;
inline constexpr double round_trip = 1e-12;
inline constexpr double weights = 1e-12;
// Allowed Minkowski drift before apply() refuses to repair a result.
inline constexpr double repair = 1e-6;
}  // namespace tol

inline constexpr double kDefaultLimitTol = 1e-9;
inline constexpr std::size_t kDefaultMaxSteps = 100000;
inline constexpr std::size_t kReorthPeriod = 64;
inline constexpr double kDefaultThickGrid = 0.01;
inline constexpr double kDefaultEventStep = 0.1;
inline constexpr double kMaxFailureFraction = 0.1;
inline constexpr double kFourPointDelta = 1.1;
inline constexpr double kThinTriangleC = 1.0;
inline constexpr std::size_t kModularMoveGuard = 10000;

}  // namespace stathyp
