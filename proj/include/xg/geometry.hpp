#pragma once

// Shot geometry on the standardized 105 m x 68 m pitch. Coordinates arrive as
// pitch fractions with the attacked goal at coord_l = 1; the goal center sits
// at (105, 32.5) and the goal mouth is 7.32 m wide.

#include <cmath>
#include <numbers>
#include <string>

#include "xg/error.hpp"

namespace xg::geometry {

inline constexpr double kPitchLength = 105.0;
inline constexpr double kPitchWidth = 68.0;
inline constexpr double kGoalCenterW = 32.5;
inline constexpr double kGoalWidth = 7.32;
inline constexpr double kHalfGoal = kGoalWidth / 2.0;

struct GoalOffset {
  double x;  // meters in front of the goal line
  double y;  // lateral meters from the goal center
};

inline void check_fraction(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::OutOfRange,
                std::string(name) + " = " + std::to_string(v) + " is outside [0, 1]");
  }
}

inline GoalOffset goal_offset(double coord_l, double coord_w) {
  check_fraction(coord_l, "coord_l");
  check_fraction(coord_w, "coord_w");
  return {kPitchLength - kPitchLength * coord_l, kGoalCenterW - kPitchWidth * coord_w};
}

/// Inverse of goal_offset: pitch fractions for a point x meters out and y
/// meters across from the goal center.
inline std::pair<double, double> fractions_from_offset(double x, double y) {
  return {1.0 - x / kPitchLength, (kGoalCenterW - y) / kPitchWidth};
}

inline double distance_from_offset(double x, double y) { return std::sqrt(x * x + y * y); }

/// Goal-view angle in degrees, folded into (0, 90] by the principal arctan.
/// A zero denominator (the circle of radius 3.66 m around the goal center)
/// is exactly 90.
inline double angle_from_offset(double x, double y) {
  if (x == 0.0) {
    throw Error(ErrorCode::Degenerate,
                "shot taken on the goal line (x = 0, y = " + std::to_string(y) +
                    "); goal-view angle is undefined");
  }
  const double denom = x * x + y * y - kHalfGoal * kHalfGoal;
  if (denom == 0.0) return 90.0;
  return std::abs(std::atan(kGoalWidth * x / denom)) * 180.0 / std::numbers::pi;
}

inline double compute_distance(double coord_l, double coord_w) {
  const auto [x, y] = goal_offset(coord_l, coord_w);
  return distance_from_offset(x, y);
}

inline double compute_angle(double coord_l, double coord_w) {
  const auto [x, y] = goal_offset(coord_l, coord_w);
  return angle_from_offset(x, y);
}

}  // namespace xg::geometry
