#pragma once

#include <string>

namespace rough {

// What the influence-function estimators solve for. mean_height is kept as
// an explicit target so that asking for it produces a precise error: the
// centroid of an axial distribution is not identifiable through either
// channel (only even moments reach the image plane).
enum class EstimatorTarget {
    roughness,      // sigma = sqrt(theta2 - theta1^2)
    second_moment,  // theta2
    mean_height,    // theta1; unidentifiable, always errors
};

std::string to_string(EstimatorTarget t);
EstimatorTarget estimator_target_from_string(const std::string& name);

} // namespace rough
