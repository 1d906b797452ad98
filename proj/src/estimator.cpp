#include "rough/estimator.hpp"

#include <stdexcept>

namespace rough {

std::string to_string(EstimatorTarget t) {
    switch (t) {
        case EstimatorTarget::roughness: return "roughness";
        case EstimatorTarget::second_moment: return "second-moment";
        case EstimatorTarget::mean_height: return "mean-height";
    }
    throw std::invalid_argument("unknown estimator target");
}

EstimatorTarget estimator_target_from_string(const std::string& name) {
    if (name == "roughness") return EstimatorTarget::roughness;
    if (name == "second-moment") return EstimatorTarget::second_moment;
    if (name == "mean-height") return EstimatorTarget::mean_height;
    throw std::invalid_argument("unknown estimator target '" + name +
                                "' (expected roughness, second-moment, or mean-height)");
}

} // namespace rough
