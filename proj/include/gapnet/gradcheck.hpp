#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gapnet/network.hpp"

namespace gapnet {

/// Central-difference gradient of `loss` w.r.t. every parameter in `params`,
/// flattened in span order. Each parameter is restored after probing.
std::vector<double> finite_diff_grad(const ParameterRefs& params, const std::function<double()>& loss,
                                     double epsilon);

/// Mean BCE of the network in inference mode (dropout off), differentiated
/// numerically. epsilon must lie in [1e-7, 1e-4].
std::vector<double> finite_diff_grad(MlpNetwork& net, const Matrix& batch, std::span<const int> labels,
                                     double epsilon);

/// Largest |a - b| / max(|a|, |b|, floor) over paired entries.
double max_relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-6);

std::vector<double> flatten(const ConstParameterRefs& refs);

}  // namespace gapnet
