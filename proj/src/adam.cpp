#include "gapnet/adam.hpp"

#include <cmath>
#include <string>

#include "gapnet/error.hpp"

namespace gapnet {

void AdamConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("adam: learning rate must be > 0");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
        throw ValidationError("adam: betas must lie in (0, 1)");
    if (!(epsilon > 0.0)) throw ValidationError("adam: epsilon must be > 0");
}

AdamState::AdamState(std::size_t parameter_count, AdamConfig config)
    : config_(config), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {
    config_.validate();
}

void AdamState::step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads) {
    if (params.size() != grads.size()) throw ValidationError("adam: parameter and gradient lists differ");
    std::size_t total = 0;
    for (std::size_t b = 0; b < params.size(); ++b) {
        if (params[b].size() != grads[b].size()) throw ValidationError("adam: block shape mismatch");
        total += params[b].size();
    }
    if (total != m_.size()) {
        throw ValidationError("adam: state holds " + std::to_string(m_.size()) + " moments, got " +
                              std::to_string(total) + " parameters");
    }
    std::size_t index = 0;
    for (const auto& g : grads)
        for (double v : g) {
            if (!std::isfinite(v))
                throw TrainingError("adam: non-finite gradient at parameter " + std::to_string(index));
            ++index;
        }

    ++step_count_;
    const auto t = static_cast<double>(step_count_);
    const double c1 = 1.0 - std::pow(config_.beta1, t);
    const double c2 = 1.0 - std::pow(config_.beta2, t);
    index = 0;
    for (std::size_t b = 0; b < params.size(); ++b) {
        auto p = params[b];
        const auto g = grads[b];
        for (std::size_t i = 0; i < p.size(); ++i, ++index) {
            double& m = m_[index];
            double& v = v_[index];
            m = config_.beta1 * m + (1.0 - config_.beta1) * g[i];
            v = config_.beta2 * v + (1.0 - config_.beta2) * g[i] * g[i];
            const double m_hat = m / c1;
            const double v_hat = v / c2;
            p[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
        }
    }
}

}  // namespace gapnet
