#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gapnet {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

class AdamState {
public:
    AdamState() = default;
    AdamState(std::size_t parameter_count, AdamConfig config);

    const AdamConfig& config() const noexcept { return config_; }
    std::uint64_t step_count() const noexcept { return step_count_; }
    std::span<const double> first_moment() const noexcept { return m_; }
    std::span<const double> second_moment() const noexcept { return v_; }

    /// One bias-corrected Adam update. `params` and `grads` are parallel
    /// lists of spans whose total length equals the state's parameter count.
    void step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads);

private:
    AdamConfig config_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::uint64_t step_count_ = 0;
};

inline void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
                      AdamState& state) {
    state.step(params, grads);
}

}  // namespace gapnet
