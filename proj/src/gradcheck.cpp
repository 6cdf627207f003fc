#include "gapnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "gapnet/error.hpp"

namespace gapnet {

std::vector<double> finite_diff_grad(const ParameterRefs& params, const std::function<double()>& loss,
                                     double epsilon) {
    if (!(epsilon >= 1e-7 && epsilon <= 1e-4)) throw ValidationError("finite_diff_grad: epsilon outside [1e-7, 1e-4]");
    std::vector<double> out;
    for (auto block : params) {
        for (double& p : block) {
            const double saved = p;
            p = saved + epsilon;
            const double up = loss();
            p = saved - epsilon;
            const double down = loss();
            p = saved;
            out.push_back((up - down) / (2.0 * epsilon));
        }
    }
    return out;
}

std::vector<double> finite_diff_grad(MlpNetwork& net, const Matrix& batch, std::span<const int> labels,
                                     double epsilon) {
    auto loss = [&] {
        const Matrix out = infer(net, batch);
        return bce_loss(out.values(), labels);
    };
    return finite_diff_grad(net.parameters(), loss, epsilon);
}

double max_relative_error(std::span<const double> a, std::span<const double> b, double floor) {
    if (a.size() != b.size()) throw ValidationError("max_relative_error: length mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
        worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
    }
    return worst;
}

std::vector<double> flatten(const ConstParameterRefs& refs) {
    std::vector<double> out;
    for (auto r : refs) out.insert(out.end(), r.begin(), r.end());
    return out;
}

}  // namespace gapnet
