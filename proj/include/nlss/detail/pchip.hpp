#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "nlss/errors.hpp"

namespace nlss::detail {

// Monotone cubic Hermite interpolation (Fritsch-Carlson slopes). Nodes must
// be strictly increasing; data monotonicity is preserved.
class Pchip {
  public:
    Pchip() = default;

    Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw InvalidArgument("pchip: need >= 2 nodes");
        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            if (!(h[i] > 0.0)) throw InvalidArgument("pchip: nodes must increase");
            delta[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        d_.assign(n, 0.0);
        d_[0] = delta[0];
        d_[n - 1] = delta[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] <= 0.0) {
                d_[i] = 0.0;
            } else {
                // weighted harmonic mean keeps the interpolant monotone
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
    }

    double min_x() const { return x_.front(); }
    double max_x() const { return x_.back(); }

    double operator()(double xq) const {
        if (xq <= x_.front()) return y_.front() + d_.front() * (xq - x_.front());
        if (xq >= x_.back()) return y_.back() + d_.back() * (xq - x_.back());
        std::size_t lo = 0, hi = x_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (x_[mid] <= xq ? lo : hi) = mid;
        }
        const double h = x_[lo + 1] - x_[lo];
        const double t = (xq - x_[lo]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * y_[lo] + h * h10 * d_[lo] + h01 * y_[lo + 1] + h * h11 * d_[lo + 1];
    }

  private:
    std::vector<double> x_, y_, d_;
};

} // namespace nlss::detail
