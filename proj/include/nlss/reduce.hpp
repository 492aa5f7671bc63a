#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace nlss {

// Deterministic pairwise summation. The reduction tree depends only on the
// element count, never on thread count or chunking, so results are
// bit-reproducible run to run.
namespace detail {

template <class T>
T pairwise_sum_impl(const T* data, std::size_t n) {
    if (n <= 16) {
        T s{};
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_impl(data, half) + pairwise_sum_impl(data + half, n - half);
}

} // namespace detail

inline double pairwise_sum(std::span<const double> v) {
    return detail::pairwise_sum_impl(v.data(), v.size());
}

inline std::complex<double> pairwise_sum(std::span<const std::complex<double>> v) {
    return detail::pairwise_sum_impl(v.data(), v.size());
}

// Sum of f(i) over i in [0, n) with the same fixed tree. Evaluates f once per
// index into a small stack buffer per leaf.
template <class F>
double pairwise_accumulate(std::size_t n, F&& f) {
    struct Rec {
        F& f;
        double run(std::size_t lo, std::size_t len) {
            if (len <= 16) {
                double s = 0.0;
                for (std::size_t i = 0; i < len; ++i) s += f(lo + i);
                return s;
            }
            const std::size_t half = len / 2;
            return run(lo, half) + run(lo + half, len - half);
        }
    } rec{f};
    return rec.run(0, n);
}

} // namespace nlss
