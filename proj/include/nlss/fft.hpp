#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "nlss/grid.hpp"

namespace nlss {
namespace detail {

// Process-wide FFTW plan cache. Plans are created once per grid shape with
// FFTW_ESTIMATE (deterministic plan choice) and reused via the new-array
// execute interface, which is thread-safe on distinct arrays. Plan creation
// itself is serialized.
class FftPlanCache {
  public:
    struct Plans {
        fftw_plan fwd = nullptr;
        fftw_plan bwd = nullptr;
    };

    static Plans get(const Grid& g) {
        static FftPlanCache cache;
        std::scoped_lock lock(cache.mu_);
        std::array<int, 4> key{g.dim(), g.n(0), g.dim() > 1 ? g.n(1) : 1,
                               g.dim() > 2 ? g.n(2) : 1};
        auto it = cache.plans_.find(key);
        if (it != cache.plans_.end()) return it->second;

        std::vector<std::complex<double>> a(g.total()), b(g.total());
        std::vector<int> dims(g.dim());
        for (int i = 0; i < g.dim(); ++i) dims[i] = g.n(i);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        Plans p;
        p.fwd = fftw_plan_dft(g.dim(), dims.data(), reinterpret_cast<fftw_complex*>(a.data()),
                              reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD, flags);
        p.bwd = fftw_plan_dft(g.dim(), dims.data(), reinterpret_cast<fftw_complex*>(a.data()),
                              reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD, flags);
        if (!p.fwd || !p.bwd) throw Error("fft: plan creation failed");
        cache.plans_.emplace(key, p);
        return p;
    }

  private:
    FftPlanCache() = default;
    ~FftPlanCache() {
        for (auto& [k, p] : plans_) {
            fftw_destroy_plan(p.fwd);
            fftw_destroy_plan(p.bwd);
        }
    }
    std::mutex mu_;
    std::map<std::array<int, 4>, Plans> plans_;
};

} // namespace detail

// Unnormalized forward DFT (FFTW sign convention, exponent -i k.x).
inline void fft_forward(const Grid& g, const std::complex<double>* in, std::complex<double>* out) {
    auto plans = detail::FftPlanCache::get(g);
    fftw_execute_dft(plans.fwd, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

// Inverse DFT including the 1/N normalization, so inverse(forward(f)) == f.
inline void fft_inverse(const Grid& g, const std::complex<double>* in, std::complex<double>* out) {
    auto plans = detail::FftPlanCache::get(g);
    fftw_execute_dft(plans.bwd, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
    const double scale = 1.0 / static_cast<double>(g.total());
    for (std::size_t i = 0; i < g.total(); ++i) out[i] *= scale;
}

} // namespace nlss
