#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <vector>

#include "nlss/errors.hpp"

namespace nlss {

// Uniform periodic tensor grid on [-L/2, L/2)^dim with standard DFT
// wavenumber ordering. Immutable after construction; share freely.
class Grid {
  public:
    Grid(int dim, int points_per_axis, double box_length) : dim_(dim) {
        if (dim < 1 || dim > 3) throw InvalidArgument("grid: dim must be 1, 2 or 3");
        if (points_per_axis < 4) throw InvalidArgument("grid: points_per_axis must be >= 4");
        if (!fft_friendly(points_per_axis))
            throw InvalidArgument("grid: points_per_axis must be even with prime factors in {2,3,5}");
        if (!(box_length > 0.0)) throw InvalidArgument("grid: box_length must be positive");
        n_.fill(1);
        box_.fill(0.0);
        h_.fill(0.0);
        total_ = 1;
        for (int a = 0; a < dim; ++a) {
            n_[a] = points_per_axis;
            box_[a] = box_length;
            h_[a] = box_length / points_per_axis;
            total_ *= static_cast<std::size_t>(points_per_axis);
            k_[a].resize(points_per_axis);
            const double dk = 2.0 * std::numbers::pi / box_length;
            for (int i = 0; i < points_per_axis; ++i) {
                const int m = (i <= points_per_axis / 2 - 1) ? i : i - points_per_axis;
                k_[a][i] = dk * m;
            }
        }
    }

    int dim() const { return dim_; }
    int n(int axis) const { return n_[axis]; }
    double box(int axis) const { return box_[axis]; }
    double spacing(int axis) const { return h_[axis]; }
    std::size_t total() const { return total_; }
    const std::vector<double>& wavenumbers(int axis) const { return k_[axis]; }

    // Quadrature weight of one grid cell.
    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim_; ++a) v *= h_[a];
        return v;
    }

    double volume() const {
        double v = 1.0;
        for (int a = 0; a < dim_; ++a) v *= box_[a];
        return v;
    }

    // Coordinate of index i along an axis, box centered at the origin.
    double coord(int axis, int i) const { return -0.5 * box_[axis] + h_[axis] * i; }

    // Row-major flattening, axis 0 slowest.
    std::size_t index(int ix, int iy, int iz) const {
        return (static_cast<std::size_t>(ix) * n_[1] + iy) * n_[2] + iz;
    }

    // Decompose a flat index into per-axis indices (unused axes give 0).
    std::array<int, 3> unravel(std::size_t idx) const {
        std::array<int, 3> out{0, 0, 0};
        out[2] = static_cast<int>(idx % n_[2]);
        idx /= n_[2];
        out[1] = static_cast<int>(idx % n_[1]);
        out[0] = static_cast<int>(idx / n_[1]);
        return out;
    }

    bool same_shape(const Grid& other) const {
        return dim_ == other.dim_ && n_ == other.n_ && box_ == other.box_;
    }

    static bool fft_friendly(int n) {
        if (n % 2 != 0) return false;
        for (int p : {2, 3, 5})
            while (n % p == 0) n /= p;
        return n == 1;
    }

  private:
    int dim_;
    std::array<int, 3> n_;
    std::array<double, 3> box_;
    std::array<double, 3> h_;
    std::array<std::vector<double>, 3> k_;
    std::size_t total_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(int dim, int points_per_axis, double box_length) {
    return std::make_shared<const Grid>(dim, points_per_axis, box_length);
}

} // namespace nlss
