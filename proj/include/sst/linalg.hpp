#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sst/error.hpp"

namespace sst {

struct Vec3 {
    std::array<double, 3> v{0.0, 0.0, 0.0};

    double& operator[](std::size_t i) { return v[i]; }
    const double& operator[](std::size_t i) const { return v[i]; }
    auto begin() const { return v.begin(); }
    auto end() const { return v.end(); }
    bool operator==(const Vec3&) const = default;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {{a[0] + b[0], a[1] + b[1], a[2] + b[2]}}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {{a[0] - b[0], a[1] - b[1], a[2] - b[2]}}; }
inline Vec3 operator*(double s, const Vec3& a) { return {{s * a[0], s * a[1], s * a[2]}}; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double squared_dist(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

inline double squared_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double euclidean_dist(const std::vector<double>& a, const std::vector<double>& b) {
    return std::sqrt(squared_dist(a, b));
}

// Dense row-major matrix, sized once and indexed explicitly.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::vector<double> row(std::size_t i) const {
        return std::vector<double>(data.begin() + static_cast<std::ptrdiff_t>(i * cols),
                                   data.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
    }
};

// Probabilities are clamped before any log so saturated predictions stay finite.
inline constexpr double kProbEps = 1e-7;

inline double clamp_prob(double p) {
    return p < kProbEps ? kProbEps : (p > 1.0 - kProbEps ? 1.0 - kProbEps : p);
}

inline double binary_cross_entropy(double p, double target) {
    p = clamp_prob(p);
    return -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
}

inline Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols != b.rows)
        fail(Err::ShapeMismatch, "matmul: " + std::to_string(a.cols) + " vs " + std::to_string(b.rows));
    Mat out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

} // namespace sst
