#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sst/error.hpp"
#include "sst/linalg.hpp"

namespace sst {

enum class Activation : std::uint32_t { None = 0, Relu = 1, Sigmoid = 2 };

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline void apply_activation(Mat& m, Activation act) {
    switch (act) {
        case Activation::None:
            break;
        case Activation::Relu:
            for (auto& v : m.data) v = v > 0.0 ? v : 0.0;
            break;
        case Activation::Sigmoid:
            for (auto& v : m.data) v = sigmoid(v);
            break;
    }
}

struct DenseLayer {
    Mat weight;                 // in_dim x out_dim
    std::vector<double> bias;   // out_dim
    Activation activation = Activation::None;
};

// Ordered dense stack; backs both the split classifier phi and CliqueNet psi.
struct ClassifierWeights {
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().weight.rows; }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().weight.cols; }

    void validate() const {
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& layer = layers[l];
            if (layer.bias.size() != layer.weight.cols)
                fail(Err::ShapeMismatch, "layer " + std::to_string(l) + " bias length != out dim");
            if (l > 0 && layers[l - 1].weight.cols != layer.weight.rows)
                fail(Err::ShapeMismatch, "layer " + std::to_string(l) + " input dim does not chain");
        }
    }
};

inline std::vector<double> mlp_forward(const ClassifierWeights& w, const std::vector<double>& input) {
    std::vector<double> x = input;
    for (const auto& layer : w.layers) {
        if (x.size() != layer.weight.rows)
            fail(Err::ShapeMismatch, "mlp input dim " + std::to_string(x.size()) + " != " +
                                         std::to_string(layer.weight.rows));
        std::vector<double> y(layer.bias);
        for (std::size_t i = 0; i < layer.weight.rows; ++i) {
            const double xi = x[i];
            if (xi == 0.0) continue;
            for (std::size_t j = 0; j < layer.weight.cols; ++j) y[j] += xi * layer.weight(i, j);
        }
        switch (layer.activation) {
            case Activation::None: break;
            case Activation::Relu:
                for (auto& v : y) v = v > 0.0 ? v : 0.0;
                break;
            case Activation::Sigmoid:
                for (auto& v : y) v = sigmoid(v);
                break;
        }
        x = std::move(y);
    }
    return x;
}

} // namespace sst
