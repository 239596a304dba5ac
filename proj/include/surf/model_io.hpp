#pragma once

#include <string>
#include <variant>

#include "surf/classical.hpp"
#include "surf/nn.hpp"

namespace surf {

using ModelAny = std::variant<NnModel, SvmModel, ForestModel>;

// "cnn" | "lstm" | "lstm-cnn" | "svm" | "forest"
std::string model_arch_name(const ModelAny& m);
int model_window_seconds(const ModelAny& m);

Prediction predict_any(const ModelAny& m, const LabeledWindow& w);

// SURFMODEL v1: plain text, `%.17g` numbers (decimal round-trip exact).
// Layout: header fields (arch, window_seconds, seed, ...), then per-layer
// shape lines followed by flat row-major weight arrays.
void save_model(const ModelAny& m, const std::string& path);
ModelAny load_model(const std::string& path);

// Convenience: load and require a specific nn architecture.
NnModel load_nn_model(const std::string& path, Arch expected);

}  // namespace surf
