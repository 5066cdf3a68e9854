#pragma once

#include "rkde/evaluation.hpp"
#include "rkde/influence.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace rkde {

using nlohmann::json;

/// Build version (git describe when available).
std::string version_string();

json to_json(const KernelSpec<double>& spec);
KernelSpec<double> kernel_from_json(const json& j);

json to_json(const LossSpec<double>& spec);
LossSpec<double> loss_from_json(const json& j);

/// {kind, kernel, loss, points (row-major), weights, sigmas, fit_meta}. Doubles
/// use shortest round-trip formatting, so save/load is bit-exact.
json to_json(const Model& model);
Model model_from_json(const json& j);

void save_model(const Model& model, const std::string& path, const json& config = json::object());
Model load_model(const std::string& path);

json to_json(const InfluenceResult<double>& inf);
json to_json(const EvalReport& report);
json to_json(const SignedRankResult& r);

/// One row per (estimator, epsilon, permutation):
/// dataset,estimator,epsilon,permutation,kl,kl_infinite_flag,auc
void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);

/// Shortest round-trip decimal for a double (used for CSV output).
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace rkde
