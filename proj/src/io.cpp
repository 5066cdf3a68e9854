#include "rkde/io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#ifndef RKDE_VERSION
#define RKDE_VERSION "0.1.0"
#endif

namespace rkde {

std::string version_string() { return RKDE_VERSION; }

namespace {

json vector_to_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd vector_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <typename T>
T get_field(const json& j, const char* key) {
    require(j.contains(key), "schema", std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error("schema", std::string("field '") + key + "': " + e.what());
    }
}

}  // namespace

json to_json(const KernelSpec<double>& spec) {
    json j{{"family", std::string(to_string(spec.family))}, {"sigma", spec.sigma}, {"dim", spec.dim}};
    if (spec.family == KernelFamily::Student) j["nu"] = spec.nu;
    return j;
}

KernelSpec<double> kernel_from_json(const json& j) {
    KernelSpec<double> spec;
    spec.family = kernel_family_from_string(get_field<std::string>(j, "family"));
    spec.sigma = get_field<double>(j, "sigma");
    spec.dim = get_field<int>(j, "dim");
    if (j.contains("nu")) spec.nu = get_field<double>(j, "nu");
    spec.validate();
    return spec;
}

json to_json(const LossSpec<double>& spec) {
    json j{{"family", std::string(to_string(spec.family))}};
    switch (spec.family) {
        case LossFamily::Quadratic: break;
        case LossFamily::Absolute: j["floor"] = spec.floor; break;
        case LossFamily::Huber: j["a"] = spec.a; break;
        case LossFamily::Hampel:
            j["a"] = spec.a;
            j["b"] = spec.b;
            j["c"] = spec.c;
            break;
    }
    return j;
}

LossSpec<double> loss_from_json(const json& j) {
    LossSpec<double> spec;
    spec.family = loss_family_from_string(get_field<std::string>(j, "family"));
    if (j.contains("a")) spec.a = get_field<double>(j, "a");
    if (j.contains("b")) spec.b = get_field<double>(j, "b");
    if (j.contains("c")) spec.c = get_field<double>(j, "c");
    if (j.contains("floor")) spec.floor = get_field<double>(j, "floor");
    spec.validate();
    return spec;
}

json to_json(const Model& model) {
    json points = json::array();
    for (Eigen::Index i = 0; i < model.train.rows(); ++i) {
        const VectorXd row = model.train.row(i).transpose();
        points.push_back(vector_to_json(row));
    }
    const auto& m = model.fit_meta;
    json j{{"kind", std::string(to_string(model.kind))},
           {"kernel", to_json(model.kernel)},
           {"loss", model.loss ? to_json(*model.loss) : json(nullptr)},
           {"points", points},
           {"weights", vector_to_json(model.weights)},
           {"sigmas", model.kind == EstimatorKind::VKDE ? vector_to_json(model.sigmas) : json::array()},
           {"fit_meta",
            {{"iterations", m.iterations},
             {"converged", m.converged},
             {"objective", m.objective},
             {"objective_trace", m.objective_trace},
             {"residual", m.residual},
             {"warnings", m.warnings}}}};
    return j;
}

Model model_from_json(const json& j) {
    Model model;
    model.kind = estimator_kind_from_string(get_field<std::string>(j, "kind"));
    require(j.contains("kernel"), "schema", "missing field 'kernel'");
    model.kernel = kernel_from_json(j.at("kernel"));
    if (j.contains("loss") && !j.at("loss").is_null()) model.loss = loss_from_json(j.at("loss"));
    const auto rows = get_field<std::vector<std::vector<double>>>(j, "points");
    require(!rows.empty(), "schema", "model has no training points");
    model.train.resize(static_cast<Eigen::Index>(rows.size()), model.kernel.dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(static_cast<int>(rows[i].size()) == model.kernel.dim, "schema",
                "model point " + std::to_string(i) + " has the wrong dimension");
        for (int k = 0; k < model.kernel.dim; ++k) model.train(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
    }
    model.weights = vector_from_json(get_field<json>(j, "weights"));
    require(model.weights.size() == model.train.rows(), "schema", "model weights and points differ in length");
    if (j.contains("sigmas")) model.sigmas = vector_from_json(j.at("sigmas"));
    require(model.kind != EstimatorKind::VKDE || model.sigmas.size() == model.train.rows(), "schema",
            "VKDE model needs one bandwidth per point");
    require(model.kind != EstimatorKind::RKDE || model.loss.has_value(), "schema", "RKDE model needs a loss");
    if (j.contains("fit_meta")) {
        const auto& m = j.at("fit_meta");
        model.fit_meta.iterations = m.value("iterations", 0);
        model.fit_meta.converged = m.value("converged", true);
        model.fit_meta.objective = m.value("objective", 0.0);
        model.fit_meta.objective_trace = m.value("objective_trace", std::vector<double>{});
        model.fit_meta.residual = m.value("residual", 0.0);
        model.fit_meta.warnings = m.value("warnings", std::vector<std::string>{});
    }
    return model;
}

void save_model(const Model& model, const std::string& path, const json& config) {
    json j = to_json(model);
    j["version"] = version_string();
    j["config"] = config;
    write_text_file(path, j.dump(2) + "\n");
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "io", "cannot open model file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error("parse", "'" + path + "': " + e.what());
    }
    return model_from_json(j);
}

json to_json(const InfluenceResult<double>& inf) {
    return {{"x_prime", vector_to_json(inf.x_prime)},
            {"alphas", vector_to_json(inf.alphas)},
            {"alpha_prime", inf.alpha_prime},
            {"condition", inf.condition}};
}

json to_json(const EvalReport& report) {
    json roc = json::array();
    for (const auto& p : report.roc) roc.push_back({p.fpr, p.tpr});
    json j{{"auc", std::isfinite(report.auc) ? json(report.auc) : json(nullptr)},
           {"kl", std::isfinite(report.kl) ? json(report.kl) : json(nullptr)},
           {"kl_infinite", report.kl_infinite},
           {"roc", roc},
           {"seed", report.seed}};
    return j;
}

json to_json(const SignedRankResult& r) {
    return {{"r1", r.r1},
            {"r2", r.r2},
            {"t", r.t_stat},
            {"p_value", r.p_value},
            {"n_effective", r.n_effective},
            {"exact", r.exact}};
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
    out << "dataset,estimator,epsilon,permutation,kl,kl_infinite_flag,auc\n";
    for (const auto& r : rows)
        out << r.dataset << ',' << r.estimator << ',' << format_double(r.epsilon) << ',' << r.permutation << ','
            << format_double(r.report.kl) << ',' << (r.report.kl_infinite ? 1 : 0) << ','
            << format_double(r.report.auc) << '\n';
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "io", "cannot write '" + path + "'");
    out << content;
    require(out.good(), "io", "write to '" + path + "' failed");
}

}  // namespace rkde
