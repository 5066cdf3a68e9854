#include "rkde/data.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace rkde {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

std::string join_lines(const std::vector<std::size_t>& lines) {
    std::string s;
    for (std::size_t i = 0; i < lines.size() && i < 20; ++i) s += (i ? "," : "") + std::to_string(lines[i]);
    if (lines.size() > 20) s += ",...";
    return s;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
};

CsvTable read_table(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "io", "cannot open '" + path + "'");
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        if (t.header.empty()) {
            t.header = split_csv_line(line);
            continue;
        }
        t.rows.push_back(split_csv_line(line));
        t.line_numbers.push_back(line_no);
    }
    require(!t.header.empty(), "parse", "'" + path + "': missing header row");
    return t;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : state_(mix64(seed) ^ mix64(stream + kGolden)) {}

std::uint64_t Rng::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = uniform_open_left();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t bound) {
    require(bound > 0, "domain", "Rng::below: bound must be positive");
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

Rng Rng::split(std::uint64_t stream) const {
    Rng child(0);
    child.state_ = mix64(state_ ^ mix64(stream + 1));
    return child;
}

void Dataset::validate() const {
    require(nominal.rows() >= 1, "schema", "dataset '" + name + "' has no nominal rows");
    require(contaminating.rows() == 0 || contaminating.cols() == nominal.cols(), "schema",
            "dataset '" + name + "': nominal and contaminating dimensions differ");
    require(nominal.allFinite() && contaminating.allFinite(), "schema", "dataset '" + name + "' contains NaN/Inf");
    const Eigen::Index total = nominal.rows() + contaminating.rows();
    for (const auto& p : partitions) {
        std::vector<Eigen::Index> tr = p.train, te = p.test;
        std::sort(tr.begin(), tr.end());
        std::sort(te.begin(), te.end());
        for (auto i : tr) require(i >= 0 && i < total, "schema", "partition index out of range");
        for (auto i : te) require(i >= 0 && i < total, "schema", "partition index out of range");
        std::vector<Eigen::Index> both;
        std::set_intersection(tr.begin(), tr.end(), te.begin(), te.end(), std::back_inserter(both));
        require(both.empty(), "schema", "partition train and test indices overlap");
    }
}

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::vector<std::string>& nominal_labels) {
    const CsvTable t = read_table(path);
    const auto it = std::find(t.header.begin(), t.header.end(), label_column);
    require(it != t.header.end(), "schema", "'" + path + "': no label column named '" + label_column + "'");
    const auto label_idx = static_cast<std::size_t>(it - t.header.begin());
    const std::size_t d = t.header.size() - 1;
    require(d >= 1, "schema", "'" + path + "': no feature columns");

    std::vector<std::vector<double>> nom, con;
    std::vector<std::size_t> bad;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        if (row.size() != t.header.size()) {
            bad.push_back(t.line_numbers[r]);
            continue;
        }
        std::vector<double> feat;
        bool ok = true;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c == label_idx) continue;
            double v;
            if (!parse_double(row[c], v)) ok = false;
            feat.push_back(v);
        }
        if (!ok) {
            bad.push_back(t.line_numbers[r]);
            continue;
        }
        const bool is_nominal =
            std::find(nominal_labels.begin(), nominal_labels.end(), row[label_idx]) != nominal_labels.end();
        (is_nominal ? nom : con).push_back(std::move(feat));
    }
    require(bad.empty(), "parse", "'" + path + "': malformed or non-numeric rows at line(s) " + join_lines(bad));

    auto to_matrix = [d](const std::vector<std::vector<double>>& rows) {
        MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        return m;
    };
    Dataset ds;
    ds.name = path;
    ds.nominal = to_matrix(nom);
    ds.contaminating = to_matrix(con);
    for (std::size_t c = 0; c < t.header.size(); ++c)
        if (c != label_idx) ds.feature_names.push_back(t.header[c]);
    ds.validate();
    return ds;
}

MatrixXd load_points_csv(const std::string& path, const std::vector<std::string>& ignore_columns) {
    const CsvTable t = read_table(path);
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < t.header.size(); ++c)
        if (std::find(ignore_columns.begin(), ignore_columns.end(), t.header[c]) == ignore_columns.end())
            keep.push_back(c);
    require(!keep.empty(), "schema", "'" + path + "': no feature columns");
    MatrixXd m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(keep.size()));
    std::vector<std::size_t> bad;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        bool ok = row.size() == t.header.size();
        for (std::size_t c = 0; ok && c < keep.size(); ++c) {
            double v;
            ok = parse_double(row[keep[c]], v);
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
        if (!ok) bad.push_back(t.line_numbers[r]);
    }
    require(bad.empty(), "parse", "'" + path + "': malformed or non-numeric rows at line(s) " + join_lines(bad));
    return m;
}

std::vector<Partition> load_partitions(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "io", "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("parse", "'" + path + "': " + e.what());
    }
    require(j.is_array(), "schema", "'" + path + "': partition file must be a JSON list");
    std::vector<Partition> out;
    for (const auto& item : j) {
        require(item.contains("train") && item.contains("test"), "schema",
                "'" + path + "': each partition needs 'train' and 'test' index arrays");
        out.push_back({item["train"].get<std::vector<Eigen::Index>>(), item["test"].get<std::vector<Eigen::Index>>()});
    }
    return out;
}

MatrixXd synth_gaussian_mixture(const std::vector<GaussianComponent>& components, Eigen::Index n,
                                std::uint64_t seed) {
    require(!components.empty(), "config", "Gaussian mixture needs at least one component");
    const Eigen::Index d = components.front().mean.size();
    std::vector<double> cumulative;
    double total = 0;
    std::vector<MatrixXd> factors;
    for (const auto& c : components) {
        require(c.mean.size() == d && c.cov.rows() == d && c.cov.cols() == d, "config",
                "Gaussian mixture components have inconsistent dimensions");
        require(c.weight >= 0 && std::isfinite(c.weight), "config", "mixture weights must be nonnegative");
        Eigen::LLT<MatrixXd> llt(c.cov);
        require(llt.info() == Eigen::Success, "config", "mixture covariance is not positive definite");
        factors.push_back(llt.matrixL());
        total += c.weight;
        cumulative.push_back(total);
    }
    require(total > 0, "config", "mixture weights sum to zero");

    Rng rng(seed);
    MatrixXd out(n, d);
    VectorXd z(d);
    for (Eigen::Index r = 0; r < n; ++r) {
        const double u = rng.uniform() * total;
        std::size_t k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                                 cumulative.begin());
        k = std::min(k, components.size() - 1);
        while (components[k].weight == 0) --k;  // u never lands on a zero-width interval except at the top
        for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.normal();
        out.row(r) = (components[k].mean + factors[k] * z).transpose();
    }
    return out;
}

MatrixXd synth_uniform_box(const VectorXd& lower, const VectorXd& upper, Eigen::Index n, std::uint64_t seed) {
    require(lower.size() == upper.size() && lower.size() >= 1, "config", "box bounds have inconsistent dimensions");
    require((lower.array() <= upper.array()).all(), "config", "box lower bound exceeds upper bound");
    Rng rng(seed);
    MatrixXd out(n, lower.size());
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index j = 0; j < lower.size(); ++j)
            out(r, j) = lower(j) + (upper(j) - lower(j)) * rng.uniform();
    return out;
}

std::vector<GaussianComponent> default_nominal_mixture() {
    auto comp = [](double mx, double my, double sxx, double sxy, double syy, double w) {
        GaussianComponent c;
        c.mean = Eigen::Vector2d(mx, my);
        c.cov = (Eigen::Matrix2d() << sxx, sxy, sxy, syy).finished();
        c.weight = w;
        return c;
    };
    return {comp(-1.5, -1.0, 0.40, 0.15, 0.30, 0.4), comp(1.5, -0.5, 0.30, -0.10, 0.50, 0.35),
            comp(0.0, 1.8, 0.60, 0.0, 0.20, 0.25)};
}

std::pair<VectorXd, VectorXd> default_contamination_box() {
    return {VectorXd::Constant(2, -6.0), VectorXd::Constant(2, 6.0)};
}

Dataset synth_dataset(const std::string& name, Eigen::Index n_nominal, Eigen::Index n_contaminating,
                      std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.name = name;
    ds.nominal = synth_gaussian_mixture(default_nominal_mixture(), n_nominal, rng.next_u64());
    const auto [lo, hi] = default_contamination_box();
    ds.contaminating = synth_uniform_box(lo, hi, n_contaminating, rng.next_u64());
    ds.feature_names = {"x1", "x2"};
    return ds;
}

ContaminatedSample mix_contamination(const MatrixXd& nominal_train, const MatrixXd& pool, double epsilon,
                                     std::uint64_t seed) {
    require(epsilon >= 0 && std::isfinite(epsilon), "config", "contamination ratio must be nonnegative");
    const Eigen::Index n0 = nominal_train.rows();
    // The small slack keeps e.g. 0.3 * 10 from flooring to 2.
    const auto n1 = static_cast<Eigen::Index>(std::floor(epsilon * static_cast<double>(n0) + 1e-9));
    require(n1 <= pool.rows(), "domain",
            "contamination pool has " + std::to_string(pool.rows()) + " rows but " + std::to_string(n1) +
                " are required");
    require(n1 == 0 || pool.cols() == nominal_train.cols(), "dimension", "contamination pool dimension differs");

    // Partial Fisher-Yates: the first n1 entries are a uniform sample without replacement.
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(pool.rows()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Eigen::Index>(i);
    Rng rng(seed);
    for (Eigen::Index i = 0; i < n1; ++i) {
        const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(pool.rows() - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }

    ContaminatedSample out;
    out.n_contaminating = n1;
    out.train.resize(n0 + n1, nominal_train.cols());
    out.train.topRows(n0) = nominal_train;
    for (Eigen::Index i = 0; i < n1; ++i) out.train.row(n0 + i) = pool.row(idx[static_cast<std::size_t>(i)]);
    out.is_contaminant.assign(static_cast<std::size_t>(n0), false);
    out.is_contaminant.resize(static_cast<std::size_t>(n0 + n1), true);
    return out;
}

MatrixXd select_rows(const MatrixXd& m, const std::vector<Eigen::Index>& rows) {
    MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i] >= 0 && rows[i] < m.rows(), "domain", "row index out of range");
        out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    }
    return out;
}

}  // namespace rkde
