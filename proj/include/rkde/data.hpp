#pragma once

#include "rkde/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rkde {

/// SplitMix64: a counter-based 64-bit generator. Output k of stream s is a
/// fixed function of (seed, s, k), so results are identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1].
    double uniform_open_left() { return 1.0 - uniform(); }
    /// Standard normal via Box-Muller.
    double normal();
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

    /// An independent generator for a sub-task (e.g. one benchmark permutation).
    [[nodiscard]] Rng split(std::uint64_t stream) const;

private:
    std::uint64_t state_;
    double cached_normal_ = 0;
    bool has_cached_normal_ = false;
};

struct Partition {
    std::vector<Eigen::Index> train;  // indices into [nominal; contaminating]
    std::vector<Eigen::Index> test;
};

struct Dataset {
    std::string name;
    MatrixXd nominal;
    MatrixXd contaminating;
    std::vector<Partition> partitions;
    std::vector<std::string> feature_names;

    [[nodiscard]] int dim() const { return static_cast<int>(nominal.cols()); }
    void validate() const;
};

/// Reads a headered, comma-separated file. Rows whose label is in
/// `nominal_labels` go to `nominal`, all others to `contaminating`.
Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::vector<std::string>& nominal_labels);

/// Reads a headered numeric CSV; every column not listed in `ignore_columns`
/// is a feature.
MatrixXd load_points_csv(const std::string& path, const std::vector<std::string>& ignore_columns = {});

/// Partition file: JSON list of {"train": [...], "test": [...]} objects.
std::vector<Partition> load_partitions(const std::string& path);

struct GaussianComponent {
    VectorXd mean;
    MatrixXd cov;
    double weight = 1;
};

MatrixXd synth_gaussian_mixture(const std::vector<GaussianComponent>& components, Eigen::Index n,
                                std::uint64_t seed);

MatrixXd synth_uniform_box(const VectorXd& lower, const VectorXd& upper, Eigen::Index n, std::uint64_t seed);

/// The 2-D three-component nominal mixture used by the synthetic benchmark family.
std::vector<GaussianComponent> default_nominal_mixture();
/// Contamination box for the synthetic family: [-6, 6]^2.
std::pair<VectorXd, VectorXd> default_contamination_box();

/// A synthetic dataset (nominal mixture vs uniform-box contamination).
Dataset synth_dataset(const std::string& name, Eigen::Index n_nominal, Eigen::Index n_contaminating,
                      std::uint64_t seed);

struct ContaminatedSample {
    MatrixXd train;
    std::vector<bool> is_contaminant;  // one entry per row of train
    Eigen::Index n_contaminating = 0;
};

/// Appends floor(epsilon * n0) rows drawn without replacement from the pool.
ContaminatedSample mix_contamination(const MatrixXd& nominal_train, const MatrixXd& pool, double epsilon,
                                     std::uint64_t seed);

/// Rows of `m` selected by index.
MatrixXd select_rows(const MatrixXd& m, const std::vector<Eigen::Index>& rows);

}  // namespace rkde
