#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "rsde/driver.hpp"
#include "rsde/solver.hpp"

namespace rsde {

struct HolderEstimate {
    double mu = 0.0;
    double norm = 0.0;
    int depth = 0;
    bool dyadic_restricted = true;
};

// Discrete Holder norm sup |f_t - f_s| / |t-s|^mu of a path sampled on the
// uniform dyadic grid with 2^depth intervals over [0, horizon]. The default
// restricts the supremum to dyadic pairs; full sweeps all O(N^2) pairs.
HolderEstimate holder_norm(const std::vector<double>& values, double horizon, double mu,
                           bool full_pairs = false);

// Two-parameter variant for areas: |A(s,t)| / |t-s|^{2 mu} over dyadic pairs
// of the grid with n_points = 2^depth + 1 nodes.
HolderEstimate holder_norm_2var(const std::function<double(std::size_t, std::size_t)>& a2,
                                std::size_t n_points, double horizon, double mu);

// Rows with any NaN (failed samples) are the caller's business; these assume
// clean input. Energy distance is the V-statistic form: zero iff ensembles tie.
double energy_distance(const double* x, std::size_t nx, const double* y, std::size_t ny,
                       std::size_t dim);

struct PermutationTest {
    double statistic = 0.0;     // on the full ensembles
    double statistic_sub = 0.0; // on the subsample the permutations use
    double p_value = 1.0;
    int n_permutations = 0;
    std::size_t subsample = 0;
};

PermutationTest energy_perm_test(const std::vector<double>& x, std::size_t nx,
                                 const std::vector<double>& y, std::size_t ny,
                                 std::size_t dim, int n_permutations,
                                 std::size_t subsample_cap, std::uint64_t seed);

double ks_two_sample(std::vector<double> a, std::vector<double> b);
double ks_vs_cdf(std::vector<double> a, const std::function<double(double)>& cdf);
double normal_cdf(double x, double mean, double var);

// Strips rows containing NaN from a sample-major flat array.
std::vector<double> drop_nan_rows(const std::vector<double>& rows, std::size_t dim,
                                  std::size_t* kept = nullptr);

// Finite-dimensional-distribution comparison of (X^eps_{t}, X2_{s,t}, ...)
// against the reference (B, B2) ensemble.
struct FddConfig {
    std::vector<double> times;
    std::vector<std::pair<double, double>> pairs;
    std::size_t n_samples = 10000;
    std::size_t fbm_steps = 4096;
    QuadratureSpec quad{};
    int n_permutations = 200;
    std::size_t perm_cap = 2048;
    std::uint64_t ref_seed = 0x9e3779b97f4a7c15ull;
};

struct FddResult {
    std::vector<std::string> coords;
    PermutationTest energy;
    std::vector<double> ks_per_coord;
    std::size_t dim = 0;
    std::vector<double> eps_rows, ref_rows; // kept for downstream study output
};

FddResult fdd_test(const RandomWalkNoise& base, HurstParam h, const FddConfig& cfg);

// One row of a convergence study.
struct StudyCell {
    double eps = 0.0;
    std::string statistic;
    double value = 0.0;
    double p = -1.0; // -1 when no permutation p-value applies
    std::uint64_t seed = 0;
    int replicate = 0;
};

struct ConvergenceStudy {
    std::vector<StudyCell> cells;
    nlohmann::json manifest_fragment;

    // Strictly-decreasing-in-eps check for one statistic within one replicate;
    // eps enters sorted descending.
    static bool decreasing(const std::vector<double>& values);
    int replicates_decreasing(const std::string& statistic) const;
    int replicate_count(const std::string& statistic) const;
    nlohmann::json to_json() const;
};

struct SolutionStudyConfig {
    std::vector<double> eps_grid{0.3, 0.2, 0.1, 0.05}; // descending
    std::size_t n_samples = 10000;
    std::vector<double> times{1.0};
    std::uint64_t master_seed = 7;
    int n_replicates = 5;
    int first_replicate = 0; // replicate ids are absolute, so runs can resume
    NoiseLaw law = NoiseLaw::rademacher();
    LimitEnsembleConfig limit{};
    int substeps_per_block = 2;
    int n_permutations = 0; // 0 = skip permutation p-values
    std::size_t perm_cap = 2048;
    bool lognormal_marginal = false; // scalar-linear closed-form KS target
};

ConvergenceStudy solution_law_test(const VectorFieldSpec& vf, HurstParam h,
                                   const SolutionStudyConfig& cfg);

// Holder-norm stability of X^eps across an eps grid: per eps, the mean dyadic
// Holder norm over `replicas` fresh realizations at the given depth.
std::vector<double> driver_holder_sweep(const NoiseLaw& law, HurstParam h,
                                        const std::vector<double>& eps_grid, double mu,
                                        int depth, int replicas, std::uint64_t seed);

} // namespace rsde
