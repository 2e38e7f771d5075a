#include "rsde/stats.hpp"

#include <algorithm>
#include <cmath>

#include "rsde/errors.hpp"
#include "rsde/kernels.hpp"
#include "rsde/parallel.hpp"
#include "rsde/philox.hpp"

namespace rsde {

namespace {

int depth_of(std::size_t n_values) {
    std::size_t n = n_values - 1;
    int depth = 0;
    while (n > 1) {
        if (n % 2 != 0)
            throw domain_error("grid size must be 2^depth + 1");
        n /= 2;
        ++depth;
    }
    return depth;
}

void check_mu(double mu) {
    if (!(mu > 0.0) || mu > 1.0)
        throw domain_error("Holder exponent must lie in (0, 1]");
}

} // namespace

HolderEstimate holder_norm(const std::vector<double>& values, double horizon, double mu,
                           bool full_pairs) {
    check_mu(mu);
    const int depth = depth_of(values.size());
    if (depth < 4)
        throw domain_error("holder_norm needs dyadic depth >= 4");
    const std::size_t N = values.size() - 1;
    double sup = 0.0;
    if (full_pairs) {
        for (std::size_t s = 0; s < N; ++s)
            for (std::size_t t = s + 1; t <= N; ++t) {
                const double dt = horizon * static_cast<double>(t - s) / N;
                sup = std::max(sup, std::abs(values[t] - values[s]) / std::pow(dt, mu));
            }
    } else {
        for (int l = 0; l <= depth; ++l) {
            const std::size_t stride = N >> l;          // 2^(depth-l)
            const double dt = horizon * stride / static_cast<double>(N);
            const double scale = std::pow(dt, mu);
            for (std::size_t j = 0; j + stride <= N; j += stride)
                sup = std::max(sup, std::abs(values[j + stride] - values[j]) / scale);
        }
    }
    return {mu, sup, depth, !full_pairs};
}

HolderEstimate holder_norm_2var(const std::function<double(std::size_t, std::size_t)>& a2,
                                std::size_t n_points, double horizon, double mu) {
    check_mu(mu);
    const int depth = depth_of(n_points);
    const std::size_t N = n_points - 1;
    double sup = 0.0;
    for (int l = 0; l <= depth; ++l) {
        const std::size_t stride = N >> l;
        const double dt = horizon * stride / static_cast<double>(N);
        const double scale = std::pow(dt, 2.0 * mu);
        for (std::size_t j = 0; j + stride <= N; j += stride)
            sup = std::max(sup, std::abs(a2(j, j + stride)) / scale);
    }
    return {mu, sup, depth, true};
}

double energy_distance(const double* x, std::size_t nx, const double* y, std::size_t ny,
                       std::size_t dim) {
    if (nx == 0 || ny == 0)
        throw domain_error("energy distance needs non-empty ensembles");
    const double cross = kernels::energy_cross_sum(x, nx, y, ny, dim);
    const double xx = kernels::energy_cross_sum(x, nx, x, nx, dim);
    const double yy = kernels::energy_cross_sum(y, ny, y, ny, dim);
    const double nxd = static_cast<double>(nx), nyd = static_cast<double>(ny);
    return 2.0 * cross / (nxd * nyd) - xx / (nxd * nxd) - yy / (nyd * nyd);
}

namespace {

std::vector<double> stride_subsample(const std::vector<double>& rows, std::size_t n,
                                     std::size_t dim, std::size_t cap) {
    if (n <= cap)
        return rows;
    std::vector<double> out;
    out.reserve(cap * dim);
    for (std::size_t i = 0; i < cap; ++i) {
        const std::size_t src = i * n / cap;
        out.insert(out.end(), rows.begin() + src * dim, rows.begin() + (src + 1) * dim);
    }
    return out;
}

} // namespace

PermutationTest energy_perm_test(const std::vector<double>& x, std::size_t nx,
                                 const std::vector<double>& y, std::size_t ny,
                                 std::size_t dim, int n_permutations,
                                 std::size_t subsample_cap, std::uint64_t seed) {
    PermutationTest out;
    out.statistic = energy_distance(x.data(), nx, y.data(), ny, dim);
    out.n_permutations = n_permutations;

    const auto xs = stride_subsample(x, nx, dim, subsample_cap);
    const auto ys = stride_subsample(y, ny, dim, subsample_cap);
    const std::size_t nxs = xs.size() / dim, nys = ys.size() / dim;
    out.subsample = nxs;
    out.statistic_sub = energy_distance(xs.data(), nxs, ys.data(), nys, dim);
    if (n_permutations <= 0)
        return out;

    std::vector<double> pool(xs);
    pool.insert(pool.end(), ys.begin(), ys.end());
    const std::size_t n_tot = nxs + nys;

    std::vector<int> exceed(n_permutations, 0);
    parallel_chunks(static_cast<std::size_t>(n_permutations), 8,
                    [&](std::size_t, std::size_t lo, std::size_t hi) {
        std::vector<std::uint32_t> idx(n_tot);
        std::vector<double> px(nxs * dim), py(nys * dim);
        for (std::size_t p = lo; p < hi; ++p) {
            for (std::size_t i = 0; i < n_tot; ++i)
                idx[i] = static_cast<std::uint32_t>(i);
            // Fisher-Yates on a per-permutation Philox stream
            for (std::size_t i = n_tot - 1; i > 0; --i) {
                const auto blk = rng_block(seed, RngStream::permutation,
                                           static_cast<std::uint32_t>(p), 0,
                                           static_cast<std::uint32_t>(i));
                const std::size_t j = blk[0] % (i + 1);
                std::swap(idx[i], idx[j]);
            }
            for (std::size_t i = 0; i < nxs; ++i)
                std::copy_n(pool.begin() + idx[i] * dim, dim, px.begin() + i * dim);
            for (std::size_t i = 0; i < nys; ++i)
                std::copy_n(pool.begin() + idx[nxs + i] * dim, dim, py.begin() + i * dim);
            const double stat = energy_distance(px.data(), nxs, py.data(), nys, dim);
            if (stat >= out.statistic_sub)
                exceed[p] = 1;
        }
    });
    int count = 0;
    for (int e : exceed)
        count += e;
    out.p_value = (1.0 + count) / (1.0 + n_permutations);
    return out;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw domain_error("KS needs non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double ks = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / a.size();
        const double fb = static_cast<double>(j) / b.size();
        ks = std::max(ks, std::abs(fa - fb));
    }
    return ks;
}

double ks_vs_cdf(std::vector<double> a, const std::function<double(double)>& cdf) {
    if (a.empty())
        throw domain_error("KS needs a non-empty sample");
    std::sort(a.begin(), a.end());
    double ks = 0.0;
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double c = cdf(a[i]);
        ks = std::max(ks, std::max(std::abs((i + 1) / n - c), std::abs(i / n - c)));
    }
    return ks;
}

double normal_cdf(double x, double mean, double var) {
    return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * var));
}

std::vector<double> drop_nan_rows(const std::vector<double>& rows, std::size_t dim,
                                  std::size_t* kept) {
    std::vector<double> out;
    out.reserve(rows.size());
    const std::size_t n = rows.size() / dim;
    for (std::size_t r = 0; r < n; ++r) {
        bool ok = true;
        for (std::size_t c = 0; c < dim; ++c)
            if (!std::isfinite(rows[r * dim + c]))
                ok = false;
        if (ok)
            out.insert(out.end(), rows.begin() + r * dim, rows.begin() + (r + 1) * dim);
    }
    if (kept)
        *kept = out.size() / dim;
    return out;
}

FddResult fdd_test(const RandomWalkNoise& base, HurstParam h, const FddConfig& cfg) {
    const int d = base.dims();
    const std::size_t n_coords =
        cfg.times.size() * d + cfg.pairs.size() * static_cast<std::size_t>(d) * d;
    FddResult out;
    out.dim = n_coords;
    for (std::size_t ti = 0; ti < cfg.times.size(); ++ti)
        for (int i = 1; i <= d; ++i)
            out.coords.push_back("X" + std::to_string(i) + "(t" + std::to_string(ti) + ")");
    for (std::size_t pi = 0; pi < cfg.pairs.size(); ++pi)
        for (int i = 1; i <= d; ++i)
            for (int j = 1; j <= d; ++j)
                out.coords.push_back("A" + std::to_string(i) + std::to_string(j) + "(p" +
                                     std::to_string(pi) + ")");

    // approximation ensemble
    out.eps_rows.assign(cfg.n_samples * n_coords, 0.0);
    QuadratureSpec quad = cfg.quad;
    quad.enforce_tol = false;
    parallel_chunks(cfg.n_samples, 64, [&](std::size_t, std::size_t lo, std::size_t hi) {
        std::vector<double> xt(d);
        for (std::size_t s = lo; s < hi; ++s) {
            const DriverPath dp(base.with_replica(static_cast<std::uint32_t>(s)), h);
            double* row = out.eps_rows.data() + s * n_coords;
            std::size_t c = 0;
            for (double t : cfg.times) {
                dp.eval_all(t, xt.data());
                for (int i = 0; i < d; ++i)
                    row[c++] = xt[i];
            }
            for (const auto& [ps, pt] : cfg.pairs) {
                const AreaMatrix a = dp.levy_area(ps, pt, quad);
                for (int i = 1; i <= d; ++i)
                    for (int j = 1; j <= d; ++j)
                        row[c++] = a.entry(i, j);
            }
        }
    });

    // reference ensemble on a dyadic grid; times and pair ends must be grid-aligned
    const auto grid = uniform_grid(cfg.fbm_steps, 1.0);
    auto grid_index = [&](double t) {
        const double pos = t * static_cast<double>(cfg.fbm_steps);
        const auto idx = static_cast<std::size_t>(std::llround(pos));
        if (std::abs(pos - static_cast<double>(idx)) > 1e-9)
            throw domain_error("observable time is not on the reference grid");
        return idx;
    };
    std::vector<std::size_t> time_idx;
    for (double t : cfg.times)
        time_idx.push_back(grid_index(t));
    std::vector<std::pair<std::size_t, std::size_t>> pair_idx;
    for (const auto& [ps, pt] : cfg.pairs)
        pair_idx.emplace_back(grid_index(ps), grid_index(pt));

    out.ref_rows.assign(cfg.n_samples * n_coords, 0.0);
    parallel_chunks(cfg.n_samples, 16, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s) {
            const auto fb = simulate_fbm(h, grid, d, cfg.ref_seed,
                                         static_cast<std::uint32_t>(s));
            const auto ar = simulate_area(fb, pair_idx);
            double* row = out.ref_rows.data() + s * n_coords;
            std::size_t c = 0;
            for (std::size_t ti : time_idx)
                for (int i = 1; i <= d; ++i)
                    row[c++] = fb.value(ti, i);
            for (std::size_t pi = 0; pi < pair_idx.size(); ++pi)
                for (int i = 1; i <= d; ++i)
                    for (int j = 1; j <= d; ++j)
                        row[c++] = ar.entry(pi, i, j);
        }
    });

    out.energy = energy_perm_test(out.eps_rows, cfg.n_samples, out.ref_rows, cfg.n_samples,
                                  n_coords, cfg.n_permutations, cfg.perm_cap,
                                  base.seed() ^ cfg.ref_seed);
    out.ks_per_coord.resize(n_coords);
    for (std::size_t c = 0; c < n_coords; ++c) {
        std::vector<double> a(cfg.n_samples), b(cfg.n_samples);
        for (std::size_t s = 0; s < cfg.n_samples; ++s) {
            a[s] = out.eps_rows[s * n_coords + c];
            b[s] = out.ref_rows[s * n_coords + c];
        }
        out.ks_per_coord[c] = ks_two_sample(std::move(a), std::move(b));
    }
    return out;
}

bool ConvergenceStudy::decreasing(const std::vector<double>& values) {
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        if (!(values[i + 1] < values[i]))
            return false;
    return values.size() >= 2;
}

int ConvergenceStudy::replicate_count(const std::string& statistic) const {
    int max_rep = -1;
    for (const auto& c : cells)
        if (c.statistic == statistic)
            max_rep = std::max(max_rep, c.replicate);
    return max_rep + 1;
}

int ConvergenceStudy::replicates_decreasing(const std::string& statistic) const {
    const int reps = replicate_count(statistic);
    int good = 0;
    for (int r = 0; r < reps; ++r) {
        std::vector<std::pair<double, double>> seq; // (eps, value)
        for (const auto& c : cells)
            if (c.statistic == statistic && c.replicate == r)
                seq.emplace_back(c.eps, c.value);
        std::sort(seq.begin(), seq.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        std::vector<double> vals;
        for (const auto& [e, v] : seq)
            vals.push_back(v);
        if (decreasing(vals))
            ++good;
    }
    return good;
}

nlohmann::json ConvergenceStudy::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : cells) {
        nlohmann::json r;
        r["eps"] = c.eps;
        r["statistic"] = c.statistic;
        r["value"] = c.value;
        if (c.p >= 0.0)
            r["p"] = c.p;
        r["seed"] = c.seed;
        r["replicate"] = c.replicate;
        rows.push_back(r);
    }
    nlohmann::json j;
    j["schema_version"] = 1;
    j["cells"] = rows;
    if (!manifest_fragment.is_null())
        j["config"] = manifest_fragment;
    return j;
}

ConvergenceStudy solution_law_test(const VectorFieldSpec& vf, HurstParam h,
                                   const SolutionStudyConfig& cfg) {
    ConvergenceStudy study;
    const std::size_t dim = cfg.times.size() * vf.n;
    for (int ri = 0; ri < cfg.n_replicates; ++ri) {
        const int rep = cfg.first_replicate + ri;
        LimitEnsembleConfig lim = cfg.limit;
        lim.seed = cfg.master_seed * 1000003ull + 811ull * rep + 1;
        std::vector<double> ref_rows; // shared across eps within the replicate
        for (std::size_t ei = 0; ei < cfg.eps_grid.size(); ++ei) {
            EpsEnsembleConfig ec;
            ec.epsilon = cfg.eps_grid[ei];
            ec.law = cfg.law;
            ec.seed = cfg.master_seed * 6364136223846793005ull + 1442695040888963407ull +
                      9973ull * rep + 101ull * ei;
            ec.substeps_per_block = cfg.substeps_per_block;
            const auto pair = solve_eps_vs_limit(vf, h, ec, lim, cfg.times, cfg.n_samples);
            std::size_t kept_eps = 0, kept_ref = 0;
            const auto eps_rows = drop_nan_rows(pair.y_eps, dim, &kept_eps);
            if (ref_rows.empty())
                ref_rows = drop_nan_rows(pair.y_limit, dim, &kept_ref);
            const std::size_t nref = ref_rows.size() / dim;

            StudyCell cell;
            cell.eps = ec.epsilon;
            cell.seed = ec.seed;
            cell.replicate = rep;
            cell.statistic = "energy";
            if (cfg.n_permutations > 0) {
                const auto pt =
                    energy_perm_test(eps_rows, kept_eps, ref_rows, nref, dim,
                                     cfg.n_permutations, cfg.perm_cap, ec.seed);
                cell.value = pt.statistic;
                cell.p = pt.p_value;
            } else {
                cell.value =
                    energy_distance(eps_rows.data(), kept_eps, ref_rows.data(), nref, dim);
            }
            study.cells.push_back(cell);

            if (cfg.lognormal_marginal && vf.n == 1) {
                // scalar linear field: log y(1) is Gaussian with variance 1/(2H)
                std::vector<double> logs;
                logs.reserve(kept_eps);
                const std::size_t last = cfg.times.size() - 1;
                for (std::size_t s = 0; s < kept_eps; ++s) {
                    const double v = eps_rows[s * dim + last * vf.n];
                    if (v > 0.0)
                        logs.push_back(std::log(v));
                }
                const double var = 1.0 / (2.0 * h.value());
                const double mean = std::log(vf.a[0]);
                StudyCell kc;
                kc.eps = ec.epsilon;
                kc.seed = ec.seed;
                kc.replicate = rep;
                kc.statistic = "ks_lognormal";
                kc.value = ks_vs_cdf(std::move(logs), [mean, var](double x) {
                    return normal_cdf(x, mean, var);
                });
                study.cells.push_back(kc);
            }
        }
    }
    return study;
}

std::vector<double> driver_holder_sweep(const NoiseLaw& law, HurstParam h,
                                        const std::vector<double>& eps_grid, double mu,
                                        int depth, int replicas, std::uint64_t seed) {
    std::vector<double> out;
    const std::size_t N = static_cast<std::size_t>(1) << depth;
    const auto grid = uniform_grid(N, 1.0);
    for (double eps : eps_grid) {
        const RandomWalkNoise base(eps, law, 1, seed);
        kernels::Accum acc;
        for (int r = 0; r < replicas; ++r) {
            const DriverPath dp(base.with_replica(static_cast<std::uint32_t>(r)), h);
            std::vector<double> vals(N + 1);
            for (std::size_t m = 0; m <= N; ++m)
                vals[m] = dp.eval(1, grid[m]);
            acc.add(holder_norm(vals, 1.0, mu).norm);
        }
        out.push_back(acc.value() / replicas);
    }
    return out;
}

} // namespace rsde
