#include "rsde/fbm.hpp"

#include <cmath>

#include "rsde/errors.hpp"
#include "rsde/kernels.hpp"
#include "rsde/parallel.hpp"
#include "rsde/philox.hpp"
#include "rsde/quadrature.hpp"

namespace rsde {

std::vector<double> uniform_grid(std::size_t n, double horizon) {
    std::vector<double> t(n + 1);
    for (std::size_t m = 0; m <= n; ++m)
        t[m] = horizon * static_cast<double>(m) / static_cast<double>(n);
    return t;
}

namespace {

bool is_uniform(const std::vector<double>& times) {
    const double h = times[1] - times[0];
    for (std::size_t j = 1; j + 1 < times.size(); ++j)
        if (std::abs((times[j + 1] - times[j]) - h) > 1e-12 * h)
            return false;
    return true;
}

} // namespace

FbmGridSample simulate_fbm(HurstParam h, const std::vector<double>& times, int d,
                           std::uint64_t seed, std::uint32_t replica) {
    if (times.size() < 2 || times[0] != 0.0)
        throw domain_error("grid must start at 0 and contain at least one step");
    for (std::size_t j = 0; j + 1 < times.size(); ++j)
        if (!(times[j + 1] > times[j]))
            throw domain_error("grid must be strictly increasing");
    if (d < 1)
        throw domain_error("dims must be >= 1");

    const std::size_t N = times.size() - 1;
    FbmGridSample out;
    out.times = times;
    out.d = d;
    out.h = h;
    out.seed = seed;
    out.replica = replica;
    out.values.assign((N + 1) * d, 0.0);
    out.dW.resize(N * d);
    out.marginal_var.assign(N + 1, 0.0);

    // dW column-major per component for the convolution inner loops.
    std::vector<double> dw_col(N * d);
    for (int i = 1; i <= d; ++i)
        for (std::size_t j = 0; j < N; ++j) {
            const double dt = times[j + 1] - times[j];
            const double z = normal_at(seed, RngStream::wiener, replica,
                                       static_cast<std::uint32_t>(i),
                                       static_cast<std::uint32_t>(j));
            const double w = z * std::sqrt(dt);
            out.dW[j * d + (i - 1)] = w;
            dw_col[(i - 1) * N + j] = w / dt;
        }

    const double p = h.value() + 0.5;

    if (is_uniform(times)) {
        const double dt = times[1] - times[0];
        // I_l = integral of the kernel over a cell at lag l, exact.
        std::vector<double> grid_pts(N + 1), g(N + 1), lag(N), lag_rev(N);
        for (std::size_t l = 0; l <= N; ++l)
            grid_pts[l] = static_cast<double>(l) * dt;
        kernels::vpow(grid_pts.data(), g.data(), N + 1, p);
        for (std::size_t l = 1; l <= N; ++l)
            lag[l - 1] = (g[l] - g[l - 1]) / p;
        for (std::size_t l = 0; l < N; ++l)
            lag_rev[l] = lag[N - 1 - l];
        for (std::size_t m = 1; m <= N; ++m)
            for (int i = 0; i < d; ++i)
                out.values[m * d + i] =
                    kernels::dot(lag_rev.data() + (N - m), dw_col.data() + i * N, m);
        kernels::Accum var;
        for (std::size_t m = 1; m <= N; ++m) {
            var.add(lag[m - 1] * lag[m - 1] / dt);
            out.marginal_var[m] = var.value();
        }
    } else {
        std::vector<double> bases(N + 1), pw(N + 1), cell(N);
        for (std::size_t m = 1; m <= N; ++m) {
            for (std::size_t j = 0; j <= m; ++j)
                bases[j] = times[m] - times[j]; // decreasing to 0
            kernels::vpow(bases.data(), pw.data(), m + 1, p);
            kernels::Accum var;
            for (std::size_t j = 0; j < m; ++j) {
                cell[j] = (pw[j] - pw[j + 1]) / p;
                var.add(cell[j] * cell[j] / (times[j + 1] - times[j]));
            }
            out.marginal_var[m] = var.value();
            for (int i = 0; i < d; ++i)
                out.values[m * d + i] = kernels::dot(cell.data(), dw_col.data() + i * N, m);
        }
    }
    return out;
}

FbmAreaSample simulate_area(const FbmGridSample& sample,
                            const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    const int d = sample.d;
    FbmAreaSample out;
    out.pairs = pairs;
    out.d = d;
    out.values.assign(pairs.size() * d * d, 0.0);
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        const auto [si, ti] = pairs[pi];
        if (si > ti || ti >= sample.times.size())
            throw domain_error("area pair must be grid-aligned with s <= t");
        double* a = out.values.data() + pi * d * d;
        // off-diagonal: entry (i,j) = sum_l (B^j_l - B^j_s)(B^i_{l+1} - B^i_l)
        std::vector<kernels::Accum> acc(static_cast<std::size_t>(d) * d);
        for (std::size_t l = si; l < ti; ++l)
            for (int i = 0; i < d; ++i) {
                const double dBi = sample.values[(l + 1) * d + i] - sample.values[l * d + i];
                for (int j = 0; j < d; ++j) {
                    const double dj = sample.values[l * d + j] - sample.values[si * d + j];
                    acc[static_cast<std::size_t>(i) * d + j].add(dj * dBi);
                }
            }
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                a[i * d + j] = acc[static_cast<std::size_t>(i) * d + j].value();
        for (int i = 0; i < d; ++i) {
            const double db = sample.values[ti * d + i] - sample.values[si * d + i];
            a[i * d + i] = 0.5 * db * db;
        }
    }
    return out;
}

std::vector<double> fbm_marginals(HurstParam h, std::size_t n_steps,
                                  const std::vector<std::size_t>& indices, int d,
                                  std::uint64_t seed, std::size_t replicas,
                                  double horizon) {
    for (std::size_t idx : indices)
        if (idx < 1 || idx > n_steps)
            throw domain_error("marginal index outside the grid");
    const double dt = horizon / static_cast<double>(n_steps);
    const double p = h.value() + 0.5;
    std::vector<double> grid_pts(n_steps + 1), g(n_steps + 1), lag_rev(n_steps);
    for (std::size_t l = 0; l <= n_steps; ++l)
        grid_pts[l] = static_cast<double>(l) * dt;
    kernels::vpow(grid_pts.data(), g.data(), n_steps + 1, p);
    for (std::size_t l = 0; l < n_steps; ++l)
        lag_rev[l] = (g[n_steps - l] - g[n_steps - l - 1]) / p;

    const std::size_t cols = indices.size() * d;
    std::vector<double> out(replicas * cols);
    const double inv_sqrt_dt = 1.0 / std::sqrt(dt);
    parallel_chunks(replicas, 256, [&](std::size_t, std::size_t lo, std::size_t hi) {
        std::vector<double> xi(n_steps);
        for (std::size_t r = lo; r < hi; ++r)
            for (int i = 1; i <= d; ++i) {
                for (std::size_t j = 0; j < n_steps; ++j)
                    xi[j] = normal_at(seed, RngStream::wiener, static_cast<std::uint32_t>(r),
                                      static_cast<std::uint32_t>(i),
                                      static_cast<std::uint32_t>(j)) *
                            inv_sqrt_dt; // dW_j / dt, with dW = xi sqrt(dt)
                for (std::size_t c = 0; c < indices.size(); ++c) {
                    const std::size_t m = indices[c];
                    out[r * cols + c * d + (i - 1)] =
                        kernels::dot(lag_rev.data() + (n_steps - m), xi.data(), m);
                }
            }
    });
    return out;
}

double fbm_covariance(HurstParam h, double s, double t) {
    if (!(s >= 0.0) || !(t >= 0.0))
        throw domain_error("covariance needs s, t >= 0");
    const double lo = std::min(s, t);
    const double hi = std::max(s, t);
    if (lo == 0.0)
        return 0.0;
    if (h.classical())
        return lo;
    const double H = h.value();
    if (lo == hi)
        return std::pow(lo, 2.0 * H) / (2.0 * H);
    const auto f = [&](double r) {
        return std::pow(lo - r, H - 0.5) * std::pow(hi - r, H - 0.5);
    };
    return singular_integrate(f, 0.0, lo, 1e-10);
}

} // namespace rsde
