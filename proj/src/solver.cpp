#include "rsde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsde/errors.hpp"
#include "rsde/parallel.hpp"
#include "rsde/quadrature.hpp"

namespace rsde {

namespace {

constexpr double DIVERGENCE_LIMIT = 1e12;

void check_state(const double* y, int n, std::size_t step) {
    for (int a = 0; a < n; ++a)
        if (!std::isfinite(y[a]) || std::abs(y[a]) > DIVERGENCE_LIMIT)
            throw divergence_error("state norm overflow", step);
}

} // namespace

RoughDriverGrid RoughDriverGrid::from_fbm(const FbmGridSample& fine, std::size_t stride) {
    if (stride == 0 || fine.steps() % stride != 0)
        throw domain_error("stride must divide the fine step count");
    const std::size_t N = fine.steps() / stride;
    const int d = fine.d;
    RoughDriverGrid g;
    g.d = d;
    g.times.resize(N + 1);
    for (std::size_t k = 0; k <= N; ++k)
        g.times[k] = fine.times[k * stride];
    g.increments.resize(N * d);
    for (std::size_t k = 0; k < N; ++k)
        for (int i = 0; i < d; ++i)
            g.increments[k * d + i] = fine.values[(k + 1) * stride * d + i] -
                                      fine.values[k * stride * d + i];
    std::vector<std::pair<std::size_t, std::size_t>> pairs(N);
    for (std::size_t k = 0; k < N; ++k)
        pairs[k] = {k * stride, (k + 1) * stride};
    g.areas = simulate_area(fine, pairs).values;

    // Chen consistency spot-check: the left-point sums telescope, so the defect
    // over two adjacent steps is pure roundoff.
    const std::size_t probes = std::min<std::size_t>(4, N - 1);
    for (std::size_t pi = 0; pi < probes; ++pi) {
        const std::size_t k = pi * (N - 1) / std::max<std::size_t>(probes, 1);
        const auto join = simulate_area(fine, {{k * stride, (k + 2) * stride}});
        for (int i = 1; i <= d; ++i)
            for (int j = 1; j <= d; ++j) {
                if (i == j)
                    continue; // diagonals follow the (1/2) delta^2 convention instead
                const double expect = g.area(k, i, j) + g.area(k + 1, i, j) +
                                      g.increment(k, j) * g.increment(k + 1, i);
                if (std::abs(join.entry(0, i, j) - expect) >
                    1e-12 * std::max(1.0, std::abs(expect)))
                    throw accuracy_error("rough grid failed the Chen spot-check",
                                         std::abs(join.entry(0, i, j) - expect), 1e-12);
            }
    }
    return g;
}

RoughDriverGrid RoughDriverGrid::from_smooth(const std::function<double(double, int)>& z,
                                             const std::function<double(double, int)>& zdot,
                                             int d, const std::vector<double>& times) {
    const std::size_t N = times.size() - 1;
    RoughDriverGrid g;
    g.d = d;
    g.times = times;
    g.increments.resize(N * d);
    g.areas.assign(N * d * d, 0.0);
    for (std::size_t k = 0; k < N; ++k) {
        const double s = times[k], t = times[k + 1];
        for (int i = 1; i <= d; ++i)
            g.increments[k * d + (i - 1)] = z(t, i) - z(s, i);
        for (int i = 1; i <= d; ++i)
            for (int j = 1; j <= d; ++j) {
                const auto f = [&](double u) { return (z(u, j) - z(s, j)) * zdot(u, i); };
                g.areas[(k * d + (i - 1)) * d + (j - 1)] = gauss_legendre(f, s, t, 16);
            }
    }
    return g;
}

std::vector<double> solve_rough(const VectorFieldSpec& vf, const RoughDriverGrid& drv) {
    const int n = vf.n;
    const int d = vf.d;
    if (drv.d != d)
        throw domain_error("driver dimension does not match the vector field");
    const std::size_t N = drv.steps();
    std::vector<double> path((N + 1) * n);
    std::copy(vf.a.begin(), vf.a.end(), path.begin());

    std::vector<double> sig(static_cast<std::size_t>(n) * d);
    std::vector<double> dsig(static_cast<std::size_t>(n) * d * n);
    std::vector<double> b(n, 0.0);
    std::vector<double> y(vf.a.begin(), vf.a.end());

    for (std::size_t k = 0; k < N; ++k) {
        const double dt = drv.times[k + 1] - drv.times[k];
        vf.sigma(y.data(), sig.data());
        vf.dsigma(y.data(), dsig.data());
        if (vf.drift)
            vf.drift(y.data(), b.data());
        const double* dz = drv.increments.data() + k * d;
        const double* a2 = drv.areas.data() + k * d * d;
        for (int a = 0; a < n; ++a) {
            double inc = vf.drift ? b[a] * dt : 0.0;
            for (int i = 0; i < d; ++i)
                inc += sig[a * d + i] * dz[i];
            // (Dsigma_j sigma_i)(y) contracted against the area, entry (i,j)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    double gaij = 0.0;
                    for (int c = 0; c < n; ++c)
                        gaij += dsig[(a * d + i) * n + c] * sig[c * d + j];
                    inc += gaij * a2[i * d + j];
                }
            y[a] += inc;
        }
        check_state(y.data(), n, k + 1);
        std::copy(y.begin(), y.end(), path.begin() + (k + 1) * n);
    }
    return path;
}

namespace {

// RHS of the driven ODE: out = sigma(y) xdot + b(y).
void ode_rhs(const VectorFieldSpec& vf, const double* y, const double* xdot,
             std::vector<double>& sig, std::vector<double>& b, double* out) {
    vf.sigma(y, sig.data());
    if (vf.drift)
        vf.drift(y, b.data());
    for (int a = 0; a < vf.n; ++a) {
        double v = vf.drift ? b[a] : 0.0;
        for (int i = 0; i < vf.d; ++i)
            v += sig[a * vf.d + i] * xdot[i];
        out[a] = v;
    }
}

} // namespace

std::vector<double> solve_ode(const VectorFieldSpec& vf, const DriverPath& path,
                              const std::vector<double>& out_times,
                              int substeps_per_block) {
    const int n = vf.n;
    const int d = vf.d;
    if (path.dims() != d)
        throw domain_error("driver dimension does not match the vector field");
    if (out_times.empty())
        throw domain_error("need at least one output time");
    for (std::size_t i = 0; i + 1 < out_times.size(); ++i)
        if (!(out_times[i] < out_times[i + 1]))
            throw domain_error("output times must be strictly increasing");
    if (out_times.front() < 0.0 || out_times.back() > path.horizon())
        throw domain_error("output times outside [0, horizon]");

    const double t_end = out_times.back();
    const double eps2 = path.noise().epsilon() * path.noise().epsilon();

    // Breakpoints: block boundaries and requested output times.
    std::vector<double> brk{0.0};
    for (std::size_t k = 1;; ++k) {
        const double b = static_cast<double>(k) * eps2;
        if (b >= t_end)
            break;
        brk.push_back(b);
    }
    brk.insert(brk.end(), out_times.begin(), out_times.end());
    if (out_times.front() != 0.0 && t_end > 0.0)
        brk.push_back(t_end);
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-15; }),
              brk.end());

    std::vector<double> result(out_times.size() * n);
    std::vector<double> y(vf.a.begin(), vf.a.end());
    std::size_t out_idx = 0;
    auto record_if_due = [&](double t) {
        while (out_idx < out_times.size() && std::abs(out_times[out_idx] - t) < 1e-14) {
            std::copy(y.begin(), y.end(), result.begin() + out_idx * n);
            ++out_idx;
        }
    };
    record_if_due(0.0);

    std::vector<double> sig(static_cast<std::size_t>(n) * d), b(n, 0.0);
    std::vector<double> xdot0(d), xdot_h(d), xdot1(d);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    const double target_h = eps2 / std::max(1, substeps_per_block);

    std::size_t step_counter = 0;
    for (std::size_t e = 0; e + 1 < brk.size(); ++e) {
        const double seg_a = brk[e];
        const double seg_b = brk[e + 1];
        if (seg_b <= seg_a)
            continue;
        const std::size_t block = std::min(
            static_cast<std::size_t>(std::floor((0.5 * (seg_a + seg_b)) / eps2)) + 1,
            path.noise().n_blocks());
        const int m =
            std::max(1, static_cast<int>(std::ceil((seg_b - seg_a) / target_h - 1e-9)));
        const double h = (seg_b - seg_a) / m;
        path.deriv_all_in_block(seg_a, block, xdot0.data());
        for (int sstep = 0; sstep < m; ++sstep) {
            const double t0 = seg_a + h * sstep;
            const double th = t0 + 0.5 * h;
            const double t1 = (sstep == m - 1) ? seg_b : t0 + h;
            path.deriv_all_in_block(th, block, xdot_h.data());
            path.deriv_all_in_block(t1, block, xdot1.data());
            ode_rhs(vf, y.data(), xdot0.data(), sig, b, k1.data());
            for (int c = 0; c < n; ++c)
                tmp[c] = y[c] + 0.5 * h * k1[c];
            ode_rhs(vf, tmp.data(), xdot_h.data(), sig, b, k2.data());
            for (int c = 0; c < n; ++c)
                tmp[c] = y[c] + 0.5 * h * k2[c];
            ode_rhs(vf, tmp.data(), xdot_h.data(), sig, b, k3.data());
            for (int c = 0; c < n; ++c)
                tmp[c] = y[c] + h * k3[c];
            ode_rhs(vf, tmp.data(), xdot1.data(), sig, b, k4.data());
            for (int c = 0; c < n; ++c)
                y[c] += h / 6.0 * (k1[c] + 2.0 * (k2[c] + k3[c]) + k4[c]);
            check_state(y.data(), n, ++step_counter);
            xdot0.swap(xdot1);
        }
        record_if_due(seg_b);
    }
    if (out_idx != out_times.size())
        throw domain_error("internal: not every output time was visited");
    return result;
}

EnsemblePair solve_eps_vs_limit(const VectorFieldSpec& vf, HurstParam h,
                                const EpsEnsembleConfig& eps_cfg,
                                const LimitEnsembleConfig& lim_cfg,
                                const std::vector<double>& times, std::size_t n_samples) {
    EnsemblePair out;
    out.times = times;
    out.n = vf.n;
    out.n_samples = n_samples;
    out.y_eps.assign(n_samples * times.size() * vf.n,
                     std::numeric_limits<double>::quiet_NaN());
    out.y_limit.assign(n_samples * times.size() * vf.n,
                       std::numeric_limits<double>::quiet_NaN());

    const RandomWalkNoise base_noise(eps_cfg.epsilon, eps_cfg.law, vf.d, eps_cfg.seed);
    const auto fine_times = uniform_grid(lim_cfg.fine_steps, 1.0);
    // Map requested times onto the coarse rough grid.
    const std::size_t coarse_steps = lim_cfg.fine_steps / lim_cfg.stride;
    std::vector<std::size_t> coarse_idx(times.size());
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const double pos = times[ti] * static_cast<double>(coarse_steps);
        const auto idx = static_cast<std::size_t>(std::llround(pos));
        if (std::abs(pos - static_cast<double>(idx)) > 1e-9)
            throw domain_error("requested time is not on the rough solver grid");
        coarse_idx[ti] = idx;
    }

    std::atomic<std::size_t> failed_eps{0}, failed_limit{0};
    parallel_chunks(n_samples, 64, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s) {
            try {
                const DriverPath dp(base_noise.with_replica(static_cast<std::uint32_t>(s)), h);
                const auto yp = solve_ode(vf, dp, times, eps_cfg.substeps_per_block);
                std::copy(yp.begin(), yp.end(),
                          out.y_eps.begin() + s * times.size() * vf.n);
            } catch (const divergence_error&) {
                failed_eps.fetch_add(1);
            }
            try {
                const auto fine = simulate_fbm(h, fine_times, vf.d, lim_cfg.seed,
                                               static_cast<std::uint32_t>(s));
                const auto grid = RoughDriverGrid::from_fbm(fine, lim_cfg.stride);
                const auto yl = solve_rough(vf, grid);
                for (std::size_t ti = 0; ti < times.size(); ++ti)
                    std::copy(yl.begin() + coarse_idx[ti] * vf.n,
                              yl.begin() + (coarse_idx[ti] + 1) * vf.n,
                              out.y_limit.begin() + (s * times.size() + ti) * vf.n);
            } catch (const divergence_error&) {
                failed_limit.fetch_add(1);
            }
        }
    });
    out.failed_eps = failed_eps.load();
    out.failed_limit = failed_limit.load();
    if (out.failed_eps + out.failed_limit > n_samples / 500)
        throw divergence_error("more than 0.1% of the ensemble diverged",
                               out.failed_eps + out.failed_limit);
    return out;
}

VectorFieldSpec vf_zero_sigma_exp_drift() {
    VectorFieldSpec vf;
    vf.n = vf.d = 1;
    vf.a = {1.0};
    vf.sigma = [](const double*, double* s) { s[0] = 0.0; };
    vf.dsigma = [](const double*, double* ds) { ds[0] = 0.0; };
    vf.drift = [](const double* y, double* b) { b[0] = -y[0]; };
    vf.sigma_bound = 0.0;
    vf.drift_bound = 1.0;
    return vf;
}

VectorFieldSpec vf_scalar_linear(double a0) {
    VectorFieldSpec vf;
    vf.n = vf.d = 1;
    vf.a = {a0};
    vf.sigma = [](const double* y, double* s) { s[0] = y[0]; };
    vf.dsigma = [](const double*, double* ds) { ds[0] = 1.0; };
    vf.drift = nullptr;
    return vf;
}

VectorFieldSpec vf_constant_sigma(int n, int d, const std::vector<double>& S) {
    VectorFieldSpec vf;
    vf.n = n;
    vf.d = d;
    vf.a.assign(n, 0.0);
    vf.sigma = [S](const double*, double* s) { std::copy(S.begin(), S.end(), s); };
    const std::size_t dn = static_cast<std::size_t>(n) * d * n;
    vf.dsigma = [dn](const double*, double* ds) { std::fill(ds, ds + dn, 0.0); };
    vf.drift = nullptr;
    return vf;
}

VectorFieldSpec vf_noncommuting_2d() {
    VectorFieldSpec vf;
    vf.n = vf.d = 2;
    vf.a = {0.0, 0.0};
    vf.sigma = [](const double* y, double* s) {
        s[0] = 1.0; // sigma[1,1]
        s[1] = 0.0;
        s[2] = 0.0;
        s[3] = std::sin(y[0]); // sigma[2,2]
    };
    vf.dsigma = [](const double* y, double* ds) {
        std::fill(ds, ds + 8, 0.0);
        ds[(1 * 2 + 1) * 2 + 0] = std::cos(y[0]); // d sigma[2,2] / d y1
    };
    vf.drift = nullptr;
    vf.sigma_bound = 1.0;
    vf.dsigma_bound = 1.0;
    vf.d2sigma_bound = 1.0;
    return vf;
}

} // namespace rsde
