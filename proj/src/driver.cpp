#include "rsde/driver.hpp"

#include <algorithm>
#include <cmath>

#include "rsde/errors.hpp"
#include "rsde/kernels.hpp"
#include "rsde/quadrature.hpp"

namespace rsde {

HurstParam HurstParam::rough(double h) {
    if (!(h > 1.0 / 3.0) || !(h < 0.5))
        throw domain_error("Hurst parameter must lie strictly in (1/3, 1/2); "
                           "use classical_brownian() for H = 1/2 sanity modes");
    return HurstParam(h, false);
}

HurstParam HurstParam::classical_brownian() { return HurstParam(0.5, true); }

double ChenDefect::max_norm() const {
    double m = 0.0;
    for (double v : values)
        m = std::max(m, std::abs(v));
    return m;
}

DriverPath::DriverPath(RandomWalkNoise noise, HurstParam h)
    : noise_(std::move(noise)), h_(h) {
    eta_.resize(noise_.dims());
    for (int i = 1; i <= noise_.dims(); ++i) {
        eta_[i - 1].resize(noise_.n_blocks());
        noise_.fill_eta(i, 1, noise_.n_blocks(), eta_[i - 1].data());
    }
}

DriverPath DriverPath::scaled(double c) const {
    DriverPath copy = *this;
    for (auto& comp : copy.eta_)
        for (double& v : comp)
            v *= c;
    return copy;
}

std::size_t DriverPath::covering_blocks(double t, double* last_end) const {
    if (t <= 0.0) {
        *last_end = 0.0;
        return 0;
    }
    const double eps2 = noise_.epsilon() * noise_.epsilon();
    std::size_t k0 = static_cast<std::size_t>(std::floor(t / eps2));
    std::size_t K;
    if (static_cast<double>(k0) * eps2 >= t)
        K = k0;
    else
        K = k0 + 1;
    K = std::min(K, noise_.n_blocks());
    *last_end = std::min(noise_.block_end(K), t);
    return K;
}

namespace {
thread_local std::vector<double> tl_bases;
thread_local std::vector<double> tl_pows;
thread_local std::vector<double> tl_w1;
thread_local std::vector<double> tl_w2;
thread_local std::vector<double> tl_vals;
} // namespace

// weights[k-1] = (t+eps-a_k)^p - (t+eps-b_k)^p for the K blocks covering [0,t].
void DriverPath::kernel_increments(double t, double exponent, std::size_t K,
                                   double last_end, std::vector<double>& weights) const {
    const double eps = noise_.epsilon();
    const double eps2 = eps * eps;
    tl_bases.resize(K + 1);
    tl_pows.resize(K + 1);
    for (std::size_t j = 0; j < K; ++j)
        tl_bases[j] = t + eps - static_cast<double>(j) * eps2;
    tl_bases[K] = std::max(t + eps - last_end, eps); // equals eps when last_end == t
    kernels::vpow(tl_bases.data(), tl_pows.data(), K + 1, exponent);
    weights.resize(K);
    for (std::size_t k = 0; k < K; ++k)
        weights[k] = tl_pows[k] - tl_pows[k + 1];
}

double DriverPath::eval(int component, double t) const {
    if (component < 1 || component > dims())
        throw domain_error("component index out of range");
    if (!(t >= 0.0) || t > horizon())
        throw domain_error("time outside [0, horizon]");
    double last_end;
    const std::size_t K = covering_blocks(t, &last_end);
    if (K == 0)
        return 0.0;
    const double p = h_.value() + 0.5;
    kernel_increments(t, p, K, last_end, tl_w1);
    const double s = kernels::dot(tl_w1.data(), eta_[component - 1].data(), K);
    return s / (noise_.epsilon() * p);
}

void DriverPath::eval_all(double t, double* out) const {
    if (!(t >= 0.0) || t > horizon())
        throw domain_error("time outside [0, horizon]");
    double last_end;
    const std::size_t K = covering_blocks(t, &last_end);
    if (K == 0) {
        std::fill(out, out + dims(), 0.0);
        return;
    }
    const double p = h_.value() + 0.5;
    kernel_increments(t, p, K, last_end, tl_w1);
    const double inv = 1.0 / (noise_.epsilon() * p);
    for (int i = 0; i < dims(); ++i)
        out[i] = kernels::dot(tl_w1.data(), eta_[i].data(), K) * inv;
}

double DriverPath::deriv_in_block(int component, double t, std::size_t block) const {
    if (component < 1 || component > dims())
        throw domain_error("component index out of range");
    const double eps = noise_.epsilon();
    const double q = h_.value() - 0.5;
    const double theta_term = std::pow(eps, q) * eta_[component - 1][block - 1] / eps;
    if (h_.classical())
        return theta_term; // kernel exponent is zero, the memory term vanishes
    double last_end;
    const std::size_t K = covering_blocks(t, &last_end);
    if (K == 0)
        return theta_term;
    kernel_increments(t, q, K, last_end, tl_w2);
    const double s = kernels::dot(tl_w2.data(), eta_[component - 1].data(), K);
    return theta_term + s / eps;
}

void DriverPath::deriv_all_in_block(double t, std::size_t block, double* out) const {
    const double eps = noise_.epsilon();
    const double q = h_.value() - 0.5;
    const double theta_scale = std::pow(eps, q) / eps;
    double last_end;
    const std::size_t K = h_.classical() ? 0 : covering_blocks(t, &last_end);
    if (K == 0) {
        for (int i = 0; i < dims(); ++i)
            out[i] = theta_scale * eta_[i][block - 1];
        return;
    }
    kernel_increments(t, q, K, last_end, tl_w2);
    for (int i = 0; i < dims(); ++i)
        out[i] = theta_scale * eta_[i][block - 1] +
                 kernels::dot(tl_w2.data(), eta_[i].data(), K) / eps;
}

double DriverPath::deriv(int component, double t, Side side) const {
    if (!(t >= 0.0) || t > horizon())
        throw domain_error("time outside [0, horizon]");
    const double eps2 = noise_.epsilon() * noise_.epsilon();
    const std::size_t k0 = static_cast<std::size_t>(std::floor(t / eps2));
    const bool on_boundary = (static_cast<double>(k0) * eps2 == t);
    std::size_t k;
    if (t == 0.0)
        k = 1;
    else if (on_boundary)
        k = (side == Side::left) ? k0 : k0 + 1;
    else
        k = k0 + 1;
    k = std::min(std::max<std::size_t>(k, 1), noise_.n_blocks());
    return deriv_in_block(component, t, k);
}

void DriverPath::deriv_all(double t, double* out, Side side) const {
    for (int i = 1; i <= dims(); ++i)
        out[i - 1] = deriv(i, t, side);
}

namespace {

// Panel edges: {s, interior block boundaries, t}.
std::vector<double> panel_edges(double s, double t, double eps2) {
    std::vector<double> edges{s};
    std::size_t k = static_cast<std::size_t>(std::floor(s / eps2)) + 1;
    for (;; ++k) {
        const double b = static_cast<double>(k) * eps2;
        if (b >= t)
            break;
        if (b > s)
            edges.push_back(b);
    }
    edges.push_back(t);
    return edges;
}

} // namespace

AreaMatrix DriverPath::levy_area(double s, double t, const QuadratureSpec& q) const {
    if (!(s >= 0.0) || !(t <= horizon()) || s > t)
        throw domain_error("levy_area needs 0 <= s <= t <= horizon");
    const int d = dims();
    AreaMatrix area;
    area.s = s;
    area.t = t;
    area.d = d;
    area.values.assign(static_cast<std::size_t>(d) * d, 0.0);
    if (s == t)
        return area;

    const double eps2 = noise_.epsilon() * noise_.epsilon();
    const auto edges = panel_edges(s, t, eps2);
    const auto& rule = gauss_legendre_rule(q.points);

    std::vector<double> xs(d);
    eval_all(s, xs.data());
    tl_vals.resize(2 * d);
    double* xu = tl_vals.data();
    double* du = tl_vals.data() + d;

    auto pass = [&](int n_sub, std::vector<double>& out) {
        out.assign(static_cast<std::size_t>(d) * d, 0.0);
        for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
            const double pa = edges[e];
            const double pb = edges[e + 1];
            const std::size_t block =
                std::min(static_cast<std::size_t>(std::floor((0.5 * (pa + pb)) / eps2)) + 1,
                         noise_.n_blocks());
            for (int sub = 0; sub < n_sub; ++sub) {
                const double a = pa + (pb - pa) * sub / n_sub;
                const double b = pa + (pb - pa) * (sub + 1) / n_sub;
                const double mid = 0.5 * (a + b);
                const double hw = 0.5 * (b - a);
                for (const auto& [xg, wg] : rule) {
                    const double u = mid + hw * xg;
                    eval_all(u, xu);
                    deriv_all_in_block(u, block, du);
                    const double w = wg * hw;
                    for (int i = 0; i < d; ++i) {
                        const double wi = w * du[i];
                        for (int j = 0; j < d; ++j)
                            out[static_cast<std::size_t>(i) * d + j] += wi * (xu[j] - xs[j]);
                    }
                }
            }
        }
    };

    std::vector<double> coarse, refined;
    pass(1, coarse);
    pass(2, refined);
    double est = 0.0;
    for (std::size_t k = 0; k < coarse.size(); ++k)
        est = std::max(est, std::abs(refined[k] - coarse[k]));
    est = std::max(est, 1e-15); // roundoff floor
    area.values = std::move(refined);
    area.err_estimate = est;
    if (q.enforce_tol && est > q.abs_tol)
        throw accuracy_error("levy_area quadrature above tolerance", est, q.abs_tol);
    return area;
}

ChenDefect DriverPath::chen_defect(double s, double u, double t,
                                   const QuadratureSpec& q) const {
    if (!(s <= u && u <= t))
        throw domain_error("chen_defect needs s <= u <= t");
    QuadratureSpec qq = q;
    qq.enforce_tol = false;
    const AreaMatrix ast = levy_area(s, t, qq);
    const AreaMatrix asu = levy_area(s, u, qq);
    const AreaMatrix aut = levy_area(u, t, qq);
    const int d = dims();
    std::vector<double> dsu(d), dut(d), xs(d), xu(d), xt(d);
    eval_all(s, xs.data());
    eval_all(u, xu.data());
    eval_all(t, xt.data());
    for (int i = 0; i < d; ++i) {
        dsu[i] = xu[i] - xs[i];
        dut[i] = xt[i] - xu[i];
    }
    ChenDefect def;
    def.d = d;
    def.values.resize(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * d + j;
            def.values[idx] =
                ast.values[idx] - asu.values[idx] - aut.values[idx] - dsu[j] * dut[i];
        }
    def.quad_err_sum = ast.err_estimate + asu.err_estimate + aut.err_estimate;
    return def;
}

} // namespace rsde
