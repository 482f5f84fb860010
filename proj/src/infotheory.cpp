#include "gnair/infotheory.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "gnair/errors.hpp"

namespace gnair
{

namespace
{

// exp() of anything below this is exactly zero in double precision.
constexpr double underflow_exponent = -746.0;

int side_length(int order)
{
    if (order < 4 || !std::has_single_bit(static_cast<unsigned>(order)) ||
        std::countr_zero(static_cast<unsigned>(order)) % 2 != 0)
        throw DomainError("unsupported format: " + std::to_string(order) + " is not square QAM");
    return 1 << (std::countr_zero(static_cast<unsigned>(order)) / 2);
}

} // namespace

double entropy_bits(const Eigen::ArrayXd& pmf)
{
    double h = 0.0;
    for (double p : pmf)
        if (p > 0.0)
            h -= p * std::log2(p);
    return h;
}

ConstellationSpec build_constellation(int order, Shaping shaping, double zeta)
{
    const int side = side_length(order);
    if (zeta < 0.0)
        throw DomainError("build_constellation: zeta must be >= 0");
    if (shaping == Shaping::Uniform)
        zeta = 0.0;

    Eigen::ArrayXd raw(side);
    for (int i = 0; i < side; ++i)
        raw(i) = 2.0 * i - (side - 1);

    // Shift by the smallest energy so the largest weight is exp(0) even for very large zeta.
    Eigen::ArrayXd level_pmf = (-zeta * (raw.square() - 1.0)).exp();
    level_pmf /= level_pmf.sum();

    const double energy = 2.0 * (level_pmf * raw.square()).sum();
    const double scale = 1.0 / std::sqrt(energy);

    ConstellationSpec c;
    c.order = order;
    c.shaping = shaping;
    c.zeta = zeta;
    c.levels = raw * scale;
    c.level_pmf = level_pmf;
    c.points.resize(order);
    c.pmf.resize(order);
    c.labels.resize(order);
    const int bits = std::countr_zero(static_cast<unsigned>(side));
    for (int i = 0; i < side; ++i)
        for (int q = 0; q < side; ++q)
        {
            const int idx = i * side + q;
            c.points(idx) = {c.levels(i), c.levels(q)};
            c.pmf(idx) = level_pmf(i) * level_pmf(q);
            c.labels(idx) = ((i ^ (i >> 1)) << bits) | (q ^ (q >> 1));
        }
    return c;
}

ConstellationSpec make_constellation(const Eigen::ArrayXcd& points, const Eigen::ArrayXd& pmf)
{
    if (points.size() != pmf.size() || points.size() == 0)
        throw DomainError("make_constellation: points and PMF sizes differ");
    ConstellationSpec c;
    c.order = static_cast<int>(points.size());
    c.pmf = pmf / pmf.sum();
    const double energy = (c.pmf * points.abs2()).sum();
    c.points = points / std::sqrt(energy);
    c.labels = Eigen::ArrayXi::LinSpaced(c.order, 0, c.order - 1);
    return c;
}

GaussHermiteRule gauss_hermite_rule(int order)
{
    if (order < 1)
        throw DomainError("gauss_hermite_rule: order must be >= 1");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd sub(std::max(order - 1, 0));
    for (int k = 1; k < order; ++k)
        sub(k - 1) = std::sqrt(k / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    GaussHermiteRule rule;
    rule.nodes = solver.eigenvalues().array();
    rule.weights = std::sqrt(std::numbers::pi) * solver.eigenvectors().row(0).transpose().array().square();
    return rule;
}

double mi_gauss_hermite_fixed(const ConstellationSpec& c, double snr, int order)
{
    if (!(snr > 0.0))
        throw DomainError("mutual information: snr must be positive");
    const GaussHermiteRule rule = gauss_hermite_rule(order);
    const double sigma = std::sqrt(1.0 / snr);
    const double inv_var = snr;
    const double xi_max = rule.nodes.abs().maxCoeff();
    const Eigen::Index m = c.points.size();

    Eigen::ArrayXd dd(m), br(m), bi(m), pj(m);
    double total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
    {
        // Keep only the terms that can survive the exponential for some node pair.
        Eigen::Index n = 0;
        for (Eigen::Index j = 0; j < m; ++j)
        {
            const std::complex<double> d = c.points(i) - c.points(j);
            const double a = std::norm(d) * inv_var;
            const double b = 2.0 * (std::abs(d.real()) + std::abs(d.imag())) / sigma;
            if (-a + xi_max * b < underflow_exponent)
                continue;
            dd(n) = a;
            br(n) = 2.0 * d.real() / sigma;
            bi(n) = 2.0 * d.imag() / sigma;
            pj(n) = c.pmf(j);
            ++n;
        }
        const auto a = dd.head(n);
        const auto r = br.head(n);
        const auto q = bi.head(n);
        const auto p = pj.head(n);
        double acc = 0.0;
        for (int k = 0; k < order; ++k)
        {
            const Eigen::ArrayXd partial = a + rule.nodes(k) * r;
            for (int l = 0; l < order; ++l)
            {
                const double s = (p * (-(partial - rule.nodes(l) * q)).exp()).sum();
                acc += rule.weights(k) * rule.weights(l) * std::log2(s);
            }
        }
        total += c.pmf(i) * acc;
    }
    return -total / std::numbers::pi;
}

namespace
{

template <typename Fixed>
MiResult converge_order(Fixed&& fixed, double snr, int order, MiMethod method)
{
    if (order < 8)
        throw DomainError("mutual information: Hermite order must be >= 8");
    double previous = fixed(order);
    for (int l = 2 * order; l <= 512; l *= 2)
    {
        const double current = fixed(l);
        if (std::abs(current - previous) < hermite_tolerance)
            return {current, method, l, snr};
        previous = current;
    }
    throw ConvergenceError("Gauss-Hermite MI did not converge in order", std::abs(previous));
}

} // namespace

MiResult mi_gauss_hermite(const ConstellationSpec& c, double snr, int order)
{
    return converge_order([&](int l) { return mi_gauss_hermite_fixed(c, snr, l); }, snr, order,
                          MiMethod::GaussHermite2D);
}

double mi_separable_fixed(const ConstellationSpec& c, double snr, int order)
{
    if (!c.separable())
        throw DomainError("mi_separable: constellation has no per-quadrature description");
    if (!(snr > 0.0))
        throw DomainError("mutual information: snr must be positive");
    const GaussHermiteRule rule = gauss_hermite_rule(order);
    const double sigma = std::sqrt(1.0 / snr);
    const Eigen::ArrayXd& x = c.levels;
    const Eigen::ArrayXd& p = c.level_pmf;

    double total = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
    {
        const Eigen::ArrayXd d = x(i) - x;
        const Eigen::ArrayXd a = d.square() * snr;
        const Eigen::ArrayXd b = 2.0 * d / sigma;
        double acc = 0.0;
        for (int k = 0; k < order; ++k)
            acc += rule.weights(k) * std::log2((p * (-(a + rule.nodes(k) * b)).exp()).sum());
        total += p(i) * acc;
    }
    return -2.0 * total / std::sqrt(std::numbers::pi);
}

MiResult mi_separable(const ConstellationSpec& c, double snr, int order)
{
    return converge_order([&](int l) { return mi_separable_fixed(c, snr, l); }, snr, order,
                          MiMethod::GaussHermiteSeparable);
}

double zeta_upper_bound(int order)
{
    double zeta = 1e-4;
    while (entropy_bits(build_constellation(order, Shaping::MaxwellBoltzmann, zeta).pmf) >= 2.01)
        zeta *= 2.0;
    return zeta;
}

ZetaOptimum optimize_zeta(int order, double snr)
{
    auto mi_at = [&](double zeta) {
        return mi_separable(build_constellation(order, Shaping::MaxwellBoltzmann, zeta), snr).mi_bits;
    };

    ZetaOptimum best;
    best.mi_uniform = mi_at(0.0);
    best.zeta = 0.0;
    best.mi = best.mi_uniform;

    // Coarse geometric scan brackets the maximum; golden-section search refines it.
    const double hi = zeta_upper_bound(order);
    constexpr int scan = 48;
    std::vector<double> grid(scan + 1), values(scan + 1);
    grid[0] = 0.0;
    values[0] = best.mi_uniform;
    for (int n = 1; n <= scan; ++n)
    {
        grid[n] = hi * std::pow(2.0, -0.5 * (scan - n));
        values[n] = mi_at(grid[n]);
    }
    int arg = 0;
    for (int n = 1; n <= scan; ++n)
        if (values[n] > values[arg])
            arg = n;

    double a = grid[std::max(arg - 1, 0)];
    double b = grid[std::min(arg + 1, scan)];
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = mi_at(x1), f2 = mi_at(x2);
    while (b - a > 1e-7 * std::max(b, 1e-12))
    {
        if (f1 < f2)
        {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = mi_at(x2);
        }
        else
        {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = mi_at(x1);
        }
    }
    const double candidates[] = {grid[arg], x1, x2};
    const double candidate_values[] = {values[arg], f1, f2};
    for (int n = 0; n < 3; ++n)
        if (candidate_values[n] > best.mi)
        {
            best.mi = candidate_values[n];
            best.zeta = candidates[n];
        }
    return best;
}

double shaping_gain_db(int order, double snr, double mi)
{
    const ConstellationSpec uniform = build_constellation(order);
    const double snr_db = 10.0 * std::log10(snr);
    auto mi_u = [&](double db) { return mi_separable(uniform, std::pow(10.0, db / 10.0)).mi_bits; };
    double lo = snr_db - 3.0, hi = snr_db + 20.0;
    if (mi_u(lo) >= mi)
        return lo - snr_db;
    if (mi_u(hi) <= mi)
        return hi - snr_db;
    while (hi - lo > 1e-6)
    {
        const double mid = 0.5 * (lo + hi);
        (mi_u(mid) < mi ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) - snr_db;
}

RateMetrics air_and_code_rate(double mi, double symbol_rate, int order, double channel_spacing)
{
    const double capacity = std::log2(static_cast<double>(order));
    if (mi < 0.0 || mi > capacity + 1e-9)
        throw DomainError("air_and_code_rate: mutual information outside [0, log2 M]");
    RateMetrics r;
    r.air = 2.0 * symbol_rate * mi;
    r.se = r.air / channel_spacing;
    r.code_rate = std::min(mi / capacity, 1.0);
    r.overhead_pct = r.code_rate > 0.0 ? (1.0 / r.code_rate - 1.0) * 100.0 : std::numeric_limits<double>::infinity();
    return r;
}

} // namespace gnair
