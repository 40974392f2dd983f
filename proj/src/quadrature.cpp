#include "cmsn/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "cmsn/logspace.hpp"

namespace cmsn {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double clean(double v) { return std::isnan(v) ? kNegInf : v; }

}  // namespace

QuadratureRule tanh_sinh_rule(Domain domain, int level) {
    if (level < 0 || level > 20) throw std::invalid_argument("tanh_sinh_rule: bad level");
    const double h = std::ldexp(1.0, -level);

    // abscissa cutoffs keeping nodes strictly interior in double precision
    double tmax;
    if (domain == Domain::HalfLine)
        tmax = std::asinh(700.0 * 2.0 / kPi);  // |ln x| <= 700
    else
        tmax = std::asinh(17.5 * 2.0 / kPi);   // 1 - |x| >= ~1e-15

    const long jmax = static_cast<long>(tmax / h);
    const long count = 2 * jmax + 1;
    QuadratureRule rule;
    rule.domain = domain;
    rule.level = level;
    rule.nodes.resize(count);
    rule.log_weights.resize(count);

    for (long j = -jmax; j <= jmax; ++j) {
        const double t = j * h;
        const double u = 0.5 * kPi * std::sinh(t);
        const double logcosht = std::log(0.5 * kPi * std::cosh(t));
        double x, logw;
        if (domain == Domain::HalfLine) {
            // x = exp(u), w = x * (pi/2) cosh t
            x = std::exp(u);
            logw = u + logcosht;
        } else {
            // x = tanh(u) on (-1,1), w = (pi/2) cosh t / cosh^2(u)
            x = std::tanh(u);
            double logcoshu = (std::abs(u) > 30.0) ? std::abs(u) - std::log(2.0)
                                                   : std::log(std::cosh(u));
            logw = logcosht - 2.0 * logcoshu;
            if (domain == Domain::Unit01) {
                x = 0.5 * (1.0 + x);
                logw += std::log(0.5);
            }
        }
        rule.nodes[j + jmax] = x;
        rule.log_weights[j + jmax] = logw + std::log(h);
    }
    return rule;
}

double integrate_log(const std::function<double(double)>& f_log, const QuadratureRule& rule) {
    Eigen::ArrayXd terms(rule.nodes.size());
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
        terms[i] = clean(f_log(rule.nodes[i])) + rule.log_weights[i];
    return log_sum_exp(terms);
}

double integrate_log_adaptive(const std::function<double(double)>& f_log, Domain domain,
                              double tol, int max_level) {
    double prev = kNegInf;
    bool have_prev = false;
    for (int level = 4; level <= max_level; ++level) {
        double est = integrate_log(f_log, tanh_sinh_rule(domain, level));
        if (have_prev) {
            if (est == kNegInf && prev == kNegInf) return kNegInf;
            if (std::abs(est - prev) < tol + 1e-13 * std::abs(est)) return est;
        }
        prev = est;
        have_prev = true;
    }
    std::ostringstream msg;
    msg << "integrate_log_adaptive: no convergence at level cap " << max_level
        << " (last two estimates " << prev << ", and the one before)";
    throw NumericError(msg.str());
}

double integrate_log_peaked(const std::function<double(double)>& phi, double tol) {
    auto eval = [&phi](double u) { return clean(phi(u)); };

    // coarse scan of the real line
    const int scan_n = 577;
    double best_u = 0.0, best_v = kNegInf;
    for (int i = 0; i < scan_n; ++i) {
        double u = -720.0 + 1440.0 * i / (scan_n - 1);
        double v = eval(u);
        if (v > best_v) {
            best_v = v;
            best_u = u;
        }
    }
    if (best_v == kNegInf) return kNegInf;

    // golden-section refinement inside the bracketing scan cells
    const double gr = 0.6180339887498949;
    double a = best_u - 2.5, b = best_u + 2.5;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = eval(c), fd = eval(d);
    while (b - a > 1e-7) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = eval(d);
        }
    }
    const double ustar = 0.5 * (a + b);
    const double pstar = eval(ustar);

    // local curvature -> peak width estimate
    double width = 1.0;
    for (double dlt : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
        double k = -(eval(ustar + dlt) - 2.0 * pstar + eval(ustar - dlt)) / (dlt * dlt);
        if (std::isfinite(k) && k > 1e-10) {
            width = 1.0 / std::sqrt(k);
            break;
        }
    }

    // expand each tail until phi has dropped 95 nats
    auto tail_end = [&](double direction) {
        double step = std::max(width, 1e-3);
        double u = ustar;
        while (std::abs(u) < 1.0e6) {
            double u2 = u + direction * step;
            if (eval(u2) < pstar - 95.0) return u2;
            u = u2;
            step *= 2.0;
        }
        return u;
    };
    const double ulo = tail_end(-1.0), uhi = tail_end(+1.0);

    // uniform grid, halving the spacing until two estimates agree; boundary
    // values sit 95 nats below the peak so the open/closed distinction is moot
    const double delta0 = std::min(0.5, 0.5 * width);
    const long n = static_cast<long>((uhi - ulo) / delta0) + 2;
    std::vector<double> vals;
    vals.reserve(8 * n);
    double delta = (uhi - ulo) / n;
    for (long i = 0; i <= n; ++i) vals.push_back(eval(ulo + delta * i));
    double est = log_sum_exp(std::span<const double>(vals)) + std::log(delta);

    for (int round = 0; round < 9; ++round) {
        if (static_cast<long>(vals.size()) > 8'000'000) break;
        const long cells = std::lround((uhi - ulo) / delta);
        for (long i = 0; i < cells; ++i) vals.push_back(eval(ulo + delta * (i + 0.5)));
        delta *= 0.5;
        double next = log_sum_exp(std::span<const double>(vals)) + std::log(delta);
        // the floor term covers evaluation noise of the integrand itself,
        // which scales with the magnitude of the log values involved
        if (std::abs(next - est) < tol + 1e-13 * std::abs(next)) return next;
        est = next;
    }
    std::ostringstream msg;
    msg << "integrate_log_peaked: no convergence (last estimate " << est << ")";
    throw NumericError(msg.str());
}

}  // namespace cmsn
