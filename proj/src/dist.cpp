#include "tpg/dist.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "tpg/log.hpp"

namespace tpg {

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson(F&& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

template <class F>
double integrate(F&& f, double a, double b, double tol) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    return adaptive_simpson(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 48);
}

double parse_number(std::string_view text) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ConfigError("dist", "cannot parse number '" + std::string(text) + "'");
    return value;
}

std::pair<double, double> parse_pair(std::string_view text) {
    const auto comma = text.find(',');
    if (comma == std::string_view::npos)
        throw ConfigError("dist", "expected 'A,B' but got '" + std::string(text) + "'");
    return {parse_number(text.substr(0, comma)), parse_number(text.substr(comma + 1))};
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front =
        std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

CostDistribution::CostDistribution(Kind kind, double alpha, double beta, double low,
                                   double high)
    : kind_(kind), alpha_(alpha), beta_(beta), low_(low), high_(high) {
    if (!(low > 0.0) || !(high > low) || !std::isfinite(high))
        throw ConfigError("dist", "support must satisfy 0 < low < high < inf");
    if (kind == Kind::scaled_beta) {
        if (!(alpha > 0.0) || !(beta > 0.0))
            throw ConfigError("dist", "beta shapes must be positive");
        const bool paper_shape = (alpha == 2.0 && beta == 5.0) || (alpha == 5.0 && beta == 2.0);
        if (!paper_shape) {
            std::ostringstream msg;
            msg << "Beta(" << alpha << "," << beta << ") ";
            if (alpha < 1.0 || beta < 1.0)
                msg << "is not log-concave; cutoff uniqueness is not guaranteed";
            else
                msg << "log-concavity checked by shape only (alpha, beta >= 1)";
            warn_once(msg.str());
        }
        log_norm_ = log_beta(alpha, beta);
    }
}

CostDistribution CostDistribution::uniform(double low, double high) {
    return CostDistribution(Kind::uniform, 1.0, 1.0, low, high);
}

CostDistribution CostDistribution::scaled_beta(double alpha, double beta, double low,
                                               double high) {
    return CostDistribution(Kind::scaled_beta, alpha, beta, low, high);
}

CostDistribution CostDistribution::parse(std::string_view text) {
    const auto colon = text.find(':');
    const auto head = text.substr(0, colon);
    const auto rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    if (head == "uniform") {
        if (rest.empty()) return uniform(1.0, 5.0);
        auto [lo, hi] = parse_pair(rest);
        return uniform(lo, hi);
    }
    if (head == "beta") {
        if (rest.empty()) throw ConfigError("dist", "beta needs shapes, e.g. beta:2,5:1,5");
        const auto colon2 = rest.find(':');
        auto [a, b] = parse_pair(rest.substr(0, colon2));
        if (colon2 == std::string_view::npos) return scaled_beta(a, b, 1.0, 5.0);
        auto [lo, hi] = parse_pair(rest.substr(colon2 + 1));
        return scaled_beta(a, b, lo, hi);
    }
    throw ConfigError("dist", "unknown distribution '" + std::string(text) + "'");
}

std::string CostDistribution::to_string() const {
    auto num = [](double x) {
        char buf[32];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
        return std::string(buf, ptr);
    };
    if (kind_ == Kind::uniform) return "uniform:" + num(low_) + ',' + num(high_);
    return "beta:" + num(alpha_) + ',' + num(beta_) + ':' + num(low_) + ',' + num(high_);
}

double CostDistribution::pdf(double c) const {
    if (c < low_ || c > high_) return 0.0;
    const double width = high_ - low_;
    if (kind_ == Kind::uniform) return 1.0 / width;
    const double x = (c - low_) / width;
    if ((x == 0.0 && alpha_ > 1.0) || (x == 1.0 && beta_ > 1.0)) return 0.0;
    const double logf = (alpha_ - 1.0) * std::log(x) + (beta_ - 1.0) * std::log1p(-x) - log_norm_;
    return std::exp(logf) / width;
}

double CostDistribution::cdf(double c) const {
    if (c <= low_) return 0.0;
    if (c >= high_) return 1.0;
    const double x = (c - low_) / (high_ - low_);
    if (kind_ == Kind::uniform) return x;
    return regularized_incomplete_beta(alpha_, beta_, x);
}

double CostDistribution::inv_cdf(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile level outside [0,1]");
    if (q == 0.0) return low_;
    if (q == 1.0) return high_;
    if (kind_ == Kind::uniform) return rescale(q);
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-14) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (regularized_incomplete_beta(alpha_, beta_, mid) < q)
            lo = mid;
        else
            hi = mid;
    }
    return rescale(0.5 * (lo + hi));
}

double CostDistribution::sample_one(std::mt19937_64& rng) const {
    if (kind_ == Kind::uniform) {
        std::uniform_real_distribution<double> u(low_, high_);
        return u(rng);
    }
    std::gamma_distribution<double> ga(alpha_, 1.0);
    std::gamma_distribution<double> gb(beta_, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return rescale(x / (x + y));
}

CostVector CostDistribution::sample(std::mt19937_64& rng, int n) const {
    CostVector out(static_cast<std::size_t>(n));
    for (auto& c : out) c = sample_one(rng);
    return out;
}

double CostDistribution::floor_mean_tail(double a, double p) const {
    if (!(a >= low_ && a < high_))
        throw std::domain_error("cutoff must lie in [low, high)");
    if (p == 0.0) return 0.0;
    if (p > low_)
        warn_once("subsidy exceeds the lowest cost; floor contributions are clamped at 1 "
                  "and the cutoff analysis is outside its stated regime");
    if (kind_ == Kind::uniform) {
        const double width = high_ - a;
        if (p <= a) return p * (std::log(high_) - std::log(a)) / width;
        if (p >= high_) return 1.0;
        // min(p/c, 1) is 1 on [a, p] and p/c on [p, high].
        return ((p - a) + p * (std::log(high_) - std::log(p))) / width;
    }
    const double tail = 1.0 - cdf(a);
    if (tail <= 0.0) return std::min(p / high_, 1.0);
    auto integrand = [&](double c) { return std::min(p / c, 1.0) * pdf(c); };
    double numer = 0.0;
    if (p > a && p < high_)
        numer = integrate(integrand, a, p, 1e-11) + integrate(integrand, p, high_, 1e-11);
    else
        numer = integrate(integrand, a, high_, 1e-10);
    return numer / tail;
}

}  // namespace tpg
