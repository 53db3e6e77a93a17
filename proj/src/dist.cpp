#include "pubshare/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pubshare/rng.hpp"

namespace pubshare {
namespace {

constexpr double kPi = 3.14159265358979323846;

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi); }
double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double logistic_sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

struct TruncNormalPart {
    double mu, sigma, mass;
    double pdf(double x) const { return std_normal_pdf((x - mu) / sigma) / (sigma * mass); }
    double cdf(double x) const {
        return (std_normal_cdf((x - mu) / sigma) - std_normal_cdf(-mu / sigma)) / mass;
    }
};

double normal_mass01(double mu, double sigma) {
    return std_normal_cdf((1.0 - mu) / sigma) - std_normal_cdf(-mu / sigma);
}

void require_param_count(const Dist& d, std::size_t n, const char* kind) {
    if (d.params.size() != n) throw std::invalid_argument(std::string(kind) + ": wrong parameter count");
}

double draw_trunc_normal(Rng& rng, double mu, double sigma) {
    for (int tries = 0; tries < 100000; ++tries) {
        double x = rng.normal(mu, sigma);
        if (x >= 0.0 && x <= 1.0) return x;
    }
    return std::clamp(mu, 0.0, 1.0);
}

} // namespace

Dist make_uniform() {
    Dist d;
    d.kind = DistKind::uniform;
    return d;
}

Dist make_trunc_normal(double mu, double sigma) {
    if (sigma <= 0) throw std::invalid_argument("normal: sigma must be positive");
    Dist d;
    d.kind = DistKind::trunc_normal;
    d.params = {mu, sigma};
    d.mass = {normal_mass01(mu, sigma)};
    return d;
}

Dist make_trunc_exponential(double lambda) {
    if (lambda <= 0) throw std::invalid_argument("exponential: lambda must be positive");
    Dist d;
    d.kind = DistKind::trunc_exponential;
    d.params = {lambda};
    d.mass = {1.0 - std::exp(-lambda)};
    return d;
}

Dist make_trunc_logistic(double mu, double s) {
    if (s <= 0) throw std::invalid_argument("logistic: scale must be positive");
    Dist d;
    d.kind = DistKind::trunc_logistic;
    d.params = {mu, s};
    d.mass = {logistic_sigmoid((1.0 - mu) / s) - logistic_sigmoid(-mu / s)};
    return d;
}

Dist make_two_peak(double mu1, double s1, double mu2, double s2, double p) {
    if (s1 <= 0 || s2 <= 0) throw std::invalid_argument("twopeak: sigmas must be positive");
    if (p < 0 || p > 1) throw std::invalid_argument("twopeak: mixture weight must be in [0,1]");
    Dist d;
    d.kind = DistKind::two_peak;
    d.params = {mu1, s1, mu2, s2, p};
    d.mass = {normal_mass01(mu1, s1), normal_mass01(mu2, s2)};
    return d;
}

Dist make_kumaraswamy(double a, double b) {
    if (a <= 0 || b <= 0) throw std::invalid_argument("kumaraswamy: shape parameters must be positive");
    Dist d;
    d.kind = DistKind::kumaraswamy;
    d.params = {a, b};
    return d;
}

double Dist::pdf(double x) const {
    switch (kind) {
        case DistKind::uniform:
            return 1.0;
        case DistKind::trunc_normal: {
            TruncNormalPart part{params[0], params[1], mass[0]};
            return part.pdf(x);
        }
        case DistKind::trunc_exponential: {
            double lambda = params[0];
            return lambda * std::exp(-lambda * x) / mass[0];
        }
        case DistKind::trunc_logistic: {
            double z = (x - params[0]) / params[1];
            double s = logistic_sigmoid(z);
            return s * (1.0 - s) / (params[1] * mass[0]);
        }
        case DistKind::two_peak: {
            TruncNormalPart a{params[0], params[1], mass[0]};
            TruncNormalPart b{params[2], params[3], mass[1]};
            double p = params[4];
            return p * a.pdf(x) + (1.0 - p) * b.pdf(x);
        }
        case DistKind::kumaraswamy: {
            double a = params[0], b = params[1];
            return a * b * std::pow(x, a - 1.0) * std::pow(1.0 - std::pow(x, a), b - 1.0);
        }
    }
    return 0.0;
}

double Dist::cdf(double x) const {
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    switch (kind) {
        case DistKind::uniform:
            return x;
        case DistKind::trunc_normal: {
            TruncNormalPart part{params[0], params[1], mass[0]};
            return part.cdf(x);
        }
        case DistKind::trunc_exponential: {
            double lambda = params[0];
            return (1.0 - std::exp(-lambda * x)) / mass[0];
        }
        case DistKind::trunc_logistic: {
            double lo = logistic_sigmoid(-params[0] / params[1]);
            return (logistic_sigmoid((x - params[0]) / params[1]) - lo) / mass[0];
        }
        case DistKind::two_peak: {
            TruncNormalPart a{params[0], params[1], mass[0]};
            TruncNormalPart b{params[2], params[3], mass[1]};
            double p = params[4];
            return p * a.cdf(x) + (1.0 - p) * b.cdf(x);
        }
        case DistKind::kumaraswamy: {
            double a = params[0], b = params[1];
            return 1.0 - std::pow(1.0 - std::pow(x, a), b);
        }
    }
    return 0.0;
}

std::string Dist::spec() const {
    std::ostringstream out;
    auto join = [&](std::size_t from) {
        for (std::size_t i = from; i < params.size(); ++i) {
            if (i > from) out << ',';
            out << params[i];
        }
    };
    switch (kind) {
        case DistKind::uniform: out << "uniform"; break;
        case DistKind::trunc_normal: out << "normal:"; join(0); break;
        case DistKind::trunc_exponential: out << "exponential:"; join(0); break;
        case DistKind::trunc_logistic: out << "logistic:"; join(0); break;
        case DistKind::two_peak: out << "twopeak:"; join(0); break;
        case DistKind::kumaraswamy: out << "kumaraswamy:"; join(0); break;
    }
    return out.str();
}

Dist parse_dist(const std::string& spec) {
    std::string name = spec;
    std::vector<double> args;
    auto colon = spec.find(':');
    if (colon != std::string::npos) {
        name = spec.substr(0, colon);
        std::string rest = spec.substr(colon + 1);
        std::stringstream ss(rest);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            std::size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument("bad number in distribution spec: " + tok);
            args.push_back(v);
        }
    }
    auto need = [&](std::size_t k) {
        if (args.size() != k)
            throw std::invalid_argument("distribution " + name + " expects " + std::to_string(k) + " parameters");
    };
    if (name == "uniform") { need(0); return make_uniform(); }
    if (name == "normal") { need(2); return make_trunc_normal(args[0], args[1]); }
    if (name == "exponential") { need(1); return make_trunc_exponential(args[0]); }
    if (name == "logistic") { need(2); return make_trunc_logistic(args[0], args[1]); }
    if (name == "twopeak") { need(5); return make_two_peak(args[0], args[1], args[2], args[3], args[4]); }
    if (name == "kumaraswamy") { need(2); return make_kumaraswamy(args[0], args[1]); }
    throw std::invalid_argument(
        "unknown distribution '" + name +
        "'; valid kinds: uniform, normal:mu,sigma, exponential:lambda, logistic:mu,s, "
        "twopeak:mu1,s1,mu2,s2,p, kumaraswamy:a,b");
}

EvalResult distribution_eval(const Dist& d, double x) {
    if (x < 0.0 || x > 1.0) throw std::domain_error("distribution_eval: x outside [0,1]");
    double c = d.cdf(x);
    return {d.pdf(x), c, 1.0 - c};
}

namespace {

// Composite Simpson of the reliability function over [c,1] on a mesh whose
// segments halve toward both endpoints. Combined with the exact identity
// integral (x-c) f(x) dx = integral reliability(x) dx this keeps the
// quadrature accurate even for densities with endpoint singularities.
double integrate_reliability(const Dist& d, double c) {
    double span = 1.0 - c;
    if (span <= 0) return 0.0;
    constexpr int kPanels = 48;
    auto simpson_segment = [&](double a, double b) {
        double h = (b - a) / kPanels;
        if (h <= 0) return 0.0;
        double acc = d.reliability(a) + d.reliability(b);
        for (int i = 1; i < kPanels; ++i) acc += d.reliability(a + i * h) * (i % 2 ? 4.0 : 2.0);
        return acc * h / 3.0;
    };
    double total = 0.0;
    double mid = c + 0.5 * span;
    double hi = mid;
    for (int j = 2;; ++j) {
        double step = span * std::ldexp(1.0, -j);
        double lo = c + step;
        if (step < 1e-18 || lo <= c || lo >= hi) {
            total += simpson_segment(c, hi);
            break;
        }
        total += simpson_segment(lo, hi);
        hi = lo;
    }
    double lo = mid;
    for (int j = 2;; ++j) {
        double step = span * std::ldexp(1.0, -j);
        double b = 1.0 - step;
        if (step < 1e-18 || b >= 1.0 || b <= lo) {
            total += simpson_segment(lo, 1.0);
            break;
        }
        total += simpson_segment(lo, b);
        lo = b;
    }
    return total;
}

} // namespace

double conditional_welfare(const Dist& d, double c) {
    if (c < 0.0 || c > 1.0) throw std::domain_error("conditional_welfare: c outside [0,1]");
    double denom = d.reliability(c);
    if (denom < 1e-12) return 0.0;
    return integrate_reliability(d, c) / denom;
}

double conditional_welfare_derivative(const Dist& d, double c) {
    double rel = d.reliability(c);
    if (rel < 1e-12) return -1.0;
    return -1.0 + conditional_welfare(d, c) * d.pdf(c) / rel;
}

double draw(const Dist& d, Rng& rng) {
    switch (d.kind) {
        case DistKind::uniform:
            return rng.uniform01();
        case DistKind::trunc_normal:
            return draw_trunc_normal(rng, d.params[0], d.params[1]);
        case DistKind::trunc_exponential: {
            double lambda = d.params[0];
            double u = rng.uniform01();
            return -std::log(1.0 - u * d.mass[0]) / lambda;
        }
        case DistKind::trunc_logistic: {
            double mu = d.params[0], s = d.params[1];
            double lo = logistic_sigmoid(-mu / s);
            double t = lo + rng.uniform01() * d.mass[0];
            return mu + s * std::log(t / (1.0 - t));
        }
        case DistKind::two_peak: {
            bool first = rng.uniform01() < d.params[4];
            return first ? draw_trunc_normal(rng, d.params[0], d.params[1])
                         : draw_trunc_normal(rng, d.params[2], d.params[3]);
        }
        case DistKind::kumaraswamy: {
            double a = d.params[0], b = d.params[1];
            double u = rng.uniform01();
            return std::pow(1.0 - std::pow(1.0 - u, 1.0 / b), 1.0 / a);
        }
    }
    return 0.0;
}

double draw_one(const Dist& d, std::uint64_t seed, std::uint64_t index) {
    Rng rng(seed, index);
    return draw(d, rng);
}

void draw_profile(const Dist& d, std::uint64_t seed, std::uint64_t index, int n, double* out) {
    Rng rng(seed, index);
    for (int i = 0; i < n; ++i) out[i] = draw(d, rng);
}

std::vector<double> sample(const Dist& d, std::uint64_t seed, std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = draw_one(d, seed, i);
    return out;
}

namespace {

// Density just below x = b - delta, kept stable when b - delta rounds to 1
// (the Kumaraswamy pole sits there).
double density_below(const Dist& d, double b, double delta) {
    if (d.kind == DistKind::kumaraswamy) {
        double omx = (1.0 - b) + delta;   // 1 - x
        if (omx < 1.0) {
            double aa = d.params[0], bb = d.params[1];
            double lx = std::log1p(-omx);
            double one_minus_xa = -std::expm1(aa * lx);
            return aa * bb * std::exp((aa - 1.0) * lx) * std::pow(one_minus_xa, bb - 1.0);
        }
    }
    return d.pdf(b - delta);
}

// tanh-sinh abscissas handle the integrable endpoint singularities of the
// Kumaraswamy density; for smooth kinds this is simply overkill precision.
// Node offsets from the endpoints are computed cancellation-free so the
// graded points reach all the way into the singularity.
double tanh_sinh_density(const Dist& d, double a, double b) {
    const double h = 1.0 / 64.0;
    const double half = 0.5 * (b - a);
    double total = 0.0;
    for (int k = -340; k <= 340; ++k) {
        double t = std::abs(k) * h;
        double u = 0.5 * kPi * std::sinh(t);
        double e2 = std::exp(-2.0 * u);
        double comp = 2.0 * e2 / (1.0 + e2);                    // 1 - tanh(u)
        double sech2 = 4.0 * e2 / ((1.0 + e2) * (1.0 + e2));
        double w = 0.5 * kPi * std::cosh(t) * sech2;
        double delta = half * comp;                             // distance to the endpoint
        if (delta <= 0.0 || w < 1e-280) continue;
        double fx = k < 0 ? d.pdf(a + delta) : density_below(d, b, delta);
        if (!std::isfinite(fx)) continue;
        total += w * fx;
    }
    return total * half * h;
}

} // namespace

double integrate_density(const Dist& d, double a, double b) {
    if (b <= a) return 0.0;
    return tanh_sinh_density(d, a, b);
}

ShapeReport shape_report(const Dist& d, int grid_size) {
    if (grid_size < 10) throw std::invalid_argument("shape_report: grid_size must be >= 10");
    int g = grid_size;
    std::vector<double> f(g + 1), w(g + 1), lf(g + 1);
    for (int i = 0; i <= g; ++i) {
        double x = static_cast<double>(i) / g;
        f[i] = d.pdf(x);
        w[i] = conditional_welfare(d, x);
        lf[i] = (f[i] > 0 && std::isfinite(f[i])) ? std::log(f[i]) : std::numeric_limits<double>::quiet_NaN();
    }

    ShapeReport report;
    report.grid_size = g;

    double lf_scale = 1.0, lc_viol = 0.0;
    for (int i = 0; i <= g; ++i)
        if (std::isfinite(lf[i])) lf_scale = std::max(lf_scale, std::abs(lf[i]));
    for (int i = 1; i < g; ++i) {
        if (!std::isfinite(lf[i - 1]) || !std::isfinite(lf[i]) || !std::isfinite(lf[i + 1])) continue;
        lc_viol = std::max(lc_viol, lf[i - 1] - 2.0 * lf[i] + lf[i + 1]);
    }
    report.log_concavity_violation = std::max(0.0, lc_viol) / lf_scale;
    report.log_concave = report.log_concavity_violation <= 1e-9;

    double w_scale = 1.0, wc_viol = 0.0;
    for (int i = 0; i <= g; ++i) w_scale = std::max(w_scale, std::abs(w[i]));
    for (int i = 1; i < g; ++i)
        wc_viol = std::max(wc_viol, w[i - 1] - 2.0 * w[i] + w[i + 1]);
    report.welfare_concavity_violation = std::max(0.0, wc_viol) / w_scale;
    report.welfare_concave = report.welfare_concavity_violation <= 1e-9;

    double f_scale = 1.0, mono_viol = 0.0;
    for (int i = 0; i <= g; ++i)
        if (std::isfinite(f[i])) f_scale = std::max(f_scale, f[i]);
    for (int i = 0; i < g; ++i) {
        if (!std::isfinite(f[i]) || !std::isfinite(f[i + 1])) continue;
        mono_viol = std::max(mono_viol, f[i + 1] - f[i]);
    }
    report.monotonicity_violation = std::max(0.0, mono_viol) / f_scale;
    report.nonincreasing = report.monotonicity_violation <= 1e-9;
    return report;
}

} // namespace pubshare
