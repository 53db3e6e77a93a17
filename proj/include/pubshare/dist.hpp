#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace pubshare {

enum class DistKind {
    uniform,
    trunc_normal,
    trunc_exponential,
    trunc_logistic,
    two_peak,
    kumaraswamy,
};

// A valuation prior on [0,1]. Truncated kinds are restricted to [0,1] by
// dividing out the mass the untruncated density puts there; `mass` caches
// those normalizers (two entries for the two-peak components).
struct Dist {
    DistKind kind = DistKind::uniform;
    std::vector<double> params;
    std::vector<double> mass;

    double pdf(double x) const;
    double cdf(double x) const;
    double reliability(double x) const { return 1.0 - cdf(x); }
    std::string spec() const;
};

Dist make_uniform();
Dist make_trunc_normal(double mu, double sigma);
Dist make_trunc_exponential(double lambda);
Dist make_trunc_logistic(double mu, double s);
Dist make_two_peak(double mu1, double s1, double mu2, double s2, double p);
Dist make_kumaraswamy(double a, double b);

// Spec strings: uniform | normal:0.5,0.1 | exponential:1 | logistic:0.5,0.1
//             | twopeak:0.15,0.1,0.85,0.1,0.5 | kumaraswamy:0.1,0.354
Dist parse_dist(const std::string& spec);

struct EvalResult {
    double density;
    double cdf;
    double reliability;
};

// Throws std::domain_error for x outside [0,1].
EvalResult distribution_eval(const Dist& d, double x);

// w(c) = E[x - c | x >= c]; returns 0 once the conditioning mass drops
// below 1e-12. Computed as Simpson quadrature of the reliability integral
// on a mesh graded into both endpoints (handles density singularities).
double conditional_welfare(const Dist& d, double c);

// d/dc of conditional_welfare, via w'(c) = -1 + w(c) f(c) / reliability(c).
double conditional_welfare_derivative(const Dist& d, double c);

// Sample i is a pure function of (d, seed, i); prefixes agree across counts.
std::vector<double> sample(const Dist& d, std::uint64_t seed, std::size_t count);
double draw_one(const Dist& d, std::uint64_t seed, std::uint64_t index);

class Rng;
// One draw advancing the supplied stream.
double draw(const Dist& d, Rng& rng);
// n draws from the substream (seed, index) into out.
void draw_profile(const Dist& d, std::uint64_t seed, std::uint64_t index, int n, double* out);

struct ShapeReport {
    bool log_concave = false;
    bool welfare_concave = false;
    bool nonincreasing = false;
    int grid_size = 0;
    double log_concavity_violation = 0;
    double welfare_concavity_violation = 0;
    double monotonicity_violation = 0;
};

// Grid-numeric verdicts: second differences of log f and of w, first
// differences of f. A property holds iff the scaled violation is <= 1e-9.
ShapeReport shape_report(const Dist& d, int grid_size);

// tanh-sinh quadrature of the density over [a,b]; the variable change
// absorbs the Kumaraswamy endpoint singularities.
double integrate_density(const Dist& d, double a, double b);

} // namespace pubshare
