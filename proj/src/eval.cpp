#include "pubshare/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pubshare {
namespace {

constexpr long long kBlock = 4096;

double pairwise_sum(const std::vector<double>& xs, std::size_t lo, std::size_t hi) {
    if (hi - lo == 0) return 0.0;
    if (hi - lo == 1) return xs[lo];
    std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(xs, lo, mid) + pairwise_sum(xs, mid, hi);
}

} // namespace

double exact_unanimous_value(const CostShareVector& shares, const Dist& d, Objective obj) {
    double prod = 1.0;
    double wsum = 0.0;
    for (double c : shares.shares) {
        if (c < 0.0 || c > 1.0) throw std::invalid_argument("share outside [0,1]");
        prod *= d.reliability(c);
        if (obj == Objective::welfare) wsum += conditional_welfare(d, c);
    }
    if (obj == Objective::consumers) return prod * static_cast<double>(shares.shares.size());
    return prod * wsum;
}

Estimate mc_estimate(const std::function<double(const std::vector<double>&)>& objective_on_profile,
                     const Dist& d, int n, long long samples, std::uint64_t seed) {
    if (samples <= 0) throw std::invalid_argument("samples must be positive");
    if (n < 1) throw std::invalid_argument("n must be positive");
    std::vector<double> block_sums, block_sqs;
    block_sums.reserve((samples + kBlock - 1) / kBlock);
    block_sqs.reserve(block_sums.capacity());
    std::vector<double> profile(n);
    for (long long start = 0; start < samples; start += kBlock) {
        long long stop = std::min(samples, start + kBlock);
        double bs = 0.0, bq = 0.0;
        for (long long i = start; i < stop; ++i) {
            draw_profile(d, seed, static_cast<std::uint64_t>(i), n, profile.data());
            double v = objective_on_profile(profile);
            bs += v;
            bq += v * v;
        }
        block_sums.push_back(bs);
        block_sqs.push_back(bq);
    }
    double total = pairwise_sum(block_sums, 0, block_sums.size());
    double total_sq = pairwise_sum(block_sqs, 0, block_sqs.size());
    Estimate est;
    est.samples = samples;
    est.seed = seed;
    est.mean = total / samples;
    if (samples > 1) {
        double var = (total_sq - samples * est.mean * est.mean) / (samples - 1);
        est.stderr_ = std::sqrt(std::max(var, 0.0) / samples);
    }
    return est;
}

double outcome_objective(const Outcome& out, const std::vector<double>& profile, Objective obj) {
    if (!out.built) return 0.0;
    if (obj == Objective::consumers) return static_cast<double>(out.consumers.size());
    double total = 0.0;
    for (int i : out.consumers) total += profile[i] - out.payments[i];
    return total;
}

Estimate mc_estimate_unanimous(const CostShareVector& shares, const Dist& d,
                               long long samples, std::uint64_t seed, Objective obj) {
    int n = static_cast<int>(shares.shares.size());
    return mc_estimate(
        [&](const std::vector<double>& profile) {
            return outcome_objective(run_unanimous(shares, profile), profile, obj);
        },
        d, n, samples, seed);
}

Estimate mc_estimate_schedule(const Schedule& s, const Dist& d,
                              long long samples, std::uint64_t seed, Objective obj) {
    validate_schedule(s);
    auto violations = feasibility_check(s);
    if (!violations.empty())
        throw std::invalid_argument("schedule is infeasible (" +
                                    std::to_string(violations.size()) + " violations)");
    return mc_estimate_schedule_unchecked(s, d, samples, seed, obj);
}

Estimate mc_estimate_schedule_unchecked(const Schedule& s, const Dist& d,
                                        long long samples, std::uint64_t seed, Objective obj) {
    return mc_estimate(
        [&](const std::vector<double>& profile) {
            return outcome_objective(run_schedule_unchecked(s, profile), profile, obj);
        },
        d, s.n, samples, seed);
}

Estimate mc_estimate_policy(const OfferPolicy& policy, const Dist& d,
                            long long samples, std::uint64_t seed, Objective obj) {
    return mc_estimate(
        [&](const std::vector<double>& profile) {
            return outcome_objective(run_policy(policy, profile), profile, obj);
        },
        d, policy.n, samples, seed);
}

Estimate mc_estimate_sequential(const Dist& d, double offer, int n,
                                long long samples, std::uint64_t seed, Objective obj) {
    return mc_estimate(
        [&](const std::vector<double>& profile) {
            return outcome_objective(run_sequential_unit_offer(profile, offer), profile, obj);
        },
        d, n, samples, seed);
}

double exact_scs_consumers(const Dist& d, int n) {
    if (n < 1 || n > 64) throw std::invalid_argument("exact_scs_consumers: n must be in [1,64]");
    // Pascal triangle; double-precision roundoff stays ~1e-16 relative
    std::vector<std::vector<double>> choose(n + 1, std::vector<double>(n + 1, 0.0));
    for (int m = 0; m <= n; ++m) {
        choose[m][0] = 1.0;
        for (int j = 1; j <= m; ++j)
            choose[m][j] = choose[m - 1][j - 1] + (j <= m - 1 ? choose[m - 1][j] : 0.0);
    }
    auto binom_pmf = [&](int m, int j, double p) {
        return choose[m][j] * std::pow(p, j) * std::pow(1.0 - p, m - j);
    };

    std::vector<double> rel(n + 1, 0.0);
    for (int k = 1; k <= n; ++k) rel[k] = d.reliability(1.0 / k);

    // alive[m] = P(N_k = m and no j > k succeeded yet)
    std::vector<double> alive(n + 1, 0.0);
    for (int m = 0; m <= n; ++m) alive[m] = binom_pmf(n, m, rel[n]);
    double value = n * alive[n];
    alive[n] = 0.0;

    for (int k = n - 1; k >= 1; --k) {
        double q = rel[k + 1] > 0.0 ? std::min(rel[k] / rel[k + 1], 1.0) : 0.0;
        std::vector<double> next(n + 1, 0.0);
        for (int m = 0; m <= n; ++m) {
            if (alive[m] <= 0.0) continue;
            for (int j = 0; j <= m; ++j) next[j] += alive[m] * binom_pmf(m, j, q);
        }
        for (int j = k; j <= n; ++j) {
            value += k * next[j];
            next[j] = 0.0;
        }
        alive = std::move(next);
    }
    return value;
}

} // namespace pubshare
