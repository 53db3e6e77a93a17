#pragma once
#include <cstdint>
#include <functional>
#include <vector>

#include "pubshare/dist.hpp"
#include "pubshare/mechanisms.hpp"
#include "pubshare/solvers.hpp"

namespace pubshare {

struct Estimate {
    double mean = 0;
    double stderr_ = 0;
    long long samples = 0;
    std::uint64_t seed = 0;
};

// consumers -> n * prod reliability(c_i); welfare -> prod reliability(c_i) * sum w(c_i).
double exact_unanimous_value(const CostShareVector& shares, const Dist& d, Objective obj);

// Generic Monte Carlo driver. Profiles come from per-sample substreams of
// (seed, sample index), and block sums reduce pairwise, so the mean is
// independent of any worker split and reproducible bit-for-bit.
Estimate mc_estimate(const std::function<double(const std::vector<double>&)>& objective_on_profile,
                     const Dist& d, int n, long long samples, std::uint64_t seed);

double outcome_objective(const Outcome& out, const std::vector<double>& profile, Objective obj);

Estimate mc_estimate_unanimous(const CostShareVector& shares, const Dist& d,
                               long long samples, std::uint64_t seed, Objective obj);
// Checks feasibility once, then runs unchecked.
Estimate mc_estimate_schedule(const Schedule& s, const Dist& d,
                              long long samples, std::uint64_t seed, Objective obj);
// No feasibility gate: evaluates the schedule as-is (trained networks).
Estimate mc_estimate_schedule_unchecked(const Schedule& s, const Dist& d,
                                        long long samples, std::uint64_t seed, Objective obj);
Estimate mc_estimate_policy(const OfferPolicy& policy, const Dist& d,
                            long long samples, std::uint64_t seed, Objective obj);
// consumers_only counts everyone from the payer on; subtract the build
// probability to get the free riders.
Estimate mc_estimate_sequential(const Dist& d, double offer, int n,
                                long long samples, std::uint64_t seed, Objective obj);

// E[k*], k* = max{k : #{i : v_i >= 1/k} >= k}, through the downward
// binomial chain N_n ~ Bin(n, reliability(1/n)),
// N_k | N_{k+1}=m ~ Bin(m, reliability(1/k)/reliability(1/(k+1))).
double exact_scs_consumers(const Dist& d, int n);

} // namespace pubshare
