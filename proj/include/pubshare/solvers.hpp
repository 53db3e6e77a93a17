#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "pubshare/dist.hpp"
#include "pubshare/mechanisms.hpp"

namespace pubshare {

// Grid step 1/H for every continuous dimension (offers, money, the welfare
// accumulator). States snap to grid points; no interpolation.
struct GridSpec {
    int H = 100;
};

enum class Objective { consumers, welfare };

// Offer table for the one-directional mechanism, indexed by
// (agents remaining k, accumulated objective u, money still needed m),
// u on [0, n] and m on [0, 1] at step 1/H. Offers are grid indices.
struct OfferPolicy {
    int n = 0;
    int H = 0;
    Objective objective = Objective::consumers;
    std::vector<std::uint16_t> offers;   // [((k-1) * (n*H+1) + u) * (H+1) + m]
    std::vector<std::int32_t> du;        // u-advance per accepted offer index (H under consumers)

    int offer_index(int k, int u_idx, int m_idx) const {
        return offers[(static_cast<std::size_t>(k - 1) * (n * H + 1) + u_idx) * (H + 1) + m_idx];
    }
};

struct UnanimousSolution {
    CostShareVector shares;
    double value = 0;
};

struct OneDirectionalSolution {
    OfferPolicy policy;
    double value = 0;
};

// B(k,u,m) = max_c reliability(c) * B(k-1, u + pay(c), m - c),
// base B(1,u,m) = reliability(m) * (u + w(m)); pay is 1 for the consumers
// objective and w(c) for welfare. Ties break toward the smallest offer.
UnanimousSolution solve_optimal_unanimous(const Dist& d, int n, GridSpec grid, Objective obj);

// D(k,u,m) = max_c [ reliability(c) D(k-1, u+pay(c), m-c) + cdf(c) D(k-1, u, m) ],
// D(0,u,0) = u, D(0,u,m>0) = 0, D(k,u,0) = u + k * pay(free consumer).
OneDirectionalSolution solve_one_directional(const Dist& d, int n, GridSpec grid, Objective obj);

// Every size-k coalition gets the optimal unanimous shares for k agents.
// Not necessarily feasible.
Schedule myopic_schedule(const Dist& d, int n, GridSpec grid, Objective obj);

// G(t): best objective over a size-t unanimous set. t for consumers;
// the welfare DP g(k,m) = max_c w(c) + g(k-1, m-c), g(1,m) = w(m) otherwise.
double welfare_cap(const Dist& d, int t, GridSpec grid, Objective obj);

// U(n,n,1,0) of the Markov relaxation over lower-bound splits: an upper
// bound on every largest unanimous mechanism's expected objective.
double upper_bound(const Dist& d, int n, GridSpec grid, Objective obj);

// The walk a policy induces on one profile (offers in identity order,
// acceptance at equality; built iff the full cost is raised).
Outcome run_policy(const OfferPolicy& policy, const std::vector<double>& profile);

std::string policy_to_json(const OfferPolicy& p);
OfferPolicy policy_from_json(const std::string& text);
void save_policy(const OfferPolicy& p, const std::string& path);
OfferPolicy load_policy(const std::string& path);

} // namespace pubshare
