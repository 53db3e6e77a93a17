#include "pubshare/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pubshare {
namespace {

constexpr double kMassFloor = 1e-12;

struct Grids {
    int H;
    std::vector<double> rel;   // reliability at c = i/H
    std::vector<double> w;     // conditional welfare at c = i/H
    std::vector<double> pay;   // accepted-offer payoff credited to u
    std::vector<int> du;       // u-advance in grid steps
};

Grids make_grids(const Dist& d, GridSpec grid, Objective obj) {
    int H = grid.H;
    if (H < 1) throw std::invalid_argument("grid H must be positive");
    Grids g;
    g.H = H;
    g.rel.resize(H + 1);
    g.w.resize(H + 1);
    g.pay.resize(H + 1);
    g.du.resize(H + 1);
    for (int i = 0; i <= H; ++i) {
        double c = static_cast<double>(i) / H;
        g.rel[i] = d.reliability(c);
        g.w[i] = conditional_welfare(d, c);
        if (obj == Objective::consumers) {
            g.pay[i] = 1.0;
            g.du[i] = H;
        } else {
            g.pay[i] = g.w[i];
            g.du[i] = static_cast<int>(std::lround(g.w[i] * H));
        }
    }
    return g;
}

void check_n(int n) {
    if (n < 1 || n > 64) throw std::invalid_argument("n must be in [1,64]");
}

} // namespace

UnanimousSolution solve_optimal_unanimous(const Dist& d, int n, GridSpec grid, Objective obj) {
    check_n(n);
    Grids g = make_grids(d, grid, obj);
    const int H = g.H;
    const int UH = n * H;
    const std::size_t ucount = UH + 1, mcount = H + 1;

    // layer value B(k, u, m); the k = 1 base credits the exact last-agent
    // payoff (1 consumer, or the unsnapped w(m)).
    std::vector<double> prev(ucount * mcount), cur(ucount * mcount);
    for (int u = 0; u <= UH; ++u)
        for (int m = 0; m <= H; ++m)
            prev[u * mcount + m] = g.rel[m] * (static_cast<double>(u) / H + g.pay[m]);

    std::vector<std::vector<std::int16_t>> arg(n + 1);
    for (int k = 2; k <= n; ++k) {
        arg[k].assign(ucount * mcount, 0);
        for (int u = 0; u <= UH; ++u) {
            for (int m = 0; m <= H; ++m) {
                double best = -1.0;
                int best_c = 0;
                for (int c = 0; c <= m; ++c) {
                    int u2 = std::min(u + g.du[c], UH);
                    double val = g.rel[c] * prev[u2 * mcount + (m - c)];
                    if (val > best) {
                        best = val;
                        best_c = c;
                    }
                }
                cur[u * mcount + m] = best;
                arg[k][u * mcount + m] = static_cast<std::int16_t>(best_c);
            }
        }
        std::swap(prev, cur);
    }

    UnanimousSolution sol;
    sol.value = prev[0 * mcount + H];
    int u = 0, m = H;
    for (int k = n; k >= 2; --k) {
        int c = arg[k][u * mcount + m];
        sol.shares.shares.push_back(static_cast<double>(c) / H);
        u = std::min(u + g.du[c], UH);
        m -= c;
    }
    sol.shares.shares.push_back(static_cast<double>(m) / H);
    return sol;
}

OneDirectionalSolution solve_one_directional(const Dist& d, int n, GridSpec grid, Objective obj) {
    check_n(n);
    Grids g = make_grids(d, grid, obj);
    const int H = g.H;
    const int UH = n * H;
    const std::size_t ucount = UH + 1, mcount = H + 1;
    const double free_pay = obj == Objective::consumers ? 1.0 : g.w[0];

    OneDirectionalSolution sol;
    sol.policy.n = n;
    sol.policy.H = H;
    sol.policy.objective = obj;
    sol.policy.offers.assign(static_cast<std::size_t>(n) * ucount * mcount, 0);
    sol.policy.du.assign(g.du.begin(), g.du.end());

    // D(0,u,0) = u, D(0,u,m>0) = 0.
    std::vector<double> prev(ucount * mcount, 0.0), cur(ucount * mcount);
    for (int u = 0; u <= UH; ++u) prev[u * mcount + 0] = static_cast<double>(u) / H;

    for (int k = 1; k <= n; ++k) {
        std::uint16_t* offers =
            sol.policy.offers.data() + static_cast<std::size_t>(k - 1) * ucount * mcount;
        for (int u = 0; u <= UH; ++u) {
            cur[u * mcount + 0] = static_cast<double>(u) / H + k * free_pay;
            offers[u * mcount + 0] = 0;
            for (int m = 1; m <= H; ++m) {
                double best = -1.0;
                int best_c = 0;
                for (int c = 0; c <= m; ++c) {
                    int u2 = std::min(u + g.du[c], UH);
                    double val = g.rel[c] * prev[u2 * mcount + (m - c)] +
                                 (1.0 - g.rel[c]) * prev[u * mcount + m];
                    if (val > best) {
                        best = val;
                        best_c = c;
                    }
                }
                cur[u * mcount + m] = best;
                offers[u * mcount + m] = static_cast<std::uint16_t>(best_c);
            }
        }
        std::swap(prev, cur);
    }
    sol.value = prev[0 * mcount + H];
    return sol;
}

Schedule myopic_schedule(const Dist& d, int n, GridSpec grid, Objective obj) {
    if (n < 1 || n > 16) throw std::invalid_argument("myopic_schedule: n must be in [1,16]");
    std::vector<std::vector<double>> by_size(n + 1);
    for (int k = 1; k <= n; ++k)
        by_size[k] = solve_optimal_unanimous(d, k, grid, obj).shares.shares;
    Schedule s;
    s.n = n;
    s.table.resize(1u << n);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask)
        s.table[mask] = by_size[std::popcount(mask)];
    return s;
}

namespace {

// g(k,m) = max_c w(c) + g(k-1, m-c): best welfare of k agents splitting m.
std::vector<double> welfare_caps_all(const Grids& g, int t_max) {
    const int H = g.H;
    std::vector<double> caps(t_max + 1, 0.0);
    std::vector<double> prev(g.w), cur(H + 1);
    caps[1] = prev[H];
    for (int k = 2; k <= t_max; ++k) {
        for (int m = 0; m <= H; ++m) {
            double best = -1.0;
            for (int c = 0; c <= m; ++c) best = std::max(best, g.w[c] + prev[m - c]);
            cur[m] = best;
        }
        std::swap(prev, cur);
        caps[k] = prev[H];
    }
    return caps;
}

} // namespace

double welfare_cap(const Dist& d, int t, GridSpec grid, Objective obj) {
    if (t < 1) throw std::invalid_argument("welfare_cap: t must be positive");
    if (obj == Objective::consumers) return static_cast<double>(t);
    Grids g = make_grids(d, grid, obj);
    return welfare_caps_all(g, t)[t];
}

double upper_bound(const Dist& d, int n, GridSpec grid, Objective obj) {
    check_n(n);
    if (n == 1) {
        // a single agent must cover the whole cost
        Grids g = make_grids(d, grid, obj);
        return obj == Objective::consumers ? g.rel[g.H] : g.rel[g.H] * g.w[g.H];
    }
    Grids g = make_grids(d, grid, obj);
    const int H = g.H;
    const std::size_t mcount = H + 1;

    std::vector<double> caps(n + 1);
    if (obj == Objective::consumers)
        for (int t = 0; t <= n; ++t) caps[t] = static_cast<double>(t);
    else
        caps = welfare_caps_all(g, n);

    // U[t][k][mi][li], mi = money index, li = index of the sum of the
    // lower bounds already promised to the k agents not yet offered.
    auto idx = [&](int t, int k, int mi, int li) -> std::size_t {
        return ((static_cast<std::size_t>(t) * (n + 1) + k) * mcount + mi) * mcount + li;
    };
    std::vector<double> U(static_cast<std::size_t>(n + 1) * (n + 1) * mcount * mcount, 0.0);

    // t = 1 stays zero: reliability(1) = 0, so a lone agent never covers 1.
    for (int t = 2; t <= n; ++t) {
        // k = 1: offer the single remaining agent everything still needed.
        for (int mi = 0; mi <= H; ++mi) {
            int rej_li = std::clamp(H - mi, 0, H);
            double rej = U[idx(t - 1, t - 1, H, rej_li)];
            for (int li = 0; li <= H; ++li) {
                double denom = g.rel[li];
                if (denom < kMassFloor) {
                    U[idx(t, 1, mi, li)] = 0.0;
                    continue;
                }
                double r = std::min(g.rel[mi] / denom, 1.0);
                U[idx(t, 1, mi, li)] = r * caps[t] + (1.0 - r) * rej;
            }
        }
        // k = 2..t: pick the offered agent's lower bound l* and offer c*,
        // recurse on acceptance, restart with t-1 agents on rejection.
        for (int k = 2; k <= t; ++k) {
            const double* rej_row = &U[idx(t - 1, t - 1, H, 0)];
            for (int ls = 0; ls <= H; ++ls) {
                if (g.rel[ls] < kMassFloor) continue;
                for (int cs = ls; cs <= H; ++cs) {
                    double r = std::min(g.rel[cs] / g.rel[ls], 1.0);
                    for (int mi = cs; mi <= H; ++mi) {
                        const double* acc_row = &U[idx(t, k - 1, mi - cs, 0)];
                        double* out_row = &U[idx(t, k, mi, 0)];
                        int base = H - mi - ls;
                        for (int li = ls; li <= H; ++li) {
                            double rej = rej_row[std::clamp(base + li, 0, H)];
                            double val = r * acc_row[li - ls] + (1.0 - r) * rej;
                            if (val > out_row[li]) out_row[li] = val;
                        }
                    }
                }
            }
        }
    }
    return U[idx(n, n, H, 0)];
}

Outcome run_policy(const OfferPolicy& policy, const std::vector<double>& profile) {
    if (static_cast<int>(profile.size()) != policy.n)
        throw std::invalid_argument("profile size does not match policy");
    const int n = policy.n, H = policy.H;
    const int UH = n * H;
    int u = 0, m = H;
    Outcome out;
    out.payments.assign(n, 0.0);
    std::vector<int> acceptors;
    for (int i = 0; i < n; ++i) {
        int c_idx = policy.offer_index(n - i, u, m);
        double offer = static_cast<double>(c_idx) / H;
        if (profile[i] >= offer) {
            acceptors.push_back(i);
            out.payments[i] = offer;
            u = std::min(u + policy.du[c_idx], UH);
            m -= c_idx;
        }
    }
    if (m != 0) {
        out.payments.assign(n, 0.0);
        return out;
    }
    out.built = true;
    out.consumers = std::move(acceptors);
    return out;
}

std::string policy_to_json(const OfferPolicy& p) {
    nlohmann::ordered_json j;
    j["n"] = p.n;
    j["H"] = p.H;
    j["objective"] = p.objective == Objective::consumers ? "consumers" : "welfare";
    j["du"] = p.du;
    j["offers"] = p.offers;
    return j.dump();
}

OfferPolicy policy_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    OfferPolicy p;
    p.n = j.at("n").get<int>();
    p.H = j.at("H").get<int>();
    std::string obj = j.at("objective").get<std::string>();
    if (obj == "consumers") p.objective = Objective::consumers;
    else if (obj == "welfare") p.objective = Objective::welfare;
    else throw std::invalid_argument("policy json: unknown objective " + obj);
    p.du = j.at("du").get<std::vector<std::int32_t>>();
    p.offers = j.at("offers").get<std::vector<std::uint16_t>>();
    if (p.n < 1 || p.H < 1) throw std::invalid_argument("policy json: bad dimensions");
    std::size_t expect = static_cast<std::size_t>(p.n) * (p.n * p.H + 1) * (p.H + 1);
    if (p.offers.size() != expect || p.du.size() != static_cast<std::size_t>(p.H + 1))
        throw std::invalid_argument("policy json: table size mismatch");
    return p;
}

void save_policy(const OfferPolicy& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << policy_to_json(p) << '\n';
}

OfferPolicy load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return policy_from_json(buf.str());
}

} // namespace pubshare
