#include "pubshare/mechanisms.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pubshare {
namespace {

constexpr double kSumTol = 1e-9;
constexpr double kFeasTol = 1e-9;

void check_shares(const std::vector<double>& shares) {
    double sum = 0.0;
    for (double s : shares) {
        if (!(s >= 0.0)) throw std::invalid_argument("cost shares must be nonnegative");
        sum += s;
    }
    if (std::abs(sum - 1.0) > kSumTol)
        throw std::invalid_argument("cost shares must sum to 1");
}

std::vector<int> mask_members(std::uint32_t mask) {
    std::vector<int> out;
    for (int i = 0; mask >> i; ++i)
        if (mask >> i & 1u) out.push_back(i);
    return out;
}

} // namespace

Outcome run_unanimous(const CostShareVector& shares, const std::vector<double>& profile) {
    if (shares.shares.size() != profile.size())
        throw std::invalid_argument("share vector and profile sizes differ");
    check_shares(shares.shares);
    Outcome out;
    for (std::size_t i = 0; i < profile.size(); ++i)
        if (profile[i] < shares.shares[i]) return out;
    out.built = true;
    out.payments = shares.shares;
    for (std::size_t i = 0; i < profile.size(); ++i) out.consumers.push_back(static_cast<int>(i));
    return out;
}

Outcome run_schedule_unchecked(const Schedule& s, const std::vector<double>& profile,
                               std::uint32_t start_mask) {
    if (static_cast<int>(profile.size()) != s.n)
        throw std::invalid_argument("profile size does not match schedule");
    std::uint32_t mask = start_mask;
    while (mask) {
        const std::vector<double>& shares = s.table[mask];
        std::uint32_t next = mask;
        int pos = 0;
        for (int i = 0; i < s.n; ++i) {
            if (!(mask >> i & 1u)) continue;
            if (profile[i] < shares[pos]) next &= ~(1u << i);
            ++pos;
        }
        if (next == mask) break;
        mask = next;
    }
    Outcome out;
    if (!mask) return out;
    out.built = true;
    out.payments.assign(s.n, 0.0);
    const std::vector<double>& shares = s.table[mask];
    int pos = 0;
    for (int i = 0; i < s.n; ++i) {
        if (!(mask >> i & 1u)) continue;
        out.consumers.push_back(i);
        out.payments[i] = shares[pos++];
    }
    return out;
}

Outcome run_schedule_unchecked(const Schedule& s, const std::vector<double>& profile) {
    return run_schedule_unchecked(s, profile, (1u << s.n) - 1u);
}

Outcome run_largest_unanimous(const Schedule& s, const std::vector<double>& profile) {
    validate_schedule(s);
    auto violations = feasibility_check(s);
    if (!violations.empty()) {
        const auto& v = violations.front();
        std::ostringstream msg;
        msg << "schedule is infeasible: dropping agent " << v.removed << " from coalition "
            << v.coalition << " lowers agent " << v.affected << "'s share from " << v.before
            << " to " << v.after << " (" << violations.size() << " violations total)";
        throw std::invalid_argument(msg.str());
    }
    return run_schedule_unchecked(s, profile);
}

Schedule scs_schedule(int n) {
    if (n < 1 || n > 16) throw std::invalid_argument("scs_schedule: n must be in [1,16]");
    Schedule s;
    s.n = n;
    s.table.resize(1u << n);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        int k = std::popcount(mask);
        s.table[mask].assign(k, 1.0 / k);
    }
    return s;
}

CostShareVector cec_shares(int n) {
    if (n < 1) throw std::invalid_argument("cec_shares: n must be positive");
    return {std::vector<double>(n, 1.0 / n)};
}

Outcome run_sequential_unit_offer(const std::vector<double>& profile, double offer) {
    Outcome out;
    int n = static_cast<int>(profile.size());
    for (int i = 0; i < n; ++i) {
        if (profile[i] >= offer) {
            out.built = true;
            out.payments.assign(n, 0.0);
            out.payments[i] = 1.0;
            for (int j = i; j < n; ++j) out.consumers.push_back(j);
            return out;
        }
    }
    return out;
}

void validate_schedule(const Schedule& s) {
    if (s.n < 1 || s.n > 16) throw std::invalid_argument("schedule: n must be in [1,16]");
    if (s.table.size() != (1u << s.n))
        throw std::invalid_argument("schedule: table must have an entry per coalition bitmask");
    for (std::uint32_t mask = 1; mask < (1u << s.n); ++mask) {
        const auto& shares = s.table[mask];
        if (static_cast<int>(shares.size()) != std::popcount(mask))
            throw std::invalid_argument("schedule: entry length must equal coalition size (mask " +
                                        std::to_string(mask) + ")");
        double sum = 0.0;
        for (double c : shares) {
            if (!(c >= 0.0))
                throw std::invalid_argument("schedule: negative share at mask " + std::to_string(mask));
            sum += c;
        }
        if (std::abs(sum - 1.0) > kSumTol)
            throw std::invalid_argument("schedule: shares at mask " + std::to_string(mask) +
                                        " sum to " + std::to_string(sum));
    }
}

std::vector<FeasibilityViolation> feasibility_check(const Schedule& s) {
    std::vector<FeasibilityViolation> out;
    for (std::uint32_t mask = 1; mask < (1u << s.n); ++mask) {
        if (std::popcount(mask) < 2) continue;
        const auto& big = s.table[mask];
        auto members = mask_members(mask);
        for (int r : members) {
            std::uint32_t sub = mask & ~(1u << r);
            const auto& small = s.table[sub];
            int big_pos = 0, small_pos = 0;
            for (int i : members) {
                if (i == r) { ++big_pos; continue; }
                if (small[small_pos] < big[big_pos] - kFeasTol)
                    out.push_back({mask, r, i, big[big_pos], small[small_pos]});
                ++big_pos;
                ++small_pos;
            }
        }
    }
    return out;
}

double strategyproofness_probe(const Schedule& s, const std::vector<double>& profile,
                               int agent, const std::vector<double>& deviations) {
    if (agent < 0 || agent >= s.n) throw std::invalid_argument("probe: agent out of range");
    auto utility = [&](const Outcome& out) {
        if (!out.built) return 0.0;
        for (int i : out.consumers)
            if (i == agent) return profile[agent] - out.payments[agent];
        return 0.0;
    };
    double truthful = utility(run_schedule_unchecked(s, profile));
    double best_gain = deviations.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
    std::vector<double> reported = profile;
    for (double dev : deviations) {
        reported[agent] = dev;
        best_gain = std::max(best_gain, utility(run_schedule_unchecked(s, reported)) - truthful);
    }
    return best_gain;
}

std::string schedule_to_json(const Schedule& s) {
    nlohmann::ordered_json j;
    j["n"] = s.n;
    nlohmann::ordered_json table = nlohmann::ordered_json::object();
    for (std::uint32_t mask = 1; mask < (1u << s.n); ++mask)
        table[std::to_string(mask)] = s.table[mask];
    j["table"] = std::move(table);
    return j.dump(2);
}

Schedule schedule_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Schedule s;
    s.n = j.at("n").get<int>();
    if (s.n < 1 || s.n > 16) throw std::invalid_argument("schedule json: n must be in [1,16]");
    s.table.assign(1u << s.n, {});
    for (const auto& [key, value] : j.at("table").items()) {
        std::uint32_t mask = static_cast<std::uint32_t>(std::stoul(key));
        if (mask == 0 || mask >= (1u << s.n))
            throw std::invalid_argument("schedule json: mask out of range: " + key);
        s.table[mask] = value.get<std::vector<double>>();
    }
    validate_schedule(s);
    return s;
}

void save_schedule(const Schedule& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << schedule_to_json(s) << '\n';
}

Schedule load_schedule(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return schedule_from_json(buf.str());
}

} // namespace pubshare
