#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace pubshare {

// Shares for an ordered coalition; nonnegative, summing to 1.
struct CostShareVector {
    std::vector<double> shares;
};

// A largest unanimous mechanism: one CostShareVector per nonempty coalition.
// table is indexed by the coalition bitmask (bit i = agent i, 0-based);
// entry order follows ascending agent index within the coalition. n <= 16.
struct Schedule {
    int n = 0;
    std::vector<std::vector<double>> table;
};

struct Outcome {
    bool built = false;
    std::vector<int> consumers;
    std::vector<double> payments;
};

struct FeasibilityViolation {
    std::uint32_t coalition;   // the larger coalition T
    int removed;               // agent dropped to form S = T \ {removed}
    int affected;              // agent whose share decreased
    double before;             // share under T
    double after;              // share under S
};

// Build iff every v_i >= c_i; acceptance at equality. Throws
// std::invalid_argument when shares are negative or do not sum to 1.
Outcome run_unanimous(const CostShareVector& shares, const std::vector<double>& profile);

// Iterative removal from the full coalition, all refusers dropped per round;
// reaches the largest unanimously approved coalition in <= n rounds.
// Validates feasibility first and throws std::invalid_argument on violations.
Outcome run_largest_unanimous(const Schedule& s, const std::vector<double>& profile);

// Same removal process without the feasibility gate (used by Monte Carlo
// loops after one up-front check, and by training on as-yet-infeasible
// networks). `start_mask` restricts the initial coalition.
Outcome run_schedule_unchecked(const Schedule& s, const std::vector<double>& profile,
                               std::uint32_t start_mask);
Outcome run_schedule_unchecked(const Schedule& s, const std::vector<double>& profile);

Schedule scs_schedule(int n);
CostShareVector cec_shares(int n);

// Offers `offer` to agents in identity order; refusers are removed, the
// first acceptor pays the full cost 1 and everyone from her on consumes.
// The smoothed Bernoulli example lowers the acceptance threshold below 1.
Outcome run_sequential_unit_offer(const std::vector<double>& profile, double offer = 1.0);

// Structural validation: completeness, entry lengths, sums to 1, n <= 16.
void validate_schedule(const Schedule& s);

// Monotonicity: dropping one agent must not lower anyone's share.
std::vector<FeasibilityViolation> feasibility_check(const Schedule& s);

// Max utility gain over the deviation reports, others truthful; <= 1e-9 for
// any feasible schedule. Caller guarantees feasibility.
double strategyproofness_probe(const Schedule& s, const std::vector<double>& profile,
                               int agent, const std::vector<double>& deviations);

// JSON object mapping coalition bitmask (decimal string) to the share array.
std::string schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const std::string& text);
void save_schedule(const Schedule& s, const std::string& path);
Schedule load_schedule(const std::string& path);

} // namespace pubshare
