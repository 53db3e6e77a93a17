#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "pubshare/dist.hpp"
#include "pubshare/mechanisms.hpp"
#include "pubshare/rng.hpp"

using namespace pubshare;

namespace {

// max{k : #{i : v_i >= 1/k} >= k}, the closed characterization of the
// serial cost sharing consumer count.
int k_star(const std::vector<double>& profile) {
    int n = static_cast<int>(profile.size());
    for (int k = n; k >= 1; --k) {
        int count = 0;
        for (double v : profile)
            if (v >= 1.0 / k) ++count;
        if (count >= k) return k;
    }
    return 0;
}

void check_outcome_invariants(const Outcome& out, const std::vector<double>& profile) {
    if (!out.built) {
        CHECK(out.consumers.empty());
        for (double p : out.payments) CHECK(p == 0.0);
        return;
    }
    double total = 0;
    std::vector<bool> consumer(profile.size(), false);
    for (int i : out.consumers) consumer[i] = true;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        total += out.payments[i];
        if (consumer[i]) {
            CHECK(profile[i] - out.payments[i] >= -1e-12);   // individual rationality
        } else {
            CHECK(out.payments[i] == 0.0);
        }
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));       // budget balance
}

} // namespace

TEST_SUITE("mechanisms") {

TEST_CASE("unanimous mechanism builds exactly on unanimous acceptance") {
    CostShareVector shares{{0.5, 0.3, 0.2}};
    Outcome yes = run_unanimous(shares, {0.5, 0.3, 0.2});   // acceptance at equality
    CHECK(yes.built);
    CHECK(yes.consumers == std::vector<int>{0, 1, 2});
    CHECK(yes.payments == std::vector<double>{0.5, 0.3, 0.2});
    check_outcome_invariants(yes, {0.5, 0.3, 0.2});

    Outcome no = run_unanimous(shares, {0.5, 0.299, 0.9});
    CHECK_FALSE(no.built);
    check_outcome_invariants(no, {0.5, 0.299, 0.9});

    CHECK_THROWS_AS(run_unanimous(CostShareVector{{0.6, 0.6}}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(run_unanimous(CostShareVector{{1.2, -0.2}}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(run_unanimous(shares, {0.5, 0.3}), std::invalid_argument);
}

TEST_CASE("equal and serial share constructions") {
    CostShareVector cec = cec_shares(4);
    for (double s : cec.shares) CHECK(s == doctest::Approx(0.25).epsilon(1e-15));

    for (int n = 2; n <= 8; ++n) {
        Schedule s = scs_schedule(n);
        CHECK(s.n == n);
        validate_schedule(s);
        CHECK(feasibility_check(s).empty());
        for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
            int k = __builtin_popcount(mask);
            for (double share : s.table[mask])
                CHECK(share == doctest::Approx(1.0 / k).epsilon(1e-15));
        }
    }
    CHECK_THROWS_AS(scs_schedule(0), std::invalid_argument);
    CHECK_THROWS_AS(scs_schedule(17), std::invalid_argument);
}

TEST_CASE("serial cost sharing matches the closed characterization exhaustively") {
    Schedule s = scs_schedule(3);
    std::vector<double> profile(3);
    for (int a = 0; a <= 10; ++a)
        for (int b = 0; b <= 10; ++b)
            for (int c = 0; c <= 10; ++c) {
                profile = {a / 10.0, b / 10.0, c / 10.0};
                Outcome out = run_largest_unanimous(s, profile);
                int k = k_star(profile);
                CHECK(static_cast<int>(out.consumers.size()) == k);
                CHECK(out.built == (k > 0));
                for (int i : out.consumers) {
                    CHECK(profile[i] >= 1.0 / k);
                    CHECK(out.payments[i] == doctest::Approx(1.0 / k).epsilon(1e-12));
                }
                check_outcome_invariants(out, profile);
            }
}

TEST_CASE("serial cost sharing matches the closed characterization on random profiles") {
    const int n = 10;
    Schedule s = scs_schedule(n);
    Dist d = parse_dist("uniform");
    Rng rng(2026, 0);
    std::vector<double> profile(n);
    for (int t = 0; t < 10000; ++t) {
        for (double& v : profile) v = rng.uniform01();
        Outcome out = run_schedule_unchecked(s, profile);
        CHECK(static_cast<int>(out.consumers.size()) == k_star(profile));
    }
}

TEST_CASE("removal reaches a fixed point") {
    Schedule s = scs_schedule(6);
    Rng rng(5, 0);
    std::vector<double> profile(6);
    for (int t = 0; t < 200; ++t) {
        for (double& v : profile) v = rng.uniform01();
        Outcome out = run_schedule_unchecked(s, profile);
        if (!out.built) continue;
        std::uint32_t mask = 0;
        for (int i : out.consumers) mask |= 1u << i;
        Outcome again = run_schedule_unchecked(s, profile, mask);
        CHECK(again.built);
        CHECK(again.consumers == out.consumers);
        CHECK(again.payments == out.payments);
    }
}

TEST_CASE("feasibility check pinpoints share drops") {
    Schedule s = scs_schedule(3);
    // Dropping agent 2 (bit 2) from the full coalition lowers agent 0's
    // share from 0.4 to 0.3: a feasibility violation.
    s.table[0b111] = {0.4, 0.3, 0.3};
    s.table[0b011] = {0.3, 0.7};
    validate_schedule(s);
    auto viol = feasibility_check(s);
    REQUIRE(!viol.empty());
    bool found = false;
    for (const auto& v : viol) {
        if (v.coalition == 0b111 && v.removed == 2 && v.affected == 0) {
            CHECK(v.before == doctest::Approx(0.4));
            CHECK(v.after == doctest::Approx(0.3));
            found = true;
        }
    }
    CHECK(found);
    CHECK_THROWS_AS(run_largest_unanimous(s, {0.9, 0.9, 0.9}), std::invalid_argument);
    // the unchecked runner still executes it
    Outcome out = run_schedule_unchecked(s, {0.9, 0.9, 0.9});
    CHECK(out.built);
}

TEST_CASE("structural validation rejects malformed schedules") {
    Schedule s = scs_schedule(2);
    s.table[0b11] = {0.6, 0.6};
    CHECK_THROWS_AS(validate_schedule(s), std::invalid_argument);
    s = scs_schedule(2);
    s.table[0b01] = {0.5, 0.5};
    CHECK_THROWS_AS(validate_schedule(s), std::invalid_argument);
    s = scs_schedule(2);
    s.table[0b11] = {1.2, -0.2};
    CHECK_THROWS_AS(validate_schedule(s), std::invalid_argument);
}

TEST_CASE("strategyproofness probe on the serial mechanism") {
    Schedule s3 = scs_schedule(3);
    std::vector<double> grid(101);
    for (int i = 0; i <= 100; ++i) grid[i] = i / 100.0;

    CHECK(strategyproofness_probe(s3, {0.6, 0.6, 0.1}, 2, grid) <= 0.0);
    CHECK(strategyproofness_probe(s3, {0.6, 0.6, 0.1}, 2, {0.1}) == 0.0);

    Schedule s2 = scs_schedule(2);
    // opting out forfeits positive utility
    CHECK(strategyproofness_probe(s2, {0.9, 0.9}, 0, {0.0}) == doctest::Approx(-0.4));

    Schedule s5 = scs_schedule(5);
    Rng rng(77, 0);
    std::vector<double> profile(5);
    double worst = -1;
    for (int t = 0; t < 200; ++t) {
        for (double& v : profile) v = rng.uniform01();
        int agent = static_cast<int>(rng.next() % 5);
        worst = std::max(worst, strategyproofness_probe(s5, profile, agent, grid));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("sequential unit offer charges the first acceptor") {
    Outcome out = run_sequential_unit_offer({0.3, 1.0, 0.2, 1.0});
    CHECK(out.built);
    CHECK(out.consumers == std::vector<int>{1, 2, 3});
    CHECK(out.payments == std::vector<double>{0.0, 1.0, 0.0, 0.0});

    Outcome none = run_sequential_unit_offer({0.3, 0.99, 0.2});
    CHECK_FALSE(none.built);

    // lowered offer: acceptance threshold drops but the payment stays 1
    Outcome low = run_sequential_unit_offer({0.5, 0.95, 0.1}, 0.94);
    CHECK(low.built);
    CHECK(low.consumers == std::vector<int>{1, 2});
    CHECK(low.payments[1] == 1.0);
}

TEST_CASE("schedule json round-trips") {
    Schedule s = scs_schedule(4);
    Schedule back = schedule_from_json(schedule_to_json(s));
    CHECK(back.n == 4);
    CHECK(back.table == s.table);

    std::string path = std::string("/tmp/pubshare_test_schedule.json");
    save_schedule(s, path);
    Schedule loaded = load_schedule(path);
    CHECK(loaded.table == s.table);
    std::remove(path.c_str());

    CHECK_THROWS(schedule_from_json("{\"n\": 2}"));
    CHECK_THROWS(schedule_from_json("not json"));
    CHECK_THROWS(schedule_from_json(
        "{\"n\": 2, \"table\": {\"1\": [1], \"2\": [1], \"3\": [0.6, 0.6]}}"));
    CHECK_THROWS(schedule_from_json(
        "{\"n\": 2, \"table\": {\"1\": [1], \"2\": [1], \"3\": [0.5, 0.5], \"4\": [1]}}"));
}

}
