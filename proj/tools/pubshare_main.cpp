#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pubshare/dist.hpp"
#include "pubshare/eval.hpp"
#include "pubshare/mechanisms.hpp"
#include "pubshare/neural.hpp"
#include "pubshare/solvers.hpp"

namespace {

using namespace pubshare;

std::string fmt(double x) {
    std::ostringstream o;
    o << std::setprecision(12) << x;
    return o.str();
}

// Distribution specs carry commas, so CSV fields holding them get quoted.
std::string csv(const std::string& field) {
    if (field.find_first_of(",\"") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char ch : field) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    quoted += '"';
    return quoted;
}

Objective parse_objective(const std::string& s) {
    if (s == "consumers") return Objective::consumers;
    if (s == "welfare") return Objective::welfare;
    throw CLI::ValidationError("--objective", "must be 'consumers' or 'welfare'");
}

std::string objective_name(Objective obj) {
    return obj == Objective::consumers ? "consumers" : "welfare";
}

// Stream the artifact to --out or stdout.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot open for writing: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void schema_header(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& kv) {
    out << "# schema=pubshare.v1";
    for (const auto& [k, v] : kv) out << ' ' << k << '=' << v;
    out << '\n';
}

// The smoothed coin flip keeps its acceptance threshold three sigmas under
// the upper peak; every other prior faces the full unit offer.
double sequential_offer_for(const Dist& d) {
    if (d.kind == DistKind::two_peak && d.params[0] == 0.0 && d.params[2] == 1.0 &&
        d.params[1] == d.params[3])
        return 1.0 - 3.0 * d.params[1];
    return 1.0;
}

int run_eval(const std::string& mech, const std::string& dist_spec, int n, Objective obj,
             long long samples, std::uint64_t seed, bool exact, bool unchecked, double offer_flag,
             const std::string& out_path) {
    Dist d = parse_dist(dist_spec);
    Output out(out_path);

    std::string method = exact ? "exact" : "mc";
    Estimate est;
    double exact_value = 0.0;

    if (mech == "scs") {
        if (exact) {
            if (obj != Objective::consumers)
                throw std::runtime_error("exact evaluation of scs covers the consumers objective only");
            exact_value = exact_scs_consumers(d, n);
        } else {
            est = mc_estimate_schedule(scs_schedule(n), d, samples, seed, obj);
        }
    } else if (mech == "cec") {
        CostShareVector shares = cec_shares(n);
        if (exact) exact_value = exact_unanimous_value(shares, d, obj);
        else est = mc_estimate_unanimous(shares, d, samples, seed, obj);
    } else if (mech == "seq") {
        if (exact) throw std::runtime_error("the sequential offer has no exact evaluator");
        double offer = offer_flag >= 0.0 ? offer_flag : sequential_offer_for(d);
        est = mc_estimate_sequential(d, offer, n, samples, seed, obj);
    } else if (mech.rfind("schedule:", 0) == 0) {
        Schedule s = load_schedule(mech.substr(9));
        n = s.n;
        if (exact) throw std::runtime_error("general schedules have no exact evaluator");
        if (!unchecked) {
            auto violations = feasibility_check(s);
            if (!violations.empty())
                throw std::runtime_error("schedule fails the feasibility check ("
                                         + std::to_string(violations.size())
                                         + " violations); pass --unchecked to evaluate anyway");
        }
        est = unchecked ? mc_estimate_schedule_unchecked(s, d, samples, seed, obj)
                        : mc_estimate_schedule(s, d, samples, seed, obj);
    } else if (mech.rfind("network:", 0) == 0) {
        NetworkParams p = load_params(mech.substr(8));
        n = p.n;
        if (exact) throw std::runtime_error("networks have no exact evaluator");
        est = mc_estimate_schedule_unchecked(network_to_schedule(p, p.n), d, samples, seed, obj);
    } else if (mech.rfind("policy:", 0) == 0) {
        OfferPolicy policy = load_policy(mech.substr(7));
        n = policy.n;
        if (exact) throw std::runtime_error("offer policies have no exact evaluator");
        est = mc_estimate_policy(policy, d, samples, seed, obj);
    } else {
        throw CLI::ValidationError(
            "--mech", "must be scs, cec, seq, schedule:PATH, network:PATH, or policy:PATH");
    }

    if (exact) schema_header(out.stream(), {});
    else schema_header(out.stream(), {{"seed", std::to_string(seed)},
                                      {"samples", std::to_string(samples)}});
    out.stream() << "mechanism,distribution,n,objective,method,mean,stderr,samples\n";
    if (exact)
        out.stream() << mech << ',' << csv(d.spec()) << ',' << n << ',' << objective_name(obj) << ','
                     << method << ',' << fmt(exact_value) << ",0,0\n";
    else
        out.stream() << mech << ',' << csv(d.spec()) << ',' << n << ',' << objective_name(obj) << ','
                     << method << ',' << fmt(est.mean) << ',' << fmt(est.stderr_) << ','
                     << est.samples << '\n';
    return 0;
}

int run_solve(const std::string& family, const std::string& dist_spec, int n, Objective obj,
              int H, const std::string& out_path) {
    Dist d = parse_dist(dist_spec);
    GridSpec grid{H};
    Output out(out_path);
    if (family == "unanimous") {
        UnanimousSolution sol = solve_optimal_unanimous(d, n, grid, obj);
        out.stream() << "{\"mechanism\":\"unanimous\",\"distribution\":\"" << d.spec()
                     << "\",\"n\":" << n << ",\"H\":" << H << ",\"objective\":\""
                     << objective_name(obj) << "\",\"value\":" << fmt(sol.value) << ",\"shares\":[";
        for (std::size_t i = 0; i < sol.shares.shares.size(); ++i)
            out.stream() << (i ? "," : "") << fmt(sol.shares.shares[i]);
        out.stream() << "]}\n";
    } else if (family == "onedir") {
        OneDirectionalSolution sol = solve_one_directional(d, n, grid, obj);
        // flat-merged so the file also loads as a plain policy
        std::string policy = policy_to_json(sol.policy);
        policy.back() = ',';   // replace closing brace
        out.stream() << policy << "\"mechanism\":\"one-directional\",\"distribution\":\""
                     << d.spec() << "\",\"value\":" << fmt(sol.value) << "}\n";
    } else if (family == "myopic") {
        Schedule s = myopic_schedule(d, n, grid, obj);
        std::size_t violations = feasibility_check(s).size();
        std::string sched = schedule_to_json(s);
        sched.pop_back();   // closing brace
        out.stream() << sched << ",\n  \"mechanism\": \"myopic\",\n  \"distribution\": \""
                     << d.spec() << "\",\n  \"H\": " << H << ",\n  \"feasibility_violations\": "
                     << violations << "\n}\n";
        std::cerr << "myopic schedule has " << violations << " feasibility violations\n";
    } else {
        throw CLI::ValidationError("family", "must be unanimous, onedir, or myopic");
    }
    return 0;
}

int run_bound(const std::string& dist_spec, int n, Objective obj, int H,
              const std::string& out_path) {
    Dist d = parse_dist(dist_spec);
    double value = upper_bound(d, n, GridSpec{H}, obj);
    Output out(out_path);
    schema_header(out.stream(), {{"H", std::to_string(H)}});
    out.stream() << "distribution,n,objective,H,value\n";
    out.stream() << csv(d.spec()) << ',' << n << ',' << objective_name(obj) << ',' << H << ','
                 << fmt(value) << '\n';
    return 0;
}

int run_train(const std::string& dist_spec, int n, Objective obj, const std::string& cost,
              const std::string& init, int rounds, std::uint64_t seed, double step,
              int batch_size, int batches, double penalty_weight, long long eval_samples,
              const std::string& prefix) {
    Dist d = parse_dist(dist_spec);
    TrainConfig config;
    config.rounds = rounds;
    config.seed = seed;
    config.objective = obj;
    config.step_size = step;
    config.batch_size = batch_size;
    config.batches_per_round = batches;
    config.penalty_weight = penalty_weight;
    config.eval_samples = eval_samples;
    if (cost == "porf") config.cost = CostKind::porf;
    else if (cost == "sigmoid") config.cost = CostKind::sigmoid;
    else throw CLI::ValidationError("--cost", "must be porf or sigmoid");
    if (init == "random") config.init = InitKind::random;
    else if (init == "scs") config.init = InitKind::supervise_scs;
    else if (init == "dp") config.init = InitKind::supervise_dp;
    else if (init == "myopic") config.init = InitKind::supervise_myopic;
    else throw CLI::ValidationError("--init", "must be random, scs, dp, or myopic");

    NetworkParams p = xavier_init(n, seed);
    TrainResult result = train(p, d, config);

    save_params(result.params, prefix + ".params.json");
    save_schedule(network_to_schedule(result.params, n, config.mask_constant),
                  prefix + ".schedule.json");
    std::ofstream hist(prefix + ".history.csv");
    if (!hist) throw std::runtime_error("cannot open for writing: " + prefix + ".history.csv");
    schema_header(hist, {{"seed", std::to_string(seed)},
                         {"samples", std::to_string(eval_samples)}});
    hist << "round,estimate,stderr,penalty\n";
    for (const auto& e : result.history)
        hist << e.round << ',' << fmt(e.estimate) << ',' << fmt(e.stderr_) << ','
             << fmt(e.penalty) << '\n';

    const char* label = obj == Objective::consumers ? "nonconsumers" : "welfare";
    TrainHistoryEntry best = result.history.front();
    for (const auto& e : result.history)
        if (obj == Objective::consumers ? e.estimate < best.estimate : e.estimate > best.estimate)
            best = e;
    std::cout << "baseline " << label << ' ' << fmt(result.history.front().estimate)
              << ", best " << fmt(best.estimate) << " at round " << best.round << ", penalty "
              << fmt(best.penalty) << '\n';
    return 0;
}

// Emits "value,reference,abs_diff" for one cell of a reproduction table.
void repro_cell(std::ostream& out, double value, double reference) {
    out << fmt(value) << ',' << fmt(reference) << ',' << fmt(std::abs(value - reference));
}

int run_reproduce(const std::string& table, int H, long long samples, std::uint64_t seed,
                  const std::string& out_path) {
    Output out(out_path);
    std::ostream& os = out.stream();
    schema_header(os, {{"seed", std::to_string(seed)},
                       {"H", std::to_string(H)},
                       {"samples", std::to_string(samples)}});
    if (table == "cec-dp-twopeak") {
        Dist d = parse_dist("twopeak:0.1,0.1,0.9,0.1,0.5");
        // [n index][mechanism: cec, dp][objective]
        const double refs[2][2][2] = {
            {{0.376, 0.200}, {0.766, 0.306}},
            {{0.373, 0.199}, {1.426, 0.591}},
        };
        os << "mechanism,distribution,n,method,"
              "consumers,consumers_reference,consumers_diff,"
              "welfare,welfare_reference,welfare_diff\n";
        int ns[2] = {3, 5};
        for (int ni = 0; ni < 2; ++ni) {
            int n = ns[ni];
            os << "cec," << csv(d.spec()) << ',' << n << ",exact,";
            repro_cell(os, exact_unanimous_value(cec_shares(n), d, Objective::consumers),
                       refs[ni][0][0]);
            os << ',';
            repro_cell(os, exact_unanimous_value(cec_shares(n), d, Objective::welfare),
                       refs[ni][0][1]);
            os << '\n';
            os << "optimal-unanimous," << csv(d.spec()) << ',' << n << ",dp,";
            repro_cell(os, solve_optimal_unanimous(d, n, GridSpec{H}, Objective::consumers).value,
                       refs[ni][1][0]);
            os << ',';
            repro_cell(os, solve_optimal_unanimous(d, n, GridSpec{H}, Objective::welfare).value,
                       refs[ni][1][1]);
            os << '\n';
        }
    } else if (table == "scs-vs-bound") {
        struct Cell { const char* dist; int n; double refs[4]; };
        // refs: scs consumers, bound consumers, scs welfare, bound welfare
        const Cell cells[] = {
            {"uniform", 5, {3.559, 3.753, 1.350, 1.417}},
            {"uniform", 10, {8.915, 8.994, 3.938, 4.037}},
            {"normal:0.5,0.1", 5, {4.988, 4.993, 1.492, 2.017}},
            {"normal:0.5,0.1", 10, {10.00, 10.00, 3.983, 4.545}},
            {"exponential:1", 5, {2.799, 3.038, 0.889, 0.928}},
            {"exponential:1", 10, {8.184, 8.476, 3.081, 3.163}},
            {"logistic:0.5,0.1", 5, {4.744, 4.781, 1.451, 1.910}},
            {"logistic:0.5,0.1", 10, {9.873, 9.886, 3.957, 4.487}},
        };
        os << "distribution,n,objective,scs_method,scs,scs_stderr,scs_reference,scs_diff,"
              "bound,bound_reference,bound_diff\n";
        for (const auto& cell : cells) {
            Dist d = parse_dist(cell.dist);
            for (Objective obj : {Objective::consumers, Objective::welfare}) {
                double scs, err;
                const char* method;
                if (obj == Objective::consumers) {
                    scs = exact_scs_consumers(d, cell.n);
                    err = 0;
                    method = "exact";
                } else {
                    Estimate est = mc_estimate_schedule(scs_schedule(cell.n), d, samples, seed, obj);
                    scs = est.mean;
                    err = est.stderr_;
                    method = "mc";
                }
                int oi = obj == Objective::welfare;
                os << csv(d.spec()) << ',' << cell.n << ',' << objective_name(obj) << ',' << method
                   << ',' << fmt(scs) << ',' << fmt(err) << ',' << fmt(cell.refs[2 * oi]) << ','
                   << fmt(std::abs(scs - cell.refs[2 * oi])) << ',';
                repro_cell(os, upper_bound(d, cell.n, GridSpec{H}, obj), cell.refs[2 * oi + 1]);
                os << '\n';
            }
        }
    } else if (table == "welfare-baselines") {
        Dist d = parse_dist("twopeak:0.2,0.1,0.6,0.1,0.5");
        const int n = 5;
        os << "mechanism,distribution,n,objective,method,value,stderr,reference,abs_diff\n";
        auto row = [&](const char* mech, const char* method, double value, double err,
                       double reference) {
            os << mech << ',' << csv(d.spec()) << ',' << n << ",welfare," << method << ','
               << fmt(value) << ',' << fmt(err) << ',' << fmt(reference) << ','
               << fmt(std::abs(value - reference)) << '\n';
        };
        Estimate scs = mc_estimate_schedule(scs_schedule(n), d, samples, seed, Objective::welfare);
        row("scs", "mc", scs.mean, scs.stderr_, 0.7897);
        OneDirectionalSolution onedir = solve_one_directional(d, n, GridSpec{H}, Objective::welfare);
        row("one-directional", "dp", onedir.value, 0, 0.7517);
        Estimate odmc = mc_estimate_policy(onedir.policy, d, samples, seed, Objective::welfare);
        row("one-directional", "mc", odmc.mean, odmc.stderr_, 0.7517);
        Schedule myopic = myopic_schedule(d, n, GridSpec{H}, Objective::welfare);
        Estimate my = mc_estimate_schedule_unchecked(myopic, d, samples, seed, Objective::welfare);
        row("myopic", "mc", my.mean, my.stderr_, 0.7719);
    } else {
        throw CLI::ValidationError("table",
                                   "must be cec-dp-twopeak, scs-vs-bound, or welfare-baselines");
    }
    return 0;
}

int run_check() {
    int failures = 0;
    auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
        if (!detail.empty()) std::cout << " (" << detail << ')';
        std::cout << '\n';
        if (!ok) ++failures;
    };

    const char* kinds[] = {"uniform", "normal:0.5,0.1", "exponential:1",
                           "logistic:0.5,0.1", "twopeak:0.1,0.1,0.9,0.1,0.5",
                           "kumaraswamy:0.1,0.354"};
    for (const char* spec : kinds) {
        Dist d = parse_dist(spec);
        double total = integrate_density(d, 0.0, 1.0);
        report(std::string("density integrates to 1: ") + spec, std::abs(total - 1.0) < 1e-6,
               "got " + fmt(total));
    }
    {
        Dist u = make_uniform();
        double w_half = conditional_welfare(u, 0.5);
        report("uniform conditional welfare w(0.5) = 0.25", std::abs(w_half - 0.25) < 1e-9,
               "got " + fmt(w_half));
        report("conditional welfare vanishes at 1", conditional_welfare(u, 1.0) == 0.0, "");
    }
    {
        Dist u = make_uniform();
        UnanimousSolution sol = solve_optimal_unanimous(u, 2, GridSpec{50}, Objective::consumers);
        bool ok = std::abs(sol.value - 0.5) < 1e-12 &&
                  std::abs(sol.shares.shares[0] - 0.5) < 1e-12;
        report("optimal unanimous matches the two-agent closed form", ok,
               "value " + fmt(sol.value));
    }
    {
        Dist u = make_uniform();
        double chain = exact_scs_consumers(u, 5);
        Estimate mc = mc_estimate_schedule(scs_schedule(5), u, 200000, 99, Objective::consumers);
        double gap = std::abs(chain - mc.mean);
        report("scs consumers: chain agrees with Monte Carlo (4 sigma)",
               gap <= 4.0 * mc.stderr_, "gap " + fmt(gap) + " vs stderr " + fmt(mc.stderr_));
    }
    {
        double p = std::pow(1.0 - 1.0 / 1000.0, 1000);
        report("equal-split unanimity probability approaches 1/e",
               std::abs(p - std::exp(-1.0)) < 1e-3, fmt(p));
    }
    {
        Dist u = make_uniform();
        Schedule s = scs_schedule(4);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            auto profile = sample(u, 1234 + trial, 4);
            std::vector<double> devs;
            for (int g = 0; g <= 20; ++g) devs.push_back(g / 20.0);
            for (int agent = 0; agent < 4; ++agent)
                worst = std::max(worst, strategyproofness_probe(s, profile, agent, devs));
        }
        report("scs is strategyproof on sampled deviations", worst <= 1e-9,
               "max gain " + fmt(worst));
    }
    std::cout << (failures ? "CHECK FAILED" : "CHECK OK") << '\n';
    return failures ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cost-sharing mechanisms for a binary public project: evaluation, DP solvers, "
                 "bounds, neural schedule training"};
    app.require_subcommand(1);

    std::string dist_spec = "uniform", objective = "consumers", out_path, mech = "scs";
    int n = 5, H = 100;
    long long samples = 1000000;
    std::uint64_t seed = 1;

    auto* eval_cmd = app.add_subcommand("eval", "Monte Carlo or exact evaluation of a mechanism");
    bool exact = false, unchecked = false;
    double offer_flag = -1.0;
    eval_cmd->add_option("--mech", mech,
                         "scs | cec | seq | schedule:PATH | network:PATH | policy:PATH");
    eval_cmd->add_option("--dist", dist_spec, "distribution spec");
    eval_cmd->add_option("--n", n, "number of agents");
    eval_cmd->add_option("--objective", objective, "consumers | welfare");
    eval_cmd->add_option("--samples", samples, "Monte Carlo sample count");
    eval_cmd->add_option("--seed", seed, "Monte Carlo seed");
    eval_cmd->add_flag("--exact", exact, "closed-form evaluation where available");
    eval_cmd->add_flag("--unchecked", unchecked, "skip the feasibility gate for schedule files");
    eval_cmd->add_option("--offer", offer_flag, "override the sequential offer threshold");
    eval_cmd->add_option("--out", out_path, "write the CSV here instead of stdout");

    auto* solve_cmd = app.add_subcommand("solve", "dynamic-programming solvers");
    std::string family;
    solve_cmd->add_option("family", family, "unanimous | onedir | myopic")->required();
    solve_cmd->add_option("--dist", dist_spec, "distribution spec");
    solve_cmd->add_option("--n", n, "number of agents");
    solve_cmd->add_option("--objective", objective, "consumers | welfare");
    solve_cmd->add_option("--H", H, "grid resolution");
    solve_cmd->add_option("--out", out_path, "write the JSON here instead of stdout");

    auto* bound_cmd = app.add_subcommand("bound", "upper bound over largest unanimous mechanisms");
    bound_cmd->add_option("--dist", dist_spec, "distribution spec");
    bound_cmd->add_option("--n", n, "number of agents");
    bound_cmd->add_option("--objective", objective, "consumers | welfare");
    bound_cmd->add_option("--H", H, "grid resolution");
    bound_cmd->add_option("--out", out_path, "write the CSV here instead of stdout");

    auto* train_cmd = app.add_subcommand("train", "gradient descent on a network schedule");
    std::string cost = "porf", init = "scs", prefix = "trained";
    int rounds = 200, batch_size = 128, batches = 5;
    double step = 1e-3, penalty_weight = 1000.0;
    long long eval_samples = 10000;
    train_cmd->add_option("--dist", dist_spec, "distribution spec");
    train_cmd->add_option("--n", n, "number of agents");
    train_cmd->add_option("--objective", objective, "consumers | welfare");
    train_cmd->add_option("--cost", cost, "porf | sigmoid");
    train_cmd->add_option("--init", init, "random | scs | dp | myopic");
    train_cmd->add_option("--rounds", rounds, "training rounds");
    train_cmd->add_option("--seed", seed, "training seed");
    train_cmd->add_option("--step", step, "Adam step size");
    train_cmd->add_option("--batch", batch_size, "samples per batch");
    train_cmd->add_option("--batches", batches, "batches per round");
    train_cmd->add_option("--penalty-weight", penalty_weight, "monotonicity penalty weight");
    train_cmd->add_option("--eval-samples", eval_samples, "per-round evaluation samples");
    train_cmd->add_option("--out", prefix, "output prefix for params/schedule/history files");

    auto* repro_cmd = app.add_subcommand("reproduce", "regenerate a reference table as CSV");
    std::string table;
    repro_cmd->add_option("table", table, "cec-dp-twopeak | scs-vs-bound | welfare-baselines")
        ->required();
    repro_cmd->add_option("--H", H, "grid resolution");
    repro_cmd->add_option("--samples", samples, "Monte Carlo sample count");
    repro_cmd->add_option("--seed", seed, "Monte Carlo seed");
    repro_cmd->add_option("--out", out_path, "write the CSV here instead of stdout");

    auto* check_cmd = app.add_subcommand("check", "fast self-test of the core invariants");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        Objective obj = parse_objective(objective);
        if (eval_cmd->parsed())
            return run_eval(mech, dist_spec, n, obj, samples, seed, exact, unchecked, offer_flag,
                            out_path);
        if (solve_cmd->parsed()) return run_solve(family, dist_spec, n, obj, H, out_path);
        if (bound_cmd->parsed()) return run_bound(dist_spec, n, obj, H, out_path);
        if (train_cmd->parsed())
            return run_train(dist_spec, n, obj, cost, init, rounds, seed, step, batch_size,
                             batches, penalty_weight, eval_samples, prefix);
        if (repro_cmd->parsed()) return run_reproduce(table, H, samples, seed, out_path);
        if (check_cmd->parsed()) return run_check();
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
