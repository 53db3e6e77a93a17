#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "pubshare/dist.hpp"
#include "pubshare/mechanisms.hpp"
#include "pubshare/solvers.hpp"

namespace pubshare {

// Fully connected n -> 100 -> 100 -> 100 -> 100 -> n network with ReLU
// hidden units, stored as one flat parameter vector (weights row-major,
// then biases, layer by layer).
struct NetworkParams {
    static constexpr int hidden = 100;
    static constexpr int depth = 4;
    int n = 0;
    std::vector<double> theta;

    std::size_t param_count() const { return theta.size(); }
};

NetworkParams xavier_init(int n, std::uint64_t seed);   // bias 0.1

enum class InitKind { random, supervise_scs, supervise_dp, supervise_myopic };
enum class CostKind { porf, sigmoid };

struct TrainConfig {
    int rounds = 200;
    int batches_per_round = 5;
    int batch_size = 128;
    double step_size = 1e-3;
    double penalty_weight = 1000.0;
    double mask_constant = 1000.0;
    std::uint64_t seed = 1;
    Objective objective = Objective::consumers;
    InitKind init = InitKind::supervise_scs;
    CostKind cost = CostKind::porf;
    long long eval_samples = 10000;
    int supervise_iter_cap = 20000;
};

// OUT(b) = softmax(NN(b) - mask_constant * (1 - b)) + (1 - b): a share
// vector over the set bits, ones elsewhere. Throws on an empty coalition.
std::vector<double> forward(const NetworkParams& p, std::uint32_t coalition_mask,
                            double mask_constant = 1000.0);

// Sum of ReLU(OUT(b) - OUT(b'))_r over all pairs where b' clears exactly
// one set bit of b, all coordinates. Zero iff the induced schedule is
// monotone on those pairs.
double monotonicity_penalty(const NetworkParams& p, int n, double mask_constant = 1000.0);

// One PORF batch element: the singled-out agent and everyone else's values.
struct BatchElement {
    int agent = 0;
    std::vector<double> others;   // n-1 values, identity order with agent skipped
};

// Off-network simulation constants for one element: the coalition whose
// offer the agent faces, and the objective under her two options.
struct PorfConstants {
    std::uint32_t offer_coalition = 0;   // O_b, bit `agent` set
    double objective_if_consuming = 0;   // O_s (welfare: others' part only)
    double objective_if_not = 0;         // O_f
};

PorfConstants simulate_porf(const NetworkParams& p, const Dist& d, const BatchElement& e,
                            Objective obj, double mask_constant = 1000.0);

struct CostReport {
    double cost = 0;            // batch mean objective cost + weighted penalty
    double penalty = 0;         // unweighted monotonicity penalty
    std::vector<double> grad;   // d cost / d theta
};

// Eq-style expected objective (1-F(offer)) O_s + F(offer) O_f per element;
// cost is n - E[objective] for consumers, -E[welfare] for welfare, plus
// penalty_weight * monotonicity_penalty. Only the offer carries gradient.
CostReport porf_cost(const NetworkParams& p, const Dist& d,
                     const std::vector<BatchElement>& batch, Objective obj,
                     double penalty_weight, double mask_constant = 1000.0);

// Same mixture with sigmoid(v_i - offer) weights instead of the CDF;
// batch elements are full profiles with the singled-out agent per sample.
struct SigmoidBatchElement {
    int agent = 0;
    std::vector<double> profile;   // n values
};
CostReport sigmoid_cost(const NetworkParams& p, const Dist& d,
                        const std::vector<SigmoidBatchElement>& batch, Objective obj,
                        double penalty_weight, double mask_constant = 1000.0);

struct SuperviseResult {
    NetworkParams params;
    bool converged = false;
    double loss = 0;
    int iterations = 0;
};

// Fits OUT to the target schedule (unset bits padded with 1) by minimizing the
// mean over coalitions of the squared output distance. Stops once loss < 1e-4
// and every coordinate is within 0.01 of its target, or at the iteration cap;
// non-convergence returns a warning flag.
SuperviseResult supervise(const NetworkParams& p, const Schedule& target, const TrainConfig& config);

struct TrainHistoryEntry {
    int round = 0;
    double estimate = 0;   // expected nonconsumers, or welfare
    double stderr_ = 0;
    double penalty = 0;
};

struct TrainResult {
    NetworkParams params;      // best round by the history estimate
    std::vector<TrainHistoryEntry> history;
};

// Adam-style gradient descent on the selected cost; each round runs
// batches_per_round batches of batch_size samples, then records a
// fixed-seed Monte Carlo estimate. Deterministic given config.seed.
// Throws std::runtime_error if the cost turns non-finite.
TrainResult train(const NetworkParams& p, const Dist& d, const TrainConfig& config);

// forward on every nonempty coalition; member shares renormalized to 1.
Schedule network_to_schedule(const NetworkParams& p, int n, double mask_constant = 1000.0);

// Max relative error between analytic gradients and central finite
// differences on >= 50 random parameters, with the simulation constants
// frozen at the base point (they carry no gradient by construction).
double gradient_check(const NetworkParams& p, const Dist& d, CostKind cost,
                      Objective obj, double penalty_weight, double epsilon,
                      std::uint64_t seed, int probes = 64);

std::string params_to_json(const NetworkParams& p);
NetworkParams params_from_json(const std::string& text);
void save_params(const NetworkParams& p, const std::string& path);
NetworkParams load_params(const std::string& path);

} // namespace pubshare
