#include "pubshare/neural.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

#include "pubshare/eval.hpp"
#include "pubshare/rng.hpp"

namespace pubshare {
namespace {

constexpr int kH = NetworkParams::hidden;

struct Layout {
    int n = 0;
    std::size_t w1, b1, w2, b2, w3, b3, w4, b4, w5, b5, total;
};

Layout make_layout(int n) {
    Layout L;
    L.n = n;
    L.w1 = 0;
    L.b1 = L.w1 + static_cast<std::size_t>(kH) * n;
    L.w2 = L.b1 + kH;
    L.b2 = L.w2 + static_cast<std::size_t>(kH) * kH;
    L.w3 = L.b2 + kH;
    L.b3 = L.w3 + static_cast<std::size_t>(kH) * kH;
    L.w4 = L.b3 + kH;
    L.b4 = L.w4 + static_cast<std::size_t>(kH) * kH;
    L.w5 = L.b4 + kH;
    L.b5 = L.w5 + static_cast<std::size_t>(kH) * n;
    L.total = L.b5 + n;
    return L;
}

void check_params(const NetworkParams& p) {
    if (p.n < 1 || p.n > 16) throw std::invalid_argument("network: n must be in [1,16]");
    if (p.theta.size() != make_layout(p.n).total)
        throw std::invalid_argument("network: parameter vector has the wrong length");
}

struct ForwardCache {
    std::vector<double> x;                    // n mask bits
    std::vector<double> z1, a1, z2, a2, z3, a3, z4, a4;
    std::vector<double> soft;                 // n softmax outputs
    std::vector<double> out;                  // soft + (1 - x)
};

void dense(const double* W, const double* b, const double* in, int in_dim, int out_dim,
           double* z) {
    for (int r = 0; r < out_dim; ++r) {
        double acc = b[r];
        const double* row = W + static_cast<std::size_t>(r) * in_dim;
        for (int c = 0; c < in_dim; ++c) acc += row[c] * in[c];
        z[r] = acc;
    }
}

void relu(const std::vector<double>& z, std::vector<double>& a) {
    a.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > 0 ? z[i] : 0.0;
}

void forward_into(const NetworkParams& p, std::uint32_t mask, double mask_constant,
                  ForwardCache& f) {
    const Layout L = make_layout(p.n);
    const double* th = p.theta.data();
    const int n = p.n;
    if (mask == 0 || mask >= (1u << n))
        throw std::invalid_argument("forward: coalition mask out of range");
    f.x.assign(n, 0.0);
    for (int i = 0; i < n; ++i)
        if (mask >> i & 1u) f.x[i] = 1.0;
    f.z1.resize(kH); f.z2.resize(kH); f.z3.resize(kH); f.z4.resize(kH);
    dense(th + L.w1, th + L.b1, f.x.data(), n, kH, f.z1.data());
    relu(f.z1, f.a1);
    dense(th + L.w2, th + L.b2, f.a1.data(), kH, kH, f.z2.data());
    relu(f.z2, f.a2);
    dense(th + L.w3, th + L.b3, f.a2.data(), kH, kH, f.z3.data());
    relu(f.z3, f.a3);
    dense(th + L.w4, th + L.b4, f.a3.data(), kH, kH, f.z4.data());
    relu(f.z4, f.a4);
    std::vector<double> raw(n);
    dense(th + L.w5, th + L.b5, f.a4.data(), kH, n, raw.data());
    double top = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < n; ++r) {
        raw[r] -= mask_constant * (1.0 - f.x[r]);
        top = std::max(top, raw[r]);
    }
    double z = 0.0;
    f.soft.resize(n);
    for (int r = 0; r < n; ++r) {
        f.soft[r] = std::exp(raw[r] - top);
        z += f.soft[r];
    }
    f.out.resize(n);
    for (int r = 0; r < n; ++r) {
        f.soft[r] /= z;
        f.out[r] = f.soft[r] + (1.0 - f.x[r]);
    }
}

// d(cost)/d(OUT) seeds -> accumulate d(cost)/d(theta) into grad.
void backward_from(const NetworkParams& p, const ForwardCache& f,
                   const std::vector<double>& dout, std::vector<double>& grad) {
    const Layout L = make_layout(p.n);
    const double* th = p.theta.data();
    const int n = p.n;
    double dot = 0.0;
    for (int r = 0; r < n; ++r) dot += dout[r] * f.soft[r];
    std::vector<double> dlogit(n);
    for (int r = 0; r < n; ++r) dlogit[r] = f.soft[r] * (dout[r] - dot);

    std::vector<double> da(kH, 0.0), dz(kH);
    for (int r = 0; r < n; ++r) {
        grad[L.b5 + r] += dlogit[r];
        const double* row = th + L.w5 + static_cast<std::size_t>(r) * kH;
        double* grow = grad.data() + L.w5 + static_cast<std::size_t>(r) * kH;
        for (int c = 0; c < kH; ++c) {
            grow[c] += dlogit[r] * f.a4[c];
            da[c] += dlogit[r] * row[c];
        }
    }
    auto hidden_layer = [&](std::size_t w_off, std::size_t b_off, const std::vector<double>& z,
                            const std::vector<double>& a_in, std::vector<double>& da_in) {
        for (int r = 0; r < kH; ++r) dz[r] = z[r] > 0 ? da[r] : 0.0;
        da_in.assign(a_in.size(), 0.0);
        for (int r = 0; r < kH; ++r) {
            if (dz[r] == 0.0) continue;
            grad[b_off + r] += dz[r];
            const double* row = th + w_off + static_cast<std::size_t>(r) * a_in.size();
            double* grow = grad.data() + w_off + static_cast<std::size_t>(r) * a_in.size();
            for (std::size_t c = 0; c < a_in.size(); ++c) {
                grow[c] += dz[r] * a_in[c];
                da_in[c] += dz[r] * row[c];
            }
        }
        da = da_in;
    };
    std::vector<double> scratch;
    hidden_layer(L.w4, L.b4, f.z4, f.a3, scratch);
    hidden_layer(L.w3, L.b3, f.z3, f.a2, scratch);
    hidden_layer(L.w2, L.b2, f.z2, f.a1, scratch);
    // input layer: da holds d/d z1 pre-relu gate
    for (int r = 0; r < kH; ++r) dz[r] = f.z1[r] > 0 ? da[r] : 0.0;
    for (int r = 0; r < kH; ++r) {
        if (dz[r] == 0.0) continue;
        grad[L.b1 + r] += dz[r];
        double* grow = grad.data() + L.w1 + static_cast<std::size_t>(r) * n;
        for (int c = 0; c < n; ++c) grow[c] += dz[r] * f.x[c];
    }
}

// Per-cost-call cache: the network is a pure function of the coalition mask
// while theta is fixed, and batches revisit the same few masks.
struct ForwardMemo {
    const NetworkParams* p;
    double mask_constant;
    std::unordered_map<std::uint32_t, ForwardCache> store;

    const ForwardCache& at(std::uint32_t mask) {
        auto it = store.find(mask);
        if (it != store.end()) return it->second;
        ForwardCache f;
        forward_into(*p, mask, mask_constant, f);
        return store.emplace(mask, std::move(f)).first->second;
    }
};

// ReLU(OUT(b) - OUT(b minus one bit)) summed; seeds accumulate the weighted
// subgradient per (mask, coordinate) when requested.
double penalty_with_seeds(ForwardMemo& memo, int n, double weight,
                          std::unordered_map<std::uint32_t, std::vector<double>>* seeds) {
    double total = 0.0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        if (std::popcount(mask) < 2) continue;
        const auto& big = memo.at(mask).out;
        for (int bitpos = 0; bitpos < n; ++bitpos) {
            if (!(mask >> bitpos & 1u)) continue;
            std::uint32_t sub = mask & ~(1u << bitpos);
            const auto& small = memo.at(sub).out;
            for (int r = 0; r < n; ++r) {
                double diff = big[r] - small[r];
                if (diff > 0) {
                    total += diff;
                    if (seeds) {
                        auto& sb = (*seeds)[mask];
                        auto& ss = (*seeds)[sub];
                        if (sb.empty()) sb.assign(n, 0.0);
                        if (ss.empty()) ss.assign(n, 0.0);
                        sb[r] += weight;
                        ss[r] -= weight;
                    }
                }
            }
        }
    }
    return total;
}

PorfConstants simulate_with_memo(ForwardMemo& memo, const Dist&, const BatchElement& e,
                                 Objective obj, int n) {
    std::vector<double> values(n);
    int pos = 0;
    for (int i = 0; i < n; ++i) {
        if (i == e.agent) values[i] = std::numeric_limits<double>::infinity();
        else values[i] = e.others[pos++];
    }
    auto removal = [&](std::uint32_t start) {
        std::uint32_t mask = start;
        while (mask) {
            const auto& out = memo.at(mask).out;
            std::uint32_t next = mask;
            for (int i = 0; i < n; ++i)
                if ((mask >> i & 1u) && values[i] < out[i]) next &= ~(1u << i);
            if (next == mask) break;
            mask = next;
        }
        return mask;
    };
    auto objective_of = [&](std::uint32_t mask, bool skip_agent) {
        if (!mask) return 0.0;
        if (obj == Objective::consumers) return static_cast<double>(std::popcount(mask));
        const auto& out = memo.at(mask).out;
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!(mask >> i & 1u)) continue;
            if (skip_agent && i == e.agent) continue;
            total += values[i] - out[i];
        }
        return total;
    };

    PorfConstants constants;
    constants.offer_coalition = removal((1u << n) - 1u);
    constants.objective_if_consuming = objective_of(constants.offer_coalition, true);
    std::uint32_t without = constants.offer_coalition & ~(1u << e.agent);
    constants.objective_if_not = objective_of(without ? removal(without) : 0u, false);
    return constants;
}

struct Adam {
    double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<double> m, v;
    long long t = 0;

    explicit Adam(std::size_t size, double step) : lr(step), m(size, 0.0), v(size, 0.0) {}

    void step(std::vector<double>& theta, const std::vector<double>& grad) {
        ++t;
        double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            theta[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

struct FrozenElement {
    int agent = 0;
    std::uint32_t offer_coalition = 0;
    double objective_if_consuming = 0;
    double objective_if_not = 0;
    double agent_value = 0;   // sigmoid cost only
};

// Shared cost core. PORF weights acceptance by the prior; the sigmoid cost
// weights it by sigmoid(v_i - offer) of the realized value.
CostReport cost_from_frozen(const NetworkParams& p, const Dist& d,
                            const std::vector<FrozenElement>& batch, Objective obj,
                            CostKind kind, double penalty_weight, double mask_constant) {
    const int n = p.n;
    ForwardMemo memo{&p, mask_constant, {}};
    std::unordered_map<std::uint32_t, std::vector<double>> seeds;
    double cost_sum = 0.0;
    const double inv_b = batch.empty() ? 0.0 : 1.0 / static_cast<double>(batch.size());
    for (const auto& e : batch) {
        double c = memo.at(e.offer_coalition).out[e.agent];
        c = std::clamp(c, 0.0, 1.0);
        double os = e.objective_if_consuming;
        double of = e.objective_if_not;
        double wc = 0.0, dwc = 0.0;
        if (obj == Objective::welfare) {
            wc = conditional_welfare(d, c);
            dwc = conditional_welfare_derivative(d, c);
        }
        double consume_value = obj == Objective::consumers ? os : os + wc;
        double accept_w, d_accept_w;   // weight on the consuming branch
        if (kind == CostKind::porf) {
            accept_w = d.reliability(c);
            d_accept_w = -d.pdf(c);
        } else {
            double s = 1.0 / (1.0 + std::exp(-(e.agent_value - c)));
            accept_w = s;
            d_accept_w = -s * (1.0 - s);
        }
        double expected = accept_w * consume_value + (1.0 - accept_w) * of;
        double dexpected = d_accept_w * (consume_value - of);
        if (obj == Objective::welfare) dexpected += accept_w * dwc;
        cost_sum += (obj == Objective::consumers ? n - expected : -expected);
        auto& sv = seeds[e.offer_coalition];
        if (sv.empty()) sv.assign(n, 0.0);
        sv[e.agent] += -dexpected * inv_b;
    }

    CostReport report;
    report.penalty = penalty_with_seeds(memo, n, penalty_weight, &seeds);
    report.cost = cost_sum * inv_b + penalty_weight * report.penalty;
    report.grad.assign(p.theta.size(), 0.0);
    for (const auto& [mask, sv] : seeds) backward_from(p, memo.at(mask), sv, report.grad);
    return report;
}

std::vector<FrozenElement> freeze_porf(const NetworkParams& p, const Dist& d,
                                       const std::vector<BatchElement>& batch, Objective obj,
                                       double mask_constant) {
    ForwardMemo memo{&p, mask_constant, {}};
    std::vector<FrozenElement> out;
    out.reserve(batch.size());
    for (const auto& e : batch) {
        PorfConstants constants = simulate_with_memo(memo, d, e, obj, p.n);
        out.push_back({e.agent, constants.offer_coalition, constants.objective_if_consuming,
                       constants.objective_if_not, 0.0});
    }
    return out;
}

std::vector<FrozenElement> freeze_sigmoid(const NetworkParams& p, const Dist& d,
                                          const std::vector<SigmoidBatchElement>& batch,
                                          Objective obj, double mask_constant) {
    ForwardMemo memo{&p, mask_constant, {}};
    std::vector<FrozenElement> out;
    out.reserve(batch.size());
    for (const auto& e : batch) {
        BatchElement b;
        b.agent = e.agent;
        for (int i = 0; i < static_cast<int>(e.profile.size()); ++i)
            if (i != e.agent) b.others.push_back(e.profile[i]);
        PorfConstants constants = simulate_with_memo(memo, d, b, obj, p.n);
        out.push_back({e.agent, constants.offer_coalition, constants.objective_if_consuming,
                       constants.objective_if_not, e.profile[e.agent]});
    }
    return out;
}

} // namespace

NetworkParams xavier_init(int n, std::uint64_t seed) {
    if (n < 1 || n > 16) throw std::invalid_argument("network: n must be in [1,16]");
    const Layout L = make_layout(n);
    NetworkParams p;
    p.n = n;
    p.theta.assign(L.total, 0.0);
    Rng rng(seed);
    auto fill = [&](std::size_t w_off, int fan_in, int fan_out) {
        double sd = std::sqrt(2.0 / (fan_in + fan_out));
        for (std::size_t i = 0; i < static_cast<std::size_t>(fan_in) * fan_out; ++i)
            p.theta[w_off + i] = rng.normal(0.0, sd);
    };
    fill(L.w1, n, kH);
    fill(L.w2, kH, kH);
    fill(L.w3, kH, kH);
    fill(L.w4, kH, kH);
    fill(L.w5, kH, n);
    auto bias = [&](std::size_t b_off, int count) {
        for (int i = 0; i < count; ++i) p.theta[b_off + i] = 0.1;
    };
    bias(L.b1, kH);
    bias(L.b2, kH);
    bias(L.b3, kH);
    bias(L.b4, kH);
    bias(L.b5, n);
    return p;
}

std::vector<double> forward(const NetworkParams& p, std::uint32_t coalition_mask,
                            double mask_constant) {
    check_params(p);
    ForwardCache f;
    forward_into(p, coalition_mask, mask_constant, f);
    return f.out;
}

double monotonicity_penalty(const NetworkParams& p, int n, double mask_constant) {
    check_params(p);
    if (n != p.n) throw std::invalid_argument("monotonicity_penalty: n mismatch");
    ForwardMemo memo{&p, mask_constant, {}};
    return penalty_with_seeds(memo, n, 0.0, nullptr);
}

PorfConstants simulate_porf(const NetworkParams& p, const Dist& d, const BatchElement& e,
                            Objective obj, double mask_constant) {
    check_params(p);
    if (static_cast<int>(e.others.size()) != p.n - 1)
        throw std::invalid_argument("simulate_porf: others must hold n-1 values");
    if (e.agent < 0 || e.agent >= p.n) throw std::invalid_argument("simulate_porf: agent out of range");
    ForwardMemo memo{&p, mask_constant, {}};
    return simulate_with_memo(memo, d, e, obj, p.n);
}

CostReport porf_cost(const NetworkParams& p, const Dist& d,
                     const std::vector<BatchElement>& batch, Objective obj,
                     double penalty_weight, double mask_constant) {
    check_params(p);
    auto frozen = freeze_porf(p, d, batch, obj, mask_constant);
    return cost_from_frozen(p, d, frozen, obj, CostKind::porf, penalty_weight, mask_constant);
}

CostReport sigmoid_cost(const NetworkParams& p, const Dist& d,
                        const std::vector<SigmoidBatchElement>& batch, Objective obj,
                        double penalty_weight, double mask_constant) {
    check_params(p);
    auto frozen = freeze_sigmoid(p, d, batch, obj, mask_constant);
    return cost_from_frozen(p, d, frozen, obj, CostKind::sigmoid, penalty_weight, mask_constant);
}

SuperviseResult supervise(const NetworkParams& p, const Schedule& target,
                          const TrainConfig& config) {
    check_params(p);
    if (target.n != p.n) throw std::invalid_argument("supervise: schedule n mismatch");
    validate_schedule(target);
    const int n = p.n;
    const std::uint32_t masks = 1u << n;
    // padded targets: member shares in place, 1.0 on unset coordinates
    std::vector<std::vector<double>> padded(masks);
    for (std::uint32_t mask = 1; mask < masks; ++mask) {
        padded[mask].assign(n, 1.0);
        int pos = 0;
        for (int i = 0; i < n; ++i)
            if (mask >> i & 1u) padded[mask][i] = target.table[mask][pos++];
    }
    // Mean over coalitions of the squared vector distance; keeping the
    // coordinate count out of the denominator makes the 1e-4 stop tight
    // enough that every coordinate lands within 0.01 of its target.
    const double denom = static_cast<double>(masks - 1);

    SuperviseResult result;
    result.params = p;
    Adam adam(p.theta.size(), config.step_size);
    std::vector<double> grad(p.theta.size());
    for (int iter = 0; iter < config.supervise_iter_cap; ++iter) {
        ForwardMemo memo{&result.params, config.mask_constant, {}};
        double loss = 0.0;
        double worst = 0.0;
        std::fill(grad.begin(), grad.end(), 0.0);
        std::vector<double> seed(n);
        for (std::uint32_t mask = 1; mask < masks; ++mask) {
            const auto& f = memo.at(mask);
            for (int r = 0; r < n; ++r) {
                double diff = f.out[r] - padded[mask][r];
                loss += diff * diff / denom;
                worst = std::max(worst, std::abs(diff));
                seed[r] = 2.0 * diff / denom;
            }
            backward_from(result.params, f, seed, grad);
        }
        result.loss = loss;
        result.iterations = iter;   // Adam steps taken so far
        if (loss < 1e-4 && worst < 0.01) {
            result.converged = true;
            return result;
        }
        adam.step(result.params.theta, grad);
    }
    result.iterations = config.supervise_iter_cap;
    return result;
}

Schedule network_to_schedule(const NetworkParams& p, int n, double mask_constant) {
    check_params(p);
    if (n != p.n) throw std::invalid_argument("network_to_schedule: n mismatch");
    Schedule s;
    s.n = n;
    s.table.resize(1u << n);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<double> out = forward(p, mask, mask_constant);
        double sum = 0.0;
        std::vector<double>& shares = s.table[mask];
        for (int i = 0; i < n; ++i)
            if (mask >> i & 1u) {
                shares.push_back(std::max(out[i], 0.0));
                sum += shares.back();
            }
        if (sum <= 0.0) {
            shares.assign(shares.size(), 1.0 / static_cast<double>(shares.size()));
        } else {
            for (double& c : shares) c /= sum;
        }
    }
    return s;
}

TrainResult train(const NetworkParams& p, const Dist& d, const TrainConfig& config) {
    check_params(p);
    const int n = p.n;
    NetworkParams params = p;

    if (config.init != InitKind::random) {
        Schedule target;
        GridSpec grid{100};
        switch (config.init) {
            case InitKind::supervise_scs:
                target = scs_schedule(n);
                break;
            case InitKind::supervise_myopic:
                target = myopic_schedule(d, n, grid, config.objective);
                break;
            case InitKind::supervise_dp: {
                // extend the jointly optimal unanimous shares to subcoalitions
                // by renormalizing over the members
                auto base = solve_optimal_unanimous(d, n, grid, config.objective).shares.shares;
                target.n = n;
                target.table.resize(1u << n);
                for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
                    double sum = 0.0;
                    for (int i = 0; i < n; ++i)
                        if (mask >> i & 1u) sum += base[i];
                    auto& shares = target.table[mask];
                    for (int i = 0; i < n; ++i)
                        if (mask >> i & 1u)
                            shares.push_back(sum > 0 ? base[i] / sum
                                                     : 1.0 / std::popcount(mask));
                }
                break;
            }
            default:
                break;
        }
        SuperviseResult sup = supervise(params, target, config);
        params = sup.params;
    }

    std::uint64_t eval_state = config.seed ^ 0x45564c5345454453ull;
    const std::uint64_t eval_seed = splitmix64(eval_state);
    auto evaluate = [&](const NetworkParams& candidate, int round) {
        Schedule s = network_to_schedule(candidate, n, config.mask_constant);
        Estimate est = mc_estimate_schedule_unchecked(s, d, config.eval_samples, eval_seed,
                                                      config.objective);
        TrainHistoryEntry entry;
        entry.round = round;
        entry.estimate = config.objective == Objective::consumers ? n - est.mean : est.mean;
        entry.stderr_ = est.stderr_;
        entry.penalty = monotonicity_penalty(candidate, n, config.mask_constant);
        return entry;
    };
    auto better = [&](const TrainHistoryEntry& a, const TrainHistoryEntry& b) {
        return config.objective == Objective::consumers ? a.estimate < b.estimate
                                                        : a.estimate > b.estimate;
    };

    TrainResult result;
    result.history.push_back(evaluate(params, 0));
    result.params = params;
    TrainHistoryEntry best = result.history.front();

    Adam adam(params.theta.size(), config.step_size);
    for (int round = 1; round <= config.rounds; ++round) {
        for (int batch = 0; batch < config.batches_per_round; ++batch) {
            Rng rng(config.seed,
                    1 + static_cast<std::uint64_t>(round - 1) * config.batches_per_round + batch);
            CostReport report;
            if (config.cost == CostKind::porf) {
                std::vector<BatchElement> elems(config.batch_size);
                for (auto& e : elems) {
                    e.agent = static_cast<int>(rng.next() % n);
                    e.others.resize(n - 1);
                    for (double& v : e.others) v = draw(d, rng);
                }
                report = porf_cost(params, d, elems, config.objective, config.penalty_weight,
                                   config.mask_constant);
            } else {
                std::vector<SigmoidBatchElement> elems(config.batch_size);
                for (auto& e : elems) {
                    e.agent = static_cast<int>(rng.next() % n);
                    e.profile.resize(n);
                    for (double& v : e.profile) v = draw(d, rng);
                }
                report = sigmoid_cost(params, d, elems, config.objective, config.penalty_weight,
                                      config.mask_constant);
            }
            if (!std::isfinite(report.cost))
                throw std::runtime_error("train: cost diverged to a non-finite value");
            adam.step(params.theta, report.grad);
        }
        TrainHistoryEntry entry = evaluate(params, round);
        result.history.push_back(entry);
        if (better(entry, best)) {
            best = entry;
            result.params = params;
        }
    }
    return result;
}

double gradient_check(const NetworkParams& p, const Dist& d, CostKind cost,
                      Objective obj, double penalty_weight, double epsilon,
                      std::uint64_t seed, int probes) {
    check_params(p);
    const int n = p.n;
    constexpr int kBatch = 16;
    std::vector<FrozenElement> frozen;
    Rng rng(seed, 0);
    if (cost == CostKind::porf) {
        std::vector<BatchElement> batch(kBatch);
        for (auto& e : batch) {
            e.agent = static_cast<int>(rng.next() % n);
            e.others.resize(n - 1);
            for (double& v : e.others) v = draw(d, rng);
        }
        frozen = freeze_porf(p, d, batch, obj, 1000.0);
    } else {
        std::vector<SigmoidBatchElement> batch(kBatch);
        for (auto& e : batch) {
            e.agent = static_cast<int>(rng.next() % n);
            e.profile.resize(n);
            for (double& v : e.profile) v = draw(d, rng);
        }
        frozen = freeze_sigmoid(p, d, batch, obj, 1000.0);
    }

    CostReport base = cost_from_frozen(p, d, frozen, obj, cost, penalty_weight, 1000.0);
    auto frozen_cost = [&](const NetworkParams& q) {
        return cost_from_frozen(q, d, frozen, obj, cost, penalty_weight, 1000.0).cost;
    };

    Rng pick(seed, 1);
    NetworkParams q = p;
    double worst = 0.0;
    for (int t = 0; t < probes; ++t) {
        std::size_t idx = static_cast<std::size_t>(pick.next() % p.theta.size());
        double keep = q.theta[idx];
        q.theta[idx] = keep + epsilon;
        double up = frozen_cost(q);
        q.theta[idx] = keep - epsilon;
        double down = frozen_cost(q);
        q.theta[idx] = keep;
        double fd = (up - down) / (2.0 * epsilon);
        double an = base.grad[idx];
        double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6});
        worst = std::max(worst, rel);
    }
    return worst;
}

std::string params_to_json(const NetworkParams& p) {
    nlohmann::ordered_json j;
    j["n"] = p.n;
    j["hidden"] = NetworkParams::hidden;
    j["depth"] = NetworkParams::depth;
    j["theta"] = p.theta;
    return j.dump();
}

NetworkParams params_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    NetworkParams p;
    p.n = j.at("n").get<int>();
    if (j.at("hidden").get<int>() != NetworkParams::hidden ||
        j.at("depth").get<int>() != NetworkParams::depth)
        throw std::invalid_argument("params json: architecture mismatch");
    p.theta = j.at("theta").get<std::vector<double>>();
    check_params(p);
    return p;
}

void save_params(const NetworkParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << params_to_json(p) << '\n';
}

NetworkParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return params_from_json(buf.str());
}

} // namespace pubshare
