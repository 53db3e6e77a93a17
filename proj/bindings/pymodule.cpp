#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pubshare/dist.hpp"
#include "pubshare/eval.hpp"
#include "pubshare/mechanisms.hpp"
#include "pubshare/neural.hpp"
#include "pubshare/solvers.hpp"

namespace py = pybind11;
using namespace pubshare;

namespace {

Objective obj_of(const std::string& name) {
    if (name == "consumers") return Objective::consumers;
    if (name == "welfare") return Objective::welfare;
    throw std::invalid_argument("objective must be 'consumers' or 'welfare'");
}

} // namespace

PYBIND11_MODULE(pubshare, m) {
    m.doc() = "cost-sharing mechanisms for a binary public project";

    m.def("density", [](const std::string& spec, double x) { return parse_dist(spec).pdf(x); },
          py::arg("dist"), py::arg("x"));
    m.def("cdf", [](const std::string& spec, double x) { return parse_dist(spec).cdf(x); },
          py::arg("dist"), py::arg("x"));
    m.def("conditional_welfare",
          [](const std::string& spec, double c) { return conditional_welfare(parse_dist(spec), c); },
          py::arg("dist"), py::arg("c"));
    m.def("sample",
          [](const std::string& spec, std::uint64_t seed, std::size_t count) {
              return sample(parse_dist(spec), seed, count);
          },
          py::arg("dist"), py::arg("seed"), py::arg("count"));

    m.def("exact_scs_consumers",
          [](const std::string& spec, int n) { return exact_scs_consumers(parse_dist(spec), n); },
          py::arg("dist"), py::arg("n"));
    m.def("exact_unanimous_value",
          [](const std::vector<double>& shares, const std::string& spec,
             const std::string& objective) {
              return exact_unanimous_value({shares}, parse_dist(spec), obj_of(objective));
          },
          py::arg("shares"), py::arg("dist"), py::arg("objective"));
    m.def("mc_scs",
          [](const std::string& spec, int n, long long samples, std::uint64_t seed,
             const std::string& objective) {
              Estimate est = mc_estimate_schedule(scs_schedule(n), parse_dist(spec), samples,
                                                  seed, obj_of(objective));
              return std::make_pair(est.mean, est.stderr_);
          },
          py::arg("dist"), py::arg("n"), py::arg("samples"), py::arg("seed"),
          py::arg("objective"));
    m.def("mc_sequential",
          [](const std::string& spec, double offer, int n, long long samples,
             std::uint64_t seed, const std::string& objective) {
              Estimate est = mc_estimate_sequential(parse_dist(spec), offer, n, samples, seed,
                                                    obj_of(objective));
              return std::make_pair(est.mean, est.stderr_);
          },
          py::arg("dist"), py::arg("offer"), py::arg("n"), py::arg("samples"), py::arg("seed"),
          py::arg("objective"));

    m.def("solve_optimal_unanimous",
          [](const std::string& spec, int n, int H, const std::string& objective) {
              UnanimousSolution sol =
                  solve_optimal_unanimous(parse_dist(spec), n, GridSpec{H}, obj_of(objective));
              return std::make_pair(sol.shares.shares, sol.value);
          },
          py::arg("dist"), py::arg("n"), py::arg("H"), py::arg("objective"));
    m.def("solve_one_directional_value",
          [](const std::string& spec, int n, int H, const std::string& objective) {
              return solve_one_directional(parse_dist(spec), n, GridSpec{H}, obj_of(objective))
                  .value;
          },
          py::arg("dist"), py::arg("n"), py::arg("H"), py::arg("objective"));
    m.def("upper_bound",
          [](const std::string& spec, int n, int H, const std::string& objective) {
              return upper_bound(parse_dist(spec), n, GridSpec{H}, obj_of(objective));
          },
          py::arg("dist"), py::arg("n"), py::arg("H"), py::arg("objective"));

    m.def("scs_schedule_json", [](int n) { return schedule_to_json(scs_schedule(n)); },
          py::arg("n"));
    m.def("feasibility_violations",
          [](const std::string& json) {
              return feasibility_check(schedule_from_json(json)).size();
          },
          py::arg("schedule_json"));
    m.def("strategyproofness_probe",
          [](const std::string& json, const std::vector<double>& profile, int agent,
             const std::vector<double>& deviations) {
              return strategyproofness_probe(schedule_from_json(json), profile, agent, deviations);
          },
          py::arg("schedule_json"), py::arg("profile"), py::arg("agent"), py::arg("deviations"));

    m.def("gradient_check",
          [](const std::string& spec, int n, const std::string& cost,
             const std::string& objective, double penalty_weight, double epsilon,
             std::uint64_t seed, int probes) {
              NetworkParams p = xavier_init(n, seed);
              CostKind kind = cost == "sigmoid" ? CostKind::sigmoid : CostKind::porf;
              return gradient_check(p, parse_dist(spec), kind, obj_of(objective), penalty_weight,
                                    epsilon, seed, probes);
          },
          py::arg("dist"), py::arg("n"), py::arg("cost"), py::arg("objective"),
          py::arg("penalty_weight") = 1000.0, py::arg("epsilon") = 1e-5, py::arg("seed") = 1,
          py::arg("probes") = 8);
}
