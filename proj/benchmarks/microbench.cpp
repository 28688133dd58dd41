#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "wdn/bnb.hpp"
#include "wdn/formulation.hpp"
#include "wdn/hydraulics.hpp"
#include "wdn/lp.hpp"

namespace {

wdn::Network shamir() {
  static wdn::Network net = wdn::derive_bounds(
      wdn::parse_network(std::string(WDN_DATA_DIR) + "/shamir.json"));
  return net;
}

void BM_HydraulicSolve(benchmark::State& state) {
  wdn::Network net = shamir();
  wdn::DesignVector design;
  design.choice.assign(net.pipes.size(), 7);
  for (auto _ : state) {
    wdn::HydraulicState st = wdn::solve_fixed_design(net, design);
    benchmark::DoNotOptimize(st.flows.data());
  }
}
BENCHMARK(BM_HydraulicSolve);

void BM_BuildMaster(benchmark::State& state) {
  wdn::Network net = shamir();
  for (auto _ : state) {
    wdn::MasterProblem mp = wdn::build_master(net, wdn::MasterVariant::Exact);
    benchmark::DoNotOptimize(mp.rows.data());
  }
}
BENCHMARK(BM_BuildMaster);

void BM_RootRelaxation(benchmark::State& state) {
  wdn::Network net = shamir();
  wdn::MasterProblem mp = wdn::build_master(net, wdn::MasterVariant::Exact);
  wdn::seed_root_cuts(mp);
  wdn::LinearProgram lp = wdn::to_lp(mp);
  for (auto _ : state) {
    wdn::SimplexSolver solver;
    wdn::LpSolution sol = solver.solve(lp);
    benchmark::DoNotOptimize(sol.objective);
  }
}
BENCHMARK(BM_RootRelaxation)->Unit(benchmark::kMillisecond);

void BM_CutGeneration(benchmark::State& state) {
  wdn::Network net = shamir();
  wdn::MasterProblem mp = wdn::build_master(net, wdn::MasterVariant::Exact);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u01(0.05, 1.0);
  for (auto _ : state) {
    int arc = static_cast<int>(rng() % net.pipes.size());
    int opt = static_cast<int>(rng() % net.pipes[arc].options.size());
    double q = u01(rng) * net.pipes[arc].options[opt].qmax_pos;
    wdn::LinearCut cut =
        wdn::oa_headloss_cut(mp, arc, opt, q, wdn::Direction::Positive);
    benchmark::DoNotOptimize(cut.coeffs.data());
  }
}
BENCHMARK(BM_CutGeneration);

}  // namespace

BENCHMARK_MAIN();
