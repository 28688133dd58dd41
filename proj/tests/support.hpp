#pragma once

#include <functional>
#include <random>

#include "wdn/bnb.hpp"
#include "wdn/hydraulics.hpp"
#include "wdn/network.hpp"

namespace wdn::test {

// Reference values computed with an independent high-precision evaluation of
// the closed-form expressions (not with the library under test).
inline constexpr double kHeadLossRef = 3515.1188103247846;      // 1000*250*0.1^1.852
inline constexpr double kHwResistanceRef = 1.0305250564414508;  // d=0.254, kappa=130
inline constexpr double kFlowCapRef = 0.06283185307179587;      // d=0.2, vmax=2
inline constexpr double kSinglePipeHeadRef = -4.72756849356243; // see test
inline constexpr double kSplitRatioRef = 1.4539289837624991;    // 2^(1/1.852)
inline constexpr double kSplitQ1Ref = 0.017774707337291258;
inline constexpr double kSplitQ2Ref = 0.01222529266270874;

/// Minimizes a unimodal function on [a, b] by golden-section search.
double golden_section_min(const std::function<double(double)>& f, double a,
                          double b, double tol = 1e-12, int max_iters = 400);

/// Dual objective recomputed from first principles: for fixed junction heads,
/// minimizes each arc's Lagrangian term over its directed flow by
/// golden-section search instead of the closed-form stationary point.
double dual_objective_oracle(const Network& net, const DesignVector& design,
                             const std::vector<double>& heads);

/// Small random instance: one reservoir, two or three junctions, at most
/// three pipes with at most three resistance options each. Returns a
/// finalized network with derived bounds; feasibility is not guaranteed
/// (a fraction of draws is deliberately overloaded).
Network random_instance(std::mt19937_64& rng);

/// Five-arc, two-loop fixture used by the dual cross-check.
Network five_arc_network();

}  // namespace wdn::test
