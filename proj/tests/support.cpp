#include "support.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace wdn::test {

double golden_section_min(const std::function<double(double)>& f, double a,
                          double b, double tol, int max_iters) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < max_iters && b - a > tol; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return f(0.5 * (a + b));
}

double dual_objective_oracle(const Network& net, const DesignVector& design,
                             const std::vector<double>& heads) {
  auto head_at = [&](int i) {
    return net.nodes[i].is_reservoir() ? net.nodes[i].fixed_head : heads[i];
  };
  double value = 0.0;
  for (int j : net.junctions()) value -= head_at(j) * net.nodes[j].demand;
  for (std::size_t a = 0; a < net.pipes.size(); ++a) {
    const Pipe& p = net.pipes[a];
    double coeff =
        p.length * p.options[design.choice[a]].resistance / (1.0 + net.alpha);
    double dh = head_at(p.tail) - head_at(p.head);
    // Inner minimization over each directed flow; the minimizer lies below
    // the stationary point, so [0, 2*q_star + 1] always brackets it.
    auto inner = [&](double drive) {
      if (drive <= 0.0) return 0.0;
      double q_star = std::pow(drive / (coeff * (1.0 + net.alpha)),
                               1.0 / net.alpha);
      auto term = [&](double q) {
        return coeff * std::pow(q, 1.0 + net.alpha) - drive * q;
      };
      return golden_section_min(term, 0.0, 2.0 * q_star + 1.0);
    };
    value += inner(dh) + inner(-dh);
  }
  return value;
}

namespace {

nlohmann::json option_json(double resistance, double cost, double qmax) {
  return {{"resistance", resistance},
          {"cost", cost},
          {"qmax_pos", qmax},
          {"qmax_neg", qmax}};
}

Network random_instance_draw(std::mt19937_64& rng);

}  // namespace

Network random_instance(std::mt19937_64& rng) {
  // Overloaded draws can exceed the source arc's delivery capacity, which
  // bound derivation rejects outright; redraw until the instance is
  // constructible. Surviving overloads remain hydraulically hard to serve.
  for (;;) {
    try {
      return random_instance_draw(rng);
    } catch (const ValidationError&) {
    }
  }
}

namespace {
Network random_instance_draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * u01(rng);
  };

  int junctions = 2 + static_cast<int>(rng() % 2);  // 2 or 3
  bool overload = u01(rng) < 0.25;  // deliberately hard-to-serve draws
  double demand_scale = overload ? 6.0 : 1.0;

  nlohmann::json doc;
  doc["alpha"] = 1.852;
  doc["nodes"] = nlohmann::json::array();
  doc["nodes"].push_back(
      {{"id", "src"}, {"kind", "reservoir"}, {"head", uniform(90.0, 110.0)}});
  for (int j = 0; j < junctions; ++j) {
    doc["nodes"].push_back({{"id", "j" + std::to_string(j)},
                            {"kind", "junction"},
                            {"demand", demand_scale * uniform(0.002, 0.010)},
                            {"head_min", uniform(40.0, 70.0)}});
  }

  // Topology: chain src->j0->j1[->j2], or a star src->j0 plus j0->jk spurs.
  bool chain = junctions == 2 || u01(rng) < 0.5;
  auto add_pipe = [&](const std::string& id, const std::string& tail,
                      const std::string& head) {
    nlohmann::json pipe = {{"id", id},
                           {"tail", tail},
                           {"head", head},
                           {"length", uniform(200.0, 800.0)}};
    int num_opts = 1 + static_cast<int>(rng() % 3);
    double resistance = uniform(600.0, 1200.0);
    double cost = uniform(8.0, 15.0);
    double qmax = uniform(0.04, 0.08);
    pipe["options"] = nlohmann::json::array();
    for (int p = 0; p < num_opts; ++p) {
      pipe["options"].push_back(option_json(resistance, cost, qmax));
      resistance *= uniform(0.25, 0.5);
      cost *= uniform(2.2, 3.5);
    }
    doc["pipes"].push_back(pipe);
  };
  doc["pipes"] = nlohmann::json::array();
  if (chain) {
    add_pipe("p0", "src", "j0");
    for (int j = 1; j < junctions; ++j)
      add_pipe("p" + std::to_string(j), "j" + std::to_string(j - 1),
               "j" + std::to_string(j));
  } else {
    add_pipe("p0", "src", "j0");
    for (int j = 1; j < junctions; ++j)
      add_pipe("p" + std::to_string(j), "j0", "j" + std::to_string(j));
  }

  return derive_bounds(parse_network_json(doc));
}
}  // namespace

Network five_arc_network() {
  nlohmann::json doc;
  doc["alpha"] = 1.852;
  doc["nodes"] = nlohmann::json::array(
      {{{"id", "src"}, {"kind", "reservoir"}, {"head", 100.0}},
       {{"id", "j0"}, {"kind", "junction"}, {"demand", 0.008}, {"head_min", 50.0}},
       {{"id", "j1"}, {"kind", "junction"}, {"demand", 0.006}, {"head_min", 50.0}},
       {{"id", "j2"}, {"kind", "junction"}, {"demand", 0.004}, {"head_min", 50.0}}});
  auto menu = nlohmann::json::array({option_json(800.0, 10.0, 0.06),
                                     option_json(300.0, 30.0, 0.06),
                                     option_json(90.0, 95.0, 0.06)});
  auto pipe = [&](const char* id, const char* tail, const char* head,
                  double length) {
    return nlohmann::json{{"id", id}, {"tail", tail},    {"head", head},
                          {"length", length}, {"options", menu}};
  };
  doc["pipes"] = nlohmann::json::array({pipe("a0", "src", "j0", 500.0),
                                        pipe("a1", "j0", "j1", 400.0),
                                        pipe("a2", "j0", "j2", 450.0),
                                        pipe("a3", "j1", "j2", 350.0),
                                        pipe("a4", "src", "j1", 600.0)});
  return derive_bounds(parse_network_json(doc));
}

}  // namespace wdn::test
