#include "wdn/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace wdn {

using nlohmann::json;

double hazen_williams_resistance(double diameter, double roughness) {
  if (diameter <= 0.0) throw ValidationError("diameter must be positive");
  if (roughness <= 0.0) throw ValidationError("roughness must be positive");
  return 10.7 / (std::pow(roughness, 1.852) * std::pow(diameter, 4.8704));
}

int Network::node_index(const std::string& id) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return static_cast<int>(i);
  return -1;
}

double Network::max_source_head() const {
  double h = -std::numeric_limits<double>::infinity();
  for (int s : reservoirs_) h = std::max(h, nodes[s].fixed_head);
  return h;
}

double Network::total_demand() const {
  double d = 0.0;
  for (int j : junctions_) d += nodes[j].demand;
  return d;
}

void Network::finalize() {
  if (alpha != 1.852 && alpha != 2.0)
    throw ValidationError("alpha must be 1.852 (Hazen-Williams) or 2 (Darcy-Weisbach)");

  reservoirs_.clear();
  junctions_.clear();
  std::unordered_set<std::string> ids;
  for (size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    if (!ids.insert(n.id).second)
      throw ValidationError("duplicate node id '" + n.id + "'");
    if (n.is_reservoir()) {
      reservoirs_.push_back(static_cast<int>(i));
    } else {
      junctions_.push_back(static_cast<int>(i));
      if (n.demand < 0.0)
        throw ValidationError("demand must be nonnegative (node '" + n.id + "')");
      if (n.has_head_ub && n.head_lb > n.head_ub)
        throw ValidationError("head_min exceeds head_max at node '" + n.id + "'");
    }
  }
  if (reservoirs_.empty()) throw ValidationError("network has no reservoir");

  out_arcs_.assign(nodes.size(), {});
  in_arcs_.assign(nodes.size(), {});
  std::unordered_set<std::string> pipe_ids;
  for (size_t a = 0; a < pipes.size(); ++a) {
    Pipe& p = pipes[a];
    if (!pipe_ids.insert(p.id).second)
      throw ValidationError("duplicate pipe id '" + p.id + "'");
    if (p.tail < 0 || p.tail >= static_cast<int>(nodes.size()) ||
        p.head < 0 || p.head >= static_cast<int>(nodes.size()))
      throw ValidationError("pipe '" + p.id + "' references an unknown node");
    if (p.tail == p.head)
      throw ValidationError("pipe '" + p.id + "' is a self-loop");
    if (p.length <= 0.0)
      throw ValidationError("pipe '" + p.id + "' must have positive length");
    if (nodes[p.head].is_reservoir())
      throw ValidationError("arc into reservoir '" + nodes[p.head].id +
                            "': arcs incident to a source must be outgoing");
    if (p.options.empty())
      throw ValidationError("pipe '" + p.id + "' has no resistance options");

    std::sort(p.options.begin(), p.options.end(),
              [](const ResistanceOption& u, const ResistanceOption& v) {
                return u.resistance > v.resistance;
              });
    for (size_t k = 0; k < p.options.size(); ++k) {
      const ResistanceOption& o = p.options[k];
      if (o.resistance <= 0.0)
        throw ValidationError("pipe '" + p.id + "': resistance must be positive");
      if (o.cost < 0.0)
        throw ValidationError("pipe '" + p.id + "': cost must be nonnegative");
      if (o.qmax_pos < 0.0 || o.qmax_neg < 0.0 || o.dhmax_pos < 0.0 || o.dhmax_neg < 0.0)
        throw ValidationError("pipe '" + p.id + "': bounds must be nonnegative");
      if (k > 0) {
        if (o.resistance >= p.options[k - 1].resistance)
          throw ValidationError("pipe '" + p.id + "': duplicate resistance in menu");
        if (o.cost < p.options[k - 1].cost)
          throw ValidationError("pipe '" + p.id + "': option with resistance " +
                                std::to_string(p.options[k - 1].resistance) +
                                " is dominated (higher cost, higher resistance)");
      }
    }

    out_arcs_[p.tail].push_back(static_cast<int>(a));
    in_arcs_[p.head].push_back(static_cast<int>(a));
  }

  // undirected reachability from the reservoirs
  std::vector<char> seen(nodes.size(), 0);
  std::deque<int> queue(reservoirs_.begin(), reservoirs_.end());
  for (int s : reservoirs_) seen[s] = 1;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int a : out_arcs_[u])
      if (!seen[pipes[a].head]) seen[pipes[a].head] = 1, queue.push_back(pipes[a].head);
    for (int a : in_arcs_[u])
      if (!seen[pipes[a].tail]) seen[pipes[a].tail] = 1, queue.push_back(pipes[a].tail);
  }
  for (size_t i = 0; i < nodes.size(); ++i)
    if (!seen[i])
      throw ValidationError("node '" + nodes[i].id + "' is not connected to any reservoir");
}

namespace {

double require_number(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.contains(key))
    throw ParseError("missing field '" + std::string(key) + "' in " + ctx);
  const json& v = obj.at(key);
  if (!v.is_number())
    throw ParseError("field '" + std::string(key) + "' in " + ctx + " must be a number");
  return v.get<double>();
}

std::string require_string(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.contains(key))
    throw ParseError("missing field '" + std::string(key) + "' in " + ctx);
  const json& v = obj.at(key);
  if (!v.is_string())
    throw ParseError("field '" + std::string(key) + "' in " + ctx + " must be a string");
  return v.get<std::string>();
}

}  // namespace

Network parse_network_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("instance root must be a JSON object");
  Network net;
  net.alpha = require_number(doc, "alpha", "instance");

  if (!doc.contains("nodes") || !doc.at("nodes").is_array())
    throw ParseError("missing array field 'nodes'");
  std::unordered_map<std::string, int> index;
  for (const json& jn : doc.at("nodes")) {
    Node node;
    node.id = require_string(jn, "id", "node");
    std::string kind = require_string(jn, "kind", "node '" + node.id + "'");
    if (kind == "reservoir") {
      node.kind = NodeKind::Reservoir;
      node.fixed_head = require_number(jn, "head", "reservoir '" + node.id + "'");
    } else if (kind == "junction") {
      node.kind = NodeKind::Junction;
      node.demand = require_number(jn, "demand", "junction '" + node.id + "'");
      node.head_lb = require_number(jn, "head_min", "junction '" + node.id + "'");
      if (jn.contains("head_max")) {
        node.head_ub = jn.at("head_max").get<double>();
        node.has_head_ub = true;
      }
    } else {
      throw ParseError("node '" + node.id + "': kind must be 'reservoir' or 'junction'");
    }
    index.emplace(node.id, static_cast<int>(net.nodes.size()));
    net.nodes.push_back(std::move(node));
  }

  if (!doc.contains("pipes") || !doc.at("pipes").is_array())
    throw ParseError("missing array field 'pipes'");
  for (const json& jp : doc.at("pipes")) {
    Pipe pipe;
    pipe.id = require_string(jp, "id", "pipe");
    const std::string ctx = "pipe '" + pipe.id + "'";
    std::string tail = require_string(jp, "tail", ctx);
    std::string head = require_string(jp, "head", ctx);
    auto ti = index.find(tail), hi = index.find(head);
    if (ti == index.end()) throw ParseError(ctx + ": unknown tail node '" + tail + "'");
    if (hi == index.end()) throw ParseError(ctx + ": unknown head node '" + head + "'");
    pipe.tail = ti->second;
    pipe.head = hi->second;
    pipe.length = require_number(jp, "length", ctx);
    if (jp.contains("vmax")) pipe.vmax = jp.at("vmax").get<double>();

    if (!jp.contains("options") || !jp.at("options").is_array())
      throw ParseError(ctx + ": missing array field 'options'");
    for (const json& jo : jp.at("options")) {
      ResistanceOption opt;
      if (jo.contains("resistance")) {
        opt.resistance = jo.at("resistance").get<double>();
        if (jo.contains("diameter")) opt.diameter = jo.at("diameter").get<double>();
      } else if (jo.contains("diameter_roughness")) {
        const json& dr = jo.at("diameter_roughness");
        if (!dr.is_array() || dr.size() != 2)
          throw ParseError(ctx + ": diameter_roughness must be [D, kappa]");
        double diameter = dr.at(0).get<double>();
        double roughness = dr.at(1).get<double>();
        if (net.alpha != 1.852)
          throw ParseError(ctx + ": diameter_roughness requires alpha = 1.852");
        opt.resistance = hazen_williams_resistance(diameter, roughness);
        opt.diameter = diameter;
      } else {
        throw ParseError(ctx + ": option needs 'resistance' or 'diameter_roughness'");
      }
      opt.cost = require_number(jo, "cost", ctx + " option");
      if (jo.contains("qmax_pos") || jo.contains("qmax_neg")) {
        opt.qmax_pos = require_number(jo, "qmax_pos", ctx + " option");
        opt.qmax_neg = require_number(jo, "qmax_neg", ctx + " option");
        opt.has_flow_bounds = true;
      }
      pipe.options.push_back(opt);
    }
    net.pipes.push_back(std::move(pipe));
  }

  net.finalize();
  return net;
}

Network parse_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError("invalid JSON in '" + path.string() + "': " + e.what());
  }
  return parse_network_json(doc);
}

json to_json(const Network& net) {
  json doc;
  doc["alpha"] = net.alpha;
  doc["nodes"] = json::array();
  for (const Node& n : net.nodes) {
    json jn;
    jn["id"] = n.id;
    if (n.is_reservoir()) {
      jn["kind"] = "reservoir";
      jn["head"] = n.fixed_head;
    } else {
      jn["kind"] = "junction";
      jn["demand"] = n.demand;
      jn["head_min"] = n.head_lb;
      if (n.has_head_ub) jn["head_max"] = n.head_ub;
    }
    doc["nodes"].push_back(std::move(jn));
  }
  doc["pipes"] = json::array();
  for (const Pipe& p : net.pipes) {
    json jp;
    jp["id"] = p.id;
    jp["tail"] = net.nodes[p.tail].id;
    jp["head"] = net.nodes[p.head].id;
    jp["length"] = p.length;
    if (p.vmax > 0.0) jp["vmax"] = p.vmax;
    jp["options"] = json::array();
    for (const ResistanceOption& o : p.options) {
      json jo;
      jo["resistance"] = o.resistance;
      if (o.diameter) jo["diameter"] = *o.diameter;
      jo["cost"] = o.cost;
      if (o.has_flow_bounds) {
        jo["qmax_pos"] = o.qmax_pos;
        jo["qmax_neg"] = o.qmax_neg;
      }
      jp["options"].push_back(std::move(jo));
    }
    doc["pipes"].push_back(std::move(jp));
  }
  return doc;
}

Network derive_bounds(Network net) {
  const double h_src = net.max_source_head();
  for (Node& n : net.nodes) {
    if (n.is_reservoir()) continue;
    if (!n.has_head_ub) {
      n.head_ub = h_src;
      n.has_head_ub = true;
    }
    if (n.head_lb > n.head_ub)
      throw ValidationError("junction '" + n.id + "': head_min exceeds max source head");
  }

  auto head_lb = [&](int i) {
    return net.nodes[i].is_reservoir() ? net.nodes[i].fixed_head : net.nodes[i].head_lb;
  };
  auto head_ub = [&](int i) {
    return net.nodes[i].is_reservoir() ? net.nodes[i].fixed_head : net.nodes[i].head_ub;
  };

  double capacity = 0.0;
  for (Pipe& p : net.pipes) {
    for (ResistanceOption& o : p.options) {
      if (!o.has_flow_bounds) {
        if (!o.diameter)
          throw ValidationError("pipe '" + p.id +
                                "': option without diameter needs explicit flow bounds");
        if (*o.diameter <= 0.0)
          throw ValidationError("pipe '" + p.id + "': diameter must be positive");
        if (p.vmax <= 0.0)
          throw ValidationError("pipe '" + p.id + "': vmax required to derive flow bounds");
        double q = std::numbers::pi / 4.0 * p.vmax * (*o.diameter) * (*o.diameter);
        o.qmax_pos = q;
        o.qmax_neg = q;
        o.has_flow_bounds = true;
      }
      o.dhmax_pos = std::max(0.0, head_ub(p.tail) - head_lb(p.head));
      o.dhmax_neg = std::max(0.0, head_ub(p.head) - head_lb(p.tail));
    }
  }
  for (int s : net.reservoirs())
    for (int a : net.out_arcs(s)) {
      double best = 0.0;
      for (const ResistanceOption& o : net.pipes[a].options)
        best = std::max(best, o.qmax_pos);
      capacity += best;
    }
  if (capacity < net.total_demand())
    throw ValidationError("total demand exceeds source delivery capacity");

  net.bounds_derived = true;
  return net;
}

Network scale_demands(Network net, double factor) {
  if (factor <= 0.0) throw ValidationError("demand scaling factor must be positive");
  for (Node& n : net.nodes)
    if (!n.is_reservoir()) n.demand *= factor;
  net.finalize();
  return net;
}

double design_cost(const Network& net, const DesignVector& design) {
  double cost = 0.0;
  for (size_t a = 0; a < net.pipes.size(); ++a)
    cost += net.pipes[a].length * net.pipes[a].options.at(design.choice.at(a)).cost;
  return cost;
}

DesignVector parse_design(const std::filesystem::path& path, const Network& net) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open design file '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError("invalid JSON in '" + path.string() + "': " + e.what());
  }
  const json& choice = doc.contains("choice") ? doc.at("choice") : doc;
  if (!choice.is_object()) throw ParseError("design must map pipe id to option index");
  DesignVector design;
  design.choice.assign(net.pipes.size(), -1);
  for (size_t a = 0; a < net.pipes.size(); ++a) {
    const Pipe& p = net.pipes[a];
    if (!choice.contains(p.id))
      throw ParseError("design is missing pipe '" + p.id + "'");
    int k = choice.at(p.id).get<int>();
    if (k < 0 || k >= static_cast<int>(p.options.size()))
      throw ParseError("design option index out of range for pipe '" + p.id + "'");
    design.choice[a] = k;
  }
  return design;
}

json design_to_json(const Network& net, const DesignVector& design) {
  json choice = json::object();
  for (size_t a = 0; a < net.pipes.size(); ++a)
    choice[net.pipes[a].id] = design.choice.at(a);
  json doc;
  doc["choice"] = std::move(choice);
  return doc;
}

}  // namespace wdn
