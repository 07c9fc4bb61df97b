#include "riverflow/network.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>

#include "riverflow/rng.hpp"
#include "riverflow/units.hpp"

namespace riverflow {

RiverNetwork RiverNetwork::from_edges(std::vector<EdgeRecord> edges) {
  const int n = static_cast<int>(edges.size());
  if (n == 0) throw ParseError(0, "network has no edges");

  int root = -1;
  std::vector<std::vector<int>> children(n);
  for (int i = 0; i < n; ++i) {
    if (!(edges[i].area_m2 > 0.0)) {
      throw ParseError(0, "edge '" + edges[i].id + "' has non-positive area");
    }
    if (edges[i].parent) {
      const int p = *edges[i].parent;
      if (p < 0 || p >= n) throw ParseError(0, "edge '" + edges[i].id + "' has invalid parent");
      if (p == i) throw ParseError(0, "edge '" + edges[i].id + "' is its own parent (cycle)");
      children[p].push_back(i);
    } else {
      if (root >= 0) {
        throw ParseError(0, "multiple roots: '" + edges[root].id + "' and '" + edges[i].id + "'");
      }
      root = i;
    }
  }
  if (root < 0) throw ParseError(0, "network has no root edge");

  // Breadth-first canonical order; unreached edges indicate a cycle.
  std::vector<int> order;
  order.reserve(n);
  std::deque<int> queue{root};
  std::vector<bool> seen(n, false);
  seen[root] = true;
  while (!queue.empty()) {
    const int e = queue.front();
    queue.pop_front();
    order.push_back(e);
    for (int c : children[e]) {
      if (seen[c]) throw ParseError(0, "cycle through edge '" + edges[c].id + "'");
      seen[c] = true;
      queue.push_back(c);
    }
  }
  if (static_cast<int>(order.size()) != n) {
    for (int i = 0; i < n; ++i) {
      if (!seen[i]) throw ParseError(0, "edge '" + edges[i].id + "' is part of a cycle");
    }
  }

  std::vector<int> new_index(n);
  for (int i = 0; i < n; ++i) new_index[order[i]] = i;

  RiverNetwork net;
  net.edges_.resize(n);
  net.tributaries_.resize(n);
  for (int i = 0; i < n; ++i) {
    EdgeRecord rec = std::move(edges[order[i]]);
    if (rec.parent) rec.parent = new_index[*rec.parent];
    net.edges_[i] = std::move(rec);
  }
  for (int i = 0; i < n; ++i) {
    if (net.edges_[i].parent) net.tributaries_[*net.edges_[i].parent].push_back(i);
  }
  return net;
}

int RiverNetwork::edge_index(const std::string& id) const {
  for (int i = 0; i < size(); ++i) {
    if (edges_[i].id == id) return i;
  }
  return -1;
}

Eigen::VectorXd RiverNetwork::areas() const {
  Eigen::VectorXd a(size());
  for (int i = 0; i < size(); ++i) a[i] = edges_[i].area_m2;
  return a;
}

double RiverNetwork::total_area() const { return areas().sum(); }

bool RiverNetwork::is_binary() const {
  return std::all_of(tributaries_.begin(), tributaries_.end(),
                     [](const std::vector<int>& t) { return t.size() <= 2; });
}

ParsedNetwork parse_network(const std::string& text) {
  struct Row {
    std::string id, parent;
    double area_km2, k_per_h, h_per_h;
    int line;
  };
  std::vector<Row> rows;
  std::map<std::string, int> by_id;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    if (kw != "edge") throw ParseError(lineno, "expected 'edge', got '" + kw + "'");
    Row r;
    r.line = lineno;
    if (!(ls >> r.id >> r.parent >> r.area_km2 >> r.k_per_h >> r.h_per_h)) {
      throw ParseError(lineno, "malformed edge line (need id parent area_km2 K_per_h H_per_h)");
    }
    std::string extra;
    if (ls >> extra) throw ParseError(lineno, "unexpected trailing field '" + extra + "'");
    if (by_id.count(r.id)) throw ParseError(lineno, "duplicate edge id '" + r.id + "'");
    if (!(r.area_km2 > 0.0)) throw ParseError(lineno, "non-positive area for edge '" + r.id + "'");
    if (!(r.k_per_h > 0.0) || !(r.h_per_h > 0.0)) {
      throw ParseError(lineno, "non-positive rate for edge '" + r.id + "'");
    }
    by_id[r.id] = static_cast<int>(rows.size());
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError(0, "no edge lines found");

  std::vector<EdgeRecord> recs(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    recs[i].id = rows[i].id;
    recs[i].area_m2 = units::km2_to_m2(rows[i].area_km2);
    if (rows[i].parent != "-") {
      auto it = by_id.find(rows[i].parent);
      if (it == by_id.end()) {
        throw ParseError(rows[i].line, "unknown parent '" + rows[i].parent + "'");
      }
      if (it->second == static_cast<int>(i)) {
        throw ParseError(rows[i].line, "edge '" + rows[i].id + "' is its own parent (cycle)");
      }
      recs[i].parent = it->second;
    }
  }

  ParsedNetwork out;
  out.net = RiverNetwork::from_edges(std::move(recs));
  const int n = out.net.size();
  out.K_per_s.resize(n);
  out.H_per_s.resize(n);
  for (int e = 0; e < n; ++e) {
    const int src = by_id.at(out.net.edge(e).id);
    out.K_per_s[e] = units::per_hour_to_per_second(rows[src].k_per_h);
    out.H_per_s[e] = units::per_hour_to_per_second(rows[src].h_per_h);
  }
  return out;
}

ParsedNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open network file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str());
}

std::string serialize_network(const RiverNetwork& net, const Eigen::VectorXd& K_per_s,
                              const Eigen::VectorXd& H_per_s) {
  std::ostringstream out;
  char buf[160];
  for (int e = 0; e < net.size(); ++e) {
    const EdgeRecord& rec = net.edge(e);
    const std::string parent = rec.parent ? net.edge(*rec.parent).id : "-";
    std::snprintf(buf, sizeof(buf), "edge %s %s %.17g %.17g %.17g\n", rec.id.c_str(),
                  parent.c_str(), units::m2_to_km2(rec.area_m2),
                  units::per_second_to_per_hour(K_per_s[e]),
                  units::per_second_to_per_hour(H_per_s[e]));
    out << buf;
  }
  return out.str();
}

Eigen::MatrixXi incidence_matrix(const RiverNetwork& net) {
  const int n = net.size();
  Eigen::MatrixXi lambda = Eigen::MatrixXi::Identity(n, n);
  for (int e = 0; e < n; ++e) {
    for (int t : net.tributaries(e)) lambda(e, t) = -1;
  }
  return lambda;
}

Eigen::MatrixXi incidence_inverse(const RiverNetwork& net) {
  const int n = net.size();
  Eigen::MatrixXi inv = Eigen::MatrixXi::Zero(n, n);
  for (int e = 0; e < n; ++e) {
    // Mark the whole subtree rooted at e.
    std::deque<int> stack{e};
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      inv(e, u) = 1;
      for (int t : net.tributaries(u)) stack.push_back(t);
    }
  }
  return inv;
}

std::vector<int> horton_orders(const RiverNetwork& net) {
  const int n = net.size();
  std::vector<int> order(n, 0);
  // Children have larger indices, so a reverse sweep is bottom-up.
  for (int e = n - 1; e >= 0; --e) {
    const auto& tribs = net.tributaries(e);
    if (tribs.empty()) {
      order[e] = 1;
      continue;
    }
    int best = 0, count = 0;
    for (int t : tribs) {
      if (order[t] > best) {
        best = order[t];
        count = 1;
      } else if (order[t] == best) {
        ++count;
      }
    }
    order[e] = count >= 2 ? best + 1 : best;
  }
  return order;
}

std::vector<int> subnetwork_indices(const RiverNetwork& net, int e) {
  if (e < 0 || e >= net.size()) throw std::out_of_range("edge index out of range");
  std::vector<int> idx;
  std::deque<int> queue{e};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    idx.push_back(u);
    for (int t : net.tributaries(u)) queue.push_back(t);
  }
  return idx;
}

RiverNetwork subnetwork(const RiverNetwork& net, int e) {
  const std::vector<int> idx = subnetwork_indices(net, e);
  std::vector<int> pos(net.size(), -1);
  for (std::size_t i = 0; i < idx.size(); ++i) pos[idx[i]] = static_cast<int>(i);

  std::vector<EdgeRecord> recs(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    recs[i] = net.edge(idx[i]);
    if (idx[i] == e) {
      recs[i].parent.reset();
    } else {
      recs[i].parent = pos[*recs[i].parent];
    }
  }
  return RiverNetwork::from_edges(std::move(recs));
}

namespace {

// Grows a subtree of exact Horton order `w` under `parent`. A link of
// order w either extends itself (keeping order w via a lower-order side
// tributary) or splits into two children of order w-1; the extension
// coin is Bernoulli(0.5) with a cap so recursion terminates.
void grow(std::vector<EdgeRecord>& edges, int parent, int w, double area_m2,
          RngStream& rng, int extensions_left) {
  const int self = static_cast<int>(edges.size());
  EdgeRecord rec;
  rec.id = "e" + std::to_string(self + 1);
  rec.area_m2 = area_m2;
  if (parent >= 0) rec.parent = parent;
  edges.push_back(rec);
  if (w == 1) return;

  const bool extend = extensions_left > 0 && rng.uniform() < 0.5;
  if (extend) {
    // Same-order continuation plus a strictly lower-order tributary.
    const int side = 1 + static_cast<int>(rng.uniform() * (w - 1));
    grow(edges, self, w, area_m2, rng, extensions_left - 1);
    grow(edges, self, std::min(side, w - 1), area_m2, rng, extensions_left);
  } else {
    grow(edges, self, w - 1, area_m2, rng, extensions_left);
    grow(edges, self, w - 1, area_m2, rng, extensions_left);
  }
}

}  // namespace

RiverNetwork generate_network(int order, std::uint64_t seed, double area_m2) {
  if (order < 1) throw std::invalid_argument("network order must be >= 1");
  RngStream rng(seed, stream_key(streams::kNetworkGen));
  std::vector<EdgeRecord> edges;
  grow(edges, -1, order, area_m2, rng, 3);
  return RiverNetwork::from_edges(std::move(edges));
}

}  // namespace riverflow
