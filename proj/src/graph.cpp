#include "gnids/graph.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "gnids/preprocess.hpp"

namespace gnids {

namespace {

struct EndpointKeyHash {
  size_t operator()(const std::string& s) const { return std::hash<std::string>{}(s); }
};

std::string endpoint_key(const std::string& ip, int port) {
  return ip + ":" + std::to_string(port);
}

// Index lookup rebuilt from a graph's node list (first-appearance order is
// already frozen in the list itself).
std::unordered_map<std::string, int> node_index_of(const FlowGraph& g) {
  std::unordered_map<std::string, int> idx;
  idx.reserve(g.nodes.size() * 2);
  for (int i = 0; i < g.num_nodes(); ++i)
    idx.emplace(endpoint_key(g.nodes[i].ip, g.nodes[i].port), i);
  return idx;
}

}  // namespace

std::set<std::string> malicious_source_ips(const std::vector<NetflowRecord>& records) {
  std::set<std::string> ips;
  for (const auto& r : records)
    if (r.label == Label::malicious) ips.insert(r.src_ip);
  return ips;
}

FlowGraph build_flow_graph(const std::vector<NetflowRecord>& records,
                           const std::set<std::string>& mal_source_ips) {
  if (records.empty()) throw std::runtime_error("build_flow_graph: no records");
  size_t dim = records.front().extra_features.size();
  for (const auto& r : records)
    if (r.extra_features.size() != dim)
      throw std::runtime_error("build_flow_graph: inconsistent feature dimension");

  FlowGraph g;
  g.edge_features.resize(records.size(), 4 + dim);
  std::unordered_map<std::string, int> idx;
  idx.reserve(records.size());
  auto intern = [&](const std::string& ip, int port) {
    auto [it, inserted] = idx.emplace(endpoint_key(ip, port), g.num_nodes());
    if (inserted) g.nodes.push_back({ip, port});
    return it->second;
  };

  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    int s = intern(r.src_ip, r.src_port);
    int d = intern(r.dst_ip, r.dst_port);
    g.edges.push_back({s, d, r.label, static_cast<int64_t>(i)});
    g.edge_features.row(i) = feature_vector(r).transpose();
  }
  for (int v = 0; v < g.num_nodes(); ++v)
    if (mal_source_ips.count(g.nodes[v].ip)) g.compromised.push_back(v);
  return g;
}

LineGraph linearize(const FlowGraph& g) {
  LineGraph lg;
  lg.node_features = g.edge_features;
  lg.labels.reserve(g.num_edges());
  lg.flow_ids.reserve(g.num_edges());
  for (const auto& e : g.edges) {
    lg.labels.push_back(e.label);
    lg.flow_ids.push_back(e.flow_id);
  }
  lg.adjacency.assign(g.num_edges(), {});
  if (g.num_edges() == 0) return lg;

  // Group incident edges per endpoint; all pairs within a group are
  // adjacent. Sharing is evaluated ignoring edge direction.
  std::vector<std::vector<int>> incident(g.num_nodes());
  for (int e = 0; e < g.num_edges(); ++e) {
    incident[g.edges[e].src].push_back(e);
    if (g.edges[e].dst != g.edges[e].src) incident[g.edges[e].dst].push_back(e);
  }
  for (const auto& group : incident) {
    for (size_t a = 0; a < group.size(); ++a)
      for (size_t b = a + 1; b < group.size(); ++b) {
        lg.adjacency[group[a]].push_back(group[b]);
        lg.adjacency[group[b]].push_back(group[a]);
      }
  }
  // Parallel edges share both endpoints; dedupe the doubled pairs.
  for (auto& nbrs : lg.adjacency) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return lg;
}

FlowGraph apply_edge_additions(const FlowGraph& g, const std::vector<NetflowRecord>& new_records) {
  if (!new_records.empty() &&
      4 + static_cast<int>(new_records.front().extra_features.size()) != g.edge_features.cols())
    throw std::runtime_error("apply_edge_additions: feature dimension mismatch");

  FlowGraph out;
  out.nodes = g.nodes;
  out.edges = g.edges;
  out.edge_features.resize(g.num_edges() + new_records.size(), g.edge_features.cols());
  out.edge_features.topRows(g.num_edges()) = g.edge_features;

  auto idx = node_index_of(g);
  auto intern = [&](const std::string& ip, int port) {
    auto [it, inserted] = idx.emplace(endpoint_key(ip, port), out.num_nodes());
    if (inserted) out.nodes.push_back({ip, port});
    return it->second;
  };
  for (size_t i = 0; i < new_records.size(); ++i) {
    const auto& r = new_records[i];
    int s = intern(r.src_ip, r.src_port);
    int d = intern(r.dst_ip, r.dst_port);
    int64_t fid = g.num_edges() + static_cast<int64_t>(i);
    out.edges.push_back({s, d, r.label, fid});
    out.edge_features.row(g.num_edges() + i) = feature_vector(r).transpose();
  }

  // Recompute compromised over the union: old marks stay valid (IPs do not
  // change), new nodes inherit from the same IP rule.
  std::set<std::string> comp_ips;
  for (int v : g.compromised) comp_ips.insert(g.nodes[v].ip);
  for (const auto& r : new_records)
    if (r.label == Label::malicious) comp_ips.insert(r.src_ip);
  for (int v = 0; v < out.num_nodes(); ++v)
    if (comp_ips.count(out.nodes[v].ip)) out.compromised.push_back(v);
  return out;
}

std::vector<Endpoint> compromised_endpoints(const FlowGraph& g) {
  std::vector<Endpoint> out;
  out.reserve(g.compromised.size());
  for (int v : g.compromised) out.push_back(g.nodes[v]);
  std::sort(out.begin(), out.end());
  return out;
}

std::set<Endpoint> collect_endpoints(const std::vector<NetflowRecord>& records) {
  std::set<Endpoint> out;
  for (const auto& r : records) {
    out.insert({r.src_ip, r.src_port});
    out.insert({r.dst_ip, r.dst_port});
  }
  return out;
}

void write_edge_list(const std::string& path, const FlowGraph& g) {
  std::ofstream out(path + ".tmp");
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& e : g.edges)
    out << e.src << ' ' << e.dst << ' ' << to_string(e.label) << ' ' << e.flow_id << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
  out.close();
  std::filesystem::rename(path + ".tmp", path);
}

}  // namespace gnids
