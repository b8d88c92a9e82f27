#pragma once

#include <Eigen/Dense>
#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "gnids/netflow.hpp"

namespace gnids {

/// A graph node: one (IP, port) pair. Equality is exact pairwise equality.
struct Endpoint {
  std::string ip;
  int port = 0;
  auto operator<=>(const Endpoint&) const = default;
};

struct FlowEdge {
  int src = 0;
  int dst = 0;
  Label label = Label::benign;
  int64_t flow_id = 0;
};

/// Directed multigraph over (IP, port) endpoints; one edge per netflow,
/// carrying that flow's feature vector. Node indices are assigned in
/// first-appearance order over the input records.
struct FlowGraph {
  std::vector<Endpoint> nodes;
  std::vector<FlowEdge> edges;
  Eigen::MatrixXd edge_features;  // |E| x d, row e = features of edge e
  std::vector<int> compromised;   // sorted node indices

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
};

/// Linearized dual: one node per flow-graph edge; two nodes adjacent iff
/// their originating edges share an endpoint (direction ignored) and are
/// distinct. Adjacency lists are sorted, symmetric and self-loop free.
struct LineGraph {
  Eigen::MatrixXd node_features;  // |V| x d
  std::vector<Label> labels;
  std::vector<int64_t> flow_ids;
  std::vector<std::vector<int>> adjacency;

  int num_nodes() const { return static_cast<int>(labels.size()); }
};

/// mal_source_ips: IPs appearing as the source of any malicious netflow in
/// the dataset; every node of such an IP is marked compromised.
FlowGraph build_flow_graph(const std::vector<NetflowRecord>& records,
                           const std::set<std::string>& mal_source_ips);

/// Source IPs of malicious records, for the compromised-node rule.
std::set<std::string> malicious_source_ips(const std::vector<NetflowRecord>& records);

LineGraph linearize(const FlowGraph& g);

/// Appends new records as edges (and new endpoints as nodes) without
/// touching existing indices; returns the extended copy. flow_ids of the
/// additions continue from the current edge count.
FlowGraph apply_edge_additions(const FlowGraph& g, const std::vector<NetflowRecord>& new_records);

/// Compromised endpoints of a graph, sorted by (ip, port).
std::vector<Endpoint> compromised_endpoints(const FlowGraph& g);

/// Every endpoint present in a record list (both sides of every flow).
std::set<Endpoint> collect_endpoints(const std::vector<NetflowRecord>& records);

/// One edge per line: src_index dst_index label flow_id.
void write_edge_list(const std::string& path, const FlowGraph& g);

}  // namespace gnids
