#include "gnids/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gnids/rng.hpp"

namespace gnids {

AttackPattern attack_pattern_from_string(const std::string& s) {
  if (s == "scan") return AttackPattern::scan;
  if (s == "ddos") return AttackPattern::ddos;
  if (s == "beacon") return AttackPattern::beacon;
  throw std::runtime_error("unknown attack pattern '" + s + "' (expected scan, ddos or beacon)");
}

const char* to_string(AttackPattern p) {
  switch (p) {
    case AttackPattern::scan: return "scan";
    case AttackPattern::ddos: return "ddos";
    case AttackPattern::beacon: return "beacon";
  }
  return "?";
}

namespace {

const int kServicePorts[] = {80, 443, 53, 22, 25, 8080};

std::string host_ip(int i) {
  return "10.0." + std::to_string(i / 250) + "." + std::to_string(i % 250 + 1);
}

int ephemeral_port(Rng& rng) {
  return std::uniform_int_distribution<int>(49152, 65535)(rng);
}

int service_port(Rng& rng) {
  return kServicePorts[std::uniform_int_distribution<int>(0, 5)(rng)];
}

double lognormal(Rng& rng, double mu, double sigma) {
  return std::lognormal_distribution<double>(mu, sigma)(rng);
}

double clamp01_normal(Rng& rng, double mean, double sd) {
  return std::clamp(std::normal_distribution<double>(mean, sd)(rng), 0.0, 1.0);
}

}  // namespace

std::vector<NetflowRecord> synth_generate(const SynthConfig& cfg) {
  if (cfg.n_hosts < 2 || cfg.n_compromised < 1 || cfg.benign_flows < 1 || cfg.malicious_flows < 1)
    throw std::runtime_error("synth_generate: counts must be positive");
  if (cfg.n_compromised >= cfg.n_hosts)
    throw std::runtime_error("synth_generate: n_compromised must be < n_hosts");

  Rng rng(derive_seed(cfg.seed, "synth"));

  std::vector<int> comp =
      sample_without_replacement(cfg.n_hosts, cfg.n_compromised, rng);
  std::sort(comp.begin(), comp.end());
  std::vector<bool> is_comp(cfg.n_hosts, false);
  for (int c : comp) is_comp[c] = true;

  std::vector<NetflowRecord> out;
  out.reserve(cfg.benign_flows + cfg.malicious_flows);

  std::uniform_int_distribution<int> any_host(0, cfg.n_hosts - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int i = 0; i < cfg.benign_flows; ++i) {
    NetflowRecord r;
    int src = any_host(rng);
    int dst = any_host(rng);
    while (dst == src) dst = any_host(rng);
    r.src_ip = host_ip(src);
    r.src_port = ephemeral_port(rng);
    r.dst_ip = host_ip(dst);
    r.dst_port = service_port(rng);
    // Established sessions: at least a handshake of delay and a few
    // packets, kilobyte-scale payloads. A 1% population of tiny DNS-style
    // flows sits at the low end of the byte range, and another 1% of
    // long-lived bulk sessions (idle tunnels, backups) stretches the
    // duration and packet scales far beyond the typical flow.
    r.duration = 0.2 + lognormal(rng, 0.5, 1.6);
    if (unit(rng) < 0.01) {
      r.out_bytes = std::round(20.0 + 100.0 * unit(rng));
      r.in_bytes = std::round(100.0 * unit(rng));
    } else {
      r.out_bytes = std::round(3000.0 + lognormal(rng, 8.3, 1.3));
      r.in_bytes = std::round(4000.0 + lognormal(rng, 8.8, 1.3));
    }
    r.tot_packets = 3.0 + std::round(lognormal(rng, 1.8, 1.5));
    if (unit(rng) < 0.01) {
      r.duration = 20000.0 + 40000.0 * unit(rng);
      r.tot_packets = std::round(5000.0 + 45000.0 * unit(rng));
    }
    r.extra_features = {clamp01_normal(rng, 0.40, 0.20), unit(rng)};
    r.label = Label::benign;
    out.push_back(std::move(r));
  }

  const std::string pattern_name = to_string(cfg.attack_pattern);
  std::uniform_int_distribution<int> any_comp(0, cfg.n_compromised - 1);

  // ddos: one uncompromised victim for the whole campaign.
  int ddos_victim = -1;
  if (cfg.attack_pattern == AttackPattern::ddos) {
    do { ddos_victim = any_host(rng); } while (is_comp[ddos_victim]);
  }
  // beacon: one command server per compromised host.
  std::vector<int> beacon_server(cfg.n_compromised, -1);
  if (cfg.attack_pattern == AttackPattern::beacon) {
    for (int k = 0; k < cfg.n_compromised; ++k) {
      int s;
      do { s = any_host(rng); } while (s == comp[k]);
      beacon_server[k] = s;
    }
  }

  // scan probes come in retry pairs against one (host, port) target, as SYN
  // scanners retransmit unanswered probes; both probes leave the same
  // scanning host on fresh ephemeral ports.
  int scan_target_host = -1;
  int scan_target_port = 0;
  int scan_target_src = 0;
  for (int i = 0; i < cfg.malicious_flows; ++i) {
    NetflowRecord r;
    int ck = any_comp(rng);
    r.label = Label::malicious;
    r.attack_name = pattern_name;
    switch (cfg.attack_pattern) {
      case AttackPattern::scan: {
        if (i % 2 == 0) {
          scan_target_src = ck;
          int dst = any_host(rng);
          while (dst == comp[scan_target_src]) dst = any_host(rng);
          scan_target_host = dst;
          scan_target_port = service_port(rng);
        }
        r.src_ip = host_ip(comp[scan_target_src]);
        r.src_port = ephemeral_port(rng);
        r.dst_ip = host_ip(scan_target_host);
        r.dst_port = scan_target_port;
        r.duration = 0.05 * unit(rng);
        r.out_bytes = 40.0 + std::floor(21.0 * unit(rng));
        bool answered = unit(rng) > 0.6;
        r.in_bytes = answered ? 40.0 + std::floor(21.0 * unit(rng)) : 0.0;
        r.tot_packets = answered ? 2.0 : 1.0;
        r.extra_features = {clamp01_normal(rng, 0.40, 0.20), unit(rng)};
        break;
      }
      case AttackPattern::ddos: {
        r.src_ip = host_ip(comp[ck]);
        r.src_port = ephemeral_port(rng);
        r.dst_ip = host_ip(ddos_victim);
        r.dst_port = 80;
        r.duration = 0.1 * unit(rng);
        r.out_bytes = std::round(200.0 + 1200.0 * unit(rng));
        r.in_bytes = 0.0;
        r.tot_packets = 1.0 + std::floor(3.0 * unit(rng));
        r.extra_features = {clamp01_normal(rng, 0.40, 0.20), unit(rng)};
        break;
      }
      case AttackPattern::beacon: {
        r.src_ip = host_ip(comp[ck]);
        r.src_port = ephemeral_port(rng);
        r.dst_ip = host_ip(beacon_server[ck]);
        r.dst_port = 443;
        r.duration = std::max(0.0, 0.5 + 0.02 * std::normal_distribution<double>(0, 1)(rng));
        r.out_bytes = std::round(300.0 + 10.0 * std::normal_distribution<double>(0, 1)(rng));
        r.in_bytes = std::round(200.0 + 10.0 * std::normal_distribution<double>(0, 1)(rng));
        r.tot_packets = std::max(1.0, std::round(6.0 + std::normal_distribution<double>(0, 1)(rng)));
        r.extra_features = {clamp01_normal(rng, 0.40, 0.20), unit(rng)};
        break;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace gnids
