#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gnids/netflow.hpp"

namespace gnids {

enum class AttackPattern { scan, ddos, beacon };

AttackPattern attack_pattern_from_string(const std::string& s);
const char* to_string(AttackPattern p);

/// Desk-scale labeled traffic generator.
///
/// Benign flows connect random host pairs on common service ports as
/// established sessions: duration 0.2+LN(0.5,1.6) s, tot_packets
/// 3+LN(1.8,1.5), kilobyte-scale payloads (out_bytes 3000+LN(8.3,1.3),
/// in_bytes 4000+LN(8.8,1.3)), a 1% population of tiny DNS-style flows at
/// the low end of the byte range and a 1% population of long-lived bulk
/// sessions stretching the duration/packet scales. Malicious flows follow
/// the configured pattern:
///   scan   - short probes from compromised hosts to many (host, service
///            port) targets, sent as retry pairs per target
///   ddos   - floods from all compromised hosts to one victim host
///   beacon - periodic fixed-size flows from each compromised host to its
///            command server
/// Two extra features are emitted: a flag-ratio style statistic and a
/// uniform noise column; neither carries class signal.
struct SynthConfig {
  int n_hosts = 50;
  int n_compromised = 2;
  int benign_flows = 2000;
  int malicious_flows = 200;
  AttackPattern attack_pattern = AttackPattern::scan;
  uint64_t seed = 1;
};

std::vector<NetflowRecord> synth_generate(const SynthConfig& cfg);

}  // namespace gnids
