#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "shardlearn/metrics.hpp"

namespace shardlearn {

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

// Strict full-token parse; returns false on trailing garbage or empty input.
bool parse_double(std::string_view s, double& out);
bool parse_u64(std::string_view s, uint64_t& out);

// Metrics CSV: header then one row per power-of-two instance count, plus a
// final row when the run did not end on one. rule/shards/tau repeat per row.
void write_metrics_csv(std::ostream& os, const Metrics& m, std::string_view rule,
                       unsigned shards, uint64_t tau);

// Regret CSV: tau,T,R,L,regret,bound rows.
struct RegretRow {
  uint64_t tau, T;
  double R, L, regret, bound;
};
void write_regret_csv(std::ostream& os, const std::vector<RegretRow>& rows);

}  // namespace shardlearn
