#include "shardlearn/textio.hpp"

#include <charconv>
#include <ostream>

namespace shardlearn {

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_u64(std::string_view s, uint64_t& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

void write_metrics_csv(std::ostream& os, const Metrics& m, std::string_view rule,
                       unsigned shards, uint64_t tau) {
  os << "t,progressive_sq_loss,accuracy,rule,shards,tau\n";
  auto emit = [&](const MetricsRow& r) {
    os << r.t << ',' << format_double(r.sq_loss_sum / double(r.t)) << ','
       << format_double(double(r.correct) / double(r.t)) << ',' << rule << ',' << shards << ','
       << tau << '\n';
  };
  for (const auto& r : m.rows) emit(r);
  if (m.n_seen > 0 && (m.rows.empty() || m.rows.back().t != m.n_seen))
    emit({m.n_seen, m.sq_loss_sum, m.correct});
}

void write_regret_csv(std::ostream& os, const std::vector<RegretRow>& rows) {
  os << "tau,T,R,L,regret,bound\n";
  for (const auto& r : rows)
    os << r.tau << ',' << r.T << ',' << format_double(r.R) << ',' << format_double(r.L) << ','
       << format_double(r.regret) << ',' << format_double(r.bound) << '\n';
}

}  // namespace shardlearn
