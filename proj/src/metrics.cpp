#include "shardlearn/metrics.hpp"

namespace shardlearn {

static bool is_power_of_two(uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }

void Metrics::record(double yhat, double y) {
  ++n_seen;
  double r = yhat - y;
  sq_loss_sum += r * r;
  if ((yhat >= 0.5) == (y >= 0.5)) ++correct;
  if (keep_log) log.push_back({n_seen, yhat, y});
  if (is_power_of_two(n_seen)) rows.push_back({n_seen, sq_loss_sum, correct});
}

}  // namespace shardlearn
