#include "shardlearn/schedule.hpp"

#include <cmath>
#include <stdexcept>

#include "shardlearn/errors.hpp"

namespace shardlearn {

ScheduleSpec power_schedule(double lambda, double t0) {
  ScheduleSpec s;
  s.kind = ScheduleKind::Power;
  s.lambda = lambda;
  s.t0 = t0;
  return s;
}

ScheduleSpec worst_case_delay_schedule(double R, double L, uint64_t tau) {
  ScheduleSpec s;
  s.kind = ScheduleKind::WorstCaseDelay;
  s.R = R;
  s.L = L;
  s.tau = tau;
  return s;
}

ScheduleSpec strongly_convex_schedule(double c, uint64_t tau) {
  ScheduleSpec s;
  s.kind = ScheduleKind::StronglyConvex;
  s.c = c;
  s.tau = tau;
  return s;
}

void validate(const ScheduleSpec& s) {
  switch (s.kind) {
    case ScheduleKind::Power:
      if (!(s.lambda > 0.0)) throw ConfigError("schedule lambda must be > 0");
      if (!(s.t0 >= 0.0)) throw ConfigError("schedule t0 must be >= 0");
      break;
    case ScheduleKind::WorstCaseDelay:
      if (!(s.R > 0.0)) throw ConfigError("schedule R must be > 0");
      if (!(s.L > 0.0)) throw ConfigError("schedule L must be > 0");
      if (s.tau < 1) throw ConfigError("delay schedule needs tau >= 1");
      break;
    case ScheduleKind::StronglyConvex:
      if (!(s.c > 0.0)) throw ConfigError("schedule c must be > 0");
      break;
  }
}

double learning_rate(const ScheduleSpec& s, uint64_t t) {
  switch (s.kind) {
    case ScheduleKind::Power:
      return s.lambda / std::sqrt(double(t) + s.t0);
    case ScheduleKind::WorstCaseDelay:
      return s.R / (s.L * std::sqrt(2.0 * double(s.tau) * double(t)));
    case ScheduleKind::StronglyConvex:
      if (t <= s.tau)
        throw std::domain_error("strongly convex rate undefined for t <= tau");
      return 1.0 / (s.c * double(t - s.tau));
  }
  return 0.0;  // unreachable
}

}  // namespace shardlearn
