#pragma once

#include <cstdint>

namespace shardlearn {

enum class ScheduleKind {
  Power,           // lambda / sqrt(t + t0)
  WorstCaseDelay,  // R / (L * sqrt(2 * tau * t))
  StronglyConvex,  // 1 / (c * (t - tau)), defined for t > tau
};

struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::Power;
  double lambda = 1.0;
  double t0 = 0.0;
  double R = 1.0;
  double L = 1.0;
  double c = 1.0;
  uint64_t tau = 0;
};

ScheduleSpec power_schedule(double lambda, double t0);
ScheduleSpec worst_case_delay_schedule(double R, double L, uint64_t tau);
ScheduleSpec strongly_convex_schedule(double c, uint64_t tau);

// Throws ConfigError on invalid parameters.
void validate(const ScheduleSpec& s);

// Learning rate at step t (1-based). StronglyConvex throws std::domain_error
// for t <= tau.
double learning_rate(const ScheduleSpec& s, uint64_t t);

}  // namespace shardlearn
