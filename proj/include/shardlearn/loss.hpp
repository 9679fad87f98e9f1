#pragma once

namespace shardlearn {

enum class LossKind { Squared };

struct LossSpec {
  LossKind kind = LossKind::Squared;
};

struct LossEval {
  double value;  // loss at (yhat, y)
  double d1;     // d loss / d yhat
  double d2;     // d^2 loss / d yhat^2
};

// Squared loss: 1/2 (yhat - y)^2.
LossEval loss_eval(const LossSpec& loss, double yhat, double y);

}  // namespace shardlearn
