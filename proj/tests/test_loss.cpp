#include "doctest.h"
#include "shardlearn/loss.hpp"

using namespace shardlearn;

TEST_CASE("squared loss value and derivatives") {
  LossSpec loss;
  LossEval e = loss_eval(loss, 2.0, 0.5);
  CHECK(e.value == 0.5 * 1.5 * 1.5);
  CHECK(e.d1 == 1.5);
  CHECK(e.d2 == 1.0);

  e = loss_eval(loss, -1.0, 1.0);
  CHECK(e.value == 2.0);
  CHECK(e.d1 == -2.0);
  CHECK(e.d2 == 1.0);
}

TEST_CASE("zero prediction against zero label is flat") {
  // This is the padding gradient used before any real instance arrives.
  LossEval e = loss_eval(LossSpec{}, 0.0, 0.0);
  CHECK(e.value == 0.0);
  CHECK(e.d1 == 0.0);
  CHECK(e.d2 == 1.0);
}
