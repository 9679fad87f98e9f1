#pragma once

#include <iosfwd>
#include <string>

#include "shardlearn/model.hpp"

namespace shardlearn {

// Text model files:
//   shardlearn-model v1 bits=<b>
//   <index> <value>
// One line per weight whose stored bits are nonzero (so -0.0 is kept), in
// ascending index order, values printed as the shortest round-tripping
// decimal. Loading rebuilds the table bit for bit.
void save_model(std::ostream& os, const WeightModel& w);
WeightModel load_model(std::istream& is);

void save_model_file(const std::string& path, const WeightModel& w);
WeightModel load_model_file(const std::string& path);

}  // namespace shardlearn
