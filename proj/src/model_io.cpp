#include "shardlearn/model_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "shardlearn/errors.hpp"
#include "shardlearn/textio.hpp"

namespace shardlearn {

namespace {
constexpr std::string_view kMagic = "shardlearn-model v1 bits=";

bool stored(double v) { return std::bit_cast<uint64_t>(v) != 0; }
}  // namespace

void save_model(std::ostream& os, const WeightModel& w) {
  os << kMagic << w.bits() << '\n';
  for (uint32_t i = 0; i < w.size(); ++i) {
    if (!stored(w[i])) continue;
    os << i << ' ' << format_double(w[i]) << '\n';
  }
}

WeightModel load_model(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError(0, "empty model file");
  if (line.rfind(kMagic, 0) != 0) throw ParseError(0, "not a shardlearn model file");
  uint64_t bits = 0;
  if (!parse_u64(std::string_view(line).substr(kMagic.size()), bits) || bits < 1 || bits > 31)
    throw ParseError(kMagic.size(), "bad bits field in model header");
  WeightModel w{unsigned(bits)};
  uint64_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    size_t sp = line.find(' ');
    uint64_t index = 0;
    double value = 0.0;
    std::string_view sv(line);
    if (sp == std::string::npos || !parse_u64(sv.substr(0, sp), index) ||
        !parse_double(sv.substr(sp + 1), value))
      throw ParseError(0, "bad model line " + std::to_string(line_no));
    if (index >= w.size())
      throw ParseError(0, "model line " + std::to_string(line_no) + ": index out of range");
    w[uint32_t(index)] = value;
  }
  return w;
}

void save_model_file(const std::string& path, const WeightModel& w) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write model file: " + path);
  save_model(f, w);
  f.flush();
  if (!f) throw ConfigError("failed writing model file: " + path);
}

WeightModel load_model_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open model file: " + path);
  return load_model(f);
}

}  // namespace shardlearn
