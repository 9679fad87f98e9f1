#include "shardlearn/parser.hpp"

#include <set>

#include "shardlearn/errors.hpp"
#include "shardlearn/textio.hpp"

namespace shardlearn {

void validate(const InteractionSpec& q) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : q.pairs)
    if (!seen.insert(p).second)
      throw ConfigError("duplicate interaction pair " + p.first + "," + p.second);
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

struct Token {
  std::string_view text;
  size_t offset;
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    if (i >= line.size()) break;
    size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    out.push_back({line.substr(start, i - start), start});
  }
  return out;
}

}  // namespace

Instance parse_instance(std::string_view line, uint64_t id) {
  auto tokens = tokenize(line);
  if (tokens.empty()) throw ParseError(0, "empty line");

  Instance inst;
  inst.id = id;
  if (!parse_double(tokens[0].text, inst.label))
    throw ParseError(tokens[0].offset, "malformed label '" + std::string(tokens[0].text) + "'");

  size_t k = 1;
  if (k >= tokens.size())
    throw ParseError(line.size(), "expected at least one namespace");
  while (k < tokens.size()) {
    const Token& t = tokens[k];
    if (t.text.empty() || t.text[0] != '|')
      throw ParseError(t.offset, "expected '|<namespace>', got '" + std::string(t.text) + "'");
    NamespaceGroup ns;
    ns.name = std::string(t.text.substr(1));
    ++k;
    while (k < tokens.size() && tokens[k].text[0] != '|') {
      const Token& f = tokens[k];
      size_t colon = f.text.rfind(':');
      if (colon == std::string_view::npos) {
        ns.features.push_back({std::string(f.text), 1.0});
      } else {
        std::string_view value_text = f.text.substr(colon + 1);
        double v;
        if (!parse_double(value_text, v))
          throw ParseError(f.offset + colon + 1,
                           "malformed feature value '" + std::string(value_text) + "'");
        ns.features.push_back({std::string(f.text.substr(0, colon)), v});
      }
      ++k;
    }
    inst.namespaces.push_back(std::move(ns));
  }
  return inst;
}

}  // namespace shardlearn
