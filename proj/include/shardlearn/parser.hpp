#pragma once

#include <string_view>

#include "shardlearn/instance.hpp"

namespace shardlearn {

// Line grammar: <label> ( '|' <ns-name> ( <feature>[':'<value>] )* )+
// Tokens are whitespace separated; an omitted value means 1.0. Throws
// ParseError with the byte offset of the offending token.
Instance parse_instance(std::string_view line, uint64_t id);

}  // namespace shardlearn
