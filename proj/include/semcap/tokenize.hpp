#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace semcap {

using Token = std::string;

/// Splits UTF-8 text into lowercase tokens. A token is a maximal run of
/// Unicode letters and digits; every other code point separates tokens.
/// No stemming: "bus" and "buses" stay distinct. Malformed UTF-8 sequences
/// act as separators.
std::vector<Token> tokenize(std::string_view text);

}  // namespace semcap
