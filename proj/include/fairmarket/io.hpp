#pragma once

// Market files and reports. Both are JSON documents.
//
// Market file:
//   {
//     "format_version": 1,
//     "tree":   [ {"id": "r", "parent": null, "prob": 1}, {"id": "u", "parent": "r", "prob": 0.5}, ... ],
//     "assets": [ {"name": "bond", "prices": {"r": 1, "u": 1, ...}}, ... ],
//     "claims": [ {"name": "call", "payoff": {"u": 1, "d": 0}} ],   (optional)
//     "metadata": { ... }                                           (optional, free-form)
//   }
//
// Tree entries are in document order, parents first. Price maps must name
// every node exactly once and payoff maps every leaf exactly once. Unknown
// keys are rejected.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairmarket/errors.hpp"
#include "fairmarket/market.hpp"
#include "json.hpp"

namespace fm {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Schema or syntax error; the message starts with "source:line:" when the
/// offending value can be located and always names the JSON pointer.
class ParseError : public ModelError {
 public:
  using ModelError::ModelError;
};

struct MarketDocument {
  MarketModel model;
  std::vector<Claim> claims;
  Json metadata;

  /// Throws ModelError if no claim has this name.
  const Claim& claim(std::string_view name) const;
};

MarketDocument parse_market_text(std::string_view text, std::string_view source = "<input>");
MarketDocument parse_market(const std::filesystem::path& path);

Json market_to_json(const MarketModel& model, std::span<const Claim> claims = {}, const Json& metadata = nullptr);
std::string serialize_market(const MarketModel& model, std::span<const Claim> claims = {},
                             const Json& metadata = nullptr);

/// FNV-1a 64-bit digest as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace fm
