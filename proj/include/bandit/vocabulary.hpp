#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bandit {

using TokenId = std::uint32_t;

inline constexpr TokenId kStartId = 0;
inline constexpr TokenId kEndId = 1;
inline constexpr TokenId kUnkId = 2;
inline constexpr std::size_t kReservedTokens = 3;

inline constexpr std::string_view kStartToken = "<s>";
inline constexpr std::string_view kEndToken = "</s>";
inline constexpr std::string_view kUnkToken = "<unk>";

/// Token <-> id bijection with START/END/UNK fixed at ids 0, 1, 2.
class Vocabulary {
 public:
  Vocabulary();
  /// Rebuilds from a token list in id order; the first three must be the
  /// reserved tokens.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  TokenId add(std::string_view token);
  std::size_t size() const noexcept { return tokens_.size(); }
  bool contains(std::string_view token) const;
  /// Id of `token`, or UNK if absent.
  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  std::vector<TokenId> encode(std::span<const std::string> words) const;
  std::vector<std::string> decode(std::span<const TokenId> ids) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

bool is_reserved_token(std::string_view token);

/// Drops a leading START and everything from the first END on.
std::vector<TokenId> strip_markers(std::span<const TokenId> ids);

}  // namespace bandit
