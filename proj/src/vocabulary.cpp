#include "bandit/vocabulary.hpp"

#include "bandit/errors.hpp"

namespace bandit {

Vocabulary::Vocabulary() {
  for (auto t : {kStartToken, kEndToken, kUnkToken}) {
    ids_.emplace(std::string(t), static_cast<TokenId>(tokens_.size()));
    tokens_.emplace_back(t);
  }
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < kReservedTokens || tokens[kStartId] != kStartToken ||
      tokens[kEndId] != kEndToken || tokens[kUnkId] != kUnkToken)
    throw FormatError("vocabulary must begin with the reserved tokens <s> </s> <unk>");
  Vocabulary v;
  for (std::size_t i = kReservedTokens; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) throw FormatError("duplicate vocabulary token '" + tokens[i] + "'");
    v.add(tokens[i]);
  }
  return v;
}

TokenId Vocabulary::add(std::string_view token) {
  auto it = ids_.find(std::string(token));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<TokenId>(tokens_.size());
  ids_.emplace(std::string(token), id);
  tokens_.emplace_back(token);
  return id;
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.find(std::string(token)) != ids_.end();
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size())
    throw IndexError("token id " + std::to_string(id) + " outside vocabulary of size " +
                     std::to_string(tokens_.size()));
  return tokens_[id];
}

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> words) const {
  std::vector<TokenId> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(id(w));
  return out;
}

std::vector<std::string> Vocabulary::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(token(id));
  return out;
}

bool is_reserved_token(std::string_view token) {
  return token == kStartToken || token == kEndToken || token == kUnkToken;
}

std::vector<TokenId> strip_markers(std::span<const TokenId> ids) {
  std::vector<TokenId> out;
  std::size_t i = 0;
  if (!ids.empty() && ids[0] == kStartId) i = 1;
  for (; i < ids.size() && ids[i] != kEndId; ++i) out.push_back(ids[i]);
  return out;
}

}  // namespace bandit
