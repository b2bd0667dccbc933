#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bandit/experiment.hpp"

namespace bandit {

/// Parses `key = value` lines; `#` starts a comment. Unknown keys, malformed
/// lines, duplicate keys and bad values raise ConfigError with the line number.
/// Keys absent from the text keep their current value in `config`.
void apply_config_text(ExperimentConfig& config, std::string_view text,
                       std::string_view origin = "config");
ExperimentConfig load_config(const std::filesystem::path& path);
/// Sets one key; throws ConfigError for unknown keys or bad values.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);
/// Every documented key with its resolved value, one per line, fixed order.
std::string config_to_text(const ExperimentConfig& config);
std::vector<std::string> config_keys();

Objective parse_objective(std::string_view s);
CvMode parse_cv_mode(std::string_view s);
PairFeedbackKind parse_pair_feedback(std::string_view s);
std::string_view to_string(Objective o);
std::string_view to_string(CvMode m);
std::string_view to_string(PairFeedbackKind k);

}  // namespace bandit
