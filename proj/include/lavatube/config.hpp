#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "lavatube/mission.hpp"

namespace lavatube {

/// Parse or validation failure; the message names the offending key.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat `dotted.key = value` text. `#` starts a comment; lists are comma separated. Unknown or
/// repeated keys, malformed values and invariant violations throw ConfigError. Keys not given keep
/// their defaults.
MissionConfig parse_config(const std::string& text);
MissionConfig load_config(const std::filesystem::path& path);

/// Sets one key on an existing config (no validation).
void set_config_value(MissionConfig& cfg, const std::string& key, const std::string& value);

/// Every key in a fixed order.
std::vector<std::string> config_keys();

/// Every key with its resolved value; parse_config(echo_config(c)) reproduces c exactly.
std::string echo_config(const MissionConfig& cfg);

/// 64-bit FNV-1a of echo_config, as 16 hex digits.
std::string config_hash(const MissionConfig& cfg);

}  // namespace lavatube
