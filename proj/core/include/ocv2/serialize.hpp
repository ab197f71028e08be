#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ocv2/env.hpp"

namespace ocv2 {

using Json = nlohmann::ordered_json;

/// Canonical state JSON. Field order: t, width, height, static (DSL rows),
/// items (row-major raw codes), timers, agents, recipe, perms,
/// delivered_signal, rng. Throws ParseError on malformed input.
Json state_to_json(const GameState& state);
GameState state_from_json(const Json& j);

/// Full config, with the layout embedded as DSL text.
Json config_to_json(const EnvConfig& config);
EnvConfig config_from_json(const Json& j);

/// Applies the keys present in `overrides` on top of `config`. "layout" may be
/// a registry name or a path; "layout_text" is inline DSL.
void apply_config_overrides(EnvConfig& config, const Json& overrides);

/// Hex digest of the canonical config JSON.
std::string config_digest(const EnvConfig& config);

std::string hex64(std::uint64_t v);
std::uint64_t parse_hex64(std::string_view s);

Json event_to_json(const Event& e);
/// Throws ParseError on an unknown type or missing field.
Event event_from_json(const Json& j);

/// 64-bit FNV-1a of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace ocv2
