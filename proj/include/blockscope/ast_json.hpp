#pragma once

// JSON form of the normalized AST, used by `inspect` and the AST round-trip.

#include <nlohmann/json.hpp>

#include "blockscope/model.hpp"

namespace blockscope {

using Json = nlohmann::ordered_json;

Json to_json(const Block& block);
Json to_json(const Script& script);
Json to_json(const Sprite& sprite);
Json to_json(const Project& project);

// Inverse of to_json(Project). Throws std::runtime_error on schema mismatch.
Project project_from_json(const Json& j);

}  // namespace blockscope
