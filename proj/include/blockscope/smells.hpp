#pragma once

// Code smell detectors.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blockscope/model.hpp"

namespace blockscope {

enum class SmellKind {
  DuplicateSprite,
  EmptySprite,
  MissingInitialization,
  SpriteNaming,
  StutteringMovement,
  CloneType1,
  CloneType2,
  CloneType3,
  DeadCode,
  EmptyScript,
  LongScript,
  MissingPenUpEraseAll,
};

inline constexpr std::size_t kSmellCount = 12;
inline constexpr std::array<SmellKind, kSmellCount> kAllSmells = {
    SmellKind::DuplicateSprite,    SmellKind::EmptySprite, SmellKind::MissingInitialization,
    SmellKind::SpriteNaming,       SmellKind::StutteringMovement, SmellKind::CloneType1,
    SmellKind::CloneType2,         SmellKind::CloneType3,  SmellKind::DeadCode,
    SmellKind::EmptyScript,        SmellKind::LongScript,  SmellKind::MissingPenUpEraseAll};

std::string_view to_string(SmellKind kind);
std::optional<SmellKind> parse_smell(std::string_view name);

struct SmellLocation {
  std::string sprite;
  std::optional<std::size_t> script;  // script index, or orphan-stack index when `orphan`
  std::optional<std::size_t> block;   // pre-order block index within that stack
  bool orphan = false;
  friend bool operator==(const SmellLocation&, const SmellLocation&) = default;
};

struct SmellFinding {
  SmellKind detector;
  SmellLocation location;
  std::string message;
  friend bool operator==(const SmellFinding&, const SmellFinding&) = default;
};

struct SmellConfig {
  std::size_t long_script_threshold = 12;  // blocks
  std::size_t clone_min_length = 6;        // blocks
  std::size_t clone_type3_max_gap = 2;     // deleted blocks

  // Throws std::invalid_argument if any threshold is 0.
  void validate() const;
};

std::vector<SmellFinding> detect_smells(const Project& project, const SmellConfig& config = {});

enum class CloneType { None, Type1, Type2, Type3 };

// Strictest clone relation between two scripts (None if either is shorter
// than clone_min_length).
CloneType classify_clone(const Script& a, const Script& b, const SmellConfig& config = {});

using SmellCounts = std::array<std::size_t, kSmellCount>;
SmellCounts count_findings(std::span<const SmellFinding> findings);

struct GroupedSmellCounts {
  std::string group;
  SmellCounts counts{};
};

// Per group: total findings / projects in the group, per detector.
std::map<std::string, std::array<double, kSmellCount>> summarize_smells(std::span<const GroupedSmellCounts> projects);

}  // namespace blockscope
