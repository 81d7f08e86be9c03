#pragma once

// Control-flow graphs for scripts and whole projects.
//
// A script graph has a synthetic Entry and Exit node and one node per
// statement block (the hat included; reporters are not nodes). Graphs are
// multigraphs: an `if` with an empty body has two parallel edges to its
// successor, which keeps E - N + 2 equal to decisions + 1.
//
// The interprocedural graph joins all scripts of a project:
//   ProgramStart -> Entry of every script started by the user or runtime
//                   (green flag, key, click, backdrop switch, sensor hats)
//   broadcast site -> Entry of every matching `when I receive` script
//   create-clone site -> Entry of the target sprite's `when I start as a clone`
//   procedure call -> Entry of the matching definition in the same sprite
//   Exit of every script reachable from ProgramStart -> ProgramEnd
// ProgramEnd exists only when at least one script is reachable. Scripts run
// as parallel paths between ProgramStart and ProgramEnd, so each one adds its
// own independent paths to E - N + 2P.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "blockscope/model.hpp"

namespace blockscope {

enum class NodeKind { Entry, Exit, Block, ProgramStart, ProgramEnd };
enum class EdgeKind { Flow, Start, End, Broadcast, Clone, Call };

struct CfgNode {
  NodeKind kind = NodeKind::Block;
  std::string opcode;  // Block nodes only
  bool decision = false;
  std::optional<std::size_t> script;  // index into InterproceduralCfg::scripts
};

struct CfgEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  EdgeKind kind = EdgeKind::Flow;
  friend bool operator==(const CfgEdge&, const CfgEdge&) = default;
};

struct ScriptCfg {
  std::vector<CfgNode> nodes;
  std::vector<CfgEdge> edges;
  std::size_t entry = 0;
  std::size_t exit = 1;

  // E - N + 2.
  long cyclomatic() const {
    return static_cast<long>(edges.size()) - static_cast<long>(nodes.size()) + 2;
  }
  std::size_t decision_count() const;
};

ScriptCfg build_script_cfg(const Script& script);

struct ScriptRef {
  std::string sprite;
  std::size_t sprite_index = 0;  // 0 = stage, i+1 = project.sprites[i]
  std::size_t script_index = 0;
  std::size_t entry = 0;
  std::size_t exit = 0;
};

struct InterproceduralCfg {
  std::vector<CfgNode> nodes;
  std::vector<CfgEdge> edges;
  std::vector<ScriptRef> scripts;
  std::size_t program_start = 0;
  std::optional<std::size_t> program_end;
  std::vector<std::string> diagnostics;  // e.g. broadcasts without receivers

  std::size_t cross_edge_count() const;
};

InterproceduralCfg build_interprocedural_cfg(const Project& project);

// Weakly connected components (ProgramStart included, so never 0).
std::size_t connected_components(const InterproceduralCfg& icfg);

// E - N + 2P on the interprocedural graph.
long interprocedural_cyclomatic(const InterproceduralCfg& icfg);

std::string to_dot(const ScriptCfg& cfg, const std::string& name = "script");
std::string to_dot(const InterproceduralCfg& icfg, const std::string& name = "project");

}  // namespace blockscope
