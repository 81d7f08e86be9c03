#include "blockscope/cfg.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <queue>
#include <sstream>

namespace blockscope {

namespace {

class ScriptBuilder {
 public:
  explicit ScriptBuilder(ScriptCfg& g) : g_(g) {}

  std::size_t add(NodeKind kind, const std::string& opcode = {}) {
    g_.nodes.push_back(CfgNode{kind, opcode, is_decision(opcode), std::nullopt});
    return g_.nodes.size() - 1;
  }

  void connect(const std::vector<std::size_t>& preds, std::size_t to) {
    for (std::size_t p : preds) g_.edges.push_back(CfgEdge{p, to, EdgeKind::Flow});
  }

  // Returns the nodes whose control falls through past the end of `seq`.
  std::vector<std::size_t> emit(const BlockSeq& seq, std::vector<std::size_t> preds) {
    for (const Block& b : seq) preds = emit(b, preds);
    return preds;
  }

  std::vector<std::size_t> emit(const Block& b, const std::vector<std::size_t>& preds) {
    const std::size_t n = add(NodeKind::Block, b.opcode);
    connect(preds, n);
    static const BlockSeq kEmpty;
    auto sub = [&](std::size_t i) -> const BlockSeq& { return i < b.substacks.size() ? b.substacks[i] : kEmpty; };

    if (b.opcode == "control_if") {
      auto outs = emit(sub(0), {n});
      outs.push_back(n);
      return outs;
    }
    if (b.opcode == "control_if_else") {
      auto outs = emit(sub(0), {n});
      auto other = emit(sub(1), {n});
      outs.insert(outs.end(), other.begin(), other.end());
      return outs;
    }
    if (b.opcode == "control_repeat" || b.opcode == "control_repeat_until" || b.opcode == "control_forever") {
      connect(emit(sub(0), {n}), n);
      return {n};
    }
    if (b.opcode == "control_wait_until") {
      connect({n}, n);
      return {n};
    }
    return {n};
  }

 private:
  ScriptCfg& g_;
};

bool starts_from_program(std::string_view hat) {
  return hat == "event_whenflagclicked" || hat == "event_whenkeypressed" || hat == "event_whenthisspriteclicked" ||
         hat == "event_whenstageclicked" || hat == "event_whenbackdropswitchesto" || hat == "event_whengreaterthan";
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct Located {
  std::size_t node;
  const Block* block;
  std::size_t script;
};

void collect_statements(const BlockSeq& seq, std::vector<const Block*>& out) {
  for (const Block& b : seq) {
    out.push_back(&b);
    for (const BlockSeq& s : b.substacks) collect_statements(s, out);
  }
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

const char* edge_style(EdgeKind k) {
  switch (k) {
    case EdgeKind::Flow: return "";
    case EdgeKind::Start: return " [style=dashed]";
    case EdgeKind::End: return " [style=dashed]";
    case EdgeKind::Broadcast: return " [color=orange,label=\"broadcast\"]";
    case EdgeKind::Clone: return " [color=blue,label=\"clone\"]";
    case EdgeKind::Call: return " [color=darkgreen,label=\"call\"]";
  }
  return "";
}

std::string node_label(const CfgNode& n) {
  switch (n.kind) {
    case NodeKind::Entry: return "Entry";
    case NodeKind::Exit: return "Exit";
    case NodeKind::ProgramStart: return "ProgramStart";
    case NodeKind::ProgramEnd: return "ProgramEnd";
    case NodeKind::Block: return n.opcode;
  }
  return "";
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::size_t ScriptCfg::decision_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const CfgNode& n) { return n.decision; }));
}

ScriptCfg build_script_cfg(const Script& script) {
  ScriptCfg g;
  ScriptBuilder b(g);
  g.entry = b.add(NodeKind::Entry);
  g.exit = b.add(NodeKind::Exit);
  auto outs = b.emit(script.hat, {g.entry});
  outs = b.emit(script.body, outs);
  b.connect(outs, g.exit);
  return g;
}

std::size_t InterproceduralCfg::cross_edge_count() const {
  return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [](const CfgEdge& e) {
    return e.kind == EdgeKind::Broadcast || e.kind == EdgeKind::Clone || e.kind == EdgeKind::Call;
  }));
}

InterproceduralCfg build_interprocedural_cfg(const Project& project) {
  InterproceduralCfg g;
  g.nodes.push_back(CfgNode{NodeKind::ProgramStart, {}, false, std::nullopt});
  g.program_start = 0;

  // Per script: statement blocks in CFG construction order, matched to node ids.
  std::vector<Located> statements;
  const auto all = targets(project);
  for (std::size_t t = 0; t < all.size(); ++t) {
    const Sprite& sprite = *all[t];
    for (std::size_t si = 0; si < sprite.scripts.size(); ++si) {
      const Script& script = sprite.scripts[si];
      ScriptCfg local = build_script_cfg(script);
      const std::size_t offset = g.nodes.size();
      const std::size_t script_id = g.scripts.size();
      for (CfgNode n : local.nodes) {
        n.script = script_id;
        g.nodes.push_back(std::move(n));
      }
      for (const CfgEdge& e : local.edges) g.edges.push_back(CfgEdge{e.from + offset, e.to + offset, EdgeKind::Flow});
      g.scripts.push_back(ScriptRef{sprite.name, t, si, local.entry + offset, local.exit + offset});

      // ScriptBuilder numbers block nodes in the same pre-order as this walk.
      std::vector<const Block*> blocks{&script.hat};
      collect_statements(script.body, blocks);
      std::size_t node = offset + 2;
      for (const Block* b : blocks) statements.push_back(Located{node++, b, script_id});
    }
  }

  auto sprite_of = [&](std::size_t script_id) { return g.scripts[script_id].sprite_index; };
  auto hat_of = [&](std::size_t script_id) -> const Block& {
    const ScriptRef& r = g.scripts[script_id];
    return all[r.sprite_index]->scripts[r.script_index].hat;
  };

  for (std::size_t s = 0; s < g.scripts.size(); ++s) {
    if (starts_from_program(hat_of(s).opcode)) g.edges.push_back(CfgEdge{g.program_start, g.scripts[s].entry, EdgeKind::Start});
  }

  for (const Located& site : statements) {
    const Block& b = *site.block;
    if (b.opcode == "event_broadcast" || b.opcode == "event_broadcastandwait") {
      auto message = menu_value(b, "BROADCAST_INPUT");
      if (!message) {
        g.diagnostics.push_back("computed broadcast message in " + g.scripts[site.script].sprite + " cannot be linked");
        continue;
      }
      bool linked = false;
      for (std::size_t s = 0; s < g.scripts.size(); ++s) {
        const Block& hat = hat_of(s);
        if (hat.opcode != "event_whenbroadcastreceived") continue;
        auto received = menu_value(hat, "BROADCAST_OPTION");
        if (received && lower(*received) == lower(*message)) {
          g.edges.push_back(CfgEdge{site.node, g.scripts[s].entry, EdgeKind::Broadcast});
          linked = true;
        }
      }
      if (!linked) g.diagnostics.push_back("broadcast '" + *message + "' has no receiver");
    } else if (b.opcode == "control_create_clone_of") {
      auto target = menu_value(b, "CLONE_OPTION");
      std::optional<std::size_t> sprite_index;
      if (target && *target == "_myself_") {
        sprite_index = sprite_of(site.script);
      } else if (target) {
        for (std::size_t t = 0; t < all.size(); ++t) {
          if (!all[t]->is_stage && all[t]->name == *target) sprite_index = t;
        }
      }
      bool linked = false;
      if (sprite_index) {
        for (std::size_t s = 0; s < g.scripts.size(); ++s) {
          if (sprite_of(s) == *sprite_index && hat_of(s).opcode == "control_start_as_clone") {
            g.edges.push_back(CfgEdge{site.node, g.scripts[s].entry, EdgeKind::Clone});
            linked = true;
          }
        }
      }
      if (!linked) g.diagnostics.push_back("create clone of '" + target.value_or("?") + "' has no clone script");
    } else if (b.opcode == "procedures_call") {
      auto proc = menu_value(b, "PROCCODE");
      for (std::size_t s = 0; proc && s < g.scripts.size(); ++s) {
        const Block& hat = hat_of(s);
        if (sprite_of(s) == sprite_of(site.script) && hat.opcode == "procedures_definition" &&
            menu_value(hat, "PROCCODE") == proc) {
          g.edges.push_back(CfgEdge{site.node, g.scripts[s].entry, EdgeKind::Call});
        }
      }
    }
  }

  // Join every script reachable from ProgramStart at a single ProgramEnd.
  std::vector<std::vector<std::size_t>> adj(g.nodes.size());
  for (const CfgEdge& e : g.edges) adj[e.from].push_back(e.to);
  std::vector<bool> seen(g.nodes.size(), false);
  std::queue<std::size_t> q;
  q.push(g.program_start);
  seen[g.program_start] = true;
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop();
    for (std::size_t v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        q.push(v);
      }
    }
  }
  std::vector<std::size_t> reachable_exits;
  for (const ScriptRef& r : g.scripts) {
    if (seen[r.entry]) reachable_exits.push_back(r.exit);
  }
  if (!reachable_exits.empty()) {
    g.nodes.push_back(CfgNode{NodeKind::ProgramEnd, {}, false, std::nullopt});
    g.program_end = g.nodes.size() - 1;
    for (std::size_t x : reachable_exits) g.edges.push_back(CfgEdge{x, *g.program_end, EdgeKind::End});
  }
  return g;
}

std::size_t connected_components(const InterproceduralCfg& icfg) {
  UnionFind uf(icfg.nodes.size());
  for (const CfgEdge& e : icfg.edges) uf.unite(e.from, e.to);
  std::size_t count = 0;
  for (std::size_t i = 0; i < icfg.nodes.size(); ++i) {
    if (uf.find(i) == i) ++count;
  }
  return count;
}

long interprocedural_cyclomatic(const InterproceduralCfg& icfg) {
  return static_cast<long>(icfg.edges.size()) - static_cast<long>(icfg.nodes.size()) +
         2 * static_cast<long>(connected_components(icfg));
}

std::string to_dot(const ScriptCfg& cfg, const std::string& name) {
  std::ostringstream out;
  out << "digraph \"" << escape(name) << "\" {\n";
  for (std::size_t i = 0; i < cfg.nodes.size(); ++i) {
    out << "  n" << i << " [label=\"" << escape(node_label(cfg.nodes[i])) << "\""
        << (cfg.nodes[i].decision ? ",shape=diamond" : "") << "];\n";
  }
  for (const CfgEdge& e : cfg.edges) out << "  n" << e.from << " -> n" << e.to << edge_style(e.kind) << ";\n";
  out << "}\n";
  return out.str();
}

std::string to_dot(const InterproceduralCfg& icfg, const std::string& name) {
  std::ostringstream out;
  out << "digraph \"" << escape(name) << "\" {\n";
  for (std::size_t s = 0; s < icfg.scripts.size(); ++s) {
    out << "  subgraph cluster_" << s << " {\n    label=\"" << escape(icfg.scripts[s].sprite) << " #"
        << icfg.scripts[s].script_index << "\";\n";
    for (std::size_t i = 0; i < icfg.nodes.size(); ++i) {
      const CfgNode& n = icfg.nodes[i];
      if (n.script != s) continue;
      out << "    n" << i << " [label=\"" << escape(node_label(n)) << "\"" << (n.decision ? ",shape=diamond" : "")
          << "];\n";
    }
    out << "  }\n";
  }
  for (std::size_t i = 0; i < icfg.nodes.size(); ++i) {
    if (!icfg.nodes[i].script) out << "  n" << i << " [label=\"" << node_label(icfg.nodes[i]) << "\",shape=box];\n";
  }
  for (const CfgEdge& e : icfg.edges) out << "  n" << e.from << " -> n" << e.to << edge_style(e.kind) << ";\n";
  out << "}\n";
  return out.str();
}

}  // namespace blockscope
