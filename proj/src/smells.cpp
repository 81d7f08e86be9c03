#include "blockscope/smells.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

namespace blockscope {

std::string_view to_string(SmellKind kind) {
  switch (kind) {
    case SmellKind::DuplicateSprite: return "DuplicateSprite";
    case SmellKind::EmptySprite: return "EmptySprite";
    case SmellKind::MissingInitialization: return "MissingInitialization";
    case SmellKind::SpriteNaming: return "SpriteNaming";
    case SmellKind::StutteringMovement: return "StutteringMovement";
    case SmellKind::CloneType1: return "CloneType1";
    case SmellKind::CloneType2: return "CloneType2";
    case SmellKind::CloneType3: return "CloneType3";
    case SmellKind::DeadCode: return "DeadCode";
    case SmellKind::EmptyScript: return "EmptyScript";
    case SmellKind::LongScript: return "LongScript";
    case SmellKind::MissingPenUpEraseAll: return "MissingPenUpEraseAll";
  }
  return "";
}

std::optional<SmellKind> parse_smell(std::string_view name) {
  for (SmellKind k : kAllSmells) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void SmellConfig::validate() const {
  if (long_script_threshold == 0 || clone_min_length == 0 || clone_type3_max_gap == 0) {
    throw std::invalid_argument("smell thresholds must be >= 1");
  }
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// One token per block in pre-order. `shape` ignores operands (Type 2/3),
// `exact` keeps them (Type 1, duplicate sprites). Depth keeps nesting visible.
struct Token {
  std::string shape;
  std::string exact;
};

void tokenize(const Block& b, std::size_t depth, std::vector<Token>& out) {
  Token t;
  t.shape = std::to_string(depth) + ":" + b.opcode;
  t.exact = t.shape + "(";
  for (const Input& in : b.inputs) {
    t.exact += in.slot + "=";
    if (const auto* lit = std::get_if<Literal>(&in.value)) {
      t.exact += "L" + lit->text;
    } else if (const auto* menu = std::get_if<MenuSelection>(&in.value)) {
      t.exact += "M" + menu->value;
    } else {
      t.exact += "R";
    }
    t.exact += '\x1f';
  }
  t.exact += ")";
  out.push_back(std::move(t));
  for (const Input& in : b.inputs) {
    if (const auto* ref = std::get_if<BlockRef>(&in.value)) {
      for (const Block& r : ref->blocks) tokenize(r, depth + 1, out);
    }
  }
  for (const BlockSeq& sub : b.substacks) {
    for (const Block& s : sub) tokenize(s, depth + 1, out);
  }
}

std::vector<Token> tokenize(const Script& s) {
  std::vector<Token> out;
  tokenize(s.hat, 0, out);
  for (const Block& b : s.body) tokenize(b, 0, out);
  return out;
}

std::string script_key(const Script& s) {
  std::string key;
  for (const Token& t : tokenize(s)) key += t.exact + '\x1e';
  return key;
}

// Minimum number of deletions (from both sides) making the shapes equal.
std::size_t indel_distance(const std::vector<Token>& a, const std::vector<Token>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1].shape == b[j - 1].shape ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return a.size() + b.size() - 2 * prev[b.size()];
}

CloneType classify_tokens(const std::vector<Token>& a, const std::vector<Token>& b, const SmellConfig& cfg) {
  if (a.size() < cfg.clone_min_length || b.size() < cfg.clone_min_length) return CloneType::None;
  const bool same_shape = a.size() == b.size() &&
                          std::equal(a.begin(), a.end(), b.begin(), [](const Token& x, const Token& y) { return x.shape == y.shape; });
  if (same_shape) {
    const bool same_exact =
        std::equal(a.begin(), a.end(), b.begin(), [](const Token& x, const Token& y) { return x.exact == y.exact; });
    return same_exact ? CloneType::Type1 : CloneType::Type2;
  }
  const std::size_t len_gap = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
  if (len_gap > cfg.clone_type3_max_gap) return CloneType::None;
  return indel_distance(a, b) <= cfg.clone_type3_max_gap ? CloneType::Type3 : CloneType::None;
}

// Sprite-name stem with trailing digits (and a "(n)" disambiguation suffix) removed.
std::pair<std::string, bool> name_stem(const std::string& name) {
  std::string s = lower(name);
  bool suffixed = false;
  if (s.size() > 3 && s.back() == ')') {
    auto open = s.rfind(" (");
    if (open != std::string::npos &&
        std::all_of(s.begin() + static_cast<long>(open) + 2, s.end() - 1, [](unsigned char c) { return std::isdigit(c); })) {
      s.erase(open);
      suffixed = true;
    }
  }
  while (!s.empty() && std::isdigit(static_cast<unsigned char>(s.back()))) {
    s.pop_back();
    suffixed = true;
  }
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return {s, suffixed};
}

bool is_default_sprite_stem(const std::string& stem) {
  static const std::set<std::string> kDefaults{"sprite", "figur", "objeto", "lutin", "personaje", "sprite "};
  return kDefaults.contains(stem);
}

struct AttributeUse {
  std::optional<SmellLocation> first_relative;
  bool absolute = false;
};

std::optional<std::string> relative_attribute(const Block& b) {
  const std::string& op = b.opcode;
  if (op == "motion_movesteps" || op == "motion_changexby" || op == "motion_changeyby") return "position";
  if (op == "motion_turnright" || op == "motion_turnleft") return "direction";
  if (op == "looks_nextcostume") return "costume";
  if (op == "looks_nextbackdrop") return "backdrop";
  if (op == "looks_changesizeby") return "size";
  if (op == "data_changevariableby") {
    if (auto v = menu_value(b, "VARIABLE")) return "variable " + *v;
  }
  return std::nullopt;
}

std::optional<std::string> absolute_attribute(const Block& b) {
  const std::string& op = b.opcode;
  if (op == "motion_gotoxy" || op == "motion_goto" || op == "motion_setx" || op == "motion_sety" ||
      op == "motion_glidesecstoxy" || op == "motion_glideto") {
    return "position";
  }
  if (op == "motion_pointindirection" || op == "motion_pointtowards") return "direction";
  if (op == "looks_switchcostumeto") return "costume";
  if (op == "looks_switchbackdropto" || op == "looks_switchbackdroptoandwait") return "backdrop";
  if (op == "looks_setsizeto") return "size";
  if (op == "data_setvariableto") {
    if (auto v = menu_value(b, "VARIABLE")) return "variable " + *v;
  }
  return std::nullopt;
}

bool is_movement(std::string_view op) {
  return op == "motion_movesteps" || op == "motion_turnright" || op == "motion_turnleft" ||
         op == "motion_changexby" || op == "motion_changeyby";
}

// Visits blocks of a sprite with their location (pre-order index within the stack).
template <typename Fn>
void visit_located(const Sprite& s, Fn&& fn) {
  for (std::size_t i = 0; i < s.scripts.size(); ++i) {
    std::size_t k = 0;
    for_each_block(s.scripts[i], [&](const Block& b, const BlockSite&) {
      fn(b, SmellLocation{s.name, i, k++, false}, &s.scripts[i]);
    });
  }
  for (std::size_t i = 0; i < s.orphan_blocks.size(); ++i) {
    std::size_t k = 0;
    for_each_block(s.orphan_blocks[i], [&](const Block& b, const BlockSite&) {
      fn(b, SmellLocation{s.name, i, k++, true}, nullptr);
    });
  }
}

}  // namespace

CloneType classify_clone(const Script& a, const Script& b, const SmellConfig& config) {
  return classify_tokens(tokenize(a), tokenize(b), config);
}

std::vector<SmellFinding> detect_smells(const Project& project, const SmellConfig& config) {
  config.validate();
  std::vector<SmellFinding> out;
  const auto all = targets(project);

  // EmptySprite, EmptyScript, DeadCode, LongScript, StutteringMovement.
  for (const Sprite* s : all) {
    if (!s->is_stage && s->scripts.empty() && s->orphan_blocks.empty()) {
      out.push_back({SmellKind::EmptySprite, {s->name, std::nullopt, std::nullopt, false}, "sprite has no code"});
    }
    for (std::size_t i = 0; i < s->scripts.size(); ++i) {
      const Script& script = s->scripts[i];
      if (script.body.empty()) {
        out.push_back({SmellKind::EmptyScript, {s->name, i, 0, false}, "hat block without body"});
      }
      const std::size_t n = count_blocks(script);
      if (n > config.long_script_threshold) {
        out.push_back({SmellKind::LongScript, {s->name, i, 0, false},
                       std::to_string(n) + " blocks > " + std::to_string(config.long_script_threshold)});
      }
      if (script.hat.opcode == "event_whenkeypressed" && script.body.size() == 1 &&
          is_movement(script.body.front().opcode) && script.body.front().substacks.empty()) {
        out.push_back({SmellKind::StutteringMovement, {s->name, i, 1, false}, "single movement in key handler"});
      }
    }
    for (std::size_t i = 0; i < s->orphan_blocks.size(); ++i) {
      out.push_back({SmellKind::DeadCode, {s->name, i, 0, true}, "stack without hat block"});
    }
  }

  // SpriteNaming: default names, or names that only differ by a numeric suffix.
  {
    std::map<std::string, std::size_t> stem_count;
    std::map<std::string, bool> stem_suffixed;
    for (const Sprite& s : project.sprites) {
      auto [stem, suffixed] = name_stem(s.name);
      if (stem.empty()) continue;
      ++stem_count[stem];
      stem_suffixed[stem] = stem_suffixed[stem] || suffixed;
    }
    for (const Sprite& s : project.sprites) {
      auto [stem, suffixed] = name_stem(s.name);
      if (stem.empty()) continue;
      if (is_default_sprite_stem(stem)) {
        out.push_back({SmellKind::SpriteNaming, {s.name, std::nullopt, std::nullopt, false}, "default sprite name"});
      } else if (stem_count[stem] >= 2 && stem_suffixed[stem]) {
        out.push_back({SmellKind::SpriteNaming, {s.name, std::nullopt, std::nullopt, false}, "incremented sprite name"});
      }
    }
  }

  // DuplicateSprite: one finding per extra member of each equivalence class.
  {
    std::map<std::string, std::vector<const Sprite*>> classes;
    std::vector<std::string> order;
    for (const Sprite& s : project.sprites) {
      std::string key;
      if (!s.scripts.empty()) {
        std::vector<std::string> keys;
        for (const Script& sc : s.scripts) keys.push_back(script_key(sc));
        std::sort(keys.begin(), keys.end());
        key = "scripts";
        for (const std::string& k : keys) key += '\x1d' + k;
      } else {
        key = "costumes";
        for (const Asset& c : s.costumes) key += '\x1d' + c.name;
      }
      auto& members = classes[key];
      if (members.empty()) order.push_back(key);
      members.push_back(&s);
    }
    for (const std::string& key : order) {
      const auto& members = classes[key];
      for (std::size_t i = 1; i < members.size(); ++i) {
        out.push_back({SmellKind::DuplicateSprite, {members[i]->name, std::nullopt, std::nullopt, false},
                       "duplicate of " + members.front()->name});
      }
    }
  }

  // MissingInitialization: relative change without any absolute setter in the same sprite.
  for (const Sprite* s : all) {
    std::map<std::string, AttributeUse> uses;
    std::vector<std::string> order;
    visit_located(*s, [&](const Block& b, const SmellLocation& loc, const Script*) {
      if (auto attr = relative_attribute(b)) {
        auto& u = uses[*attr];
        if (!u.first_relative) {
          u.first_relative = loc;
          order.push_back(*attr);
        }
      }
      if (auto attr = absolute_attribute(b)) uses[*attr].absolute = true;
    });
    for (const std::string& attr : order) {
      const AttributeUse& u = uses[attr];
      if (!u.absolute) {
        out.push_back({SmellKind::MissingInitialization, *u.first_relative, attr + " is changed but never set"});
      }
    }
  }

  // Clones over all script pairs of the project, strictest type only.
  {
    struct Entry {
      const Sprite* sprite;
      std::size_t index;
      std::vector<Token> tokens;
    };
    std::vector<Entry> scripts;
    for (const Sprite* s : all) {
      for (std::size_t i = 0; i < s->scripts.size(); ++i) scripts.push_back({s, i, tokenize(s->scripts[i])});
    }
    for (std::size_t i = 0; i < scripts.size(); ++i) {
      for (std::size_t j = i + 1; j < scripts.size(); ++j) {
        const CloneType t = classify_tokens(scripts[i].tokens, scripts[j].tokens, config);
        if (t == CloneType::None) continue;
        const SmellKind kind = t == CloneType::Type1   ? SmellKind::CloneType1
                               : t == CloneType::Type2 ? SmellKind::CloneType2
                                                       : SmellKind::CloneType3;
        out.push_back({kind, {scripts[i].sprite->name, scripts[i].index, 0, false},
                       "clone of " + scripts[j].sprite->name + " script " + std::to_string(scripts[j].index)});
      }
    }
  }

  // MissingPenUpEraseAll is project-wide: pen-up and erase-all may live in
  // any sprite.
  {
    std::optional<SmellLocation> first_down;
    std::optional<SmellLocation> first_draw;
    bool pen_up = false;
    bool erase_on_flag = false;
    for (const Sprite* s : all) {
      visit_located(*s, [&](const Block& b, const SmellLocation& loc, const Script* script) {
        if (b.opcode == "pen_penDown" && !first_down) first_down = loc;
        if ((b.opcode == "pen_penDown" || b.opcode == "pen_stamp") && !first_draw) first_draw = loc;
        if (b.opcode == "pen_penUp") pen_up = true;
        if (b.opcode == "pen_clear" && script && script->hat.opcode == "event_whenflagclicked") erase_on_flag = true;
      });
    }
    if (first_down && !pen_up) {
      out.push_back({SmellKind::MissingPenUpEraseAll, *first_down, "pen down without pen up"});
    }
    if (first_draw && !erase_on_flag) {
      out.push_back({SmellKind::MissingPenUpEraseAll, *first_draw, "drawing without erase all on green flag"});
    }
  }

  return out;
}

SmellCounts count_findings(std::span<const SmellFinding> findings) {
  SmellCounts counts{};
  for (const SmellFinding& f : findings) ++counts[static_cast<std::size_t>(f.detector)];
  return counts;
}

std::map<std::string, std::array<double, kSmellCount>> summarize_smells(std::span<const GroupedSmellCounts> projects) {
  std::map<std::string, std::array<double, kSmellCount>> sums;
  std::map<std::string, std::size_t> sizes;
  for (const GroupedSmellCounts& p : projects) {
    auto& s = sums[p.group];
    for (std::size_t i = 0; i < kSmellCount; ++i) s[i] += static_cast<double>(p.counts[i]);
    ++sizes[p.group];
  }
  for (auto& [group, s] : sums) {
    for (double& v : s) v /= static_cast<double>(sizes[group]);
  }
  return sums;
}

}  // namespace blockscope
