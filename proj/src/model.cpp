#include "blockscope/model.hpp"

#include <algorithm>

namespace blockscope {

bool operator==(const BlockRef& a, const BlockRef& b) { return a.blocks == b.blocks; }

bool operator==(const Input& a, const Input& b) { return a.slot == b.slot && a.value == b.value; }

std::string_view to_string(Dialect d) { return d == Dialect::Sb2 ? "sb2" : "sb3"; }

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Motion: return "motion";
    case Category::Looks: return "looks";
    case Category::Sound: return "sound";
    case Category::Event: return "event";
    case Category::Control: return "control";
    case Category::Sensing: return "sensing";
    case Category::Operator: return "operator";
    case Category::Data: return "data";
    case Category::Pen: return "pen";
    case Category::Custom: return "custom";
  }
  return "custom";
}

std::optional<Category> parse_category(std::string_view name) {
  for (Category c : kAllCategories) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

bool is_hat(std::string_view opcode) {
  static constexpr std::string_view kHats[] = {
      "event_whenflagclicked",        "event_whenkeypressed",
      "event_whenthisspriteclicked",  "event_whenstageclicked",
      "event_whenbackdropswitchesto", "event_whengreaterthan",
      "event_whenbroadcastreceived",  "control_start_as_clone",
      "procedures_definition",
  };
  return std::find(std::begin(kHats), std::end(kHats), opcode) != std::end(kHats);
}

bool is_c_block(std::string_view opcode) {
  return opcode == "control_if" || opcode == "control_if_else" || opcode == "control_repeat" ||
         opcode == "control_repeat_until" || opcode == "control_forever";
}

bool is_decision(std::string_view opcode) {
  return is_c_block(opcode) || opcode == "control_wait_until";
}

void for_each_block(const Block& block, const BlockVisitor& visit, BlockSite site) {
  visit(block, site);
  BlockSite inner = site;
  ++inner.depth;
  for (const Input& in : block.inputs) {
    if (const auto* ref = std::get_if<BlockRef>(&in.value)) for_each_block(ref->blocks, visit, inner);
  }
  for (const BlockSeq& sub : block.substacks) for_each_block(sub, visit, inner);
}

void for_each_block(const BlockSeq& seq, const BlockVisitor& visit, BlockSite site) {
  for (const Block& b : seq) for_each_block(b, visit, site);
}

void for_each_block(const Script& script, const BlockVisitor& visit, BlockSite site) {
  for_each_block(script.hat, visit, site);
  for_each_block(script.body, visit, site);
}

void for_each_block(const Sprite& sprite, const BlockVisitor& visit) {
  for (std::size_t i = 0; i < sprite.scripts.size(); ++i) {
    for_each_block(sprite.scripts[i], visit, BlockSite{&sprite, i, false, 0});
  }
  for (std::size_t i = 0; i < sprite.orphan_blocks.size(); ++i) {
    for_each_block(sprite.orphan_blocks[i], visit, BlockSite{&sprite, i, true, 0});
  }
}

void for_each_block(const Project& project, const BlockVisitor& visit) {
  for (const Sprite* s : targets(project)) for_each_block(*s, visit);
}

std::vector<const Sprite*> targets(const Project& project) {
  std::vector<const Sprite*> out;
  out.reserve(project.sprites.size() + 1);
  out.push_back(&project.stage);
  for (const Sprite& s : project.sprites) out.push_back(&s);
  return out;
}

std::size_t count_blocks(const Block& block) {
  std::size_t n = 1;
  for (const Input& in : block.inputs) {
    if (const auto* ref = std::get_if<BlockRef>(&in.value)) n += count_blocks(ref->blocks);
  }
  for (const BlockSeq& sub : block.substacks) n += count_blocks(sub);
  return n;
}

std::size_t count_blocks(const BlockSeq& seq) {
  std::size_t n = 0;
  for (const Block& b : seq) n += count_blocks(b);
  return n;
}

std::size_t count_blocks(const Script& script) {
  return count_blocks(script.hat) + count_blocks(script.body);
}

std::size_t count_blocks(const Sprite& sprite) {
  std::size_t n = 0;
  for (const Script& s : sprite.scripts) n += count_blocks(s);
  for (const BlockSeq& o : sprite.orphan_blocks) n += count_blocks(o);
  return n;
}

std::optional<std::string> menu_value(const Block& block, std::string_view slot) {
  for (const Input& in : block.inputs) {
    if (in.slot != slot) continue;
    if (const auto* m = std::get_if<MenuSelection>(&in.value)) return m->value;
  }
  return std::nullopt;
}

std::optional<std::string> first_menu_value(const Block& block) {
  for (const Input& in : block.inputs) {
    if (const auto* m = std::get_if<MenuSelection>(&in.value)) return m->value;
  }
  return std::nullopt;
}

}  // namespace blockscope
