#include "blockscope/ast_json.hpp"

#include <stdexcept>

namespace blockscope {

namespace {

Json seq_to_json(const BlockSeq& seq) {
  Json arr = Json::array();
  for (const Block& b : seq) arr.push_back(to_json(b));
  return arr;
}

Json names(const std::vector<Asset>& assets) {
  Json arr = Json::array();
  for (const Asset& a : assets) arr.push_back(a.name);
  return arr;
}

Block block_from_json(const Json& j);

BlockSeq seq_from_json(const Json& j) {
  if (!j.is_array()) throw std::runtime_error("AST: expected block array");
  BlockSeq seq;
  seq.reserve(j.size());
  for (const Json& b : j) seq.push_back(block_from_json(b));
  return seq;
}

Block block_from_json(const Json& j) {
  Block b;
  b.opcode = j.at("opcode").get<std::string>();
  auto cat = parse_category(j.at("category").get<std::string>());
  if (!cat) throw std::runtime_error("AST: bad category for " + b.opcode);
  b.category = *cat;
  if (j.contains("inputs")) {
    for (const Json& in : j.at("inputs")) {
      Input input;
      input.slot = in.at("slot").get<std::string>();
      if (in.contains("literal")) {
        input.value = Literal{in.at("literal").get<std::string>()};
      } else if (in.contains("menu")) {
        input.value = MenuSelection{in.at("menu").get<std::string>()};
      } else if (in.contains("blocks")) {
        input.value = BlockRef{seq_from_json(in.at("blocks"))};
      } else {
        throw std::runtime_error("AST: input without value in " + b.opcode);
      }
      b.inputs.push_back(std::move(input));
    }
  }
  if (j.contains("substacks")) {
    for (const Json& s : j.at("substacks")) b.substacks.push_back(seq_from_json(s));
  }
  return b;
}

std::vector<Asset> assets_from_json(const Json& j) {
  std::vector<Asset> out;
  for (const Json& n : j) out.push_back(Asset{n.get<std::string>()});
  return out;
}

Sprite sprite_from_json(const Json& j) {
  Sprite s;
  s.name = j.at("name").get<std::string>();
  s.is_stage = j.at("is_stage").get<bool>();
  s.costumes = assets_from_json(j.at("costumes"));
  s.sounds = assets_from_json(j.at("sounds"));
  for (const Json& v : j.at("variables")) {
    s.variables.push_back(Variable{v.at("name").get<std::string>(), v.at("value").get<std::string>()});
  }
  for (const Json& l : j.at("lists")) s.lists.push_back(ListDecl{l.get<std::string>()});
  for (const Json& sc : j.at("scripts")) {
    s.scripts.push_back(Script{block_from_json(sc.at("hat")), seq_from_json(sc.at("body"))});
  }
  for (const Json& o : j.at("orphans")) s.orphan_blocks.push_back(seq_from_json(o));
  return s;
}

}  // namespace

Json to_json(const Block& block) {
  Json j;
  j["opcode"] = block.opcode;
  j["category"] = std::string(to_string(block.category));
  if (!block.inputs.empty()) {
    Json inputs = Json::array();
    for (const Input& in : block.inputs) {
      Json ij;
      ij["slot"] = in.slot;
      if (const auto* lit = std::get_if<Literal>(&in.value)) {
        ij["literal"] = lit->text;
      } else if (const auto* menu = std::get_if<MenuSelection>(&in.value)) {
        ij["menu"] = menu->value;
      } else {
        ij["blocks"] = seq_to_json(std::get<BlockRef>(in.value).blocks);
      }
      inputs.push_back(std::move(ij));
    }
    j["inputs"] = std::move(inputs);
  }
  if (!block.substacks.empty()) {
    Json subs = Json::array();
    for (const BlockSeq& s : block.substacks) subs.push_back(seq_to_json(s));
    j["substacks"] = std::move(subs);
  }
  return j;
}

Json to_json(const Script& script) {
  Json j;
  j["hat"] = to_json(script.hat);
  j["body"] = seq_to_json(script.body);
  return j;
}

Json to_json(const Sprite& sprite) {
  Json j;
  j["name"] = sprite.name;
  j["is_stage"] = sprite.is_stage;
  j["costumes"] = names(sprite.costumes);
  j["sounds"] = names(sprite.sounds);
  Json vars = Json::array();
  for (const Variable& v : sprite.variables) vars.push_back({{"name", v.name}, {"value", v.initial_value}});
  j["variables"] = std::move(vars);
  Json lists = Json::array();
  for (const ListDecl& l : sprite.lists) lists.push_back(l.name);
  j["lists"] = std::move(lists);
  Json scripts = Json::array();
  for (const Script& s : sprite.scripts) scripts.push_back(to_json(s));
  j["scripts"] = std::move(scripts);
  Json orphans = Json::array();
  for (const BlockSeq& o : sprite.orphan_blocks) orphans.push_back(seq_to_json(o));
  j["orphans"] = std::move(orphans);
  return j;
}

Json to_json(const Project& project) {
  Json j;
  j["id"] = project.id;
  j["name"] = project.name;
  j["dialect"] = std::string(to_string(project.dialect));
  j["stage"] = to_json(project.stage);
  Json sprites = Json::array();
  for (const Sprite& s : project.sprites) sprites.push_back(to_json(s));
  j["sprites"] = std::move(sprites);
  return j;
}

Project project_from_json(const Json& j) {
  Project p;
  p.id = j.at("id").get<std::string>();
  p.name = j.at("name").get<std::string>();
  const auto dialect = j.at("dialect").get<std::string>();
  if (dialect == "sb2") {
    p.dialect = Dialect::Sb2;
  } else if (dialect == "sb3") {
    p.dialect = Dialect::Sb3;
  } else {
    throw std::runtime_error("AST: unknown dialect " + dialect);
  }
  p.stage = sprite_from_json(j.at("stage"));
  for (const Json& s : j.at("sprites")) p.sprites.push_back(sprite_from_json(s));
  return p;
}

}  // namespace blockscope
