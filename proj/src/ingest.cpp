#include "blockscope/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "blockscope/zip.hpp"

namespace blockscope {

using OJson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view to_string(IngestErrorKind kind) {
  switch (kind) {
    case IngestErrorKind::NotAZip: return "NotAZip";
    case IngestErrorKind::MissingProjectJson: return "MissingProjectJson";
    case IngestErrorKind::AmbiguousDialect: return "AmbiguousDialect";
    case IngestErrorKind::MalformedJson: return "MalformedJson";
    case IngestErrorKind::UnsupportedFeature: return "UnsupportedFeature";
    case IngestErrorKind::EmptyCorpus: return "EmptyCorpus";
    case IngestErrorKind::MetadataParseError: return "MetadataParseError";
    case IngestErrorKind::DuplicateProjectId: return "DuplicateProjectId";
    case IngestErrorKind::Io: return "Io";
  }
  return "Io";
}

IngestError::IngestError(IngestErrorKind kind, std::string path, const std::string& detail,
                         std::optional<std::size_t> position)
    : std::runtime_error(std::string(to_string(kind)) + (path.empty() ? "" : " (" + path + ")") + ": " + detail),
      kind_(kind),
      path_(std::move(path)),
      position_(position) {}

std::string format_number(double value) {
  if (std::isfinite(value) && value == std::floor(value) && std::fabs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

std::string scalar_text(const OJson& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return {};
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Shared state while lowering one project.
class Lowering {
 public:
  Lowering(const std::string& id, std::vector<Diagnostic>* diags, const LoadOptions& opts)
      : id_(id), diags_(diags), strict_(opts.strict), table_(opts.table ? *opts.table : OpcodeTable::builtin()) {}

  void unsupported(const std::string& what) {
    if (strict_) throw IngestError(IngestErrorKind::UnsupportedFeature, id_, what);
    if (diags_) diags_->push_back(Diagnostic{id_, "UnsupportedFeature", what, false});
  }

  std::string canonical(Dialect d, std::string_view raw) {
    if (raw.empty()) {
      unsupported("block without opcode");
      return std::string(kUnknownPrefix) + "empty";
    }
    std::string op = table_.normalize(d, raw);
    if (op.starts_with(kUnknownPrefix)) unsupported("unknown opcode " + std::string(raw));
    return op;
  }

  const OpcodeTable& table() const { return table_; }

  // Splits a top-level stack into a script or an orphan stack.
  static void place_stack(Sprite& sprite, BlockSeq stack) {
    if (stack.empty()) return;
    if (is_hat(stack.front().opcode)) {
      Script s;
      s.hat = std::move(stack.front());
      s.body.assign(std::make_move_iterator(stack.begin() + 1), std::make_move_iterator(stack.end()));
      sprite.scripts.push_back(std::move(s));
    } else {
      sprite.orphan_blocks.push_back(std::move(stack));
    }
  }

  // C blocks always carry exactly as many substacks as their table entry declares.
  void size_substacks(Block& b) const {
    if (!is_c_block(b.opcode)) return;
    std::size_t n = 0;
    if (const OpcodeInfo* info = table_.info(b.opcode)) {
      n = static_cast<std::size_t>(std::count_if(info->slots.begin(), info->slots.end(),
                                                 [](const SlotSpec& s) { return s.kind == SlotKind::Substack; }));
    }
    if (b.substacks.size() < n) b.substacks.resize(n);
  }

  void disambiguate_sprite_names(Project& p) {
    std::set<std::string> seen{p.stage.name};
    for (Sprite& s : p.sprites) {
      std::string name = s.name;
      for (int k = 2; seen.contains(name); ++k) name = s.name + " (" + std::to_string(k) + ")";
      if (name != s.name) {
        if (diags_) diags_->push_back(Diagnostic{id_, "DuplicateSpriteName", "renamed '" + s.name + "' to '" + name + "'", false});
        s.name = name;
      }
      seen.insert(name);
    }
  }

 private:
  std::string id_;
  std::vector<Diagnostic>* diags_;
  bool strict_;
  const OpcodeTable& table_;
};

// ---------------------------------------------------------------------------
// Scratch 2: blocks are positional arrays ["opcode", arg0, arg1, ...].

class Sb2Reader {
 public:
  explicit Sb2Reader(Lowering& low) : low_(low) {}

  Project read(const OJson& root, const std::string& id) {
    Project p;
    p.id = id;
    p.name = id;
    p.dialect = Dialect::Sb2;
    p.stage = read_sprite(root, true);
    if (auto it = root.find("children"); it != root.end() && it->is_array()) {
      for (const OJson& child : *it) {
        // Watchers and list monitors live here too; only sprites carry objName.
        if (child.is_object() && child.contains("objName")) p.sprites.push_back(read_sprite(child, false));
      }
    }
    return p;
  }

 private:
  static bool is_block_array(const OJson& v) { return v.is_array() && !v.empty() && v[0].is_string(); }
  static bool is_stack_array(const OJson& v) {
    return v.is_array() && std::all_of(v.begin(), v.end(), [](const OJson& b) { return is_block_array(b); });
  }

  Sprite read_sprite(const OJson& obj, bool is_stage) {
    Sprite s;
    s.is_stage = is_stage;
    s.name = is_stage ? "Stage" : scalar_text(obj.value("objName", OJson("")));
    is_stage_ = is_stage;
    if (auto it = obj.find("costumes"); it != obj.end() && it->is_array()) {
      for (const OJson& c : *it) s.costumes.push_back(Asset{scalar_text(c.value("costumeName", OJson("")))});
    }
    if (auto it = obj.find("sounds"); it != obj.end() && it->is_array()) {
      for (const OJson& c : *it) s.sounds.push_back(Asset{scalar_text(c.value("soundName", OJson("")))});
    }
    if (auto it = obj.find("variables"); it != obj.end() && it->is_array()) {
      for (const OJson& v : *it) {
        s.variables.push_back(Variable{scalar_text(v.value("name", OJson(""))), scalar_text(v.value("value", OJson("")))});
      }
    }
    if (auto it = obj.find("lists"); it != obj.end() && it->is_array()) {
      for (const OJson& l : *it) s.lists.push_back(ListDecl{scalar_text(l.value("listName", OJson("")))});
    }
    if (auto it = obj.find("scripts"); it != obj.end() && it->is_array()) {
      for (const OJson& entry : *it) {
        // [x, y, [block, block, ...]]
        if (!entry.is_array() || entry.size() < 3 || !entry[2].is_array()) {
          low_.unsupported("malformed script entry in " + s.name);
          continue;
        }
        Lowering::place_stack(s, read_stack(entry[2]));
      }
    }
    return s;
  }

  BlockSeq read_stack(const OJson& arr) {
    BlockSeq seq;
    if (!arr.is_array()) return seq;
    for (const OJson& b : arr) {
      if (is_block_array(b)) {
        seq.push_back(read_block(b));
      } else {
        low_.unsupported("non-block entry in stack");
      }
    }
    return seq;
  }

  Block read_block(const OJson& arr) {
    const std::string raw = arr[0].get<std::string>();
    Block b;
    if (raw == "whenClicked" && is_stage_) {
      b.opcode = "event_whenstageclicked";
    } else if (raw == "getParam") {
      const bool boolean = arr.size() > 2 && arr[2].is_string() && arr[2].get<std::string>() == "b";
      b.opcode = boolean ? "argument_reporter_boolean" : "argument_reporter_string_number";
    } else {
      b.opcode = low_.canonical(Dialect::Sb2, raw);
    }
    b.category = low_.table().category(b.opcode);

    const OpcodeInfo* info = low_.table().info(b.opcode);
    const bool c_block = is_c_block(b.opcode);
    const bool is_call = b.opcode == "procedures_call";
    // Parameter names and defaults after a definition's spec are not slots.
    const bool header_only = b.opcode.starts_with("argument_reporter") || b.opcode == "procedures_definition";
    const std::size_t last_arg = header_only ? std::min<std::size_t>(arr.size(), 2) : arr.size();

    for (std::size_t i = 1; i < last_arg; ++i) {
      const OJson& arg = arr[i];
      const std::size_t pos = i - 1;
      SlotSpec spec{"ARG" + std::to_string(pos), SlotKind::Value};
      if (is_call) {
        spec = pos == 0 ? SlotSpec{"PROCCODE", SlotKind::Menu} : SlotSpec{"ARG" + std::to_string(pos - 1), SlotKind::Value};
      } else if (info && pos < info->slots.size()) {
        spec = info->slots[pos];
      }

      if (spec.kind == SlotKind::Substack) {
        BlockSeq stack = arg.is_array() ? read_stack(arg) : BlockSeq{};
        if (c_block) {
          b.substacks.push_back(std::move(stack));
        } else if (!stack.empty()) {
          b.inputs.push_back(Input{spec.name, BlockRef{std::move(stack)}});
        }
        continue;
      }
      if (arg.is_null() || arg.is_boolean()) continue;  // empty slot
      if (is_block_array(arg)) {
        b.inputs.push_back(Input{spec.name, BlockRef{{read_block(arg)}}});
      } else if (arg.is_array()) {
        if (is_stack_array(arg) && !arg.empty()) {
          b.inputs.push_back(Input{spec.name, BlockRef{read_stack(arg)}});
        } else if (!arg.empty()) {
          low_.unsupported("unrecognized argument in " + raw);
        }
      } else if (spec.kind == SlotKind::Menu) {
        b.inputs.push_back(Input{spec.name, MenuSelection{scalar_text(arg)}});
      } else {
        b.inputs.push_back(Input{spec.name, Literal{scalar_text(arg)}});
      }
    }
    low_.size_substacks(b);
    return b;
  }

  Lowering& low_;
  bool is_stage_ = false;
};

// ---------------------------------------------------------------------------
// Scratch 3: flat map of block id -> block object with next/parent links.

class Sb3Reader {
 public:
  explicit Sb3Reader(Lowering& low) : low_(low) {}

  Project read(const OJson& root, const std::string& id) {
    Project p;
    p.id = id;
    p.name = id;
    p.dialect = Dialect::Sb3;
    bool stage_seen = false;
    for (const OJson& t : root.at("targets")) {
      if (!t.is_object()) continue;
      const bool is_stage = t.value("isStage", false);
      Sprite s = read_target(t, is_stage);
      if (is_stage) {
        if (stage_seen) {
          low_.unsupported("second stage target ignored");
          continue;
        }
        stage_seen = true;
        p.stage = std::move(s);
        p.stage.name = "Stage";
      } else {
        p.sprites.push_back(std::move(s));
      }
    }
    if (!stage_seen) low_.unsupported("project without a stage target");
    return p;
  }

 private:
  static bool is_literal_shadow(std::string_view op) {
    return op == "math_number" || op == "math_positive_number" || op == "math_whole_number" ||
           op == "math_integer" || op == "math_angle" || op == "text" || op == "colour_picker";
  }

  Sprite read_target(const OJson& t, bool is_stage) {
    Sprite s;
    s.is_stage = is_stage;
    s.name = scalar_text(t.value("name", OJson("")));
    if (auto it = t.find("costumes"); it != t.end() && it->is_array()) {
      for (const OJson& c : *it) s.costumes.push_back(Asset{scalar_text(c.value("name", OJson("")))});
    }
    if (auto it = t.find("sounds"); it != t.end() && it->is_array()) {
      for (const OJson& c : *it) s.sounds.push_back(Asset{scalar_text(c.value("name", OJson("")))});
    }
    if (auto it = t.find("variables"); it != t.end() && it->is_object()) {
      for (const auto& [vid, v] : it->items()) {
        if (v.is_array() && !v.empty()) {
          s.variables.push_back(Variable{scalar_text(v[0]), v.size() > 1 ? scalar_text(v[1]) : ""});
        }
      }
    }
    if (auto it = t.find("lists"); it != t.end() && it->is_object()) {
      for (const auto& [lid, l] : it->items()) {
        if (l.is_array() && !l.empty()) s.lists.push_back(ListDecl{scalar_text(l[0])});
      }
    }
    blocks_ = nullptr;
    if (auto it = t.find("blocks"); it != t.end() && it->is_object()) {
      blocks_ = &*it;
      for (const auto& [bid, b] : it->items()) {
        if (b.is_array()) {
          // Loose variable/list reporter: [12, name, id, x, y].
          Lowering::place_stack(s, BlockSeq{primitive_reporter(b)});
        } else if (b.is_object() && b.value("topLevel", false) && !b.value("shadow", false)) {
          visiting_.clear();
          Lowering::place_stack(s, read_stack(bid));
        }
      }
    }
    return s;
  }

  const OJson* lookup(const std::string& id) const {
    if (!blocks_) return nullptr;
    auto it = blocks_->find(id);
    return it == blocks_->end() ? nullptr : &*it;
  }

  BlockSeq read_stack(const std::string& first) {
    BlockSeq seq;
    std::string id = first;
    while (!id.empty()) {
      const OJson* b = lookup(id);
      if (!b || !b->is_object()) {
        low_.unsupported("dangling block reference " + id);
        break;
      }
      if (!visiting_.insert(id).second) {
        low_.unsupported("cyclic block chain at " + id);
        break;
      }
      seq.push_back(read_block(*b));
      const auto& next = (*b)["next"];
      id = next.is_string() ? next.get<std::string>() : std::string{};
    }
    return seq;
  }

  Block primitive_reporter(const OJson& prim) {
    Block b;
    const int type = prim[0].is_number() ? prim[0].get<int>() : 0;
    const std::string name = prim.size() > 1 ? scalar_text(prim[1]) : "";
    if (type == 13) {
      b.opcode = "data_listcontents";
      b.inputs.push_back(Input{"LIST", MenuSelection{name}});
    } else {
      if (type != 12) low_.unsupported("unknown top-level primitive " + std::to_string(type));
      b.opcode = "data_variable";
      b.inputs.push_back(Input{"VARIABLE", MenuSelection{name}});
    }
    b.category = low_.table().category(b.opcode);
    return b;
  }


  // Decodes the value part of an sb3 input ([shadowType, value, obscured?]).
  bool decode_input(const OJson& value, Input& out) {
    if (value.is_null()) return false;
    if (value.is_array()) {
      if (value.empty() || !value[0].is_number()) {
        low_.unsupported("malformed primitive input");
        return false;
      }
      const int type = value[0].get<int>();
      const std::string text = value.size() > 1 ? scalar_text(value[1]) : "";
      if (type >= 4 && type <= 10) {
        out.value = Literal{text};
      } else if (type == 11) {
        out.value = MenuSelection{text};
      } else if (type == 12 || type == 13) {
        out.value = BlockRef{{primitive_reporter(value)}};
      } else {
        low_.unsupported("unknown primitive type " + std::to_string(type));
        return false;
      }
      return true;
    }
    if (!value.is_string()) return false;
    const std::string id = value.get<std::string>();
    const OJson* b = lookup(id);
    if (!b || !b->is_object()) {
      low_.unsupported("dangling input reference " + id);
      return false;
    }
    if (!b->value("shadow", false)) {
      if (!visiting_.insert(id).second) {
        low_.unsupported("cyclic input at " + id);
        return false;
      }
      out.value = BlockRef{{read_block(*b)}};
      return true;
    }
    // Shadow blocks are slot fillers: literal editors or dropdown menus.
    const std::string op = b->value("opcode", "");
    const OJson fields = b->value("fields", OJson::object());
    if (op == "procedures_prototype") {
      out.value = MenuSelection{b->contains("mutation") ? scalar_text((*b)["mutation"].value("proccode", OJson(""))) : ""};
      return true;
    }
    if (fields.empty() || !fields.begin()->is_array() || fields.begin()->empty()) return false;
    const std::string text = scalar_text((*fields.begin())[0]);
    if (is_literal_shadow(op)) {
      out.value = Literal{text};
    } else {
      out.value = MenuSelection{text};
    }
    return true;
  }

  Block read_block(const OJson& obj) {
    Block b;
    const std::string raw = obj.value("opcode", "");
    b.opcode = low_.canonical(Dialect::Sb3, raw);
    b.category = low_.table().category(b.opcode);
    const OpcodeInfo* info = low_.table().info(b.opcode);
    const bool c_block = is_c_block(b.opcode);

    std::vector<Input> unordered;
    const OJson inputs = obj.value("inputs", OJson::object());
    const OJson fields = obj.value("fields", OJson::object());

    // procedures_call keys its inputs by argument id; order them by the mutation.
    std::vector<std::string> arg_order;
    if (b.opcode == "procedures_call" && obj.contains("mutation")) {
      const OJson& m = obj["mutation"];
      unordered.push_back(Input{"PROCCODE", MenuSelection{scalar_text(m.value("proccode", OJson("")))}});
      if (m.contains("argumentids") && m["argumentids"].is_string()) {
        try {
          for (const auto& a : OJson::parse(m["argumentids"].get<std::string>())) arg_order.push_back(scalar_text(a));
        } catch (const nlohmann::json::exception&) {
          low_.unsupported("malformed procedure argument ids");
        }
      }
    }

    std::map<std::string, BlockSeq> substacks;
    for (const auto& [name, value] : inputs.items()) {
      if (!value.is_array() || value.size() < 2) continue;
      if (name.starts_with("SUBSTACK")) {
        BlockSeq stack = value[1].is_string() ? read_stack(value[1].get<std::string>()) : BlockSeq{};
        if (c_block) {
          substacks[name] = std::move(stack);
        } else if (!stack.empty()) {
          unordered.push_back(Input{name, BlockRef{std::move(stack)}});
        }
        continue;
      }
      std::string slot = name;
      if (b.opcode == "procedures_definition" && name == "custom_block") slot = "PROCCODE";
      auto pos = std::find(arg_order.begin(), arg_order.end(), name);
      if (pos != arg_order.end()) slot = "ARG" + std::to_string(pos - arg_order.begin());
      Input in{slot, Literal{}};
      if (decode_input(value[1], in)) unordered.push_back(std::move(in));
    }
    for (const auto& [name, value] : fields.items()) {
      if (value.is_array() && !value.empty() && !value[0].is_null()) {
        unordered.push_back(Input{name, MenuSelection{scalar_text(value[0])}});
      }
    }

    // Table order first, then whatever remains sorted by slot name.
    if (info) {
      for (const SlotSpec& spec : info->slots) {
        auto it = std::find_if(unordered.begin(), unordered.end(), [&](const Input& in) { return in.slot == spec.name; });
        if (it != unordered.end()) {
          b.inputs.push_back(std::move(*it));
          unordered.erase(it);
        }
      }
    }
    std::stable_sort(unordered.begin(), unordered.end(), [](const Input& x, const Input& y) { return x.slot < y.slot; });
    for (Input& in : unordered) b.inputs.push_back(std::move(in));

    if (c_block) {
      for (auto& [name, stack] : substacks) {
        const std::size_t idx = name == "SUBSTACK2" ? 1 : 0;
        if (b.substacks.size() <= idx) b.substacks.resize(idx + 1);
        b.substacks[idx] = std::move(stack);
      }
    }
    low_.size_substacks(b);
    return b;
  }

  Lowering& low_;
  const OJson* blocks_ = nullptr;
  std::unordered_set<std::string> visiting_;
};

OJson parse_json(std::string_view text, const std::string& path) {
  try {
    return OJson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IngestError(IngestErrorKind::MalformedJson, path, e.what(), e.byte);
  }
}

Dialect dialect_of(const OJson& root, const std::string& path) {
  if (!root.is_object()) throw IngestError(IngestErrorKind::AmbiguousDialect, path, "project.json root is not an object");
  const bool sb2 = root.contains("objName") || root.contains("children");
  const bool sb3 = root.contains("targets");
  if (sb2 == sb3) {
    throw IngestError(IngestErrorKind::AmbiguousDialect, path,
                      sb2 ? "both sb2 and sb3 markers present" : "neither objName/children nor targets present");
  }
  return sb2 ? Dialect::Sb2 : Dialect::Sb3;
}

std::string extract_project_json(std::span<const std::uint8_t> bytes, const std::string& path) {
  if (!zip::looks_like_zip(bytes)) throw IngestError(IngestErrorKind::NotAZip, path, "missing zip signature");
  try {
    zip::Archive archive(std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
    const zip::Entry* entry = archive.find("project.json");
    if (!entry) {
      for (const zip::Entry& e : archive.entries()) {
        if (e.name.ends_with("/project.json")) {
          entry = &e;
          break;
        }
      }
    }
    if (!entry) throw IngestError(IngestErrorKind::MissingProjectJson, path, "no project.json entry");
    return archive.read(*entry);
  } catch (const zip::ZipError& e) {
    throw IngestError(IngestErrorKind::NotAZip, path, e.what());
  }
}

}  // namespace

Dialect detect_dialect(std::span<const std::uint8_t> archive) {
  const std::string json = extract_project_json(archive, "");
  return dialect_of(parse_json(json, ""), "");
}

Project parse_project_json(std::string_view json, const std::string& id, std::vector<Diagnostic>* diagnostics,
                           const LoadOptions& options) {
  const OJson root = parse_json(json, id);
  const Dialect dialect = dialect_of(root, id);
  Lowering low(id, diagnostics, options);
  Project p = dialect == Dialect::Sb2 ? Sb2Reader(low).read(root, id) : Sb3Reader(low).read(root, id);
  low.disambiguate_sprite_names(p);
  return p;
}

Project load_project(const fs::path& path, std::vector<Diagnostic>* diagnostics, const LoadOptions& options) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = zip::read_file(path.string());
  } catch (const std::exception& e) {
    throw IngestError(IngestErrorKind::Io, path.string(), e.what());
  }
  const std::string json = extract_project_json(bytes, path.string());
  return parse_project_json(json, path.stem().string(), diagnostics, options);
}

bool is_default_unmodified(const Project& p) {
  static const std::set<std::string> kSpriteNames{"sprite1", "figur1", "objeto1", "lutin1"};
  static const std::set<std::string> kCostumes{"costume1", "costume2", "kostüm1", "kostüm2"};
  static const std::set<std::string> kBackdrops{"backdrop1", "hintergrund1", "bühnenbild1"};
  static const std::set<std::string> kSpriteSounds{"meow", "miau"};
  static const std::set<std::string> kStageSounds{"pop", "plopp"};
  static const std::set<std::string> kVariables{"my variable", "meine variable"};

  auto all_in = [](const std::vector<Asset>& assets, const std::set<std::string>& allowed) {
    return std::all_of(assets.begin(), assets.end(), [&](const Asset& a) { return allowed.contains(lower_ascii(a.name)); });
  };
  auto default_vars = [&](const Sprite& s) {
    return s.lists.empty() && std::all_of(s.variables.begin(), s.variables.end(), [&](const Variable& v) {
             return kVariables.contains(lower_ascii(v.name)) && (v.initial_value == "0" || v.initial_value.empty());
           });
  };

  if (p.sprites.size() != 1) return false;
  const Sprite& cat = p.sprites.front();
  if (!kSpriteNames.contains(lower_ascii(cat.name))) return false;
  for (const Sprite* s : targets(p)) {
    if (!s->scripts.empty() || !s->orphan_blocks.empty()) return false;
    if (!default_vars(*s)) return false;
  }
  return all_in(cat.costumes, kCostumes) && all_in(cat.sounds, kSpriteSounds) &&
         all_in(p.stage.costumes, kBackdrops) && all_in(p.stage.sounds, kStageSounds);
}

std::map<std::string, ProjectMeta> parse_metadata(std::string_view csv, const std::string& path) {
  std::map<std::string, ProjectMeta> out;
  std::size_t line_no = 0;
  bool header = false;
  std::size_t start = 0;
  auto trim = [](std::string s) {
    auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), issp));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), issp).base(), s.end());
    return s;
  };
  while (start < csv.size()) {
    std::size_t end = csv.find('\n', start);
    std::string line(csv.substr(start, end == csv.npos ? csv.npos : end - start));
    start = end == csv.npos ? csv.size() : end + 1;
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t s = 0;
    while (true) {
      std::size_t c = line.find(',', s);
      cols.push_back(trim(line.substr(s, c == line.npos ? line.npos : c - s)));
      if (c == line.npos) break;
      s = c + 1;
    }
    if (!header) {
      if (cols != std::vector<std::string>{"project_id", "group", "age"}) {
        throw IngestError(IngestErrorKind::MetadataParseError, path, "expected header project_id,group,age", line_no);
      }
      header = true;
      continue;
    }
    if (cols.size() != 3 || cols[0].empty()) {
      throw IngestError(IngestErrorKind::MetadataParseError, path, "expected 3 columns", line_no);
    }
    ProjectMeta meta;
    meta.group = cols[1].empty() ? "unknown" : cols[1];
    if (!cols[2].empty()) {
      int age = 0;
      auto res = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), age);
      if (res.ec != std::errc{} || res.ptr != cols[2].data() + cols[2].size()) {
        throw IngestError(IngestErrorKind::MetadataParseError, path, "age is not an integer", line_no);
      }
      meta.age = age;
    }
    if (!out.emplace(cols[0], meta).second) {
      throw IngestError(IngestErrorKind::MetadataParseError, path, "duplicate project id " + cols[0], line_no);
    }
  }
  if (!header) throw IngestError(IngestErrorKind::MetadataParseError, path, "missing header", line_no);
  return out;
}

const ProjectMeta& Corpus::meta(const std::string& id) const {
  static const ProjectMeta kUnknown{};
  auto it = metadata.find(id);
  return it == metadata.end() ? kUnknown : it->second;
}

std::size_t Corpus::excluded_count() const {
  return static_cast<std::size_t>(
      std::count_if(warnings.begin(), warnings.end(), [](const Diagnostic& d) { return d.excludes_project; }));
}

Corpus load_corpus(const fs::path& dir, const fs::path& metadata, const CorpusOptions& options) {
  if (!fs::is_directory(dir)) throw IngestError(IngestErrorKind::Io, dir.string(), "not a directory");

  std::vector<fs::path> archives;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = lower_ascii(entry.path().extension().string());
    if (ext == ".sb2" || ext == ".sb3") archives.push_back(entry.path());
  }
  std::sort(archives.begin(), archives.end());
  if (archives.empty()) throw IngestError(IngestErrorKind::EmptyCorpus, dir.string(), "no .sb2/.sb3 archives");

  Corpus corpus;
  corpus.archives_seen = archives.size();
  if (!metadata.empty()) {
    std::ifstream in(metadata, std::ios::binary);
    if (!in) throw IngestError(IngestErrorKind::MetadataParseError, metadata.string(), "cannot open");
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    corpus.metadata = parse_metadata(text, metadata.string());
  }

  struct Slot {
    std::optional<Project> project;
    std::vector<Diagnostic> diagnostics;
    std::exception_ptr fatal;
  };
  std::vector<Slot> slots(archives.size());
  LoadOptions load_opts{options.strict, options.table};

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < archives.size(); i = next++) {
      Slot& slot = slots[i];
      const std::string path = archives[i].string();
      try {
        Project p = load_project(archives[i], &slot.diagnostics, load_opts);
        if (is_default_unmodified(p)) {
          slot.diagnostics.push_back(Diagnostic{path, "DefaultUnmodified", "no modifications to the default project", true});
        } else {
          slot.project = std::move(p);
        }
      } catch (const IngestError& e) {
        if (options.strict) {
          slot.fatal = std::current_exception();
        } else {
          slot.diagnostics.push_back(Diagnostic{path, std::string(to_string(e.kind())), e.what(), true});
        }
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(archives.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
  }

  // Deterministic merge: archive order for diagnostics, id order for projects.
  std::set<std::string> ids;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    Slot& slot = slots[i];
    if (slot.fatal) std::rethrow_exception(slot.fatal);
    for (Diagnostic& d : slot.diagnostics) {
      if (d.archive.empty() || d.archive == archives[i].stem().string()) d.archive = archives[i].string();
      corpus.warnings.push_back(std::move(d));
    }
    if (!slot.project) continue;
    if (!ids.insert(slot.project->id).second) {
      Diagnostic dup{archives[i].string(), "DuplicateProjectId", "another archive already provides id " + slot.project->id, true};
      if (options.strict) throw IngestError(IngestErrorKind::DuplicateProjectId, dup.archive, dup.message);
      corpus.warnings.push_back(std::move(dup));
      continue;
    }
    corpus.projects.push_back(std::move(*slot.project));
  }
  std::sort(corpus.projects.begin(), corpus.projects.end(),
            [](const Project& a, const Project& b) { return a.id < b.id; });
  for (const Project& p : corpus.projects) {
    if (!corpus.metadata.empty() && !corpus.metadata.contains(p.id)) {
      corpus.warnings.push_back(Diagnostic{p.id, "MissingMetadata", "no metadata row; group set to 'unknown'", false});
    }
  }
  if (corpus.projects.empty()) {
    throw IngestError(IngestErrorKind::EmptyCorpus, dir.string(), "no loadable projects among " +
                                                                       std::to_string(archives.size()) + " archives");
  }
  return corpus;
}

}  // namespace blockscope
