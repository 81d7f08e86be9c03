#pragma once

// Normalized, dialect-independent AST for Scratch projects.
//
// Both .sb2 and .sb3 archives are lowered into these value types. Opcodes are
// canonical (Scratch 3 naming, see OpcodeTable); the palette category of a
// block is derived from its opcode.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace blockscope {

enum class Dialect { Sb2, Sb3 };

std::string_view to_string(Dialect d);

// Palette drawers. The order here is the column order of every report.
enum class Category {
  Motion,
  Looks,
  Sound,
  Event,
  Control,
  Sensing,
  Operator,
  Data,
  Pen,
  Custom,
};

inline constexpr std::size_t kCategoryCount = 10;
inline constexpr std::array<Category, kCategoryCount> kAllCategories = {
    Category::Motion,  Category::Looks,    Category::Sound, Category::Event,
    Category::Control, Category::Sensing,  Category::Operator,
    Category::Data,    Category::Pen,      Category::Custom};

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view name);

struct Block;
using BlockSeq = std::vector<Block>;

// A literal typed into a block slot. Numbers are stored in their shortest
// decimal form so that sb2 (JSON numbers) and sb3 (strings) agree.
struct Literal {
  std::string text;
  friend bool operator==(const Literal&, const Literal&) = default;
};

// A dropdown choice: costume/sound/sprite names, keys, variables, messages.
struct MenuSelection {
  std::string value;
  friend bool operator==(const MenuSelection&, const MenuSelection&) = default;
};

// Reporter (or, for unrecognized C-shaped blocks, a whole stack) plugged into
// a slot.
struct BlockRef {
  BlockSeq blocks;
  friend bool operator==(const BlockRef&, const BlockRef&);
};

struct Input {
  std::string slot;
  std::variant<Literal, MenuSelection, BlockRef> value;
  friend bool operator==(const Input&, const Input&);
};

struct Block {
  std::string opcode;
  Category category = Category::Custom;
  std::vector<Input> inputs;
  // At most two; non-empty only for if / if-else / repeat / repeat-until / forever.
  std::vector<BlockSeq> substacks;

  friend bool operator==(const Block&, const Block&) = default;
};

struct Script {
  Block hat;
  BlockSeq body;
  friend bool operator==(const Script&, const Script&) = default;
};

struct Asset {
  std::string name;
  friend bool operator==(const Asset&, const Asset&) = default;
};

struct Variable {
  std::string name;
  std::string initial_value;
  friend bool operator==(const Variable&, const Variable&) = default;
};

struct ListDecl {
  std::string name;
  friend bool operator==(const ListDecl&, const ListDecl&) = default;
};

struct Sprite {
  std::string name;
  bool is_stage = false;
  std::vector<Asset> costumes;  // backdrops for the stage
  std::vector<Asset> sounds;
  std::vector<Variable> variables;  // stage variables are global
  std::vector<ListDecl> lists;
  std::vector<Script> scripts;
  std::vector<BlockSeq> orphan_blocks;

  friend bool operator==(const Sprite&, const Sprite&) = default;
};

inline Sprite make_stage() {
  Sprite s;
  s.name = "Stage";
  s.is_stage = true;
  return s;
}

struct Project {
  std::string id;
  std::string name;
  Sprite stage = make_stage();
  std::vector<Sprite> sprites;
  Dialect dialect = Dialect::Sb3;

  friend bool operator==(const Project&, const Project&) = default;
};

// --- opcode predicates ------------------------------------------------------

// Blocks that may start a script.
bool is_hat(std::string_view opcode);
// if, if-else, repeat, repeat-until, forever.
bool is_c_block(std::string_view opcode);
// CC decision points: the C blocks plus wait-until.
bool is_decision(std::string_view opcode);

// --- traversal --------------------------------------------------------------

struct BlockSite {
  const Sprite* sprite = nullptr;
  // Index into sprite->scripts, or into sprite->orphan_blocks when orphan.
  std::size_t stack_index = 0;
  bool orphan = false;
  std::size_t depth = 0;
};

using BlockVisitor = std::function<void(const Block&, const BlockSite&)>;

// Pre-order: block, its reporter inputs, then its substacks.
void for_each_block(const Block& block, const BlockVisitor& visit, BlockSite site = {});
void for_each_block(const BlockSeq& seq, const BlockVisitor& visit, BlockSite site = {});
void for_each_block(const Script& script, const BlockVisitor& visit, BlockSite site = {});
void for_each_block(const Sprite& sprite, const BlockVisitor& visit);
void for_each_block(const Project& project, const BlockVisitor& visit);

// Stage first, then sprites in order.
std::vector<const Sprite*> targets(const Project& project);

std::size_t count_blocks(const Block& block);
std::size_t count_blocks(const BlockSeq& seq);
std::size_t count_blocks(const Script& script);
std::size_t count_blocks(const Sprite& sprite);

// Menu value in the named slot, if the slot holds a menu selection.
std::optional<std::string> menu_value(const Block& block, std::string_view slot);
// First menu value of any slot.
std::optional<std::string> first_menu_value(const Block& block);

}  // namespace blockscope
