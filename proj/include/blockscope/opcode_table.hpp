#pragma once

// Opcode translation between the Scratch 2 and Scratch 3 serializations.
//
// The table is a versioned CSV (data/opcodes.csv, compiled into the library)
// with the columns `dialect,raw,canonical,category,args`. `args` lists the
// slot names of a block in sb2 positional order; a leading `*` marks a menu
// slot, `SUBSTACK`/`SUBSTACK2` mark nested stacks.

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "blockscope/model.hpp"

namespace blockscope {

inline constexpr std::string_view kUnknownPrefix = "unknown:";

enum class SlotKind { Value, Menu, Substack };

struct SlotSpec {
  std::string name;
  SlotKind kind = SlotKind::Value;
};

struct OpcodeInfo {
  std::string canonical;
  Category category = Category::Custom;
  std::vector<SlotSpec> slots;
};

class OpcodeTableError : public std::runtime_error {
 public:
  OpcodeTableError(std::size_t line, const std::string& what)
      : std::runtime_error("opcode table line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class OpcodeTable {
 public:
  static OpcodeTable from_csv(std::string_view text);
  // The table shipped with the library.
  static const OpcodeTable& builtin();

  // Unknown raw opcodes become `unknown:<raw>`.
  std::string normalize(Dialect dialect, std::string_view raw) const;
  bool knows(Dialect dialect, std::string_view raw) const;

  Category category(std::string_view canonical) const;
  const OpcodeInfo* info(std::string_view canonical) const;

  const std::string& version() const { return version_; }
  std::size_t size() const { return canonical_.size(); }

 private:
  std::string version_;
  std::map<std::string, std::string, std::less<>> sb2_;
  std::map<std::string, std::string, std::less<>> sb3_;
  std::map<std::string, OpcodeInfo, std::less<>> canonical_;
};

std::string normalize_opcode(Dialect dialect, std::string_view raw);
Category block_category(std::string_view canonical);

}  // namespace blockscope
