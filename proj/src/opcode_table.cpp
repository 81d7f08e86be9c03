#include "blockscope/opcode_table.hpp"

#include <sstream>

#include "blockscope/resources.hpp"

namespace blockscope {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<SlotSpec> parse_slots(std::string_view args) {
  std::vector<SlotSpec> slots;
  if (trim(args).empty()) return slots;
  for (std::string& a : split(args, ';')) {
    SlotSpec spec;
    std::string_view name = trim(a);
    if (!name.empty() && name.front() == '*') {
      spec.kind = SlotKind::Menu;
      name.remove_prefix(1);
    } else if (name.starts_with("SUBSTACK")) {
      spec.kind = SlotKind::Substack;
    }
    spec.name = std::string(name);
    slots.push_back(std::move(spec));
  }
  return slots;
}

}  // namespace

OpcodeTable OpcodeTable::from_csv(std::string_view text) {
  OpcodeTable table;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    std::string_view line = text.substr(start, end == text.npos ? text.npos : end - start);
    start = end == text.npos ? text.size() + 1 : end + 1;
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (table.version_.empty()) {
        auto pos = line.find("version");
        if (pos != line.npos) table.version_ = std::string(trim(line.substr(pos + 7)));
      }
      continue;
    }
    if (!header_seen) {
      if (line != "dialect,raw,canonical,category,args") {
        throw OpcodeTableError(line_no, "expected header 'dialect,raw,canonical,category,args'");
      }
      header_seen = true;
      continue;
    }
    // `raw` may itself be a comma-free symbol like "|" or "-", so a plain split works.
    auto cols = split(line, ',');
    if (cols.size() != 5) throw OpcodeTableError(line_no, "expected 5 columns");
    const std::string dialect(trim(cols[0]));
    const std::string raw(trim(cols[1]));
    const std::string canonical(trim(cols[2]));
    auto category = parse_category(trim(cols[3]));
    if (!category) throw OpcodeTableError(line_no, "unknown category '" + cols[3] + "'");
    if (raw.empty() || canonical.empty()) throw OpcodeTableError(line_no, "empty opcode");

    if (dialect == "sb2") {
      table.sb2_[raw] = canonical;
    } else if (dialect == "sb3") {
      table.sb3_[raw] = canonical;
    } else {
      throw OpcodeTableError(line_no, "unknown dialect '" + dialect + "'");
    }
    auto [it, inserted] = table.canonical_.try_emplace(canonical);
    if (inserted) {
      it->second = OpcodeInfo{canonical, *category, parse_slots(cols[4])};
    } else if (it->second.category != *category) {
      throw OpcodeTableError(line_no, "conflicting category for " + canonical);
    }
  }
  if (!header_seen) throw OpcodeTableError(line_no, "missing header");
  return table;
}

const OpcodeTable& OpcodeTable::builtin() {
  static const OpcodeTable table = from_csv(resources::opcodes_csv);
  return table;
}

std::string OpcodeTable::normalize(Dialect dialect, std::string_view raw) const {
  if (raw.empty()) throw std::invalid_argument("normalize: empty opcode");
  const auto& map = dialect == Dialect::Sb2 ? sb2_ : sb3_;
  if (auto it = map.find(raw); it != map.end()) return it->second;
  return std::string(kUnknownPrefix) + std::string(raw);
}

bool OpcodeTable::knows(Dialect dialect, std::string_view raw) const {
  const auto& map = dialect == Dialect::Sb2 ? sb2_ : sb3_;
  return map.contains(raw);
}

Category OpcodeTable::category(std::string_view canonical) const {
  if (auto it = canonical_.find(canonical); it != canonical_.end()) return it->second.category;
  return Category::Custom;
}

const OpcodeInfo* OpcodeTable::info(std::string_view canonical) const {
  auto it = canonical_.find(canonical);
  return it == canonical_.end() ? nullptr : &it->second;
}

std::string normalize_opcode(Dialect dialect, std::string_view raw) {
  return OpcodeTable::builtin().normalize(dialect, raw);
}

Category block_category(std::string_view canonical) {
  return OpcodeTable::builtin().category(canonical);
}

}  // namespace blockscope
