#pragma once

// Access to the hand-written fixture projects under tests/fixtures.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "blockscope/report.hpp"
#include "blockscope/zip.hpp"

#ifndef BLOCKSCOPE_FIXTURES
#error "BLOCKSCOPE_FIXTURES must point at tests/fixtures"
#endif

namespace testsupport {

inline std::filesystem::path fixture_dir() { return BLOCKSCOPE_FIXTURES; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct FormatCase {
  std::string name;
  std::size_t sprites = 0;
  std::size_t scripts = 0;
  std::size_t orphans = 0;
  std::size_t blocks = 0;
};

inline std::vector<FormatCase> format_cases() {
  std::string text = slurp(fixture_dir() / "formats" / "expected.csv");
  // Drop the comment line.
  while (!text.empty() && text.front() == '#') text.erase(0, text.find('\n') + 1);
  const auto table = blockscope::parse_csv(text);
  std::vector<FormatCase> out;
  for (const auto& r : table.rows) {
    out.push_back(FormatCase{r[table.column("name")], std::stoul(r[table.column("sprites")]),
                             std::stoul(r[table.column("scripts")]), std::stoul(r[table.column("orphans")]),
                             std::stoul(r[table.column("blocks")])});
  }
  return out;
}

// Zips fixtures/formats/<name>.<ext>.json into <dir>/<name>.<ext>.
inline std::filesystem::path zip_fixture(const std::filesystem::path& dir, const std::string& name, const std::string& ext,
                                         bool deflate = true) {
  blockscope::zip::Writer w;
  w.add("project.json", slurp(fixture_dir() / "formats" / (name + "." + ext + ".json")), deflate);
  const auto path = dir / (name + "." + ext);
  blockscope::zip::write_file(path.string(), w.finish());
  return path;
}

}  // namespace testsupport
