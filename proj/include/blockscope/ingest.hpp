#pragma once

// Loading .sb2 / .sb3 archives and corpus metadata.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "blockscope/model.hpp"
#include "blockscope/opcode_table.hpp"

namespace blockscope {

enum class IngestErrorKind {
  NotAZip,
  MissingProjectJson,
  AmbiguousDialect,
  MalformedJson,
  UnsupportedFeature,
  EmptyCorpus,
  MetadataParseError,
  DuplicateProjectId,
  Io,
};

std::string_view to_string(IngestErrorKind kind);

class IngestError : public std::runtime_error {
 public:
  IngestError(IngestErrorKind kind, std::string path, const std::string& detail,
              std::optional<std::size_t> position = std::nullopt);

  IngestErrorKind kind() const { return kind_; }
  const std::string& path() const { return path_; }
  // Byte offset for MalformedJson, 1-based line for MetadataParseError.
  std::optional<std::size_t> position() const { return position_; }

 private:
  IngestErrorKind kind_;
  std::string path_;
  std::optional<std::size_t> position_;
};

struct Diagnostic {
  std::string archive;  // path of the archive (or metadata file) concerned
  std::string code;     // e.g. "NotAZip", "DefaultUnmodified", "UnsupportedFeature"
  std::string message;
  bool excludes_project = false;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct LoadOptions {
  bool strict = false;
  const OpcodeTable* table = nullptr;  // builtin table when null
};

Dialect detect_dialect(std::span<const std::uint8_t> archive);

// Parses an already-extracted project.json. `id` becomes Project::id/name.
Project parse_project_json(std::string_view json, const std::string& id,
                           std::vector<Diagnostic>* diagnostics = nullptr, const LoadOptions& options = {});

Project load_project(const std::filesystem::path& path, std::vector<Diagnostic>* diagnostics = nullptr,
                     const LoadOptions& options = {});

// Only the default sprite with default assets and no code.
bool is_default_unmodified(const Project& project);

struct ProjectMeta {
  std::string group = "unknown";
  std::optional<int> age;
  friend bool operator==(const ProjectMeta&, const ProjectMeta&) = default;
};

// Headered CSV `project_id,group,age`.
std::map<std::string, ProjectMeta> parse_metadata(std::string_view csv, const std::string& path = "metadata.csv");

struct Corpus {
  std::vector<Project> projects;  // sorted by id
  std::map<std::string, ProjectMeta> metadata;
  std::vector<Diagnostic> warnings;
  std::size_t archives_seen = 0;

  const ProjectMeta& meta(const std::string& id) const;
  std::size_t excluded_count() const;
};

struct CorpusOptions {
  bool strict = false;
  unsigned jobs = 1;
  const OpcodeTable* table = nullptr;
};

// `metadata` may be empty, in which case every project is in group "unknown".
Corpus load_corpus(const std::filesystem::path& dir, const std::filesystem::path& metadata,
                   const CorpusOptions& options = {});

// Shortest round-trippable decimal form; integral values print without a point.
std::string format_number(double value);

}  // namespace blockscope
