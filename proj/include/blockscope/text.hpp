#pragma once

// Textual tokens of projects and the document-term matrix built from them.

#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "blockscope/model.hpp"

namespace blockscope {

struct TokenDocument {
  std::string project_id;
  std::vector<std::string> tokens;
  friend bool operator==(const TokenDocument&, const TokenDocument&) = default;
};

// Lowercases ASCII, Latin-1, Latin Extended-A, basic Greek and Cyrillic.
std::string utf8_lower(std::string_view text);
// Number of code points.
std::size_t utf8_length(std::string_view text);

// Splits on whitespace and punctuation (ASCII and the common Unicode
// punctuation blocks), lowercasing each piece. Letters such as ä, ß stay.
std::vector<std::string> split_words(std::string_view text);

// Sprite names (not the stage), costume and backdrop names, sound names,
// variable and list names, broadcast messages and every literal input.
TokenDocument extract_tokens(const Project& project);

struct StopwordConfig {
  std::set<std::string, std::less<>> english;
  std::set<std::string, std::less<>> german;
  std::set<std::string, std::less<>> custom;

  // Bundled English/German lists plus the eight project-specific words.
  static StopwordConfig defaults();
  bool contains(std::string_view token) const;
};

// Parses a word list: one word per line, `#` comments, blank lines ignored.
std::set<std::string, std::less<>> parse_word_list(std::string_view text);

// Lowercase, drop stopwords, pure-digit tokens and tokens shorter than two
// characters. Order is preserved.
TokenDocument preprocess(const TokenDocument& doc, const StopwordConfig& stopwords);

class EmptyVocabulary : public std::runtime_error {
 public:
  explicit EmptyVocabulary(std::size_t min_count)
      : std::runtime_error("no term occurs at least " + std::to_string(min_count) +
                           " times (min_count=" + std::to_string(min_count) + ")"),
        min_count_(min_count) {}
  std::size_t min_count() const { return min_count_; }

 private:
  std::size_t min_count_;
};

struct DocumentTermMatrix {
  std::vector<std::string> vocabulary;  // sorted
  std::vector<std::string> document_ids;
  std::vector<std::vector<std::uint32_t>> counts;  // documents x vocabulary

  std::size_t documents() const { return counts.size(); }
  std::size_t terms() const { return vocabulary.size(); }
  std::uint64_t row_total(std::size_t doc) const;
};

// Keeps terms whose corpus frequency is >= min_count.
DocumentTermMatrix build_dtm(std::span<const TokenDocument> documents, std::size_t min_count = 10);

}  // namespace blockscope
