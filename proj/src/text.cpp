#include "blockscope/text.hpp"

#include <algorithm>
#include <map>

#include "blockscope/resources.hpp"

namespace blockscope {

namespace {

// Decodes one code point; malformed bytes are passed through as Latin-1.
char32_t decode(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto c = static_cast<unsigned char>(s[i + k]);
    return (c & 0xC0) == 0x80 ? (c & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) {
      i += 2;
      return static_cast<char32_t>(((b0 & 0x1F) << 6) | c1);
    }
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      i += 3;
      return static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2);
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      i += 4;
      return static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3);
    }
  }
  ++i;
  return b0;
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

char32_t lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 0x20;
  if (c < 0xC0) return c;
  if (c <= 0xDE) return c == 0xD7 ? c : c + 0x20;
  if (c >= 0x100 && c <= 0x17F) {
    if (c == 0x130) return 'i';
    if (c == 0x178) return 0xFF;
    const bool odd_upper = (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
    if (odd_upper) return (c % 2 == 1) ? c + 1 : c;
    if (c == 0x138 || c == 0x149 || c == 0x17F) return c;
    return (c % 2 == 0) ? c + 1 : c;
  }
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

bool is_separator(char32_t c) {
  if (c < 0x80) return !((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'));
  // Latin-1 punctuation and symbols, keeping ª µ º and the superscript digits.
  if (c >= 0x80 && c <= 0xBF) return !(c == 0xAA || c == 0xB5 || c == 0xBA || c == 0xB2 || c == 0xB3 || c == 0xB9);
  if (c == 0xD7 || c == 0xF7) return true;
  if (c == 0x1680 || c == 0x180E) return true;
  if (c >= 0x2000 && c <= 0x206F) return true;  // general punctuation and spaces
  if (c >= 0x2E00 && c <= 0x2E7F) return true;  // supplemental punctuation
  if (c >= 0x3000 && c <= 0x303F) return true;  // CJK punctuation
  if (c >= 0xFE30 && c <= 0xFE4F) return true;
  if (c >= 0xFF01 && c <= 0xFF0F) return true;
  if (c >= 0xFF1A && c <= 0xFF20) return true;
  if (c >= 0xFF3B && c <= 0xFF40) return true;
  if (c >= 0xFF5B && c <= 0xFF65) return true;
  if (c == 0xFEFF) return true;
  return false;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void collect_block_text(const Block& b, std::vector<std::string>& out) {
  const bool broadcast = b.opcode == "event_broadcast" || b.opcode == "event_broadcastandwait" ||
                         b.opcode == "event_whenbroadcastreceived";
  for (const Input& in : b.inputs) {
    if (const auto* lit = std::get_if<Literal>(&in.value)) {
      for (auto& w : split_words(lit->text)) out.push_back(std::move(w));
    } else if (const auto* menu = std::get_if<MenuSelection>(&in.value)) {
      if (broadcast && (in.slot == "BROADCAST_INPUT" || in.slot == "BROADCAST_OPTION")) {
        for (auto& w : split_words(menu->value)) out.push_back(std::move(w));
      }
    }
  }
}

}  // namespace

std::string utf8_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) encode(lower(decode(text, i)), out);
  return out;
}

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < text.size(); ++n) decode(text, i);
  return n;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (std::size_t i = 0; i < text.size();) {
    const char32_t c = decode(text, i);
    if (is_separator(c)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      encode(lower(c), cur);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

TokenDocument extract_tokens(const Project& project) {
  TokenDocument doc;
  doc.project_id = project.id;
  auto add = [&](std::string_view text) {
    for (auto& w : split_words(text)) doc.tokens.push_back(std::move(w));
  };
  for (const Sprite* s : targets(project)) {
    if (!s->is_stage) add(s->name);
    for (const Asset& c : s->costumes) add(c.name);
    for (const Asset& a : s->sounds) add(a.name);
    for (const Variable& v : s->variables) add(v.name);
    for (const ListDecl& l : s->lists) add(l.name);
  }
  for_each_block(project, [&](const Block& b, const BlockSite&) { collect_block_text(b, doc.tokens); });
  return doc;
}

std::set<std::string, std::less<>> parse_word_list(std::string_view text) {
  std::set<std::string, std::less<>> words;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r' || line.back() == '\t')) line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (!line.empty()) words.insert(utf8_lower(line));
    pos = end + 1;
  }
  return words;
}

StopwordConfig StopwordConfig::defaults() {
  StopwordConfig cfg;
  cfg.english = parse_word_list(resources::stopwords_en);
  cfg.german = parse_word_list(resources::stopwords_de);
  cfg.custom = {"stage", "bühnenbild", "pop", "plopp", "kostüm", "figur", "block", "hintergrund"};
  return cfg;
}

bool StopwordConfig::contains(std::string_view token) const {
  return english.contains(token) || german.contains(token) || custom.contains(token);
}

TokenDocument preprocess(const TokenDocument& doc, const StopwordConfig& stopwords) {
  TokenDocument out;
  out.project_id = doc.project_id;
  for (const std::string& raw : doc.tokens) {
    std::string t = utf8_lower(raw);
    if (stopwords.contains(t) || all_digits(t) || utf8_length(t) < 2) continue;
    out.tokens.push_back(std::move(t));
  }
  return out;
}

std::uint64_t DocumentTermMatrix::row_total(std::size_t doc) const {
  std::uint64_t n = 0;
  for (std::uint32_t c : counts.at(doc)) n += c;
  return n;
}

DocumentTermMatrix build_dtm(std::span<const TokenDocument> documents, std::size_t min_count) {
  if (documents.empty()) throw std::invalid_argument("build_dtm: no documents");
  std::map<std::string, std::uint64_t> freq;
  for (const TokenDocument& d : documents) {
    for (const std::string& t : d.tokens) ++freq[t];
  }
  DocumentTermMatrix dtm;
  std::map<std::string_view, std::size_t> index;
  for (const auto& [term, n] : freq) {
    if (n >= min_count) {
      index.emplace(term, dtm.vocabulary.size());
      dtm.vocabulary.push_back(term);
    }
  }
  if (dtm.vocabulary.empty()) throw EmptyVocabulary(min_count);
  for (const TokenDocument& d : documents) {
    dtm.document_ids.push_back(d.project_id);
    std::vector<std::uint32_t> row(dtm.vocabulary.size(), 0);
    for (const std::string& t : d.tokens) {
      if (auto it = index.find(t); it != index.end()) ++row[it->second];
    }
    dtm.counts.push_back(std::move(row));
  }
  return dtm;
}

}  // namespace blockscope
