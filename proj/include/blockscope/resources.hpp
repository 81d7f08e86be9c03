#pragma once

#include <string_view>

// Data files compiled into the library (see cmake/EmbedResources.cmake).
namespace blockscope::resources {
extern const std::string_view opcodes_csv;
extern const std::string_view stopwords_en;
extern const std::string_view stopwords_de;
}  // namespace blockscope::resources
