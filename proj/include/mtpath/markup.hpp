#pragma once

#include <string>
#include <vector>

#include "mtpath/types.hpp"

namespace mtpath {

struct ParsedMarkup {
  std::string plain;                // marked text with all delimiters removed
  std::vector<AnnotatedSpan> spans; // byte offsets into plain, sorted, non-overlapping
};

// Delimiters must be distinct and non-empty. When one delimiter is a prefix
// of the other, the longer match wins at any position (maximal munch).
ParsedMarkup parse_span_markup(const std::string& marked, const std::string& open,
                               const std::string& close);

// Inverse of parse_span_markup; spans must be sorted, non-overlapping,
// non-empty, and within bounds.
std::string render_span_markup(const std::string& plain, const std::vector<AnnotatedSpan>& spans,
                               const std::string& open, const std::string& close);

}  // namespace mtpath
