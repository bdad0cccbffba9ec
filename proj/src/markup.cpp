#include "mtpath/markup.hpp"

#include <stdexcept>

#include "mtpath/errors.hpp"

namespace mtpath {

namespace {

void check_delims(const std::string& open, const std::string& close) {
  if (open.empty() || close.empty() || open == close)
    throw std::invalid_argument("markup delimiters must be distinct and non-empty");
}

}  // namespace

ParsedMarkup parse_span_markup(const std::string& marked, const std::string& open,
                               const std::string& close) {
  check_delims(open, close);
  // Count mismatches are unbalanced markup regardless of where they sit;
  // nesting is only meaningful once the counts agree.
  std::size_t n_open = 0, n_close = 0;
  for (std::size_t i = 0; i < marked.size();) {
    bool at_open = marked.compare(i, open.size(), open) == 0;
    bool at_close = marked.compare(i, close.size(), close) == 0;
    if (at_open && at_close) {  // one delimiter is a prefix of the other
      if (open.size() > close.size())
        at_close = false;
      else
        at_open = false;
    }
    if (at_open) {
      ++n_open;
      i += open.size();
    } else if (at_close) {
      ++n_close;
      i += close.size();
    } else {
      ++i;
    }
  }
  if (n_open != n_close)
    throw Error(ErrorCode::UnbalancedMarkup, std::to_string(n_open) + " open vs " +
                                                 std::to_string(n_close) + " close delimiters");
  ParsedMarkup out;
  out.plain.reserve(marked.size());
  bool in_span = false;
  int span_start = 0;
  std::size_t i = 0;
  while (i < marked.size()) {
    bool at_open = marked.compare(i, open.size(), open) == 0;
    bool at_close = marked.compare(i, close.size(), close) == 0;
    if (at_open && at_close) {  // one delimiter is a prefix of the other
      if (open.size() > close.size())
        at_close = false;
      else
        at_open = false;
    }
    if (at_open) {
      if (in_span)
        throw Error(ErrorCode::NestedMarkup,
                    "open delimiter inside a span at byte " + std::to_string(i));
      in_span = true;
      span_start = static_cast<int>(out.plain.size());
      i += open.size();
    } else if (at_close) {
      if (!in_span)
        throw Error(ErrorCode::UnbalancedMarkup,
                    "close delimiter without open at byte " + std::to_string(i));
      int span_end = static_cast<int>(out.plain.size());
      if (span_end == span_start) throw Error(ErrorCode::EmptySpan, "span has no content");
      out.spans.push_back({span_start, span_end});
      in_span = false;
      i += close.size();
    } else {
      out.plain.push_back(marked[i]);
      ++i;
    }
  }
  if (in_span) throw Error(ErrorCode::UnbalancedMarkup, "open delimiter never closed");
  return out;
}

std::string render_span_markup(const std::string& plain, const std::vector<AnnotatedSpan>& spans,
                               const std::string& open, const std::string& close) {
  check_delims(open, close);
  int prev_end = 0;
  for (const auto& s : spans) {
    if (s.start < prev_end || s.start >= s.end || s.end > static_cast<int>(plain.size()))
      throw std::invalid_argument("spans must be sorted, non-overlapping, non-empty, in bounds");
    prev_end = s.end;
  }
  std::string out;
  out.reserve(plain.size() + spans.size() * (open.size() + close.size()));
  std::size_t pos = 0;
  for (const auto& s : spans) {
    out.append(plain, pos, static_cast<std::size_t>(s.start) - pos);
    out += open;
    out.append(plain, static_cast<std::size_t>(s.start),
               static_cast<std::size_t>(s.end - s.start));
    out += close;
    pos = static_cast<std::size_t>(s.end);
  }
  out.append(plain, pos, plain.size() - pos);
  return out;
}

}  // namespace mtpath
