#pragma once

#include <cstdint>
#include <string>

// Minimal UTF-8 decoding with byte offsets. Invalid sequences are not
// errors: each offending byte decodes as one code point 0xDC00+byte
// (lone surrogate range, never equal to any valid code point), so that
// downstream segmentation stays total on arbitrary input.

namespace mtpath {

struct Utf8Char {
  char32_t cp = 0;
  int start = 0;  // byte offset
  int end = 0;
};

class Utf8Cursor {
 public:
  explicit Utf8Cursor(const std::string& text) : text_(text) {}

  bool next(Utf8Char& out) {
    if (pos_ >= text_.size()) return false;
    out.start = static_cast<int>(pos_);
    unsigned char b0 = static_cast<unsigned char>(text_[pos_]);
    std::size_t len;
    char32_t cp;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 >> 5) == 0x6) {
      len = 2;
      cp = b0 & 0x1f;
    } else if ((b0 >> 4) == 0xe) {
      len = 3;
      cp = b0 & 0x0f;
    } else if ((b0 >> 3) == 0x1e) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      len = 1;
      cp = 0xDC00 + b0;
    }
    if (len > 1) {
      if (pos_ + len > text_.size()) {
        len = 1;
        cp = 0xDC00 + b0;
      } else {
        for (std::size_t k = 1; k < len; ++k) {
          unsigned char bk = static_cast<unsigned char>(text_[pos_ + k]);
          if ((bk >> 6) != 0x2) {
            len = 1;
            cp = 0xDC00 + b0;
            break;
          }
          cp = (cp << 6) | (bk & 0x3f);
        }
      }
    }
    pos_ += len;
    out.end = static_cast<int>(pos_);
    out.cp = cp;
    return true;
  }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace mtpath
