#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hjd/core/errors.hpp"
#include "hjd/functionals/image_grid.hpp"

namespace hjd {

enum class PgmEncoding { ascii, binary };  // P2, P5

namespace detail {

class PgmCursor {
 public:
  explicit PgmCursor(const std::vector<unsigned char>& bytes) : b_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }

  // Whitespace and '#' comments between header tokens.
  void skip_separators() {
    while (pos_ < b_.size()) {
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(b_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* what) {
    skip_separators();
    const std::size_t start = pos_;
    long v = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      v = v * 10 + (b_[pos_] - '0');
      if (v > 1'000'000'000) throw IoError(std::string("pgm: ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start)
      throw IoError(std::string("pgm: expected ") + what + (pos_ >= b_.size() ? " before end of file" : ""),
                    start);
    return v;
  }

  void expect_single_space() {
    if (pos_ >= b_.size() || !std::isspace(b_[pos_])) throw IoError("pgm: expected whitespace after maxval", pos_);
    ++pos_;
  }

  std::size_t remaining() const noexcept { return b_.size() - pos_; }
  unsigned char byte() { return b_[pos_++]; }

 private:
  const std::vector<unsigned char>& b_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Pixel bytes map to reals unchanged.
inline ImageGrid parse_pgm(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw IoError("pgm: missing P2/P5 magic", 0);
  const bool binary = bytes[1] == '5';
  detail::PgmCursor c(bytes);
  c.byte();
  c.byte();
  const long cols = c.read_uint("width");
  const long rows = c.read_uint("height");
  c.skip_separators();
  const std::size_t maxval_at = c.offset();
  const long maxval = c.read_uint("maxval");
  if (cols <= 0 || rows <= 0) throw IoError("pgm: empty image", maxval_at);
  if (maxval < 1 || maxval > 255) throw IoError("pgm: maxval must lie in 1..255", maxval_at);
  const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  Vector values(static_cast<Index>(n));
  if (binary) {
    c.expect_single_space();
    if (c.remaining() < n) throw IoError("pgm: truncated pixel data", c.offset() + c.remaining());
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t at = c.offset();
      const unsigned char v = c.byte();
      if (v > maxval) throw IoError("pgm: pixel exceeds maxval", at);
      values[static_cast<Index>(i)] = v;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      c.skip_separators();
      const std::size_t at = c.offset();
      const long v = c.read_uint("pixel");
      if (v > maxval) throw IoError("pgm: pixel exceeds maxval", at);
      values[static_cast<Index>(i)] = static_cast<double>(v);
    }
  }
  return ImageGrid(rows, cols, std::move(values));
}

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path, 0);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline ImageGrid read_pgm(const std::string& path) { return parse_pgm(read_file_bytes(path)); }

// Value range mapped onto 0..255. Unset means the data range.
struct PgmRange {
  double lo = 0.0;
  double hi = 255.0;
};

inline std::vector<unsigned char> encode_pgm(const ImageGrid& g, std::optional<PgmRange> range = std::nullopt,
                                             PgmEncoding enc = PgmEncoding::binary) {
  const Vector& v = g.values();
  require_finite(v, "pgm output");
  double lo, hi;
  if (range) {
    lo = range->lo;
    hi = range->hi;
  } else {
    lo = v.size() ? v.minCoeff() : 0.0;
    hi = v.size() ? v.maxCoeff() : 0.0;
  }
  std::vector<unsigned char> px(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) {
    // a constant image has no range to stretch and is clamped as is
    const double s = hi > lo ? 255.0 * (v[i] - lo) / (hi - lo) : v[i];
    px[static_cast<std::size_t>(i)] = static_cast<unsigned char>(std::clamp(std::nearbyint(s), 0.0, 255.0));
  }
  std::ostringstream head;
  head << (enc == PgmEncoding::binary ? "P5" : "P2") << '\n' << g.cols() << ' ' << g.rows() << "\n255\n";
  const std::string h = head.str();
  std::vector<unsigned char> out(h.begin(), h.end());
  if (enc == PgmEncoding::binary) {
    out.insert(out.end(), px.begin(), px.end());
  } else {
    for (Index r = 0; r < g.rows(); ++r) {
      std::string line;
      for (Index c = 0; c < g.cols(); ++c) {
        if (c) line += ' ';
        line += std::to_string(px[static_cast<std::size_t>(r * g.cols() + c)]);
      }
      line += '\n';
      out.insert(out.end(), line.begin(), line.end());
    }
  }
  return out;
}

inline void write_file_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path, 0);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path, 0);
}

inline void write_pgm(const ImageGrid& g, const std::string& path, std::optional<PgmRange> range = std::nullopt,
                      PgmEncoding enc = PgmEncoding::binary) {
  write_file_bytes(path, encode_pgm(g, range, enc));
}

}  // namespace hjd
