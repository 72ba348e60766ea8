#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ks/common.hpp"

namespace ks::io {

/// "%.17g", with non-finite values mapped to `null`.
std::string format_number(double v);

/// Streaming JSON emitter with fixed key order (insertion order) and
/// 17-significant-digit numbers, two-space indentation.
class JsonWriter {
 public:
  explicit JsonWriter(std::ostream& out) : out_(out) {}

  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view k);

  JsonWriter& value(double v);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::size_t v) { return value(static_cast<std::int64_t>(v)); }
  JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  /// Complex numbers as [re, im].
  JsonWriter& value(cplx v);
  JsonWriter& value(const Vec3& v);
  JsonWriter& null();

  JsonWriter& values(const std::vector<double>& v);
  JsonWriter& matrix(const CMatrix& m);

  /// Terminates the document with a newline.
  void finish();

 private:
  void before_value();
  void newline();

  struct Frame {
    bool array;
    bool empty;
  };

  std::ostream& out_;
  std::vector<Frame> stack_;
  bool after_key_ = false;
};

std::string escape(std::string_view s);

}  // namespace ks::io
