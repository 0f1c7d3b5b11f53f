#ifndef ZSML_TEXT_FORMAT_HPP
#define ZSML_TEXT_FORMAT_HPP

#include <charconv>
#include <string>
#include <system_error>

namespace zsml {

// Shortest decimal representation that parses back to the same double.
// Used for every float we write, so reruns are byte-identical and
// save/load round-trips are lossless.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

} // namespace zsml

#endif // ZSML_TEXT_FORMAT_HPP
