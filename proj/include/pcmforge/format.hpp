//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef PCMFORGE_FORMAT_HPP_
#define PCMFORGE_FORMAT_HPP_

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

namespace pcmforge {

/// Shortest decimal that parses back to exactly `value`.
inline std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

/// Strict full-string parse; returns false on trailing garbage.
inline bool parse_double(std::string_view text, double &out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
    text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                           text.back() == '\r'))
    text.remove_suffix(1);
  if (text.empty())
    return false;
  if (text.front() == '+')
    text.remove_prefix(1);
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

} // namespace pcmforge

#endif // PCMFORGE_FORMAT_HPP_
