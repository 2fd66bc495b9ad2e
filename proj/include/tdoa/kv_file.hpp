#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdoa {

/// Malformed input file. what() names the offending key and line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& key, int line, const std::string& msg);

  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

struct KvEntry {
  std::string key;
  std::string value;
  int line = 0;
};

/// Reads `key = value` lines. Blank lines and lines starting with '#' are
/// skipped; trailing `# ...` comments are stripped. Duplicate keys are an error.
std::vector<KvEntry> parse_kv(std::istream& in);

/// Whitespace-separated doubles from an entry's value.
std::vector<double> parse_numbers(const KvEntry& e);

/// Exactly n doubles, or ParseError.
std::vector<double> parse_numbers(const KvEntry& e, std::size_t n);

}  // namespace tdoa
