#include "tdoa/kv_file.hpp"

#include <cerrno>
#include <cstdlib>
#include <istream>
#include <set>
#include <sstream>

namespace tdoa {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

ParseError::ParseError(const std::string& key, int line, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ", key '" + key + "': " + msg),
      key_(key),
      line_(line) {}

std::vector<KvEntry> parse_kv(std::istream& in) {
  std::vector<KvEntry> out;
  std::set<std::string> seen;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line, lineno, "expected 'key = value'");
    KvEntry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno};
    if (e.key.empty()) throw ParseError("", lineno, "empty key");
    if (e.value.empty()) throw ParseError(e.key, lineno, "missing value");
    if (!seen.insert(e.key).second) throw ParseError(e.key, lineno, "duplicate key");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<double> parse_numbers(const KvEntry& e) {
  std::vector<double> out;
  std::istringstream ss(e.value);
  std::string tok;
  while (ss >> tok) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE) {
      throw ParseError(e.key, e.line, "not a number: '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<double> parse_numbers(const KvEntry& e, std::size_t n) {
  auto v = parse_numbers(e);
  if (v.size() != n) {
    throw ParseError(e.key, e.line,
                     "expected " + std::to_string(n) + " number(s), got " + std::to_string(v.size()));
  }
  return v;
}

}  // namespace tdoa
