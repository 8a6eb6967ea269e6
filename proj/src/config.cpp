#include "robloc/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "robloc/errors.hpp"

namespace robloc {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  std::string t = trim(s);
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw Error(ErrorKind::config, fmt::format("{}: '{}' is not a number", what, s));
  return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::string t = trim(s);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec == std::errc() && p == t.data() + t.size() && !t.empty()) return v;
  // accept 1e5-style counts when they are integral
  double d = parse_double(t, what);
  if (d < 0 || d != static_cast<double>(static_cast<std::uint64_t>(d)))
    throw Error(ErrorKind::config, fmt::format("{}: '{}' is not a count", what, s));
  return static_cast<std::uint64_t>(d);
}

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::config, fmt::format("line {}: expected key = value", n));
    std::string k = trim(line.substr(0, eq));
    if (k.empty()) throw Error(ErrorKind::config, fmt::format("line {}: empty key", n));
    c.set(k, trim(line.substr(eq + 1)));
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::config, fmt::format("cannot open config '{}'", path));
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

bool Config::has(const std::string& key) const {
  return std::any_of(kv_.begin(), kv_.end(), [&](const auto& p) { return p.first == key; });
}

void Config::set(const std::string& key, const std::string& value) {
  for (auto& p : kv_)
    if (p.first == key) {
      p.second = value;
      return;
    }
  kv_.emplace_back(key, value);
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  for (const auto& p : kv_)
    if (p.first == key) return p.second;
  return fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? parse_double(get(key), key) : fallback;
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
  return has(key) ? static_cast<std::size_t>(parse_u64(get(key), key)) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? parse_u64(get(key), key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorKind::config, fmt::format("{}: '{}' is not a boolean", key, v));
}

std::vector<std::string> Config::get_list(const std::string& key) const { return split(get(key), ','); }

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : get_list(key)) out.push_back(parse_double(s, key));
  return out;
}

std::vector<std::string> Config::keys() const {
  std::vector<std::string> out;
  for (const auto& p : kv_) out.push_back(p.first);
  return out;
}

}  // namespace robloc
