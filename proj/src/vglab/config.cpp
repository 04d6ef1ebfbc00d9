#include "vglab/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vglab/errors.hpp"

namespace vglab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) {
      return false;
    }
  }
  return true;
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  try {
    return from_string(ss.str());
  } catch (const Error& e) {
    throw config_error(std::string(e.what()) + " (in '" + path + "')");
  }
}

Config Config::from_string(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error("line " + std::to_string(lineno) +
                         ": expected key=value, got '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) {
      throw config_error("line " + std::to_string(lineno) + ": bad key '" + key + "'");
    }
    if (c.kv_.count(key)) {
      throw config_error("line " + std::to_string(lineno) + ": duplicate key '" +
                         key + "'");
    }
    c.kv_[key] = value;
  }
  return c;
}

void Config::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw config_error("bad key '" + key + "'");
  kv_[key] = value;
}

void Config::apply_override(const std::string& keyval) {
  std::size_t eq = keyval.find('=');
  if (eq == std::string::npos) {
    throw config_error("override '" + keyval + "' is not key=value");
  }
  set(trim(keyval.substr(0, eq)), trim(keyval.substr(eq + 1)));
}

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

std::string Config::fetch(const std::string& key) {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw config_error("missing required key '" + key + "'");
  consumed_.insert(key);
  return it->second;
}

std::string Config::get_string(const std::string& key) { return fetch(key); }

std::string Config::get_string(const std::string& key, const std::string& fallback) {
  if (!has(key)) return fallback;
  return fetch(key);
}

namespace {

double parse_double_strict(const std::string& key, const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw config_error("key '" + key + "': cannot parse '" + s + "' as a number");
  }
  return v;
}

long long parse_int_strict(const std::string& key, const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0') {
    throw config_error("key '" + key + "': cannot parse '" + s + "' as an integer");
  }
  return v;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& s, Parse parse) {
  std::vector<T> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (cur.empty()) {
      throw config_error("key '" + key + "': empty element in list '" + s + "'");
    }
    out.push_back(parse(key, cur));
  }
  if (out.empty()) throw config_error("key '" + key + "': empty list");
  return out;
}

}  // namespace

double Config::get_double(const std::string& key) {
  return parse_double_strict(key, fetch(key));
}

double Config::get_double(const std::string& key, double fallback) {
  if (!has(key)) return fallback;
  return get_double(key);
}

long long Config::get_int(const std::string& key) {
  return parse_int_strict(key, fetch(key));
}

long long Config::get_int(const std::string& key, long long fallback) {
  if (!has(key)) return fallback;
  return get_int(key);
}

bool Config::get_bool(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  std::string v = fetch(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw config_error("key '" + key + "': cannot parse '" + v + "' as a boolean");
}

std::vector<double> Config::get_double_list(const std::string& key) {
  return parse_list<double>(key, fetch(key), parse_double_strict);
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::vector<double>& fallback) {
  if (!has(key)) return fallback;
  return get_double_list(key);
}

std::vector<long long> Config::get_int_list(const std::string& key,
                                            const std::vector<long long>& fallback) {
  if (!has(key)) return fallback;
  return parse_list<long long>(key, fetch(key), parse_int_strict);
}

void Config::reject_unknown() const {
  std::string bad;
  for (const auto& [key, value] : kv_) {
    if (!consumed_.count(key)) {
      if (!bad.empty()) bad += ", ";
      bad += key;
    }
  }
  if (!bad.empty()) throw config_error("unknown config key(s): " + bad);
}

}  // namespace vglab
