#include "lrbms/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lrbms/errors.hpp"

namespace lrbms {

namespace {
std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}
}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw config_error("line " + std::to_string(lineno) + ": empty key");
    if (cfg.entries_.count(key))
      throw config_error("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    cfg.entries_[key] = Entry{value, lineno, false};
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

void Config::set(const std::string& key, const std::string& value) { entries_[key] = Entry{value, 0, false}; }

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

const Config::Entry* Config::find(const std::string& key) {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  it->second.consumed = true;
  return &it->second;
}

void Config::note(const std::string& key, const std::string& value) { resolved_[key] = value; }

std::string Config::get_string(const std::string& key, const std::string& fallback) {
  const Entry* e = find(key);
  const std::string v = e ? e->value : fallback;
  note(key, v);
  return v;
}

std::string Config::require_string(const std::string& key) {
  const Entry* e = find(key);
  if (!e) throw config_error("missing required key '" + key + "'");
  note(key, e->value);
  return e->value;
}

long long Config::get_int(const std::string& key, long long fallback) {
  const Entry* e = find(key);
  if (!e) {
    note(key, std::to_string(fallback));
    return fallback;
  }
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(e->value, &pos);
    if (pos != e->value.size()) throw std::invalid_argument("");
    note(key, e->value);
    return v;
  } catch (const std::exception&) {
    throw config_error("line " + std::to_string(e->line) + ": '" + key + "' expects an integer");
  }
}

double Config::get_double(const std::string& key, double fallback) {
  const Entry* e = find(key);
  if (!e) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", fallback);
    note(key, buf);
    return fallback;
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(e->value, &pos);
    if (pos != e->value.size()) throw std::invalid_argument("");
    note(key, e->value);
    return v;
  } catch (const std::exception&) {
    throw config_error("line " + std::to_string(e->line) + ": '" + key + "' expects a number");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) {
  const Entry* e = find(key);
  if (!e) {
    note(key, fallback ? "true" : "false");
    return fallback;
  }
  if (e->value == "true") {
    note(key, "true");
    return true;
  }
  if (e->value == "false") {
    note(key, "false");
    return false;
  }
  throw config_error("line " + std::to_string(e->line) + ": '" + key + "' expects true or false");
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) {
  const Entry* e = find(key);
  if (!e) {
    note(key, std::to_string(fallback));
    return fallback;
  }
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(e->value, &pos);
    if (pos != e->value.size()) throw std::invalid_argument("");
    note(key, e->value);
    return v;
  } catch (const std::exception&) {
    throw config_error("line " + std::to_string(e->line) + ": '" + key + "' expects an unsigned integer");
  }
}

void Config::require_all_consumed() const {
  for (const auto& [key, e] : entries_)
    if (!e.consumed)
      throw config_error("line " + std::to_string(e.line) + ": unknown key '" + key + "'");
}

}  // namespace lrbms
