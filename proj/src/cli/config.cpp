#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "csm/cli.hpp"
#include "csm/errors.hpp"

namespace csm::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool valid_key(const std::string& key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  return std::all_of(key.begin(), key.end(), [](unsigned char ch) {
    return std::isalnum(ch) || ch == '_' || ch == '.' || ch == '-';
  });
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

}  // namespace

Config Config::parse(std::istream& in) {
  Config cfg;
  std::string raw;
  std::string section;
  long line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw InputError("unterminated section header", line);
      section = trim(text.substr(1, text.size() - 2));
      if (!section.empty() && !valid_key(section)) throw InputError("invalid section name '" + section + "'", line);
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw InputError("expected 'key = value'", line);
    const std::string key = trim(text.substr(0, eq));
    if (!valid_key(key)) throw InputError("invalid key '" + key + "'", line);
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.values_.count(full)) throw InputError("duplicate key '" + full + "'", line);
    cfg.values_[full] = {trim(text.substr(eq + 1)), line};
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  return parse(in);
}

const Config::Entry* Config::find(const std::string& key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

void Config::bad_value(const std::string& key, const char* what) const {
  const Entry* e = find(key);
  throw InputError("key '" + key + "': " + what + " (got '" + (e ? e->value : "") + "')",
                   e ? static_cast<std::size_t>(e->line) : 0);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const Entry* e = find(key);
  const std::string v = e ? e->value : fallback;
  used_[key] = v;
  return v;
}

double Config::get_double(const std::string& key, double fallback) const {
  const Entry* e = find(key);
  if (!e) {
    used_[key] = format_number(fallback);
    return fallback;
  }
  char* end = nullptr;
  const double v = std::strtod(e->value.c_str(), &end);
  if (e->value.empty() || *end != '\0') bad_value(key, "expected a number");
  used_[key] = e->value;
  return v;
}

long Config::get_long(const std::string& key, long fallback) const {
  const Entry* e = find(key);
  if (!e) {
    used_[key] = std::to_string(fallback);
    return fallback;
  }
  long v = 0;
  const char* first = e->value.data();
  const char* last = first + e->value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) bad_value(key, "expected an integer");
  used_[key] = e->value;
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) {
    used_[key] = fallback ? "true" : "false";
    return fallback;
  }
  std::string v = e->value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  used_[key] = v;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, "expected a boolean");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const Entry* e = find(key);
  if (!e) {
    std::vector<std::string> shown;
    for (double x : fallback) shown.push_back(format_number(x));
    used_[key] = join(shown);
    return fallback;
  }
  std::vector<double> out;
  for (const auto& item : split_list(e->value)) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (*end != '\0') bad_value(key, "expected a comma-separated list of numbers");
    out.push_back(v);
  }
  used_[key] = e->value;
  return out;
}

std::vector<std::string> Config::get_strings(const std::string& key,
                                             const std::vector<std::string>& fallback) const {
  const Entry* e = find(key);
  auto out = e ? split_list(e->value) : fallback;
  used_[key] = join(out);
  return out;
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, entry] : values_)
    if (!used_.count(key)) out.push_back(key);
  return out;
}

void Config::echo(std::ostream& out) const {
  for (const auto& [key, value] : used_) out << key << " = " << value << '\n';
}

}  // namespace csm::cli
