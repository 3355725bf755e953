#include "rieszlab/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rieszlab {

namespace {

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& msg) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Cut a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

TomlValue parse_scalar(const std::string& raw, const std::string& origin,
                       int line) {
  TomlValue v;
  v.line = line;
  std::string s = trim(raw);
  if (s.empty()) fail(origin, line, "empty value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      fail(origin, line, "unterminated string");
    v.kind = TomlValue::Kind::String;
    std::string body = s.substr(1, s.size() - 2);
    std::string out;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '\\' && i + 1 < body.size() &&
          (body[i + 1] == '"' || body[i + 1] == '\\')) {
        out += body[++i];
      } else {
        out += body[i];
      }
    }
    v.str = out;
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = TomlValue::Kind::Boolean;
    v.boolean = s == "true";
    return v;
  }
  char* end = nullptr;
  double num = std::strtod(s.c_str(), &end);
  if (end == nullptr || *end != '\0')
    fail(origin, line, "cannot parse value '" + s + "'");
  v.kind = TomlValue::Kind::Number;
  v.num = num;
  return v;
}

TomlValue parse_value(const std::string& raw, const std::string& origin,
                      int line) {
  std::string s = trim(raw);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') fail(origin, line, "unterminated array");
    TomlValue v;
    v.kind = TomlValue::Kind::Array;
    v.line = line;
    std::string body = s.substr(1, s.size() - 2);
    std::string item;
    bool in_str = false;
    for (std::size_t i = 0; i <= body.size(); ++i) {
      char c = i < body.size() ? body[i] : ',';
      if (c == '"' && (i == 0 || body[i - 1] != '\\')) in_str = !in_str;
      if (c == '[' && !in_str)
        fail(origin, line, "nested arrays are not supported");
      if (c == ',' && !in_str) {
        if (!trim(item).empty())
          v.array.push_back(parse_scalar(item, origin, line));
        item.clear();
      } else {
        item += c;
      }
    }
    return v;
  }
  return parse_scalar(s, origin, line);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' &&
        c != '.')
      return false;
  return true;
}

}  // namespace

bool TomlTable::has(const std::string& key) const {
  return entries.count(key) != 0;
}

const TomlValue& TomlTable::at(const std::string& key) const {
  auto it = entries.find(key);
  if (it == entries.end())
    fail(origin, line,
         "table " + (name.empty() ? "(root)" : "[" + name + "]") +
             " is missing required key '" + key + "'");
  return it->second;
}

double TomlTable::number(const std::string& key) const {
  const TomlValue& v = at(key);
  if (v.kind != TomlValue::Kind::Number)
    fail(origin, v.line, "key '" + key + "' expected a number");
  return v.num;
}

double TomlTable::number_or(const std::string& key, double dflt) const {
  return has(key) ? number(key) : dflt;
}

std::string TomlTable::string(const std::string& key) const {
  const TomlValue& v = at(key);
  if (v.kind != TomlValue::Kind::String)
    fail(origin, v.line, "key '" + key + "' expected a string");
  return v.str;
}

std::string TomlTable::string_or(const std::string& key,
                                 const std::string& dflt) const {
  return has(key) ? string(key) : dflt;
}

bool TomlTable::boolean_or(const std::string& key, bool dflt) const {
  if (!has(key)) return dflt;
  const TomlValue& v = at(key);
  if (v.kind != TomlValue::Kind::Boolean)
    fail(origin, v.line, "key '" + key + "' expected true or false");
  return v.boolean;
}

std::vector<double> TomlTable::numbers_or(const std::string& key,
                                          std::vector<double> dflt) const {
  if (!has(key)) return dflt;
  const TomlValue& v = at(key);
  if (v.kind == TomlValue::Kind::Number) return {v.num};
  if (v.kind != TomlValue::Kind::Array)
    fail(origin, v.line, "key '" + key + "' expected an array of numbers");
  std::vector<double> out;
  for (const TomlValue& e : v.array) {
    if (e.kind != TomlValue::Kind::Number)
      fail(origin, v.line, "key '" + key + "' expected an array of numbers");
    out.push_back(e.num);
  }
  return out;
}

std::vector<const TomlTable*> TomlDocument::named(
    const std::string& name) const {
  std::vector<const TomlTable*> out;
  for (const TomlTable& t : tables)
    if (t.name == name) out.push_back(&t);
  return out;
}

const TomlTable* TomlDocument::unique(const std::string& name) const {
  auto all = named(name);
  if (all.empty()) return nullptr;
  if (all.size() > 1)
    fail(all[1]->origin, all[1]->line,
         "section [" + name + "] appears more than once");
  return all[0];
}

TomlDocument parse_toml(const std::string& text, const std::string& origin) {
  TomlDocument doc;
  doc.root.origin = origin;
  doc.root.line = 1;
  TomlTable* current = &doc.root;
  std::map<std::string, int> plain_sections;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;

    if (s.front() == '[') {
      bool is_array = s.size() > 1 && s[1] == '[';
      std::string close = is_array ? "]]" : "]";
      if (s.size() < 2 + close.size() ||
          s.substr(s.size() - close.size()) != close)
        fail(origin, line, "malformed section header '" + s + "'");
      std::string name = trim(
          s.substr(is_array ? 2 : 1, s.size() - 2 * (is_array ? 2 : 1)));
      if (!valid_key(name))
        fail(origin, line, "invalid section name '" + name + "'");
      if (!is_array) {
        auto prev = plain_sections.find(name);
        if (prev != plain_sections.end())
          fail(origin, line,
               "section [" + name + "] already declared at line " +
                   std::to_string(prev->second));
        plain_sections[name] = line;
      }
      TomlTable t;
      t.name = name;
      t.origin = origin;
      t.line = line;
      doc.tables.push_back(std::move(t));
      current = &doc.tables.back();
      continue;
    }

    auto eq = s.find('=');
    if (eq == std::string::npos)
      fail(origin, line, "expected 'key = value', got '" + s + "'");
    std::string key = trim(s.substr(0, eq));
    if (!valid_key(key)) fail(origin, line, "invalid key '" + key + "'");
    if (current->entries.count(key))
      fail(origin, line,
           "key '" + key + "' already set at line " +
               std::to_string(current->entries[key].line));
    current->entries[key] = parse_value(s.substr(eq + 1), origin, line);
  }
  return doc;
}

TomlDocument parse_toml_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str(), path);
}

}  // namespace rieszlab
