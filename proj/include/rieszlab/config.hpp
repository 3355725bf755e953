#pragma once

#include <map>
#include <string>
#include <vector>

namespace rieszlab {

// Minimal TOML subset used for experiment configs: comments, [section],
// [[array-of-table]], and flat key = value lines where value is a quoted
// string, a number, true/false, or a one-level array of those. Every parsed
// value remembers its line for error messages.
struct TomlValue {
  enum class Kind { String, Number, Boolean, Array };
  Kind kind = Kind::Number;
  std::string str;
  double num = 0.0;
  bool boolean = false;
  std::vector<TomlValue> array;
  int line = 0;
};

struct TomlTable {
  std::string name;    // "" for the root table
  std::string origin;  // file name for error messages
  int line = 0;
  std::map<std::string, TomlValue> entries;

  bool has(const std::string& key) const;
  const TomlValue& at(const std::string& key) const;  // throws if missing

  double number(const std::string& key) const;
  double number_or(const std::string& key, double dflt) const;
  std::string string(const std::string& key) const;
  std::string string_or(const std::string& key, const std::string& dflt) const;
  bool boolean_or(const std::string& key, bool dflt) const;
  std::vector<double> numbers_or(const std::string& key,
                                 std::vector<double> dflt) const;
};

struct TomlDocument {
  TomlTable root;
  std::vector<TomlTable> tables;  // in file order

  std::vector<const TomlTable*> named(const std::string& name) const;
  // The section if present exactly once, nullptr if absent.
  const TomlTable* unique(const std::string& name) const;
};

// Throws std::runtime_error with "<origin>:<line>: ..." messages.
TomlDocument parse_toml(const std::string& text,
                        const std::string& origin = "config");
TomlDocument parse_toml_file(const std::string& path);

}  // namespace rieszlab
