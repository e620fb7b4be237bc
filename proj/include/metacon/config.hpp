#pragma once

#include <map>
#include <string>
#include <vector>

namespace metacon {

// Sectioned key-value config files:
//   [section]
//   key = value        # comment
// Values may be quoted; lists are comma-separated. Keys are addressed as
// "section.key".
class Config {
 public:
  static Config parse_string(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string str(const std::string& key, const std::string& def = "") const;
  double real(const std::string& key, double def) const;
  long integer(const std::string& key, long def) const;
  bool boolean(const std::string& key, bool def) const;
  std::vector<std::string> list(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return kv_; }
  std::string dump() const;  // canonical text form, copied into run dirs

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace metacon
