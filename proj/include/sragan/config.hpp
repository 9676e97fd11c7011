#pragma once

#include <map>
#include <string>
#include <vector>

#include "sragan/common.hpp"

namespace sragan {

struct ConfigKey {
  std::string name;
  std::string type;  // int | float | str | flag-less bool is not used
  std::string default_value;
  std::string help;
};

/// Flat dotted-key = value configuration. The key set is fixed by schema();
/// unknown keys are rejected at parse time. The canonical snapshot() text is
/// embedded in checkpoints and reports for provenance and parses back losslessly.
class RunConfig {
 public:
  RunConfig();  // all defaults

  static const std::vector<ConfigKey>& schema();
  static RunConfig from_file(const std::string& path);
  static RunConfig from_text(const std::string& text);

  /// Applies one override; validates key existence and value type.
  void set(const std::string& key, const std::string& value);
  /// Applies a "key=value" override string (CLI --set form).
  void set_pair(const std::string& pair);

  int64_t get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  const std::string& get_str(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;  // comma-split

  /// Canonical "key = value" lines, sorted by key.
  std::string snapshot() const;

  /// One line per key with type, default and help text; backs `--help`.
  static std::string describe_keys();

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace sragan
