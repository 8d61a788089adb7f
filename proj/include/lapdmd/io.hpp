#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lapdmd/kedmd.hpp"
#include "lapdmd/types.hpp"

namespace lapdmd {

/// Parses a rectangular numeric CSV. A first row containing any non-numeric
/// cell is treated as a header and becomes time_labels.
DataMatrix parse_csv(std::string_view text, const std::string& origin = "<memory>");
DataMatrix load_csv(const std::filesystem::path& path);

/// 17 significant digits, '.' decimal point, optional header from time_labels.
std::string format_csv(const Matrix& m, const std::vector<std::string>& header = {});
void save_csv(const Matrix& m, const std::filesystem::path& path,
              const std::vector<std::string>& header = {});

/// Shortest round-trip text for a double ("%.17g" semantics, locale free).
std::string format_double(double v);
double parse_double(std::string_view text);

/// Plain PGM ("P2"), maxval 255, min-max normalized; constant input maps
/// to 128. Rows of the matrix are image rows.
std::string encode_pgm(const Matrix& m);
void save_heatmap_pgm(const Matrix& m, const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Line-oriented `key = value` configuration with `#` comments.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& origin = "<memory>");
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key,
                                    const std::vector<std::string>& fallback) const;

  /// Directory of the file this config was loaded from (empty otherwise).
  const std::filesystem::path& base_dir() const { return base_dir_; }
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
  std::filesystem::path base_dir_;
};

/// Versioned text format: a `key=value` header, then named CSV blocks.
std::string serialize_model(const KedmdModel& model);
KedmdModel deserialize_model(std::string_view text);
void save_model(const KedmdModel& model, const std::filesystem::path& path);
KedmdModel load_model(const std::filesystem::path& path);

}  // namespace lapdmd
