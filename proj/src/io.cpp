#include "lapdmd/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "lapdmd/error.hpp"

namespace lapdmd {

namespace {

constexpr const char* kModelMagic = "lapdmd-model-version";
constexpr int kModelVersion = 1;

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos
                                                                               : end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

// RFC-4180 field splitting; quotes are removed and doubled quotes unescaped.
std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

bool try_parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_block(std::ostringstream& out, const std::string& name, const Matrix& m) {
  out << "@block " << name << " " << m.rows() << " " << m.cols() << " real\n";
  out << format_csv(m);
}

void write_block(std::ostringstream& out, const std::string& name, const CMatrix& m) {
  out << "@block " << name << " " << m.rows() << " " << m.cols() << " complex\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j).real()) << ',' << format_double(m(i, j).imag());
    }
    out << '\n';
  }
}

struct Block {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  bool complex = false;
  std::vector<double> values;  // row-major, re/im interleaved when complex
};

Matrix block_real(const std::map<std::string, Block>& blocks, const std::string& name) {
  const auto it = blocks.find(name);
  if (it == blocks.end() || it->second.complex)
    throw validation_error("model: missing real block '" + name + "'");
  const Block& b = it->second;
  Matrix m(b.rows, b.cols);
  for (Eigen::Index i = 0; i < b.rows; ++i)
    for (Eigen::Index j = 0; j < b.cols; ++j)
      m(i, j) = b.values[static_cast<std::size_t>(i * b.cols + j)];
  return m;
}

CMatrix block_complex(const std::map<std::string, Block>& blocks, const std::string& name) {
  const auto it = blocks.find(name);
  if (it == blocks.end() || !it->second.complex)
    throw validation_error("model: missing complex block '" + name + "'");
  const Block& b = it->second;
  CMatrix m(b.rows, b.cols);
  for (Eigen::Index i = 0; i < b.rows; ++i)
    for (Eigen::Index j = 0; j < b.cols; ++j) {
      const auto k = static_cast<std::size_t>(2 * (i * b.cols + j));
      m(i, j) = cdouble(b.values[k], b.values[k + 1]);
    }
  return m;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw validation_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  if (!try_parse_double(text, v))
    throw validation_error("not a number: '" + std::string(trim(text)) + "'");
  return v;
}

DataMatrix parse_csv(std::string_view text, const std::string& origin) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw validation_error(origin + ": empty CSV");

  std::vector<std::vector<std::string>> rows;
  rows.reserve(lines.size());
  for (const auto& line : lines) rows.push_back(split_fields(line));

  DataMatrix out;
  std::size_t first = 0;
  {
    double probe = 0.0;
    const bool header = std::any_of(rows[0].begin(), rows[0].end(), [&](const std::string& cell) {
      return !try_parse_double(cell, probe);
    });
    if (header) {
      out.time_labels = rows[0];
      first = 1;
    }
  }
  if (first >= rows.size()) throw validation_error(origin + ": CSV has a header but no data");

  const std::size_t width = rows[first].size();
  if (!out.time_labels.empty() && out.time_labels.size() != width)
    throw validation_error(origin + ": header has " + std::to_string(out.time_labels.size()) +
                           " fields but line 2 has " + std::to_string(width));
  out.values.resize(static_cast<Eigen::Index>(rows.size() - first),
                    static_cast<Eigen::Index>(width));
  for (std::size_t r = first; r < rows.size(); ++r) {
    if (rows[r].size() != width)
      throw validation_error(origin + ": ragged row at line " + std::to_string(r + 1) +
                             " (" + std::to_string(rows[r].size()) + " fields, expected " +
                             std::to_string(width) + ")");
    for (std::size_t c = 0; c < width; ++c) {
      double v = 0.0;
      if (!try_parse_double(rows[r][c], v))
        throw validation_error(origin + ": non-numeric cell '" + rows[r][c] + "' at line " +
                               std::to_string(r + 1) + ", column " + std::to_string(c + 1));
      if (!std::isfinite(v))
        throw validation_error(origin + ": non-finite cell at line " + std::to_string(r + 1) +
                               ", column " + std::to_string(c + 1));
      out.values(static_cast<Eigen::Index>(r - first), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return out;
}

DataMatrix load_csv(const std::filesystem::path& path) {
  return parse_csv(read_text(path), path.string());
}

std::string format_csv(const Matrix& m, const std::vector<std::string>& header) {
  std::string out;
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j) out += ',';
      out += quote_field(header[j]);
    }
    out += '\n';
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

void save_csv(const Matrix& m, const std::filesystem::path& path,
              const std::vector<std::string>& header) {
  if (!header.empty() && header.size() != static_cast<std::size_t>(m.cols()))
    throw validation_error("save_csv: header width does not match the matrix");
  write_text(path, format_csv(m, header));
}

std::string encode_pgm(const Matrix& m) {
  if (m.size() == 0) throw validation_error("pgm: empty image");
  if (!m.allFinite()) throw validation_error("pgm: non-finite values");
  const double lo = m.minCoeff();
  const double hi = m.maxCoeff();
  std::string out = "P2\n" + std::to_string(m.cols()) + " " + std::to_string(m.rows()) + "\n255\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      long px = 128;
      if (hi > lo) px = std::lround((m(i, j) - lo) / (hi - lo) * 255.0);
      if (j) out += ' ';
      out += std::to_string(std::clamp(px, 0L, 255L));
    }
    out += '\n';
  }
  return out;
}

void save_heatmap_pgm(const Matrix& m, const std::filesystem::path& path) {
  write_text(path, encode_pgm(m));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw io_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw io_error("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw io_error("read failed for " + path.string());
  return ss.str();
}

Config Config::parse(std::string_view text, const std::string& origin) {
  Config cfg;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw validation_error(origin + ":" + std::to_string(i + 1) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw validation_error(origin + ":" + std::to_string(i + 1) + ": empty key");
    cfg.entries_[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  Config cfg = parse(read_text(path), path.string());
  cfg.base_dir_ = path.parent_path();
  return cfg;
}

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  double out = 0.0;
  if (!try_parse_double(*v, out))
    throw validation_error("config: '" + key + "' must be a number, got '" + *v + "'");
  return out;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  long long out = 0;
  const std::string_view s = trim(*v);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw validation_error("config: '" + key + "' must be an integer, got '" + *v + "'");
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw validation_error("config: '" + key + "' must be a boolean, got '" + *v + "'");
}

std::vector<std::string> Config::get_list(const std::string& key,
                                          const std::vector<std::string>& fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::vector<std::string> out;
  for (const auto& field : split_fields(*v))
    if (!field.empty()) out.push_back(field);
  return out;
}

std::string serialize_model(const KedmdModel& model) {
  std::ostringstream out;
  out << kModelMagic << "=" << kModelVersion << "\n";
  out << "kernel=" << model.kernel.name() << "\n";
  out << "sigma=" << format_double(model.kernel.sigma) << "\n";
  out << "rank=" << model.rank << "\n";
  out << "state_dim=" << model.state_dim() << "\n";
  out << "pairs=" << model.training_states.cols() << "\n";
  out << "mode_residual=" << format_double(model.mode_residual) << "\n";
  CMatrix eig(model.eigenvalues.size(), 1);
  eig.col(0) = model.eigenvalues;
  write_block(out, "eigenvalues", eig);
  write_block(out, "eigvec_coeffs", model.eigvec_coeffs);
  write_block(out, "koopman_matrix", model.koopman_matrix);
  write_block(out, "feature_basis", model.feature_basis);
  write_block(out, "singular_values", Matrix(model.singular_values));
  write_block(out, "eigfun_values", model.eigfun_values);
  write_block(out, "eigfun_coeffs", model.eigfun_coeffs);
  write_block(out, "modes", model.modes);
  write_block(out, "x0", Matrix(model.x0));
  write_block(out, "training_states", model.training_states);
  return out.str();
}

KedmdModel deserialize_model(std::string_view text) {
  const auto lines = split_lines(text);
  std::map<std::string, std::string> header;
  std::map<std::string, Block> blocks;
  std::size_t i = 0;
  for (; i < lines.size() && lines[i].rfind("@block", 0) != 0; ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw validation_error("model: malformed header line " + std::to_string(i + 1));
    header[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
  }
  if (header[kModelMagic] != std::to_string(kModelVersion))
    throw validation_error("model: unsupported or missing format version");

  while (i < lines.size()) {
    std::istringstream hdr{std::string(lines[i])};
    std::string tag, name, kind;
    Block b;
    if (!(hdr >> tag >> name >> b.rows >> b.cols >> kind) || (kind != "real" && kind != "complex"))
      throw validation_error("model: malformed block header at line " + std::to_string(i + 1));
    b.complex = kind == "complex";
    ++i;
    const std::size_t per_row = static_cast<std::size_t>(b.cols) * (b.complex ? 2 : 1);
    for (Eigen::Index r = 0; r < b.rows; ++r, ++i) {
      if (i >= lines.size()) throw validation_error("model: truncated block '" + name + "'");
      const auto fields = split_fields(lines[i]);
      if (per_row == 0) continue;
      if (fields.size() != per_row)
        throw validation_error("model: wrong field count at line " + std::to_string(i + 1));
      for (const auto& f : fields) b.values.push_back(parse_double(f));
    }
    blocks[name] = std::move(b);
  }

  KedmdModel model;
  model.kernel = KernelSpec::parse(header["kernel"], parse_double(header["sigma"]));
  model.rank = static_cast<std::size_t>(parse_double(header["rank"]));
  model.mode_residual = parse_double(header["mode_residual"]);
  model.eigenvalues = block_complex(blocks, "eigenvalues").col(0);
  model.eigvec_coeffs = block_complex(blocks, "eigvec_coeffs");
  model.koopman_matrix = block_real(blocks, "koopman_matrix");
  model.feature_basis = block_real(blocks, "feature_basis");
  model.singular_values = block_real(blocks, "singular_values").col(0);
  model.eigfun_values = block_complex(blocks, "eigfun_values");
  model.eigfun_coeffs = block_complex(blocks, "eigfun_coeffs");
  model.modes = block_complex(blocks, "modes");
  model.x0 = block_real(blocks, "x0").col(0);
  model.training_states = block_real(blocks, "training_states");
  if (static_cast<std::size_t>(model.eigenvalues.size()) != model.rank ||
      model.modes.rows() != static_cast<Eigen::Index>(model.rank) ||
      model.eigfun_values.cols() != static_cast<Eigen::Index>(model.rank))
    throw validation_error("model: block shapes disagree with rank");
  return model;
}

void save_model(const KedmdModel& model, const std::filesystem::path& path) {
  write_text(path, serialize_model(model));
}

KedmdModel load_model(const std::filesystem::path& path) {
  return deserialize_model(read_text(path));
}

}  // namespace lapdmd
