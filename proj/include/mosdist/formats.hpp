#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mosdist/errors.hpp"
#include "mosdist/level_scheme.hpp"
#include "mosdist/scoring.hpp"
#include "mosdist/softlabel.hpp"

// Line-oriented structured text formats. Every file starts with a format
// line "#mosdist <kind> v1", followed by a "#columns:" header naming the
// fields, with one whitespace-separated record per line after that. Label
// and prediction files additionally carry a "#scheme:" line so scores can
// be recovered without out-of-band configuration. Lines beginning with '#'
// anywhere else are comments. Numbers are written in shortest
// round-trippable form, which keeps files diff-able and byte-stable.

namespace mosdist {

/// One annotated item: per-dimension raw mean scores (and optional raw
/// standard deviations), plus the declared raw score range.
struct ScoreRecord {
  std::string item_id;
  std::map<std::string, double> scores;
  std::map<std::string, double> sigmas;
  double range_min = 0.0;
  double range_max = 0.0;
};

struct LabelRow {
  std::string item_id;
  std::string dimension;
  double mu = 0.0;  // normalized units
  std::vector<double> probs;
  LabelProvenance provenance = LabelProvenance::interp;
};

struct PredictionRow {
  std::string item_id;
  std::string dimension;
  std::optional<std::vector<double>> probs;
  std::optional<double> score;
};

struct PanelRow {
  std::string item_id;
  std::string dimension;
  double true_mu = 0.0;
  double true_sigma = 0.0;
  std::vector<double> ratings;
};

struct LabelFile {
  LevelScheme scheme;
  std::vector<LabelRow> rows;
};

struct PredictionFile {
  LevelScheme scheme;
  std::vector<PredictionRow> rows;
};

namespace detail {

inline std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream stream(line);
  std::string token;
  while (stream >> token) {
    fields.push_back(token);
  }
  return fields;
}

inline double parse_double(const std::string& token, const std::string& path,
                           std::size_t line) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw ParseError(path, line, "expected a number, got '" + token + "'");
  }
  return value;
}

/// Reads a file into (line_number, fields) records, verifying the format
/// line and returning the #columns fields and optional #scheme line.
struct ParsedFile {
  std::vector<std::string> columns;
  std::optional<std::vector<std::string>> scheme_fields;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

inline ParsedFile read_structured_file(const std::filesystem::path& path,
                                       const std::string& kind) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  const std::string path_str = path.string();
  ParsedFile parsed;
  std::string line;
  std::size_t line_no = 0;
  bool saw_format = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!saw_format) {
      if (line != "#mosdist " + kind + " v1") {
        throw ParseError(path_str, line_no,
                         "expected format line '#mosdist " + kind + " v1'");
      }
      saw_format = true;
      continue;
    }
    if (line.rfind("#columns:", 0) == 0) {
      parsed.columns = split_fields(line.substr(9));
      continue;
    }
    if (line.rfind("#scheme:", 0) == 0) {
      parsed.scheme_fields = split_fields(line.substr(8));
      continue;
    }
    if (line[0] == '#') continue;
    if (parsed.columns.empty()) {
      throw ParseError(path_str, line_no, "data before #columns: header");
    }
    parsed.rows.emplace_back(line_no, split_fields(line));
  }
  if (!saw_format) {
    // Empty files still need the format line to be trusted as this kind.
    throw ParseError(path_str, 1, "missing format line (empty file?)");
  }
  if (parsed.columns.empty()) {
    throw ParseError(path_str, line_no, "missing #columns: header");
  }
  return parsed;
}

inline void write_scheme_line(std::ostream& out, const LevelScheme& scheme) {
  out << "#scheme:";
  for (double c : scheme.centers()) {
    out << ' ' << format_double(c);
  }
  out << " width " << format_double(scheme.width()) << '\n';
}

inline LevelScheme parse_scheme_fields(const std::vector<std::string>& fields,
                                       const std::string& path) {
  // centers... "width" d
  if (fields.size() < 4 || fields[fields.size() - 2] != "width") {
    throw ParseError(path, 0, "malformed #scheme: line");
  }
  std::vector<double> centers;
  for (std::size_t i = 0; i + 2 < fields.size(); ++i) {
    centers.push_back(parse_double(fields[i], path, 0));
  }
  const double width = parse_double(fields.back(), path, 0);
  return LevelScheme(centers, width);
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  return out;
}

inline bool is_sigma_column(const std::string& name) {
  static const std::string suffix = "_sigma";
  return name.size() > suffix.size() &&
         name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Annotations: item_id range_min range_max <dim...> [<dim>_sigma...]
// ---------------------------------------------------------------------------

inline std::vector<ScoreRecord> load_annotations(
    const std::filesystem::path& path) {
  const auto parsed = detail::read_structured_file(path, "annotations");
  const std::string path_str = path.string();
  const auto& cols = parsed.columns;
  if (cols.size() < 4 || cols[0] != "item_id" || cols[1] != "range_min" ||
      cols[2] != "range_max") {
    throw ParseError(path_str, 2,
                     "annotation columns must start with "
                     "'item_id range_min range_max'");
  }
  bool has_overall = false;
  std::set<std::string> seen_cols;
  for (std::size_t i = 3; i < cols.size(); ++i) {
    if (!seen_cols.insert(cols[i]).second) {
      throw ParseError(path_str, 2, "duplicate column '" + cols[i] + "'");
    }
    if (cols[i] == "overall") has_overall = true;
  }
  if (!has_overall) {
    throw ValidationError(path_str + ": the 'overall' dimension is required");
  }

  std::vector<ScoreRecord> records;
  std::set<std::string> seen_ids;
  for (const auto& [line_no, fields] : parsed.rows) {
    if (fields.size() != cols.size()) {
      throw ParseError(path_str, line_no,
                       "expected " + std::to_string(cols.size()) +
                           " fields, got " + std::to_string(fields.size()));
    }
    ScoreRecord record;
    record.item_id = fields[0];
    record.range_min = detail::parse_double(fields[1], path_str, line_no);
    record.range_max = detail::parse_double(fields[2], path_str, line_no);
    if (!(record.range_max > record.range_min)) {
      throw ValidationError(path_str + ": item '" + record.item_id +
                            "' declares a degenerate score range");
    }
    if (!seen_ids.insert(record.item_id).second) {
      throw ValidationError(path_str + ": duplicate item_id '" +
                            record.item_id + "'");
    }
    for (std::size_t i = 3; i < cols.size(); ++i) {
      const double value = detail::parse_double(fields[i], path_str, line_no);
      if (detail::is_sigma_column(cols[i])) {
        if (value < 0.0 || !std::isfinite(value)) {
          throw ValidationError(path_str + ": item '" + record.item_id +
                                "' has a negative sigma in '" + cols[i] + "'");
        }
        record.sigmas[cols[i].substr(0, cols[i].size() - 6)] = value;
      } else {
        if (value < record.range_min || value > record.range_max) {
          throw ValidationError(path_str + ": item '" + record.item_id +
                                "' score '" + cols[i] +
                                "' lies outside its declared range");
        }
        record.scores[cols[i]] = value;
      }
    }
    records.push_back(std::move(record));
  }
  if (records.empty()) {
    std::cerr << "warning: " << path_str << " contains no records\n";
  }
  return records;
}

inline void write_annotations(const std::filesystem::path& path,
                              const std::vector<ScoreRecord>& records,
                              const std::vector<std::string>& dimensions,
                              bool with_sigmas) {
  auto out = detail::open_output(path);
  out << "#mosdist annotations v1\n";
  out << "#columns: item_id range_min range_max";
  for (const auto& dim : dimensions) out << ' ' << dim;
  if (with_sigmas) {
    for (const auto& dim : dimensions) out << ' ' << dim << "_sigma";
  }
  out << '\n';
  for (const auto& record : records) {
    out << record.item_id << ' ' << detail::format_double(record.range_min)
        << ' ' << detail::format_double(record.range_max);
    for (const auto& dim : dimensions) {
      out << ' ' << detail::format_double(record.scores.at(dim));
    }
    if (with_sigmas) {
      for (const auto& dim : dimensions) {
        out << ' ' << detail::format_double(record.sigmas.at(dim));
      }
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Labels: item_id dimension mu p0..p{n-1} provenance
// ---------------------------------------------------------------------------

inline void write_labels(const std::filesystem::path& path,
                         const LevelScheme& scheme,
                         const std::vector<LabelRow>& rows) {
  auto out = detail::open_output(path);
  out << "#mosdist labels v1\n";
  detail::write_scheme_line(out, scheme);
  out << "#columns: item_id dimension mu";
  for (std::size_t i = 0; i < scheme.size(); ++i) out << " p" << i;
  out << " provenance\n";
  for (const auto& row : rows) {
    out << row.item_id << ' ' << row.dimension << ' '
        << detail::format_double(row.mu);
    for (double p : row.probs) out << ' ' << detail::format_double(p);
    out << ' ' << to_string(row.provenance) << '\n';
  }
}

inline LabelFile load_labels(const std::filesystem::path& path) {
  const auto parsed = detail::read_structured_file(path, "labels");
  const std::string path_str = path.string();
  LabelFile file;
  if (parsed.scheme_fields) {
    file.scheme = detail::parse_scheme_fields(*parsed.scheme_fields, path_str);
  }
  const std::size_t levels = file.scheme.size();
  const std::size_t expected = 4 + levels;  // id dim mu p... provenance
  if (parsed.columns.size() != expected) {
    throw ParseError(path_str, 2, "label columns do not match the scheme");
  }
  for (const auto& [line_no, fields] : parsed.rows) {
    if (fields.size() != expected) {
      throw ParseError(path_str, line_no, "wrong field count for a label row");
    }
    LabelRow row;
    row.item_id = fields[0];
    row.dimension = fields[1];
    row.mu = detail::parse_double(fields[2], path_str, line_no);
    row.probs.reserve(levels);
    for (std::size_t i = 0; i < levels; ++i) {
      row.probs.push_back(detail::parse_double(fields[3 + i], path_str, line_no));
    }
    row.provenance = provenance_from_string(fields.back());
    validate_distribution(row.probs);
    file.rows.push_back(std::move(row));
  }
  return file;
}

// ---------------------------------------------------------------------------
// Predictions: item_id dimension p0..p{n-1} score   (distribution form)
//              item_id dimension score              (scalar-only form)
// ---------------------------------------------------------------------------

inline void write_predictions(const std::filesystem::path& path,
                              const LevelScheme& scheme,
                              const std::vector<PredictionRow>& rows) {
  auto out = detail::open_output(path);
  out << "#mosdist predictions v1\n";
  detail::write_scheme_line(out, scheme);
  const bool with_probs =
      !rows.empty() ? rows.front().probs.has_value() : true;
  out << "#columns: item_id dimension";
  if (with_probs) {
    for (std::size_t i = 0; i < scheme.size(); ++i) out << " p" << i;
  }
  out << " score\n";
  for (const auto& row : rows) {
    if (row.probs.has_value() != with_probs || !row.score.has_value()) {
      throw InvalidInputError(
          "write_predictions: rows must uniformly match the header layout");
    }
    out << row.item_id << ' ' << row.dimension;
    if (with_probs) {
      for (double p : *row.probs) out << ' ' << detail::format_double(p);
    }
    out << ' ' << detail::format_double(*row.score) << '\n';
  }
}

inline PredictionFile load_predictions(const std::filesystem::path& path) {
  const auto parsed = detail::read_structured_file(path, "predictions");
  const std::string path_str = path.string();
  PredictionFile file;
  if (parsed.scheme_fields) {
    file.scheme = detail::parse_scheme_fields(*parsed.scheme_fields, path_str);
  }
  const std::size_t levels = file.scheme.size();
  bool with_probs = false;
  if (parsed.columns.size() == 3 + levels) {
    with_probs = true;
  } else if (parsed.columns.size() != 3) {
    throw ParseError(path_str, 2, "prediction columns do not match the scheme");
  }
  for (const auto& [line_no, fields] : parsed.rows) {
    if (fields.size() != parsed.columns.size()) {
      throw ParseError(path_str, line_no,
                       "wrong field count for a prediction row");
    }
    PredictionRow row;
    row.item_id = fields[0];
    row.dimension = fields[1];
    std::size_t next = 2;
    if (with_probs) {
      std::vector<double> probs;
      probs.reserve(levels);
      for (std::size_t i = 0; i < levels; ++i) {
        probs.push_back(detail::parse_double(fields[next++], path_str, line_no));
      }
      validate_distribution(probs);
      row.probs = std::move(probs);
    }
    row.score = detail::parse_double(fields[next], path_str, line_no);
    if (row.probs) {
      const double derived =
          expected_score(PredictedDistribution{*row.probs}, file.scheme);
      if (std::abs(derived - *row.score) > 1e-6) {
        throw ValidationError(path_str + ": item '" + row.item_id + "' (" +
                              row.dimension +
                              ") scalar score disagrees with its distribution");
      }
    }
    file.rows.push_back(std::move(row));
  }
  return file;
}

// ---------------------------------------------------------------------------
// Panels: item_id dimension true_mu true_sigma k ratings...
// ---------------------------------------------------------------------------

inline void write_panels(const std::filesystem::path& path,
                         const std::vector<PanelRow>& rows) {
  auto out = detail::open_output(path);
  out << "#mosdist panels v1\n";
  out << "#columns: item_id dimension true_mu true_sigma k ratings\n";
  for (const auto& row : rows) {
    out << row.item_id << ' ' << row.dimension << ' '
        << detail::format_double(row.true_mu) << ' '
        << detail::format_double(row.true_sigma) << ' ' << row.ratings.size();
    for (double rating : row.ratings) {
      out << ' ' << detail::format_double(rating);
    }
    out << '\n';
  }
}

inline std::vector<PanelRow> load_panels(const std::filesystem::path& path) {
  const auto parsed = detail::read_structured_file(path, "panels");
  const std::string path_str = path.string();
  std::vector<PanelRow> rows;
  for (const auto& [line_no, fields] : parsed.rows) {
    if (fields.size() < 5) {
      throw ParseError(path_str, line_no, "panel row is too short");
    }
    PanelRow row;
    row.item_id = fields[0];
    row.dimension = fields[1];
    row.true_mu = detail::parse_double(fields[2], path_str, line_no);
    row.true_sigma = detail::parse_double(fields[3], path_str, line_no);
    const double count = detail::parse_double(fields[4], path_str, line_no);
    if (count != static_cast<double>(fields.size() - 5)) {
      throw ParseError(path_str, line_no,
                       "declared rating count disagrees with the row");
    }
    row.ratings.reserve(fields.size() - 5);
    for (std::size_t i = 5; i < fields.size(); ++i) {
      row.ratings.push_back(detail::parse_double(fields[i], path_str, line_no));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mosdist
