#include "robshash/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "robshash/error.hpp"
#include "robshash/format.hpp"

namespace robshash {

namespace embedded {
extern const std::string_view kHbkCsv;
extern const std::string_view kWoodCsv;
extern const std::string_view kTopGearCsv;
}  // namespace embedded

namespace {

struct Builtin {
  std::string_view name;
  const std::string_view* text;
  std::uint64_t checksum;
  std::vector<std::size_t> outliers;
  bool has_outliers;
  // Leading text columns used as row labels.
  std::size_t label_columns;
  std::string_view provenance;
};

const std::vector<Builtin>& builtins() {
  static const std::vector<Builtin> table{
      {"hbk", &embedded::kHbkCsv, 0x1baae4dbde71425fULL,
       {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13}, true, 0,
       "Hawkins, Bradu and Kass (1984) artificial data, 75 x 4, as distributed in the "
       "R package robustbase (dataset hbk); rows 1-14 are the planted outliers."},
      {"wood", &embedded::kWoodCsv, 0x3ac19235fe3d8900ULL, {3, 5, 7, 18}, true, 0,
       "Modified wood gravity data (Rousseeuw and Leroy 1987), explanatory variables x1-x5, "
       "as distributed in the R package robustbase (dataset wood); rows 4, 6, 8 and 19 "
       "were replaced by outliers."},
      {"topgear", &embedded::kTopGearCsv, 0x89409b9030d9a8efULL, {}, false, 2,
       "Top Gear car data (Alfons 2021, R package robustHD, dataset TopGear), 297 vehicles; "
       "Make, Model, Price (GBP), MPG and Weight (kg) columns; NA marks a missing entry."},
  };
  return table;
}

const Builtin& find_builtin(std::string_view name) {
  for (const auto& b : builtins())
    if (b.name == name) return b;
  throw InvalidArgument("unknown builtin dataset '" + std::string(name) +
                        "' (expected hbk, wood or topgear)");
}

std::size_t resolve_column(const std::vector<std::string>& header, std::string_view column) {
  if (!column.empty() && column.front() == '#') {
    const auto pos = parse_double(column.substr(1));
    if (pos && *pos >= 1 && *pos == std::floor(*pos) &&
        *pos <= static_cast<double>(header.size()))
      return static_cast<std::size_t>(*pos) - 1;
    throw InvalidArgument("column position '" + std::string(column) + "' is out of range");
  }
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == column) return i;
  std::string names;
  for (const auto& h : header) names += (names.empty() ? "" : ", ") + h;
  throw InvalidArgument("column '" + std::string(column) + "' not found (available: " + names +
                        ")");
}

Support choose_support(SupportChoice c, const std::vector<double>& values) {
  switch (c) {
    case SupportChoice::Real: return Support::RealLine;
    case SupportChoice::Positive:
      if (detect_support(values) != Support::PositiveReal)
        throw DataError("positive support requested but the column has values <= 0");
      return Support::PositiveReal;
    case SupportChoice::Auto: break;
  }
  return detect_support(values);
}

IngestedColumn make_column(std::vector<double> values, std::vector<std::size_t> rows,
                           std::size_t rows_read, std::string name, SupportChoice support) {
  if (values.empty()) throw DataError("column '" + name + "' has no numeric rows");
  IngestReport report{rows_read, rows_read - values.size(), std::move(name)};
  const Support s = choose_support(support, values);
  return {Sample(std::move(values), s), std::move(report), std::move(rows)};
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    // A lone empty field is a blank line.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
      any = false;
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      end_record();
      any = false;
    } else {
      field += c;
    }
  }
  if (in_quotes) throw DataError("CSV: unterminated quoted field");
  if (any) end_record();
  if (records.empty()) throw DataError("CSV: no header row");
  // Strip a UTF-8 byte order mark from the first header cell.
  auto& first = records.front().front();
  if (first.rfind("\xEF\xBB\xBF", 0) == 0) first.erase(0, 3);
  CsvTable t;
  t.header = std::move(records.front());
  for (auto& h : t.header) h = std::string(trim(h));
  t.rows.assign(std::make_move_iterator(records.begin() + 1),
                std::make_move_iterator(records.end()));
  return t;
}

std::size_t BenchmarkDataset::rows() const noexcept {
  return columns.empty() ? 0 : columns.front().size();
}

std::size_t BenchmarkDataset::column_index(std::string_view c) const {
  return resolve_column(column_names, c);
}

const std::vector<double>& BenchmarkDataset::column(std::string_view c) const {
  return columns[column_index(c)];
}

std::vector<std::size_t> BenchmarkDataset::present_rows(std::string_view c) const {
  const auto& col = column(c);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < col.size(); ++i)
    if (!std::isnan(col[i])) out.push_back(i);
  return out;
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& b : builtins()) out.emplace_back(b.name);
  return out;
}

std::string_view builtin_csv(std::string_view name) { return *find_builtin(name).text; }

BenchmarkDataset load_builtin(std::string_view name) {
  const Builtin& b = find_builtin(name);
  if (fnv1a64(*b.text) != b.checksum)
    throw DataError("embedded dataset '" + std::string(name) + "' failed its checksum");
  const CsvTable t = parse_csv(*b.text);

  BenchmarkDataset ds;
  ds.name = std::string(b.name);
  ds.provenance = std::string(b.provenance);
  if (b.has_outliers) ds.known_outlier_indices = b.outliers;
  for (std::size_t j = b.label_columns; j < t.header.size(); ++j)
    ds.column_names.push_back(t.header[j]);
  ds.columns.assign(ds.column_names.size(), {});
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size())
      throw DataError("embedded dataset '" + ds.name + "' has a ragged row");
    if (b.label_columns > 0) {
      std::string label;
      for (std::size_t j = 0; j < b.label_columns; ++j) label += (j ? " " : "") + row[j];
      ds.row_labels.push_back(std::move(label));
    }
    for (std::size_t j = b.label_columns; j < row.size(); ++j) {
      const auto v = parse_double(row[j]);
      ds.columns[j - b.label_columns].push_back(v ? *v : std::numeric_limits<double>::quiet_NaN());
    }
  }
  return ds;
}

SupportChoice parse_support_choice(std::string_view text) {
  if (text == "auto") return SupportChoice::Auto;
  if (text == "real") return SupportChoice::Real;
  if (text == "positive") return SupportChoice::Positive;
  throw InvalidArgument("unknown support '" + std::string(text) +
                        "' (expected auto, real or positive)");
}

IngestedColumn ingest_csv_text(std::string_view text, std::string_view column,
                               SupportChoice support) {
  const CsvTable t = parse_csv(text);
  const std::size_t j = resolve_column(t.header, column);
  std::vector<double> values;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (j >= t.rows[i].size()) continue;
    const auto v = parse_double(t.rows[i][j]);
    if (v && std::isfinite(*v)) {
      values.push_back(*v);
      rows.push_back(i);
    }
  }
  return make_column(std::move(values), std::move(rows), t.rows.size(), t.header[j], support);
}

IngestedColumn ingest_csv(const std::string& path, std::string_view column, SupportChoice support) {
  return ingest_csv_text(read_file(path), column, support);
}

IngestedColumn builtin_column(const BenchmarkDataset& ds, std::string_view column,
                              SupportChoice support) {
  const std::size_t j = ds.column_index(column);
  std::vector<double> values;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.columns[j].size(); ++i) {
    if (!std::isnan(ds.columns[j][i])) {
      values.push_back(ds.columns[j][i]);
      rows.push_back(i);
    }
  }
  return make_column(std::move(values), std::move(rows), ds.rows(), ds.column_names[j], support);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw DataError("error reading '" + path + "'");
  return ss.str();
}

}  // namespace robshash
