#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "robshash/distributions.hpp"

namespace robshash {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// RFC 4180-style comma-separated text: double-quoted fields may contain
/// commas, quotes ("") and newlines; CRLF line ends are accepted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Throws DataError on an unterminated quote or an empty document.
CsvTable parse_csv(std::string_view text);

struct BenchmarkDataset {
  std::string name;
  std::vector<std::string> column_names;
  /// Column-major values; NaN marks a missing entry.
  std::vector<std::vector<double>> columns;
  /// Free-text row labels (empty when the dataset has none).
  std::vector<std::string> row_labels;
  /// Zero-based indices of the documented outliers, when known.
  std::optional<std::vector<std::size_t>> known_outlier_indices;
  std::string provenance;

  [[nodiscard]] std::size_t rows() const noexcept;
  /// Throws InvalidArgument for an unknown column.
  [[nodiscard]] std::size_t column_index(std::string_view column) const;
  [[nodiscard]] const std::vector<double>& column(std::string_view column) const;
  /// Rows of the column that are present (not missing).
  [[nodiscard]] std::vector<std::size_t> present_rows(std::string_view column) const;
};

std::vector<std::string> builtin_names();

/// "hbk", "wood" or "topgear". The embedded text is checked against a pinned
/// checksum on every load. Throws InvalidArgument for an unknown name.
BenchmarkDataset load_builtin(std::string_view name);

/// The verbatim embedded CSV text of a builtin dataset.
std::string_view builtin_csv(std::string_view name);

enum class SupportChoice { Auto, Real, Positive };

/// "auto", "real", "positive".
SupportChoice parse_support_choice(std::string_view text);

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::string column_name;
};

struct IngestedColumn {
  Sample sample;
  IngestReport report;
  /// Zero-based source row of each sample value.
  std::vector<std::size_t> source_rows;
};

/// Extracts one numeric column. `column` is a header name, or a 1-based
/// position written as "#3". Blank and non-numeric cells are dropped and
/// counted. Throws InvalidArgument for a missing column and DataError when
/// no numeric rows remain or a positive support is forced on data with values <= 0.
IngestedColumn ingest_csv_text(std::string_view text, std::string_view column,
                               SupportChoice support = SupportChoice::Auto);

/// ingest_csv_text on a file's contents. Throws DataError when the file cannot be read.
IngestedColumn ingest_csv(const std::string& path, std::string_view column,
                          SupportChoice support = SupportChoice::Auto);

/// The present values of a builtin column as a sample, with the same
/// report/row bookkeeping as CSV ingestion.
IngestedColumn builtin_column(const BenchmarkDataset& ds, std::string_view column,
                              SupportChoice support = SupportChoice::Auto);

/// Reads a whole file. Throws DataError on failure.
std::string read_file(const std::string& path);

}  // namespace robshash
