#pragma once

#include "vfl/common/dataset.hpp"

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace vfl::harness {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// RFC 4180 style: comma separated, double quotes with "" escapes, first row is
// the header. Lines starting with '#' before the header are skipped. Throws
// ConfigError on ragged rows.
CsvTable read_csv(std::istream& in, const std::string& source = "<csv>");
void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

// A fully featured table before the vertical split.
struct TabularDataset {
  std::vector<std::string> ids;
  std::vector<std::string> feature_names;
  Matrix x;
  Vector y;
};

// Every column other than the id and label columns is a feature. Rejects
// missing or duplicate ids and non-numeric cells with row and column in the
// message.
TabularDataset load_csv(const std::string& path, const std::string& id_column, const std::string& label_column);
TabularDataset parse_tabular(const CsvTable& table, const std::string& id_column, const std::string& label_column,
                             const std::string& source = "<csv>");

// Feature index sets; A also owns the labels.
struct PartitionSpec {
  std::vector<std::size_t> a_features;
  std::vector<std::size_t> b_features;

  // First d_a columns to A, the rest to B.
  static PartitionSpec leading(std::size_t d, std::size_t d_a);
  // "0-12" or "0,3,5-7".
  static std::vector<std::size_t> parse_indices(const std::string& text);
  // Disjoint, covering [0, d), both non-empty. Throws ConfigError.
  void validate(std::size_t d) const;
};

VerticalDataset partition(const TabularDataset& data, const PartitionSpec& spec);
// Inverse of partition: columns back in original order.
Matrix merge_columns(const VerticalDataset& data, const PartitionSpec& spec);

// id, A features, B features, label.
void write_dataset_csv(std::ostream& out, const VerticalDataset& data);

// Metrics files open with "# schema: <name> v<version>", then the header row.
void write_schema_line(std::ostream& out, const std::string& name, int version);

std::string format_double(double v);

}  // namespace vfl::harness
