#include "vfl/harness/csv.hpp"

#include "vfl/common/error.hpp"
#include "vfl/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace vfl::harness {
namespace {

// Splits one record; returns false at end of input.
bool next_record(std::istream& in, std::vector<std::string>& cells, std::size_t& line, const std::string& source) {
  cells.clear();
  std::string text;
  if (!std::getline(in, text)) return false;
  ++line;
  std::string cur;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i == text.size()) {
      if (!quoted) break;
      std::string more;
      if (!std::getline(in, more)) throw ConfigError(source + ":" + std::to_string(line) + ": unterminated quote");
      ++line;
      cur.push_back('\n');
      text = std::move(more);
      i = 0;
      continue;
    }
    const char ch = text[i++];
    if (quoted) {
      if (ch == '"') {
        if (i < text.size() && text[i] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(std::move(cur));
  return true;
}

bool parse_double(const std::string& s, double& v) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  return ec == std::errc() && ptr == t.data() + t.size();
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::vector<std::string> cells;
  std::size_t line = 0;
  while (next_record(in, cells, line, source)) {
    if (cells.size() == 1 && trim(cells[0]).empty()) continue;
    if (table.header.empty()) {
      if (!cells.empty() && !cells[0].empty() && cells[0][0] == '#') continue;
      table.header = cells;
      continue;
    }
    if (cells.size() != table.header.size())
      throw ConfigError(source + ":" + std::to_string(line) + ": expected " + std::to_string(table.header.size()) +
                        " cells, found " + std::to_string(cells.size()));
    table.rows.push_back(cells);
  }
  if (table.header.empty()) throw ConfigError(source + ": no header row");
  return table;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    const auto& c = cells[i];
    if (c.find_first_of(",\"\n") == std::string::npos) {
      out << c;
    } else {
      out << '"';
      for (const char ch : c) {
        if (ch == '"') out << '"';
        out << ch;
      }
      out << '"';
    }
  }
  out << '\n';
}

TabularDataset parse_tabular(const CsvTable& table, const std::string& id_column, const std::string& label_column,
                             const std::string& source) {
  auto find = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw ConfigError(source + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - table.header.begin());
  };
  const std::size_t id_col = find(id_column);
  const std::size_t label_col = find(label_column);
  if (id_col == label_col) throw ConfigError(source + ": id and label columns coincide");

  TabularDataset out;
  std::vector<std::size_t> features;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == id_col || c == label_col) continue;
    features.push_back(c);
    out.feature_names.push_back(table.header[c]);
  }
  if (features.empty()) throw ConfigError(source + ": no feature columns");
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  out.x.resize(n, static_cast<Eigen::Index>(features.size()));
  out.y.resize(n);
  std::unordered_set<std::string> seen;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    // data rows are numbered from 1, the header is row 0
    const std::string where = source + ": row " + std::to_string(r + 1);
    const std::string id = trim(row[id_col]);
    if (id.empty()) throw ConfigError(where + ": missing id");
    if (!seen.insert(id).second) throw ConfigError(where + ": duplicate id '" + id + "'");
    out.ids.push_back(id);
    for (std::size_t j = 0; j < features.size(); ++j) {
      double v = 0.0;
      if (!parse_double(row[features[j]], v))
        throw ConfigError(where + ", column '" + table.header[features[j]] + "': non-numeric cell '" +
                          row[features[j]] + "'");
      out.x(r, static_cast<Eigen::Index>(j)) = v;
    }
    double label = 0.0;
    if (!parse_double(row[label_col], label))
      throw ConfigError(where + ", column '" + label_column + "': non-numeric label '" + row[label_col] + "'");
    out.y(r) = label;
  }
  return out;
}

TabularDataset load_csv(const std::string& path, const std::string& id_column, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return parse_tabular(read_csv(in, path), id_column, label_column, path);
}

PartitionSpec PartitionSpec::leading(std::size_t d, std::size_t d_a) {
  PartitionSpec spec;
  for (std::size_t j = 0; j < d; ++j) (j < d_a ? spec.a_features : spec.b_features).push_back(j);
  return spec;
}

std::vector<std::size_t> PartitionSpec::parse_indices(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream in(text);
  std::string item;
  auto number = [&](const std::string& s) {
    std::size_t v = 0;
    const std::string t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
      throw ConfigError("bad feature index '" + s + "' in '" + text + "'");
    return v;
  };
  while (std::getline(in, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(number(item));
    } else {
      const auto lo = number(item.substr(0, dash));
      const auto hi = number(item.substr(dash + 1));
      if (hi < lo) throw ConfigError("bad feature range '" + item + "'");
      for (auto j = lo; j <= hi; ++j) out.push_back(j);
    }
  }
  return out;
}

void PartitionSpec::validate(std::size_t d) const {
  if (a_features.empty()) throw ConfigError("partition: party A has no features");
  if (b_features.empty()) throw ConfigError("partition: party B has no features");
  std::set<std::size_t> all;
  for (const auto* side : {&a_features, &b_features})
    for (const auto j : *side) {
      if (j >= d) throw ConfigError("partition: feature index " + std::to_string(j) + " out of range");
      if (!all.insert(j).second) throw ConfigError("partition: feature " + std::to_string(j) + " assigned twice");
    }
  if (all.size() != d) throw ConfigError("partition: " + std::to_string(d - all.size()) + " features unassigned");
}

VerticalDataset partition(const TabularDataset& data, const PartitionSpec& spec) {
  spec.validate(static_cast<std::size_t>(data.x.cols()));
  VerticalDataset out;
  out.ids = data.ids;
  out.y = data.y;
  const auto n = data.x.rows();
  out.x_a.resize(n, static_cast<Eigen::Index>(spec.a_features.size()));
  out.x_b.resize(n, static_cast<Eigen::Index>(spec.b_features.size()));
  for (std::size_t j = 0; j < spec.a_features.size(); ++j) {
    out.x_a.col(static_cast<Eigen::Index>(j)) = data.x.col(static_cast<Eigen::Index>(spec.a_features[j]));
    out.a_names.push_back(data.feature_names[spec.a_features[j]]);
  }
  for (std::size_t j = 0; j < spec.b_features.size(); ++j) {
    out.x_b.col(static_cast<Eigen::Index>(j)) = data.x.col(static_cast<Eigen::Index>(spec.b_features[j]));
    out.b_names.push_back(data.feature_names[spec.b_features[j]]);
  }
  return out;
}

Matrix merge_columns(const VerticalDataset& data, const PartitionSpec& spec) {
  const std::size_t d = spec.a_features.size() + spec.b_features.size();
  spec.validate(d);
  Matrix x(data.x_a.rows(), static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < spec.a_features.size(); ++j)
    x.col(static_cast<Eigen::Index>(spec.a_features[j])) = data.x_a.col(static_cast<Eigen::Index>(j));
  for (std::size_t j = 0; j < spec.b_features.size(); ++j)
    x.col(static_cast<Eigen::Index>(spec.b_features[j])) = data.x_b.col(static_cast<Eigen::Index>(j));
  return x;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

void write_dataset_csv(std::ostream& out, const VerticalDataset& data) {
  std::vector<std::string> header{"id"};
  for (std::size_t j = 0; j < data.d_a(); ++j)
    header.push_back(j < data.a_names.size() ? data.a_names[j] : "a" + std::to_string(j));
  for (std::size_t j = 0; j < data.d_b(); ++j)
    header.push_back(j < data.b_names.size() ? data.b_names[j] : "b" + std::to_string(j));
  header.push_back("label");
  write_csv_row(out, header);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    std::vector<std::string> row{data.ids.empty() ? std::to_string(i) : data.ids[i]};
    for (Eigen::Index j = 0; j < data.x_a.cols(); ++j) row.push_back(format_double(data.x_a(r, j)));
    for (Eigen::Index j = 0; j < data.x_b.cols(); ++j) row.push_back(format_double(data.x_b(r, j)));
    row.push_back(format_double(data.y(r)));
    write_csv_row(out, row);
  }
}

void write_schema_line(std::ostream& out, const std::string& name, int version) {
  out << "# schema: " << name << " v" << version << '\n';
}

}  // namespace vfl::harness
