#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qedlab {

enum class OutputFormat { csv, json };

// Formats with 12 significant digits, the one numeric format every emitted
// file uses.
std::string format_double(double v);

struct Column {
  std::string name;
  std::string unit;
};

// Column-oriented result table; meta lines record the run parameters, the
// optional fit block carries an embedded fit report.
struct Table {
  std::string title;
  std::vector<Column> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> meta;
  std::optional<nlohmann::ordered_json> fit;

  void add_row(std::initializer_list<double> values);
};

void write_table(const Table& table, std::ostream& out, OutputFormat format);
void write_table_file(const Table& table, const std::string& path,
                      OutputFormat format);

}  // namespace qedlab
