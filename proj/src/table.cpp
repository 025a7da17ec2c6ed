#include "qedlab/table.hpp"

#include <cstdio>
#include <fstream>

#include "qedlab/errors.hpp"

namespace qedlab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void Table::add_row(std::initializer_list<double> values) {
  rows.emplace_back(values);
}

namespace {

void write_csv(const Table& t, std::ostream& out) {
  out << "# qedlab " << t.title << "\n";
  for (const auto& [key, value] : t.meta) {
    out << "# " << key << ": " << value << "\n";
  }
  out << "# columns:";
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    out << (i == 0 ? " " : ", ") << t.columns[i].name << " ["
        << t.columns[i].unit << "]";
  }
  out << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    out << (i == 0 ? "" : ",") << t.columns[i].name;
  }
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i == 0 ? "" : ",") << format_double(row[i]);
    }
    out << "\n";
  }
  if (t.fit) {
    out << "# fit: " << t.fit->dump() << "\n";
  }
}

void write_json(const Table& t, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["title"] = t.title;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [key, value] : t.meta) {
    meta[key] = value;
  }
  doc["meta"] = meta;
  doc["columns"] = nlohmann::ordered_json::array();
  for (const auto& col : t.columns) {
    doc["columns"].push_back({{"name", col.name}, {"unit", col.unit}});
  }
  doc["rows"] = t.rows;
  if (t.fit) {
    doc["fit"] = *t.fit;
  }
  out << doc.dump(2) << "\n";
}

}  // namespace

void write_table(const Table& table, std::ostream& out, OutputFormat format) {
  if (format == OutputFormat::csv) {
    write_csv(table, out);
  } else {
    write_json(table, out);
  }
}

void write_table_file(const Table& table, const std::string& path,
                      OutputFormat format) {
  std::ofstream out(path, std::ios::binary);  // '\n' endings everywhere
  if (!out) {
    throw Error(ErrorKind::config, "cannot open output file: " + path);
  }
  write_table(table, out, format);
}

}  // namespace qedlab
