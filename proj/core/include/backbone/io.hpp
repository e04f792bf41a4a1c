#pragma once

#include <json.hpp>
#include <string>
#include <variant>
#include <vector>

namespace backbone::io {

using Json = nlohmann::ordered_json;

enum class Format { Csv, Json };

/// "csv" or "json"; throws ConfigError otherwise.
Format parse_format(const std::string& name);

/// %.17g; non-finite values print as nan / inf / -inf.
std::string format_double(double v);

/// Serialises with every floating-point number printed as %.17g (non-finite as
/// null), keys in insertion order.
std::string dump_json(const Json& j, int indent = 2);

using Cell = std::variant<double, long long, std::string, bool>;

class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(std::vector<Cell> row);
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }

  std::string to_csv() const;
  Json to_json() const;  // array of objects
  std::string render(Format f) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// Writes to `path`, or to stdout when path is empty or "-".
void write_text(const std::string& path, const std::string& text);

std::string read_text(const std::string& path);

}  // namespace backbone::io
