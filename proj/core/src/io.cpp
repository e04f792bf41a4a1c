#include "backbone/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "backbone/errors.hpp"

namespace backbone::io {

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw ConfigError("unknown output format '" + name + "' (expected csv or json)");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void dump(const Json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string pad_close = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        out += Json(it.key()).dump();
        out += sep;
        dump(it.value(), indent, depth + 1, out);
      }
      out += nl;
      out += pad_close;
      out += "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        dump(v, indent, depth + 1, out);
      }
      out += nl;
      out += pad_close;
      out += "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

std::string cell_csv(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, long long>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "1" : "0";
        } else {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string q = "\"";
          for (char ch : v) {
            if (ch == '"') q += '"';
            q += ch;
          }
          return q + "\"";
        }
      },
      c);
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump(j, indent, 0, out);
  return out;
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) throw std::invalid_argument("Table: row width mismatch");
  rows_.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += columns_[i];
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += cell_csv(row[i]);
    }
    out += '\n';
  }
  return out;
}

Json Table::to_json() const {
  Json arr = Json::array();
  for (const auto& row : rows_) {
    Json obj = Json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit([&](const auto& v) { obj[columns_[i]] = v; }, row[i]);
    }
    arr.push_back(std::move(obj));
  }
  return arr;
}

std::string Table::render(Format f) const {
  return f == Format::Csv ? to_csv() : dump_json(to_json()) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");
  f << text;
  if (!f) throw ConfigError("failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace backbone::io
