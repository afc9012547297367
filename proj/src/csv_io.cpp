#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "rlz/errors.hpp"
#include "rlz/experiments.hpp"

namespace rlz {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view field, double& out) {
  if (field == "NA") {
    out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  return res.ec == std::errc() && res.ptr == field.data() + field.size() && !field.empty();
}

}  // namespace

CsvTable read_csv_table(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw InputError("CSV input is empty");
  CsvTable table;
  for (auto f : split_fields(lines[0])) table.header.emplace_back(f);
  const auto cols = static_cast<Eigen::Index>(table.header.size());
  table.values.resize(static_cast<Eigen::Index>(lines.size() - 1), cols);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_fields(lines[r]);
    if (static_cast<Eigen::Index>(fields.size()) != cols)
      throw InputError("CSV row " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) +
                       " fields, header has " + std::to_string(cols));
    for (Eigen::Index c = 0; c < cols; ++c) {
      double v = 0.0;
      if (!parse_number(fields[static_cast<std::size_t>(c)], v))
        throw InputError("CSV row " + std::to_string(r + 1) + ", column " + std::to_string(c + 1) +
                         ": not a number: '" + std::string(fields[static_cast<std::size_t>(c)]) + "'");
      table.values(static_cast<Eigen::Index>(r - 1), c) = v;
    }
  }
  return table;
}

RealVector read_csv_vector(const std::string& text) {
  const auto lines = split_lines(text);
  std::vector<double> vals;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto fields = split_fields(lines[r]);
    if (fields.size() != 1) throw InputError("vector CSV row " + std::to_string(r + 1) + " must have one field");
    double v = 0.0;
    if (!parse_number(fields[0], v)) {
      if (r == 0) continue;  // header
      throw InputError("vector CSV row " + std::to_string(r + 1) + ": not a number: '" +
                       std::string(fields[0]) + "'");
    }
    vals.push_back(v);
  }
  if (vals.empty()) throw InputError("vector CSV has no values");
  return Eigen::Map<const RealVector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw InputError("write to '" + path + "' failed");
}

}  // namespace rlz
