#include "bifid/io/descriptor_dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bifid/errors.hpp"

namespace bifid::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void DescriptorDataset::add(DescriptorRow row) {
  if (width_ == 0) width_ = static_cast<int>(row.features.size());
  if (static_cast<int>(row.features.size()) != width_ || width_ == 0) {
    throw ArgumentError("descriptor row '" + row.id + "': feature width differs from the dataset");
  }
  for (double v : row.features) {
    if (!std::isfinite(v)) throw ArgumentError("descriptor row '" + row.id + "': non-finite feature");
  }
  if (!row.y_cheap && !row.y_exp) throw ArgumentError("descriptor row '" + row.id + "': no target value");
  if ((row.y_cheap && !std::isfinite(*row.y_cheap)) || (row.y_exp && !std::isfinite(*row.y_exp))) {
    throw ArgumentError("descriptor row '" + row.id + "': non-finite target");
  }
  rows_.push_back(std::move(row));
}

model::Dataset DescriptorDataset::to_dataset() const {
  model::Dataset d(width_);
  for (const auto& r : rows_) {
    if (r.y_cheap) d.add(r.features, *r.y_cheap, model::Fidelity::Cheap);
    if (r.y_exp) d.add(r.features, *r.y_exp, model::Fidelity::Expensive);
  }
  return d;
}

DescriptorDataset DescriptorDataset::read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw IoError(path.string() + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 4 || trim(header.front()) != "id" || trim(header[header.size() - 2]) != "y_cheap" ||
      trim(header.back()) != "y_exp") {
    throw IoError(path.string() + ": header must be id,f1..fP,y_cheap,y_exp");
  }
  const int width = static_cast<int>(header.size()) - 3;
  DescriptorDataset ds(width);
  std::size_t line_no = 1;
  auto number = [&](const std::string& cell) {
    const std::string t = trim(cell);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size()) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
    }
    return v;
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " columns");
    }
    DescriptorRow row;
    row.id = trim(cells[0]);
    for (int k = 0; k < width; ++k) row.features.push_back(number(cells[static_cast<std::size_t>(k + 1)]));
    const auto& yc = cells[cells.size() - 2];
    const auto& ye = cells.back();
    if (!trim(yc).empty()) row.y_cheap = number(yc);
    if (!trim(ye).empty()) row.y_exp = number(ye);
    try {
      ds.add(std::move(row));
    } catch (const ArgumentError& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return ds;
}

void DescriptorDataset::write_csv(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "id";
  for (int k = 1; k <= width_; ++k) os << ",f" << k;
  os << ",y_cheap,y_exp\n";
  for (const auto& r : rows_) {
    os << r.id;
    for (double v : r.features) os << ',' << format_double(v);
    os << ',' << (r.y_cheap ? format_double(*r.y_cheap) : "") << ',' << (r.y_exp ? format_double(*r.y_exp) : "")
       << '\n';
  }
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace bifid::io
