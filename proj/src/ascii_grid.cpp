#include "waterline/ascii_grid.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace waterline {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

bool is_header_key(const std::string& token) {
  return !token.empty() && std::isalpha(static_cast<unsigned char>(token.front()));
}

double parse_number(const std::string& token, const std::string& source) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw InputError(source + ": cannot parse number '" + token + "'");
  }
  return v;
}

template <typename T>
void write_value(std::ostream& out, T v) {
  if constexpr (std::is_floating_point_v<T>) {
    out << format_double(static_cast<double>(v));
  } else {
    out << static_cast<long long>(v);
  }
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) return "0";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

RealGrid read_ascii_grid(std::istream& in, const std::string& source) {
  std::map<std::string, double> header;
  std::string token;
  std::string pending;
  while (in >> token) {
    if (!is_header_key(token)) {
      pending = token;
      break;
    }
    std::string value;
    if (!(in >> value)) throw InputError(source + ": header key '" + token + "' has no value");
    header[lower(token)] = parse_number(value, source);
  }

  auto need = [&](const char* key) {
    auto it = header.find(key);
    if (it == header.end()) throw InputError(source + ": missing header '" + key + "'");
    return it->second;
  };
  const double ncols = need("ncols");
  const double nrows = need("nrows");
  const double cs = need("cellsize");
  if (ncols < 1 || nrows < 1 || ncols != std::floor(ncols) || nrows != std::floor(nrows)) {
    throw InputError(source + ": ncols/nrows must be positive integers");
  }
  double xll = 0.0;
  double yll = 0.0;
  if (header.count("xllcorner")) {
    xll = header["xllcorner"];
  } else if (header.count("xllcenter")) {
    xll = header["xllcenter"] - 0.5 * cs;
  } else {
    throw InputError(source + ": missing header 'xllcorner'");
  }
  if (header.count("yllcorner")) {
    yll = header["yllcorner"];
  } else if (header.count("yllcenter")) {
    yll = header["yllcenter"] - 0.5 * cs;
  } else {
    throw InputError(source + ": missing header 'yllcorner'");
  }

  const auto rows = static_cast<std::size_t>(nrows);
  const auto cols = static_cast<std::size_t>(ncols);
  const GeoTransform t(xll, yll + static_cast<double>(rows) * cs, cs, rows, cols);

  std::vector<double> cells;
  cells.reserve(t.size());
  if (!pending.empty()) cells.push_back(parse_number(pending, source));
  while (cells.size() < t.size() && in >> token) cells.push_back(parse_number(token, source));
  if (cells.size() != t.size()) {
    throw InputError(source + ": expected " + std::to_string(t.size()) + " values, found " +
                     std::to_string(cells.size()));
  }
  if (in >> token) throw InputError(source + ": trailing data after " + std::to_string(t.size()) + " values");

  std::optional<double> nodata;
  if (auto it = header.find("nodata_value"); it != header.end()) nodata = it->second;
  for (double v : cells) {
    if (!std::isfinite(v) && !(nodata && v == *nodata)) {
      throw InputError(source + ": non-finite cell value");
    }
  }
  return RealGrid(t, std::move(cells), nodata);
}

RealGrid read_ascii_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open grid file: " + path.string());
  return read_ascii_grid(in, path.string());
}

template <typename T>
void write_ascii_grid(std::ostream& out, const GeoGrid<T>& grid) {
  const auto& t = grid.transform();
  out << "ncols " << t.n_cols << '\n';
  out << "nrows " << t.n_rows << '\n';
  out << "xllcorner " << format_double(t.origin_lon) << '\n';
  out << "yllcorner " << format_double(t.min_lat()) << '\n';
  out << "cellsize " << format_double(t.cell_size) << '\n';
  out << "NODATA_value ";
  if (grid.nodata()) {
    write_value(out, *grid.nodata());
  } else {
    out << "-9999";
  }
  out << '\n';
  for (std::size_t r = 0; r < t.n_rows; ++r) {
    for (std::size_t c = 0; c < t.n_cols; ++c) {
      if (c) out << ' ';
      write_value(out, grid(r, c));
    }
    out << '\n';
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path.string());
  return out;
}

template <typename T>
void write_ascii_grid(const std::filesystem::path& path, const GeoGrid<T>& grid) {
  std::ofstream out = open_output(path);
  write_ascii_grid(out, grid);
  if (!out) throw InputError("write failed: " + path.string());
}

template void write_ascii_grid(std::ostream&, const GeoGrid<double>&);
template void write_ascii_grid(std::ostream&, const GeoGrid<std::int32_t>&);
template void write_ascii_grid(std::ostream&, const GeoGrid<std::uint8_t>&);
template void write_ascii_grid(const std::filesystem::path&, const GeoGrid<double>&);
template void write_ascii_grid(const std::filesystem::path&, const GeoGrid<std::int32_t>&);
template void write_ascii_grid(const std::filesystem::path&, const GeoGrid<std::uint8_t>&);

BinaryMask binarize(const RealGrid& grid, double threshold) {
  BinaryMask out(grid.transform(), std::uint8_t{0});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.is_nodata(i) && grid[i] >= threshold) out[i] = 1;
  }
  return out;
}

}  // namespace waterline
