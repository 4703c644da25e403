#include "geodep/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>
#include <type_traits>

#include "geodep/errors.hpp"

namespace geodep {

std::string format_number(double value) {
  if (!std::isfinite(value)) throw ValidationError("cannot serialise a non-finite number");
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string text(buf, end);
  if (text.find_first_of(".e") == std::string::npos) text += ".0";
  return text;
}

double parse_number(std::string_view cell, std::size_t line) {
  std::string_view s = cell;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value))
    throw ParseError(line, "not a finite number: '" + std::string(cell) + "'");
  return value;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.emplace_back(line.substr(start));
      return cells;
    }
    cells.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file '" + path + "'");
  return in;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

NumericTable read_numeric_csv(std::istream& in) {
  NumericTable table;
  std::string line;
  std::size_t line_no = 1;
  if (!next_line(in, line) || line.empty()) throw ParseError(1, "missing header row");
  table.header = split_csv_line(line);

  std::vector<std::vector<double>> rows;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != table.header.size())
      throw ParseError(line_no, "expected " + std::to_string(table.header.size()) + " cells, found " +
                                    std::to_string(cells.size()));
    std::vector<double>& row = rows.emplace_back();
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, line_no));
  }
  table.rows.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) table.rows(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return table;
}

NumericTable read_numeric_csv_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_numeric_csv(in);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), width_(header.size()) {
  for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != width_) throw ValidationError("CSV row width does not match the header");
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) out_ << ',';
    std::visit(
        [this](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>)
            out_ << format_number(v);
          else
            out_ << v;
        },
        cells[k]);
  }
  out_ << '\n';
}

SampleTable read_samples(std::istream& in) {
  const NumericTable table = read_numeric_csv(in);
  const auto& h = table.header;
  if (h.size() < 3 || h[0] != "lon" || h[1] != "lat")
    throw ParseError(1, "header must start with 'lon,lat'");
  if (h.back() != "z") throw ParseError(1, "the last column must be 'z'");
  const Index spatial = h[2] == "alt" ? 3 : 2;
  std::vector<std::string> names;
  for (std::size_t k = static_cast<std::size_t>(spatial); k + 1 < h.size(); ++k) {
    if (h[k].size() < 3 || h[k].compare(0, 2, "x_") != 0)
      throw ParseError(1, "unexpected column '" + h[k] + "'; covariates are named x_<name>");
    names.push_back(h[k].substr(2));
  }
  if (table.rows.rows() == 0) throw ValidationError("sample file contains no observations");

  const Index n_cov = static_cast<Index>(names.size());
  const MatrixXd& r = table.rows;
  return {SampleSet(r.leftCols(spatial), r.middleCols(spatial, n_cov), r.rightCols(1)), std::move(names)};
}

SampleTable read_samples_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_samples(in);
}

void write_samples(std::ostream& out, const SampleSet& samples, const std::vector<std::string>& covariate_names) {
  std::vector<std::string> header{"lon", "lat"};
  if (samples.spatial_dims() == 3) header.emplace_back("alt");
  if (samples.spatial_dims() != 2 && samples.spatial_dims() != 3)
    throw ValidationError("sample files hold 2 or 3 coordinate columns");
  for (Index k = 0; k < samples.covariate_dims(); ++k) {
    const auto idx = static_cast<std::size_t>(k);
    header.push_back("x_" + (idx < covariate_names.size() ? covariate_names[idx] : std::to_string(k + 1)));
  }
  header.emplace_back("z");
  CsvWriter w(out, header);
  const MatrixXd pred = samples.predictors();
  for (Index i = 0; i < samples.size(); ++i) {
    std::vector<Cell> cells;
    for (Index k = 0; k < pred.cols(); ++k) cells.emplace_back(pred(i, k));
    cells.emplace_back(samples.values()(i));
    w.row(cells);
  }
}

}  // namespace geodep
