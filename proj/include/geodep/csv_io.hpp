#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "geodep/sample_model.hpp"

namespace geodep {

/// Shortest decimal text that parses back to the same double. Integral values
/// keep a trailing ".0" so the column type stays visible.
std::string format_number(double value);

/// Parses one CSV cell as a finite decimal number; throws ParseError tagged with `line`.
double parse_number(std::string_view cell, std::size_t line);

std::vector<std::string> split_csv_line(std::string_view line);

struct NumericTable {
  std::vector<std::string> header;
  MatrixXd rows;
};

/// Header line plus rows of numbers, every row as wide as the header.
NumericTable read_numeric_csv(std::istream& in);
NumericTable read_numeric_csv_file(const std::string& path);

using Cell = std::variant<double, std::int64_t, std::string>;

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void row(const std::vector<Cell>& cells);

 private:
  std::ostream& out_;
  std::size_t width_;
};

/// Sample file: `lon,lat[,alt]`, then `x_<name>` covariates, then `z`.
struct SampleTable {
  SampleSet samples;
  std::vector<std::string> covariate_names;  // without the x_ prefix
};

SampleTable read_samples(std::istream& in);
SampleTable read_samples_file(const std::string& path);
void write_samples(std::ostream& out, const SampleSet& samples, const std::vector<std::string>& covariate_names = {});

}  // namespace geodep
