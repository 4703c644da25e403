#include <doctest.h>

#include <cmath>
#include <sstream>

#include "geodep/csv_io.hpp"
#include "geodep/errors.hpp"
#include "geodep/svg.hpp"
#include "support.hpp"

using namespace geodep;

TEST_SUITE("io") {
  TEST_CASE("number text round-trips exactly") {
    CHECK(format_number(1.0) == "1.0");
    CHECK(format_number(-3.0) == "-3.0");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1e300) == "1e+300");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int k = 0; k < 1000; ++k) {
      const double v = u(rng) * std::pow(10.0, k % 20 - 10);
      CHECK(parse_number(format_number(v), 1) == v);
    }
    CHECK_THROWS_AS(format_number(std::nan("")), ValidationError);
  }

  TEST_CASE("cell parsing") {
    CHECK(parse_number(" +2.5 ", 1) == 2.5);
    CHECK(parse_number("-1e-3", 1) == -1e-3);
    for (const char* bad : {"", "abc", "1.2.3", "inf", "nan", "3x"}) {
      try {
        parse_number(bad, 7);
        FAIL("accepted '" << bad << "'");
      } catch (const ParseError& e) {
        CHECK(e.line() == 7);
        CHECK(std::string(e.what()).rfind("line 7: ", 0) == 0);
      }
    }
    CHECK(split_csv_line("a,,b") == std::vector<std::string>{"a", "", "b"});
  }

  TEST_CASE("numeric tables") {
    std::istringstream in("a,b\r\n1,2\r\n\r\n3,4\n");
    const NumericTable t = read_numeric_csv(in);
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    CHECK(t.rows == (MatrixXd(2, 2) << 1, 2, 3, 4).finished());
    std::istringstream ragged("a,b\n1,2\n3\n");
    try {
      read_numeric_csv(ragged);
      FAIL("ragged row accepted");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    std::istringstream empty("");
    CHECK_THROWS_AS(read_numeric_csv(empty), ParseError);
  }

  TEST_CASE("sample files round-trip") {
    std::mt19937_64 rng(4);
    const SampleSet s(testing::uniform_matrix(rng, 6, 3, -50, 50), testing::uniform_matrix(rng, 6, 2),
                      testing::normal_vector(rng, 6));
    std::ostringstream out;
    write_samples(out, s, {"ndvi", "elev"});
    CHECK(out.str().rfind("lon,lat,alt,x_ndvi,x_elev,z\n", 0) == 0);
    std::istringstream in(out.str());
    const SampleTable back = read_samples(in);
    CHECK(back.covariate_names == std::vector<std::string>{"ndvi", "elev"});
    CHECK(back.samples.coords() == s.coords());
    CHECK(back.samples.covariates() == s.covariates());
    CHECK(back.samples.values() == s.values());

    std::ostringstream plain;
    write_samples(plain, s.rows({0, 1}).with_values(VectorXd::Ones(2)));
    CHECK(plain.str().rfind("lon,lat,alt,x_1,x_2,z\n", 0) == 0);
  }

  TEST_CASE("sample file errors") {
    for (const char* header : {"lat,lon,z", "lon,lat", "lon,lat,z,x_a", "lon,lat,q,z", "lon,z"}) {
      std::istringstream in(std::string(header) + "\n");
      CHECK_THROWS_AS(read_samples(in), ParseError);
    }
    std::istringstream no_rows("lon,lat,z\n");
    CHECK_THROWS_AS(read_samples(no_rows), ValidationError);
    CHECK_THROWS_AS(read_samples_file("/nonexistent/file.csv"), Error);
  }

  TEST_CASE("CSV writer") {
    std::ostringstream out;
    CsvWriter w(out, {"k", "name", "value"});
    w.row({std::int64_t{3}, std::string("x"), 0.25});
    CHECK(out.str() == "k,name,value\n3,x,0.25\n");
    CHECK_THROWS_AS(w.row({1.0}), ValidationError);
  }

  TEST_CASE("SVG elements") {
    SvgPlot plot("t <&>", "x", "y");
    plot.set_range(0, 1, 0, 1);
    plot.scatter(Eigen::VectorXd::LinSpaced(7, 0, 1), Eigen::VectorXd::LinSpaced(7, 0, 1), "black");
    plot.line(Eigen::VectorXd::LinSpaced(5, 0, 1), Eigen::VectorXd::Zero(5), "red");
    const std::string s = plot.str();
    CHECK(testing::count_substr(s, "<circle") == 7);
    CHECK(testing::count_substr(s, "<polyline") == 1);
    CHECK(s.find("t &lt;&amp;&gt;") != std::string::npos);
    CHECK(s.rfind("<svg", 0) == 0);
    CHECK(s.find("</svg>") != std::string::npos);

    SvgPlot heat("h", "x", "y");
    const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(4, 0, 3);
    const Eigen::VectorXd ys = Eigen::VectorXd::LinSpaced(3, 0, 2);
    MatrixXd v(3, 4);
    for (Index iy = 0; iy < 3; ++iy)
      for (Index ix = 0; ix < 4; ++ix) v(iy, ix) = static_cast<double>(ix);
    heat.set_range(0, 3, 0, 2);
    heat.heatmap(xs, ys, v);
    heat.contours(xs, ys, v, {1.5}, "white");
    const std::string h = heat.str();
    CHECK(testing::count_substr(h, "<rect") == 12 + 1);  // cells plus background
    CHECK(testing::count_substr(h, "data-level=") == 1);
  }

  TEST_CASE("contour levels") {
    MatrixXd v(2, 2);
    v << 0, 1, 2, 4;
    CHECK(contour_levels(v, 3) == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(contour_levels(MatrixXd::Constant(2, 2, 1.0), 3).empty());
  }
}
