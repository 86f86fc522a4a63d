#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "igst/report.hpp"

using namespace igst;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Format, Numbers) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3), "0.333333333333");
  EXPECT_EQ(format_number(2.5e-11), "2.5e-11");
  EXPECT_EQ(format_number(-4), "-4");
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(Table, Csv) {
  Table t;
  t.header = {"a", "b"};
  t.add_row({"1", "2"});
  t.add_row({"x", "y"});
  EXPECT_EQ(t.to_csv(), "a,b\n1,2\nx,y\n");
  EXPECT_THROW(t.add_row({"1"}), InvalidArgument);
}

TEST(Table, SeriesColumnsFollowTheReference) {
  CutSeries s;
  s.s = {0, 0.5};
  s.numeric = {1, 2};
  EXPECT_EQ(series_table(s).to_csv(), "s,value_numeric\n0,1\n0.5,2\n");
  s.reference = {1.5, 2.5};
  EXPECT_EQ(series_table(s).to_csv(), "s,value_numeric,value_reference\n0,1,1.5\n0.5,2,2.5\n");
}

TEST(Table, ConvergenceRows) {
  ConvergenceRow r;
  r.h_S = 0.5;
  r.h_T = 0.5;
  r.r_u = 2;
  r.r_p = 1;
  r.r_T = 1;
  r.norm_h = 0.25;
  r.observed_order = std::numeric_limits<double>::quiet_NaN();
  const std::string csv = convergence_table({r}).to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "h_S,h_T,r_u,r_p,r_T,c0,norm_h,norm_L2_p,norm_L2_u,observed_order");
  EXPECT_NE(csv.find("0.5,0.5,2,1,1,0,0.25,0,0,nan"), std::string::npos);
}

TEST(Svg, DeterministicAndEscaped) {
  Plot p;
  p.title = "p <t=0.5> & more";
  p.x_label = "s";
  p.y_label = "p";
  p.series.push_back({"numeric", {0, 0.5, 1}, {1, 3, 2}, false});
  p.series.push_back({"reference", {0, 0.5, 1}, {1, 2.5, 2}, true});
  const std::string a = render_svg(p);
  EXPECT_EQ(a, render_svg(p));
  EXPECT_EQ(a.rfind("<svg", 0), 0u);
  EXPECT_NE(a.find("&lt;t=0.5&gt; &amp; more"), std::string::npos);
  EXPECT_EQ(a.find("<t=0.5>"), std::string::npos);
  EXPECT_NE(a.find("stroke-dasharray"), std::string::npos);
  EXPECT_NE(a.find("</svg>"), std::string::npos);

  // Log axes skip nonpositive and non-finite values instead of failing.
  p.log_y = true;
  p.series[0].y[0] = 0;
  p.series[1].y[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_NO_THROW(render_svg(p));
}

TEST(Files, WriteTextCreatesDirectories) {
  const auto dir = std::filesystem::temp_directory_path() / "igst_report_test";
  std::filesystem::remove_all(dir);
  const auto file = dir / "a" / "b.csv";
  write_text(file, "x,y\n");
  EXPECT_EQ(slurp(file), "x,y\n");
  write_text(file, "z\n");
  EXPECT_EQ(slurp(file), "z\n");
  std::filesystem::remove_all(dir);
}
