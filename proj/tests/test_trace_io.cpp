#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "renewal/process.hpp"
#include "renewal/trace_io.hpp"

namespace renewal {
namespace {

TEST(TraceCsv, HeaderAndRoundTrip) {
  RunConfig config;
  config.seed = 9;
  config.horizon = 3'000;
  const auto trace = simulate(config);
  std::stringstream buffer;
  write_trace_csv(buffer, trace);
  std::string header;
  std::getline(std::stringstream(buffer.str()), header);
  EXPECT_EQ(header, "n,P,gap,lambda,log_lambda,S");

  const auto parsed = read_trace_csv(buffer);
  EXPECT_EQ(parsed.rows, trace.rows);
}

TEST(TraceCsv, ShortestRealFormatting) {
  EXPECT_EQ(format_real(0.5), "0.5");
  EXPECT_EQ(format_real(2.0), "2");
  EXPECT_EQ(format_real(1.0 / 3.0), "0.3333333333333333");
}

TEST(TraceCsv, ShuffledRowNamesLine) {
  std::stringstream in("n,P,gap,lambda,log_lambda,S\n1,2,0,0.5,-0.69,2\n3,4,1,0.25,-1.38,9\n2,3,1,0.33,-1.09,5\n");
  try {
    read_trace_csv(in);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
  }
}

TEST(TraceCsv, RejectsMalformedInput) {
  std::stringstream bad_header("n,P,gap\n1,2,0\n");
  EXPECT_THROW(read_trace_csv(bad_header), ParseError);
  std::stringstream bad_value("n,P,gap,lambda,log_lambda,S\n1,2,0,abc,-0.69,2\n");
  EXPECT_THROW(read_trace_csv(bad_value), ParseError);
  std::stringstream short_row("n,P,gap,lambda,log_lambda,S\n1,2,0,0.5\n");
  EXPECT_THROW(read_trace_csv(short_row), ParseError);
  std::stringstream empty("");
  EXPECT_THROW(read_trace_csv(empty), ParseError);
  std::stringstream no_rows("n,P,gap,lambda,log_lambda,S\n");
  EXPECT_THROW(read_trace_csv(no_rows), ParseError);
}

}  // namespace
}  // namespace renewal
