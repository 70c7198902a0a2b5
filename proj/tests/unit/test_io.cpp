#include <gtest/gtest.h>

#include <atomic>
#include <sstream>
#include <stdexcept>

#include "test_support.hpp"

using namespace ledger_emd;
using namespace ledger_emd::testing;

TEST(TextIo, SplitCsv) {
  EXPECT_EQ(*text::split_csv("a,b,c"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(*text::split_csv(" a , b "), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(*text::split_csv("\"x,y\",\"say \"\"hi\"\"\""), (std::vector<std::string>{"x,y", "say \"hi\""}));
  EXPECT_EQ(*text::split_csv(""), (std::vector<std::string>{""}));
  EXPECT_FALSE(text::split_csv("\"open").has_value());
}

TEST(TextIo, CsvFieldRoundTrips) {
  for (std::string s : {"plain", "with,comma", "quote\"d", " padded ", ""}) {
    EXPECT_EQ((*text::split_csv(text::csv_field(s) + ",z"))[0], s);
  }
  EXPECT_EQ(text::csv_field("plain"), "plain");
}

TEST(TextIo, ParseDouble) {
  EXPECT_EQ(text::parse_double("1.5"), 1.5);
  EXPECT_EQ(text::parse_double(" -2e3 "), -2000.0);
  EXPECT_EQ(text::parse_double("+4"), 4.0);
  EXPECT_FALSE(text::parse_double("").has_value());
  EXPECT_FALSE(text::parse_double("1,5").has_value());
  EXPECT_FALSE(text::parse_double("abc").has_value());
  EXPECT_FALSE(text::parse_double("inf").has_value());
  EXPECT_FALSE(text::parse_double("nan").has_value());
}

TEST(TextIo, FormatDouble) {
  EXPECT_EQ(text::format_double(2.0), "2");
  EXPECT_EQ(text::format_double(0.1 + 0.2), "0.3");
  EXPECT_EQ(text::format_double(1.0 / 3.0, 6), "0.333333");
  Rng rng(70);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    EXPECT_EQ(*text::parse_double(text::format_round_trip(v)), v);
  }
}

TEST(TextIo, ReadLineStripsCarriageReturn) {
  std::istringstream in("a\r\nb\n");
  std::string line;
  ASSERT_TRUE(text::read_line(in, line));
  EXPECT_EQ(line, "a");
  ASSERT_TRUE(text::read_line(in, line));
  EXPECT_EQ(line, "b");
  EXPECT_FALSE(text::read_line(in, line));
}

TEST(DistanceMatrixIo, RoundTrip) {
  Rng rng(71);
  const auto d = random_distance_matrix_fixture(rng, 15);
  std::stringstream buf;
  write_distance_matrix(buf, d);
  const auto back = read_distance_matrix(buf);
  EXPECT_EQ(back.company_ids(), d.company_ids());
  for (std::size_t i = 0; i < 15; ++i) {
    for (std::size_t j = 0; j < 15; ++j) EXPECT_NEAR(back(i, j), d(i, j), 1e-11 * std::max(1.0, d(i, j)));
  }
}

TEST(DistanceMatrixIo, ValidationErrors) {
  const auto expect_error = [](const std::string& doc, const std::string& fragment) {
    std::istringstream in(doc);
    try {
      read_distance_matrix(in, "d.csv");
      FAIL() << doc;
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == Errc::malformed_input || e.code() == Errc::bad_value) << e.what();
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  expect_error("", "empty");
  expect_error("id,a,b\na,0,1\nb,1,0\n", "line 1");
  expect_error("company_id,a,b\na,0,1\n", "d.csv");
  expect_error("company_id,a,b\na,0,1\nb,1\n", "line 3");
  expect_error("company_id,a,b\nb,0,1\na,1,0\n", "does not match");
  expect_error("company_id,a,b\na,0,1\nb,2,0\n", "symmetric");
  expect_error("company_id,a,b\na,0.5,1\nb,1,0\n", "diagonal");
  expect_error("company_id,a,b\na,0,-1\nb,-1,0\n", "line 2");
  expect_error("company_id,a,b\na,0,x\nb,1,0\n", "line 2");
}

TEST(DistanceMatrix, SubsetAndLookup) {
  Rng rng(72);
  const auto d = random_distance_matrix_fixture(rng, 6);
  const auto sub = d.subset({"c104", "c101"});
  EXPECT_EQ(sub.company_ids(), (std::vector<std::string>{"c104", "c101"}));
  EXPECT_EQ(sub(0, 1), d(4, 1));
  EXPECT_EQ(d.index_of("c103"), 3u);
  EXPECT_FALSE(d.find("zz").has_value());
  EXPECT_THROW(d.index_of("zz"), Error);
}

TEST(DistanceMatrix, RandomMatrixIsValidAndSeeded) {
  const std::vector<std::string> ids{"a", "b", "c", "d"};
  const auto a = random_distance_matrix(ids, 3);
  EXPECT_EQ(a.values(), random_distance_matrix(ids, 3).values());
  EXPECT_NE(a.values(), random_distance_matrix(ids, 4).values());
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a(i, i), 0.0);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(a(i, j), a(j, i));
  }
}

TEST(Parallel, CoversEveryIndexOnce) {
  for (unsigned threads : {1u, 2u, 7u, 0u}) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(Parallel, RethrowsLowestFailingIndex) {
  for (unsigned threads : {1u, 4u}) {
    try {
      parallel_for(500, threads, [](std::size_t i) {
        if (i == 123 || i == 400) throw std::runtime_error("fail " + std::to_string(i));
      });
      FAIL();
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "fail 123");
    }
  }
}

TEST(Parallel, ResolveThreads) {
  EXPECT_EQ(resolve_threads(3), 3u);
  EXPECT_GE(resolve_threads(0), 1u);
}

TEST(Svg, MarkersAndEscaping) {
  Embedding2D emb{{"a<1>", "b", "c"}, {{{0.0, 0.0}}, {{1.0, 2.0}}, {{-1.0, 4.0}}}};
  SvgOptions options;
  options.highlighted = {"b"};
  options.circled = {"c"};
  std::ostringstream out;
  write_svg_scatter(out, emb, options);
  const auto svg = out.str();
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("<title>a&lt;1&gt;</title>"), std::string::npos);
  EXPECT_EQ(svg.find("a<1>"), std::string::npos);
  // Two plain circles, one diamond, one ring.
  std::size_t paths = 0, rings = 0;
  for (std::size_t pos = 0; (pos = svg.find("<path", pos)) != std::string::npos; ++pos) ++paths;
  for (std::size_t pos = 0; (pos = svg.find("stroke=\"black\"", pos)) != std::string::npos; ++pos) ++rings;
  EXPECT_EQ(paths, 1u);
  EXPECT_EQ(rings, 1u);
  // The highlighted marker is drawn after every plain one.
  EXPECT_GT(svg.find("<title>b</title>"), svg.find("<title>c</title>"));
}

TEST(Svg, SinglePointDoesNotDivideByZero) {
  Embedding2D emb{{"only"}, {{{3.0, 3.0}}}};
  std::ostringstream out;
  write_svg_scatter(out, emb);
  EXPECT_EQ(out.str().find("nan"), std::string::npos);
  EXPECT_EQ(out.str().find("inf"), std::string::npos);
}
