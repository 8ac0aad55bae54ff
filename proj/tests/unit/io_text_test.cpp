#include <gtest/gtest.h>

#include "bass/common.hpp"
#include "bass/error.hpp"
#include "bass/io.hpp"
#include "bass/text.hpp"
#include "support.hpp"

using namespace bass;

TEST(Text, Utf8RoundTrip) {
  const std::string s = "Caf\xC3\xA9 \xE2\x80\x94 \xF0\x9F\x9A\x80";
  EXPECT_EQ(text::encode_utf8(text::decode_utf8(s)), s);
  EXPECT_EQ(text::decode_utf8("\xC3").front(), char32_t{0xFFFD});
}

TEST(Text, LowercaseIsUnicodeAware) {
  EXPECT_EQ(text::lowercase("\xC3\x89T\xC3\x89 Stra\xC3\x9F" "E"), "\xC3\xA9t\xC3\xA9 stra\xC3\x9f" "e");
  EXPECT_TRUE(text::is_upper(U'É'));
  EXPECT_TRUE(text::is_alpha(U'é'));
  EXPECT_FALSE(text::is_alpha(U'7'));
}

TEST(Text, TrimSplitJoin) {
  EXPECT_EQ(text::trim("  a b \t\n"), "a b");
  EXPECT_EQ(text::split_whitespace(" a  b\tc\n"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(text::join({"x", "y", "z"}, ", "), "x, y, z");
  EXPECT_EQ(text::join({}, ", "), "");
}

TEST(Text, TemplateSubstitutesOnce) {
  EXPECT_EQ(text::render_template("{{A}}-{{B}}", {{"A", "{{B}}"}, {"B", "2"}}), "{{B}}-2");
  EXPECT_THROW(text::render_template("{{MISSING}}", {}), ValidationError);
  EXPECT_EQ(text::render_template("no slots {", {}), "no slots {");
}

TEST(Csv, QuotedFields) {
  const auto rows = io::parse_csv("a,b\n\"x,1\",\"say \"\"hi\"\"\"\n\"multi\nline\",z\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][0], "x,1");
  EXPECT_EQ(rows[1][1], "say \"hi\"");
  EXPECT_EQ(rows[2][0], "multi\nline");
  EXPECT_EQ(io::format_csv_row({"x,1", "say \"hi\"", "plain"}), "\"x,1\",\"say \"\"hi\"\"\",plain");
}

TEST(Csv, ColumnsByName) {
  const auto rows = io::parse_csv_columns("b,a,c\n2,1,3\n", {"a", "b"});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], (io::CsvRow{"1", "2"}));
  try {
    io::parse_csv_columns("b\n1\n", {"a"});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("a"), std::string::npos);
  }
}

TEST(Io, AtomicWriteAndRead) {
  testing_support::TempDir dir;
  const auto p = dir / "nested/out.txt";
  io::write_file(p, "hello");
  EXPECT_EQ(io::read_file(p), "hello");
  io::append_line(p, "more");
  EXPECT_EQ(io::read_file(p), "hellomore\n");
  EXPECT_THROW(io::read_file(dir / "absent"), IoError);
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678}) EXPECT_EQ(std::stod(io::format_double(v)), v);
  EXPECT_EQ(io::format_double(1.0), "1");
}

TEST(Rng, DeterministicAndUniformIndex) {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.index(13), b.index(13));
  Rng c(1);
  std::vector<int> hist(4, 0);
  for (int i = 0; i < 4000; ++i) ++hist[c.index(4)];
  for (int h : hist) EXPECT_NEAR(h, 1000, 150);
  auto p = Rng(3).permutation(10);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(p[i], i);
}

TEST(Math, EntropyCosineArgmax) {
  Eigen::Vector3d p(0.5, 0.5, 0.0);
  EXPECT_NEAR(entropy(p), std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(cosine(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)), 0.0);
  EXPECT_DOUBLE_EQ(cosine(Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 1)), 0.0);
  EXPECT_EQ(argmax_first(Eigen::Vector4d(1, 3, 3, 2)), 1);
}
