#include <gtest/gtest.h>

#include <fstream>

#include "newsclust/container.hpp"
#include "newsclust/error.hpp"
#include "support/synthetic.hpp"

using namespace newsclust;
using newsclust::testing::TempDir;

TEST(Container, RoundTripKeepsMetaAndValues) {
  TempDir dir;
  Container c;
  c.meta["kind"] = "test";
  c.meta["ids"] = {"a", "b"};
  c.matrices.push_back({"m", Matrix<float>(2, 3, std::vector<float>{1.f, -2.5f, 3.f, 0.f, 1e-30f, -0.f})});
  c.matrices.push_back({"empty", Matrix<float>(0, 4)});
  write_container(dir.file("c.bin"), c);

  const Container back = read_container(dir.file("c.bin"));
  EXPECT_EQ(back.meta, c.meta);
  ASSERT_EQ(back.matrices.size(), 2u);
  EXPECT_EQ(back.matrix("m"), c.matrix("m"));
  EXPECT_EQ(back.matrix("empty").cols(), 4u);
  EXPECT_THROW(back.matrix("missing"), LookupError);
}

TEST(Container, PayloadIsLittleEndianFloat32) {
  TempDir dir;
  Container c;
  c.matrices.push_back({"m", Matrix<float>(1, 1, std::vector<float>{1.0f})});
  write_container(dir.file("c.bin"), c);
  const std::string bytes = newsclust::testing::read_text(dir.file("c.bin"));
  // 1.0f = 0x3f800000
  ASSERT_GE(bytes.size(), 4u);
  EXPECT_EQ(bytes.substr(bytes.size() - 4), std::string("\x00\x00\x80\x3f", 4));
  EXPECT_EQ(bytes.substr(0, 8), "NCLSTMX1");
}

TEST(Container, RejectsTruncatedPayload) {
  TempDir dir;
  Container c;
  c.matrices.push_back({"m", Matrix<float>(4, 4, 1.0f)});
  write_container(dir.file("c.bin"), c);
  std::string bytes = newsclust::testing::read_text(dir.file("c.bin"));
  newsclust::testing::write_text(dir.file("short.bin"), bytes.substr(0, bytes.size() - 3));
  newsclust::testing::write_text(dir.file("long.bin"), bytes + "xxxx");
  EXPECT_THROW(read_container(dir.file("short.bin")), LoadError);
  EXPECT_THROW(read_container(dir.file("long.bin")), LoadError);
}

TEST(Container, RejectsForeignFiles) {
  TempDir dir;
  newsclust::testing::write_text(dir.file("x.bin"), "definitely not a container");
  EXPECT_THROW(read_container(dir.file("x.bin")), LoadError);
  EXPECT_THROW(read_container(dir.file("missing.bin")), LoadError);
}
