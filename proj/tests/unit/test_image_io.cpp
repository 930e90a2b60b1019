#include <gtest/gtest.h>

#include <fstream>

#include "dlo/dataset.hpp"
#include "dlo/error.hpp"
#include "dlo/image_io.hpp"
#include "helpers.hpp"

namespace dlo {
namespace {

TEST(ImageIo, PbmAndPngRoundTrip) {
  const test::TempDir dir("imgio");
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto img = test::random_image(rng, rng.uniform_int(1, 40), rng.uniform_int(1, 40), 0.4);
    write_pbm(img, dir.path() / "a.pbm");
    EXPECT_EQ(read_pbm(dir.path() / "a.pbm"), img);
    write_png(img, dir.path() / "a.png");
    EXPECT_EQ(read_png(dir.path() / "a.png"), img);
    EXPECT_EQ(load_image(dir.path() / "a.png"), img);
  }
}

TEST(ImageIo, PlainPbmWithComments) {
  const test::TempDir dir("imgio_plain");
  std::ofstream(dir.path() / "p.pbm") << "P1\n# comment\n3 2\n1 0 1\n0 1 0\n";
  const auto img = read_pbm(dir.path() / "p.pbm");
  EXPECT_EQ(img.width(), 3);
  EXPECT_TRUE(img.get(0, 0));
  EXPECT_FALSE(img.get(1, 0));
  EXPECT_TRUE(img.get(1, 1));
  EXPECT_EQ(img.count(), 3u);
}

TEST(ImageIo, Errors) {
  const test::TempDir dir("imgio_err");
  EXPECT_THROW(read_pbm(dir.path() / "missing.pbm"), IoError);
  std::ofstream(dir.path() / "bad.pbm") << "P5\n1 1\n";
  EXPECT_THROW(read_pbm(dir.path() / "bad.pbm"), FormatError);
  std::ofstream(dir.path() / "short.pbm") << "P1\n2 2\n1 0 1\n";
  EXPECT_THROW(read_pbm(dir.path() / "short.pbm"), FormatError);
  std::ofstream(dir.path() / "bad.png") << "not a png";
  EXPECT_THROW(read_png(dir.path() / "bad.png"), FormatError);
  EXPECT_THROW(load_image(dir.path() / "x.bmp"), ParameterError);
}

TEST(ImageIo, DatasetRecordAsImage) {
  const test::TempDir dir("imgio_dlos");
  const auto s = generate_sample(GenConfig{}, 9);
  save_sample(s, dir.path() / "s.dlos");
  EXPECT_EQ(load_image(dir.path() / "s.dlos"), s.image);
}

}  // namespace
}  // namespace dlo
