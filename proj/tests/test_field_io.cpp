#include <sstream>

#include "doctest.h"
#include "kshear/errors.hpp"
#include "kshear/field_io.hpp"
#include "oracles.hpp"

using namespace kshear;

TEST_CASE("checkpoint round trip is bit exact") {
  const Grid2D g(1.25, 3.5, 16, 8);
  FieldCheckpoint cp{forward(g, oracle::whiteNoise(g.physicalSize(), 11)), 4.5, 17};
  std::stringstream ss;
  writeCheckpoint(ss, cp);
  CHECK(ss.str().size() == 64 + 16 * g.physicalSize());
  CHECK(ss.str().substr(0, 7) == "KSHRFLD");
  const auto back = readCheckpoint(ss);
  CHECK(back.field.grid() == g);
  CHECK(back.t == 4.5);
  CHECK(back.step == 17);
  for (std::size_t i = 0; i < cp.field.half().size(); ++i) {
    CHECK(back.field.half()[i] == cp.field.half()[i]);
  }
}

TEST_CASE("checkpoint header is little-endian") {
  const Grid2D g(1.0, 2.0, 8, 10);
  std::stringstream ss;
  writeCheckpoint(ss, FieldCheckpoint{SpectralField2D(g), 0.0, 0});
  const std::string s = ss.str();
  CHECK(static_cast<unsigned char>(s[8]) == 1);   // version
  CHECK(static_cast<unsigned char>(s[16]) == 8);  // Nx
  CHECK(static_cast<unsigned char>(s[24]) == 10); // Ny
  // L2 = 2.0 = 0x4000000000000000
  CHECK(static_cast<unsigned char>(s[47]) == 0x40);
}

TEST_CASE("checkpoint rejects corrupted input") {
  std::stringstream bad("NOTAFILE................................................................");
  CHECK_THROWS_AS(readCheckpoint(bad), InvalidInput);

  const Grid2D g(1.0, 1.0, 8, 8);
  SpectralField2D f(g);
  f.setCoeff(1, 1, Complex(1.0, 0.0));
  std::stringstream ss;
  writeCheckpoint(ss, FieldCheckpoint{f, 0.0, 0});
  std::string bytes = ss.str();
  // Corrupt the imaginary part of coefficient (k=-4, j=-4).
  bytes[64 + 8 + 7] = 0x3f;
  std::stringstream corrupted(bytes);
  CHECK_THROWS_AS(readCheckpoint(corrupted), InvalidInput);

  std::stringstream truncated(bytes.substr(0, 100));
  CHECK_THROWS_AS(readCheckpoint(truncated), InvalidInput);
}

TEST_CASE("coefficient csv export") {
  const Grid2D g(1.0, 1.0, 8, 8);
  SpectralField2D f(g);
  f.setCoeff(1, 0, 0.5);
  std::ostringstream os;
  writeCoefficientCsv(os, f);
  const std::string s = os.str();
  CHECK(s.rfind("k,j,re,im\n", 0) == 0);
  CHECK(s.find("1,0,0.5,0\n") != std::string::npos);
  CHECK(s.find("-1,0,0.5,-0\n") != std::string::npos);
}
