#include <doctest.h>

#include "copim/rng.hpp"
#include "copim/tensor.hpp"
#include "test_util.hpp"

using namespace copim;

namespace {

Tensor random_tensor(copim::rng::Stream& stream) {
  DType dtype = static_cast<DType>(stream.uniform_int(0, 3));
  std::size_t rank = static_cast<std::size_t>(stream.uniform_int(1, 4));
  std::vector<std::uint32_t> dims;
  for (std::size_t i = 0; i < rank; ++i)
    dims.push_back(static_cast<std::uint32_t>(stream.uniform_int(1, 6)));
  Tensor t(dtype, dims);
  for (auto& b : t.bytes()) b = static_cast<std::uint8_t>(stream.next_u64() & 0xff);
  return t;
}

}  // namespace

TEST_SUITE("tensor") {

TEST_CASE("header layout is pinned") {
  Tensor t = Tensor::from_i32({2, 3}, {1, 2, 3, 4, 5, 6});
  auto bytes = tensor_to_bytes(t);
  REQUIRE(bytes.size() == 8 + 2 * 4 + 6 * 4);
  CHECK(bytes[0] == 'R');
  CHECK(bytes[1] == 'T');
  CHECK(bytes[2] == 'S');
  CHECK(bytes[3] == 'R');
  CHECK(bytes[4] == 1);  // version
  CHECK(bytes[5] == 2);  // i32 code
  CHECK(bytes[6] == 2);  // ndim
  CHECK(bytes[7] == 0);  // reserved
  CHECK(bytes[8] == 2);  // dims[0] LE
  CHECK(bytes[12] == 3);
  CHECK(bytes[16] == 1);  // first element LE
}

TEST_CASE("round trip in memory and on disk") {
  rng::Stream stream(1234);
  testutil::TempDir dir("tensor");
  for (int i = 0; i < 50; ++i) {
    Tensor t = random_tensor(stream);
    CHECK(tensor_from_bytes(tensor_to_bytes(t)) == t);

    auto path = dir / ("t" + std::to_string(i) + ".rtsr");
    write_tensor(path, t);
    CHECK(read_tensor(path) == t);

    // write(read(f)) == f, byte for byte
    auto original = testutil::slurp(path);
    write_tensor(path, read_tensor(path));
    CHECK(testutil::slurp(path) == original);
  }
}

TEST_CASE("corrupt files are rejected") {
  Tensor t = Tensor::from_u8({4}, {1, 2, 3, 4});
  auto good = tensor_to_bytes(t);

  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK_THROWS(tensor_from_bytes(bad_magic));

  auto bad_version = good;
  bad_version[4] = 9;
  CHECK_THROWS(tensor_from_bytes(bad_version));

  auto bad_dtype = good;
  bad_dtype[5] = 7;
  CHECK_THROWS(tensor_from_bytes(bad_dtype));

  auto truncated = good;
  truncated.pop_back();
  CHECK_THROWS(tensor_from_bytes(truncated));

  CHECK_THROWS(read_tensor("/nonexistent/nowhere.rtsr"));
}

TEST_CASE("typed access is checked") {
  Tensor t(DType::u8, {2});
  CHECK_NOTHROW(t.u8());
  CHECK_THROWS(t.i32());
  CHECK_THROWS(Tensor(DType::u8, {0, 3}));
}

}  // TEST_SUITE
