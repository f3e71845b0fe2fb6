#include "copim/tensor.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace copim {

namespace {

constexpr char kMagic[4] = {'R', 'T', 'S', 'R'};
constexpr std::uint8_t kVersion = 1;

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint32_t get_u32le(std::span<const std::uint8_t> in, std::size_t at) {
  return static_cast<std::uint32_t>(in[at]) |
         (static_cast<std::uint32_t>(in[at + 1]) << 8) |
         (static_cast<std::uint32_t>(in[at + 2]) << 16) |
         (static_cast<std::uint32_t>(in[at + 3]) << 24);
}

}  // namespace

std::size_t dtype_size(DType dtype) {
  switch (dtype) {
    case DType::u8:
    case DType::i8:
      return 1;
    case DType::i32:
    case DType::f32:
      return 4;
  }
  throw std::invalid_argument("unknown dtype code");
}

const char* dtype_name(DType dtype) {
  switch (dtype) {
    case DType::u8: return "u8";
    case DType::i8: return "i8";
    case DType::i32: return "i32";
    case DType::f32: return "f32";
  }
  return "?";
}

Tensor::Tensor(DType dtype, std::vector<std::uint32_t> dims)
    : dtype_(dtype), dims_(std::move(dims)) {
  std::size_t count = 1;
  for (std::uint32_t d : dims_) {
    if (d == 0) throw std::invalid_argument("tensor: zero dimension");
    count *= d;
  }
  if (dims_.empty()) count = 0;
  data_.assign(count * dtype_size(dtype_), 0);
}

Tensor Tensor::from_u8(std::vector<std::uint32_t> dims, std::vector<std::uint8_t> values) {
  Tensor t(DType::u8, std::move(dims));
  if (values.size() != t.size()) throw std::invalid_argument("tensor: value count mismatch");
  std::memcpy(t.data_.data(), values.data(), values.size());
  return t;
}

Tensor Tensor::from_i8(std::vector<std::uint32_t> dims, std::vector<std::int8_t> values) {
  Tensor t(DType::i8, std::move(dims));
  if (values.size() != t.size()) throw std::invalid_argument("tensor: value count mismatch");
  std::memcpy(t.data_.data(), values.data(), values.size());
  return t;
}

Tensor Tensor::from_i32(std::vector<std::uint32_t> dims, std::vector<std::int32_t> values) {
  Tensor t(DType::i32, std::move(dims));
  if (values.size() != t.size()) throw std::invalid_argument("tensor: value count mismatch");
  std::memcpy(t.data_.data(), values.data(), values.size() * 4);
  return t;
}

Tensor Tensor::from_f32(std::vector<std::uint32_t> dims, std::vector<float> values) {
  Tensor t(DType::f32, std::move(dims));
  if (values.size() != t.size()) throw std::invalid_argument("tensor: value count mismatch");
  std::memcpy(t.data_.data(), values.data(), values.size() * 4);
  return t;
}

std::size_t Tensor::size() const {
  return data_.size() / dtype_size(dtype_);
}

void Tensor::expect(DType dtype) const {
  if (dtype_ != dtype)
    throw std::logic_error(std::string("tensor: accessed ") + dtype_name(dtype_) +
                           " data as " + dtype_name(dtype));
}

std::span<std::uint8_t> Tensor::u8() {
  expect(DType::u8);
  return {data_.data(), data_.size()};
}
std::span<const std::uint8_t> Tensor::u8() const {
  expect(DType::u8);
  return {data_.data(), data_.size()};
}
std::span<std::int8_t> Tensor::i8() {
  expect(DType::i8);
  return {reinterpret_cast<std::int8_t*>(data_.data()), data_.size()};
}
std::span<const std::int8_t> Tensor::i8() const {
  expect(DType::i8);
  return {reinterpret_cast<const std::int8_t*>(data_.data()), data_.size()};
}
std::span<std::int32_t> Tensor::i32() {
  expect(DType::i32);
  return {reinterpret_cast<std::int32_t*>(data_.data()), size()};
}
std::span<const std::int32_t> Tensor::i32() const {
  expect(DType::i32);
  return {reinterpret_cast<const std::int32_t*>(data_.data()), size()};
}
std::span<float> Tensor::f32() {
  expect(DType::f32);
  return {reinterpret_cast<float*>(data_.data()), size()};
}
std::span<const float> Tensor::f32() const {
  expect(DType::f32);
  return {reinterpret_cast<const float*>(data_.data()), size()};
}

std::string Tensor::shape_str() const {
  std::string out = "[";
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(dims_[i]);
  }
  out += "] ";
  out += dtype_name(dtype_);
  return out;
}

bool Tensor::operator==(const Tensor& other) const {
  return dtype_ == other.dtype_ && dims_ == other.dims_ && data_ == other.data_;
}

std::vector<std::uint8_t> tensor_to_bytes(const Tensor& tensor) {
  if (tensor.dims().size() > 255) throw std::invalid_argument("tensor: rank > 255");
  std::vector<std::uint8_t> out;
  out.reserve(8 + tensor.dims().size() * 4 + tensor.bytes().size());
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(tensor.dtype()));
  out.push_back(static_cast<std::uint8_t>(tensor.dims().size()));
  out.push_back(0);  // reserved
  for (std::uint32_t d : tensor.dims()) put_u32le(out, d);

  // Payload, little-endian element order regardless of host endianness.
  if (dtype_size(tensor.dtype()) == 1) {
    out.insert(out.end(), tensor.bytes().begin(), tensor.bytes().end());
  } else {
    const std::uint8_t* p = tensor.bytes().data();
    for (std::size_t i = 0; i < tensor.size(); ++i, p += 4) {
      std::uint32_t v;
      std::memcpy(&v, p, 4);
      put_u32le(out, v);
    }
  }
  return out;
}

Tensor tensor_from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw std::runtime_error("tensor file: bad magic");
  if (bytes[4] != kVersion)
    throw std::runtime_error("tensor file: unsupported version " + std::to_string(bytes[4]));
  if (bytes[5] > 3) throw std::runtime_error("tensor file: unknown dtype code");
  DType dtype = static_cast<DType>(bytes[5]);
  std::size_t ndim = bytes[6];
  if (bytes.size() < 8 + ndim * 4) throw std::runtime_error("tensor file: truncated header");
  std::vector<std::uint32_t> dims(ndim);
  for (std::size_t i = 0; i < ndim; ++i) dims[i] = get_u32le(bytes, 8 + i * 4);

  Tensor t(dtype, dims);
  std::size_t offset = 8 + ndim * 4;
  if (bytes.size() - offset != t.bytes().size())
    throw std::runtime_error("tensor file: payload size mismatch");
  if (dtype_size(dtype) == 1) {
    std::memcpy(t.bytes().data(), bytes.data() + offset, t.bytes().size());
  } else {
    std::uint8_t* p = t.bytes().data();
    for (std::size_t i = 0; i < t.size(); ++i, p += 4) {
      std::uint32_t v = get_u32le(bytes, offset + i * 4);
      std::memcpy(p, &v, 4);
    }
  }
  return t;
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open tensor file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return tensor_from_bytes(bytes);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  std::vector<std::uint8_t> bytes = tensor_to_bytes(tensor);
  write_file_atomic(path, bytes);
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span<const std::uint8_t>(
                              reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace copim
