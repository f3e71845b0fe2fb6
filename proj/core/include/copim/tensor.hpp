#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace copim {

enum class DType : std::uint8_t { u8 = 0, i8 = 1, i32 = 2, f32 = 3 };

std::size_t dtype_size(DType dtype);
const char* dtype_name(DType dtype);

// Dense row-major tensor. Element storage is a flat byte buffer; typed
// access goes through the checked span accessors.
class Tensor {
 public:
  Tensor() = default;
  Tensor(DType dtype, std::vector<std::uint32_t> dims);

  static Tensor from_u8(std::vector<std::uint32_t> dims, std::vector<std::uint8_t> values);
  static Tensor from_i8(std::vector<std::uint32_t> dims, std::vector<std::int8_t> values);
  static Tensor from_i32(std::vector<std::uint32_t> dims, std::vector<std::int32_t> values);
  static Tensor from_f32(std::vector<std::uint32_t> dims, std::vector<float> values);

  DType dtype() const { return dtype_; }
  const std::vector<std::uint32_t>& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const;  // element count

  std::span<std::uint8_t> u8();
  std::span<const std::uint8_t> u8() const;
  std::span<std::int8_t> i8();
  std::span<const std::int8_t> i8() const;
  std::span<std::int32_t> i32();
  std::span<const std::int32_t> i32() const;
  std::span<float> f32();
  std::span<const float> f32() const;

  std::vector<std::uint8_t>& bytes() { return data_; }
  const std::vector<std::uint8_t>& bytes() const { return data_; }

  std::string shape_str() const;  // "[2, 3, 4] u8"

  bool operator==(const Tensor& other) const;

 private:
  void expect(DType dtype) const;

  DType dtype_ = DType::u8;
  std::vector<std::uint32_t> dims_;
  std::vector<std::uint8_t> data_;
};

// Binary tensor file format:
//   bytes 0..3   magic "RTSR"
//   byte  4      format version (1)
//   byte  5      dtype code (0=u8, 1=i8, 2=i32, 3=f32)
//   byte  6      ndim
//   byte  7      reserved (0)
//   then ndim little-endian u32 dims, then the row-major payload in
//   little-endian element order.
std::vector<std::uint8_t> tensor_to_bytes(const Tensor& tensor);
Tensor tensor_from_bytes(std::span<const std::uint8_t> bytes);

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Tensor& tensor);

// Write-to-temp-then-rename, shared by every file emitter.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace copim
