#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

namespace meshpose {

// DPT1 container, the one binary format every module shares.
//
//   bytes 0..3   magic "DPT1"
//   byte  4      dtype: 1 = f32, 2 = f64, 3 = i32
//   byte  5      ndim, 1..8
//   next ndim*8  dims, little-endian u64, each >= 1
//   rest         row-major payload, little-endian, exactly
//                element_size * product(dims) bytes
enum class Dtype : std::uint8_t { f32 = 1, f64 = 2, i32 = 3 };

std::size_t dtype_size(Dtype dtype);

class Tensor {
public:
  Tensor() = default;
  static Tensor f32(std::vector<std::uint64_t> shape, std::vector<float> data);
  static Tensor f64(std::vector<std::uint64_t> shape, std::vector<double> data);
  static Tensor i32(std::vector<std::uint64_t> shape,
                    std::vector<std::int32_t> data);

  Dtype dtype() const;
  const std::vector<std::uint64_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t element_count() const;

  // Typed accessors throw ValidationError on a dtype mismatch.
  const std::vector<float>& as_f32() const;
  const std::vector<double>& as_f64() const;
  const std::vector<std::int32_t>& as_i32() const;

  // Widening copy for loaders that accept f32 or f64 input.
  std::vector<double> to_f64() const;

private:
  std::vector<std::uint64_t> shape_;
  std::variant<std::vector<float>, std::vector<double>,
               std::vector<std::int32_t>>
      values_;
};

void write_tensor(const Tensor& tensor, const std::filesystem::path& path);
Tensor read_tensor(const std::filesystem::path& path);

}  // namespace meshpose
