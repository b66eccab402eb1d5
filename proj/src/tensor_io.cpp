#include "meshpose/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "meshpose/errors.hpp"

namespace meshpose {

namespace {

constexpr char kMagic[4] = {'D', 'P', 'T', '1'};
constexpr std::size_t kMaxRank = 8;

void put_u64_le(std::uint64_t value, std::string& out) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t value = 0;
  for (int i = 0; i < 8; ++i) value |= std::uint64_t(p[i]) << (8 * i);
  return value;
}

std::uint32_t get_u32_le(const unsigned char* p) {
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i) value |= std::uint32_t(p[i]) << (8 * i);
  return value;
}

std::size_t checked_element_count(const std::vector<std::uint64_t>& shape) {
  if (shape.empty() || shape.size() > kMaxRank)
    throw ValidationError("tensor rank must be in 1..8, got " +
                          std::to_string(shape.size()));
  std::uint64_t count = 1;
  for (std::uint64_t dim : shape) {
    if (dim == 0) throw ValidationError("tensor dims must be >= 1");
    if (dim > std::numeric_limits<std::uint64_t>::max() / count)
      throw ValidationError("tensor shape overflows element count");
    count *= dim;
  }
  if (count > std::numeric_limits<std::size_t>::max() / sizeof(double))
    throw ValidationError("tensor too large for this platform");
  return static_cast<std::size_t>(count);
}

}  // namespace

std::size_t dtype_size(Dtype dtype) {
  switch (dtype) {
    case Dtype::f32: return 4;
    case Dtype::f64: return 8;
    case Dtype::i32: return 4;
  }
  throw ValidationError("unknown dtype code " +
                        std::to_string(static_cast<int>(dtype)));
}

template <typename T>
static void check_count(const std::vector<std::uint64_t>& shape,
                        const std::vector<T>& data) {
  const std::size_t expected = checked_element_count(shape);
  if (data.size() != expected)
    throw ValidationError("tensor data has " + std::to_string(data.size()) +
                          " elements, shape requires " +
                          std::to_string(expected));
}

Tensor Tensor::f32(std::vector<std::uint64_t> shape, std::vector<float> data) {
  check_count(shape, data);
  Tensor t;
  t.shape_ = std::move(shape);
  t.values_ = std::move(data);
  return t;
}

Tensor Tensor::f64(std::vector<std::uint64_t> shape, std::vector<double> data) {
  check_count(shape, data);
  Tensor t;
  t.shape_ = std::move(shape);
  t.values_ = std::move(data);
  return t;
}

Tensor Tensor::i32(std::vector<std::uint64_t> shape,
                   std::vector<std::int32_t> data) {
  check_count(shape, data);
  Tensor t;
  t.shape_ = std::move(shape);
  t.values_ = std::move(data);
  return t;
}

Dtype Tensor::dtype() const {
  if (std::holds_alternative<std::vector<float>>(values_)) return Dtype::f32;
  if (std::holds_alternative<std::vector<double>>(values_)) return Dtype::f64;
  return Dtype::i32;
}

std::size_t Tensor::element_count() const {
  return std::visit([](const auto& v) { return v.size(); }, values_);
}

const std::vector<float>& Tensor::as_f32() const {
  if (auto* v = std::get_if<std::vector<float>>(&values_)) return *v;
  throw ValidationError("tensor is not f32");
}

const std::vector<double>& Tensor::as_f64() const {
  if (auto* v = std::get_if<std::vector<double>>(&values_)) return *v;
  throw ValidationError("tensor is not f64");
}

const std::vector<std::int32_t>& Tensor::as_i32() const {
  if (auto* v = std::get_if<std::vector<std::int32_t>>(&values_)) return *v;
  throw ValidationError("tensor is not i32");
}

std::vector<double> Tensor::to_f64() const {
  switch (dtype()) {
    case Dtype::f64: return as_f64();
    case Dtype::f32: {
      const auto& src = as_f32();
      return std::vector<double>(src.begin(), src.end());
    }
    case Dtype::i32: {
      const auto& src = as_i32();
      return std::vector<double>(src.begin(), src.end());
    }
  }
  throw ValidationError("unknown dtype");
}

void write_tensor(const Tensor& tensor, const std::filesystem::path& path) {
  std::string bytes;
  bytes.reserve(6 + 8 * tensor.rank() +
                dtype_size(tensor.dtype()) * tensor.element_count());
  bytes.append(kMagic, 4);
  bytes.push_back(static_cast<char>(tensor.dtype()));
  bytes.push_back(static_cast<char>(tensor.rank()));
  for (std::uint64_t dim : tensor.shape()) put_u64_le(dim, bytes);

  switch (tensor.dtype()) {
    case Dtype::f32:
      for (float v : tensor.as_f32()) {
        const auto u = std::bit_cast<std::uint32_t>(v);
        for (int i = 0; i < 4; ++i)
          bytes.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
      }
      break;
    case Dtype::f64:
      for (double v : tensor.as_f64()) {
        const auto u = std::bit_cast<std::uint64_t>(v);
        put_u64_le(u, bytes);
      }
      break;
    case Dtype::i32:
      for (std::int32_t v : tensor.as_i32()) {
        const auto u = static_cast<std::uint32_t>(v);
        for (int i = 0; i < 4; ++i)
          bytes.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
      }
      break;
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());

  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();
  if (size < 6) throw ValidationError("truncated tensor header: " + path.string());
  if (std::memcmp(p, kMagic, 4) != 0)
    throw ValidationError("bad magic in tensor file: " + path.string());

  const auto dtype_code = p[4];
  if (dtype_code < 1 || dtype_code > 3)
    throw ValidationError("unknown dtype code " + std::to_string(dtype_code) +
                          " in " + path.string());
  const Dtype dtype = static_cast<Dtype>(dtype_code);

  const std::size_t ndim = p[5];
  if (ndim < 1 || ndim > kMaxRank)
    throw ValidationError("tensor rank must be in 1..8, got " +
                          std::to_string(ndim));
  if (size < 6 + 8 * ndim)
    throw ValidationError("truncated tensor dims: " + path.string());

  std::vector<std::uint64_t> shape(ndim);
  for (std::size_t i = 0; i < ndim; ++i) shape[i] = get_u64_le(p + 6 + 8 * i);
  const std::size_t count = checked_element_count(shape);

  const std::size_t payload_offset = 6 + 8 * ndim;
  const std::size_t expected = count * dtype_size(dtype);
  const std::size_t actual = size - payload_offset;
  if (actual < expected)
    throw ValidationError("truncated tensor payload in " + path.string() +
                          ": expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(actual));
  if (actual > expected)
    throw ValidationError("trailing bytes after tensor payload in " +
                          path.string());

  const unsigned char* payload = p + payload_offset;
  switch (dtype) {
    case Dtype::f32: {
      std::vector<float> data(count);
      for (std::size_t i = 0; i < count; ++i)
        data[i] = std::bit_cast<float>(get_u32_le(payload + 4 * i));
      return Tensor::f32(std::move(shape), std::move(data));
    }
    case Dtype::f64: {
      std::vector<double> data(count);
      for (std::size_t i = 0; i < count; ++i)
        data[i] = std::bit_cast<double>(get_u64_le(payload + 8 * i));
      return Tensor::f64(std::move(shape), std::move(data));
    }
    case Dtype::i32: {
      std::vector<std::int32_t> data(count);
      for (std::size_t i = 0; i < count; ++i)
        data[i] = static_cast<std::int32_t>(get_u32_le(payload + 4 * i));
      return Tensor::i32(std::move(shape), std::move(data));
    }
  }
  throw ValidationError("unknown dtype");
}

}  // namespace meshpose
