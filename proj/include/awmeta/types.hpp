#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace awmeta {

// Malformed arguments: wrong shapes, out-of-range p-values, too few samples.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A t-statistic denominator of exactly zero.
class DegenerateVariance : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Ingestion and configuration failures (bad files, mismatched gene sets).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Sidedness { TwoSided, OneSided };

/// Dense row-major matrix.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<const T> values() const { return data_; }

  std::vector<T> column(std::size_t c) const {
    std::vector<T> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  Matrix transposed() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Binary study-inclusion weights. Study k maps to bit k, so the 2^K - 1
/// admissible vectors enumerate in binary counting order as bits 1, 2, ...,
/// 2^K - 1. The all-zero vector is not representable.
class WeightVector {
 public:
  static constexpr unsigned kRepresentableStudies = 31;

  WeightVector(std::uint32_t bits, unsigned studies) : bits_(bits), studies_(studies) {
    if (studies == 0 || studies > kRepresentableStudies)
      throw InvalidInput("weight vector: study count out of range");
    if (bits == 0) throw InvalidInput("weight vector: all-zero weight is excluded");
    if (bits >> studies) throw InvalidInput("weight vector: bits beyond study count");
  }

  static WeightVector all(unsigned studies) {
    return WeightVector(studies >= 32 ? ~0u : (1u << studies) - 1u, studies);
  }

  /// Parses "101" (first character is the first study).
  static WeightVector from_bitstring(const std::string& s) {
    std::uint32_t bits = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k] == '1') bits |= 1u << k;
      else if (s[k] != '0') throw InvalidInput("weight bitstring must contain only 0/1: " + s);
    }
    return WeightVector(bits, static_cast<unsigned>(s.size()));
  }

  bool operator[](unsigned k) const { return (bits_ >> k) & 1u; }
  unsigned size() const { return studies_; }
  unsigned count() const { return static_cast<unsigned>(std::popcount(bits_)); }
  std::uint32_t bits() const { return bits_; }

  std::string bitstring() const {
    std::string s(studies_, '0');
    for (unsigned k = 0; k < studies_; ++k)
      if ((*this)[k]) s[k] = '1';
    return s;
  }

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::uint32_t bits_;
  unsigned studies_;
};

}  // namespace awmeta
