#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <gmpxx.h>

namespace l2t {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using IntMatrix = DenseMatrix<std::int64_t>;

// ---------------------------------------------------------------------------
// Word-size modular arithmetic

constexpr std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

constexpr std::uint64_t addmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  const std::uint64_t s = a + b;
  return (s >= m || s < a) ? s - m : s;
}

constexpr std::uint64_t submod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return a >= b ? a - b : a + (m - b);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);

/// Inverse of a modulo m; a must be a unit.
std::uint64_t invmod(std::uint64_t a, std::uint64_t m);

/// Reduces a signed integer into [0, m).
constexpr std::uint64_t reduce(std::int64_t a, std::uint64_t m) {
  const std::int64_t r = a % static_cast<std::int64_t>(m);
  return static_cast<std::uint64_t>(r < 0 ? r + static_cast<std::int64_t>(m) : r);
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime(std::uint64_t n);

/// Uniformly drawn prime in [2^61, 2^62).
std::uint64_t random_prime_62(std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Matrices over F_p

/// Dense matrix with entries reduced into [0, p).
struct PrimeFieldMatrix {
  std::uint64_t p = 2;
  DenseMatrix<std::uint64_t> entries;

  PrimeFieldMatrix() = default;
  PrimeFieldMatrix(std::uint64_t prime, Eigen::Index rows, Eigen::Index cols)
      : p(prime), entries(DenseMatrix<std::uint64_t>::Zero(rows, cols)) {}

  static PrimeFieldMatrix from_integers(const IntMatrix& m, std::uint64_t prime);

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
};

/// Bit-packed F_2 matrix, one row per contiguous run of 64-bit words.
class BitMatrix {
public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), stride_((cols + 63) / 64), bits_(rows * stride_, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  bool get(std::size_t r, std::size_t c) const {
    return (bits_[r * stride_ + c / 64] >> (c % 64)) & 1U;
  }
  void set(std::size_t r, std::size_t c, bool v) {
    auto& w = bits_[r * stride_ + c / 64];
    const std::uint64_t mask = std::uint64_t{1} << (c % 64);
    w = v ? (w | mask) : (w & ~mask);
  }
  void flip(std::size_t r, std::size_t c) { bits_[r * stride_ + c / 64] ^= std::uint64_t{1} << (c % 64); }

  /// Rank by XOR elimination; consumes a copy.
  std::size_t rank() const;

private:
  std::size_t rows_ = 0, cols_ = 0, stride_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Exact rank of a matrix whose entries are already reduced mod p (p < 2^63 prime).
std::size_t rank_mod(DenseMatrix<std::uint64_t> m, std::uint64_t p);

/// Exact rank over F_p; p = 2 goes through the bit-packed kernel.
std::size_t rank_fp(const PrimeFieldMatrix& m);

/// Rank of an integer matrix reduced mod p.
std::size_t rank_fp(const IntMatrix& m, std::uint64_t p);

/// Sparse row: (column, value) pairs, values in [0, p).
using SparseRow = std::vector<std::pair<std::uint32_t, std::uint64_t>>;

/// Rank over F_p of a sparse matrix by incremental echelon insertion; suited to very sparse inputs.
std::size_t rank_fp_sparse(const std::vector<SparseRow>& rows, std::size_t cols, std::uint64_t p);

// ---------------------------------------------------------------------------
// Matrices over Z and Q

struct RankQOptions {
  std::uint64_t seed = 0xB3771;
  std::uint64_t job_id = 0;
  int primes = 2;
  /// rows*cols at or below which the whole matrix goes through Bareiss.
  std::size_t bareiss_threshold = 64 * 64;
  std::size_t sample_size = 24;
  std::int64_t max_abs_entry = std::int64_t{1} << 40;
  std::size_t max_entries = std::size_t{1} << 27;
};

struct RankQResult {
  std::size_t rank = 0;
  /// Bareiss on the full matrix, or primes agreed and the sampled minor check passed.
  bool certified = false;
  bool exact_bareiss = false;
  std::vector<std::uint64_t> primes;
};

/// Rank over Q: modular consensus over random 62-bit primes, Bareiss for small inputs.
RankQResult rank_q(const IntMatrix& m, const RankQOptions& opts = {});

/// Fraction-free Gaussian elimination over Z (GMP); exact.
std::size_t rank_bareiss(const IntMatrix& m);

/// Nonzero Smith invariant factors d_1 | d_2 | ... (positive).
std::vector<mpz_class> snf(const IntMatrix& m, std::size_t max_entries = 256 * 256);

/// Debug dump: first line "rows cols", then one "row col value" line per nonzero.
void write_triples(std::ostream& os, const IntMatrix& m);
IntMatrix read_triples(std::istream& is);

}  // namespace l2t
