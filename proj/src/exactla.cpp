#include "l2tower/exactla.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "l2tower/errors.hpp"

namespace l2t {

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp != 0) {
    if (exp & 1U) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    exp >>= 1U;
  }
  return result;
}

std::uint64_t invmod(std::uint64_t a, std::uint64_t m) {
  std::int64_t t = 0, new_t = 1;
  __int128 r = m, new_r = a % m;
  while (new_r != 0) {
    const __int128 q = r / new_r;
    const __int128 tmp_t = t - q * new_t;
    t = new_t;
    new_t = static_cast<std::int64_t>(tmp_t);
    const __int128 tmp_r = r - q * new_r;
    r = new_r;
    new_r = tmp_r;
  }
  if (r != 1) throw Error("invmod: element is not a unit");
  return t < 0 ? static_cast<std::uint64_t>(t + static_cast<__int128>(m)) : static_cast<std::uint64_t>(t);
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t small : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % small == 0) return n == small;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1U) == 0) {
    d >>= 1U;
    ++s;
  }
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::uint64_t random_prime_62(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint64_t> dist(std::uint64_t{1} << 61, (std::uint64_t{1} << 62) - 1);
  for (;;) {
    const std::uint64_t candidate = dist(rng) | 1U;
    if (is_prime(candidate)) return candidate;
  }
}

PrimeFieldMatrix PrimeFieldMatrix::from_integers(const IntMatrix& m, std::uint64_t prime) {
  PrimeFieldMatrix out(prime, m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.entries(i, j) = reduce(m(i, j), prime);
  return out;
}

std::size_t BitMatrix::rank() const {
  std::vector<std::uint64_t> work = bits_;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols_ && rank < rows_; ++c) {
    const std::size_t word = c / 64;
    const std::uint64_t mask = std::uint64_t{1} << (c % 64);
    std::size_t pivot = rank;
    while (pivot < rows_ && (work[pivot * stride_ + word] & mask) == 0) ++pivot;
    if (pivot == rows_) continue;
    if (pivot != rank)
      std::swap_ranges(work.begin() + static_cast<std::ptrdiff_t>(pivot * stride_),
                       work.begin() + static_cast<std::ptrdiff_t>((pivot + 1) * stride_),
                       work.begin() + static_cast<std::ptrdiff_t>(rank * stride_));
    const std::uint64_t* prow = work.data() + rank * stride_;
    for (std::size_t r = rank + 1; r < rows_; ++r) {
      std::uint64_t* row = work.data() + r * stride_;
      if ((row[word] & mask) == 0) continue;
      for (std::size_t w = word; w < stride_; ++w) row[w] ^= prow[w];
    }
    ++rank;
  }
  return rank;
}

namespace {

// Row echelon elimination with sparse pivot rows. Mul must compute a*b mod p.
template <typename Mul>
std::size_t eliminate(DenseMatrix<std::uint64_t>& a, std::uint64_t p, Mul mul) {
  const Eigen::Index rows = a.rows(), cols = a.cols();
  Eigen::Index rank = 0;
  std::vector<Eigen::Index> support;
  for (Eigen::Index c = 0; c < cols && rank < rows; ++c) {
    Eigen::Index pivot = rank;
    while (pivot < rows && a(pivot, c) == 0) ++pivot;
    if (pivot == rows) continue;
    if (pivot != rank) a.row(pivot).swap(a.row(rank));
    const std::uint64_t inv = invmod(a(rank, c), p);
    support.clear();
    for (Eigen::Index j = c; j < cols; ++j) {
      if (a(rank, j) != 0) {
        a(rank, j) = mul(a(rank, j), inv);
        support.push_back(j);
      }
    }
    for (Eigen::Index r = rank + 1; r < rows; ++r) {
      const std::uint64_t f = a(r, c);
      if (f == 0) continue;
      for (Eigen::Index j : support) a(r, j) = submod(a(r, j), mul(f, a(rank, j)), p);
    }
    ++rank;
  }
  return static_cast<std::size_t>(rank);
}

}  // namespace

std::size_t rank_mod(DenseMatrix<std::uint64_t> m, std::uint64_t p) {
  if (p < (std::uint64_t{1} << 32))
    return eliminate(m, p, [p](std::uint64_t x, std::uint64_t y) { return x * y % p; });
  return eliminate(m, p, [p](std::uint64_t x, std::uint64_t y) { return mulmod(x, y, p); });
}

std::size_t rank_fp(const PrimeFieldMatrix& m) {
  if (m.p == 2) {
    BitMatrix bits(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (m.entries(i, j) & 1U) bits.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j), true);
    return bits.rank();
  }
  return rank_mod(m.entries, m.p);
}

std::size_t rank_fp_sparse(const std::vector<SparseRow>& rows, std::size_t cols, std::uint64_t p) {
  std::vector<SparseRow> pivot_rows;
  std::vector<std::int64_t> pivot_of(cols, -1);
  std::vector<std::uint64_t> acc(cols, 0);
  for (const SparseRow& row : rows) {
    if (row.empty()) continue;
    std::uint32_t lo = static_cast<std::uint32_t>(cols), hi = 0;
    for (const auto& [c, v] : row) {
      acc[c] = addmod(acc[c], v % p, p);
      lo = std::min(lo, c);
      hi = std::max(hi, c + 1);
    }
    std::int64_t lead = -1;
    for (std::uint32_t c = lo; c < hi; ++c) {
      if (acc[c] == 0) continue;
      const std::int64_t piv = pivot_of[c];
      if (piv < 0) {
        lead = c;
        break;
      }
      const std::uint64_t f = acc[c];
      for (const auto& [pc, pv] : pivot_rows[static_cast<std::size_t>(piv)]) {
        acc[pc] = submod(acc[pc], mulmod(f, pv, p), p);
        hi = std::max(hi, pc + 1);
      }
    }
    if (lead >= 0) {
      const std::uint64_t inv = invmod(acc[static_cast<std::size_t>(lead)], p);
      SparseRow reduced;
      for (std::uint32_t c = static_cast<std::uint32_t>(lead); c < hi; ++c)
        if (acc[c] != 0) reduced.emplace_back(c, mulmod(acc[c], inv, p));
      pivot_of[static_cast<std::size_t>(lead)] = static_cast<std::int64_t>(pivot_rows.size());
      pivot_rows.push_back(std::move(reduced));
    }
    std::fill(acc.begin() + lo, acc.begin() + hi, 0);
  }
  return pivot_rows.size();
}

std::size_t rank_fp(const IntMatrix& m, std::uint64_t p) { return rank_fp(PrimeFieldMatrix::from_integers(m, p)); }

namespace {

using BigMatrix = std::vector<std::vector<mpz_class>>;

BigMatrix to_big(const IntMatrix& m) {
  BigMatrix out(static_cast<std::size_t>(m.rows()), std::vector<mpz_class>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = static_cast<long>(m(i, j));
  return out;
}

std::size_t bareiss(BigMatrix a) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows == 0 ? 0 : a[0].size();
  mpz_class prev = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && a[pivot][c] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(a[pivot], a[rank]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        a[r][j] = a[r][j] * a[rank][c] - a[r][c] * a[rank][j];
        mpz_divexact(a[r][j].get_mpz_t(), a[r][j].get_mpz_t(), prev.get_mpz_t());
      }
      a[r][c] = 0;
    }
    prev = a[rank][c];
    ++rank;
  }
  return rank;
}

}  // namespace

std::size_t rank_bareiss(const IntMatrix& m) { return bareiss(to_big(m)); }

RankQResult rank_q(const IntMatrix& m, const RankQOptions& opts) {
  const auto entries = static_cast<std::size_t>(m.rows()) * static_cast<std::size_t>(m.cols());
  if (entries > opts.max_entries)
    throw BudgetExceeded("rank_q: " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         " exceeds the dense entry budget");
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) > opts.max_abs_entry || m(i, j) < -opts.max_abs_entry)
        throw BudgetExceeded("rank_q: entry magnitude exceeds the configured budget");

  RankQResult result;
  if (entries <= opts.bareiss_threshold) {
    result.rank = rank_bareiss(m);
    result.certified = true;
    result.exact_bareiss = true;
    return result;
  }

  std::mt19937_64 rng(opts.seed ^ (0x9E3779B97F4A7C15ULL * (opts.job_id + 1)));
  std::vector<std::size_t> ranks;
  for (int k = 0; k < std::max(opts.primes, 2); ++k) {
    const std::uint64_t prime = random_prime_62(rng);
    result.primes.push_back(prime);
    ranks.push_back(rank_fp(m, prime));
  }
  result.rank = *std::max_element(ranks.begin(), ranks.end());
  const bool agree = std::all_of(ranks.begin(), ranks.end(), [&](std::size_t r) { return r == ranks.front(); });

  // Sampled fraction-free confirmation on a random square-ish submatrix.
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(m.rows())), cols(static_cast<std::size_t>(m.cols()));
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  std::shuffle(rows.begin(), rows.end(), rng);
  std::shuffle(cols.begin(), cols.end(), rng);
  rows.resize(std::min(rows.size(), opts.sample_size));
  cols.resize(std::min(cols.size(), opts.sample_size));
  IntMatrix sample(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      sample(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
  const bool sample_ok = rank_bareiss(sample) == rank_fp(sample, result.primes.front());

  result.certified = agree && sample_ok;
  return result;
}

std::vector<mpz_class> snf(const IntMatrix& m, std::size_t max_entries) {
  if (static_cast<std::size_t>(m.rows()) * static_cast<std::size_t>(m.cols()) > max_entries)
    throw BudgetExceeded("snf: matrix exceeds the dense size threshold");
  BigMatrix a = to_big(m);
  const std::size_t rows = a.size();
  const std::size_t cols = rows == 0 ? 0 : a[0].size();
  std::vector<mpz_class> factors;

  for (std::size_t t = 0; t < std::min(rows, cols); ++t) {
    // Smallest nonzero entry of the trailing block becomes the pivot.
    auto move_min_to_pivot = [&]() {
      std::size_t bi = rows, bj = cols;
      for (std::size_t i = t; i < rows; ++i)
        for (std::size_t j = t; j < cols; ++j)
          if (a[i][j] != 0 && (bi == rows || abs(a[i][j]) < abs(a[bi][bj]))) {
            bi = i;
            bj = j;
          }
      if (bi == rows) return false;
      std::swap(a[t], a[bi]);
      for (auto& row : a) std::swap(row[t], row[bj]);
      return true;
    };
    if (!move_min_to_pivot()) break;

    for (;;) {
      bool dirty = false;
      for (std::size_t i = t + 1; i < rows; ++i) {
        if (a[i][t] == 0) continue;
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), a[i][t].get_mpz_t(), a[t][t].get_mpz_t());
        for (std::size_t j = t; j < cols; ++j) a[i][j] -= q * a[t][j];
        if (a[i][t] != 0) dirty = true;
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        if (a[t][j] == 0) continue;
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), a[t][j].get_mpz_t(), a[t][t].get_mpz_t());
        for (std::size_t i = t; i < rows; ++i) a[i][j] -= q * a[i][t];
        if (a[t][j] != 0) dirty = true;
      }
      if (dirty) {
        move_min_to_pivot();
        continue;
      }
      // Pivot must divide the whole trailing block.
      bool divides = true;
      for (std::size_t i = t + 1; i < rows && divides; ++i)
        for (std::size_t j = t + 1; j < cols; ++j)
          if (a[i][j] % a[t][t] != 0) {
            for (std::size_t k = t; k < cols; ++k) a[t][k] += a[i][k];
            divides = false;
            break;
          }
      if (divides) break;
    }
    factors.push_back(abs(a[t][t]));
  }
  return factors;
}

void write_triples(std::ostream& os, const IntMatrix& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0) os << i << ' ' << j << ' ' << m(i, j) << '\n';
}

IntMatrix read_triples(std::istream& is) {
  std::string line;
  auto next_line = [&]() {
    while (std::getline(is, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first != std::string::npos && line[first] != '#') return true;
    }
    return false;
  };
  if (!next_line()) throw InputError("triples: missing 'rows cols' header");
  std::istringstream header(line);
  Eigen::Index rows = -1, cols = -1;
  if (!(header >> rows >> cols) || rows < 0 || cols < 0) throw InputError("triples: bad header '" + line + "'");
  IntMatrix m = IntMatrix::Zero(rows, cols);
  while (next_line()) {
    std::istringstream ls(line);
    Eigen::Index i = -1, j = -1;
    std::int64_t v = 0;
    if (!(ls >> i >> j >> v) || i < 0 || j < 0 || i >= rows || j >= cols)
      throw InputError("triples: bad entry '" + line + "'");
    m(i, j) += v;
  }
  return m;
}

}  // namespace l2t
