#pragma once

// Constructive lower bounds: the base-n digit bijection [n^d] -> [n]^d,
// Singer perfect difference sets, and dense Sidon sets built from them.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <vector>

#include "json.hpp"
#include "sidonlab/errors.hpp"
#include "sidonlab/grid.hpp"

namespace sidon {

// a -> (a_0, ..., a_{d-1}) with a = sum a_i n^i.
inline GridPoint phi_d(std::uint64_t a, const GridParams& g) {
  if (!g.contains(a)) throw ValidationError("phi_d argument outside [0, n^d)");
  return unrank(a, g);
}

// Image of A under phi_d, as grid ranks. Since rank(phi_d(a)) = a the ranks
// are unchanged; what changes is the ambient addition (no carries in [n]^d).
// A need not be Sidon; when it is (as a subset of [n^d]) the image is Sidon.
inline RankSet lift_sidon(std::span<const std::uint64_t> values, const GridParams& g) {
  for (auto a : values)
    if (!g.contains(a)) throw ValidationError("lift_sidon element outside [0, n^d)");
  RankSet out = normalize(values, g);
#ifndef NDEBUG
  if (is_sidon(out, GridParams(g.size(), 1)).is_sidon) assert(is_sidon(out, g).is_sidon);
#endif
  return out;
}

struct DifferenceSetCertificate {
  std::uint64_t modulus = 0;
  std::vector<std::uint64_t> elements;  // sorted residues in [0, modulus)
  bool checked = false;
};

inline nlohmann::json to_json(const DifferenceSetCertificate& c) {
  return nlohmann::json{{"modulus", c.modulus}, {"elements", c.elements}, {"checked", c.checked}};
}

// Every nonzero residue mod m occurs exactly once as x - y, x != y.
inline bool is_perfect_difference_set(std::span<const std::uint64_t> elements, std::uint64_t modulus) {
  if (modulus == 0) return false;
  std::vector<std::uint32_t> hits(modulus, 0);
  for (auto x : elements) {
    if (x >= modulus) return false;
    for (auto y : elements) {
      if (x == y) continue;
      if (++hits[(x + modulus - y) % modulus] > 1) return false;
    }
  }
  for (std::uint64_t r = 1; r < modulus; ++r)
    if (hits[r] != 1) return false;
  return true;
}

inline bool is_prime(std::uint64_t x) {
  if (x < 2) return false;
  for (std::uint64_t f = 2; f * f <= x; ++f)
    if (x % f == 0) return false;
  return true;
}

namespace detail {

inline std::uint64_t primitive_root(std::uint64_t q) {
  std::vector<std::uint64_t> factors;
  std::uint64_t rest = q - 1;
  for (std::uint64_t f = 2; f * f <= rest; ++f) {
    if (rest % f) continue;
    factors.push_back(f);
    while (rest % f == 0) rest /= f;
  }
  if (rest > 1) factors.push_back(rest);
  auto power = [q](std::uint64_t b, std::uint64_t e) {
    std::uint64_t r = 1;
    for (b %= q; e; e >>= 1, b = b * b % q)
      if (e & 1) r = r * b % q;
    return r;
  };
  for (std::uint64_t g = 2; g < q; ++g) {
    bool ok = true;
    for (auto f : factors) ok = ok && power(g, (q - 1) / f) != 1;
    if (ok) return g;
  }
  return 1;  // q = 2
}

// Zeros of a third-order linear recurrence over GF(q) whose characteristic
// cubic is irreducible: the indices i in [0, q^2+q+1) at which a fixed linear
// functional vanishes on alpha^i. When alpha generates GF(q^3)*/GF(q)* these
// indices are a line of PG(2, q), i.e. a perfect difference set.
inline std::vector<std::uint64_t> singer_by_recurrence(std::uint64_t q) {
  const std::uint64_t m = q * q + q + 1;
  std::vector<std::uint64_t> zeros;
  // The constant term c is the norm of the root. If c is a cube in GF(q) the
  // root is a cube modulo scalars and cannot generate when 3 | q^2+q+1, so c
  // runs over the powers of a primitive root starting from the first.
  const std::uint64_t g = primitive_root(q);
  std::uint64_t c = 1;
  for (std::uint64_t e = 1; e < q; ++e) {
    c = c * g % q;
    for (std::uint64_t b = 0; b < q; ++b) {
      for (std::uint64_t a = 0; a < q; ++a) {
        bool has_root = false;
        for (std::uint64_t r = 0; r < q && !has_root; ++r) {
          std::uint64_t v = (r * r % q * r + (q - a) * (r * r % q) + (q - b) * r + (q - c)) % q;
          has_root = v == 0;
        }
        if (has_root) continue;

        zeros.clear();
        std::uint64_t s0 = 0, s1 = 0, s2 = 1;  // s_i, s_{i+1}, s_{i+2}
        bool too_many = false;
        for (std::uint64_t i = 0; i < m; ++i) {
          if (s0 == 0) {
            zeros.push_back(i);
            if (zeros.size() > q + 1) {
              too_many = true;
              break;
            }
          }
          std::uint64_t next = (a * s2 + b * s1 + c * s0) % q;
          s0 = s1;
          s1 = s2;
          s2 = next;
        }
        if (too_many || zeros.size() != q + 1) continue;
        // state at m must be proportional to the initial (0, 0, 1)
        if (s0 != 0 || s1 != 0) continue;
        if (is_perfect_difference_set(zeros, m)) return zeros;
      }
    }
  }
  return {};
}

inline bool pds_extend(std::vector<std::uint64_t>& chosen, std::vector<bool>& used_diff, std::uint64_t m,
                       std::size_t target, std::uint64_t next) {
  if (chosen.size() == target) return true;
  for (std::uint64_t x = next; x < m; ++x) {
    std::vector<std::uint64_t> fresh;
    bool ok = true;
    for (auto y : chosen) {
      std::uint64_t d1 = (x + m - y) % m, d2 = (y + m - x) % m;
      if (used_diff[d1] || used_diff[d2] || d1 == d2) {
        ok = false;
        break;
      }
      used_diff[d1] = used_diff[d2] = true;
      fresh.push_back(d1);
      fresh.push_back(d2);
    }
    if (ok) {
      chosen.push_back(x);
      if (pds_extend(chosen, used_diff, m, target, x + 1)) return true;
      chosen.pop_back();
    }
    for (auto dd : fresh) used_diff[dd] = false;
  }
  return false;
}

}  // namespace detail

// Backtracking search for a (q+1)-subset of Z_{q^2+q+1} with distinct
// differences, normalized to contain 0. Only sensible for small q.
inline std::vector<std::uint64_t> singer_exhaustive(std::uint64_t q) {
  const std::uint64_t m = q * q + q + 1;
  std::vector<std::uint64_t> chosen{0};
  std::vector<bool> used(m, false);
  if (detail::pds_extend(chosen, used, m, q + 1, 1)) return chosen;
  return {};
}

// Perfect difference set of size q+1 modulo q^2+q+1 for q = 1 or q prime.
inline DifferenceSetCertificate singer_sidon(std::uint64_t q) {
  if (q == 1) return {3, {0, 1}, is_perfect_difference_set(std::vector<std::uint64_t>{0, 1}, 3)};
  if (!is_prime(q)) throw UnsupportedError("Singer construction implemented for prime q only (got " +
                                           std::to_string(q) + ")");
  if (q > 20'000) throw FeasibilityError("q too large for the Singer construction");

  static std::mutex mutex;
  static std::map<std::uint64_t, DifferenceSetCertificate> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(q); it != cache.end()) return it->second;
  }

  const std::uint64_t m = q * q + q + 1;
  auto elements = detail::singer_by_recurrence(q);
  if (elements.empty() && q <= 7) elements = singer_exhaustive(q);
  if (elements.empty()) throw std::logic_error("no perfect difference set found for prime q=" + std::to_string(q));
  std::sort(elements.begin(), elements.end());
  DifferenceSetCertificate cert{m, std::move(elements), false};
  cert.checked = is_perfect_difference_set(cert.elements, m);
  if (!cert.checked) throw std::logic_error("Singer certificate failed verification");

  std::lock_guard lock(mutex);
  return cache.emplace(q, std::move(cert)).first->second;
}

namespace detail {

// For a perfect difference set D mod m and a multiplier u coprime to m, the
// translates of u*D are again perfect difference sets. span[c] is the
// smallest L such that some cyclic window of length L holds c elements.
struct WindowTable {
  std::uint64_t q = 0;
  std::uint64_t modulus = 0;
  std::vector<std::uint64_t> multipliers;
  std::vector<std::vector<std::uint64_t>> sorted;  // per multiplier
  std::vector<std::vector<std::uint64_t>> span;    // per multiplier, index c (0..k)
  std::vector<std::vector<std::size_t>> start;     // argmin window start for span[c]
};

inline constexpr std::size_t kWindowMultipliers = 6;

inline std::shared_ptr<const WindowTable> window_table(std::uint64_t q) {
  static std::mutex mutex;
  static std::map<std::uint64_t, std::shared_ptr<const WindowTable>> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(q); it != cache.end()) return it->second;
  }
  auto cert = singer_sidon(q);
  auto table = std::make_shared<WindowTable>();
  table->q = q;
  table->modulus = cert.modulus;
  const std::uint64_t m = cert.modulus;
  const std::size_t k = cert.elements.size();
  for (std::uint64_t u = 1; u < m && table->multipliers.size() < kWindowMultipliers; ++u) {
    if (std::gcd(u, m) != 1) continue;
    std::vector<std::uint64_t> e;
    e.reserve(k);
    for (auto x : cert.elements) e.push_back(static_cast<std::uint64_t>((unsigned __int128)x * u % m));
    std::sort(e.begin(), e.end());
    std::vector<std::uint64_t> span(k + 1, 0);
    std::vector<std::size_t> start(k + 1, 0);
    span[1] = 1;
    for (std::size_t c = 2; c <= k; ++c) {
      span[c] = m + 1;
      for (std::size_t i = 0; i < k; ++i) {
        std::uint64_t last = e[(i + c - 1) % k];
        std::uint64_t len = (last + m - e[i]) % m + 1;
        if (len < span[c]) {
          span[c] = len;
          start[c] = i;
        }
      }
    }
    table->multipliers.push_back(u);
    table->sorted.push_back(std::move(e));
    table->span.push_back(std::move(span));
    table->start.push_back(std::move(start));
  }
  std::lock_guard lock(mutex);
  return cache.emplace(q, std::move(table)).first->second;
}

inline std::uint64_t pds_modulus(std::uint64_t q) { return q * q + q + 1; }

}  // namespace detail

// Sidon subset of [0, n) cut from a Singer difference set: among q = 1 and
// the primes from the largest one with q^2+q+1 <= n up to three primes
// beyond it, and a few multipliers per q, take the cyclic window of length n
// holding the most elements. Ties keep the smaller q, then multiplier, then
// window start.
inline std::vector<std::uint64_t> dense_sidon_in_interval(std::uint64_t n) {
  if (n == 0) throw ValidationError("interval length must be >= 1");
  std::vector<std::uint64_t> candidates;
  // largest q with q^2+q+1 <= n, then down to a prime (or 1)
  std::uint64_t top = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n))));
  while (top > 1 && detail::pds_modulus(top) > n) --top;
  while (detail::pds_modulus(top + 1) <= n) ++top;
  std::uint64_t base = top;
  while (base > 1 && !is_prime(base)) --base;
  candidates.push_back(base);
  for (std::uint64_t q = base + 1; candidates.size() < 4; ++q)
    if (is_prime(q)) candidates.push_back(q);

  std::size_t best_count = 0;
  std::vector<std::uint64_t> best;
  for (auto q : candidates) {
    auto table = detail::window_table(q);
    for (std::size_t mi = 0; mi < table->multipliers.size(); ++mi) {
      const auto& span = table->span[mi];
      std::size_t c = span.size() - 1;
      while (c > 0 && span[c] > n) --c;
      if (c <= best_count) continue;
      const auto& e = table->sorted[mi];
      const std::size_t k = e.size();
      const std::size_t i0 = table->start[mi][c];
      best.clear();
      for (std::size_t j = 0; j < c; ++j) best.push_back((e[(i0 + j) % k] + table->modulus - e[i0]) % table->modulus);
      std::sort(best.begin(), best.end());
      best_count = c;
    }
  }
  return best;
}

inline RankSet dense_sidon_in_grid(const GridParams& g) {
  auto values = dense_sidon_in_interval(g.size());
  return lift_sidon(values, g);
}

}  // namespace sidon
