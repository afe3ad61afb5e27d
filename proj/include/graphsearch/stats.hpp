#pragma once

// Association statistics over document counts. Probabilities are
// maximum-likelihood estimates f / n_docs; logarithms are natural.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace graphsearch::stats {

inline constexpr const char* kLogBase = "e";

namespace detail {

inline void check_counts(std::uint64_t fx, std::uint64_t fy, std::uint64_t fxy, std::uint64_t n) {
  if (fxy < 1 || fxy > std::min(fx, fy) || std::max(fx, fy) > n || fx + fy - fxy > n)
    throw std::invalid_argument("association statistics need 1 <= f_xy <= min(f_x, f_y), f_x + f_y - f_xy <= n; got f_x=" +
                                std::to_string(fx) + " f_y=" + std::to_string(fy) + " f_xy=" + std::to_string(fxy) +
                                " n=" + std::to_string(n));
}

}  // namespace detail

/// ln( p(xy) / (p(x) p(y)) ), evaluated as ln( f_xy n / (f_x f_y) ) so that
/// independence yields exactly 0.
inline double pmi(std::uint64_t fx, std::uint64_t fy, std::uint64_t fxy, std::uint64_t n) {
  detail::check_counts(fx, fy, fxy, n);
  using wide = unsigned __int128;
  wide num = static_cast<wide>(fxy) * n;
  wide den = static_cast<wide>(fx) * fy;
  if (num == den) return 0.0;
  return static_cast<double>(std::log(static_cast<long double>(num) / static_cast<long double>(den)));
}

/// pmi / -ln p(xy), in [-1, 1]. Returns 1 when p(xy) = 1 and for perfect
/// co-occurrence (f_x = f_y = f_xy).
inline double npmi(std::uint64_t fx, std::uint64_t fy, std::uint64_t fxy, std::uint64_t n) {
  double p = pmi(fx, fy, fxy, n);
  if (fxy == n || (fx == fxy && fy == fxy)) return 1.0;
  if (p == 0.0) return 0.0;
  long double self_info = -std::log(static_cast<long double>(fxy) / static_cast<long double>(n));
  return std::clamp(static_cast<double>(p / self_info), -1.0, 1.0);
}

struct CramersV {
  double value = 0.0;
  bool degenerate = false;  // a marginal of the 2x2 table is 0 or n
};

/// sqrt(chi^2 / n) over the presence/absence table [[both, x only], [y only, neither]].
inline CramersV cramers_v(std::uint64_t fx, std::uint64_t fy, std::uint64_t fxy, std::uint64_t n) {
  detail::check_counts(fx, fy, fxy, n);
  if (fx == n || fy == n) return {0.0, true};
  long double a = fxy, b = fx - fxy, c = fy - fxy, d = n - fx - fy + fxy;
  long double det = a * d - b * c;
  long double denom = (a + b) * (c + d) * (a + c) * (b + d);
  long double v = std::fabs(det) / std::sqrt(denom);
  return {static_cast<double>(std::min<long double>(v, 1.0L)), false};
}

}  // namespace graphsearch::stats
