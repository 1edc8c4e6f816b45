#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <string_view>

namespace redist {

/// Picard coefficient d* applied to the previous gradient in the corrector.
enum class Scheme {
  original,  ///< 1 / max(|g|, eps) everywhere
  basting,   ///< double-well potential below |g| = 1
  adams,     ///< cubic potential below |g| = 1
};

/// d*(g) for gradient norm g >= 0. The eps floor only guards 1/g.
inline double d_star(Scheme scheme, double g, double eps_grad) {
  if (g < 0.0) throw std::invalid_argument("d_star: negative gradient norm");
  switch (scheme) {
    case Scheme::original:
      return 1.0 / std::max(g, eps_grad);
    case Scheme::basting:
      return g > 1.0 ? 1.0 / g : 3.0 * g - 2.0 * g * g;
    case Scheme::adams:
      return g > 1.0 ? 1.0 / g : 2.0 - g;
  }
  return 0.0;
}

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::original: return "original";
    case Scheme::basting: return "basting";
    case Scheme::adams: return "adams";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view s) {
  if (s == "original") return Scheme::original;
  if (s == "basting") return Scheme::basting;
  if (s == "adams") return Scheme::adams;
  throw std::invalid_argument("unknown scheme '" + std::string(s) + "'");
}

}  // namespace redist
