#include "simhaystack/transforms.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "simhaystack/error.hpp"

namespace simhaystack {

namespace {

// Orthonormal DCT-II basis, row k = frequency.
std::vector<double> dct_matrix(int n) {
  std::vector<double> m(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < n; ++k) {
    const double alpha = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (int i = 0; i < n; ++i) {
      m[static_cast<std::size_t>(k) * n + i] =
          alpha * std::cos(std::numbers::pi * (2.0 * i + 1.0) * k / (2.0 * n));
    }
  }
  return m;
}

// A * X * A^T, or A^T * X * A when inverse.
FloatPlane sandwich(const std::vector<double>& basis, const FloatPlane& x, bool inverse) {
  const int n = x.width();
  const auto at = [&](int r, int c) {
    return inverse ? basis[static_cast<std::size_t>(c) * n + r] : basis[static_cast<std::size_t>(r) * n + c];
  };
  std::vector<double> tmp(static_cast<std::size_t>(n) * n, 0.0);
  // tmp = A * X
  for (int r = 0; r < n; ++r) {
    for (int k = 0; k < n; ++k) {
      const double a = at(r, k);
      for (int c = 0; c < n; ++c) tmp[static_cast<std::size_t>(r) * n + c] += a * x.at(c, k);
    }
  }
  // out = tmp * A^T
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += tmp[static_cast<std::size_t>(r) * n + k] * at(c, k);
      out[static_cast<std::size_t>(r) * n + c] = acc;
    }
  }
  return FloatPlane(n, n, std::move(out));
}

void check_square(const FloatPlane& p) {
  if (p.width() != p.height()) throw InvalidInput("DCT expects a square plane");
  if (p.width() < 2) throw InvalidInput("DCT expects a side of at least 2");
}

void check_haar(const FloatPlane& p, int levels) {
  if (levels < 0) throw InvalidInput("Haar level count must be nonnegative");
  if (levels >= 31) throw InvalidInput("Haar level count too large");
  const int unit = 1 << levels;
  if (p.width() % unit != 0 || p.height() % unit != 0) {
    throw InvalidInput("plane side not divisible by 2^" + std::to_string(levels));
  }
}

}  // namespace

FloatPlane dct2(const FloatPlane& plane) {
  check_square(plane);
  return sandwich(dct_matrix(plane.width()), plane, false);
}

FloatPlane idct2(const FloatPlane& coefficients) {
  check_square(coefficients);
  return sandwich(dct_matrix(coefficients.width()), coefficients, true);
}

FloatPlane haar_dwt(const FloatPlane& plane, int levels) {
  check_haar(plane, levels);
  FloatPlane out = plane;
  const double r = 1.0 / std::numbers::sqrt2;
  std::vector<double> line;
  for (int level = 0; level < levels; ++level) {
    const int w = plane.width() >> level;
    const int h = plane.height() >> level;
    line.resize(static_cast<std::size_t>(std::max(w, h)));
    for (int y = 0; y < h; ++y) {
      for (int i = 0; i < w / 2; ++i) {
        const double a = out.at(2 * i, y);
        const double b = out.at(2 * i + 1, y);
        line[i] = (a + b) * r;
        line[w / 2 + i] = (a - b) * r;
      }
      for (int x = 0; x < w; ++x) out.at(x, y) = line[x];
    }
    for (int x = 0; x < w; ++x) {
      for (int i = 0; i < h / 2; ++i) {
        const double a = out.at(x, 2 * i);
        const double b = out.at(x, 2 * i + 1);
        line[i] = (a + b) * r;
        line[h / 2 + i] = (a - b) * r;
      }
      for (int y = 0; y < h; ++y) out.at(x, y) = line[y];
    }
  }
  return out;
}

FloatPlane inverse_haar_dwt(const FloatPlane& coefficients, int levels) {
  check_haar(coefficients, levels);
  FloatPlane out = coefficients;
  const double r = 1.0 / std::numbers::sqrt2;
  std::vector<double> line;
  for (int level = levels - 1; level >= 0; --level) {
    const int w = coefficients.width() >> level;
    const int h = coefficients.height() >> level;
    line.resize(static_cast<std::size_t>(std::max(w, h)));
    for (int x = 0; x < w; ++x) {
      for (int i = 0; i < h / 2; ++i) {
        const double lo = out.at(x, i);
        const double hi = out.at(x, h / 2 + i);
        line[2 * i] = (lo + hi) * r;
        line[2 * i + 1] = (lo - hi) * r;
      }
      for (int y = 0; y < h; ++y) out.at(x, y) = line[y];
    }
    for (int y = 0; y < h; ++y) {
      for (int i = 0; i < w / 2; ++i) {
        const double lo = out.at(i, y);
        const double hi = out.at(w / 2 + i, y);
        line[2 * i] = (lo + hi) * r;
        line[2 * i + 1] = (lo - hi) * r;
      }
      for (int x = 0; x < w; ++x) out.at(x, y) = line[x];
    }
  }
  return out;
}

}  // namespace simhaystack
