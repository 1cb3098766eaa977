#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <limits>

#include "simhaystack/blockhash.hpp"
#include "simhaystack/perturb.hpp"
#include "simhaystack/roc.hpp"
#include "simhaystack/transforms.hpp"
#include "support.hpp"

namespace simhaystack::testing {

namespace {

FloatPlane random_plane(Gen& gen, int w, int h) {
  std::uniform_real_distribution<double> d(-100.0, 100.0);
  FloatPlane p(w, h);
  for (auto& v : p.values()) v = d(gen);
  return p;
}

double max_abs(const FloatPlane& p) {
  double m = 0;
  for (double v : p.values()) m = std::max(m, std::abs(v));
  return m;
}

double energy(const FloatPlane& p) {
  double e = 0;
  for (double v : p.values()) e += v * v;
  return e;
}

template <typename Transform>
bool linear_on(Gen& gen, const FloatPlane& x, const FloatPlane& y, Transform&& t, std::string& why) {
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  const double a = coef(gen);
  const double b = coef(gen);
  FloatPlane mix(x.width(), x.height());
  for (std::size_t i = 0; i < mix.values().size(); ++i) mix.values()[i] = a * x.values()[i] + b * y.values()[i];
  const FloatPlane lhs = t(mix);
  const FloatPlane tx = t(x);
  const FloatPlane ty = t(y);
  const double scale = 1.0 + max_abs(lhs);
  for (std::size_t i = 0; i < lhs.values().size(); ++i) {
    const double rhs = a * tx.values()[i] + b * ty.values()[i];
    if (std::abs(lhs.values()[i] - rhs) > 1e-9 * scale) {
      why = "coefficient " + std::to_string(i) + " off by " + std::to_string(lhs.values()[i] - rhs);
      return false;
    }
  }
  return true;
}

}  // namespace

PropertyReport hamming_metric_axioms(std::uint64_t seed, int cases) {
  PropertyReport r{"hamming metric axioms"};
  Gen gen(seed);
  std::uniform_int_distribution<std::size_t> len(1, 300);
  for (int c = 0; c < cases; ++c, ++r.cases) {
    const std::size_t n = len(gen);
    const BitHash a = random_hash(gen, n);
    BitHash b = random_hash(gen, n);
    const BitHash z = random_hash(gen, n);
    // some pairs share most bits so identity and small distances get exercised
    if (c % 4 == 0) b = a;
    const std::size_t ab = hamming(a, b), ba = hamming(b, a), az = hamming(a, z), zb = hamming(z, b);
    const std::string at = "case " + std::to_string(c) + " (length " + std::to_string(n) + ")";
    if (ab != ba) r.fail(at + ": not symmetric");
    if ((ab == 0) != (a == b)) r.fail(at + ": identity of indiscernibles");
    if (ab > az + zb) r.fail(at + ": triangle inequality");
    if (ab != naive_hamming(a, b)) r.fail(at + ": disagrees with bitwise count");
    if (hamming(a, a) != 0) r.fail(at + ": d(a, a) != 0");
    if (ber(a, b) != static_cast<double>(ab) / static_cast<double>(n)) r.fail(at + ": ber != hamming / length");
  }
  return r;
}

PropertyReport transform_linearity(std::uint64_t seed, int cases) {
  PropertyReport r{"DCT/Haar linearity"};
  Gen gen(seed);
  std::uniform_int_distribution<int> side(2, 24);
  std::uniform_int_distribution<int> level(1, 3);
  for (int c = 0; c < cases; ++c, ++r.cases) {
    std::string why;
    const int n = side(gen);
    const FloatPlane x = random_plane(gen, n, n);
    const FloatPlane y = random_plane(gen, n, n);
    if (!linear_on(gen, x, y, [](const FloatPlane& p) { return dct2(p); }, why)) {
      r.fail("dct2, case " + std::to_string(c) + ": " + why);
    }
    const int levels = level(gen);
    const int unit = 1 << levels;
    std::uniform_int_distribution<int> blocks(1, 6);
    const int w = unit * blocks(gen);
    const int h = unit * blocks(gen);
    const FloatPlane u = random_plane(gen, w, h);
    const FloatPlane v = random_plane(gen, w, h);
    if (!linear_on(gen, u, v, [&](const FloatPlane& p) { return haar_dwt(p, levels); }, why)) {
      r.fail("haar, case " + std::to_string(c) + ": " + why);
    }
  }
  return r;
}

PropertyReport transform_parseval(std::uint64_t seed, int cases) {
  PropertyReport r{"DCT/Haar Parseval"};
  Gen gen(seed);
  std::uniform_int_distribution<int> side(2, 32);
  std::uniform_int_distribution<int> level(1, 4);
  for (int c = 0; c < cases; ++c, ++r.cases) {
    const int n = side(gen);
    const FloatPlane x = random_plane(gen, n, n);
    const double e = energy(x);
    if (std::abs(energy(dct2(x)) - e) > 1e-6 * e) r.fail("dct2 case " + std::to_string(c));
    const int levels = level(gen);
    const int unit = 1 << levels;
    std::uniform_int_distribution<int> blocks(1, 4);
    const FloatPlane y = random_plane(gen, unit * blocks(gen), unit * blocks(gen));
    const double ey = energy(y);
    if (std::abs(energy(haar_dwt(y, levels)) - ey) > 1e-6 * ey) r.fail("haar case " + std::to_string(c));
  }
  return r;
}

PropertyReport dhash_monotone_remap(std::uint64_t seed, int cases) {
  PropertyReport r{"dhash monotone-remap invariance"};
  Gen gen(seed);
  std::uniform_int_distribution<int> sides(2, 16);
  std::uniform_int_distribution<int> spans(1, 255);
  for (int c = 0; c < cases; ++c, ++r.cases) {
    const int s = sides(gen);
    const int span = spans(gen);
    std::uniform_int_distribution<int> base(0, 255 - span);
    const int lo = base(gen);
    // gray and already (s+1) x s, so the hash sees the pixels unresampled
    const RasterImage img = random_image(gen, s + 1, s, 1, lo, lo + span);
    // strictly increasing map on [lo, lo + span]: span + 1 distinct sorted levels
    std::vector<int> levels(256);
    std::iota(levels.begin(), levels.end(), 0);
    std::vector<int> picked;
    std::sample(levels.begin(), levels.end(), std::back_inserter(picked), span + 1, gen);
    std::vector<std::uint8_t> mapped(img.samples().size());
    for (std::size_t i = 0; i < mapped.size(); ++i) {
      mapped[i] = static_cast<std::uint8_t>(picked[static_cast<std::size_t>(img.samples()[i] - lo)]);
    }
    const RasterImage remapped(img.width(), img.height(), 1, std::move(mapped));
    if (!(dhash(img, s * s) == dhash(remapped, s * s))) r.fail("case " + std::to_string(c) + ": bits changed");
  }
  return r;
}

PropertyReport enhancement_identity(std::uint64_t seed, int cases) {
  PropertyReport r{"enhancement f=1 identity"};
  Gen gen(seed);
  std::uniform_int_distribution<int> size(1, 40);
  std::uniform_int_distribution<int> chans(0, 1);
  const PerturbationFamily families[] = {PerturbationFamily::Color, PerturbationFamily::Sharpness,
                                         PerturbationFamily::Contrast, PerturbationFamily::Brightness};
  PerturbOptions permissive;
  permissive.permissive = true;
  for (int c = 0; c < cases; ++c, ++r.cases) {
    const RasterImage img = random_image(gen, size(gen), size(gen), chans(gen) ? 3 : 1);
    for (auto f : families) {
      if (!(enhance(img, f, 1.0) == img) || !(apply({f, 1.0, std::nullopt}, img, permissive) == img)) {
        r.fail(std::string(to_string(f)) + " case " + std::to_string(c) + " is not the identity");
      }
    }
  }
  return r;
}

PropertyReport roc_monotonicity(std::uint64_t seed, int cases) {
  PropertyReport r{"ROC monotonicity"};
  Gen gen(seed);
  std::uniform_int_distribution<int> count(1, 120);
  std::uniform_int_distribution<int> levels(1, 40);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution rare(0.1);
  for (int c = 0; c < cases; ++c, ++r.cases) {
    const int n = count(gen);
    const int grid = levels(gen);
    std::uniform_int_distribution<int> level(0, grid);
    std::vector<ScoredQuery> q(static_cast<std::size_t>(n));
    for (auto& s : q) {
      s.positive = coin(gen);
      s.correct = s.positive && coin(gen);
      // coarse distances force ties; a few queries never match
      s.distance = rare(gen) ? std::numeric_limits<double>::infinity() : static_cast<double>(level(gen)) / grid;
    }
    const std::string at = "case " + std::to_string(c);
    for (bool exact : {true, false}) {
      const auto t = exact ? exact_thresholds(q) : grid_thresholds(q, 2 + grid);
      const RocCurve curve = build_roc(q, t);
      for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const auto& p = curve.points[i];
        if (p.fpr < 0 || p.fpr > 1 || p.recall < 0 || p.recall > 1) r.fail(at + ": point outside the unit square");
        if (i > 0) {
          const auto& prev = curve.points[i - 1];
          if (p.threshold < prev.threshold || p.fpr < prev.fpr || p.recall < prev.recall) {
            r.fail(at + ": curve decreases at point " + std::to_string(i));
          }
        }
      }
      if (!(curve.auc >= 0 && curve.auc <= 1)) r.fail(at + ": auc outside [0, 1]");
    }
  }
  return r;
}

}  // namespace simhaystack::testing
