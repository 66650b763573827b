#pragma once

// Disk families D_m = {B} u {B_w : w in P_m}: the base disk |z| <= c4 and one
// disk of radius c4 around w mu(w) per arc point, plus a disjointness
// certificate computed from the centres.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "hclab/error.hpp"
#include "hclab/parallel.hpp"
#include "hclab/partition.hpp"

namespace hclab {

/// Uniform grid over a point set. Any two points at distance <= cell lie in
/// the same or in adjacent cells.
class grid_index {
 public:
  grid_index() = default;

  grid_index(const std::vector<cplx>& points, double cell) : cell_(cell) {
    if (!(cell > 0.0) || !std::isfinite(cell)) throw error(errc::internal_inconsistency, "grid cell must be positive");
    entries_.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      entries_[i] = {key_of(points[i]), static_cast<std::uint32_t>(i)};
    std::sort(entries_.begin(), entries_.end());
  }

  double cell() const { return cell_; }
  std::size_t size() const { return entries_.size(); }

  struct entry {
    std::uint64_t key;
    std::uint32_t index;
    friend auto operator<=>(const entry&, const entry&) = default;
  };
  const std::vector<entry>& entries() const { return entries_; }

  std::int64_t coord(double x) const {
    const double c = std::floor(x / cell_);
    return static_cast<std::int64_t>(std::clamp(c, -2.0e9, 2.0e9));
  }
  /// Cell key; the bias keeps key order equal to (cx, cy) order.
  static std::uint64_t pack(std::int64_t cx, std::int64_t cy) {
    constexpr std::int64_t bias = std::int64_t{1} << 31;
    return (static_cast<std::uint64_t>(cx + bias) << 32) | static_cast<std::uint64_t>(cy + bias);
  }
  std::uint64_t key_of(cplx z) const { return pack(coord(z.real()), coord(z.imag())); }

  /// Positions [lo, hi) in entries() of one cell.
  std::pair<std::size_t, std::size_t> cell_range(std::uint64_t key) const {
    auto lo = std::lower_bound(entries_.begin(), entries_.end(), entry{key, 0});
    auto hi = std::lower_bound(lo, entries_.end(), entry{key + 1, 0});
    if (key == std::numeric_limits<std::uint64_t>::max()) hi = entries_.end();
    return {static_cast<std::size_t>(lo - entries_.begin()), static_cast<std::size_t>(hi - entries_.begin())};
  }

  /// Calls f(index) for every point in the 3x3 block of cells around z.
  template <typename F>
  void for_each_near(cplx z, F&& f) const {
    const std::int64_t cx = coord(z.real()), cy = coord(z.imag());
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto [lo, hi] = cell_range(pack(cx + dx, cy + dy));
        for (std::size_t p = lo; p < hi; ++p) f(entries_[p].index);
      }
  }

 private:
  double cell_ = 1.0;
  std::vector<entry> entries_;
};

struct disk_family {
  struct translated {
    cplx center;
    double theta;
    std::uint32_t n;
    std::uint32_t j;
  };

  std::size_t m = 0;
  double radius = 0.0;
  std::vector<translated> disks;      // ordered by n
  std::vector<double> mu_modulus;     // |mu_{m+j}| per residue j
  construction_params params;

  /// Disk 0 is the base disk, disk i + 1 is disks[i].
  std::size_t size() const { return disks.size() + 1; }
  cplx center(std::size_t i) const { return i == 0 ? cplx{} : disks[i - 1].center; }

  std::vector<cplx> centers() const {
    std::vector<cplx> out(size());
    for (std::size_t i = 0; i < disks.size(); ++i) out[i + 1] = disks[i].center;
    return out;
  }
};

namespace detail {

inline void reject_duplicate_centers(const disk_family& fam) {
  const auto pts = fam.centers();
  const grid_index grid(pts, 2.0 * fam.radius);
  const auto& e = grid.entries();
  for (std::size_t lo = 0; lo < e.size();) {
    std::size_t hi = lo + 1;
    while (hi < e.size() && e[hi].key == e[lo].key) ++hi;
    for (std::size_t a = lo; a < hi; ++a)
      for (std::size_t b = a + 1; b < hi; ++b)
        if (pts[e[a].index] == pts[e[b].index])
          throw error(errc::construction_violation,
                      "duplicate disk centre for disks " + std::to_string(e[a].index) + " and " +
                          std::to_string(e[b].index));
    lo = hi;
  }
}

}  // namespace detail

/// Family from explicit arc points. Points are reordered by n; mu moduli per
/// residue are read from the points.
inline disk_family build_disks(std::vector<arc_point> points, const construction_params& params,
                               std::size_t m = 0) {
  std::sort(points.begin(), points.end(), [](const arc_point& a, const arc_point& b) { return a.n < b.n; });
  disk_family fam;
  fam.m = m;
  fam.radius = params.c4;
  fam.params = params;
  fam.disks.reserve(points.size());
  for (const auto& p : points) {
    if (p.n > std::numeric_limits<std::uint32_t>::max())
      throw error(errc::parameter, "partition index exceeds 32-bit disk numbering");
    if (fam.mu_modulus.size() <= p.j) fam.mu_modulus.resize(p.j + 1, 0.0);
    fam.mu_modulus[p.j] = std::abs(p.mu);
    double theta = std::arg(p.w) / (2.0 * std::numbers::pi);
    theta -= std::floor(theta - (params.theta0 - 1e-12));
    fam.disks.push_back({p.w * p.mu, theta, static_cast<std::uint32_t>(p.n), static_cast<std::uint32_t>(p.j)});
  }
  detail::reject_duplicate_centers(fam);
  return fam;
}

/// Family straight from a partition, without materialising arc points.
inline disk_family build_disks(const partition& part, const construction_params& params) {
  if (part.size() > std::numeric_limits<std::uint32_t>::max())
    throw error(errc::parameter, "partition too large for 32-bit disk numbering");
  disk_family fam;
  fam.m = part.m;
  fam.radius = params.c4;
  fam.params = params;
  fam.mu_modulus = part.block_mu_modulus;
  fam.disks.resize(part.size());
  parallel_for(part.size(), [&](std::size_t n) {
    const std::size_t j = n % part.block_len;
    fam.disks[n] = {arc_position(params.r0, part.thetas[n]) * part.block_mu[j], part.thetas[n],
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(j)};
  }, 4096);
  detail::reject_duplicate_centers(fam);
  return fam;
}

// ---------------------------------------------------------------------------
// Disjointness

enum class disjoint_method { automatic, exhaustive, grid };

inline const char* to_string(disjoint_method m) {
  switch (m) {
    case disjoint_method::automatic: return "automatic";
    case disjoint_method::exhaustive: return "exhaustive";
    case disjoint_method::grid: return "grid";
  }
  return "?";
}

struct disjointness_certificate {
  std::size_t m = 0;
  std::size_t disks = 0;
  double radius = 0.0;
  double min_distance = std::numeric_limits<double>::infinity();
  double min_gap = std::numeric_limits<double>::infinity();  // min_distance - 2 c4
  std::array<std::size_t, 2> witness{0, 0};
  bool pass = true;
  disjoint_method method = disjoint_method::automatic;
  std::size_t pairs_examined = 0;

  // Diagnostics re-deriving the analytic bounds.
  double base_min_modulus = std::numeric_limits<double>::infinity();  // min |w mu(w)|
  double same_mu_min_distance = std::numeric_limits<double>::infinity();
  double same_mu_bound = 0.0;  // 4 r0 c2 c3 (= 4 c4)
  double same_mu_min_theta_gap = std::numeric_limits<double>::infinity();
  double cross_mu_lower = std::numeric_limits<double>::infinity();  // from modulus bands
  double cross_mu_bound = 0.0;  // r0 c1
};

namespace detail {

struct pair_min {
  double d2 = std::numeric_limits<double>::infinity();
  std::size_t a = 0, b = 0;
  std::size_t examined = 0;

  void offer(double dist2, std::size_t i, std::size_t k) {
    ++examined;
    if (i > k) std::swap(i, k);
    if (dist2 < d2 || (dist2 == d2 && std::pair{i, k} < std::pair{a, b})) {
      d2 = dist2;
      a = i;
      b = k;
    }
  }
  void merge(const pair_min& o) {
    const std::size_t e = examined + o.examined;
    if (o.d2 < d2 || (o.d2 == d2 && std::pair{o.a, o.b} < std::pair{a, b})) *this = o;
    examined = e;
  }
};

inline double dist2(cplx a, cplx b) {
  const double dx = a.real() - b.real(), dy = a.imag() - b.imag();
  return dx * dx + dy * dy;
}

template <typename Body>
pair_min reduce_pairs(std::size_t count, Body&& body) {
  const std::size_t chunks = chunk_count(count, 2048);
  std::vector<pair_min> partial(chunks);
  run_chunks(count, chunks, [&](std::size_t lo, std::size_t hi, std::size_t c) {
    for (std::size_t i = lo; i < hi; ++i) body(i, partial[c]);
  });
  pair_min out;
  for (const auto& p : partial) out.merge(p);
  return out;
}

inline pair_min closest_exhaustive(const std::vector<cplx>& pts) {
  return reduce_pairs(pts.size(), [&](std::size_t i, pair_min& best) {
    for (std::size_t k = i + 1; k < pts.size(); ++k) best.offer(dist2(pts[i], pts[k]), i, k);
  });
}

/// Exact closest pair given an upper bound `bound` on it (the distance of
/// some actual pair): every pair at distance <= bound shares or neighbours a
/// grid cell of that size, so all other pairs can be skipped. Cells are
/// swept in key order; each cell is paired with itself, its upper neighbour
/// and the three cells of the next column, found by a forward-only cursor.
inline pair_min closest_grid(const std::vector<cplx>& pts, double bound) {
  if (pts.size() < 2) return {};
  const grid_index grid(pts, bound);
  const auto& e = grid.entries();
  constexpr std::int64_t bias = std::int64_t{1} << 31;
  auto cell_x = [](std::uint64_t key) { return static_cast<std::int64_t>(key >> 32) - bias; };
  auto cell_y = [](std::uint64_t key) { return static_cast<std::int64_t>(key & 0xffffffffu) - bias; };

  const std::size_t chunks = chunk_count(e.size(), 1u << 16);
  std::vector<pair_min> partial(chunks);
  run_chunks(e.size(), chunks, [&](std::size_t lo, std::size_t hi, std::size_t c) {
    pair_min& best = partial[c];
    std::size_t p = lo;
    while (p > 0 && p < e.size() && e[p].key == e[p - 1].key) ++p;  // start at a cell boundary
    std::size_t cursor = p;
    while (p < hi && p < e.size()) {
      const std::uint64_t key = e[p].key;
      std::size_t end = p + 1;
      while (end < e.size() && e[end].key == key) ++end;
      const std::int64_t cx = cell_x(key), cy = cell_y(key);
      auto pair_range = [&](std::size_t a_lo, std::size_t a_hi, std::size_t b_lo, std::size_t b_hi, bool same) {
        for (std::size_t a = a_lo; a < a_hi; ++a)
          for (std::size_t b = same ? a + 1 : b_lo; b < b_hi; ++b)
            best.offer(dist2(pts[e[a].index], pts[e[b].index]), e[a].index, e[b].index);
      };
      pair_range(p, end, p, end, true);
      std::size_t up = end;
      const std::uint64_t up_key = grid_index::pack(cx, cy + 1);
      while (up < e.size() && e[up].key == up_key) ++up;
      pair_range(p, end, end, up, false);
      const std::uint64_t first = grid_index::pack(cx + 1, cy - 1), last = grid_index::pack(cx + 1, cy + 1);
      while (cursor < e.size() && e[cursor].key < first) ++cursor;
      std::size_t q = cursor;
      while (q < e.size() && e[q].key <= last) ++q;
      pair_range(p, end, cursor, q, false);
      p = end;
    }
  });
  pair_min out;
  for (const auto& part : partial) out.merge(part);
  return out;
}

}  // namespace detail

/// Families up to this size are checked pair by pair under `automatic`.
inline constexpr std::size_t exhaustive_disk_limit = 4096;

inline disjointness_certificate check_disjoint(const disk_family& fam,
                                               disjoint_method method = disjoint_method::automatic) {
  disjointness_certificate cert;
  cert.m = fam.m;
  cert.disks = fam.size();
  cert.radius = fam.radius;
  cert.same_mu_bound = 4.0 * fam.params.r0 * fam.params.c2 * fam.params.c3;
  cert.cross_mu_bound = fam.params.r0 * fam.params.c1;

  // Same-mu neighbours in angle are consecutive members of a residue class.
  const std::size_t J = fam.mu_modulus.size();
  std::vector<std::size_t> last(J, std::numeric_limits<std::size_t>::max());
  std::vector<double> band_lo(J, std::numeric_limits<double>::infinity());
  std::vector<double> band_hi(J, -std::numeric_limits<double>::infinity());
  double upper = std::numeric_limits<double>::infinity();
  std::array<std::size_t, 2> upper_pair{0, 0};
  for (std::size_t i = 0; i < fam.disks.size(); ++i) {
    const auto& d = fam.disks[i];
    const double r = std::abs(d.center);
    if (r < cert.base_min_modulus) cert.base_min_modulus = r;
    if (r < upper) {
      upper = r;
      upper_pair = {0, i + 1};
    }
    band_lo[d.j] = std::min(band_lo[d.j], r);
    band_hi[d.j] = std::max(band_hi[d.j], r);
    if (last[d.j] != std::numeric_limits<std::size_t>::max()) {
      const auto& prev = fam.disks[last[d.j]];
      const double dist = std::abs(d.center - prev.center);
      cert.same_mu_min_distance = std::min(cert.same_mu_min_distance, dist);
      cert.same_mu_min_theta_gap = std::min(cert.same_mu_min_theta_gap, d.theta - prev.theta);
      if (dist < upper) {
        upper = dist;
        upper_pair = {last[d.j] + 1, i + 1};
      }
    }
    last[d.j] = i;
  }
  // Residue classes sorted by modulus; distinct classes are separated by at
  // least the gap between their modulus bands.
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < J; ++j)
    if (band_hi[j] >= band_lo[j]) order.push_back(j);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return band_lo[a] < band_lo[b]; });
  for (std::size_t t = 1; t < order.size(); ++t)
    cert.cross_mu_lower = std::min(cert.cross_mu_lower, band_lo[order[t]] - band_hi[order[t - 1]]);

  if (fam.disks.empty()) {
    cert.method = disjoint_method::exhaustive;
    return cert;  // a single disk: no pairs
  }

  if (method == disjoint_method::automatic)
    method = fam.size() <= exhaustive_disk_limit ? disjoint_method::exhaustive : disjoint_method::grid;
  cert.method = method;
  const auto pts = fam.centers();
  detail::pair_min best;
  if (method == disjoint_method::exhaustive) {
    best = detail::closest_exhaustive(pts);
  } else {
    // A zero bound means coincident centres, which are already a witness.
    best = upper > 0.0 ? detail::closest_grid(pts, upper) : detail::pair_min{0.0, upper_pair[0], upper_pair[1], 1};
  }
  cert.pairs_examined = best.examined;
  cert.min_distance = std::sqrt(best.d2);
  cert.witness = {best.a, best.b};
  cert.min_gap = cert.min_distance - 2.0 * fam.radius;
  cert.pass = cert.min_gap > 0.0;
  return cert;
}

}  // namespace hclab
