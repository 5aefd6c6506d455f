#pragma once

// Shared random-case generators for the property suites. All draws go
// through cftp::Rng so a fixed seed reproduces the same corpus everywhere.

#include <utility>
#include <vector>

#include "cftp/ashe.hpp"
#include "cftp/rng.hpp"
#include "cftp/state.hpp"
#include "cftp/zones.hpp"

namespace fuzz {

using namespace cftp;

inline Coord draw_coord(Rng& rng, Coord lo, Coord hi) {
  return lo + static_cast<Coord>(rng.below(static_cast<std::uint64_t>(hi - lo) + 1));
}

inline StateSpace draw_space(Rng& rng, int max_dim = 3, Coord max_cap = 6) {
  const int d = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_dim)));
  std::vector<Coord> caps;
  for (int i = 0; i < d; ++i) caps.push_back(draw_coord(rng, 0, max_cap));
  return StateSpace(caps);
}

inline State draw_state(Rng& rng, const StateSpace& space) {
  State x{std::vector<Coord>(static_cast<std::size_t>(space.dim()))};
  for (int i = 0; i < space.dim(); ++i)
    x.c[static_cast<std::size_t>(i)] = draw_coord(rng, 0, space.capacity(i));
  return x;
}

inline Interval draw_interval(Rng& rng, const StateSpace& space) {
  State a = draw_state(rng, space), b = draw_state(rng, space);
  return Interval{meet(a, b), join(a, b)};
}

// Shift vectors up to +-4 with a bias toward small entries; arbitrary
// blocking pairs, including pairs whose source never moves.
inline Ashe draw_ashe(Rng& rng, const StateSpace& space, Coord max_shift = 4) {
  const int d = space.dim();
  std::vector<Coord> v(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const Coord mag = draw_coord(rng, 0, max_shift);
    const Coord small = draw_coord(rng, 0, 1);
    Coord m = small ? std::min<Coord>(mag, 1) : mag;
    v[static_cast<std::size_t>(i)] = rng.below(2) ? m : -m;
  }
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (rng.below(100) < 35) pairs.emplace_back(i, j);
  return Ashe(std::move(v), std::move(pairs));
}

// Integer normals with half-integer offsets, so no hyperplane can meet an
// integer point.
inline Hyperplane draw_plane(Rng& rng, const StateSpace& space) {
  const int d = space.dim();
  std::vector<Rational> a(static_cast<std::size_t>(d));
  bool zero = true;
  for (auto& ai : a) {
    ai = Rational(draw_coord(rng, -2, 2));
    zero = zero && ai == 0;
  }
  if (zero) a[rng.below(static_cast<std::uint64_t>(d))] = 1;
  return Hyperplane{std::move(a), Rational(2 * draw_coord(rng, -8, 16) + 1, 2)};
}

// Random piecewise event whose zones partition the box by construction:
// either the full sign cells of the planes, or a decision list that fixes
// one plane per zone.
inline PiecewiseEvent draw_piecewise(Rng& rng, const StateSpace& space, Coord max_shift = 3) {
  for (;;) {
    const int h = 1 + static_cast<int>(rng.below(2));
    std::vector<Hyperplane> planes;
    for (int p = 0; p < h; ++p) planes.push_back(draw_plane(rng, space));
    std::vector<ZoneDef> zones;
    if (rng.below(2)) {
      for (int cell = 0; cell < (1 << h); ++cell) {
        std::vector<Side> signs;
        for (int p = 0; p < h; ++p)
          signs.push_back((cell >> p) & 1 ? Side::pos : Side::neg);
        zones.push_back({std::move(signs), draw_ashe(rng, space, max_shift)});
      }
    } else {
      for (int p = 0; p < h; ++p) {
        std::vector<Side> signs(static_cast<std::size_t>(h), Side::any);
        for (int q = 0; q < p; ++q)
          signs[static_cast<std::size_t>(q)] = Side::pos;
        signs[static_cast<std::size_t>(p)] = Side::neg;
        zones.push_back({std::move(signs), draw_ashe(rng, space, max_shift)});
      }
      std::vector<Side> last(static_cast<std::size_t>(h), Side::pos);
      zones.push_back({std::move(last), draw_ashe(rng, space, max_shift)});
    }
    try {
      return PiecewiseEvent(space, std::move(planes), std::move(zones));
    } catch (const ConfigError&) {
      // a degenerate draw (every zone empty, say); redraw
    }
  }
}

}  // namespace fuzz
