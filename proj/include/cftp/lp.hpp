#pragma once

#include <optional>
#include <vector>

#include "cftp/common.hpp"
#include "cftp/rational.hpp"
#include "cftp/state.hpp"

namespace cftp {

// Halfspace intersection { x : A x <= b }. Rows may be empty, in which case
// the polytope is the whole space and only the clipping box constrains it.
struct Polytope {
  std::vector<std::vector<Rational>> A;
  std::vector<Rational> b;

  int dim() const { return A.empty() ? 0 : static_cast<int>(A.front().size()); }
  int rows() const { return static_cast<int>(A.size()); }
};

// Rational box { x : lo <= x <= hi }.
struct BoxQ {
  std::vector<Rational> lo, hi;

  static BoxQ from(const Interval& iv) {
    BoxQ box;
    box.lo.assign(iv.lo.c.begin(), iv.lo.c.end());
    box.hi.assign(iv.hi.c.begin(), iv.hi.c.end());
    return box;
  }

  static BoxQ from(const StateSpace& space) {
    BoxQ box;
    box.lo.assign(space.dim(), Rational(0));
    box.hi.assign(space.capacities().begin(), space.capacities().end());
    return box;
  }
};

struct LpOptimum {
  Rational value;
  std::vector<Rational> point;
};

namespace detail {

// Dense two-phase tableau simplex over exact rationals. Bland's smallest
// index rule picks the entering column and breaks leaving ties, so the
// method terminates on degenerate vertices. The box bounds make every
// program bounded, hence an unbounded pivot is an internal error.
class Simplex {
 public:
  Simplex(const Polytope& p, const BoxQ& box) : d_(static_cast<int>(box.lo.size())) {
    for (int i = 0; i < d_; ++i)
      if (box.lo[idx(i)] > box.hi[idx(i)]) {
        empty_box_ = true;
        return;
      }
    lo_ = box.lo;
    // Shifted variables y = x - lo with 0 <= y <= hi - lo, one slack row per
    // polytope row plus one per upper bound.
    const int h = p.rows();
    m_ = h + d_;
    rows_.assign(idx(m_), {});
    rhs_.assign(idx(m_), Rational(0));
    for (int r = 0; r < h; ++r) {
      rows_[idx(r)] = p.A[idx(r)];
      rows_[idx(r)].resize(idx(d_), Rational(0));
      Rational shift(0);
      for (int i = 0; i < d_; ++i) shift += p.A[idx(r)][idx(i)] * lo_[idx(i)];
      rhs_[idx(r)] = p.b[idx(r)] - shift;
    }
    for (int i = 0; i < d_; ++i) {
      std::vector<Rational> row(idx(d_), Rational(0));
      row[idx(i)] = 1;
      rows_[idx(h + i)] = std::move(row);
      rhs_[idx(h + i)] = box.hi[idx(i)] - box.lo[idx(i)];
    }
  }

  // Runs phase one on the first call; later calls reuse the feasible basis.
  bool feasible() {
    if (empty_box_) return false;
    if (!initialized_) {
      build_tableau();
      feasible_ = phase_one();
      initialized_ = true;
    }
    return feasible_;
  }

  // Maximizes c . x in original coordinates. Requires feasible().
  LpOptimum maximize(const std::vector<Rational>& c) {
    CFTP_CHECK(feasible(), "maximize called on an infeasible program");
    obj_.assign(idx(ncols_), Rational(0));
    obj_value_ = 0;
    for (int i = 0; i < d_; ++i) obj_[idx(i)] = c[idx(i)];
    reduce_objective();
    run(/*allow_artificials=*/false);
    LpOptimum out;
    out.point.assign(idx(d_), Rational(0));
    for (int r = 0; r < m_; ++r)
      if (basis_[idx(r)] < d_) out.point[idx(basis_[idx(r)])] = rhs_[idx(r)];
    out.value = Rational(0);
    for (int i = 0; i < d_; ++i) {
      out.point[idx(i)] += lo_[idx(i)];
      out.value += c[idx(i)] * out.point[idx(i)];
    }
    return out;
  }

 private:
  static std::size_t idx(int i) { return static_cast<std::size_t>(i); }

  void build_tableau() {
    // Columns: d structural, m slacks, then one artificial per row whose
    // shifted right hand side came out negative.
    ncols_ = d_ + m_;
    basis_.assign(idx(m_), -1);
    std::vector<int> artificial_rows;
    for (int r = 0; r < m_; ++r) {
      auto& row = rows_[idx(r)];
      row.resize(idx(d_ + m_), Rational(0));
      if (rhs_[idx(r)] < 0) {
        for (auto& a : row) a = -a;
        rhs_[idx(r)] = -rhs_[idx(r)];
        row[idx(d_ + r)] = -1;
        artificial_rows.push_back(r);
      } else {
        row[idx(d_ + r)] = 1;
        basis_[idx(r)] = d_ + r;
      }
    }
    first_artificial_ = ncols_;
    ncols_ += static_cast<int>(artificial_rows.size());
    for (auto& row : rows_) row.resize(idx(ncols_), Rational(0));
    int col = first_artificial_;
    for (int r : artificial_rows) {
      rows_[idx(r)][idx(col)] = 1;
      basis_[idx(r)] = col;
      ++col;
    }
  }

  bool phase_one() {
    if (first_artificial_ == ncols_) return true;  // slack basis already feasible
    // Maximize minus the sum of artificials; feasible iff the optimum is 0.
    obj_.assign(idx(ncols_), Rational(0));
    obj_value_ = 0;
    for (int j = first_artificial_; j < ncols_; ++j) obj_[idx(j)] = -1;
    reduce_objective();
    run(/*allow_artificials=*/true);
    if (obj_value_ != 0) return false;
    // Pivot any artificial still basic (necessarily at level zero) out, so
    // later objectives never touch artificial columns. A row with no other
    // nonzero entry is redundant; its artificial stays parked at zero.
    for (int r = 0; r < m_; ++r) {
      if (basis_[idx(r)] >= first_artificial_) {
        for (int j = 0; j < first_artificial_; ++j)
          if (rows_[idx(r)][idx(j)] != 0) {
            pivot(r, j);
            break;
          }
      }
    }
    return true;
  }

  // Rewrites the objective row in terms of the current nonbasic columns.
  void reduce_objective() {
    for (int r = 0; r < m_; ++r) {
      const Rational coef = obj_[idx(basis_[idx(r)])];
      if (coef == 0) continue;
      const auto& row = rows_[idx(r)];
      for (int j = 0; j < ncols_; ++j)
        if (row[idx(j)] != 0) obj_[idx(j)] -= coef * row[idx(j)];
      obj_value_ += coef * rhs_[idx(r)];
    }
  }

  void run(bool allow_artificials) {
    const int enter_limit = allow_artificials ? ncols_ : first_artificial_;
    for (;;) {
      int enter = -1;
      for (int j = 0; j < enter_limit; ++j)
        if (obj_[idx(j)] > 0) {
          enter = j;
          break;
        }
      if (enter < 0) return;
      int leave = -1;
      Rational best;
      for (int r = 0; r < m_; ++r) {
        const Rational& a = rows_[idx(r)][idx(enter)];
        if (a <= 0) continue;
        Rational ratio = rhs_[idx(r)] / a;
        if (leave < 0 || ratio < best ||
            (ratio == best && basis_[idx(r)] < basis_[idx(leave)])) {
          leave = r;
          best = ratio;
        }
      }
      CFTP_CHECK(leave >= 0, "unbounded linear program despite box constraints");
      pivot(leave, enter);
    }
  }

  void pivot(int r, int col) {
    auto& prow = rows_[idx(r)];
    const Rational p = prow[idx(col)];
    CFTP_CHECK(p != 0, "pivot on a zero element");
    if (p != 1) {
      for (auto& a : prow) a /= p;
      rhs_[idx(r)] /= p;
    }
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      auto& row = rows_[idx(i)];
      const Rational f = row[idx(col)];
      if (f == 0) continue;
      for (int j = 0; j < ncols_; ++j)
        if (prow[idx(j)] != 0) row[idx(j)] -= f * prow[idx(j)];
      rhs_[idx(i)] -= f * rhs_[idx(r)];
    }
    const Rational f = obj_[idx(col)];
    if (f != 0) {
      for (int j = 0; j < ncols_; ++j)
        if (prow[idx(j)] != 0) obj_[idx(j)] -= f * prow[idx(j)];
      obj_value_ += f * rhs_[idx(r)];
    }
    basis_[idx(r)] = col;
  }

  int d_ = 0;
  int m_ = 0;
  int ncols_ = 0;
  int first_artificial_ = 0;
  bool empty_box_ = false;
  bool initialized_ = false;
  bool feasible_ = false;
  std::vector<Rational> lo_;
  std::vector<std::vector<Rational>> rows_;
  std::vector<Rational> rhs_;
  std::vector<int> basis_;
  std::vector<Rational> obj_;
  Rational obj_value_;
};

}  // namespace detail

// Exact rational extrema of x_coord over the polytope clipped to the box.
struct LpExtremes {
  bool feasible = false;
  Rational min_value, max_value;
  std::vector<Rational> argmin, argmax;
};

inline LpExtremes lp_extremes(const Polytope& p, const BoxQ& box, int coord) {
  const int d = static_cast<int>(box.lo.size());
  CFTP_CHECK(coord >= 0 && coord < d, "coordinate index out of range");
  CFTP_CHECK(p.rows() == 0 || p.dim() == d, "polytope dimension does not match the box");
  detail::Simplex solver(p, box);
  LpExtremes out;
  if (!solver.feasible()) return out;
  out.feasible = true;
  std::vector<Rational> c(static_cast<std::size_t>(d), Rational(0));
  c[static_cast<std::size_t>(coord)] = -1;
  LpOptimum lo = solver.maximize(c);
  out.min_value = -lo.value;
  out.argmin = std::move(lo.point);
  c[static_cast<std::size_t>(coord)] = 1;
  LpOptimum hi = solver.maximize(c);
  out.max_value = hi.value;
  out.argmax = std::move(hi.point);
  return out;
}

inline bool lp_feasible(const Polytope& p, const BoxQ& box) {
  detail::Simplex solver(p, box);
  return solver.feasible();
}

// Integer interval [ceil(min), floor(max)] of x_coord over the clipped
// polytope, empty when the program is infeasible or the rounded bounds cross.
struct IntBounds {
  Coord lo, hi;
};

inline std::optional<IntBounds> integer_bounds(const Polytope& p, const BoxQ& box, int coord) {
  const LpExtremes ext = lp_extremes(p, box, coord);
  if (!ext.feasible) return std::nullopt;
  IntBounds b{ceil_to_int(ext.min_value), floor_to_int(ext.max_value)};
  if (b.lo > b.hi) return std::nullopt;
  return b;
}

// Per-coordinate rational bounds of the polytope clipped to the state box,
// with their integer roundings. These depend only on the polytope, so they
// are computed once per model and cached.
struct CoordBounds {
  std::vector<Rational> lo, hi;
  std::vector<Coord> lo_ceil, hi_floor;
};

inline CoordBounds precompute_coord_bounds(const Polytope& p, const StateSpace& space) {
  const BoxQ box = BoxQ::from(space);
  CoordBounds cb;
  const int d = space.dim();
  for (int i = 0; i < d; ++i) {
    const LpExtremes ext = lp_extremes(p, box, i);
    if (!ext.feasible)
      throw ConfigError("zone polytope is empty after clipping to the state space");
    cb.lo.push_back(ext.min_value);
    cb.hi.push_back(ext.max_value);
    cb.lo_ceil.push_back(ceil_to_int(ext.min_value));
    cb.hi_floor.push_back(floor_to_int(ext.max_value));
  }
  return cb;
}

}  // namespace cftp
