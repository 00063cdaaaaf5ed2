#include "sympres/obstruction.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <deque>
#include <functional>

namespace sympres {

namespace {

struct GridGeom {
  int dim;
  std::vector<int> n;        // vertices per axis
  std::vector<int> nc;       // cells per axis
  std::vector<double> lo;
  std::vector<double> step;
  std::vector<std::uint64_t> vstride;  // axis 0 fastest
  std::vector<std::uint64_t> cstride;
  std::uint64_t vertices = 1;
  std::uint64_t cells = 1;

  GridGeom(const Chart& chart, const std::vector<int>& grid)
      : dim(static_cast<int>(grid.size())), n(grid) {
    nc.resize(n.size());
    lo.resize(n.size());
    step.resize(n.size());
    vstride.assign(n.size(), 1);
    cstride.assign(n.size(), 1);
    for (int a = 0; a < dim; ++a) {
      if (n[a] < 2) throw ValidationError("locus grid needs >= 2 points per axis");
      nc[a] = n[a] - 1;
      lo[a] = chart.box[static_cast<std::size_t>(a)].lo;
      step[a] = chart.box[static_cast<std::size_t>(a)].length() / nc[a];
      if (a > 0) {
        vstride[a] = vstride[a - 1] * static_cast<std::uint64_t>(n[a - 1]);
        cstride[a] = cstride[a - 1] * static_cast<std::uint64_t>(nc[a - 1]);
      }
    }
    for (int a = 0; a < dim; ++a) {
      vertices *= static_cast<std::uint64_t>(n[a]);
      cells *= static_cast<std::uint64_t>(nc[a]);
    }
  }

  double coord(int axis, int idx) const { return lo[axis] + step[axis] * idx; }

  std::uint64_t cell_flat(std::span<const int> mi) const {
    std::uint64_t f = 0;
    for (int a = 0; a < dim; ++a) f += cstride[a] * static_cast<std::uint64_t>(mi[a]);
    return f;
  }
};

class Bits {
 public:
  explicit Bits(std::uint64_t count) : words_((count + 63) / 64, 0) {}
  void set(std::uint64_t i) { words_[i >> 6] |= 1ULL << (i & 63); }
  bool get(std::uint64_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  std::vector<std::uint64_t> take() && { return std::move(words_); }
  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  std::vector<std::uint64_t> words_;
};

// Evaluates the Pfaffian and its gradient at points of the chart box.
struct PfaffianField {
  int dim;
  std::optional<CompiledExpr> symbolic;
  std::vector<CompiledExpr> symbolic_grad;
  std::optional<CompiledPoisson> numeric;
  Eigen::MatrixXd scratch;

  explicit PfaffianField(const PoissonStructure& p) : dim(p.dim()) {
    if (dim % 2 != 0) {
      throw ValidationError("locus scan needs an even-dimensional chart");
    }
    if (dim <= 4) {
      Expr pf = pfaffian(p);
      symbolic.emplace(pf, p.chart().coords);
      for (const auto& coord : p.chart().coords) {
        symbolic_grad.emplace_back(differentiate(pf, coord), p.chart().coords);
      }
    } else {
      numeric.emplace(p);
    }
  }

  double value(std::span<const double> point) {
    if (symbolic) return (*symbolic)(point);
    numeric->matrix_at(point, scratch);
    return pfaffian_numeric(scratch);
  }

  double gradient_norm(std::span<const double> point) {
    if (symbolic) {
      double s = 0.0;
      for (const auto& g : symbolic_grad) {
        double v = g(point);
        s += v * v;
      }
      return std::sqrt(s);
    }
    // central differences at desk scale for dim >= 6
    std::vector<double> q(point.begin(), point.end());
    double s = 0.0;
    const double h = 1e-6;
    for (int a = 0; a < dim; ++a) {
      double keep = q[static_cast<std::size_t>(a)];
      q[static_cast<std::size_t>(a)] = keep + h;
      double f1 = value(q);
      q[static_cast<std::size_t>(a)] = keep - h;
      double f0 = value(q);
      q[static_cast<std::size_t>(a)] = keep;
      double d = (f1 - f0) / (2 * h);
      s += d * d;
    }
    return std::sqrt(s);
  }
};

}  // namespace

LocusScan scan_singular_locus(const PoissonStructure& p,
                              const std::vector<int>& grid,
                              double refine_tol) {
  if (static_cast<int>(grid.size()) != p.dim()) {
    throw ValidationError("locus grid needs one point count per coordinate");
  }
  GridGeom geom(p.chart(), grid);
  if (geom.vertices > 200'000'000ULL) {
    throw ValidationError("locus grid too large");
  }
  PfaffianField pf(p);
  const int d = geom.dim;

  LocusScan scan;
  scan.grid = grid;
  scan.cells_per_axis = geom.nc;
  scan.refine_tol = refine_tol;

  Bits near(geom.vertices);
  Bits negative(geom.vertices);
  std::vector<std::uint64_t> near_list;

  // vertex sweep
  {
    std::vector<int> mi(static_cast<std::size_t>(d), 0);
    std::vector<double> point(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) point[static_cast<std::size_t>(a)] = geom.coord(a, 0);
    for (std::uint64_t flat = 0; flat < geom.vertices; ++flat) {
      double v = pf.value(point);
      if (std::abs(v) <= refine_tol) {
        near.set(flat);
        near_list.push_back(flat);
      } else if (v < 0) {
        negative.set(flat);
      }
      int a = 0;
      while (a < d) {
        int& ia = mi[static_cast<std::size_t>(a)];
        if (++ia < geom.n[a]) {
          point[static_cast<std::size_t>(a)] = geom.coord(a, ia);
          break;
        }
        ia = 0;
        point[static_cast<std::size_t>(a)] = geom.coord(a, 0);
        ++a;
      }
    }
  }
  scan.near_zero_vertices = static_cast<std::int64_t>(near_list.size());

  Bits flagged(geom.cells);
  std::int64_t flagged_count = 0;
  auto flag_cell = [&](std::uint64_t flat) {
    if (!flagged.get(flat)) {
      flagged.set(flat);
      ++flagged_count;
    }
  };

  auto vertex_multi_index = [&](std::uint64_t flat, std::vector<int>& mi) {
    for (int a = 0; a < d; ++a) {
      mi[static_cast<std::size_t>(a)] = static_cast<int>(flat % static_cast<std::uint64_t>(geom.n[a]));
      flat /= static_cast<std::uint64_t>(geom.n[a]);
    }
  };

  // flag every cell incident to a vertex, with axes in `fixed_axis` pinned
  // to the lower cell only (used for edge flagging)
  std::vector<int> cmi(static_cast<std::size_t>(d));
  std::function<void(const std::vector<int>&, int, int)> flag_incident =
      [&](const std::vector<int>& vmi, int axis, int fixed_axis) {
        if (axis == d) {
          flag_cell(geom.cell_flat(cmi));
          return;
        }
        if (axis == fixed_axis) {
          if (vmi[static_cast<std::size_t>(axis)] < geom.nc[axis]) {
            cmi[static_cast<std::size_t>(axis)] = vmi[static_cast<std::size_t>(axis)];
            flag_incident(vmi, axis + 1, fixed_axis);
          }
          return;
        }
        for (int off = -1; off <= 0; ++off) {
          int c = vmi[static_cast<std::size_t>(axis)] + off;
          if (c < 0 || c >= geom.nc[axis]) continue;
          cmi[static_cast<std::size_t>(axis)] = c;
          flag_incident(vmi, axis + 1, fixed_axis);
        }
      };

  std::vector<std::vector<double>> zero_points;
  std::vector<int> vmi(static_cast<std::size_t>(d));

  for (std::uint64_t flat : near_list) {
    vertex_multi_index(flat, vmi);
    std::vector<double> point(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
      point[static_cast<std::size_t>(a)] = geom.coord(a, vmi[static_cast<std::size_t>(a)]);
    }
    zero_points.push_back(std::move(point));
    flag_incident(vmi, 0, -1);
  }

  // sign-change edges: bisect and flag the cells around the edge
  {
    std::vector<int> mi(static_cast<std::size_t>(d), 0);
    for (std::uint64_t flat = 0; flat < geom.vertices; ++flat) {
      bool interesting = false;
      for (int a = 0; a < d && !interesting; ++a) {
        if (mi[static_cast<std::size_t>(a)] + 1 < geom.n[a]) {
          std::uint64_t other = flat + geom.vstride[a];
          if (!near.get(flat) && !near.get(other) &&
              negative.get(flat) != negative.get(other)) {
            interesting = true;
          }
        }
      }
      if (interesting) {
        for (int a = 0; a < d; ++a) {
          if (mi[static_cast<std::size_t>(a)] + 1 >= geom.n[a]) continue;
          std::uint64_t other = flat + geom.vstride[a];
          if (near.get(flat) || near.get(other)) continue;
          if (negative.get(flat) == negative.get(other)) continue;
          std::vector<double> point(static_cast<std::size_t>(d));
          for (int b = 0; b < d; ++b) {
            point[static_cast<std::size_t>(b)] = geom.coord(b, mi[static_cast<std::size_t>(b)]);
          }
          double t0 = point[static_cast<std::size_t>(a)];
          double t1 = t0 + geom.step[a];
          bool lo_negative = negative.get(flat);
          double tm = t0;
          for (int it = 0; it < 60; ++it) {
            tm = 0.5 * (t0 + t1);
            point[static_cast<std::size_t>(a)] = tm;
            double fm = pf.value(point);
            if (std::abs(fm) <= refine_tol) break;
            if ((fm < 0) == lo_negative) {
              t0 = tm;
            } else {
              t1 = tm;
            }
          }
          point[static_cast<std::size_t>(a)] = tm;
          zero_points.push_back(point);
          ++scan.sign_change_points;
          flag_incident(mi, 0, a);
        }
      }
      int a = 0;
      while (a < d && ++mi[static_cast<std::size_t>(a)] == geom.n[a]) {
        mi[static_cast<std::size_t>(a)] = 0;
        ++a;
      }
      (void)a;
    }
  }

  // plateau cells: every corner of the cell is near zero; only flagged
  // cells can qualify
  Bits plateau(geom.cells);
  std::int64_t plateau_count = 0;
  {
    std::vector<int> ci(static_cast<std::size_t>(d), 0);
    for (std::uint64_t cflat = 0; cflat < geom.cells; ++cflat) {
      if (flagged.get(cflat)) {
        bool all_near = true;
        for (std::uint32_t corner = 0; corner < (1u << d) && all_near; ++corner) {
          std::uint64_t vflat = 0;
          for (int a = 0; a < d; ++a) {
            int idx = ci[static_cast<std::size_t>(a)] + ((corner >> a) & 1u);
            vflat += geom.vstride[a] * static_cast<std::uint64_t>(idx);
          }
          all_near = near.get(vflat);
        }
        if (all_near) {
          plateau.set(cflat);
          ++plateau_count;
        }
      }
      int a = 0;
      while (a < d && ++ci[static_cast<std::size_t>(a)] == geom.nc[a]) {
        ci[static_cast<std::size_t>(a)] = 0;
        ++a;
      }
      (void)a;
    }
  }

  // 2^dim block of adjacent plateau cells = full-dimensional degeneracy
  if (plateau_count >= (1 << d)) {
    std::vector<int> ci(static_cast<std::size_t>(d), 0);
    for (std::uint64_t cflat = 0; cflat < geom.cells && !scan.has_plateau_block;
         ++cflat) {
      if (plateau.get(cflat)) {
        bool in_range = true;
        for (int a = 0; a < d; ++a) {
          if (ci[static_cast<std::size_t>(a)] + 1 >= geom.nc[a]) {
            in_range = false;
            break;
          }
        }
        if (in_range) {
          bool block = true;
          for (std::uint32_t corner = 1; corner < (1u << d) && block; ++corner) {
            std::uint64_t other = cflat;
            for (int a = 0; a < d; ++a) {
              if ((corner >> a) & 1u) other += geom.cstride[a];
            }
            block = plateau.get(other);
          }
          scan.has_plateau_block = block;
        }
      }
      int a = 0;
      while (a < d && ++ci[static_cast<std::size_t>(a)] == geom.nc[a]) {
        ci[static_cast<std::size_t>(a)] = 0;
        ++a;
      }
      (void)a;
    }
  }

  scan.flagged_cell_count = flagged_count;
  scan.flagged_cells_bits = std::move(flagged).take();
  scan.plateau_cell_count = plateau_count;
  scan.plateau_cells_bits = std::move(plateau).take();

  scan.zero_points.resize(static_cast<Eigen::Index>(zero_points.size()), d);
  scan.gradient_norms.resize(zero_points.size());
  for (std::size_t i = 0; i < zero_points.size(); ++i) {
    for (int a = 0; a < d; ++a) {
      scan.zero_points(static_cast<Eigen::Index>(i), a) =
          zero_points[i][static_cast<std::size_t>(a)];
    }
    scan.gradient_norms[i] = pf.gradient_norm(zero_points[i]);
  }
  return scan;
}

std::string to_string(LocusClass c) {
  switch (c) {
    case LocusClass::Empty: return "empty";
    case LocusClass::IsolatedPoints: return "isolated_points";
    case LocusClass::CodimOneHypersurface: return "codim_one_hypersurface";
    case LocusClass::FatRegion: return "fat_region";
  }
  return "?";
}

LocusClassification classify_locus(const LocusScan& scan,
                                   const PoissonStructure& p,
                                   double grad_tol) {
  (void)p;
  LocusClassification out;
  const int d = scan.dim();

  for (Eigen::Index i = 0; i < scan.zero_points.rows() &&
                           out.example_points.size() < 5;
       ++i) {
    std::vector<double> pt(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) pt[static_cast<std::size_t>(a)] = scan.zero_points(i, a);
    out.example_points.push_back(std::move(pt));
  }
  if (!scan.gradient_norms.empty()) {
    std::int64_t above = 0;
    for (double g : scan.gradient_norms) {
      if (g > grad_tol) ++above;
    }
    out.gradient_quorum =
        static_cast<double>(above) / static_cast<double>(scan.gradient_norms.size());
  }

  if (scan.flagged_cell_count == 0) {
    out.locus_class = LocusClass::Empty;
    return out;
  }
  if (scan.has_plateau_block) {
    out.locus_class = LocusClass::FatRegion;
    return out;
  }

  // connected components of flagged cells under full (Moore) adjacency
  std::uint64_t cells = 1;
  std::vector<std::uint64_t> cstride(static_cast<std::size_t>(d), 1);
  for (int a = 0; a < d; ++a) {
    if (a > 0) {
      cstride[static_cast<std::size_t>(a)] =
          cstride[static_cast<std::size_t>(a - 1)] *
          static_cast<std::uint64_t>(scan.cells_per_axis[static_cast<std::size_t>(a - 1)]);
    }
    cells *= static_cast<std::uint64_t>(scan.cells_per_axis[static_cast<std::size_t>(a)]);
  }
  Bits visited(cells);
  auto cell_mi = [&](std::uint64_t flat, std::vector<int>& mi) {
    for (int a = 0; a < d; ++a) {
      mi[static_cast<std::size_t>(a)] =
          static_cast<int>(flat % static_cast<std::uint64_t>(scan.cells_per_axis[static_cast<std::size_t>(a)]));
      flat /= static_cast<std::uint64_t>(scan.cells_per_axis[static_cast<std::size_t>(a)]);
    }
  };

  std::vector<int> best_min, best_max;
  std::vector<int> mi(static_cast<std::size_t>(d));
  std::vector<int> off(static_cast<std::size_t>(d));
  for (std::uint64_t seed_cell = 0; seed_cell < cells; ++seed_cell) {
    if (!scan.cell_flagged(seed_cell) || visited.get(seed_cell)) continue;
    ++out.component_count;
    std::int64_t count = 0;
    std::vector<int> cmin(static_cast<std::size_t>(d), INT_MAX);
    std::vector<int> cmax(static_cast<std::size_t>(d), INT_MIN);
    std::deque<std::uint64_t> queue{seed_cell};
    visited.set(seed_cell);
    while (!queue.empty()) {
      std::uint64_t cur = queue.front();
      queue.pop_front();
      ++count;
      cell_mi(cur, mi);
      for (int a = 0; a < d; ++a) {
        cmin[static_cast<std::size_t>(a)] = std::min(cmin[static_cast<std::size_t>(a)], mi[static_cast<std::size_t>(a)]);
        cmax[static_cast<std::size_t>(a)] = std::max(cmax[static_cast<std::size_t>(a)], mi[static_cast<std::size_t>(a)]);
      }
      // enumerate Moore neighbors via an offset odometer in {-1,0,1}^d
      std::fill(off.begin(), off.end(), -1);
      while (true) {
        bool all_zero = true;
        bool in_range = true;
        std::uint64_t flat = 0;
        for (int a = 0; a < d; ++a) {
          int v = mi[static_cast<std::size_t>(a)] + off[static_cast<std::size_t>(a)];
          if (off[static_cast<std::size_t>(a)] != 0) all_zero = false;
          if (v < 0 || v >= scan.cells_per_axis[static_cast<std::size_t>(a)]) {
            in_range = false;
            break;
          }
          flat += cstride[static_cast<std::size_t>(a)] * static_cast<std::uint64_t>(v);
        }
        if (in_range && !all_zero && scan.cell_flagged(flat) && !visited.get(flat)) {
          visited.set(flat);
          queue.push_back(flat);
        }
        int a = 0;
        while (a < d && ++off[static_cast<std::size_t>(a)] == 2) {
          off[static_cast<std::size_t>(a)] = -1;
          ++a;
        }
        if (a == d) break;
      }
    }
    if (count > out.largest_component_cells) {
      out.largest_component_cells = count;
      best_min = cmin;
      best_max = cmax;
    }
  }

  out.axis_span.resize(static_cast<std::size_t>(d));
  out.transverse_thickness = INT_MAX;
  for (int a = 0; a < d; ++a) {
    int extent = best_max[static_cast<std::size_t>(a)] - best_min[static_cast<std::size_t>(a)] + 1;
    out.axis_span[static_cast<std::size_t>(a)] =
        static_cast<double>(extent) / scan.cells_per_axis[static_cast<std::size_t>(a)];
    if (out.axis_span[static_cast<std::size_t>(a)] >= 0.9) {
      ++out.spanning_axes;
    } else {
      out.transverse_thickness = std::min(out.transverse_thickness, extent);
    }
  }
  if (out.transverse_thickness == INT_MAX) out.transverse_thickness = 0;

  bool sheet = out.spanning_axes >= d - 1;
  bool supported = out.gradient_quorum >= 0.9 ||
                   (out.spanning_axes < d && out.transverse_thickness <= 3);
  if (sheet && supported) {
    out.locus_class = LocusClass::CodimOneHypersurface;
  } else {
    out.locus_class = LocusClass::IsolatedPoints;
  }
  return out;
}

std::vector<PointRank> rank_on_locus(const PoissonStructure& p,
                                     const LocusScan& scan) {
  std::vector<PointRank> out;
  out.reserve(static_cast<std::size_t>(scan.zero_points.rows()));
  for (Eigen::Index i = 0; i < scan.zero_points.rows(); ++i) {
    std::vector<double> pt(scan.zero_points.row(i).begin(),
                           scan.zero_points.row(i).end());
    out.push_back(rank_at(p, p.chart().to_env(pt)));
  }
  return out;
}

std::map<int, std::int64_t> rank_histogram_on_locus(const PoissonStructure& p,
                                                    const LocusScan& scan) {
  CompiledPoisson cp(p);
  std::map<int, std::int64_t> hist;
  std::vector<double> pt(static_cast<std::size_t>(p.dim()));
  for (Eigen::Index i = 0; i < scan.zero_points.rows(); ++i) {
    for (int a = 0; a < p.dim(); ++a) pt[static_cast<std::size_t>(a)] = scan.zero_points(i, a);
    ++hist[cp.rank_at(pt)];
  }
  return hist;
}

std::string to_string(ObstructionStatus s) {
  switch (s) {
    case ObstructionStatus::NotDenseSymplectic: return "not_dense_symplectic";
    case ObstructionStatus::NoProperResolution: return "no_proper_resolution";
    case ObstructionStatus::NoResolutionRankZero: return "no_resolution_rank_zero";
    case ObstructionStatus::Inconclusive: return "inconclusive";
    case ObstructionStatus::SymplecticOnBox: return "symplectic_on_box";
  }
  return "?";
}

ObstructionVerdict obstruction_verdict(const PoissonStructure& p,
                                       const ObstructionConfig& config) {
  std::vector<int> grid = config.grid;
  if (grid.empty()) grid.assign(static_cast<std::size_t>(p.dim()), 41);
  if (grid.size() == 1 && p.dim() > 1) {
    grid.assign(static_cast<std::size_t>(p.dim()), grid[0]);
  }
  LocusScan scan = scan_singular_locus(p, grid, config.refine_tol);
  LocusClassification classification = classify_locus(scan, p, config.grad_tol);
  return obstruction_verdict(p, scan, classification);
}

ObstructionVerdict obstruction_verdict(const PoissonStructure& p,
                                       const LocusScan& scan,
                                       const LocusClassification& classification) {
  ObstructionVerdict verdict;
  verdict.classification = classification;
  verdict.locus_points = scan.zero_points.rows();
  if (scan.zero_points.rows() > 0) {
    verdict.locus_rank_histogram = rank_histogram_on_locus(p, scan);
  }

  switch (verdict.classification.locus_class) {
    case LocusClass::FatRegion:
      verdict.status = ObstructionStatus::NotDenseSymplectic;
      verdict.cited_result =
          "a Poisson structure admitting a separable symplectic resolution is "
          "symplectic on an open dense subset; the scan found a "
          "full-dimensional region where the bivector degenerates, so no "
          "separable symplectic resolution exists";
      break;
    case LocusClass::CodimOneHypersurface: {
      bool all_rank_zero = !verdict.locus_rank_histogram.empty();
      for (const auto& [rank, count] : verdict.locus_rank_histogram) {
        if (rank != 0 && count > 0) all_rank_zero = false;
      }
      if (p.dim() >= 4 && all_rank_zero) {
        verdict.status = ObstructionStatus::NoResolutionRankZero;
        verdict.cited_result =
            "the bivector vanishes identically on a codimension-one "
            "submanifold of singular points in dimension >= 4; a separable "
            "symplectic resolution would force nonzero rank somewhere on "
            "that locus, so none exists";
      } else {
        verdict.status = ObstructionStatus::NoProperResolution;
        verdict.cited_result =
            "a Poisson structure symplectic on a dense open subset whose "
            "singular locus contains a codimension-one submanifold admits no "
            "proper symplectic resolution; for real-analytic or holomorphic "
            "structures no connected symplectic resolution exists; the "
            "smooth connected non-proper case remains open";
      }
      break;
    }
    case LocusClass::IsolatedPoints:
      verdict.status = ObstructionStatus::Inconclusive;
      verdict.cited_result =
          "isolated degeneracies of the bivector do not obstruct symplectic "
          "resolutions; structures of this shape may admit them";
      break;
    case LocusClass::Empty:
      verdict.status = ObstructionStatus::SymplecticOnBox;
      verdict.cited_result =
          "the bivector is invertible at every scanned point of the "
          "declared box";
      break;
  }
  return verdict;
}

OdeTrace characteristic_ode_trace(const Expr& f, double v0, double u0,
                                  double p_begin, double p_end, double step) {
  if (!(step > 0)) throw ValidationError("ode step must be positive");
  if (p_end < p_begin) throw ValidationError("ode span must have p_end >= p_begin");
  for (const auto& v : free_variables(f)) {
    if (v != "x" && v != "y") {
      throw ValidationError("characteristic ode expects f over (x, y); got '" + v + "'");
    }
  }
  const std::string vars[] = {"x", "y"};
  CompiledExpr cf(f, vars);

  OdeTrace trace;
  auto rhs = [&](double u) {
    double args[2] = {u, v0};
    return cf(args);
  };

  long long n_steps = std::llround((p_end - p_begin) / step);
  if (n_steps < 0) n_steps = 0;

  double u = u0;
  trace.p.push_back(p_begin);
  trace.u.push_back(u);
  trace.max_abs_u = std::abs(u);

  for (long long k = 1; k <= n_steps; ++k) {
    double pk = p_begin + static_cast<double>(k) * step;
    try {
      double k1 = rhs(u);
      double k2 = rhs(u + 0.5 * step * k1);
      double k3 = rhs(u + 0.5 * step * k2);
      double k4 = rhs(u + step * k3);
      u += step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    } catch (const DomainError&) {
      trace.domain_error = true;
      trace.truncated_at = trace.p.back();
      return trace;
    }
    trace.p.push_back(pk);
    trace.u.push_back(u);
    trace.max_abs_u = std::max(trace.max_abs_u, std::abs(u));
    if (!(std::abs(u) <= 1e9)) {
      trace.blew_up = true;
      trace.blowup_p = pk;
      return trace;
    }
  }
  return trace;
}

}  // namespace sympres
