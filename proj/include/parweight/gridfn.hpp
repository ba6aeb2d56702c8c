#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "parweight/geometry.hpp"

namespace parweight {

/// Regular space-time grid: `cells[a]` cells on spatial axis a, `time_cells`
/// cells on the time axis, uniform spacing per axis. Cell values live at cell
/// centers (piecewise-constant model). Storage is row-major with time
/// outermost and the last spatial axis contiguous.
struct GridSpec {
  int n = 0;
  std::vector<int> cells;
  int time_cells = 0;
  SpaceTimeBox domain;

  void validate() const;

  double spatial_step(int axis) const {
    return (domain.spatial_hi[axis] - domain.spatial_lo[axis]) / cells[axis];
  }
  double time_step() const { return domain.time_extent() / time_cells; }
  double cell_volume() const;
  std::size_t total_cells() const;
  std::size_t spatial_cells() const;

  double center(int axis, int i) const {
    return domain.spatial_lo[axis] + (i + 0.5) * spatial_step(axis);
  }
  double time_center(int j) const {
    return domain.time_lo + (j + 0.5) * time_step();
  }

  std::size_t flatten(const std::vector<int>& ix, int it) const;
  /// Inverse of flatten: fills ix (size n) and it.
  void unflatten(std::size_t flat, std::vector<int>& ix, int& it) const;

  /// Half-open index ranges after snapping a box to cell boundaries.
  struct IndexBox {
    std::vector<int> lo, hi;  // spatial, per axis
    int t_lo = 0, t_hi = 0;

    bool empty() const;
    std::size_t count() const;
  };

  /// Snaps each box boundary to the nearest cell boundary. Ties (a boundary
  /// exactly halfway across a cell) shrink the box, which keeps snapping
  /// exactly mirror-symmetric under time reflection.
  IndexBox snap(const SpaceTimeBox& box) const;
  bool index_box_inside(const IndexBox& ib) const;
  /// Continuous box spanned by a snapped index range.
  SpaceTimeBox box_of(const IndexBox& ib) const;

  bool same_layout(const GridSpec& other) const;
};

class PrefixTable;

/// Dense sampled function on a grid. Immutable after construction; copies
/// share storage. Per-exponent prefix tables are built lazily and cached,
/// safe for concurrent readers.
class GridFunction {
 public:
  GridFunction(GridSpec spec, std::vector<double> values);

  static GridFunction constant(const GridSpec& spec, double c);
  /// Samples fn(x, t) at cell centers.
  static GridFunction sample(
      const GridSpec& spec,
      const std::function<double(const std::vector<double>&, double)>& fn);

  const GridSpec& spec() const;
  const std::vector<double>& values() const;
  double value(std::size_t flat) const { return values()[flat]; }
  std::size_t size() const { return values().size(); }

  double min_value() const;
  double max_value() const;

  /// Summed-area table of values^exponent (lazily built, cached).
  const PrefixTable& prefix(double exponent) const;

  /// Pointwise transform into a new grid function.
  GridFunction map(const std::function<double(double)>& fn) const;

 private:
  struct Payload;
  std::shared_ptr<Payload> p_;
};

/// (n+1)-dimensional summed-area table over values^exponent. Cumulative sums
/// are carried as compensated double-double pairs so box sums reconstructed
/// by corner inclusion-exclusion match direct summation far below the 1e-10
/// relative tolerance even on 2^24-cell grids.
class PrefixTable {
 public:
  PrefixTable(const GridSpec& spec, const std::vector<double>& values,
              double exponent);

  double exponent() const { return exponent_; }
  /// Sum of values^exponent over the cells of a snapped index box.
  double box_sum(const GridSpec::IndexBox& ib) const;

 private:
  double exponent_;
  int dims_;                       // n + 1
  std::vector<std::size_t> size_;  // per axis, +1 boundary plane
  std::vector<std::size_t> stride_;
  std::vector<double> hi_, lo_;    // double-double pairs
};

// ---- operations ----

/// Integral average (1/|B|) sum_{cells in B} f^exponent * cellVolume over the
/// snapped box; exact for the piecewise-constant model. Errors if the box
/// leaves the domain or snaps empty.
double box_average(const GridFunction& f, const SpaceTimeBox& box,
                   double exponent = 1.0);

/// Pointwise f^e. Requires f > 0 when e < 0.
GridFunction power_transform(const GridFunction& f, double e);

/// Lebesgue measure (weight == nullptr) or weighted measure of
/// {f > lambda} intersected with the snapped region.
double level_measure(const GridFunction& f, double lambda,
                     const SpaceTimeBox& region,
                     const GridFunction* weight = nullptr);

enum class CombineMode { min, max, product, quotient };

GridFunction combine(const GridFunction& f, const GridFunction& g,
                     CombineMode mode, double floor_eps = 1e-12);

/// Pointwise sum (utility beyond the spec's combine modes).
GridFunction gf_sum(const GridFunction& f, const GridFunction& g);

struct ClampResult {
  GridFunction values;
  std::size_t clamped_cells = 0;
  bool clamped() const { return clamped_cells > 0; }
};

/// Weight-role ingestion: clamps values below floor_eps, warning on stderr.
ClampResult clamp_weight(const GridFunction& f, double floor_eps = 1e-12,
                         bool warn = true);

/// Flips the time axis of the value table (the domain box is unchanged).
GridFunction reverse_time(const GridFunction& f);

/// Restriction to a snapped sub-box, yielding a grid on the sub-domain
/// with identical cell spacing.
GridFunction crop(const GridFunction& f, const GridSpec::IndexBox& ib);

/// Integral of f^exponent * weight over all cells (weight optional).
double integral(const GridFunction& f, double exponent = 1.0,
                const GridFunction* weight = nullptr);

}  // namespace parweight
