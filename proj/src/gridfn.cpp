#include "parweight/gridfn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <map>
#include <mutex>

#include "parweight/error.hpp"

namespace parweight {

namespace {

// Error-free transformation: s + err == a + b exactly.
inline void two_sum(double a, double b, double& s, double& err) {
  s = a + b;
  double bb = s - a;
  err = (a - (s - bb)) + (b - bb);
}

struct DD {
  double hi = 0.0;
  double lo = 0.0;
};

inline DD dd_add(DD x, DD y) {
  double s, e;
  two_sum(x.hi, y.hi, s, e);
  e += x.lo + y.lo;
  double s2, e2;
  two_sum(s, e, s2, e2);
  return {s2, e2};
}

inline DD dd_add(DD x, double v) { return dd_add(x, DD{v, 0.0}); }

inline double cell_pow(double v, double e) {
  if (e == 1.0) return v;
  if (e == 0.0) return 1.0;
  if (e == 2.0) return v * v;
  if (e == -1.0) return 1.0 / v;
  return std::pow(v, e);
}

// Snap rule: lo edges round half up, hi edges round half down.
inline int snap_lo_index(double u) { return static_cast<int>(std::floor(u + 0.5)); }
inline int snap_hi_index(double u) { return static_cast<int>(std::ceil(u - 0.5)); }

std::uint64_t exponent_key(double e) {
  std::uint64_t k;
  std::memcpy(&k, &e, sizeof k);
  return k;
}

}  // namespace

// ---- GridSpec ----

void GridSpec::validate() const {
  if (n < 1) fail_usage("grid: spatial dimension must be >= 1");
  if (static_cast<int>(cells.size()) != n) fail_usage("grid: cells size mismatch");
  for (int c : cells)
    if (c < 2) fail_usage("grid: need at least 2 cells per axis");
  if (time_cells < 2) fail_usage("grid: need at least 2 time cells");
  if (domain.dim() != n) fail_usage("grid: domain dimension mismatch");
  for (int a = 0; a < n; ++a)
    if (!(domain.spatial_lo[a] < domain.spatial_hi[a]))
      fail_usage("grid: empty spatial extent");
  if (!(domain.time_lo < domain.time_hi)) fail_usage("grid: empty time extent");
}

double GridSpec::cell_volume() const {
  double v = time_step();
  for (int a = 0; a < n; ++a) v *= spatial_step(a);
  return v;
}

std::size_t GridSpec::spatial_cells() const {
  std::size_t s = 1;
  for (int c : cells) s *= static_cast<std::size_t>(c);
  return s;
}

std::size_t GridSpec::total_cells() const {
  return spatial_cells() * static_cast<std::size_t>(time_cells);
}

std::size_t GridSpec::flatten(const std::vector<int>& ix, int it) const {
  std::size_t idx = static_cast<std::size_t>(it);
  for (int a = 0; a < n; ++a)
    idx = idx * static_cast<std::size_t>(cells[a]) + static_cast<std::size_t>(ix[a]);
  return idx;
}

void GridSpec::unflatten(std::size_t flat, std::vector<int>& ix, int& it) const {
  ix.resize(n);
  for (int a = n - 1; a >= 0; --a) {
    ix[a] = static_cast<int>(flat % static_cast<std::size_t>(cells[a]));
    flat /= static_cast<std::size_t>(cells[a]);
  }
  it = static_cast<int>(flat);
}

bool GridSpec::IndexBox::empty() const {
  if (t_hi <= t_lo) return true;
  for (std::size_t a = 0; a < lo.size(); ++a)
    if (hi[a] <= lo[a]) return true;
  return false;
}

std::size_t GridSpec::IndexBox::count() const {
  if (empty()) return 0;
  std::size_t c = static_cast<std::size_t>(t_hi - t_lo);
  for (std::size_t a = 0; a < lo.size(); ++a)
    c *= static_cast<std::size_t>(hi[a] - lo[a]);
  return c;
}

GridSpec::IndexBox GridSpec::snap(const SpaceTimeBox& box) const {
  IndexBox ib;
  ib.lo.resize(n);
  ib.hi.resize(n);
  for (int a = 0; a < n; ++a) {
    double h = spatial_step(a);
    ib.lo[a] = snap_lo_index((box.spatial_lo[a] - domain.spatial_lo[a]) / h);
    ib.hi[a] = snap_hi_index((box.spatial_hi[a] - domain.spatial_lo[a]) / h);
  }
  double ht = time_step();
  ib.t_lo = snap_lo_index((box.time_lo - domain.time_lo) / ht);
  ib.t_hi = snap_hi_index((box.time_hi - domain.time_lo) / ht);
  return ib;
}

bool GridSpec::index_box_inside(const IndexBox& ib) const {
  if (ib.t_lo < 0 || ib.t_hi > time_cells) return false;
  for (int a = 0; a < n; ++a)
    if (ib.lo[a] < 0 || ib.hi[a] > cells[a]) return false;
  return true;
}

SpaceTimeBox GridSpec::box_of(const IndexBox& ib) const {
  SpaceTimeBox b;
  b.spatial_lo.resize(n);
  b.spatial_hi.resize(n);
  for (int a = 0; a < n; ++a) {
    double h = spatial_step(a);
    b.spatial_lo[a] = domain.spatial_lo[a] + ib.lo[a] * h;
    b.spatial_hi[a] = domain.spatial_lo[a] + ib.hi[a] * h;
  }
  double ht = time_step();
  b.time_lo = domain.time_lo + ib.t_lo * ht;
  b.time_hi = domain.time_lo + ib.t_hi * ht;
  return b;
}

bool GridSpec::same_layout(const GridSpec& other) const {
  return n == other.n && cells == other.cells && time_cells == other.time_cells &&
         domain.spatial_lo == other.domain.spatial_lo &&
         domain.spatial_hi == other.domain.spatial_hi &&
         domain.time_lo == other.domain.time_lo &&
         domain.time_hi == other.domain.time_hi;
}

// ---- GridFunction ----

struct GridFunction::Payload {
  GridSpec spec;
  std::vector<double> values;
  double min_v = 0.0, max_v = 0.0;
  mutable std::mutex mutex;
  mutable std::map<std::uint64_t, std::shared_ptr<const PrefixTable>> tables;
};

GridFunction::GridFunction(GridSpec spec, std::vector<double> values) {
  spec.validate();
  if (values.size() != spec.total_cells())
    fail_data("grid function: value count does not match the grid");
  double mn = values[0], mx = values[0];
  for (double v : values) {
    if (!std::isfinite(v)) fail_data("grid function: non-finite value");
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  auto pl = std::make_shared<Payload>();
  pl->spec = std::move(spec);
  pl->values = std::move(values);
  pl->min_v = mn;
  pl->max_v = mx;
  p_ = std::move(pl);
}

GridFunction GridFunction::constant(const GridSpec& spec, double c) {
  return GridFunction(spec, std::vector<double>(spec.total_cells(), c));
}

GridFunction GridFunction::sample(
    const GridSpec& spec,
    const std::function<double(const std::vector<double>&, double)>& fn) {
  spec.validate();
  std::vector<double> vals(spec.total_cells());
  std::vector<int> ix(spec.n, 0);
  std::vector<double> x(spec.n);
  for (std::size_t flat = 0; flat < vals.size(); ++flat) {
    int it;
    spec.unflatten(flat, ix, it);
    for (int a = 0; a < spec.n; ++a) x[a] = spec.center(a, ix[a]);
    vals[flat] = fn(x, spec.time_center(it));
  }
  return GridFunction(spec, std::move(vals));
}

const GridSpec& GridFunction::spec() const { return p_->spec; }
const std::vector<double>& GridFunction::values() const { return p_->values; }
double GridFunction::min_value() const { return p_->min_v; }
double GridFunction::max_value() const { return p_->max_v; }

const PrefixTable& GridFunction::prefix(double exponent) const {
  std::uint64_t key = exponent_key(exponent);
  std::lock_guard<std::mutex> lock(p_->mutex);
  auto it = p_->tables.find(key);
  if (it == p_->tables.end()) {
    auto table = std::make_shared<const PrefixTable>(p_->spec, p_->values, exponent);
    it = p_->tables.emplace(key, std::move(table)).first;
  }
  return *it->second;
}

GridFunction GridFunction::map(const std::function<double(double)>& fn) const {
  std::vector<double> out(size());
  const auto& in = values();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fn(in[i]);
  return GridFunction(spec(), std::move(out));
}

// ---- PrefixTable ----

PrefixTable::PrefixTable(const GridSpec& spec, const std::vector<double>& values,
                         double exponent)
    : exponent_(exponent), dims_(spec.n + 1) {
  size_.resize(dims_);
  size_[0] = static_cast<std::size_t>(spec.time_cells) + 1;
  for (int a = 0; a < spec.n; ++a) size_[a + 1] = static_cast<std::size_t>(spec.cells[a]) + 1;

  stride_.assign(dims_, 1);
  for (int d = dims_ - 2; d >= 0; --d) stride_[d] = stride_[d + 1] * size_[d + 1];
  std::size_t total = stride_[0] * size_[0];

  hi_.assign(total, 0.0);
  lo_.assign(total, 0.0);

  // Scatter values^exponent into the interior (offset 1 along every axis).
  std::vector<int> ix(spec.n, 0);
  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    int it;
    spec.unflatten(flat, ix, it);
    std::size_t idx = static_cast<std::size_t>(it + 1) * stride_[0];
    for (int a = 0; a < spec.n; ++a)
      idx += static_cast<std::size_t>(ix[a] + 1) * stride_[a + 1];
    hi_[idx] = cell_pow(values[flat], exponent);
    if (!std::isfinite(hi_[idx]))
      fail_numeric("prefix table: value^exponent overflowed");
  }

  // Cumulative pass along each axis in a fixed order; compensated pairs keep
  // every prefix entry accurate to ~2^-100 relative to the running magnitude.
  for (int d = 0; d < dims_; ++d) {
    std::size_t axis_stride = stride_[d];
    std::size_t axis_size = size_[d];
    std::size_t lines = total / axis_size;
    for (std::size_t line = 0; line < lines; ++line) {
      // Decompose line index into the multi-index with axis d removed.
      std::size_t rem = line;
      std::size_t base = 0;
      for (int dd = dims_ - 1; dd >= 0; --dd) {
        if (dd == d) continue;
        std::size_t coord = rem % size_[dd];
        rem /= size_[dd];
        base += coord * stride_[dd];
      }
      DD run{0.0, 0.0};
      for (std::size_t i = 0; i < axis_size; ++i) {
        std::size_t idx = base + i * axis_stride;
        run = dd_add(run, DD{hi_[idx], lo_[idx]});
        hi_[idx] = run.hi;
        lo_[idx] = run.lo;
      }
    }
  }
}

double PrefixTable::box_sum(const GridSpec::IndexBox& ib) const {
  // Inclusion-exclusion over the 2^(n+1) corners of the index box.
  int d = dims_;
  DD acc{0.0, 0.0};
  for (unsigned corner = 0; corner < (1u << d); ++corner) {
    std::size_t idx = 0;
    int zeros = 0;
    for (int axis = 0; axis < d; ++axis) {
      bool hi_side = (corner >> axis) & 1u;
      int coord;
      if (axis == 0)
        coord = hi_side ? ib.t_hi : ib.t_lo;
      else
        coord = hi_side ? ib.hi[axis - 1] : ib.lo[axis - 1];
      if (!hi_side) ++zeros;
      idx += static_cast<std::size_t>(coord) * stride_[axis];
    }
    DD term{hi_[idx], lo_[idx]};
    if (zeros & 1) term = DD{-term.hi, -term.lo};
    acc = dd_add(acc, term);
  }
  return acc.hi + acc.lo;
}

// ---- operations ----

namespace {

GridSpec::IndexBox snap_checked(const GridFunction& f, const SpaceTimeBox& box,
                                const char* who) {
  const GridSpec& spec = f.spec();
  if (box.dim() != spec.n) fail_data(std::string(who) + ": box dimension mismatch");
  GridSpec::IndexBox ib = spec.snap(box);
  if (!spec.index_box_inside(ib))
    fail_data(std::string(who) + ": box leaves the grid domain");
  if (ib.empty()) fail_data(std::string(who) + ": box snapped to an empty cell range");
  return ib;
}

template <class Fn>
void for_each_cell(const GridSpec& spec, const GridSpec::IndexBox& ib, Fn&& fn) {
  std::vector<int> ix(ib.lo);
  for (int it = ib.t_lo; it < ib.t_hi; ++it) {
    // Iterate the spatial sub-box in lexicographic order.
    for (int a = 0; a < spec.n; ++a) ix[a] = ib.lo[a];
    bool done = false;
    while (!done) {
      fn(spec.flatten(ix, it));
      int a = spec.n - 1;
      while (a >= 0) {
        if (++ix[a] < ib.hi[a]) break;
        ix[a] = ib.lo[a];
        --a;
      }
      if (a < 0) done = true;
    }
  }
}

}  // namespace

double box_average(const GridFunction& f, const SpaceTimeBox& box, double exponent) {
  GridSpec::IndexBox ib = snap_checked(f, box, "box_average");
  double sum = f.prefix(exponent).box_sum(ib);
  return sum / static_cast<double>(ib.count());
}

GridFunction power_transform(const GridFunction& f, double e) {
  if (e < 0.0 && !(f.min_value() > 0.0))
    fail_numeric("power_transform: negative exponent on a nonpositive value");
  if (e == 1.0) return f;
  return f.map([e](double v) { return cell_pow(v, e); });
}

double level_measure(const GridFunction& f, double lambda, const SpaceTimeBox& region,
                     const GridFunction* weight) {
  if (weight && !weight->spec().same_layout(f.spec()))
    fail_data("level_measure: weight grid layout mismatch");
  GridSpec::IndexBox ib = snap_checked(f, region, "level_measure");
  const double cell_vol = f.spec().cell_volume();
  const auto& vals = f.values();
  double measure = 0.0;
  if (weight) {
    const auto& w = weight->values();
    for_each_cell(f.spec(), ib, [&](std::size_t idx) {
      if (vals[idx] > lambda) measure += w[idx] * cell_vol;
    });
  } else {
    std::size_t cnt = 0;
    for_each_cell(f.spec(), ib, [&](std::size_t idx) {
      if (vals[idx] > lambda) ++cnt;
    });
    measure = static_cast<double>(cnt) * cell_vol;
  }
  return measure;
}

GridFunction combine(const GridFunction& f, const GridFunction& g, CombineMode mode,
                     double floor_eps) {
  if (!f.spec().same_layout(g.spec())) fail_data("combine: grid layout mismatch");
  const auto& a = f.values();
  const auto& b = g.values();
  std::vector<double> out(a.size());
  switch (mode) {
    case CombineMode::min:
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::min(a[i], b[i]);
      break;
    case CombineMode::max:
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::max(a[i], b[i]);
      break;
    case CombineMode::product:
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
      break;
    case CombineMode::quotient:
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(b[i]) < floor_eps)
          fail_numeric("combine: quotient by a value below the floor");
        out[i] = a[i] / b[i];
      }
      break;
  }
  return GridFunction(f.spec(), std::move(out));
}

GridFunction gf_sum(const GridFunction& f, const GridFunction& g) {
  if (!f.spec().same_layout(g.spec())) fail_data("gf_sum: grid layout mismatch");
  const auto& a = f.values();
  const auto& b = g.values();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return GridFunction(f.spec(), std::move(out));
}

ClampResult clamp_weight(const GridFunction& f, double floor_eps, bool warn) {
  const auto& in = f.values();
  std::vector<double> out(in);
  std::size_t clamped = 0;
  for (double& v : out) {
    if (v < floor_eps) {
      v = floor_eps;
      ++clamped;
    }
  }
  if (clamped > 0 && warn)
    std::cerr << "parweight: warning: clamped " << clamped
              << " weight cells below " << floor_eps << "\n";
  return ClampResult{GridFunction(f.spec(), std::move(out)), clamped};
}

GridFunction reverse_time(const GridFunction& f) {
  const GridSpec& spec = f.spec();
  const auto& in = f.values();
  std::vector<double> out(in.size());
  std::size_t slice = spec.spatial_cells();
  for (int it = 0; it < spec.time_cells; ++it) {
    std::size_t src = static_cast<std::size_t>(it) * slice;
    std::size_t dst = static_cast<std::size_t>(spec.time_cells - 1 - it) * slice;
    std::copy(in.begin() + src, in.begin() + src + slice, out.begin() + dst);
  }
  return GridFunction(spec, std::move(out));
}

GridFunction crop(const GridFunction& f, const GridSpec::IndexBox& ib) {
  const GridSpec& spec = f.spec();
  if (!spec.index_box_inside(ib) || ib.empty())
    fail_data("crop: index box empty or outside the grid");
  GridSpec sub;
  sub.n = spec.n;
  sub.cells.resize(spec.n);
  for (int a = 0; a < spec.n; ++a) sub.cells[a] = ib.hi[a] - ib.lo[a];
  sub.time_cells = ib.t_hi - ib.t_lo;
  sub.domain = spec.box_of(ib);
  std::vector<double> out;
  out.reserve(ib.count());
  for_each_cell(spec, ib, [&](std::size_t idx) { out.push_back(f.value(idx)); });
  return GridFunction(sub, std::move(out));
}

double integral(const GridFunction& f, double exponent, const GridFunction* weight) {
  if (weight && !weight->spec().same_layout(f.spec()))
    fail_data("integral: weight grid layout mismatch");
  const auto& vals = f.values();
  const double cell_vol = f.spec().cell_volume();
  DD acc{0.0, 0.0};
  if (weight) {
    const auto& w = weight->values();
    for (std::size_t i = 0; i < vals.size(); ++i)
      acc = dd_add(acc, cell_pow(vals[i], exponent) * w[i]);
  } else {
    for (std::size_t i = 0; i < vals.size(); ++i)
      acc = dd_add(acc, cell_pow(vals[i], exponent));
  }
  return (acc.hi + acc.lo) * cell_vol;
}

}  // namespace parweight
