#include "chaosint/grid.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace chaosint {

namespace {
constexpr double kGridSnapTol = 1e-12;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

Grid::Grid(double horizon, int lvl) : T(horizon), level(lvl) {
  require(horizon > 0.0, "Grid: horizon T must be positive");
  require(lvl >= 0 && lvl <= 24, "Grid: level must be in [0, 24]");
}

bool Grid::refines(const Grid& coarser) const {
  return T == coarser.T && level >= coarser.level;
}

std::optional<std::int64_t> Grid::index_of(double s) const {
  const double scaled = s / T * static_cast<double>(cells());
  const auto k = static_cast<std::int64_t>(std::llround(scaled));
  if (k < 0 || k > cells()) return std::nullopt;
  if (std::abs(s - point(k)) > kGridSnapTol * std::max(1.0, T)) return std::nullopt;
  return k;
}

StepFn::StepFn(Grid g, std::vector<double> values) : grid_(g), values_(std::move(values)) {
  require(static_cast<int>(values_.size()) == grid_.cells(),
          "StepFn: value count must equal the cell count");
}

StepFn StepFn::constant(Grid g, double c) {
  return StepFn(g, std::vector<double>(static_cast<std::size_t>(g.cells()), c));
}

StepFn StepFn::from_csv(Grid g, const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "StepFn: cannot open CSV file");
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "StepFn: empty CSV file");
  // strip whitespace and an optional BOM from the header
  std::string hdr;
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c))) hdr += c;
  if (hdr.rfind("\xEF\xBB\xBF", 0) == 0) hdr = hdr.substr(3);
  require(hdr == "cell_index,value", "StepFn: CSV header must be 'cell_index,value'");

  std::vector<double> v(static_cast<std::size_t>(g.cells()), 0.0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell, val;
    require(static_cast<bool>(std::getline(row, cell, ',')), "StepFn: malformed CSV row");
    require(static_cast<bool>(std::getline(row, val)), "StepFn: malformed CSV row");
    const long idx = std::stol(cell);
    require(idx >= 0 && idx < g.cells(), "StepFn: cell_index out of range");
    v[static_cast<std::size_t>(idx)] = std::stod(val);
  }
  return StepFn(g, std::move(v));
}

std::vector<double> StepFn::values_at_level(int level) const {
  require(level >= grid_.level, "StepFn: cannot coarsen values");
  const int rep = 1 << (level - grid_.level);
  std::vector<double> out;
  out.reserve(values_.size() * static_cast<std::size_t>(rep));
  for (double v : values_)
    for (int r = 0; r < rep; ++r) out.push_back(v);
  return out;
}

double StepFn::l2_norm2() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s * grid_.cell_len();
}

double inner(const StepFn& a, const StepFn& b) {
  require(a.grid().T == b.grid().T, "inner: horizon mismatch");
  const int lvl = std::max(a.grid().level, b.grid().level);
  const auto va = a.values_at_level(lvl);
  const auto vb = b.values_at_level(lvl);
  double s = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) s += va[i] * vb[i];
  return s * (a.grid().T / static_cast<double>(1 << lvl));
}

std::vector<double> project(const StepFn& h, const BasisSpec& basis) {
  require(basis.grid.refines(h.grid()),
          "project: step function grid must be the basis grid or a coarsening of it");
  const auto v = h.values_at_level(basis.grid.level);
  const double root = std::sqrt(basis.cell_len());
  std::vector<double> c(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) c[i] = v[i] * root;
  return c;
}

StepFn reconstruct(const std::vector<double>& coeffs, const BasisSpec& basis) {
  require(static_cast<int>(coeffs.size()) == basis.size(),
          "reconstruct: coefficient count must equal basis size");
  const double root = std::sqrt(basis.cell_len());
  std::vector<double> v(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) v[i] = coeffs[i] / root;
  return StepFn(basis.grid, std::move(v));
}

std::vector<double> prefix_coeffs(const StepFn& h, const BasisSpec& basis, double s) {
  require(basis.grid.refines(h.grid()), "prefix_coeffs: grid mismatch");
  require(s >= 0.0 && s <= basis.grid.T + kGridSnapTol, "prefix_coeffs: s outside [0, T]");
  const auto v = h.values_at_level(basis.grid.level);
  const double len = basis.cell_len();
  const double root = std::sqrt(len);
  std::vector<double> c(v.size(), 0.0);
  for (int k = 0; k < basis.size(); ++k) {
    const double lo = basis.grid.point(k);
    const double hi = basis.grid.point(k + 1);
    if (s >= hi) {
      c[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(k)] * root;
    } else if (s > lo) {
      c[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(k)] * (s - lo) / root;
    }
  }
  return c;
}

Kernel2 Kernel2::transposed() const {
  Kernel2 t(n_);
  for (int j = 0; j < n_; ++j)
    for (int k = 0; k < n_; ++k) t.at(k, j) = at(j, k);
  if (exact_norm2_) t.exact_norm2_ = exact_norm2_;
  return t;
}

Kernel2& Kernel2::operator+=(const Kernel2& o) {
  if (n_ != o.n_) throw std::invalid_argument("Kernel2: size mismatch");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  exact_norm2_.reset();
  return *this;
}

Kernel2 Kernel2::operator+(const Kernel2& o) const {
  Kernel2 r = *this;
  r += o;
  return r;
}

Kernel2& Kernel2::scale(double c) {
  for (double& x : a_) x *= c;
  if (exact_norm2_) exact_norm2_ = *exact_norm2_ * c * c;
  return *this;
}

double Kernel2::frobenius_norm2() const {
  double s = 0.0;
  for (double x : a_) s += x * x;
  return s;
}

double Kernel2::max_abs() const {
  double s = 0.0;
  for (double x : a_) s = std::max(s, std::abs(x));
  return s;
}

Kernel2 causal_kernel(const StepFn& h, const StepFn& g, const BasisSpec& basis) {
  require(basis.grid.refines(h.grid()) && basis.grid.refines(g.grid()),
          "causal_kernel: functions must be representable on the basis grid");
  const auto hv = h.values_at_level(basis.grid.level);
  const auto gv = g.values_at_level(basis.grid.level);
  const int n = basis.size();
  const double len = basis.cell_len();
  Kernel2 F(n);
  double exact = 0.0;
  for (int j = 0; j < n; ++j) {
    const double hj = hv[static_cast<std::size_t>(j)];
    F.at(j, j) = hj * gv[static_cast<std::size_t>(j)] * len / 2.0;
    exact += hj * hj * gv[static_cast<std::size_t>(j)] * gv[static_cast<std::size_t>(j)] *
             len * len / 2.0;
    for (int k = j + 1; k < n; ++k) {
      const double c = hj * gv[static_cast<std::size_t>(k)] * len;
      F.at(j, k) = c;
      exact += c * c;
    }
  }
  F.set_exact_norm2(exact);
  return F;
}

StepFn restrict_to(const StepFn& h, double s, const Grid& grid) {
  require(grid.refines(h.grid()), "restrict_to: grid must refine the function's grid");
  const auto k = grid.index_of(s);
  if (!k) throw std::invalid_argument("restrict_to: s is not a grid point (no cell splitting)");
  auto v = h.values_at_level(grid.level);
  for (std::int64_t i = *k; i < grid.cells(); ++i) v[static_cast<std::size_t>(i)] = 0.0;
  return StepFn(grid, std::move(v));
}

}  // namespace chaosint
