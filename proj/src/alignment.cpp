#include "a2dcdr/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace a2dcdr {

namespace {

bool row_less(const Matrix& m, Eigen::Index a, const Matrix& n, Eigen::Index b) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (m(a, c) < n(b, c)) return true;
    if (n(b, c) < m(a, c)) return false;
  }
  return false;
}

struct Canonical {
  Matrix rows;
  std::vector<Eigen::Index> order;  // rows.row(k) == original.row(order[k])
};

Canonical canonicalize(const Matrix& m) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor packed = m;
  const auto cols = static_cast<std::ptrdiff_t>(m.cols());
  Canonical c;
  c.order.resize(static_cast<std::size_t>(m.rows()));
  std::iota(c.order.begin(), c.order.end(), Eigen::Index{0});
  // Equal rows are interchangeable, so an unstable sort is enough.
  std::sort(c.order.begin(), c.order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double* ra = packed.data() + a * cols;
    const double* rb = packed.data() + b * cols;
    return std::lexicographical_compare(ra, ra + cols, rb, rb + cols);
  });
  c.rows.resize(m.rows(), m.cols());
  for (std::size_t k = 0; k < c.order.size(); ++k) c.rows.row(static_cast<Eigen::Index>(k)) = m.row(c.order[k]);
  return c;
}

bool sample_less(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    if (row_less(a, r, b, r)) return true;
    if (row_less(b, r, a, r)) return false;
  }
  return false;
}

// Integer p when (wide / narrow)^2 is a small whole number, else 0.
int whole_power(double wide, double narrow) {
  const double r = (wide / narrow) * (wide / narrow);
  const double p = std::round(r);
  return (p >= 2.0 && p <= 64.0 && std::abs(r - p) < 1e-9 * p) ? static_cast<int>(p) : 0;
}

// Upper triangles (diagonal included) of the pooled kernel and of its gradient
// weight sum_b exp(-D / (2 sigma_b^2)) / sigma_b^2; lower parts are unset.
struct KernelMaps {
  Matrix k;
  Matrix w;
};

// Column by column over the upper triangle. Narrower bandwidths at
// whole-number squared ratios reuse the wider kernel value.
KernelMaps kernel_maps(const Matrix& dist, const std::vector<double>& sigmas, bool want_weight) {
  std::vector<double> widths = sigmas;
  std::sort(widths.begin(), widths.end(), std::greater<>());
  const Eigen::Index n = dist.rows();
  KernelMaps out;
  out.k = Matrix::Zero(n, n);
  if (want_weight) out.w = Matrix::Zero(n, n);
  std::vector<int> powers(widths.size(), 0);
  for (std::size_t b = 1; b < widths.size(); ++b) powers[b] = whole_power(widths[b - 1], widths[b]);
  Eigen::ArrayXd g(n), base(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index len = j + 1;
    auto gs = g.head(len);
    auto bs = base.head(len);
    auto k = out.k.col(j).head(len).array();
    for (std::size_t b = 0; b < widths.size(); ++b) {
      const double s = widths[b];
      int p = powers[b];
      if (p == 4) {
        gs = gs.square().square();
      } else if (p > 0) {
        bs = gs;
        gs.setOnes();
        for (; p > 0; p >>= 1) {
          if (p & 1) gs *= bs;
          if (p > 1) bs = bs.square();
        }
      } else {
        gs = (dist.col(j).head(len).array() * (-1.0 / (2.0 * s * s))).exp();
      }
      k += gs;
      if (want_weight) out.w.col(j).head(len).array() += gs * (1.0 / (s * s));
    }
  }
  return out;
}

// Sum of a symmetric block given its stored upper triangle.
double symmetric_sum(const Eigen::Ref<const Matrix>& upper) {
  double off = 0.0;
  for (Eigen::Index j = 1; j < upper.cols(); ++j) off += upper.col(j).head(j).sum();
  return 2.0 * off + upper.diagonal().sum();
}

void check_pair(const Matrix& x, const Matrix& y) {
  if (x.rows() < 1 || y.rows() < 1) throw std::invalid_argument("mmd: both samples need at least one row");
  if (x.cols() != y.cols()) {
    throw std::invalid_argument("mmd: dimension mismatch (" + std::to_string(x.cols()) + " vs " +
                                std::to_string(y.cols()) + ")");
  }
}

// Upper triangle of the squared distances over the pooled pair [x; y], zero diagonal.
Matrix pooled_distances(const Matrix& x, const Matrix& y) {
  const Eigen::Index n = x.rows() + y.rows();
  Matrix pooled(n, x.cols());
  pooled << x, y;
  Matrix dist = Matrix::Zero(n, n);
  dist.selfadjointView<Eigen::Upper>().rankUpdate(pooled, -2.0);
  const Eigen::ArrayXd sq = pooled.rowwise().squaredNorm().array();
  for (Eigen::Index j = 0; j < n; ++j) {
    dist.col(j).head(j) = (dist.col(j).head(j).array() + sq.head(j) + sq(j)).cwiseMax(0.0).matrix();
    dist(j, j) = 0.0;
  }
  return dist;
}

double median_base(const Matrix& dist) {
  std::vector<double> off_diagonal;
  off_diagonal.reserve(static_cast<std::size_t>(dist.rows() * (dist.rows() - 1) / 2));
  for (Eigen::Index j = 0; j < dist.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i) off_diagonal.push_back(dist(i, j));
  if (off_diagonal.empty()) return 1.0;
  const auto mid = off_diagonal.begin() + static_cast<std::ptrdiff_t>((off_diagonal.size() - 1) / 2);
  std::nth_element(off_diagonal.begin(), mid, off_diagonal.end());
  return *mid > 1e-12 ? std::sqrt(*mid) : 1.0;
}

std::vector<double> scaled(const KernelConfig& kernel, double base) {
  std::vector<double> sigmas;
  sigmas.reserve(kernel.bandwidths.size());
  for (double mult : kernel.bandwidths) sigmas.push_back(mult * base);
  return sigmas;
}

double mmd_squared_canonical(const Matrix& x, const Matrix& y, const Matrix& dist, const std::vector<double>& sigmas,
                             Matrix* gx, Matrix* gy) {
  const Eigen::Index nx = x.rows(), ny = y.rows();
  const double n = static_cast<double>(nx);
  const double m = static_cast<double>(ny);
  const bool want = gx || gy;
  const KernelMaps maps = kernel_maps(dist, sigmas, want);
  const double value = symmetric_sum(maps.k.topLeftCorner(nx, nx)) / (n * n) +
                       symmetric_sum(maps.k.bottomRightCorner(ny, ny)) / (m * m) -
                       2.0 * maps.k.topRightCorner(nx, ny).sum() / (n * m);
  if (!want) return value;
  const auto wxx = maps.w.topLeftCorner(nx, nx).selfadjointView<Eigen::Upper>();
  const auto wyy = maps.w.bottomRightCorner(ny, ny).selfadjointView<Eigen::Upper>();
  const auto wxy = maps.w.topRightCorner(nx, ny);
  if (gx) {
    const Vector rxx = wxx * Vector::Ones(nx);
    const Vector rxy = wxy.rowwise().sum();
    Matrix term_xx = x.array().colwise() * rxx.array();
    term_xx.noalias() -= wxx * x;
    Matrix term_xy = x.array().colwise() * rxy.array();
    term_xy.noalias() -= wxy * y;
    *gx = (-2.0 / (n * n)) * term_xx + (2.0 / (n * m)) * term_xy;
  }
  if (gy) {
    const Vector ryy = wyy * Vector::Ones(ny);
    const Vector ryx = wxy.colwise().sum().transpose();
    Matrix term_yy = y.array().colwise() * ryy.array();
    term_yy.noalias() -= wyy * y;
    Matrix term_yx = y.array().colwise() * ryx.array();
    term_yx.noalias() -= wxy.transpose() * x;
    *gy = (-2.0 / (m * m)) * term_yy + (2.0 / (n * m)) * term_yx;
  }
  return value;
}

Matrix scatter_back(const Matrix& canonical_grad, const std::vector<Eigen::Index>& order) {
  Matrix g(canonical_grad.rows(), canonical_grad.cols());
  for (std::size_t k = 0; k < order.size(); ++k) g.row(order[k]) = canonical_grad.row(static_cast<Eigen::Index>(k));
  return g;
}

}  // namespace

namespace {

// Canonical pair: both samples row-sorted, then the pair itself ordered.
struct CanonicalPair {
  Canonical x, y;
  bool swapped = false;
  const Canonical& first() const { return swapped ? y : x; }
  const Canonical& second() const { return swapped ? x : y; }
};

CanonicalPair canonical_pair(const Matrix& x, const Matrix& y) {
  check_pair(x, y);
  CanonicalPair p{canonicalize(x), canonicalize(y), false};
  p.swapped = sample_less(p.y.rows, p.x.rows);
  return p;
}

double mmd_squared_pair(const CanonicalPair& pair, const Matrix& dist, const std::vector<double>& sigmas,
                        Matrix* grad_x, Matrix* grad_y) {
  if (sigmas.empty()) throw std::invalid_argument("mmd: no kernel bandwidths");
  const bool want = grad_x || grad_y;
  Matrix g_first, g_second;
  double value = mmd_squared_canonical(pair.first().rows, pair.second().rows, dist, sigmas,
                                       want ? &g_first : nullptr, want ? &g_second : nullptr);
  // same empirical distribution: exactly zero, not block-summation roundoff
  const Matrix& a = pair.first().rows;
  const Matrix& b = pair.second().rows;
  if (a.rows() == b.rows() && a == b) value = 0.0;
  if (want) {
    Matrix gx = scatter_back(pair.swapped ? g_second : g_first, pair.x.order);
    Matrix gy = scatter_back(pair.swapped ? g_first : g_second, pair.y.order);
    if (grad_x) *grad_x = std::move(gx);
    if (grad_y) *grad_y = std::move(gy);
  }
  return value;
}

}  // namespace

std::vector<double> resolve_bandwidths(const Matrix& x, const Matrix& y, const KernelConfig& kernel) {
  kernel.validate();
  if (!kernel.median_heuristic) return kernel.bandwidths;
  const CanonicalPair pair = canonical_pair(x, y);
  return scaled(kernel, median_base(pooled_distances(pair.first().rows, pair.second().rows)));
}

double mmd_squared(const Matrix& x, const Matrix& y, const std::vector<double>& sigmas, Matrix* grad_x,
                   Matrix* grad_y) {
  const CanonicalPair pair = canonical_pair(x, y);
  return mmd_squared_pair(pair, pooled_distances(pair.first().rows, pair.second().rows), sigmas, grad_x, grad_y);
}

namespace {

double fused_mmd_squared(const Matrix& x, const Matrix& y, const KernelConfig& kernel, Matrix* grad_x, Matrix* grad_y) {
  kernel.validate();
  const CanonicalPair pair = canonical_pair(x, y);
  const Matrix dist = pooled_distances(pair.first().rows, pair.second().rows);
  const auto sigmas = kernel.median_heuristic ? scaled(kernel, median_base(dist)) : kernel.bandwidths;
  return mmd_squared_pair(pair, dist, sigmas, grad_x, grad_y);
}

}  // namespace

double mmd(const Matrix& x, const Matrix& y, const KernelConfig& kernel) {
  return std::sqrt(std::max(fused_mmd_squared(x, y, kernel, nullptr, nullptr), 0.0));
}

ad::Var mmd(const ad::Var& x, const ad::Var& y, const KernelConfig& kernel) {
  if (x.tape() != y.tape()) throw std::logic_error("mmd: operands live on different tapes");
  const bool want = x.requires_grad() || y.requires_grad();
  Matrix gx, gy;
  Matrix value(1, 1);
  value(0, 0) = fused_mmd_squared(x.value(), y.value(), kernel, want ? &gx : nullptr, want ? &gy : nullptr);
  ad::Var sq = x.tape()->record(std::move(value), {x, y},
                                [x, y, gx = std::move(gx), gy = std::move(gy)](ad::Tape& tp, const Matrix& g) {
                                  tp.accumulate(x, g(0, 0) * gx);
                                  tp.accumulate(y, g(0, 0) * gy);
                                });
  return ad::sqrt_clamped(sq);
}

ProjectorHead make_projector(int d, Rng& rng) { return Mlp::make({d, kProjectorHidden, d}, rng); }

DcMmdTerms dc_mmd_loss(ad::Binder& bind, const DisentangledVars& batch, const std::array<ProjectorHead, 2>& projectors,
                       const KernelConfig& kernel, bool symmetric, double grl_scale) {
  for (int di = 0; di < 2; ++di) {
    if (batch.h_t[di].rows() != batch.h_t[0].rows() || batch.h_s[di].rows() != batch.h_t[0].rows()) {
      throw std::invalid_argument("dc_mmd_loss: representation blocks are not row-aligned");
    }
  }
  DcMmdTerms terms;
  terms.aligned = mmd(batch.h_t[0], batch.h_t[1], kernel);
  const ad::Var projected_b = projectors[1].forward(bind, ad::gradient_reversal(batch.h_s[1], grl_scale));
  terms.specific_b = mmd(batch.h_t[0], projected_b, kernel);
  terms.total = terms.aligned + terms.specific_b;
  if (symmetric) {
    const ad::Var projected_a = projectors[0].forward(bind, ad::gradient_reversal(batch.h_s[0], grl_scale));
    terms.specific_a = mmd(batch.h_t[1], projected_a, kernel);
    terms.total = terms.total + terms.specific_a;
  }
  return terms;
}

double dc_mmd_loss(const DisentangledBatch& batch, const std::array<ProjectorHead, 2>& projectors,
                   const KernelConfig& kernel, bool symmetric) {
  for (int di = 0; di < 2; ++di) {
    if (batch.h_t[di].rows() != batch.h_t[0].rows() || batch.h_s[di].rows() != batch.h_t[0].rows()) {
      throw std::invalid_argument("dc_mmd_loss: representation blocks are not row-aligned");
    }
  }
  double total = mmd(batch.h_t[0], batch.h_t[1], kernel);
  total += mmd(batch.h_t[0], projectors[1].forward(batch.h_s[1]), kernel);
  if (symmetric) total += mmd(batch.h_t[1], projectors[0].forward(batch.h_s[0]), kernel);
  return total;
}

}  // namespace a2dcdr
