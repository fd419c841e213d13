#include "amgcn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "amgcn/error.hpp"

namespace amgcn {
namespace {

void check_labels(const DenseMatrix& probabilities, std::span<const int> labels,
                  std::span<const std::size_t> train_idx) {
  require(!train_idx.empty(), ErrorCode::InvalidInput, "cross_entropy: empty training set");
  const auto classes = static_cast<int>(probabilities.cols());
  for (std::size_t l : train_idx) {
    require(l < probabilities.rows() && l < labels.size(), ErrorCode::IndexOutOfRange,
            "cross_entropy: training index " + std::to_string(l) + " out of range");
    require(labels[l] >= 0 && labels[l] < classes, ErrorCode::IndexOutOfRange,
            "cross_entropy: label " + std::to_string(labels[l]) + " outside [0, " +
                std::to_string(classes) + ")");
  }
}

DenseMatrix center_columns(const DenseMatrix& z) {
  DenseMatrix out = z;
  const double inv_n = 1.0 / static_cast<double>(z.rows());
  for (std::size_t c = 0; c < z.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < z.rows(); ++r) mean += z(r, c);
    mean *= inv_n;
    for (std::size_t r = 0; r < z.rows(); ++r) out(r, c) -= mean;
  }
  return out;
}

std::vector<double> row_norms(const DenseMatrix& z) {
  std::vector<double> norms(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double s = 0.0;
    for (double v : z.row(i)) s += v * v;
    norms[i] = std::sqrt(s);
  }
  return norms;
}

// Backpropagates g (w.r.t. the normalized rows) through z -> z / |z|.
DenseMatrix normalize_rows_backward(const DenseMatrix& z, const DenseMatrix& normalized,
                                    const DenseMatrix& g) {
  const auto norms = row_norms(z);
  DenseMatrix out(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    if (norms[i] == 0.0) continue;
    const auto u = normalized.row(i);
    const auto gi = g.row(i);
    double dot = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) dot += u[c] * gi[c];
    auto oi = out.row(i);
    for (std::size_t c = 0; c < u.size(); ++c) oi[c] = (gi[c] - u[c] * dot) / norms[i];
  }
  return out;
}

void check_hsic_inputs(const DenseMatrix& za, const DenseMatrix& zb) {
  require(za.rows() == zb.rows(), ErrorCode::DimensionMismatch,
          "hsic: row counts differ (" + std::to_string(za.rows()) + " vs " +
              std::to_string(zb.rows()) + ")");
  require(za.rows() >= 2, ErrorCode::InvalidInput, "hsic: needs at least two rows");
}

}  // namespace

double cross_entropy(const DenseMatrix& probabilities, std::span<const int> labels,
                     std::span<const std::size_t> train_idx, bool mean) {
  check_labels(probabilities, labels, train_idx);
  double loss = 0.0;
  for (std::size_t l : train_idx) {
    loss -= std::log(std::max(probabilities(l, static_cast<std::size_t>(labels[l])), kLogClamp));
  }
  return mean ? loss / static_cast<double>(train_idx.size()) : loss;
}

DenseMatrix cross_entropy_grad(const DenseMatrix& probabilities, std::span<const int> labels,
                               std::span<const std::size_t> train_idx, bool mean) {
  check_labels(probabilities, labels, train_idx);
  const double scale = mean ? 1.0 / static_cast<double>(train_idx.size()) : 1.0;
  DenseMatrix g(probabilities.rows(), probabilities.cols());
  for (std::size_t l : train_idx) {
    auto gr = g.row(l);
    const auto pr = probabilities.row(l);
    for (std::size_t c = 0; c < gr.size(); ++c) gr[c] += scale * pr[c];
    gr[static_cast<std::size_t>(labels[l])] -= scale;
  }
  return g;
}

DenseMatrix normalize_rows(const DenseMatrix& z) {
  DenseMatrix out = z;
  const auto norms = row_norms(z);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    if (norms[i] == 0.0) continue;
    for (double& v : out.row(i)) v /= norms[i];
  }
  return out;
}

double consistency_loss(const DenseMatrix& z_ct, const DenseMatrix& z_cf) {
  require(z_ct.same_shape(z_cf), ErrorCode::DimensionMismatch,
          "consistency_loss: embeddings differ in shape");
  const DenseMatrix a = normalize_rows(z_ct);
  const DenseMatrix b = normalize_rows(z_cf);
  // |AA^T - BB^T|^2 = |A^T A|^2 - 2 |A^T B|^2 + |B^T B|^2
  const double value = frobenius_sq(matmul_tn(a, a)) - 2.0 * frobenius_sq(matmul_tn(a, b)) +
                       frobenius_sq(matmul_tn(b, b));
  return std::max(value, 0.0);
}

PairGradient consistency_loss_grad(const DenseMatrix& z_ct, const DenseMatrix& z_cf) {
  require(z_ct.same_shape(z_cf), ErrorCode::DimensionMismatch,
          "consistency_loss: embeddings differ in shape");
  const DenseMatrix a = normalize_rows(z_ct);
  const DenseMatrix b = normalize_rows(z_cf);
  const DenseMatrix ata = matmul_tn(a, a);
  const DenseMatrix atb = matmul_tn(a, b);
  const DenseMatrix btb = matmul_tn(b, b);

  PairGradient out;
  out.value = std::max(frobenius_sq(ata) - 2.0 * frobenius_sq(atb) + frobenius_sq(btb), 0.0);
  // With D = AA^T - BB^T: dL/dA = 4 D A, dL/dB = -4 D B.
  DenseMatrix ga = matmul(a, ata);
  ga -= matmul_nt(b, atb);  // B (A^T B)^T = B B^T A
  ga *= 4.0;
  DenseMatrix gb = matmul(b, btb);
  gb -= matmul(a, atb);  // A A^T B
  gb *= 4.0;
  out.d_first = normalize_rows_backward(z_ct, a, ga);
  out.d_second = normalize_rows_backward(z_cf, b, gb);
  return out;
}

double hsic(const DenseMatrix& za, const DenseMatrix& zb) {
  check_hsic_inputs(za, zb);
  const double n1 = static_cast<double>(za.rows() - 1);
  return frobenius_sq(matmul_tn(center_columns(za), center_columns(zb))) / (n1 * n1);
}

PairGradient hsic_grad(const DenseMatrix& za, const DenseMatrix& zb) {
  check_hsic_inputs(za, zb);
  const double n1 = static_cast<double>(za.rows() - 1);
  const double c = 1.0 / (n1 * n1);
  const DenseMatrix ca = center_columns(za);
  const DenseMatrix cb = center_columns(zb);
  const DenseMatrix m = matmul_tn(ca, cb);
  PairGradient out;
  out.value = c * frobenius_sq(m);
  out.d_first = matmul_nt(cb, m);
  out.d_first *= 2.0 * c;
  out.d_second = matmul(ca, m);
  out.d_second *= 2.0 * c;
  return out;
}

double disparity_loss(const DenseMatrix& z_t, const DenseMatrix& z_ct, const DenseMatrix& z_f,
                      const DenseMatrix& z_cf) {
  return hsic(z_t, z_ct) + hsic(z_f, z_cf);
}

LossBreakdown total_loss(double task, double consistency, double disparity,
                         const LossWeights& weights) {
  LossBreakdown out;
  out.task = task;
  out.consistency = consistency;
  out.disparity = disparity;
  out.total = task + weights.gamma * consistency + weights.beta * disparity;
  return out;
}

}  // namespace amgcn
