#pragma once

#include <cstddef>
#include <span>

#include "amgcn/dense.hpp"

namespace amgcn {

struct LossWeights {
  double gamma = 0.001;  // consistency
  double beta = 1e-8;    // disparity
};

struct LossBreakdown {
  double task = 0.0;         // cross-entropy over the training nodes
  double consistency = 0.0;  // |S_T - S_F|_F^2
  double disparity = 0.0;    // HSIC(Z_T, Z_CT) + HSIC(Z_F, Z_CF)
  double total = 0.0;

  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

inline constexpr double kLogClamp = 1e-12;

// -sum_{l in train} ln p[l, y_l], or the mean when `mean` is set. Probabilities
// are clamped at kLogClamp before the log.
double cross_entropy(const DenseMatrix& probabilities, std::span<const int> labels,
                     std::span<const std::size_t> train_idx, bool mean = false);

// Gradient of cross_entropy with respect to the logits that produced
// `probabilities` through a row softmax: (p - onehot) on training rows.
DenseMatrix cross_entropy_grad(const DenseMatrix& probabilities, std::span<const int> labels,
                               std::span<const std::size_t> train_idx, bool mean = false);

// Per-row L2 normalization; zero rows stay zero.
DenseMatrix normalize_rows(const DenseMatrix& z);

// |Zn_ct Zn_ct^T - Zn_cf Zn_cf^T|_F^2 with Zn the row-normalized inputs.
// Evaluated through h x h Gram products, never forming the n x n matrices.
double consistency_loss(const DenseMatrix& z_ct, const DenseMatrix& z_cf);

// (n-1)^-2 tr(R Ka R Kb) with inner-product kernels Ka = Za Za^T, Kb = Zb Zb^T
// and R = I - ee^T/n. Computed as (n-1)^-2 |Ra^T Rb|_F^2 with column-centered
// inputs. Requires n >= 2.
double hsic(const DenseMatrix& za, const DenseMatrix& zb);

double disparity_loss(const DenseMatrix& z_t, const DenseMatrix& z_ct, const DenseMatrix& z_f,
                      const DenseMatrix& z_cf);

LossBreakdown total_loss(double task, double consistency, double disparity,
                         const LossWeights& weights);

struct PairGradient {
  double value = 0.0;
  DenseMatrix d_first;
  DenseMatrix d_second;
};

PairGradient consistency_loss_grad(const DenseMatrix& z_ct, const DenseMatrix& z_cf);
PairGradient hsic_grad(const DenseMatrix& za, const DenseMatrix& zb);

}  // namespace amgcn
