/* Copyright 2026 The pgi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pgi/eval/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "pgi/common/error.hpp"

namespace pgi {

namespace {

void require_paired(const Tensor<double>& a, const Tensor<double>& b, const char* what) {
  if (a.shape() != b.shape())
    throw ParameterError(std::string(what) + ": unpaired sets " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  if (a.size() == 0) throw ParameterError(std::string(what) + ": empty input");
}

double mse(const double* a, const double* b, std::size_t n) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(n);
}

double psnr_from_mse(double m, double max_value) {
  if (m <= 0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(max_value * max_value / m));
}

// Eigen-decomposes a symmetric matrix and returns V·sqrt(Λ)·Vᵀ. Eigenvalues
// slightly below zero are rounding noise and clamp to 0; anything more
// negative than the tolerance means the input was not PSD.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError(std::string(what) + ": eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  const double tol = 1e-8 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -tol)
      throw NumericalError(std::string(what) + ": eigenvalue " + std::to_string(ev[i]) + " below tolerance");
    ev[i] = std::sqrt(std::max(0.0, ev[i]));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double sqrt_trace(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("fid: eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double tol = 1e-8 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  double t = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -tol) throw NumericalError("fid: covariance product has eigenvalue " + std::to_string(ev[i]));
    t += std::sqrt(std::max(0.0, ev[i]));
  }
  return t;
}

void moments(const Eigen::MatrixXd& x, Eigen::VectorXd& mu, Eigen::MatrixXd& sigma) {
  mu = x.colwise().mean().transpose();
  const Eigen::MatrixXd c = x.rowwise() - mu.transpose();
  const double denom = x.rows() > 1 ? static_cast<double>(x.rows() - 1) : 1.0;
  sigma = (c.transpose() * c) / denom;
}

}  // namespace

Tensor<double> to_metric_space(const Tensor<float>& images) {
  Tensor<double> out(images.shape());
  for (std::size_t i = 0; i < images.size(); ++i) out[i] = (static_cast<double>(images[i]) + 1.0) * 0.5;
  return out;
}

double l1_metric(const Tensor<double>& ground_truth, const Tensor<double>& prediction) {
  require_paired(ground_truth, prediction, "l1_metric");
  double s = 0;
  for (std::size_t i = 0; i < ground_truth.size(); ++i) s += std::abs(ground_truth[i] - prediction[i]);
  return 100.0 * s / static_cast<double>(ground_truth.size());
}

double psnr(const Tensor<double>& ground_truth, const Tensor<double>& prediction, double max_value) {
  require_paired(ground_truth, prediction, "psnr");
  return psnr_from_mse(mse(ground_truth.ptr(), prediction.ptr(), ground_truth.size()), max_value);
}

double mean_psnr(const Tensor<double>& ground_truth, const Tensor<double>& prediction, double max_value) {
  require_paired(ground_truth, prediction, "mean_psnr");
  const int n = ground_truth.dim(0);
  const std::size_t per = ground_truth.size() / static_cast<std::size_t>(n);
  double s = 0;
  for (int i = 0; i < n; ++i)
    s += psnr_from_mse(mse(ground_truth.ptr() + i * per, prediction.ptr() + i * per, per), max_value);
  return s / n;
}

double inception_score(const Eigen::MatrixXd& p, int splits) {
  if (p.rows() == 0 || p.cols() == 0) throw ParameterError("inception_score: empty probability matrix");
  if (splits < 1 || splits > p.rows()) throw ParameterError("inception_score: splits must be in [1, N]");
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    if ((p.row(r).array() < 0).any() || !p.row(r).allFinite())
      throw ParameterError("inception_score: row " + std::to_string(r) + " has negative or non-finite entries");
    if (std::abs(p.row(r).sum() - 1.0) > 1e-6)
      throw ParameterError("inception_score: row " + std::to_string(r) + " does not sum to 1");
  }
  double total = 0;
  const Eigen::Index n = p.rows();
  for (int s = 0; s < splits; ++s) {
    const Eigen::Index lo = n * s / splits, hi = n * (s + 1) / splits;
    const Eigen::MatrixXd part = p.middleRows(lo, hi - lo);
    const Eigen::RowVectorXd py = part.colwise().mean();
    double kl = 0;
    for (Eigen::Index r = 0; r < part.rows(); ++r)
      for (Eigen::Index c = 0; c < part.cols(); ++c)
        if (part(r, c) > 0) kl += part(r, c) * (std::log(part(r, c)) - std::log(py[c]));
    total += std::exp(kl / static_cast<double>(part.rows()));
  }
  return total / splits;
}

double frechet_distance(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& sigma1, const Eigen::VectorXd& mu2,
                        const Eigen::MatrixXd& sigma2) {
  const Eigen::MatrixXd s1 = psd_sqrt(sigma1, "fid");
  const double cross = sqrt_trace(s1 * sigma2 * s1);
  const double d = (mu1 - mu2).squaredNorm() + sigma1.trace() + sigma2.trace() - 2.0 * cross;
  return std::max(0.0, d);
}

double fid(const Eigen::MatrixXd& features_real, const Eigen::MatrixXd& features_fake) {
  if (features_real.cols() != features_fake.cols())
    throw ParameterError("fid: feature dimensions differ (" + std::to_string(features_real.cols()) + " vs " +
                         std::to_string(features_fake.cols()) + ")");
  if (features_real.rows() == 0 || features_fake.rows() == 0) throw ParameterError("fid: empty feature set");
  if (!features_real.allFinite() || !features_fake.allFinite()) throw ParameterError("fid: non-finite features");
  Eigen::VectorXd mu1, mu2;
  Eigen::MatrixXd s1, s2;
  moments(features_real, mu1, s1);
  moments(features_fake, mu2, s2);
  return frechet_distance(mu1, s1, mu2, s2);
}

}  // namespace pgi
