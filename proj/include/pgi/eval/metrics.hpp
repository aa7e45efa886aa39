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

#pragma once

#include <Eigen/Core>

#include "pgi/tensor/tensor.hpp"

namespace pgi {

inline constexpr double kPsnrCap = 100.0;

/// Maps generator space [-1, 1] to metric space [0, 1].
Tensor<double> to_metric_space(const Tensor<float>& images);

/// 100 × mean |gt − pred| over every image, pixel and channel.
double l1_metric(const Tensor<double>& ground_truth, const Tensor<double>& prediction);

/// 10·log10(max² / MSE) over the whole tensor; MSE = 0 gives kPsnrCap.
double psnr(const Tensor<double>& ground_truth, const Tensor<double>& prediction, double max_value = 1.0);

/// Mean of per-image PSNR values along the batch dimension.
double mean_psnr(const Tensor<double>& ground_truth, const Tensor<double>& prediction, double max_value = 1.0);

/// exp(E_x KL(p(y|x) ‖ p(y))) on N×C class probabilities, averaged over
/// `splits` equal chunks.
double inception_score(const Eigen::MatrixXd& probabilities, int splits = 1);

/// Fréchet distance between Gaussian fits of two feature sets (rows are samples).
double fid(const Eigen::MatrixXd& features_real, const Eigen::MatrixXd& features_fake);

/// Fréchet distance from precomputed moments.
double frechet_distance(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& sigma1, const Eigen::VectorXd& mu2,
                        const Eigen::MatrixXd& sigma2);

}  // namespace pgi
