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

#include <cstdint>
#include <vector>

#include "pgi/mask_engine/mask.hpp"

namespace pgi {

/// Maps iterations to curriculum stages. A schedule with
/// start_fraction == end_fraction is a fixed-size schedule.
struct CurriculumSchedule {
  long long stage_length_k = 100000;
  int num_stages = 10;
  double start_fraction = 0.1;
  double end_fraction = 0.5;
  /// Optional per-stage adversarial weights; empty means "derive from setup".
  std::vector<double> adv_weight_per_stage;

  static CurriculumSchedule growing(long long total_iterations, long long k, double start_fraction = 0.1);
  static CurriculumSchedule fixed(long long total_iterations, long long k, double fraction = 0.5);

  long long total_iterations() const { return stage_length_k * num_stages; }
  void validate() const;
};

int stage_for_iteration(const CurriculumSchedule& schedule, long long iteration);
double mask_fraction_for_stage(const CurriculumSchedule& schedule, int stage);

/// Masks for one training batch. Each sample draws from its own counter
/// stream keyed by (seed, iteration, sample index), so the result does not
/// depend on call order or on which worker produced it.
std::vector<Mask> masks_for_batch(const CurriculumSchedule& schedule, long long iteration, int batch_size,
                                  int resolution, ModelFamily family, std::uint64_t seed);

/// Mask generated for a given fraction and family, independent of any schedule.
Mask mask_for_fraction(double fraction, int resolution, ModelFamily family, std::uint64_t key);

}  // namespace pgi
