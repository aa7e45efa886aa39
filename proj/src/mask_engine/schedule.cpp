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

#include "pgi/mask_engine/schedule.hpp"

#include <cmath>

#include "pgi/common/error.hpp"
#include "pgi/common/rng.hpp"

namespace pgi {

CurriculumSchedule CurriculumSchedule::growing(long long total_iterations, long long k, double start_fraction) {
  if (k <= 0 || total_iterations <= 0 || total_iterations % k != 0)
    throw ParameterError("total iterations (" + std::to_string(total_iterations) +
                         ") must be a positive multiple of the stage length (" + std::to_string(k) + ")");
  CurriculumSchedule s;
  s.stage_length_k = k;
  s.num_stages = static_cast<int>(total_iterations / k);
  s.start_fraction = start_fraction;
  s.end_fraction = 0.5;
  s.validate();
  return s;
}

CurriculumSchedule CurriculumSchedule::fixed(long long total_iterations, long long k, double fraction) {
  auto s = growing(total_iterations, k, fraction);
  s.end_fraction = fraction;
  s.validate();
  return s;
}

void CurriculumSchedule::validate() const {
  if (stage_length_k <= 0) throw ParameterError("stage length must be positive");
  if (num_stages <= 0) throw ParameterError("schedule needs at least one stage");
  if (!(start_fraction >= 0.0 && start_fraction <= end_fraction && end_fraction <= 0.5))
    throw ParameterError("schedule fractions must satisfy 0 <= start <= end <= 0.5");
  if (!adv_weight_per_stage.empty() && adv_weight_per_stage.size() != static_cast<std::size_t>(num_stages))
    throw ParameterError("adv_weight_per_stage needs one entry per stage");
  for (double w : adv_weight_per_stage)
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("adversarial weights must be finite and non-negative");
}

int stage_for_iteration(const CurriculumSchedule& schedule, long long iteration) {
  if (iteration < 0 || iteration >= schedule.total_iterations())
    throw ParameterError("iteration " + std::to_string(iteration) + " outside [0, " +
                         std::to_string(schedule.total_iterations()) + ")");
  const long long stage = iteration / schedule.stage_length_k;
  return static_cast<int>(std::min<long long>(stage, schedule.num_stages - 1));
}

double mask_fraction_for_stage(const CurriculumSchedule& schedule, int stage) {
  if (stage < 0 || stage >= schedule.num_stages)
    throw ParameterError("stage " + std::to_string(stage) + " outside [0, " + std::to_string(schedule.num_stages) + ")");
  if (stage == schedule.num_stages - 1) return schedule.end_fraction;
  const double t = static_cast<double>(stage) / static_cast<double>(schedule.num_stages - 1);
  return schedule.start_fraction + t * (schedule.end_fraction - schedule.start_fraction);
}

Mask mask_for_fraction(double fraction, int resolution, ModelFamily family, std::uint64_t key) {
  if (family == ModelFamily::context_encoder) return generate_center_rect_mask(resolution, fraction);
  return generate_freeform_mask(resolution, MaskSpec::free_form_for_fraction(fraction, resolution), key);
}

std::vector<Mask> masks_for_batch(const CurriculumSchedule& schedule, long long iteration, int batch_size,
                                  int resolution, ModelFamily family, std::uint64_t seed) {
  if (batch_size < 0) throw ParameterError("batch size must be non-negative");
  const double fraction = mask_fraction_for_stage(schedule, stage_for_iteration(schedule, iteration));
  std::vector<Mask> out;
  out.reserve(static_cast<std::size_t>(batch_size));
  for (int i = 0; i < batch_size; ++i) {
    const auto key = derive_key(seed, {stream::kMasks, static_cast<std::uint64_t>(iteration), static_cast<std::uint64_t>(i)});
    out.push_back(mask_for_fraction(fraction, resolution, family, key));
  }
  return out;
}

}  // namespace pgi
