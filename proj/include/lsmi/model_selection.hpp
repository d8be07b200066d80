// Copyright 2026 The LSMI-Sinkhorn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

#include "lsmi/estimator.hpp"

namespace lsmi {

struct CvGrid {
  std::vector<double> lambdas{0.1, 0.01, 0.001, 0.0001};
  std::vector<double> betas{0.2, 0.4, 0.6, 0.8, 1.0};
  double holdout_fraction = 0.5;
  std::uint64_t seed = 0;
};

struct CvScore {
  double lambda;
  double beta;
  double score;
};

struct CvReport {
  std::vector<CvScore> scores;  // grid order: lambdas outer, betas inner
  double best_lambda = 0.0;
  double best_beta = 0.0;
  double best_score = 0.0;
};

/// 1/(2m^2) sum over all m^2 (x, y) combinations of r^2, minus the mean of
/// r over the m true pairs. Requires m >= 2.
double holdout_error(const RatioModel& model, const SampleMatrix& test_x,
                     const SampleMatrix& test_y);

/// Lowest score; exact ties go to larger lambda, then larger beta.
CvScore select_best(const std::vector<CvScore>& scores);

/// Single seeded hold-out split of the paired rows. Every grid point is fit
/// on the training pairs plus all unpaired samples with one shared basis and
/// scored on the held-out pairs. Ties go to larger lambda, then larger beta.
CvReport cross_validate(const SampleSet& data, const EstimatorConfig& config,
                        const CvGrid& grid);

}  // namespace lsmi
